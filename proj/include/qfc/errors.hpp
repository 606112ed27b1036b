#pragma once

#include <stdexcept>
#include <string>

namespace qfc {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class UnknownLabel : public Error {
public:
    using Error::Error;
};

// Raised when a conditional update is requested on an outcome of
// (numerically) zero probability. Enumerators and solvers skip such branches.
class ZeroProbabilityBranch : public Error {
public:
    using Error::Error;
};

// An unnormalized state with trace at or below the zero threshold.
class ZeroState : public Error {
public:
    using Error::Error;
};

// A numeric invariant (normalization, positivity, Kraus completeness...) failed.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

class AbsoluteContinuityViolation : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace qfc
