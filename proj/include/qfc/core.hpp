#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qfc/errors.hpp"

namespace qfc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

// ============================================================================
// Tolerances
// ============================================================================
// Every numeric threshold used by the library lives here so tests and the CLI
// can switch profiles in one place.
struct Tolerances {
    double hermiticity = 1e-12; // |m - m^dag| entrywise, relative to max(1, |m|_max)
    double psd = 1e-9;          // smallest eigenvalue >= -psd (scaled by trace for unnormalized states)
    double probability = 1e-9;  // sum-to-one and [0,1] range slack
    double value = 1e-9;        // value comparison / argmin ties
    double zero_trace = 1e-12;  // traces at or below this are zero states
    double branch = 1e-12;      // outcome probabilities at or below this are pruned
    double imaginary = 1e-9;    // residual imaginary part allowed in a real pairing
};

inline Tolerances& tolerances() {
    static Tolerances tol;
    return tol;
}

// Named profiles: "default", "strict", "loose".
inline Tolerances tolerance_profile(const std::string& name) {
    Tolerances t;
    if (name == "default" || name.empty())
        return t;
    if (name == "strict") {
        t.psd = 1e-11;
        t.probability = 1e-11;
        t.value = 1e-11;
        return t;
    }
    if (name == "loose") {
        t.hermiticity = 1e-9;
        t.psd = 1e-7;
        t.probability = 1e-7;
        t.value = 1e-7;
        t.imaginary = 1e-7;
        return t;
    }
    throw ParseError("unknown tolerance profile '" + name + "'");
}

namespace detail {

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline Matrix hermitize(const Matrix& m) {
    return (m + m.adjoint()) * 0.5;
}

inline void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols())
        throw DimensionMismatch(std::string(what) + ": matrix is not square");
}

} // namespace detail

// ============================================================================
// HermitianMatrix
// ============================================================================
// Dense complex self-adjoint matrix. Construction from an arbitrary matrix
// checks hermiticity; results of arithmetic are re-hermitized as (M + M^dag)/2.
class HermitianMatrix {
public:
    HermitianMatrix() = default;

    explicit HermitianMatrix(const Matrix& m) {
        detail::require_square(m, "HermitianMatrix");
        const double scale = std::max(1.0, detail::max_abs(m));
        if (detail::max_abs(m - m.adjoint()) > tolerances().hermiticity * scale)
            throw InvariantViolation("HermitianMatrix: input is not self-adjoint");
        m_ = detail::hermitize(m);
    }

    // Skips the hermiticity check; use for results that are Hermitian up to rounding.
    static HermitianMatrix hermitized(const Matrix& m) {
        detail::require_square(m, "HermitianMatrix");
        HermitianMatrix h;
        h.m_ = detail::hermitize(m);
        return h;
    }

    static HermitianMatrix zero(std::size_t dim) {
        return hermitized(Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
    }

    static HermitianMatrix identity(std::size_t dim) {
        return hermitized(Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
    }

    static HermitianMatrix diagonal(const std::vector<double>& d) {
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
        return hermitized(m);
    }

    static HermitianMatrix diagonal(std::initializer_list<double> d) {
        return diagonal(std::vector<double>(d));
    }

    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    [[nodiscard]] const Matrix& matrix() const { return m_; }
    [[nodiscard]] Complex operator()(std::size_t i, std::size_t j) const {
        return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    [[nodiscard]] double trace() const { return m_.trace().real(); }

    // Eigenvalues in ascending order.
    [[nodiscard]] Eigen::VectorXd eigenvalues() const {
        if (dim() == 0)
            return {};
        Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }

    [[nodiscard]] double min_eigenvalue() const {
        auto ev = eigenvalues();
        return ev.size() == 0 ? 0.0 : ev(0);
    }

    HermitianMatrix& operator+=(const HermitianMatrix& o) {
        check_same_dim(o);
        m_ += o.m_;
        return *this;
    }
    HermitianMatrix& operator-=(const HermitianMatrix& o) {
        check_same_dim(o);
        m_ -= o.m_;
        return *this;
    }
    HermitianMatrix& operator*=(double r) {
        m_ *= r;
        return *this;
    }

    friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
    friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
    friend HermitianMatrix operator*(HermitianMatrix a, double r) { return a *= r; }
    friend HermitianMatrix operator*(double r, HermitianMatrix a) { return a *= r; }

    // Largest absolute entrywise difference.
    [[nodiscard]] double distance(const HermitianMatrix& o) const {
        check_same_dim(o);
        return detail::max_abs(m_ - o.m_);
    }

private:
    void check_same_dim(const HermitianMatrix& o) const {
        if (o.dim() != dim())
            throw DimensionMismatch("HermitianMatrix: dimension mismatch");
    }

    Matrix m_;
};

// ============================================================================
// DensityState
// ============================================================================
// A positive semidefinite matrix with strictly positive trace. Normalized
// states (trace 1) and unnormalized risk-sensitive states share this type;
// the trace carries the normalization.
class DensityState {
public:
    explicit DensityState(HermitianMatrix m) : m_(std::move(m)) {
        const double tr = m_.trace();
        if (!(tr > tolerances().zero_trace))
            throw ZeroState("DensityState: trace " + std::to_string(tr) + " is not positive");
        if (m_.min_eigenvalue() < -tolerances().psd * std::max(1.0, tr))
            throw InvariantViolation("DensityState: matrix is not positive semidefinite");
    }

    explicit DensityState(const Matrix& m) : DensityState(HermitianMatrix(m)) {}

    [[nodiscard]] const HermitianMatrix& hermitian() const { return m_; }
    [[nodiscard]] const Matrix& matrix() const { return m_.matrix(); }
    [[nodiscard]] std::size_t dim() const { return m_.dim(); }
    [[nodiscard]] double trace() const { return m_.trace(); }
    [[nodiscard]] Complex operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

    [[nodiscard]] bool is_normalized() const {
        return std::abs(trace() - 1.0) <= tolerances().probability;
    }

    [[nodiscard]] DensityState normalized() const { return scaled(1.0 / trace()); }

    [[nodiscard]] DensityState scaled(double r) const { return DensityState(m_ * r); }

    // trace(rho^2) / trace(rho)^2
    [[nodiscard]] double purity() const {
        const double tr = trace();
        return (m_.matrix() * m_.matrix()).trace().real() / (tr * tr);
    }

private:
    HermitianMatrix m_;
};

// Pure state |psi><psi| from an amplitude vector (normalized on the way in).
inline DensityState pure_state(const Eigen::VectorXcd& psi) {
    const double n = psi.norm();
    if (!(n > 0.0))
        throw ZeroState("pure_state: zero vector");
    const Eigen::VectorXcd v = psi / n;
    return DensityState(HermitianMatrix::hermitized(v * v.adjoint()));
}

// Maximally mixed state I/d.
inline DensityState maximally_mixed(std::size_t dim) {
    return DensityState(HermitianMatrix::identity(dim) * (1.0 / static_cast<double>(dim)));
}

// ============================================================================
// Pairings and functions of observables
// ============================================================================

// <a, b> = tr(b a), real for Hermitian arguments.
inline double pairing(const HermitianMatrix& a, const HermitianMatrix& b) {
    if (a.dim() != b.dim())
        throw DimensionMismatch("pairing: dimension mismatch");
    const Complex t = (b.matrix().cwiseProduct(a.matrix().transpose())).sum();
    const double scale = std::max(1.0, std::abs(t));
    if (std::abs(t.imag()) > tolerances().imaginary * scale)
        throw InvariantViolation("pairing: trace has a non-negligible imaginary part");
    return t.real();
}

// Expected value of an observable in a state: tr(obs * state).
inline double value(const DensityState& state, const HermitianMatrix& obs) {
    return pairing(state.hermitian(), obs);
}

// exp(scale * obs) via eigendecomposition.
inline HermitianMatrix herm_exp(const HermitianMatrix& obs, double scale) {
    if (obs.dim() == 0)
        return obs;
    Eigen::SelfAdjointEigenSolver<Matrix> es(obs.matrix());
    const Eigen::VectorXd ev = (es.eigenvalues() * scale).array().exp();
    const Matrix& v = es.eigenvectors();
    return HermitianMatrix::hermitized(v * ev.cast<Complex>().asDiagonal() * v.adjoint());
}

// True iff the smallest eigenvalue is >= -tol.
inline bool psd_check(const HermitianMatrix& m, double tol) {
    return m.min_eigenvalue() >= -tol;
}

inline bool psd_check(const HermitianMatrix& m) {
    return psd_check(m, tolerances().psd);
}

} // namespace qfc
