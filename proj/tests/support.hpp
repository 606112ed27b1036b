#pragma once

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qfc/qfc.hpp"

namespace qt {

using qfc::Complex;
using qfc::Matrix;

inline Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

inline Matrix diag2(double a, double b) { return mat2(a, 0, 0, b); }

inline double max_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// The explicit two-state transfer maps, written out entry by entry.
inline Matrix gamma_hand(int u, int y, double a, const Matrix& w) {
    const double w11 = w(0, 0).real(), w22 = w(1, 1).real();
    if (u == 0 && y == -1) return diag2((1 - a) * w11, a * w22);
    if (u == 0 && y == 1) return diag2(a * w11, (1 - a) * w22);
    if (u == 1 && y == -1) return diag2((1 - a) * w22, a * w11);
    return diag2(a * w22, (1 - a) * w11);
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

} // namespace qt
