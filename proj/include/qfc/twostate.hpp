#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "qfc/dp.hpp"

namespace qfc::twostate {

// Two-level system regulated towards |1>: controls "0" (do nothing) and "1"
// (NOT gate), outcomes "-1" and "1" from a projective measurement of
// A = diag(-1, 1) read through a binary symmetric channel with error alpha.
// Basis order is (|-1>, |1>), so index 0 of every matrix is the |-1> level.

struct Params {
    double alpha = 0.25;
    double p = 0.2;
    double mu = 2.0;

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0))
            throw InvariantViolation("twostate: alpha must lie in [0, 1]");
        if (!(p >= 0.0))
            throw InvariantViolation("twostate: p must be non-negative");
        if (!(mu >= 0.0))
            throw InvariantViolation("twostate: mu must be non-negative");
    }
};

inline constexpr ControlIndex kIdle = 0;
inline constexpr ControlIndex kFlip = 1;
inline constexpr OutcomeIndex kMinus = 0; // y = -1
inline constexpr OutcomeIndex kPlus = 1;  // y = +1

inline LabelSet control_labels() { return LabelSet({"0", "1"}); }
inline LabelSet outcome_labels() { return LabelSet({"-1", "1"}); }

inline Matrix unitary(ControlIndex u) {
    Matrix t(2, 2);
    if (u == kIdle)
        t << 1, 0, 0, 1;
    else
        t << 0, 1, 1, 0;
    return t;
}

inline Matrix projector(OutcomeIndex a) {
    Matrix p = Matrix::Zero(2, 2);
    p(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) = 1.0;
    return p;
}

// Built generically: unitary dynamics, projectors P_{-1}, P_1 and kernel
// q(y|a) = 1 - alpha if y == a else alpha.
inline TransferModel build_two_state_model(double alpha) {
    Params{alpha, 0.0, 0.0}.validate();
    std::vector<KrausFamily> dyn{KrausFamily{{unitary(kIdle)}}, KrausFamily{{unitary(kFlip)}}};
    MeasurementSpec meas;
    meas.projectors = {projector(kMinus), projector(kPlus)};
    meas.kernel = {{1.0 - alpha, alpha}, {alpha, 1.0 - alpha}};
    return build_imperfect_model(2, control_labels(), outcome_labels(), std::move(dyn), std::move(meas));
}

// The same operators entered directly from their closed forms, e.g.
// Gamma(1,-1) w = diag((1-alpha) w22, alpha w11).
inline TransferModel build_two_state_model_explicit(double alpha) {
    Params{alpha, 0.0, 0.0}.validate();
    auto ket_bra = [](Eigen::Index i, Eigen::Index j, double amp) {
        Matrix m = Matrix::Zero(2, 2);
        m(i, j) = amp;
        return m;
    };
    const double keep = std::sqrt(1.0 - alpha);
    const double err = std::sqrt(alpha);
    std::vector<std::vector<std::vector<Matrix>>> terms(2, std::vector<std::vector<Matrix>>(2));
    terms[kIdle][kMinus] = {ket_bra(0, 0, keep), ket_bra(1, 1, err)};
    terms[kIdle][kPlus] = {ket_bra(0, 0, err), ket_bra(1, 1, keep)};
    terms[kFlip][kMinus] = {ket_bra(0, 1, keep), ket_bra(1, 0, err)};
    terms[kFlip][kPlus] = {ket_bra(0, 1, err), ket_bra(1, 0, keep)};
    return TransferModel::explicit_terms(2, control_labels(), outcome_labels(), std::move(terms));
}

// X^2 = diag(1, 0): unit cost in |-1>, none in |1>.
inline HermitianMatrix x_squared() { return HermitianMatrix::diagonal({1.0, 0.0}); }

// L(0) = X^2, L(1) = X^2 + p I, N = X^2.
inline CostModel build_two_state_costs(double p, double mu) {
    Params{0.0, p, mu}.validate();
    return CostModel({x_squared(), x_squared() + HermitianMatrix::identity(2) * p}, x_squared(), mu);
}

// (|-1> + |1>)/sqrt(2), i.e. 1/2 [[1,1],[1,1]].
inline DensityState initial_state() {
    Matrix m(2, 2);
    m << 0.5, 0.5, 0.5, 0.5;
    return DensityState(m);
}

// u_0 = 0; u_1 = 1 after y_1 = -1 and 0 after y_1 = 1.
inline Controller reference_controller() {
    return Controller::table({{{}, kIdle}, {{kMinus}, kFlip}, {{kPlus}, kIdle}});
}

// ============================================================================
// Closed forms for horizon M = 2
// ============================================================================

struct ClosedForm {
    double v0 = 0.0; // value of control 0
    double v1 = 0.0; // value of control 1
    double v = 0.0;  // node value
};

// Risk-neutral node values. With the stage term split off,
// V(w,k) = w11 + min(V0, V1) for k in {0, 1}.
inline ClosedForm appendix_V(const DensityState& omega, int k, double alpha, double p) {
    Params{alpha, p, 0.0}.validate();
    if (!omega.is_normalized())
        throw InvariantViolation("appendix_V: omega must be a normalized density matrix");
    const double x = omega(0, 0).real();
    const double z = omega(1, 1).real();
    ClosedForm f;
    if (k == 1) {
        f.v0 = x;
        f.v1 = z + p;
    } else if (k == 0) {
        // Branch masses: after control 0 outcome -1 has mass (1-a)x + az; after control 1 it has (1-a)z + ax.
        const double idle_minus = (1.0 - alpha) * x + alpha * z;
        const double idle_plus = alpha * x + (1.0 - alpha) * z;
        const double flip_minus = (1.0 - alpha) * z + alpha * x;
        const double flip_plus = alpha * z + (1.0 - alpha) * x;
        f.v0 = x + std::min((1.0 - alpha) * x, alpha * z + p * idle_minus) +
               std::min(alpha * x, (1.0 - alpha) * z + p * idle_plus);
        f.v1 = p + z + std::min((1.0 - alpha) * z, alpha * x + p * flip_minus) +
               std::min(alpha * z, (1.0 - alpha) * x + p * flip_plus);
    } else {
        throw InvariantViolation("appendix_V: k must be 0 or 1");
    }
    f.v = x + std::min(f.v0, f.v1);
    return f;
}

// Risk-sensitive node values; W = min(W0, W1) for k in {0, 1} and
// W(w,2) = e^mu w11 + w22. Depends on the diagonal of w_hat only.
inline ClosedForm appendix_W(const DensityState& omega_hat, int k, double alpha, double p, double mu) {
    Params{alpha, p, mu}.validate();
    const double x = omega_hat(0, 0).real();
    const double z = omega_hat(1, 1).real();
    const double a = alpha;
    const double e = std::exp(mu);
    const double e2 = e * e;
    const double ep = std::exp(mu * p);
    const double ep2 = std::exp(2.0 * mu * p);
    const double s = x + z;
    ClosedForm f;
    if (k == 2) {
        f.v0 = f.v1 = f.v = e * x + z;
        return f;
    }
    if (k == 1) {
        f.v0 = (e * x + z) * (e * x + z) / s;
        f.v1 = ep * (x * z + e2 * x * z + e * (x * x + z * z)) / s;
    } else if (k == 0) {
        const double lead = (e * x + z) / s;
        const double d_minus = (a - 1.0) * x - a * z; // minus the y=-1 branch mass under control 0
        const double d_plus = a * (x - z) + z;        // the y=1 branch mass under control 0
        const double poly_minus =
            -(a - 1.0) * a * x * z - (a - 1.0) * a * e2 * x * z + e * ((a - 1.0) * (a - 1.0) * x * x + a * a * z * z);
        const double poly_plus =
            e * z * z + a * z * (x + e2 * x - 2.0 * e * z) + a * a * (-x * z - e2 * x * z + e * (x * x + z * z));
        // A zero-mass branch contributes nothing.
        auto branch = [](double d, double first, double second) {
            return std::abs(d) <= tolerances().zero_trace ? 0.0 : std::min(first / d, second / d);
        };
        const double idle_sq_minus = (a - 1.0) * e * x - a * z;
        const double idle_sq_plus = a * e * x + z - a * z;
        const double flip_sq_minus = x - a * x + a * e * z;
        const double flip_sq_plus = e * z + a * (x - e * z);
        f.v0 = branch(d_minus, -lead * idle_sq_minus * idle_sq_minus, -ep * lead * poly_minus) +
               branch(d_plus, lead * idle_sq_plus * idle_sq_plus, ep * lead * poly_plus);
        f.v1 = branch(d_minus, -ep * lead * flip_sq_minus * flip_sq_minus, -ep2 * lead * poly_minus) +
               branch(d_plus, ep * lead * flip_sq_plus * flip_sq_plus, ep2 * lead * poly_plus);
    } else {
        throw InvariantViolation("appendix_W: k must be 0, 1 or 2");
    }
    f.v = std::min(f.v0, f.v1);
    return f;
}

// ============================================================================
// Threshold scan at the node reached by u_0 = 0, y_1 = -1
// ============================================================================

struct ThresholdRow {
    double p = 0.0;
    ControlIndex risk_neutral = 0;
    ControlIndex risk_sensitive = 0;
};

struct ThresholdScan {
    std::vector<ThresholdRow> rows;
    std::optional<double> risk_neutral_last_active;   // largest p with control 1
    std::optional<double> risk_sensitive_last_active;
};

inline ThresholdScan threshold_scan(double alpha, double mu, const std::vector<double>& p_grid) {
    const TransferModel model = build_two_state_model(alpha);
    const DensityState w0 = initial_state();
    ThresholdScan scan;
    for (double p : p_grid) {
        const CostModel cost = build_two_state_costs(p, mu);
        const PolicyTree rn = solve_risk_neutral(model, cost, 2, w0);
        const PolicyTree rs = solve_risk_sensitive(model, cost, 2, w0);
        if (extract_control(rn, {}) != kIdle || extract_control(rs, {}) != kIdle)
            throw InvariantViolation("threshold_scan: root control is not 0 at p = " + std::to_string(p));
        ThresholdRow row{p, extract_control(rn, {kMinus}), extract_control(rs, {kMinus})};
        if (row.risk_neutral == kFlip)
            scan.risk_neutral_last_active = std::max(scan.risk_neutral_last_active.value_or(p), p);
        if (row.risk_sensitive == kFlip)
            scan.risk_sensitive_last_active = std::max(scan.risk_sensitive_last_active.value_or(p), p);
        scan.rows.push_back(row);
    }
    return scan;
}

} // namespace qfc::twostate
