#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "qfc/model.hpp"

namespace qfc {

// Stage observables L(u), terminal observable N and risk parameter mu.
// The terminal multiplicative observable F = exp(mu N) is computed once.
class CostModel {
public:
    CostModel(std::vector<HermitianMatrix> stage, HermitianMatrix terminal, double mu)
        : stage_(std::move(stage)), terminal_(std::move(terminal)), mu_(mu) {
        if (stage_.empty())
            throw InvariantViolation("CostModel: no stage observables");
        if (!(mu_ >= 0.0) || !std::isfinite(mu_))
            throw InvariantViolation("CostModel: mu must be a finite non-negative number");
        for (const auto& l : stage_) {
            if (l.dim() != terminal_.dim())
                throw DimensionMismatch("CostModel: stage observable dimension mismatch");
            if (!psd_check(l))
                throw InvariantViolation("CostModel: stage observable L(u) is not non-negative");
        }
        if (!psd_check(terminal_))
            throw InvariantViolation("CostModel: terminal observable N is not non-negative");
        terminal_mult_ = herm_exp(terminal_, mu_);
    }

    [[nodiscard]] const HermitianMatrix& stage(ControlIndex u) const {
        if (u >= stage_.size())
            throw UnknownLabel("CostModel: control index out of range");
        return stage_[u];
    }
    [[nodiscard]] const std::vector<HermitianMatrix>& stages() const { return stage_; }
    [[nodiscard]] const HermitianMatrix& terminal() const { return terminal_; }
    [[nodiscard]] const HermitianMatrix& terminal_mult() const { return terminal_mult_; }
    [[nodiscard]] double mu() const { return mu_; }
    [[nodiscard]] std::size_t dim() const { return terminal_.dim(); }
    [[nodiscard]] std::size_t num_controls() const { return stage_.size(); }

    [[nodiscard]] CostModel with_mu(double mu) const { return CostModel(stage_, terminal_, mu); }

private:
    std::vector<HermitianMatrix> stage_;
    HermitianMatrix terminal_;
    double mu_ = 0.0;
    HermitianMatrix terminal_mult_;
};

// ============================================================================
// OperatorValuedCost
// ============================================================================
// R(u) acting on unnormalized states, real multiplicatively homogeneous.
//   LinearKraus:   R(u) w = sum_c Z_c(u) w Z_c(u)
//   RiskSensitive: R(u) w = (<w, exp(mu L(u))> / <w, I>) w
class OperatorValuedCost {
public:
    struct LinearKraus {
        std::vector<std::vector<HermitianMatrix>> z; // [u] -> Z_c(u)
    };
    struct RiskSensitive {
        std::vector<HermitianMatrix> stage; // L(u)
        double mu = 0.0;
        std::vector<HermitianMatrix> exp_stage; // exp(mu L(u)), cached
    };

    static OperatorValuedCost linear_kraus(std::vector<std::vector<HermitianMatrix>> z) {
        if (z.empty())
            throw InvariantViolation("OperatorValuedCost: no controls");
        for (const auto& per_u : z) {
            if (per_u.empty())
                throw InvariantViolation("OperatorValuedCost: empty Z family");
            for (const auto& zc : per_u)
                if (!psd_check(zc))
                    throw InvariantViolation("OperatorValuedCost: Z_c(u) must be positive semidefinite");
        }
        return OperatorValuedCost(LinearKraus{std::move(z)});
    }

    static OperatorValuedCost risk_sensitive(std::vector<HermitianMatrix> stage, double mu) {
        if (!(mu >= 0.0))
            throw InvariantViolation("OperatorValuedCost: mu must be non-negative");
        RiskSensitive rs{std::move(stage), mu, {}};
        for (const auto& l : rs.stage)
            rs.exp_stage.push_back(herm_exp(l, mu));
        return OperatorValuedCost(std::move(rs));
    }

    static OperatorValuedCost risk_sensitive(const CostModel& cost) {
        return risk_sensitive(cost.stages(), cost.mu());
    }

    [[nodiscard]] bool is_linear() const { return std::holds_alternative<LinearKraus>(repr_); }
    [[nodiscard]] const RiskSensitive* risk_sensitive_repr() const { return std::get_if<RiskSensitive>(&repr_); }
    [[nodiscard]] const LinearKraus* linear_repr() const { return std::get_if<LinearKraus>(&repr_); }

    [[nodiscard]] std::size_t num_controls() const {
        return std::visit([](const auto& r) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(r)>, LinearKraus>)
                return r.z.size();
            else
                return r.stage.size();
        }, repr_);
    }

    // R(u) on a Hermitian argument with positive trace.
    [[nodiscard]] HermitianMatrix apply(ControlIndex u, const HermitianMatrix& w) const {
        check_control(u);
        if (const auto* rs = std::get_if<RiskSensitive>(&repr_))
            return w * scalar(*rs, u, w);
        const auto& lk = std::get<LinearKraus>(repr_);
        Matrix out = Matrix::Zero(w.matrix().rows(), w.matrix().cols());
        for (const auto& zc : lk.z[u])
            out += zc.matrix() * w.matrix() * zc.matrix();
        return HermitianMatrix::hermitized(out);
    }

    // <w, R^dag(u) B> = <R(u) w, B>; nonlinear in w for the risk-sensitive variant.
    [[nodiscard]] double adjoint_pairing(ControlIndex u, const HermitianMatrix& w, const HermitianMatrix& b) const {
        return pairing(apply(u, w), b);
    }

    // R^dag(u) as a matrix map; only defined for the linear variant.
    [[nodiscard]] std::optional<HermitianMatrix> linear_adjoint(ControlIndex u, const HermitianMatrix& b) const {
        check_control(u);
        const auto* lk = std::get_if<LinearKraus>(&repr_);
        if (!lk)
            return std::nullopt;
        Matrix out = Matrix::Zero(b.matrix().rows(), b.matrix().cols());
        for (const auto& zc : lk->z[u])
            out += zc.matrix() * b.matrix() * zc.matrix();
        return HermitianMatrix::hermitized(out);
    }

    // The scalar <w, exp(mu L(u))>/<w, I> for the risk-sensitive variant.
    [[nodiscard]] std::optional<double> risk_scalar(ControlIndex u, const HermitianMatrix& w) const {
        check_control(u);
        if (const auto* rs = std::get_if<RiskSensitive>(&repr_))
            return scalar(*rs, u, w);
        return std::nullopt;
    }

private:
    explicit OperatorValuedCost(std::variant<LinearKraus, RiskSensitive> r) : repr_(std::move(r)) {}

    static double scalar(const RiskSensitive& rs, ControlIndex u, const HermitianMatrix& w) {
        const double tr = w.trace();
        if (!(std::abs(tr) > tolerances().zero_trace))
            throw ZeroState("R(u): zero state");
        return pairing(w, rs.exp_stage[u]) / tr;
    }

    void check_control(ControlIndex u) const {
        if (u >= num_controls())
            throw UnknownLabel("OperatorValuedCost: control index out of range");
    }

    std::variant<LinearKraus, RiskSensitive> repr_;
};

// ============================================================================
// Unnormalized (risk-sensitive) filter
// ============================================================================

inline DensityState apply_R(const OperatorValuedCost& cost, ControlIndex u, const DensityState& state) {
    return DensityState(cost.apply(u, state.hermitian()));
}

// Gamma_R(u,y) w = Gamma(u,y) R(u) w.
inline HermitianMatrix gammaR_apply(const TransferModel& model, const OperatorValuedCost& cost, ControlIndex u,
                                    OutcomeIndex y, const DensityState& state) {
    return model.apply(u, y, cost.apply(u, state.hermitian()));
}

// p_R(y|u,w) = <Gamma_R(u,y) w, I> / <R(u) w, I>.
inline double pR(const TransferModel& model, const OperatorValuedCost& cost, ControlIndex u,
                 const DensityState& state, OutcomeIndex y) {
    const HermitianMatrix rw = cost.apply(u, state.hermitian());
    const double denom = rw.trace();
    if (!(denom > tolerances().zero_trace * std::max(1.0, state.trace())))
        throw ZeroState("pR: <R(u) w, I> is zero");
    const double p = model.apply(u, y, rw).trace() / denom;
    return std::clamp(p, 0.0, 1.0);
}

inline std::vector<double> pR_all(const TransferModel& model, const OperatorValuedCost& cost, ControlIndex u,
                                  const DensityState& state) {
    const HermitianMatrix rw = cost.apply(u, state.hermitian());
    const double denom = rw.trace();
    if (!(denom > tolerances().zero_trace * std::max(1.0, state.trace())))
        throw ZeroState("pR: <R(u) w, I> is zero");
    std::vector<double> ps(model.num_outcomes());
    for (OutcomeIndex y = 0; y < ps.size(); ++y)
        ps[y] = std::clamp(model.apply(u, y, rw).trace() / denom, 0.0, 1.0);
    return ps;
}

// Lambda_{Gamma,R}(u,y) w = Gamma_R(u,y) w / p_R(y|u,w); trace equals <R(u) w, I>.
inline DensityState rs_update(const TransferModel& model, const OperatorValuedCost& cost, ControlIndex u,
                              OutcomeIndex y, const DensityState& state) {
    const HermitianMatrix rw = cost.apply(u, state.hermitian());
    const double denom = rw.trace();
    if (!(denom > tolerances().zero_trace * std::max(1.0, state.trace())))
        throw ZeroState("rs_update: <R(u) w, I> is zero");
    const HermitianMatrix g = model.apply(u, y, rw);
    const double p = g.trace() / denom;
    if (!(p > tolerances().branch))
        throw ZeroProbabilityBranch("rs_update: outcome '" + model.outcomes()[y] + "' has zero probability");
    return DensityState(g * (1.0 / p));
}

// Normalized shadow of a risk-sensitive trajectory: the SME states w_k and
// the cumulative scalars prod_{i<k} <w_i, exp(mu L(u_i))>, with the check
// w_hat_k = <w_hat_0, I> * scalar_k * w_k.
struct ShadowTrajectory {
    std::vector<double> scalars;               // one per time k = 0..n
    std::vector<DensityState> normalized;      // w_k
    std::vector<DensityState> unnormalized;    // w_hat_k
    double max_deviation = 0.0;                // max relative entrywise deviation
};

inline ShadowTrajectory normalized_shadow(const TransferModel& model, const OperatorValuedCost& cost,
                                          const DensityState& initial,
                                          const std::vector<std::pair<ControlIndex, OutcomeIndex>>& steps,
                                          double tol = 1e-8) {
    const auto* rs = cost.risk_sensitive_repr();
    if (!rs)
        throw InvariantViolation("normalized_shadow: requires the risk-sensitive operator-valued cost");
    ShadowTrajectory t;
    DensityState w = initial.normalized();
    DensityState w_hat = initial;
    const double mass = initial.trace();
    double scalar = 1.0;
    auto record = [&] {
        t.scalars.push_back(scalar);
        t.normalized.push_back(w);
        t.unnormalized.push_back(w_hat);
        const double dev = (w.hermitian() * (scalar * mass)).distance(w_hat.hermitian()) / std::max(1.0, w_hat.trace());
        t.max_deviation = std::max(t.max_deviation, dev);
    };
    record();
    for (const auto& [u, y] : steps) {
        scalar *= value(w, rs->exp_stage.at(u));
        w_hat = rs_update(model, cost, u, y, w_hat);
        w = conditional_update(model, u, y, w);
        record();
    }
    if (t.max_deviation > tol)
        throw InvariantViolation("normalized_shadow: unnormalized state deviates from scalar * SME state");
    return t;
}

} // namespace qfc
