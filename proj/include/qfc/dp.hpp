#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "qfc/policy.hpp"
#include "qfc/riskcost.hpp"
#include "qfc/sim.hpp"

namespace qfc {

// ============================================================================
// Generic finite-horizon tree recursion
// ============================================================================
// A problem supplies the terminal value, an additive stage value and the
// per-outcome transitions of its filter. The solver expands every reachable
// history exactly (no discretization of the state space).

struct Branch {
    double probability = 0.0;
    DensityState next;
};

template <class P>
concept DpProblem = requires(const P& p, const DensityState& s, ControlIndex u) {
    { p.num_controls() } -> std::convertible_to<std::size_t>;
    { p.num_outcomes() } -> std::convertible_to<std::size_t>;
    { p.terminal(s) } -> std::convertible_to<double>;
    { p.stage(s, u) } -> std::convertible_to<double>;
    { p.transitions(s, u) } -> std::same_as<std::vector<std::optional<Branch>>>;
};

namespace detail {

template <DpProblem P>
double expand(const P& pb, const DensityState& state, History& history, std::size_t horizon,
              std::map<History, PolicyNode>& out) {
    if (history.size() == horizon) {
        PolicyNode leaf;
        leaf.value = pb.terminal(state);
        leaf.state = state.hermitian();
        out.emplace(history, std::move(leaf));
        return out.at(history).value;
    }

    const std::size_t nu = pb.num_controls();
    std::vector<double> comparands(nu);
    std::vector<std::map<History, PolicyNode>> subtrees(nu);
    std::vector<std::vector<double>> probs(nu);
    for (ControlIndex u = 0; u < nu; ++u) {
        double v = pb.stage(state, u);
        const auto branches = pb.transitions(state, u);
        probs[u].assign(pb.num_outcomes(), 0.0);
        for (OutcomeIndex y = 0; y < branches.size(); ++y) {
            if (!branches[y])
                continue;
            probs[u][y] = branches[y]->probability;
            history.push_back(y);
            v += branches[y]->probability * expand(pb, branches[y]->next, history, horizon, subtrees[u]);
            history.pop_back();
        }
        comparands[u] = v;
    }

    // Smallest index wins within the tie tolerance.
    ControlIndex best = 0;
    for (ControlIndex u = 1; u < nu; ++u) {
        const double tol = tolerances().value * std::max(1.0, std::abs(comparands[best]));
        if (comparands[u] < comparands[best] - tol)
            best = u;
    }

    out.merge(subtrees[best]);
    PolicyNode node;
    node.control = best;
    node.value = comparands[best];
    node.comparands = std::move(comparands);
    node.branch_probs = std::move(probs[best]);
    node.state = state.hermitian();
    out.emplace(history, std::move(node));
    return out.at(history).value;
}

} // namespace detail

template <DpProblem P>
PolicyTree solve_policy_tree(const P& pb, const DensityState& initial, std::size_t horizon) {
    if (horizon == 0)
        throw InvariantViolation("solve: horizon must be at least 1");
    std::map<History, PolicyNode> nodes;
    History h;
    detail::expand(pb, initial, h, horizon, nodes);
    return PolicyTree(horizon, pb.num_controls(), pb.num_outcomes(), std::move(nodes));
}

// V(w,k) = min_u { <w, L(u)> + sum_y V(Lambda(u,y) w, k+1) p(y|u,w) },  V(w,M) = <w, N>
class RiskNeutralProblem {
public:
    RiskNeutralProblem(const TransferModel& model, const CostModel& cost) : model_(model), cost_(cost) {
        if (cost.num_controls() != model.num_controls() || cost.dim() != model.dim())
            throw DimensionMismatch("RiskNeutralProblem: cost does not match model");
    }
    [[nodiscard]] std::size_t num_controls() const { return model_.num_controls(); }
    [[nodiscard]] std::size_t num_outcomes() const { return model_.num_outcomes(); }
    [[nodiscard]] double terminal(const DensityState& s) const { return value(s, cost_.terminal()); }
    [[nodiscard]] double stage(const DensityState& s, ControlIndex u) const { return value(s, cost_.stage(u)); }
    [[nodiscard]] std::vector<std::optional<Branch>> transitions(const DensityState& s, ControlIndex u) const {
        std::vector<std::optional<Branch>> out(num_outcomes());
        const auto probs = outcome_probs(model_, u, s);
        for (OutcomeIndex y = 0; y < out.size(); ++y)
            if (probs[y] > tolerances().branch)
                out[y] = Branch{probs[y], conditional_update(model_, u, y, s)};
        return out;
    }

private:
    const TransferModel& model_;
    const CostModel& cost_;
};

// W(w,k) = min_u sum_y W(Lambda_R(u,y) w, k+1) p_R(y|u,w),  W(w,M) = <w, F>
class RiskSensitiveProblem {
public:
    RiskSensitiveProblem(const TransferModel& model, const OperatorValuedCost& rcost, const HermitianMatrix& terminal)
        : model_(model), rcost_(rcost), terminal_(terminal) {
        if (rcost.num_controls() != model.num_controls() || terminal.dim() != model.dim())
            throw DimensionMismatch("RiskSensitiveProblem: cost does not match model");
    }
    [[nodiscard]] std::size_t num_controls() const { return model_.num_controls(); }
    [[nodiscard]] std::size_t num_outcomes() const { return model_.num_outcomes(); }
    [[nodiscard]] double terminal(const DensityState& s) const { return value(s, terminal_); }
    [[nodiscard]] double stage(const DensityState&, ControlIndex) const { return 0.0; }
    [[nodiscard]] std::vector<std::optional<Branch>> transitions(const DensityState& s, ControlIndex u) const {
        std::vector<std::optional<Branch>> out(num_outcomes());
        const auto probs = pR_all(model_, rcost_, u, s);
        for (OutcomeIndex y = 0; y < out.size(); ++y)
            if (probs[y] > tolerances().branch)
                out[y] = Branch{probs[y], rs_update(model_, rcost_, u, y, s)};
        return out;
    }

private:
    const TransferModel& model_;
    const OperatorValuedCost& rcost_;
    const HermitianMatrix& terminal_;
};

inline PolicyTree solve_risk_neutral(const TransferModel& model, const CostModel& cost, std::size_t horizon,
                                     const DensityState& initial) {
    if (!initial.is_normalized())
        throw InvariantViolation("solve_risk_neutral: initial state must be normalized");
    return solve_policy_tree(RiskNeutralProblem(model, cost), initial, horizon);
}

inline PolicyTree solve_risk_sensitive(const TransferModel& model, const OperatorValuedCost& rcost,
                                       const HermitianMatrix& terminal_mult, std::size_t horizon,
                                       const DensityState& initial) {
    return solve_policy_tree(RiskSensitiveProblem(model, rcost, terminal_mult), initial, horizon);
}

// Risk-sensitive problem with R from (L, mu) and F = exp(mu N).
inline PolicyTree solve_risk_sensitive(const TransferModel& model, const CostModel& cost, std::size_t horizon,
                                       const DensityState& initial) {
    const auto rcost = OperatorValuedCost::risk_sensitive(cost);
    return solve_risk_sensitive(model, rcost, cost.terminal_mult(), horizon, initial);
}

// ============================================================================
// Cost observables
// ============================================================================

// Q_M = N, Q_k = Gamma^dag(u_k, y_{k+1}) Q_{k+1} + L(u_k) for one fixed
// control/outcome sequence.
inline HermitianMatrix cost_observable_Q(const TransferModel& model, const CostModel& cost,
                                         const std::vector<ControlIndex>& controls, const History& outcomes) {
    if (controls.size() != outcomes.size())
        throw DimensionMismatch("cost_observable_Q: control and outcome sequences differ in length");
    HermitianMatrix q = cost.terminal();
    for (std::size_t i = controls.size(); i-- > 0;)
        q = model.adjoint(controls[i], outcomes[i], q) + cost.stage(controls[i]);
    return q;
}

// <w_hat, G_k> for G_M = F, G_k = R^dag(u_k) Gamma^dag(u_k, y_{k+1}) G_{k+1}.
// R may be nonlinear, so G_k is held as a functional; it is evaluated through
// <w, R^dag Gamma^dag B> = <Gamma R w, B>.
class CostFunctional {
public:
    CostFunctional(const TransferModel& model, const OperatorValuedCost& rcost, HermitianMatrix terminal_mult,
                   std::vector<ControlIndex> controls, History outcomes)
        : model_(&model), rcost_(&rcost), terminal_(std::move(terminal_mult)), controls_(std::move(controls)),
          outcomes_(std::move(outcomes)) {
        if (controls_.size() != outcomes_.size())
            throw DimensionMismatch("cost_observable_G: control and outcome sequences differ in length");
    }

    [[nodiscard]] double operator()(const DensityState& state) const {
        HermitianMatrix w = state.hermitian();
        for (std::size_t i = 0; i < controls_.size(); ++i) {
            if (!(w.trace() > tolerances().zero_trace * std::max(1.0, state.trace())))
                return 0.0;
            const HermitianMatrix rw = rcost_->apply(controls_[i], w);
            w = model_->apply(controls_[i], outcomes_[i], rw);
            if (!(w.trace() > tolerances().branch * rw.trace()))
                return 0.0;
        }
        return pairing(w, terminal_);
    }

    // Heisenberg-picture matrix G_0, available when R is linear.
    [[nodiscard]] std::optional<HermitianMatrix> as_matrix() const {
        if (!rcost_->is_linear())
            return std::nullopt;
        HermitianMatrix g = terminal_;
        for (std::size_t i = controls_.size(); i-- > 0;)
            g = *rcost_->linear_adjoint(controls_[i], model_->adjoint(controls_[i], outcomes_[i], g));
        return g;
    }

private:
    const TransferModel* model_;
    const OperatorValuedCost* rcost_;
    HermitianMatrix terminal_;
    std::vector<ControlIndex> controls_;
    History outcomes_;
};

inline CostFunctional cost_observable_G(const TransferModel& model, const OperatorValuedCost& rcost,
                                        const HermitianMatrix& terminal_mult, std::vector<ControlIndex> controls,
                                        History outcomes) {
    return CostFunctional(model, rcost, terminal_mult, std::move(controls), std::move(outcomes));
}

// ============================================================================
// Cost functionals of a fixed controller
// ============================================================================

namespace detail {

// Qbar(h) = L(K(h)) + sum_y Gamma^dag(K(h), y) Qbar(h y),  Qbar = N at the horizon.
// Histories where the controller is undefined are unreachable (tree controllers
// only store positive-probability nodes) and carry a zero observable.
inline HermitianMatrix aggregated_Q(const TransferModel& model, const CostModel& cost, const Controller& k,
                                    History& h, std::size_t horizon) {
    if (h.size() == horizon)
        return cost.terminal();
    const auto u = k.control(h);
    if (!u)
        return HermitianMatrix::zero(model.dim());
    HermitianMatrix q = cost.stage(*u);
    for (OutcomeIndex y = 0; y < model.num_outcomes(); ++y) {
        h.push_back(y);
        q += model.adjoint(*u, y, aggregated_Q(model, cost, k, h, horizon));
        h.pop_back();
    }
    return q;
}

inline double sum_G(const TransferModel& model, const OperatorValuedCost& rcost, const HermitianMatrix& f,
                    const Controller& k, const HermitianMatrix& w, double scale, History& h, std::size_t horizon) {
    if (h.size() == horizon)
        return pairing(w, f);
    if (!(w.trace() > tolerances().zero_trace * scale))
        return 0.0;
    const ControlIndex u = require_control(k, h, model);
    const HermitianMatrix rw = rcost.apply(u, w);
    double total = 0.0;
    for (OutcomeIndex y = 0; y < model.num_outcomes(); ++y) {
        const HermitianMatrix next = model.apply(u, y, rw);
        if (!(next.trace() > tolerances().branch * rw.trace()))
            continue;
        h.push_back(y);
        total += sum_G(model, rcost, f, k, next, scale, h, horizon);
        h.pop_back();
    }
    return total;
}

inline double expect_rs(const TransferModel& model, const OperatorValuedCost& rcost, const HermitianMatrix& f,
                        const Controller& k, const DensityState& w, History& h, std::size_t horizon) {
    if (h.size() == horizon)
        return value(w, f);
    const ControlIndex u = require_control(k, h, model);
    const auto probs = pR_all(model, rcost, u, w);
    double total = 0.0;
    for (OutcomeIndex y = 0; y < probs.size(); ++y) {
        if (!(probs[y] > tolerances().branch))
            continue;
        h.push_back(y);
        total += probs[y] * expect_rs(model, rcost, f, k, rs_update(model, rcost, u, y, w), h, horizon);
        h.pop_back();
    }
    return total;
}

} // namespace detail

// Risk-neutral cost of K via the cost-observable (Heisenberg) route:
// J = <w_0, Qbar(empty history)>.
inline double eval_risk_neutral(const TransferModel& model, const CostModel& cost, const Controller& k,
                                const DensityState& initial, std::size_t horizon) {
    History h;
    return value(initial, detail::aggregated_Q(model, cost, k, h, horizon));
}

// Same cost via the expectation over filtered trajectories.
inline double eval_risk_neutral_expectation(const TransferModel& model, const CostModel& cost, const Controller& k,
                                            const DensityState& initial, std::size_t horizon) {
    const auto cl = enumerate_closed_loop(model, k, initial, horizon);
    return closed_loop_expectation(cl, [&](const Trajectory& t) {
        double c = value(t.states.back(), cost.terminal());
        for (std::size_t i = 0; i < t.controls.size(); ++i)
            c += value(t.states[i], cost.stage(t.controls[i]));
        return c;
    });
}

// Multiplicative cost: sum over records of <w_hat_0, G_0(K(y), y)>.
inline double eval_multiplicative(const TransferModel& model, const OperatorValuedCost& rcost,
                                  const HermitianMatrix& terminal_mult, const Controller& k,
                                  const DensityState& initial, std::size_t horizon) {
    History h;
    return detail::sum_G(model, rcost, terminal_mult, k, initial.hermitian(), initial.trace(), h, horizon);
}

// Multiplicative cost as E[<w_hat_M, F>] under the p_R-driven unnormalized filter.
inline double eval_multiplicative_expectation(const TransferModel& model, const OperatorValuedCost& rcost,
                                              const HermitianMatrix& terminal_mult, const Controller& k,
                                              const DensityState& initial, std::size_t horizon) {
    History h;
    return detail::expect_rs(model, rcost, terminal_mult, k, initial, h, horizon);
}

// E[prod_k <w_k, exp(mu L(u_k))> <w_M, exp(mu N)>] over normalized SME trajectories.
inline double eval_risk_sensitive_functional(const TransferModel& model, const CostModel& cost, const Controller& k,
                                             const DensityState& initial, std::size_t horizon) {
    std::vector<HermitianMatrix> exp_stage;
    for (const auto& l : cost.stages())
        exp_stage.push_back(herm_exp(l, cost.mu()));
    const auto cl = enumerate_closed_loop(model, k, initial, horizon);
    return closed_loop_expectation(cl, [&](const Trajectory& t) {
        double prod = value(t.states.back(), cost.terminal_mult());
        for (std::size_t i = 0; i < t.controls.size(); ++i)
            prod *= value(t.states[i], exp_stage[t.controls[i]]);
        return prod;
    });
}

} // namespace qfc
