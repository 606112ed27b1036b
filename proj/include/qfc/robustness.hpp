#pragma once

#include <cmath>
#include <vector>

#include "qfc/dp.hpp"

namespace qfc {

// Nominal (design) model and the model actually driving the system.
struct ModelPair {
    const TransferModel& nominal;
    const TransferModel& true_model;

    void validate() const {
        if (nominal.dim() != true_model.dim() || !(nominal.controls() == true_model.controls()) ||
            !(nominal.outcomes() == true_model.outcomes()))
            throw DimensionMismatch("ModelPair: label sets and dimensions must agree");
    }
};

// RE(q || p) = sum_s q(s) log(q(s)/p(s)); q must be absolutely continuous w.r.t. p.
inline double relative_entropy(const OutcomeDistribution& q, const OutcomeDistribution& p) {
    double re = 0.0;
    for (const auto& [record, qs] : q) {
        if (qs <= 0.0)
            continue;
        auto it = p.find(record);
        if (it == p.end() || !(it->second > 0.0))
            throw AbsoluteContinuityViolation("relative_entropy: q has mass where p has none");
        re += qs * std::log(qs / it->second);
    }
    return re;
}

struct RobustnessBound {
    double lhs = 0.0;      // risk-neutral cost of the nominal risk-sensitive controller under the true model
    double rs_term = 0.0;  // (1/mu) log J_rs under the nominal model
    double re_term = 0.0;  // (1/mu) RE(P_true || P_nom)
    double rhs = 0.0;
    bool holds = false;
    PolicyTree controller;
};

// Evaluates J_rn(true; K) <= (1/mu) log J_rs(nom; K) + (1/mu) RE(P_true || P_nom)
// for K the optimal risk-sensitive controller designed on the nominal model.
inline RobustnessBound robustness_bound(const ModelPair& pair, const CostModel& cost, const DensityState& initial,
                                        std::size_t horizon) {
    pair.validate();
    if (!(cost.mu() > 0.0))
        throw InvariantViolation("robustness_bound: mu must be positive");
    RobustnessBound b;
    b.controller = solve_risk_sensitive(pair.nominal, cost, horizon, initial);
    const auto k = Controller::from_tree(b.controller);

    const auto nominal_loop = enumerate_closed_loop(pair.nominal, k, initial, horizon);
    const auto true_loop = enumerate_closed_loop(pair.true_model, k, initial, horizon);

    b.lhs = closed_loop_expectation(true_loop, [&](const Trajectory& t) {
        double c = value(t.states.back(), cost.terminal());
        for (std::size_t i = 0; i < t.controls.size(); ++i)
            c += value(t.states[i], cost.stage(t.controls[i]));
        return c;
    });
    const double gamma2 = 1.0 / cost.mu();
    b.rs_term = gamma2 * std::log(eval_risk_sensitive_functional(pair.nominal, cost, k, initial, horizon));
    b.re_term = gamma2 * relative_entropy(true_loop.distribution, nominal_loop.distribution);
    b.rhs = b.rs_term + b.re_term;
    b.holds = b.lhs <= b.rhs + tolerances().value;
    return b;
}

struct MuLimitPoint {
    double mu = 0.0;
    double log_value = 0.0; // (1/mu) log(W(w_hat_0, 0) / <w_hat_0, I>)
};

struct MuLimit {
    std::vector<MuLimitPoint> points;
    double risk_neutral_value = 0.0; // V(w_hat_0 / trace, 0)
};

// Logarithmic risk-sensitive value along a decreasing mu grid, next to the
// risk-neutral value it is expected to approach.
inline MuLimit small_mu_limit(const TransferModel& model, const std::vector<HermitianMatrix>& stage,
                              const HermitianMatrix& terminal, const DensityState& initial, std::size_t horizon,
                              const std::vector<double>& mu_grid) {
    for (std::size_t i = 0; i < mu_grid.size(); ++i) {
        if (!(mu_grid[i] > 0.0))
            throw InvariantViolation("small_mu_limit: mu values must be positive");
        if (i > 0 && !(mu_grid[i] < mu_grid[i - 1]))
            throw InvariantViolation("small_mu_limit: mu grid must be strictly decreasing");
    }
    MuLimit out;
    const DensityState normalized = initial.normalized();
    out.risk_neutral_value =
        solve_risk_neutral(model, CostModel(stage, terminal, 0.0), horizon, normalized).root_value();
    for (double mu : mu_grid) {
        const CostModel cost(stage, terminal, mu);
        const double w = solve_risk_sensitive(model, cost, horizon, initial).root_value();
        out.points.push_back({mu, std::log(w / initial.trace()) / mu});
    }
    return out;
}

} // namespace qfc
