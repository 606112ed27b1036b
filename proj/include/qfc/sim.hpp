#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "qfc/policy.hpp"
#include "qfc/riskcost.hpp"

namespace qfc {

// SplitMix64 (Steele, Lea, Flood 2014). State advances by the golden-ratio
// increment 0x9e3779b97f4a7c15; output mixes with multipliers
// 0xbf58476d1ce4e5b9 and 0x94d049bb133111eb and shifts 30, 27, 31.
// Independent streams: SplitMix64::stream(seed, k) seeds with next() of a
// generator started at seed ^ (k * 0x9e3779b97f4a7c15).
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static SplitMix64 stream(std::uint64_t seed, std::uint64_t k) {
        SplitMix64 parent(seed ^ (k * 0x9e3779b97f4a7c15ULL));
        return SplitMix64(parent.next());
    }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t operator()() { return next(); }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

private:
    std::uint64_t state_;
};

struct Trajectory {
    std::vector<ControlIndex> controls;          // u_0..u_{M-1}
    History outcomes;                            // y_1..y_M
    std::vector<DensityState> states;            // w_0..w_M (normalized)
    std::vector<DensityState> unnormalized;      // w_hat_0..w_hat_M when an R cost is attached
    double probability = 1.0;                    // prod_k p(y_{k+1} | u_k, w_k)
};

// Probability of each complete measurement record.
using OutcomeDistribution = std::map<History, double>;

struct ClosedLoop {
    std::vector<Trajectory> trajectories;
    OutcomeDistribution distribution;
};

namespace detail {

inline ControlIndex require_control(const Controller& k, const History& h, const TransferModel& model) {
    auto u = k.control(h);
    if (!u)
        throw AbsoluteContinuityViolation("controller has no control for a positive-probability history");
    model.controls().check(*u);
    return *u;
}

inline void enumerate(const TransferModel& model, const Controller& k, const OperatorValuedCost* rcost,
                      std::size_t horizon, Trajectory& current, std::vector<Trajectory>& out) {
    const std::size_t depth = current.outcomes.size();
    if (depth == horizon) {
        out.push_back(current);
        return;
    }
    const ControlIndex u = require_control(k, current.outcomes, model);
    const DensityState& w = current.states.back();
    const auto probs = outcome_probs(model, u, w);
    for (OutcomeIndex y = 0; y < model.num_outcomes(); ++y) {
        if (!(probs[y] > tolerances().branch))
            continue;
        Trajectory next = current;
        next.controls.push_back(u);
        next.outcomes.push_back(y);
        next.states.push_back(conditional_update(model, u, y, w));
        if (rcost)
            next.unnormalized.push_back(rs_update(model, *rcost, u, y, current.unnormalized.back()));
        next.probability *= probs[y];
        enumerate(model, k, rcost, horizon, next, out);
    }
}

} // namespace detail

// Every positive-probability outcome sequence of the closed loop, with its
// conditional states and probability. When `rcost` is given, unnormalized
// states starting at w_hat_0 = w_0 evolve by rs_update alongside.
inline ClosedLoop enumerate_closed_loop(const TransferModel& model, const Controller& k, const DensityState& initial,
                                        std::size_t horizon, const OperatorValuedCost* rcost = nullptr) {
    ClosedLoop result;
    Trajectory root;
    root.states.push_back(initial.normalized());
    if (rcost)
        root.unnormalized.push_back(initial);
    detail::enumerate(model, k, rcost, horizon, root, result.trajectories);
    for (const auto& t : result.trajectories)
        result.distribution[t.outcomes] += t.probability;
    return result;
}

// Expectation of f(trajectory) under the closed-loop distribution.
template <class F>
double closed_loop_expectation(const ClosedLoop& cl, F&& f) {
    double total = 0.0;
    for (const auto& t : cl.trajectories)
        total += t.probability * f(t);
    return total;
}

// One Monte Carlo realization: outcomes drawn by inverse CDF over the model's
// outcome order with SplitMix64(seed).
inline Trajectory sample_trajectory(const TransferModel& model, const Controller& k, const DensityState& initial,
                                    std::size_t horizon, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Trajectory t;
    t.states.push_back(initial.normalized());
    for (std::size_t step = 0; step < horizon; ++step) {
        const ControlIndex u = detail::require_control(k, t.outcomes, model);
        const DensityState& w = t.states.back();
        const auto probs = outcome_probs(model, u, w);
        const double r = rng.uniform();
        double cdf = 0.0;
        OutcomeIndex chosen = probs.size();
        OutcomeIndex last_positive = 0;
        for (OutcomeIndex y = 0; y < probs.size(); ++y) {
            if (probs[y] > tolerances().branch)
                last_positive = y;
            cdf += probs[y];
            if (chosen == probs.size() && r < cdf && probs[y] > tolerances().branch)
                chosen = y;
        }
        if (chosen == probs.size())
            chosen = last_positive; // rounding left r above the accumulated total
        t.controls.push_back(u);
        t.outcomes.push_back(chosen);
        t.states.push_back(conditional_update(model, u, chosen, w));
        t.probability *= probs[chosen];
    }
    return t;
}

} // namespace qfc
