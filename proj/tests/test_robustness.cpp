#include "support.hpp"

using namespace qfc;
using qt::mat2;
namespace ts = qfc::twostate;

namespace {

const Matrix kPlus = mat2(0.5, 0.5, 0.5, 0.5);

OutcomeDistribution coin(double heads) { return {{{0}, heads}, {{1}, 1.0 - heads}}; }

OutcomeDistribution random_distribution(std::mt19937_64& g, std::size_t n, bool with_zero) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    OutcomeDistribution d;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (with_zero && i == 0) ? 0.0 : u(g);
        d[{i}] = w;
        total += w;
    }
    for (auto& [k, v] : d)
        v /= total;
    return d;
}

} // namespace

TEST(RelativeEntropy, Examples) {
    EXPECT_EQ(relative_entropy(coin(0.3), coin(0.3)), 0.0);
    EXPECT_NEAR(relative_entropy(coin(1.0), coin(0.5)), std::log(2.0), 1e-15);
    EXPECT_THROW(relative_entropy(coin(0.5), coin(1.0)), AbsoluteContinuityViolation);
}

TEST(RelativeEntropy, ReferenceControllerByHand) {
    const auto k = ts::reference_controller();
    const auto nom = enumerate_closed_loop(ts::build_two_state_model(0.25), k, DensityState(kPlus), 2);
    const auto tru = enumerate_closed_loop(ts::build_two_state_model(0.3), k, DensityState(kPlus), 2);
    auto mixed = [](double a) { return 2 * a * (1 - a); };
    auto pure = [](double a) { return a * a + (1 - a) * (1 - a); };
    // Four records, two of each kind, each with first-stage weight 1/2.
    const double by_hand = mixed(0.3) * std::log(mixed(0.3) / mixed(0.25)) + pure(0.3) * std::log(pure(0.3) / pure(0.25));
    const double re = relative_entropy(tru.distribution, nom.distribution);
    EXPECT_GT(re, 0.0);
    EXPECT_NEAR(re, by_hand, 1e-14);
}

TEST(RelativeEntropy, NonNegativeWithEqualityOnlyAtEquality) {
    auto g = qt::rng(61);
    for (int i = 0; i < 100; ++i) {
        const auto q = random_distribution(g, 6, i % 2 == 0);
        const auto p = random_distribution(g, 6, false);
        EXPECT_GT(relative_entropy(q, p), 0.0);
        EXPECT_NEAR(relative_entropy(p, p), 0.0, 1e-15);
    }
}

TEST(RelativeEntropy, DualityDirection) {
    auto g = qt::rng(62);
    std::normal_distribution<double> n01(0.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const auto q = random_distribution(g, 8, i % 3 == 0);
        const auto p = random_distribution(g, 8, false);
        std::map<History, double> f;
        for (const auto& [s, v] : p)
            f[s] = n01(g);
        double ep = 0.0, eq = 0.0;
        for (const auto& [s, v] : p)
            ep += v * std::exp(f[s]);
        for (const auto& [s, v] : q)
            eq += v * f[s];
        EXPECT_GE(std::log(ep), eq - relative_entropy(q, p) - 1e-9);
    }
}

TEST(RobustnessBound, NominalEqualsTrue) {
    const auto m = ts::build_two_state_model(0.25);
    for (double mu : {0.5, 2.0}) {
        const auto b = robustness_bound({m, m}, ts::build_two_state_costs(0.2, mu), DensityState(kPlus), 2);
        EXPECT_EQ(b.re_term, 0.0);
        EXPECT_LE(b.lhs, b.rs_term + 1e-12);
        EXPECT_TRUE(b.holds);
    }
}

TEST(RobustnessBound, HoldsOnGrid) {
    const auto nominal = ts::build_two_state_model(0.25);
    for (double at : {0.15, 0.20, 0.30, 0.35}) {
        const auto tru = ts::build_two_state_model(at);
        for (double mu : {0.5, 1.0, 2.0, 4.0}) {
            const auto b = robustness_bound({nominal, tru}, ts::build_two_state_costs(0.2, mu), DensityState(kPlus), 2);
            EXPECT_TRUE(b.holds) << at << " " << mu << ": " << b.lhs << " > " << b.rhs;
            EXPECT_GT(b.re_term, 0.0);
            EXPECT_NEAR(b.rhs, b.rs_term + b.re_term, 1e-15);
        }
    }
}

TEST(RobustnessBound, LhsIsRiskNeutralCostUnderTrueModel) {
    const auto nominal = ts::build_two_state_model(0.25);
    const auto tru = ts::build_two_state_model(0.35);
    const auto cost = ts::build_two_state_costs(0.2, 2.0);
    const auto b = robustness_bound({nominal, tru}, cost, DensityState(kPlus), 2);
    EXPECT_NEAR(b.lhs, eval_risk_neutral(tru, cost, Controller::from_tree(b.controller), DensityState(kPlus), 2), 1e-12);
}

TEST(RobustnessBound, MismatchedPairRejected) {
    const auto a = ts::build_two_state_model(0.25);
    auto g = qt::rng(63);
    const auto b = random_model(3, 2, 2, g);
    EXPECT_THROW(robustness_bound({a, b}, ts::build_two_state_costs(0.2, 1.0), DensityState(kPlus), 2),
                 DimensionMismatch);
    EXPECT_THROW(robustness_bound({a, a}, ts::build_two_state_costs(0.2, 0.0), DensityState(kPlus), 2),
                 InvariantViolation);
}

TEST(SmallMuLimit, ZeroCosts) {
    auto g = qt::rng(64);
    const auto m = random_model(2, 2, 2, g);
    const auto lim = small_mu_limit(m, {HermitianMatrix::zero(2), HermitianMatrix::zero(2)}, HermitianMatrix::zero(2),
                                    random_density(2, g, 3.0), 3, {1e-1, 1e-2});
    EXPECT_EQ(lim.risk_neutral_value, 0.0);
    for (const auto& pt : lim.points)
        EXPECT_NEAR(pt.log_value, 0.0, 1e-12);
}

TEST(SmallMuLimit, TwoStateConvergesLinearly) {
    const auto m = ts::build_two_state_model(0.25);
    const auto c = ts::build_two_state_costs(0.2, 1.0);
    const auto lim = small_mu_limit(m, c.stages(), c.terminal(), DensityState(kPlus), 2, {1e-1, 1e-2, 1e-3});
    ASSERT_EQ(lim.points.size(), 3u);
    EXPECT_LT(std::abs(lim.points.back().log_value - lim.risk_neutral_value), 5e-3);
    for (std::size_t i = 1; i < lim.points.size(); ++i) {
        const double ratio = (lim.points[i - 1].log_value - lim.risk_neutral_value) /
                             (lim.points[i].log_value - lim.risk_neutral_value);
        EXPECT_GE(ratio, 5.0);
        EXPECT_LE(ratio, 20.0);
    }
}

TEST(SmallMuLimit, GridValidation) {
    const auto m = ts::build_two_state_model(0.25);
    const auto c = ts::build_two_state_costs(0.2, 1.0);
    EXPECT_THROW(small_mu_limit(m, c.stages(), c.terminal(), DensityState(kPlus), 2, {1e-2, 1e-1}), InvariantViolation);
    EXPECT_THROW(small_mu_limit(m, c.stages(), c.terminal(), DensityState(kPlus), 2, {0.0}), InvariantViolation);
}
