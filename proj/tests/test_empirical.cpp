#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace drmdp;

namespace {

double value_of(const MdpModel& m, const Distribution& d, std::size_t action_label_index) {
    Policy p{indvec(5, 0)};
    p.action[0] = action_label_index;
    return evaluate_policy(m, d, p)[0];
}

} // namespace

TEST(Empirical, SolveEmpiricalExamples) {
    const MdpModel m = counterexample_model();
    const std::vector<std::size_t> ones{1}, split{0, 1}, zeros{0, 0, 0};

    const SolveResult a = solve_empirical(m, ones, 1e-10);
    EXPECT_NEAR(value_of(m, Distribution({0.0, 1.0}), 0), 2.0, 1e-12);
    EXPECT_NEAR(value_of(m, Distribution({0.0, 1.0}), 1), 4.0, 1e-12);
    EXPECT_EQ(m.actions()[a.policy[0]], "1");
    EXPECT_NEAR(a.value[0], 2.0, 1e-10);

    const SolveResult b = solve_empirical(m, split, 1e-10);
    EXPECT_NEAR(b.value[0], 6.0, 1e-10);
    EXPECT_EQ(m.actions()[b.policy[0]], "3");

    const SolveResult c = solve_empirical(m, zeros, 1e-10);
    EXPECT_NEAR(c.value[0], 8.0, 1e-10);
    EXPECT_EQ(m.actions()[c.policy[0]], "3");

    EXPECT_THROW(solve_empirical(m, std::vector<std::size_t>{}, 1e-10), ValidationError);
}

TEST(Empirical, MatchesRobustAtZeroRadius) {
    std::mt19937_64 gen(41);
    for (int rep = 0; rep < 20; ++rep) {
        const MdpModel m = oracle::random_model(gen, 4, 3, 3, 0.85);
        std::vector<std::size_t> samples(1 + rep);
        for (auto& s : samples) s = gen() % 3;
        const SolveResult e = solve_empirical(m, samples, 1e-11);
        const AmbiguitySpec s{DistanceKind::Wasserstein, empirical_from_samples(samples, 3), 0.0, m.w_metric()};
        const SolveResult r = robust_value_iterate(m, s, 1e-11);
        EXPECT_LE(sup_distance(e.value.values, r.value.values), 1e-10);
        EXPECT_EQ(e.policy, r.policy);
    }
}

TEST(Empirical, CounterexampleTrueValues) {
    for (double alpha : {0.1, 0.5, 0.9}) {
        const MdpModel m = counterexample_model(alpha);
        EXPECT_DOUBLE_EQ(value_of(m, counterexample_true_dist(), 0), 7.0);
        EXPECT_DOUBLE_EQ(value_of(m, counterexample_true_dist(), 1), 6.0);
        EXPECT_NEAR(value_iterate(m, counterexample_true_dist(), 1e-12).value[0], 6.0, 1e-12);
    }
}

TEST(Empirical, CoverageExactValues) {
    for (std::size_t n = 1; n <= 59; n += 2) EXPECT_EQ(counterexample_coverage_exact(n), Rational::make(1, 2)) << n;
    EXPECT_EQ(counterexample_coverage_exact(2), Rational::make(3, 4));
    EXPECT_EQ(counterexample_coverage_exact(4), Rational::make(11, 16));
    EXPECT_EQ(counterexample_coverage_exact(4).str(), "11/16");
    EXPECT_THROW(counterexample_coverage_exact(0), ValidationError);
    EXPECT_THROW(counterexample_coverage_exact(61), ValidationError);
}

TEST(Empirical, CoverageMatchesPascal) {
    for (std::size_t n = 1; n <= 60; ++n) {
        const auto [num, den] = oracle::half_binomial_mass(n);
        EXPECT_EQ(counterexample_coverage_exact(n), Rational::make(num, den)) << n;
    }
}

TEST(Empirical, CoverageDecreasesOverEvenSizes) {
    const Rational half = Rational::make(1, 2), top = Rational::make(3, 4);
    for (std::size_t n = 2; n <= 40; n += 2) {
        const Rational v = counterexample_coverage_exact(n);
        EXPECT_TRUE(half < v) << n;
        EXPECT_TRUE(v < top || (n == 2 && v == top)) << n;
        EXPECT_TRUE(counterexample_coverage_exact(n + 2) < v) << n;
    }
}

TEST(Empirical, EnumerationAgreesWithFormula) {
    for (std::size_t n = 1; n <= 20; ++n) {
        const EnumerationResult e = counterexample_coverage_enumerated(n);
        EXPECT_EQ(e.probability, counterexample_coverage_exact(n)) << n;
        EXPECT_TRUE(e.matches_threshold_event) << n;
        EXPECT_EQ(e.outcomes, std::uint64_t{1} << n);
    }
    EXPECT_THROW(counterexample_coverage_enumerated(21), ValidationError);
}

TEST(Empirical, EnumerationIndependentOfDiscount) {
    for (double alpha : {0.1, 0.5, 0.99})
        for (std::size_t n : {3, 4, 10}) {
            const EnumerationResult e = counterexample_coverage_enumerated(n, alpha);
            EXPECT_EQ(e.probability, counterexample_coverage_exact(n));
            EXPECT_TRUE(e.matches_threshold_event);
        }
}

TEST(Empirical, Binomial) {
    EXPECT_EQ(binomial(60, 30), 118264581564861424ull);
    EXPECT_EQ(binomial(5, 7), 0u);
    EXPECT_EQ(binomial(10, 0), 1u);
}
