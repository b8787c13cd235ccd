#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace drmdp;

namespace {

AmbiguitySpec make_spec(DistanceKind k, Distribution c, double eps, const SquareMatrix& m) {
    AmbiguitySpec s{k, std::move(c), eps, std::nullopt};
    if (requires_metric(k)) s.metric = m;
    return s;
}

double range_of(const numvec& g) { return *std::max_element(g.begin(), g.end()) - *std::min_element(g.begin(), g.end()); }

} // namespace

TEST(Adversary, TvExample) {
    const auto s = make_spec(DistanceKind::TV, Distribution({0.5, 0.5}), 0.2, SquareMatrix::discrete(2));
    const WorstCase wc = worst_case_expectation(s, numvec{0, 1});
    EXPECT_NEAR(wc.value, 0.7, 1e-12);
    EXPECT_NEAR(wc.witness[0], 0.3, 1e-12);
    EXPECT_NEAR(brute_force_worst_case(s, numvec{0, 1}, 1e-3), 0.7, 2e-3);
}

TEST(Adversary, WassersteinExample) {
    const auto s = make_spec(DistanceKind::Wasserstein, Distribution({1.0, 0.0}), 0.4, SquareMatrix::discrete(2));
    const WorstCase wc = worst_case_expectation(s, numvec{0, 1});
    EXPECT_NEAR(wc.value, 0.4, 1e-12);
    EXPECT_NEAR(wc.witness[0], 0.6, 1e-12);
    EXPECT_NEAR(wasserstein_worst_case_lp(s.center, numvec{0, 1}, *s.metric, 0.4).value, 0.4, 1e-12);
}

TEST(Adversary, KlExample) {
    const auto s = make_spec(DistanceKind::KL, Distribution({0.5, 0.5}), 0.02, SquareMatrix::discrete(2));
    EXPECT_NEAR(worst_case_expectation(s, numvec{0, 1}).value, brute_force_worst_case(s, numvec{0, 1}, 1e-3), 5e-3);
}

TEST(Adversary, ZeroRadiusReturnsCenter) {
    std::mt19937_64 gen(1);
    const SquareMatrix m = oracle::random_graph_metric(gen, 4);
    const Distribution c({0.1, 0.2, 0.3, 0.4});
    const numvec g{3, -1, 2, 0.5};
    for (auto k : kAllDistanceKinds) {
        const WorstCase wc = worst_case_expectation(make_spec(k, c, 0.0, m), g);
        EXPECT_EQ(wc.value, dot(c.mass(), g));
        EXPECT_EQ(wc.witness, c);
    }
}

TEST(Adversary, LargeRadiusReachesMaximum) {
    const SquareMatrix m = SquareMatrix::from_line(numvec{0, 1, 2});
    const Distribution c({0.2, 0.5, 0.3});
    const numvec g{1, 3, 2};
    for (auto k : kAllDistanceKinds) {
        const auto s = make_spec(k, c, 50.0, m);
        EXPECT_NEAR(worst_case_expectation(s, g).value, 3.0, 1e-9) << to_string(k);
        EXPECT_NEAR(brute_force_worst_case(s, g, 1e-2), 3.0, 1e-9) << to_string(k);
        EXPECT_NEAR(worst_case_expectation(make_spec(k, c, kInfinity, m), g).value, 3.0, 0.0);
    }
}

TEST(Adversary, DivergenceBallsStayOnSupport) {
    const Distribution c({0.5, 0.5, 0.0});
    const numvec g{0, 1, 10};
    for (auto k : {DistanceKind::KL, DistanceKind::ChiSquared}) {
        const WorstCase wc = worst_case_expectation(make_spec(k, c, 5.0, SquareMatrix::discrete(3)), g);
        EXPECT_EQ(wc.witness[2], 0.0);
        EXPECT_NEAR(wc.value, 1.0, 1e-12);
    }
    // Hellinger may move mass to unsupported atoms.
    const WorstCase h = worst_case_expectation(make_spec(DistanceKind::Hellinger, c, 0.5, SquareMatrix::discrete(3)), g);
    EXPECT_GT(h.witness[2], 0.0);
}

TEST(Adversary, Errors) {
    const Distribution c({0.5, 0.5});
    EXPECT_THROW(worst_case_expectation(AmbiguitySpec{DistanceKind::Wasserstein, c, 0.1, std::nullopt}, numvec{0, 1}),
                 ValidationError);
    EXPECT_THROW(worst_case_expectation(AmbiguitySpec{DistanceKind::TV, c, -0.1, std::nullopt}, numvec{0, 1}),
                 ValidationError);
    EXPECT_THROW(worst_case_expectation(AmbiguitySpec{DistanceKind::TV, c, 0.1, std::nullopt}, numvec{0, kInfinity}),
                 ValidationError);
    EXPECT_THROW(worst_case_expectation(AmbiguitySpec{DistanceKind::TV, c, 0.1, std::nullopt}, numvec{0, 1, 2}),
                 ValidationError);
    const Distribution five = Distribution::uniform(5);
    EXPECT_THROW(brute_force_worst_case(AmbiguitySpec{DistanceKind::TV, five, 0.1, std::nullopt}, numvec(5, 0.0), 0.01),
                 ValidationError);
    EXPECT_THROW(brute_force_worst_case(AmbiguitySpec{DistanceKind::TV, c, 0.1, std::nullopt}, numvec{0, 1}, 0.5),
                 ValidationError);
}

TEST(Adversary, WitnessFeasibleAndAttaining) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-3, 3), e(0.0, 0.6);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 2 + rep % 6;
        const SquareMatrix m = oracle::random_graph_metric(gen, n);
        const Distribution c = oracle::random_distribution(gen, n, 0.25);
        numvec g(n);
        for (auto& x : g) x = u(gen);
        for (auto k : kAllDistanceKinds) {
            const double eps = e(gen);
            const auto s = make_spec(k, c, eps, m);
            const WorstCase wc = worst_case_expectation(s, g);
            EXPECT_LE(distance(k, wc.witness, c, &m), eps + 1e-8) << to_string(k);
            EXPECT_NEAR(dot(wc.witness.mass(), g), wc.value, 1e-8) << to_string(k);
            EXPECT_GE(wc.value, dot(c.mass(), g) - 1e-12) << to_string(k);
        }
    }
}

TEST(Adversary, MonotoneAndTranslationEquivariant) {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + rep % 4;
        const SquareMatrix m = oracle::random_line_metric(gen, n);
        const Distribution c = oracle::random_distribution(gen, n, 0.2);
        numvec g(n), shifted(n);
        const double shift = u(gen);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = u(gen);
            shifted[i] = g[i] + shift;
        }
        for (auto k : kAllDistanceKinds) {
            double prev = -kInfinity;
            for (double eps : {0.0, 0.01, 0.05, 0.1, 0.3, 0.8, 2.5}) {
                const double v = worst_case_expectation(make_spec(k, c, eps, m), g).value;
                EXPECT_GE(v, prev - 1e-10) << to_string(k);
                prev = v;
                EXPECT_NEAR(worst_case_expectation(make_spec(k, c, eps, m), shifted).value, v + shift, 1e-8)
                    << to_string(k);
            }
        }
    }
}

TEST(Adversary, DualitySandwich) {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(-3, 3), e(0.001, 0.8);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 2 + rep % 5;
        const SquareMatrix m = oracle::random_graph_metric(gen, n);
        const Distribution c = oracle::random_distribution(gen, n, 0.2);
        numvec g(n);
        for (auto& x : g) x = u(gen);
        const double eps = e(gen);

        const WorstCase w = worst_case_wasserstein(c, g, m, eps);
        const double primal_w = dot(w.witness.mass(), g);
        const double lp = wasserstein_worst_case_lp(c, g, m, eps).value;
        EXPECT_LE(primal_w, wasserstein_dual_objective(c, g, m, eps, w.multiplier) + 1e-12);
        EXPECT_NEAR(w.value, lp, 1e-8);
        EXPECT_NEAR(primal_w, w.value, 1e-8);

        const WorstCase k = worst_case_kl(c, g, eps);
        const double primal_k = dot(k.witness.mass(), g);
        EXPECT_LE(primal_k, k.value + 1e-12);
        EXPECT_LE(k.value, primal_k + 1e-8);
        EXPECT_NEAR(k.value, oracle::kl_worst_case_golden(c, g, eps), 1e-8);
    }
}

TEST(Adversary, ProkhorovCapsMatchDistance) {
    // The lattice oracle tests Prokhorov membership through subset caps; check the caps
    // against the distance itself.
    std::mt19937_64 gen(10);
    for (int rep = 0; rep < 2000; ++rep) {
        const std::size_t n = 2 + rep % 3;
        const SquareMatrix m = oracle::random_line_metric(gen, n);
        const Distribution c = oracle::random_distribution(gen, n, 0.2), nu = oracle::random_distribution(gen, n, 0.2);
        const double d = prokhorov(nu, c, m);
        for (double eps : {d * 0.999, d * 1.001, 0.05, 0.3}) {
            const AmbiguitySpec s{DistanceKind::Prokhorov, c, eps, m};
            EXPECT_EQ(BallMembership(s).contains(nu.mass()), d <= eps + 1e-12) << d << " " << eps;
        }
    }
}

TEST(Adversary, AgreesWithLatticeOracle) {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(-2, 2), e(0.0, 0.5);
    const double res = 1e-2;
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 2 + rep % 3;
        const SquareMatrix m = oracle::random_line_metric(gen, n);
        const Distribution c = oracle::random_distribution(gen, n);
        numvec g(n);
        for (auto& x : g) x = u(gen);
        for (auto k : kAllDistanceKinds) {
            const auto s = make_spec(k, c, e(gen), m);
            const double v = worst_case_expectation(s, g).value;
            const double b = brute_force_worst_case(s, g, res);
            EXPECT_LE(b, v + 1e-9) << to_string(k);
            EXPECT_NEAR(v, b, 3 * res * range_of(g) + 1e-6) << to_string(k);
        }
    }
}
