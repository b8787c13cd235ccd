#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace drmdp;

namespace {

const LipschitzProfile kProfile{1.0, 0.5, 1.0, 0.5};
const ConcentrationParams kParams{3, 3.0, 2.0, 1.0};

LipschitzProfile lipschitz_by_pairs(const MdpModel& m) {
    LipschitzProfile p;
    const SquareMatrix& rx = *m.x_metric();
    const SquareMatrix& rw = m.w_metric();
    for (std::size_t x = 0; x < m.num_states(); ++x)
        for (std::size_t y = 0; y < m.num_states(); ++y)
            for (std::size_t a = 0; a < m.num_actions(); ++a) {
                if (!m.is_admissible(x, a) || !m.is_admissible(y, a)) continue;
                for (std::size_t w = 0; w < m.num_disturbances(); ++w)
                    for (std::size_t v = 0; v < m.num_disturbances(); ++v) {
                        if ((x == y) == (w == v)) continue;
                        const double den = x == y ? rw(w, v) : rx(x, y);
                        p.L_c = std::max(p.L_c, std::abs(m.cost(x, a, w) - m.cost(y, a, v)) / den);
                        p.L_F = std::max(p.L_F, rx(m.next(x, a, w), m.next(y, a, v)) / den);
                    }
            }
    return p;
}

} // namespace

TEST(Guarantees, DeltaExamples) {
    EXPECT_NEAR(delta_constant(LipschitzProfile{1.0, 1.0, 1.0, 0.5}), 8.0, 1e-14);
    EXPECT_NEAR(delta_constant(LipschitzProfile{0.0, 0.7, 3.0, 0.8}), 3.0 / 0.04, 1e-12);
    EXPECT_THROW(delta_constant(LipschitzProfile{1.0, 2.0, 1.0, 0.5}), ValidationError);
    EXPECT_THROW(delta_constant(LipschitzProfile{1.0, 0.0, 1.0, 1.0}), ValidationError);
}

TEST(Guarantees, RateBound) {
    EXPECT_NEAR(rate_bound(DistanceKind::Wasserstein, 0.1, 8.0), 1.6, 1e-14);
    EXPECT_NEAR(rate_bound(DistanceKind::KL, 0.02, 8.0), 3.2, 1e-14);
    for (auto k : kAllDistanceKinds) {
        EXPECT_EQ(rate_bound(k, 0.0, 8.0), 0.0);
        double prev = 0.0;
        for (double e = 0.0; e < 3.0; e += 0.05) {
            const double r = rate_bound(k, e, 8.0);
            EXPECT_GE(r, prev);
            prev = r;
        }
    }
}

TEST(Guarantees, RadiusWindowExamples) {
    EXPECT_NEAR(radius_upper(1.0, kProfile), 0.075, 1e-15);
    EXPECT_NEAR(radius_lower(100, 0.1, kParams), std::cbrt(std::log(40.0) / 100.0), 1e-15);
    EXPECT_NEAR(radius_lower(100, 0.1, kParams), 0.332888, 1e-6);
    const RadiusWindow w = radius_window(1.0, 0.1, 100, kProfile, kParams);
    EXPECT_FALSE(w.nonempty());
    EXPECT_TRUE(radius_window(1e6, 0.1, 1, kProfile, kParams).nonempty());
    EXPECT_GT(radius_upper(1e12, kProfile), 1e9);
}

TEST(Guarantees, UpperRadiusThroughPsiInverse) {
    const double d = delta_constant(kProfile);
    for (auto k : kAllDistanceKinds) {
        const double e = radius_upper(0.7, kProfile, k);
        EXPECT_NEAR(rate_bound(k, e, d), 0.7, 1e-12) << to_string(k);
    }
}

TEST(Guarantees, RejectsUnsupportedConcentrationRegimes) {
    EXPECT_THROW(radius_lower(100, 0.1, ConcentrationParams{2, 3.0, 2.0, 1.0}), ValidationError);
    EXPECT_THROW(radius_lower(100, 0.1, ConcentrationParams{4, 3.0, 2.0, 1.0}), ValidationError);
    EXPECT_THROW(sample_complexity(1.0, 0.1, kProfile, ConcentrationParams{1, 3.0, 2.0, 1.0}), ValidationError);
    EXPECT_THROW(sample_complexity(0.0, 0.1, kProfile, kParams), ValidationError);
    EXPECT_THROW(sample_complexity(1.0, 0.1, LipschitzProfile{1.0, 2.5, 1.0, 0.5}, kParams), ValidationError);
}

TEST(Guarantees, SampleComplexityExample) {
    const std::uint64_t n = sample_complexity(1.0, 0.1, kProfile, kParams);
    EXPECT_EQ(n, 8745u);
    EXPECT_LE(radius_lower(n, 0.1, kParams), radius_upper(1.0, kProfile) + 1e-12);
    EXPECT_GT(radius_lower(n - 1, 0.1, kParams), radius_upper(1.0, kProfile));
}

TEST(Guarantees, SampleComplexityScaling) {
    // N is proportional to delta^(-m): doubling delta divides it by 2^m up to the ceiling.
    for (int m : {3, 4}) {
        const ConcentrationParams p{m, static_cast<double>(m), 2.0, 1.0};
        const double n1 = static_cast<double>(sample_complexity(0.5, 0.1, kProfile, p));
        const double n2 = static_cast<double>(sample_complexity(1.0, 0.1, kProfile, p));
        EXPECT_NEAR(n2, n1 / std::pow(2.0, m), 1.0);
    }
    std::uint64_t prev = std::numeric_limits<std::uint64_t>::max();
    for (double d = 0.5; d < 5.0; d += 0.25) {
        const auto n = sample_complexity(d, 0.1, kProfile, kParams);
        EXPECT_LE(n, prev);
        prev = n;
    }
    prev = std::numeric_limits<std::uint64_t>::max();
    for (double g = 0.01; g < 1.0; g += 0.05) {
        const auto n = sample_complexity(1.0, g, kProfile, kParams);
        EXPECT_LE(n, prev);
        prev = n;
    }
}

TEST(Guarantees, WindowConsistentAtSampleComplexity) {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const LipschitzProfile p{2 * u(gen), 1.5 * u(gen), 0.1 + 3 * u(gen), 0.05 + 0.6 * u(gen)};
        const double delta = 0.5 + 20 * u(gen), gamma = 0.01 + 0.9 * u(gen);
        const ConcentrationParams c{3 + rep % 3, 3.0 + rep % 3, 0.5 + 3 * u(gen), 0.2 + 2 * u(gen)};
        const std::uint64_t n = sample_complexity(delta, gamma, p, c);
        EXPECT_LE(radius_lower(n, gamma, c), radius_upper(delta, p) + 1e-12);
    }
}

TEST(Guarantees, OodBound) {
    const LipschitzProfile p{1.0, 1.0, 1.0, 0.5};
    const OodBound b = ood_bound(DistanceKind::Wasserstein, 0.0, 0.1, p);
    EXPECT_NEAR(b.total, 1.6, 1e-14);
    EXPECT_EQ(b.statistical, 0.0);
    EXPECT_NEAR(b.nonstatistical, 1.6, 1e-14);
    EXPECT_EQ(ood_bound(DistanceKind::TV, 0.0, 0.0, p).total, 0.0);
    for (auto k : kAllDistanceKinds)
        for (double e : {0.01, 0.2, 1.3})
            EXPECT_EQ(ood_bound(k, e, 0.0, p).total, rate_bound(k, e, delta_constant(p)) / (1 - 0.5));
    EXPECT_THROW(ood_bound(DistanceKind::TV, 0.1, -0.1, p), ValidationError);
    EXPECT_THROW(ood_bound(DistanceKind::TV, 0.1, 0.1, LipschitzProfile{1.0, 2.0, 1.0, 0.5}), ValidationError);
}

TEST(Guarantees, LipschitzEstimate) {
    MdpModel m = counterexample_model();
    m.set_x_metric(SquareMatrix::from_line(numvec{0, 1, 2, 3, 4}));
    for (std::size_t x = 0; x < 5; ++x)
        for (std::size_t a : m.admissible(x))
            for (std::size_t w = 0; w < 2; ++w) m.set_transition(x, a, w, 0, 2.0);
    const LipschitzProfile flat = lipschitz_estimate(m);
    EXPECT_EQ(flat.L_c, 0.0);
    EXPECT_EQ(flat.L_F, 0.0);
    EXPECT_EQ(flat.c_sup, 2.0);
    EXPECT_EQ(flat.alpha, 0.9);

    std::mt19937_64 gen(32);
    for (int rep = 0; rep < 50; ++rep) {
        const MdpModel r = oracle::random_model(gen, 3, 2, 3, 0.8);
        const LipschitzProfile est = lipschitz_estimate(r), ref = lipschitz_by_pairs(r);
        EXPECT_NEAR(est.L_c, ref.L_c, 1e-12 * std::max(1.0, ref.L_c));
        EXPECT_NEAR(est.L_F, ref.L_F, 1e-12 * std::max(1.0, ref.L_F));
    }

    MdpModel no_x = counterexample_model();
    no_x.set_x_metric(std::nullopt);
    EXPECT_THROW(lipschitz_estimate(no_x), ValidationError);
}
