#pragma once

#include "drmdp/distances.hpp"
#include "drmdp/model.hpp"

#include <bit>

namespace drmdp {

/// Value iteration on the MDP whose disturbance law is the empirical distribution of `samples`.
inline SolveResult solve_empirical(const MdpModel& model, std::span<const std::size_t> samples, double tol) {
    return value_iterate(model, empirical_from_samples(samples, model.num_disturbances()), tol);
}

/**
 * Five-state instance on which the empirical MDP policy fails the upper-bound property.
 * States 0..4, actions "1" and "3" (only "1" outside state 0), disturbances {0, 1}.
 * From state 0, action a moves to a + w with cost
 *   c(0,1,0) = 12, c(0,1,1) = 2, c(0,3,0) = 8, c(0,3,1) = 4;
 * states 1..4 are absorbing at zero cost. Both metrics are |i - j|.
 */
inline MdpModel counterexample_model(double alpha = 0.9) {
    MdpModel m({"0", "1", "2", "3", "4"}, {"1", "3"}, {"0", "1"}, alpha);
    for (std::size_t x = 1; x < 5; ++x) m.set_admissible(x, {0});
    const double cost[2][2] = {{12.0, 2.0}, {8.0, 4.0}};
    const std::size_t label[2] = {1, 3};
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t w = 0; w < 2; ++w) m.set_transition(0, a, w, label[a] + w, cost[a][w]);
    for (std::size_t x = 1; x < 5; ++x)
        for (std::size_t w = 0; w < 2; ++w) m.set_transition(x, 0, w, x, 0.0);
    const numvec xs{0, 1, 2, 3, 4}, ws{0, 1};
    m.set_x_metric(SquareMatrix::from_line(xs));
    m.set_w_metric(SquareMatrix::from_line(ws));
    require_valid(m);
    return m;
}

/// Bernoulli(1/2) disturbance law of the counterexample.
inline Distribution counterexample_true_dist() { return Distribution({0.5, 0.5}); }

/// Nonnegative fraction num/den in lowest terms.
struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    static Rational make(std::uint64_t n, std::uint64_t d) {
        const std::uint64_t g = std::gcd(n, d);
        return {n / g, d / g};
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
    /// Exact comparison via 128-bit cross multiplication.
    friend bool operator<(const Rational& l, const Rational& r) {
        return static_cast<unsigned __int128>(l.num) * r.den < static_cast<unsigned __int128>(r.num) * l.den;
    }
    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

inline constexpr std::size_t kMaxExactSampleSize = 60;

inline std::uint64_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    // r * (n - k + i) is divisible by i at every step; 128-bit keeps the product exact.
    for (std::size_t i = 1; i <= k; ++i)
        r = static_cast<std::uint64_t>(static_cast<unsigned __int128>(r) * (n - k + i) / i);
    return r;
}

/// P[J(pi_hat_Emp, 0) <= J_tilde_Emp(0)] = 2^-N sum_{i <= N/2} C(N, i) for N iid Bernoulli(1/2) samples.
inline Rational counterexample_coverage_exact(std::size_t n) {
    if (n < 1 || n > kMaxExactSampleSize)
        throw ValidationError("sample size must lie in [1, " + std::to_string(kMaxExactSampleSize) + "]");
    std::uint64_t s = 0;
    for (std::size_t i = 0; i <= n / 2; ++i) s += binomial(n, i);
    return Rational::make(s, std::uint64_t{1} << n);
}

struct EnumerationResult {
    Rational probability;
    /// Whether the event coincided with {fraction of ones <= 1/2} on every outcome.
    bool matches_threshold_event = true;
    std::size_t outcomes = 0;
};

/**
 * Exhaustive check over all 2^N sample paths: solves the empirical MDP per outcome,
 * evaluates its greedy policy under the true law exactly and tests J(pi_hat, 0) <= J_tilde_Emp(0).
 * Outcomes with the same number of ones share an empirical distribution, so solves are memoized.
 */
inline EnumerationResult counterexample_coverage_enumerated(std::size_t n, double alpha = 0.9) {
    if (n < 1 || n > 20) throw ValidationError("enumeration supports sample sizes in [1, 20]");
    const MdpModel model = counterexample_model(alpha);
    const Distribution truth = counterexample_true_dist();
    std::vector<int> event(n + 1, -1);
    auto event_for = [&](std::size_t ones) {
        if (event[ones] < 0) {
            std::vector<std::size_t> samples(n, 0);
            std::fill(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(ones), 1);
            const Distribution emp = empirical_from_samples(samples, 2);
            const Policy pol = value_iterate(model, emp, 1e-12).policy;
            const double emp_value = evaluate_policy(model, emp, pol)[0];
            const double true_value = evaluate_policy(model, truth, pol)[0];
            event[ones] = true_value <= emp_value + 1e-9 ? 1 : 0;
        }
        return event[ones] == 1;
    };
    EnumerationResult out;
    std::uint64_t hits = 0;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t path = 0; path < total; ++path) {
        const auto ones = static_cast<std::size_t>(std::popcount(path));
        const bool e = event_for(ones);
        if (e) ++hits;
        if (e != (2 * ones <= n)) out.matches_threshold_event = false;
    }
    out.probability = Rational::make(hits, total);
    out.outcomes = total;
    return out;
}

} // namespace drmdp
