#pragma once

#include "drmdp/distances.hpp"
#include "drmdp/sampling.hpp"

namespace drmdp {

/// Constants of the light-tailed concentration inequality for the empirical measure
/// in dimension m. c1 and c2 are not determined by the theory; callers supply them.
struct ConcentrationParams {
    int m = 3;
    double a = 3.0;
    double c1 = 2.0;
    double c2 = 1.0;
};

inline void validate_params(const ConcentrationParams& p) {
    if (p.m < 1) throw ValidationError("dimension m must be a positive integer");
    if (!(p.a > 1.0) || !std::isfinite(p.a)) throw ValidationError("tail exponent a must exceed 1");
    if (!(p.c1 > 0.0) || !std::isfinite(p.c1)) throw ValidationError("c1 must be positive");
    if (!(p.c2 > 0.0) || !std::isfinite(p.c2)) throw ValidationError("c2 must be positive");
}

namespace detail {

inline void check_confidence(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
}

inline void check_sample_size(std::size_t n) {
    if (n < 1) throw ValidationError("sample size must be at least 1");
}

} // namespace detail

/// Root of e / log(2 + 1/e) = target (the left side increases from 0 to infinity).
inline double solve_log_corrected_root(double target) {
    if (!(target > 0.0)) return 0.0;
    auto f = [](double e) { return e / std::log(2.0 + 1.0 / e); };
    double lo = 0.0, hi = 1.0;
    while (f(hi) < target) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return std::abs(f(lo) - target) < std::abs(f(hi) - target) ? lo : hi;
}

/**
 * Radius eps with P[W1(mu, mu_hat_N) > eps] <= gamma from the concentration bound:
 *   N < log(c1/gamma)/c2 :  (log(c1/gamma)/(N c2))^(1/a)
 *   otherwise, m = 1     :  (log(c1/gamma)/(N c2))^(1/2)
 *              m = 2     :  e with e/log(2 + 1/e) = sqrt(log(c1/gamma)/(N c2))
 *              m >= 3    :  (log(c1/gamma)/(N c2))^(1/m)
 * Returns 0 when c1 <= gamma (the bound then holds at every radius).
 */
inline double wasserstein_radius(std::size_t n, double gamma, const ConcentrationParams& p) {
    detail::check_sample_size(n);
    detail::check_confidence(gamma);
    validate_params(p);
    const double L = std::log(p.c1 / gamma);
    if (L <= 0.0) return 0.0;
    const double N = static_cast<double>(n);
    const double ratio = L / (N * p.c2);
    if (N < L / p.c2) return std::pow(ratio, 1.0 / p.a);
    if (p.m == 1) return std::pow(ratio, 0.5);
    if (p.m == 2) return solve_log_corrected_root(std::sqrt(ratio));
    return std::pow(ratio, 1.0 / static_cast<double>(p.m));
}

inline double bl_radius(std::size_t n, double gamma, const ConcentrationParams& p) {
    return wasserstein_radius(n, gamma, p);
}

inline double prokhorov_radius(std::size_t n, double gamma, const ConcentrationParams& p) {
    return std::sqrt(1.5 * wasserstein_radius(n, gamma, p));
}

/// Radius from the concentration bound for the metric-based kinds.
inline double formula_radius(DistanceKind kind, std::size_t n, double gamma, const ConcentrationParams& p) {
    switch (kind) {
    case DistanceKind::Wasserstein: return wasserstein_radius(n, gamma, p);
    case DistanceKind::BoundedLipschitz: return bl_radius(n, gamma, p);
    case DistanceKind::Prokhorov: return prokhorov_radius(n, gamma, p);
    default:
        throw ValidationError("no closed-form radius for distance '" + std::string(to_string(kind)) +
                              "'; use calibrated radii");
    }
}

/// Tail bound eta(N, eps) >= P[W1(mu, mu_hat_N) >= eps], clipped to [0, 1].
inline double concentration_eta(std::size_t n, double eps, const ConcentrationParams& p) {
    detail::check_sample_size(n);
    validate_params(p);
    if (!(eps >= 0.0)) throw ValidationError("epsilon must be nonnegative");
    const double N = static_cast<double>(n);
    double b;
    if (eps > 1.0) {
        b = std::exp(-p.c2 * N * std::pow(eps, p.a));
    } else if (p.m == 1) {
        b = std::exp(-p.c2 * N * eps * eps);
    } else if (p.m == 2) {
        if (eps == 0.0) {
            b = 1.0;
        } else {
            const double l = std::log(2.0 + 1.0 / eps);
            b = std::exp(-p.c2 * N * eps * eps / (l * l));
        }
    } else {
        b = std::exp(-p.c2 * N * std::pow(eps, static_cast<double>(p.m)));
    }
    return std::clamp(p.c1 * b, 0.0, 1.0);
}

/// Index k (1-based) of the order statistic used as the (1-gamma) quantile: ceil((1-gamma) trials).
inline std::size_t quantile_rank(double gamma, std::size_t trials) {
    const double r = std::ceil((1.0 - gamma) * static_cast<double>(trials) - 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(r, 1.0)), 1, trials);
}

/// Distances d(true_dist, mu_hat_N) over `trials` independent resamplings; trial t
/// draws from the substream derive_seed(seed, t).
inline numvec resampled_distances(DistanceKind kind, const Distribution& true_dist, std::size_t n,
                                  std::size_t trials, std::uint64_t seed, const SquareMatrix* metric = nullptr) {
    detail::check_sample_size(n);
    if (requires_metric(kind) && metric == nullptr)
        throw ValidationError(std::string("distance '") + std::string(to_string(kind)) + "' requires a metric");
    numvec d(trials);
    parallel_for(trials, [&](std::size_t t) {
        Rng rng(derive_seed(seed, t));
        const auto samples = rng.sample(true_dist, n);
        d[t] = distance(kind, true_dist, empirical_from_samples(samples, true_dist.size()), metric);
    });
    return d;
}

/// Monte-Carlo radius: the ceil((1-gamma) trials)-th smallest resampled distance.
inline double calibrate_radius_mc(DistanceKind kind, const Distribution& true_dist, std::size_t n, double gamma,
                                  std::size_t trials, std::uint64_t seed, const SquareMatrix* metric = nullptr) {
    detail::check_confidence(gamma);
    if (trials < 100) throw ValidationError("calibration needs at least 100 trials");
    numvec d = resampled_distances(kind, true_dist, n, trials, seed, metric);
    std::sort(d.begin(), d.end());
    return d[quantile_rank(gamma, trials) - 1];
}

} // namespace drmdp
