#pragma once

#include "drmdp/lp.hpp"
#include "drmdp/types.hpp"

#include <array>
#include <bit>
#include <optional>
#include <string_view>

namespace drmdp {

enum class DistanceKind { TV, Hellinger, KL, ChiSquared, Wasserstein, BoundedLipschitz, Prokhorov };

inline constexpr std::array<DistanceKind, 7> kAllDistanceKinds = {
    DistanceKind::TV,          DistanceKind::Hellinger,        DistanceKind::KL,       DistanceKind::ChiSquared,
    DistanceKind::Wasserstein, DistanceKind::BoundedLipschitz, DistanceKind::Prokhorov};

/// Largest support for which subset enumeration (Prokhorov) is attempted.
inline constexpr std::size_t kMaxEnumerationSupport = 16;

inline bool requires_metric(DistanceKind kind) {
    return kind == DistanceKind::Wasserstein || kind == DistanceKind::BoundedLipschitz ||
           kind == DistanceKind::Prokhorov;
}

inline std::string_view to_string(DistanceKind kind) {
    switch (kind) {
    case DistanceKind::TV: return "tv";
    case DistanceKind::Hellinger: return "hellinger";
    case DistanceKind::KL: return "kl";
    case DistanceKind::ChiSquared: return "chi2";
    case DistanceKind::Wasserstein: return "wasserstein";
    case DistanceKind::BoundedLipschitz: return "bl";
    case DistanceKind::Prokhorov: return "prokhorov";
    }
    return "?";
}

inline DistanceKind parse_distance_kind(std::string_view name) {
    for (auto k : kAllDistanceKinds)
        if (to_string(k) == name) return k;
    throw ValidationError("unknown distance kind '" + std::string(name) + "'");
}

/// Empirical distribution count(w)/N of disturbance-index samples.
inline Distribution empirical_from_samples(std::span<const std::size_t> samples, std::size_t support) {
    if (samples.empty()) throw ValidationError("empirical distribution needs at least one sample");
    if (support == 0) throw ValidationError("empty disturbance support");
    std::vector<std::size_t> counts(support, 0);
    for (std::size_t s : samples) {
        if (s >= support)
            throw ValidationError("sample index " + std::to_string(s) + " outside support of size " +
                                  std::to_string(support));
        ++counts[s];
    }
    numvec mass(support);
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < support; ++i) mass[i] = static_cast<double>(counts[i]) / n;
    return Distribution(std::move(mass));
}

namespace detail {

inline void check_same_support(const Distribution& nu, const Distribution& rho) {
    if (nu.size() != rho.size())
        throw ValidationError("distributions have different support sizes (" + std::to_string(nu.size()) + " vs " +
                              std::to_string(rho.size()) + ")");
}

inline void check_metric(const Distribution& nu, const SquareMatrix& metric) {
    if (metric.size() != nu.size())
        throw ValidationError("metric dimension " + std::to_string(metric.size()) + " does not match support size " +
                              std::to_string(nu.size()));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Individual distances. The second argument is the reference distribution.

inline double total_variation(const Distribution& nu, const Distribution& rho) {
    detail::check_same_support(nu, rho);
    double s = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) s += std::abs(nu[i] - rho[i]);
    return 0.5 * s;
}

/// Squared form sum (sqrt(nu) - sqrt(rho))^2 with counting measure as the dominating measure.
inline double hellinger(const Distribution& nu, const Distribution& rho) {
    detail::check_same_support(nu, rho);
    double s = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const double d = std::sqrt(nu[i]) - std::sqrt(rho[i]);
        s += d * d;
    }
    return s;
}

/// KL(nu || rho); +inf when nu is not absolutely continuous w.r.t. rho.
inline double kullback_leibler(const Distribution& nu, const Distribution& rho) {
    detail::check_same_support(nu, rho);
    double s = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        if (nu[i] == 0.0) continue;
        if (rho[i] == 0.0) return kInfinity;
        s += nu[i] * std::log(nu[i] / rho[i]);
    }
    return std::max(0.0, s);
}

/// sum rho (nu/rho - 1)^2; +inf when nu is not absolutely continuous w.r.t. rho.
inline double chi_squared(const Distribution& nu, const Distribution& rho) {
    detail::check_same_support(nu, rho);
    double s = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        if (rho[i] == 0.0) {
            if (nu[i] > 0.0) return kInfinity;
            continue;
        }
        const double d = nu[i] - rho[i];
        s += d * d / rho[i];
    }
    return s;
}

/// 1-Wasserstein distance: optimal transport value under `metric`.
inline double wasserstein(const Distribution& nu, const Distribution& rho, const SquareMatrix& metric) {
    detail::check_same_support(nu, rho);
    detail::check_metric(nu, metric);
    const std::size_t n = nu.size();
    // Only atoms with mass participate; this keeps the LP small for sparse empirical measures.
    indvec src, dst;
    for (std::size_t i = 0; i < n; ++i) {
        if (nu[i] > 0.0) src.push_back(i);
        if (rho[i] > 0.0) dst.push_back(i);
    }
    if (src.size() == 1 || dst.size() == 1) {
        // Forced plan.
        double s = 0.0;
        if (src.size() == 1)
            for (std::size_t j : dst) s += rho[j] * metric(src[0], j);
        else
            for (std::size_t i : src) s += nu[i] * metric(i, dst[0]);
        return s;
    }
    lp::Problem p(src.size() * dst.size());
    for (std::size_t a = 0; a < src.size(); ++a)
        for (std::size_t b = 0; b < dst.size(); ++b) p.objective[a * dst.size() + b] = -metric(src[a], dst[b]);
    for (std::size_t a = 0; a < src.size(); ++a) {
        auto& row = p.add(lp::Sense::Equal, nu[src[a]]);
        for (std::size_t b = 0; b < dst.size(); ++b) row.coeffs[a * dst.size() + b] = 1.0;
    }
    // One marginal row is redundant; drop the last.
    for (std::size_t b = 0; b + 1 < dst.size(); ++b) {
        auto& row = p.add(lp::Sense::Equal, rho[dst[b]]);
        for (std::size_t a = 0; a < src.size(); ++a) row.coeffs[a * dst.size() + b] = 1.0;
    }
    const auto sol = lp::maximize_or_throw(p, "wasserstein distance");
    return std::max(0.0, -sol.value);
}

/// Bounded-Lipschitz metric: sup <f, nu - rho> over ||f||_inf + ||f||_L <= 1, as a finite LP.
///
/// Variables are f = f_plus - f_minus, the sup-norm bound s and the Lipschitz bound r:
/// |f_i| <= s, f_i - f_j <= r * metric(i, j), s + r <= 1.
inline double bounded_lipschitz(const Distribution& nu, const Distribution& rho, const SquareMatrix& metric) {
    detail::check_same_support(nu, rho);
    detail::check_metric(nu, metric);
    const std::size_t n = nu.size();
    if (nu == rho) return 0.0;
    const std::size_t s_var = 2 * n, r_var = 2 * n + 1;
    lp::Problem p(2 * n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        p.objective[i] = nu[i] - rho[i];
        p.objective[n + i] = -(nu[i] - rho[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto& up = p.add(lp::Sense::LessEqual, 0.0);
        up.coeffs[i] = 1.0;
        up.coeffs[n + i] = -1.0;
        up.coeffs[s_var] = -1.0;
        auto& lo = p.add(lp::Sense::LessEqual, 0.0);
        lo.coeffs[i] = -1.0;
        lo.coeffs[n + i] = 1.0;
        lo.coeffs[s_var] = -1.0;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            auto& row = p.add(lp::Sense::LessEqual, 0.0);
            row.coeffs[i] = 1.0;
            row.coeffs[n + i] = -1.0;
            row.coeffs[j] = -1.0;
            row.coeffs[n + j] = 1.0;
            row.coeffs[r_var] = -metric(i, j);
        }
    auto& budget = p.add(lp::Sense::LessEqual, 1.0);
    budget.coeffs[s_var] = 1.0;
    budget.coeffs[r_var] = 1.0;
    const auto sol = lp::maximize_or_throw(p, "bounded-Lipschitz distance");
    return std::max(0.0, sol.value);
}

namespace detail {

// Sorted distinct metric values, starting with 0.
inline numvec distinct_metric_levels(const SquareMatrix& metric) {
    numvec levels{0.0};
    for (std::size_t i = 0; i < metric.size(); ++i)
        for (std::size_t j = 0; j < metric.size(); ++j) levels.push_back(metric(i, j));
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    return levels;
}

// Bitmask of atoms within distance `radius` (closed) of each atom.
inline std::vector<std::uint32_t> closed_neighborhoods(const SquareMatrix& metric, double radius) {
    const std::size_t n = metric.size();
    std::vector<std::uint32_t> nb(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (metric(i, j) <= radius) nb[i] |= (1u << j);
    return nb;
}

// Masses of every subset (index = bitmask).
inline numvec subset_masses(const Distribution& d) {
    const std::size_t n = d.size();
    numvec out(std::size_t{1} << n, 0.0);
    for (std::size_t mask = 1; mask < out.size(); ++mask) {
        const std::size_t low = static_cast<std::size_t>(std::countr_zero(mask));
        out[mask] = out[mask & (mask - 1)] + d[low];
    }
    return out;
}

// max over nonempty T of nu(T) - rho(N(T)) for the given closed neighborhoods.
inline double max_subset_excess(const numvec& nu_mass, const numvec& rho_mass, const std::vector<std::uint32_t>& nb) {
    const std::size_t count = nu_mass.size();
    std::vector<std::uint32_t> hull(count, 0);
    double best = -kInfinity;
    for (std::size_t mask = 1; mask < count; ++mask) {
        const std::size_t low = static_cast<std::size_t>(std::countr_zero(mask));
        hull[mask] = hull[mask & (mask - 1)] | nb[low];
        best = std::max(best, nu_mass[mask] - rho_mass[hull[mask]]);
    }
    return best;
}

} // namespace detail

/// Prokhorov distance inf{delta > 0 : nu(T) <= rho(T^delta) + delta for all T}, with
/// T^delta the open delta-neighborhood of T.
///
/// Computed exactly: on each interval (d_k, d_{k+1}] between consecutive distinct metric
/// values the open neighborhood T^delta equals the closed d_k-neighborhood, so the
/// feasible deltas there are those >= max_T [nu(T) - rho(N_k(T))].
inline double prokhorov(const Distribution& nu, const Distribution& rho, const SquareMatrix& metric) {
    detail::check_same_support(nu, rho);
    detail::check_metric(nu, metric);
    if (nu.size() > kMaxEnumerationSupport)
        throw ValidationError("Prokhorov distance enumerates subsets; support size " + std::to_string(nu.size()) +
                              " exceeds " + std::to_string(kMaxEnumerationSupport));
    const numvec levels = detail::distinct_metric_levels(metric);
    const numvec nu_mass = detail::subset_masses(nu);
    const numvec rho_mass = detail::subset_masses(rho);
    double best = kInfinity;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const double lo = levels[k];
        if (lo >= best) break;
        const double hi = (k + 1 < levels.size()) ? levels[k + 1] : kInfinity;
        const double excess = detail::max_subset_excess(nu_mass, rho_mass, detail::closed_neighborhoods(metric, lo));
        const double candidate = std::max(lo, excess);
        if (candidate <= hi) best = std::min(best, candidate);
    }
    return std::max(0.0, best);
}

/// Distance d(nu, rho) of the given kind. Metric-based kinds need `metric`.
inline double distance(DistanceKind kind, const Distribution& nu, const Distribution& rho,
                       const SquareMatrix* metric = nullptr) {
    if (requires_metric(kind) && metric == nullptr)
        throw ValidationError(std::string("distance '") + std::string(to_string(kind)) + "' requires a metric");
    switch (kind) {
    case DistanceKind::TV: return total_variation(nu, rho);
    case DistanceKind::Hellinger: return hellinger(nu, rho);
    case DistanceKind::KL: return kullback_leibler(nu, rho);
    case DistanceKind::ChiSquared: return chi_squared(nu, rho);
    case DistanceKind::Wasserstein: return wasserstein(nu, rho, *metric);
    case DistanceKind::BoundedLipschitz: return bounded_lipschitz(nu, rho, *metric);
    case DistanceKind::Prokhorov: return prokhorov(nu, rho, *metric);
    }
    return 0.0;
}

inline double distance(DistanceKind kind, const Distribution& nu, const Distribution& rho,
                       const SquareMatrix& metric) {
    return distance(kind, nu, rho, &metric);
}

/// Modulus psi with beta <= psi(d) for each kind.
inline double psi(DistanceKind kind, double t) {
    if (t < 0.0) throw ValidationError("psi is defined for nonnegative arguments");
    switch (kind) {
    case DistanceKind::TV: return 2.0 * t;
    case DistanceKind::Hellinger: return 2.0 * std::sqrt(t);
    case DistanceKind::KL: return std::sqrt(2.0 * t);
    case DistanceKind::ChiSquared: return std::sqrt(t);
    case DistanceKind::Wasserstein: return t;
    case DistanceKind::BoundedLipschitz: return t;
    case DistanceKind::Prokhorov: return 2.0 * t;
    }
    return t;
}

inline double psi_inverse(DistanceKind kind, double y) {
    if (y < 0.0) throw ValidationError("psi_inverse is defined for nonnegative arguments");
    switch (kind) {
    case DistanceKind::TV: return y / 2.0;
    case DistanceKind::Hellinger: return (y / 2.0) * (y / 2.0);
    case DistanceKind::KL: return y * y / 2.0;
    case DistanceKind::ChiSquared: return y * y;
    case DistanceKind::Wasserstein: return y;
    case DistanceKind::BoundedLipschitz: return y;
    case DistanceKind::Prokhorov: return y / 2.0;
    }
    return y;
}

} // namespace drmdp
