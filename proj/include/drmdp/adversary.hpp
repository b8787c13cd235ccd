#pragma once

#include "drmdp/distances.hpp"
#include "drmdp/lp.hpp"

#include <functional>
#include <optional>

namespace drmdp {

/// Ball {nu : d(nu, center) <= radius}. Metric-based kinds carry the disturbance metric.
struct AmbiguitySpec {
    DistanceKind kind = DistanceKind::TV;
    Distribution center;
    double radius = 0.0;
    std::optional<SquareMatrix> metric;

    const SquareMatrix* metric_ptr() const { return metric ? &*metric : nullptr; }
};

inline void validate_spec(const AmbiguitySpec& spec) {
    if (spec.center.size() == 0) throw ValidationError("ambiguity set has an empty center");
    if (std::isnan(spec.radius) || spec.radius < 0.0) throw ValidationError("ambiguity radius must be nonnegative");
    if (requires_metric(spec.kind)) {
        if (!spec.metric)
            throw ValidationError(std::string("distance '") + std::string(to_string(spec.kind)) + "' requires a metric");
        if (spec.metric->size() != spec.center.size())
            throw ValidationError("metric dimension does not match the ambiguity set support");
    }
}

/// Result of the inner sup over the ball.
struct WorstCase {
    double value = 0.0;
    Distribution witness;
    /// Lagrange multiplier of the radius constraint, when the solver is dual-based (NaN otherwise).
    double multiplier = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void check_payoff(const AmbiguitySpec& spec, std::span<const double> g) {
    if (g.size() != spec.center.size())
        throw ValidationError("payoff size " + std::to_string(g.size()) + " does not match support size " +
                              std::to_string(spec.center.size()));
    for (double v : g)
        if (!std::isfinite(v)) throw ValidationError("payoff vector has a non-finite entry");
}

inline Distribution make_witness(numvec mass) {
    double total = 0.0;
    for (auto& m : mass) {
        m = std::max(0.0, m);
        total += m;
    }
    for (auto& m : mass) m /= total;
    return Distribution(std::move(mass));
}

inline indvec support_of(const Distribution& d) {
    indvec s;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] > 0.0) s.push_back(i);
    return s;
}

// Indices sorted by payoff, descending; ties by index.
inline indvec order_by_payoff_desc(std::span<const double> g) {
    indvec idx(g.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return g[a] > g[b]; });
    return idx;
}

inline WorstCase concentrate_on_best(std::span<const double> g, const indvec& allowed) {
    std::size_t best = allowed.front();
    for (std::size_t i : allowed)
        if (g[i] > g[best]) best = i;
    return {g[best], Distribution::point_mass(g.size(), best)};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Per-kind solvers. All assume a validated spec, finite payoff and radius in (0, inf).

/// TV ball: move up to `radius` mass from the lowest-payoff atoms onto the best atom.
inline WorstCase worst_case_tv(const Distribution& center, std::span<const double> g, double radius) {
    const indvec desc = detail::order_by_payoff_desc(g);
    const std::size_t top = desc.front();
    numvec nu = center.mass();
    double budget = std::min(radius, 1.0 - nu[top]);
    for (auto it = desc.rbegin(); it != desc.rend() && budget > 0.0; ++it) {
        if (*it == top) continue;
        const double moved = std::min(budget, nu[*it]);
        nu[*it] -= moved;
        nu[top] += moved;
        budget -= moved;
    }
    WorstCase out{0.0, detail::make_witness(std::move(nu))};
    out.value = dot(out.witness.mass(), g);
    return out;
}

/// Dual objective lambda*eps + lambda*log sum_i center_i exp(g_i/lambda) of the KL ball.
inline double kl_dual_objective(const Distribution& center, std::span<const double> g, double radius, double lambda) {
    double gmax = -kInfinity;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (center[i] > 0.0) gmax = std::max(gmax, g[i]);
    double z = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (center[i] > 0.0) z += center[i] * std::exp((g[i] - gmax) / lambda);
    return gmax + lambda * (radius + std::log(z));
}

/**
 * KL ball {nu : KL(nu || center) <= radius}.
 *
 * Solves the one-dimensional dual over the inverse temperature t = 1/lambda: the
 * tilted distribution nu_t ~ center * exp(t g) has KL(nu_t || center) increasing in t,
 * and the optimum is the t with KL = radius. When the radius already admits the
 * center restricted to its best atoms, the lambda -> 0 limit (max payoff on the
 * support) is returned directly. The reported value is the dual objective (an upper
 * bound that matches the witness value to solver precision).
 */
inline WorstCase worst_case_kl(const Distribution& center, std::span<const double> g, double radius) {
    const indvec supp = detail::support_of(center);
    double gmax = -kInfinity, gmin = kInfinity;
    for (std::size_t i : supp) {
        gmax = std::max(gmax, g[i]);
        gmin = std::min(gmin, g[i]);
    }
    double top_mass = 0.0;
    for (std::size_t i : supp)
        if (g[i] == gmax) top_mass += center[i];
    if (radius >= -std::log(top_mass)) {
        numvec nu(g.size(), 0.0);
        for (std::size_t i : supp)
            if (g[i] == gmax) nu[i] = center[i] / top_mass;
        WorstCase out{gmax, detail::make_witness(std::move(nu)), 0.0};
        return out;
    }
    // Tilted distribution at inverse temperature t, with its KL divergence.
    auto tilt = [&](double t, numvec& nu) {
        double z = 0.0;
        nu.assign(g.size(), 0.0);
        for (std::size_t i : supp) {
            nu[i] = center[i] * std::exp(t * (g[i] - gmax));
            z += nu[i];
        }
        double mean = 0.0;
        for (std::size_t i : supp) {
            nu[i] /= z;
            mean += nu[i] * (g[i] - gmax);
        }
        return std::pair{t * mean - std::log(z), z};
    };
    numvec nu;
    double lo = 0.0, hi = 1.0 / (gmax - gmin);
    while (tilt(hi, nu).first <= radius) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw SolverError("KL worst case: multiplier bracket expansion failed");
    }
    for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tilt(mid, nu).first <= radius)
            lo = mid;
        else
            hi = mid;
    }
    if (lo == 0.0) {
        // Radius below the resolution of the bracket: the center is the answer.
        return {dot(center.mass(), g), center, kInfinity};
    }
    const auto [kl, z] = tilt(lo, nu);
    (void)kl;
    const double lambda = 1.0 / lo;
    WorstCase out{gmax + lambda * (radius + std::log(z)), detail::make_witness(std::move(nu)), lambda};
    return out;
}

/**
 * Chi-squared ball {nu << center : sum (nu_i - c_i)^2 / c_i <= radius}.
 *
 * KKT conditions give nu_i = c_i max(0, 1 + s (g_i - eta)), so the positive part of
 * the optimum is a top-k set of the support in payoff order. Each candidate set S
 * (closed under ties) yields s and eta in closed form:
 *   eta = mean_S(g) - (1 - P)/(s P),  s^2 P Var_S(g) = radius - (1 - P)/P,
 * with P = c(S); the valid candidate is the one whose signs are consistent.
 */
inline WorstCase worst_case_chi2(const Distribution& center, std::span<const double> g, double radius) {
    indvec supp = detail::support_of(center);
    std::stable_sort(supp.begin(), supp.end(), [&](std::size_t a, std::size_t b) { return g[a] > g[b]; });
    double scale = 0.0;
    for (std::size_t i : supp) scale = std::max(scale, std::abs(g[i]));
    const double tol = 1e-12 * (1.0 + scale);

    // Top tie group alone: feasible iff radius >= (1-P)/P.
    std::size_t k = 0;
    double mass = 0.0;
    while (k < supp.size() && g[supp[k]] == g[supp.front()]) mass += center[supp[k++]];
    if (radius >= (1.0 - mass) / mass) {
        numvec nu(g.size(), 0.0);
        for (std::size_t j = 0; j < k; ++j) nu[supp[j]] = center[supp[j]] / mass;
        return {g[supp.front()], detail::make_witness(std::move(nu))};
    }

    std::optional<WorstCase> best;
    while (k < supp.size()) {
        // Extend by the next tie group.
        const double gk = g[supp[k]];
        while (k < supp.size() && g[supp[k]] == gk) ++k;
        double p = 0.0, m1 = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            p += center[supp[j]];
            m1 += center[supp[j]] * g[supp[j]];
        }
        const double mean = m1 / p;
        double var = 0.0;
        for (std::size_t j = 0; j < k; ++j) var += center[supp[j]] * (g[supp[j]] - mean) * (g[supp[j]] - mean);
        var /= p;
        const double slack = radius - (1.0 - p) / p;
        if (slack < 0.0 || var <= 0.0) continue;
        const double s = std::sqrt(slack / (p * var));
        const double eta = mean - (1.0 - p) / (s * p);
        bool consistent = true;
        for (std::size_t j = 0; j < supp.size() && consistent; ++j) {
            const double lin = s * (g[supp[j]] - eta);
            consistent = (j < k) ? (1.0 + lin >= -tol * s) : (1.0 + lin <= tol * s);
        }
        if (!consistent) continue;
        numvec nu(g.size(), 0.0);
        for (std::size_t j = 0; j < k; ++j) nu[supp[j]] = center[supp[j]] * std::max(0.0, 1.0 + s * (g[supp[j]] - eta));
        WorstCase cand{0.0, detail::make_witness(std::move(nu))};
        cand.value = dot(cand.witness.mass(), g);
        if (!best || cand.value > best->value) best = std::move(cand);
    }
    if (!best) throw SolverError("chi-squared worst case: no consistent active set");
    return *best;
}

/**
 * Hellinger ball {nu : sum (sqrt(nu_i) - sqrt(c_i))^2 <= radius}.
 *
 * With a = 1 - radius/2, stationarity gives nu_i = c_i tau^2 / (k - g_i)^2 on the
 * support of the center, where k exceeds every supported payoff; mass may also sit
 * on unsupported atoms whose payoff equals k. The two scalar conditions reduce to
 * R(k) = B(k)/A(k)^2 = 1/a^2 with A = sum c_i/(k-g_i), B = sum c_i/(k-g_i)^2 and
 * tau = a/A(k), solved by bisection on k.
 */
inline WorstCase worst_case_hellinger(const Distribution& center, std::span<const double> g, double radius) {
    const std::size_t n = g.size();
    if (radius >= 2.0) {
        indvec all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return detail::concentrate_on_best(g, all);
    }
    const double a = 1.0 - radius / 2.0;
    const double target = 1.0 / (a * a);
    const indvec supp = detail::support_of(center);
    double g_supp = -kInfinity, g_out = -kInfinity, g_min = kInfinity;
    std::size_t out_atom = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (center[i] > 0.0) {
            g_supp = std::max(g_supp, g[i]);
            g_min = std::min(g_min, g[i]);
        } else if (g[i] > g_out) {
            g_out = g[i];
            out_atom = i;
        }
    }
    auto sums = [&](double k) {
        double A = 0.0, B = 0.0;
        for (std::size_t i : supp) {
            const double r = 1.0 / (k - g[i]);
            A += center[i] * r;
            B += center[i] * r * r;
        }
        return std::pair{A, B};
    };
    auto build = [&](double k, double outside) {
        const auto [A, B] = sums(k);
        const double tau = a / A;
        numvec nu(n, 0.0);
        for (std::size_t i : supp) nu[i] = center[i] * tau * tau / ((k - g[i]) * (k - g[i]));
        if (outside > 0.0) nu[out_atom] = outside;
        WorstCase wc{0.0, detail::make_witness(std::move(nu))};
        wc.value = dot(wc.witness.mass(), g);
        return wc;
    };

    if (g_out > g_supp) {
        const auto [A, B] = sums(g_out);
        const double outside = 1.0 - a * a * B / (A * A);
        if (outside >= 0.0) return build(g_out, outside);
    } else {
        double top_mass = 0.0;
        for (std::size_t i : supp)
            if (g[i] == g_supp) top_mass += center[i];
        if (std::sqrt(top_mass) >= a) {
            numvec nu(n, 0.0);
            for (std::size_t i : supp)
                if (g[i] == g_supp) nu[i] = center[i] / top_mass;
            return {g_supp, detail::make_witness(std::move(nu))};
        }
    }

    auto ratio = [&](double k) {
        const auto [A, B] = sums(k);
        return B / (A * A);
    };
    const double lo0 = std::max(g_supp, g_out);
    const double span = std::max(g_supp - g_min, 1e-12 * (1.0 + std::abs(g_supp)));
    double lo = lo0, hi = lo0 + span;
    while (ratio(hi) > target) {
        lo = hi;
        hi = lo0 + 2.0 * (hi - lo0);
        if (hi - lo0 > 1e300) throw SolverError("Hellinger worst case: bracket expansion failed");
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (ratio(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    // hi side has R <= target, i.e. the constructed nu is feasible after renormalization.
    return build(hi, 0.0);
}

/// h(lambda) = lambda*eps + sum_i c_i max_j (g_j - lambda*rho(i,j)), the Wasserstein dual objective.
inline double wasserstein_dual_objective(const Distribution& center, std::span<const double> g,
                                         const SquareMatrix& metric, double radius, double lambda) {
    double s = lambda * radius;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (center[i] == 0.0) continue;
        double m = -kInfinity;
        for (std::size_t j = 0; j < g.size(); ++j) m = std::max(m, g[j] - lambda * metric(i, j));
        s += center[i] * m;
    }
    return s;
}

/**
 * Wasserstein ball via the exact dual min over lambda >= 0 of the piecewise-linear
 * convex h. The minimum sits at 0 or at a breakpoint where two atoms tie for some
 * source atom, so every such breakpoint is evaluated. The witness transports each
 * source atom to a maximizer of g_j - lambda* rho(i,j), mixing the cheapest and the
 * most expensive maximizers so that the transport budget is met exactly.
 */
inline WorstCase worst_case_wasserstein(const Distribution& center, std::span<const double> g,
                                        const SquareMatrix& metric, double radius) {
    const std::size_t n = g.size();
    const indvec supp = detail::support_of(center);
    numvec candidates{0.0};
    for (std::size_t i : supp)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                const double dr = metric(i, j) - metric(i, k);
                if (dr == 0.0) continue;
                const double lambda = (g[j] - g[k]) / dr;
                if (lambda > 0.0) candidates.push_back(lambda);
            }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    double best_lambda = 0.0, best = kInfinity;
    for (double lambda : candidates) {
        const double h = wasserstein_dual_objective(center, g, metric, radius, lambda);
        if (h < best) {
            best = h;
            best_lambda = lambda;
        }
    }

    double scale = 0.0, rho_max = 0.0;
    for (double v : g) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) rho_max = std::max(rho_max, metric(i, j));
    const double tol = 1e-12 * (1.0 + scale + best_lambda * rho_max);
    indvec cheap(n), dear(n);
    double cost_lo = 0.0, cost_hi = 0.0;
    for (std::size_t i : supp) {
        double m = -kInfinity;
        for (std::size_t j = 0; j < n; ++j) m = std::max(m, g[j] - best_lambda * metric(i, j));
        std::size_t jlo = n, jhi = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (g[j] - best_lambda * metric(i, j) < m - tol) continue;
            if (jlo == n || metric(i, j) < metric(i, jlo)) jlo = j;
            if (jhi == n || metric(i, j) > metric(i, jhi)) jhi = j;
        }
        cheap[i] = jlo;
        dear[i] = jhi;
        cost_lo += center[i] * metric(i, jlo);
        cost_hi += center[i] * metric(i, jhi);
    }
    double theta = 0.0;
    if (best_lambda > 0.0 && cost_hi > cost_lo) theta = std::clamp((radius - cost_lo) / (cost_hi - cost_lo), 0.0, 1.0);
    numvec nu(n, 0.0);
    for (std::size_t i : supp) {
        nu[cheap[i]] += center[i] * (1.0 - theta);
        nu[dear[i]] += center[i] * theta;
    }
    return {best, detail::make_witness(std::move(nu)), best_lambda};
}

/// Primal transport LP for the Wasserstein ball: max sum pi_ij g_j subject to
/// sum_j pi_ij = c_i and sum pi_ij rho(i,j) <= radius. Independent of the dual route.
inline WorstCase wasserstein_worst_case_lp(const Distribution& center, std::span<const double> g,
                                           const SquareMatrix& metric, double radius) {
    const std::size_t n = g.size();
    lp::Problem p(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p.objective[i * n + j] = g[j];
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = p.add(lp::Sense::Equal, center[i]);
        for (std::size_t j = 0; j < n; ++j) row.coeffs[i * n + j] = 1.0;
    }
    auto& budget = p.add(lp::Sense::LessEqual, radius);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) budget.coeffs[i * n + j] = metric(i, j);
    const auto sol = lp::maximize_or_throw(p, "Wasserstein worst case");
    numvec nu(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) nu[j] += sol.x[i * n + j];
    WorstCase out{0.0, detail::make_witness(std::move(nu))};
    out.value = sol.value;
    return out;
}

/**
 * Bounded-Lipschitz ball as one LP. By duality of the BL program,
 * beta(nu, c) <= eps iff nu - c = p - q + div(theta) for some p, q, theta >= 0 with
 * sum(p + q) <= eps and sum theta_ij rho(i,j) <= eps, where div(theta)_i is the net
 * outflow of theta at i.
 */
inline WorstCase worst_case_bounded_lipschitz(const Distribution& center, std::span<const double> g,
                                              const SquareMatrix& metric, double radius) {
    const std::size_t n = g.size();
    // Layout: nu[0,n), p[n,2n), q[2n,3n), theta over ordered pairs i != j.
    const std::size_t theta0 = 3 * n;
    auto theta = [&](std::size_t i, std::size_t j) { return theta0 + i * (n - 1) + (j < i ? j : j - 1); };
    lp::Problem prob(theta0 + n * (n - 1));
    for (std::size_t i = 0; i < n; ++i) prob.objective[i] = g[i];
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = prob.add(lp::Sense::Equal, center[i]);
        row.coeffs[i] = 1.0;
        row.coeffs[n + i] = -1.0;
        row.coeffs[2 * n + i] = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            row.coeffs[theta(i, j)] -= 1.0;
            row.coeffs[theta(j, i)] += 1.0;
        }
    }
    {
        auto& row = prob.add(lp::Sense::Equal, 1.0);
        for (std::size_t i = 0; i < n; ++i) row.coeffs[i] = 1.0;
    }
    {
        auto& row = prob.add(lp::Sense::LessEqual, radius);
        for (std::size_t i = 0; i < 2 * n; ++i) row.coeffs[n + i] = 1.0;
    }
    {
        auto& row = prob.add(lp::Sense::LessEqual, radius);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) row.coeffs[theta(i, j)] = metric(i, j);
    }
    const auto sol = lp::maximize_or_throw(prob, "bounded-Lipschitz worst case");
    WorstCase out{0.0, detail::make_witness(numvec(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n)))};
    out.value = sol.value;
    return out;
}

/**
 * Prokhorov ball {nu : d_P(nu, c) <= eps}, i.e. nu(T) <= c(N_eps(T)) + eps for every T,
 * with N_eps the closed eps-neighborhood. The cap T -> min(1, c(N_eps(T)) + eps) is
 * monotone submodular, so the feasible set is the base polytope of a polymatroid and
 * filling atoms greedily in descending payoff order is optimal.
 */
inline WorstCase worst_case_prokhorov(const Distribution& center, std::span<const double> g,
                                      const SquareMatrix& metric, double radius) {
    const std::size_t n = g.size();
    const indvec desc = detail::order_by_payoff_desc(g);
    std::vector<char> covered(n, 0);
    double covered_mass = 0.0, prev_cap = 0.0;
    numvec nu(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t atom = desc[k];
        for (std::size_t j = 0; j < n; ++j)
            if (!covered[j] && metric(atom, j) <= radius) {
                covered[j] = 1;
                covered_mass += center[j];
            }
        const double cap = std::min(1.0, covered_mass + radius);
        nu[atom] = cap - prev_cap;
        prev_cap = cap;
    }
    WorstCase out{0.0, detail::make_witness(std::move(nu))};
    out.value = dot(out.witness.mass(), g);
    return out;
}

/// sup of <g, nu> over the ambiguity ball, with a maximizing distribution.
inline WorstCase worst_case_expectation(const AmbiguitySpec& spec, std::span<const double> g) {
    validate_spec(spec);
    detail::check_payoff(spec, g);
    if (spec.radius == 0.0) return {dot(spec.center.mass(), g), spec.center};
    if (std::isinf(spec.radius)) {
        indvec allowed;
        if (spec.kind == DistanceKind::KL || spec.kind == DistanceKind::ChiSquared) {
            allowed = detail::support_of(spec.center);
        } else {
            allowed.resize(g.size());
            std::iota(allowed.begin(), allowed.end(), std::size_t{0});
        }
        return detail::concentrate_on_best(g, allowed);
    }
    switch (spec.kind) {
    case DistanceKind::TV: return worst_case_tv(spec.center, g, spec.radius);
    case DistanceKind::Hellinger: return worst_case_hellinger(spec.center, g, spec.radius);
    case DistanceKind::KL: return worst_case_kl(spec.center, g, spec.radius);
    case DistanceKind::ChiSquared: return worst_case_chi2(spec.center, g, spec.radius);
    case DistanceKind::Wasserstein: return worst_case_wasserstein(spec.center, g, *spec.metric, spec.radius);
    case DistanceKind::BoundedLipschitz:
        return worst_case_bounded_lipschitz(spec.center, g, *spec.metric, spec.radius);
    case DistanceKind::Prokhorov: return worst_case_prokhorov(spec.center, g, *spec.metric, spec.radius);
    }
    throw ValidationError("unknown distance kind");
}

// ---------------------------------------------------------------------------
// Brute-force oracle.

/// Largest support the lattice oracle accepts.
inline constexpr std::size_t kMaxBruteForceSupport = 4;

namespace detail {

// Vertices of the polytope {x : A x <= b} in dimension `dim`, by exhaustive basis enumeration.
inline std::vector<numvec> enumerate_vertices(const std::vector<numvec>& A, const numvec& b, std::size_t dim) {
    std::vector<numvec> vertices;
    const std::size_t m = A.size();
    indvec pick(dim);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
        if (depth == dim) {
            // Solve the square system by Gaussian elimination with partial pivoting.
            std::vector<numvec> M(dim, numvec(dim + 1));
            for (std::size_t r = 0; r < dim; ++r) {
                for (std::size_t c = 0; c < dim; ++c) M[r][c] = A[pick[r]][c];
                M[r][dim] = b[pick[r]];
            }
            for (std::size_t c = 0; c < dim; ++c) {
                std::size_t piv = c;
                for (std::size_t r = c + 1; r < dim; ++r)
                    if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
                if (std::abs(M[piv][c]) < 1e-12) return;
                std::swap(M[piv], M[c]);
                for (std::size_t r = 0; r < dim; ++r) {
                    if (r == c) continue;
                    const double f = M[r][c] / M[c][c];
                    for (std::size_t k = c; k <= dim; ++k) M[r][k] -= f * M[c][k];
                }
            }
            numvec x(dim);
            for (std::size_t r = 0; r < dim; ++r) x[r] = M[r][dim] / M[r][r];
            for (std::size_t r = 0; r < m; ++r)
                if (dot(A[r], x) > b[r] + 1e-9) return;
            for (const auto& v : vertices)
                if (sup_distance(v, x) < 1e-10) return;
            vertices.push_back(std::move(x));
            return;
        }
        for (std::size_t i = start; i + (dim - depth) <= m; ++i) {
            pick[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return vertices;
}

} // namespace detail

/// Membership test for the ball used by the lattice oracle (at most kMaxBruteForceSupport
/// atoms). Wasserstein and bounded-Lipschitz distances are evaluated through the
/// precomputed vertices of their dual (Lipschitz-function) polytopes, which is independent
/// of both the worst-case solvers and the primal LPs in `distance`.
class BallMembership {
public:
    explicit BallMembership(const AmbiguitySpec& spec) : spec_(spec) {
        validate_spec(spec);
        const std::size_t n = spec.center.size();
        if (spec.kind == DistanceKind::Wasserstein) {
            // f_0 = 0; variables f_1..f_{n-1}; constraints f_i - f_j <= rho(i,j).
            std::vector<numvec> A;
            numvec b;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j) continue;
                    numvec row(n - 1, 0.0);
                    if (i > 0) row[i - 1] += 1.0;
                    if (j > 0) row[j - 1] -= 1.0;
                    A.push_back(row);
                    b.push_back((*spec.metric)(i, j));
                }
            for (auto& v : detail::enumerate_vertices(A, b, n - 1)) {
                v.insert(v.begin(), 0.0);
                duals_.push_back(std::move(v));
            }
            if (n == 1) duals_.push_back(numvec{0.0});
        } else if (spec.kind == DistanceKind::BoundedLipschitz) {
            // Variables f_0..f_{n-1}, s, r.
            const std::size_t dim = n + 2;
            std::vector<numvec> A;
            numvec b;
            auto add = [&](numvec row, double rhs) {
                A.push_back(std::move(row));
                b.push_back(rhs);
            };
            for (std::size_t i = 0; i < n; ++i) {
                numvec up(dim, 0.0), lo(dim, 0.0);
                up[i] = 1.0;
                up[n] = -1.0;
                lo[i] = -1.0;
                lo[n] = -1.0;
                add(up, 0.0);
                add(lo, 0.0);
            }
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j) continue;
                    numvec row(dim, 0.0);
                    row[i] = 1.0;
                    row[j] = -1.0;
                    row[n + 1] = -(*spec.metric)(i, j);
                    add(row, 0.0);
                }
            numvec budget(dim, 0.0), s_pos(dim, 0.0), r_pos(dim, 0.0);
            budget[n] = budget[n + 1] = 1.0;
            s_pos[n] = -1.0;
            r_pos[n + 1] = -1.0;
            add(budget, 1.0);
            add(s_pos, 0.0);
            add(r_pos, 0.0);
            for (auto& v : detail::enumerate_vertices(A, b, dim)) {
                v.resize(n);
                duals_.push_back(std::move(v));
            }
        } else if (spec.kind == DistanceKind::Prokhorov) {
            caps_.assign(std::size_t{1} << n, 0.0);
            for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
                double covered = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    bool near = false;
                    for (std::size_t i = 0; i < n && !near; ++i)
                        near = (mask & (1u << i)) && (*spec.metric)(i, j) <= spec.radius;
                    if (near) covered += spec.center[j];
                }
                caps_[mask] = covered + spec.radius;
            }
        }
        for (double c : spec.center) sqrt_center_.push_back(std::sqrt(c));
    }

    /// Membership with slack 1e-12. Divergences are evaluated inline; the Prokhorov ball is
    /// tested through its subset caps nu(T) <= center(closed eps-neighborhood of T) + eps.
    bool contains(std::span<const double> nu) const {
        const double eps = spec_.radius + 1e-12;
        const auto& c = spec_.center;
        const std::size_t n = nu.size();
        switch (spec_.kind) {
        case DistanceKind::TV: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += std::abs(nu[i] - c[i]);
            return 0.5 * s <= eps;
        }
        case DistanceKind::Hellinger: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = std::sqrt(nu[i]) - sqrt_center_[i];
                s += d * d;
            }
            return s <= eps;
        }
        case DistanceKind::KL: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (nu[i] == 0.0) continue;
                if (c[i] == 0.0) return false;
                s += nu[i] * std::log(nu[i] / c[i]);
            }
            return s <= eps;
        }
        case DistanceKind::ChiSquared: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (c[i] == 0.0) {
                    if (nu[i] > 0.0) return false;
                    continue;
                }
                s += (nu[i] - c[i]) * (nu[i] - c[i]) / c[i];
            }
            return s <= eps;
        }
        case DistanceKind::Prokhorov:
            for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
                double m = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (mask & (1u << i)) m += nu[i];
                if (m > caps_[mask] + 1e-12) return false;
            }
            return true;
        case DistanceKind::Wasserstein:
        case DistanceKind::BoundedLipschitz:
            for (const auto& f : duals_) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += f[i] * (nu[i] - c[i]);
                if (s > eps) return false;
            }
            return true;
        }
        return false;
    }

private:
    const AmbiguitySpec& spec_;
    std::vector<numvec> duals_;
    numvec sqrt_center_;
    numvec caps_;
};

/**
 * Lattice oracle: max <g, nu> over the simplex points nu = center + m / K with integer
 * offsets m summing to zero, K = round(1/resolution), that lie in the ball. Anchoring the
 * grid at the center keeps every transport move of the optimum representable up to one
 * grid step. The center itself is a grid point, so the result lies in [<g, center>, sup].
 */
inline double brute_force_worst_case(const AmbiguitySpec& spec, std::span<const double> g, double resolution) {
    validate_spec(spec);
    detail::check_payoff(spec, g);
    const std::size_t n = g.size();
    if (n > kMaxBruteForceSupport)
        throw ValidationError("brute-force oracle supports at most " + std::to_string(kMaxBruteForceSupport) +
                              " atoms, got " + std::to_string(n));
    if (!(resolution > 0.0 && resolution <= 0.1)) throw ValidationError("resolution must lie in (0, 0.1]");
    const double step = 1.0 / static_cast<double>(std::llround(1.0 / resolution));
    const BallMembership ball(spec);
    const auto& c = spec.center;

    // Offsets with nu_i = c_i + m_i step inside [0, 1].
    std::vector<long long> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = static_cast<long long>(std::ceil(-c[i] / step - 1e-9));
        hi[i] = static_cast<long long>(std::floor((1.0 - c[i]) / step + 1e-9));
    }

    double best = dot(c.mass(), g);
    numvec nu(n);
    std::function<void(std::size_t, long long)> rec = [&](std::size_t i, long long sum) {
        if (i + 1 == n) {
            const long long m = -sum;
            if (m < lo[i] || m > hi[i]) return;
            nu[i] = std::max(0.0, c[i] + static_cast<double>(m) * step);
            const double obj = dot(nu, g);
            if (obj > best && ball.contains(nu)) best = obj;
            return;
        }
        for (long long m = lo[i]; m <= hi[i]; ++m) {
            nu[i] = std::max(0.0, c[i] + static_cast<double>(m) * step);
            rec(i + 1, sum + m);
        }
    };
    rec(0, 0);
    return best;
}

} // namespace drmdp
