#pragma once

#include "drmdp/model.hpp"
#include "drmdp/radius.hpp"

namespace drmdp {

/// Lipschitz constants of c and F (separately in x and in w), sup-norm of c and discount.
struct LipschitzProfile {
    double L_c = 0.0;
    double L_F = 0.0;
    double c_sup = 0.0;
    double alpha = 0.5;
};

inline void validate_profile(const LipschitzProfile& p) {
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ValidationError("discount outside (0,1)");
    if (!(p.L_c >= 0.0) || !(p.L_F >= 0.0) || !(p.c_sup >= 0.0))
        throw ValidationError("Lipschitz constants and cost bound must be nonnegative");
    if (p.alpha * p.L_F >= 1.0)
        throw ValidationError("regime violation: alpha * L_F = " + std::to_string(p.alpha * p.L_F) + " is not below 1");
}

/**
 * Exact constants on a finite model: L_c is the largest of |c(x,a,w) - c(x',a,w)| / rho_X(x,x')
 * and |c(x,a,w) - c(x,a,w')| / rho_W(w,w') over admissible entries, L_F likewise with
 * rho_X(F(.), F(.)) in the numerator. A positive numerator over a zero pseudo-distance
 * yields infinity.
 */
inline LipschitzProfile lipschitz_estimate(const MdpModel& model) {
    require_valid(model);
    if (!model.x_metric()) throw ValidationError("Lipschitz estimation requires x_metric");
    const SquareMatrix& rx = *model.x_metric();
    const SquareMatrix& rw = model.w_metric();
    LipschitzProfile out;
    out.alpha = model.discount();
    out.c_sup = model.cost_sup();
    auto quotient = [](double num, double den) {
        if (num == 0.0) return 0.0;
        return den > 0.0 ? num / den : kInfinity;
    };
    const std::size_t nx = model.num_states(), nw = model.num_disturbances();
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t a : model.admissible(x))
            for (std::size_t w = 0; w < nw; ++w) {
                const double c = model.cost(x, a, w);
                const std::size_t f = model.next(x, a, w);
                for (std::size_t y = x + 1; y < nx; ++y) {
                    if (!model.is_admissible(y, a)) continue;
                    out.L_c = std::max(out.L_c, quotient(std::abs(c - model.cost(y, a, w)), rx(x, y)));
                    out.L_F = std::max(out.L_F, quotient(rx(f, model.next(y, a, w)), rx(x, y)));
                }
                for (std::size_t v = w + 1; v < nw; ++v) {
                    out.L_c = std::max(out.L_c, quotient(std::abs(c - model.cost(x, a, v)), rw(w, v)));
                    out.L_F = std::max(out.L_F, quotient(rx(f, model.next(x, a, v)), rw(w, v)));
                }
            }
    return out;
}

/// Delta = |c|/(1-alpha)^2 + L_c/(1-alpha) + alpha L_c L_F / ((1-alpha)(1-alpha L_F)).
inline double delta_constant(const LipschitzProfile& p) {
    validate_profile(p);
    const double alpha = p.alpha;
    return p.c_sup / ((1.0 - alpha) * (1.0 - alpha)) + p.L_c / (1.0 - alpha) +
           alpha * p.L_c * p.L_F / ((1.0 - alpha) * (1.0 - alpha * p.L_F));
}

/// Bound 2 psi(eps) Delta on J(pi_hat) - J* and on J_tilde - J*.
inline double rate_bound(DistanceKind kind, double eps, double delta) {
    if (!(eps >= 0.0)) throw ValidationError("epsilon must be nonnegative");
    return 2.0 * psi(kind, eps) * delta;
}

struct RadiusWindow {
    double lower = 0.0;
    double upper = 0.0;
    bool nonempty() const { return lower <= upper; }
};

namespace detail {

inline void check_rate_params(const ConcentrationParams& p) {
    validate_params(p);
    if (p.m < 3) throw ValidationError("radius window and sample complexity require m >= 3");
    if (p.a < static_cast<double>(p.m)) throw ValidationError("radius window and sample complexity require a >= m");
}

inline void check_delta(double delta) {
    if (!(delta > 0.0)) throw ValidationError("delta must be positive");
}

} // namespace detail

/// Largest radius keeping the rate bound below delta. The Wasserstein case is the closed form
/// 0.5 delta (1-alpha)^2 (1-alpha L_F) / (|c| (1-alpha L_F) + L_c (1-alpha)); other kinds use
/// psi^{-1}(delta / (2 Delta)).
inline double radius_upper(double delta, const LipschitzProfile& p, DistanceKind kind = DistanceKind::Wasserstein) {
    detail::check_delta(delta);
    validate_profile(p);
    const double alpha = p.alpha, k = 1.0 - alpha * p.L_F;
    if (kind == DistanceKind::Wasserstein)
        return 0.5 * (delta * (1.0 - alpha) * (1.0 - alpha) * k / (p.c_sup * k + p.L_c * (1.0 - alpha)));
    return psi_inverse(kind, delta / (2.0 * delta_constant(p)));
}

/// Smallest radius for which the concentration bound gives confidence 1 - gamma/2:
/// (log(2 c1/gamma) / (N c2))^(1/m).
inline double radius_lower(std::size_t n, double gamma, const ConcentrationParams& params) {
    detail::check_sample_size(n);
    detail::check_confidence(gamma);
    detail::check_rate_params(params);
    const double L = std::log(2.0 * params.c1 / gamma);
    if (L <= 0.0) return 0.0;
    return std::pow(L / (static_cast<double>(n) * params.c2), 1.0 / static_cast<double>(params.m));
}

/// (eps_lb, eps_ub); an empty window (lower > upper) is reported, not thrown.
inline RadiusWindow radius_window(double delta, double gamma, std::size_t n, const LipschitzProfile& profile,
                                  const ConcentrationParams& params, DistanceKind kind = DistanceKind::Wasserstein) {
    return {radius_lower(n, gamma, params), radius_upper(delta, profile, kind)};
}

/**
 * Smallest N with
 *   N >= 2^m log(2 c1/gamma) (|c|(1-alpha L_F) + L_c(1-alpha))^m / (c2 delta^m (1-alpha)^(2m) (1-alpha L_F)^m),
 * increased if floating-point rounding leaves the window at N empty.
 */
inline std::uint64_t sample_complexity(double delta, double gamma, const LipschitzProfile& p,
                                       const ConcentrationParams& params) {
    detail::check_delta(delta);
    detail::check_confidence(gamma);
    detail::check_rate_params(params);
    validate_profile(p);
    const double m = static_cast<double>(params.m);
    const double alpha = p.alpha, k = 1.0 - alpha * p.L_F;
    const double L = std::log(2.0 * params.c1 / gamma);
    if (L <= 0.0) return 1;
    const double bound = std::pow(2.0, m) * L * std::pow(p.c_sup * k + p.L_c * (1.0 - alpha), m) /
                         (params.c2 * std::pow(delta, m) * std::pow(1.0 - alpha, 2.0 * m) * std::pow(k, m));
    if (!(bound < 1e18)) throw ValidationError("sample complexity exceeds the representable range");
    auto n = static_cast<std::uint64_t>(std::max(1.0, std::ceil(bound)));
    const double upper = radius_upper(delta, p);
    while (radius_lower(n, gamma, params) > upper) ++n;
    return n;
}

struct OodBound {
    double total = 0.0;
    /// 2 psi(eps) Delta / (1 - alpha): error from estimating the proxy distribution.
    double statistical = 0.0;
    /// beta(mu_true, mu) Delta / (1 - alpha): error from the proxy itself.
    double nonstatistical = 0.0;
};

/// (2 psi(eps) + beta_gap) Delta / (1 - alpha).
inline OodBound ood_bound(DistanceKind kind, double eps, double beta_gap, const LipschitzProfile& p) {
    if (!(beta_gap >= 0.0)) throw ValidationError("beta gap must be nonnegative");
    if (!(eps >= 0.0)) throw ValidationError("epsilon must be nonnegative");
    const double delta = delta_constant(p);
    const double alpha = p.alpha;
    OodBound out;
    out.total = (2.0 * psi(kind, eps) + beta_gap) * delta / (1.0 - alpha);
    out.statistical = 2.0 * psi(kind, eps) * delta / (1.0 - alpha);
    out.nonstatistical = beta_gap * delta / (1.0 - alpha);
    return out;
}

} // namespace drmdp
