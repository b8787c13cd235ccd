#pragma once

#include "drmdp/guarantees.hpp"
#include "drmdp/radius.hpp"
#include "drmdp/robust.hpp"
#include "drmdp/sampling.hpp"

#include <chrono>
#include <optional>

namespace drmdp {

/// Slack used by every per-trial assertion.
inline constexpr double kAssertionTol = 1e-8;

enum class RadiusMode { Fixed, Formula, Calibrated };

inline std::string_view to_string(RadiusMode mode) {
    switch (mode) {
    case RadiusMode::Fixed: return "fixed";
    case RadiusMode::Formula: return "formula";
    case RadiusMode::Calibrated: return "calibrated";
    }
    return "?";
}

inline RadiusMode parse_radius_mode(std::string_view name) {
    for (auto m : {RadiusMode::Fixed, RadiusMode::Formula, RadiusMode::Calibrated})
        if (to_string(m) == name) return m;
    throw ValidationError("unknown radius mode '" + std::string(name) + "'");
}

struct ExperimentConfig {
    MdpModel model;
    /// Law the samples are drawn from (and, except in the out-of-distribution experiment, the evaluation law).
    Distribution true_dist;
    DistanceKind kind = DistanceKind::TV;
    RadiusMode radius_mode = RadiusMode::Calibrated;
    /// Radius for RadiusMode::Fixed.
    double epsilon = 0.0;
    /// Constants for RadiusMode::Formula.
    ConcentrationParams params;
    /// Sample sizes; one stage of `trials` trials per entry.
    std::vector<std::size_t> sample_sizes{50};
    std::size_t trials = 100;
    double gamma = 0.1;
    std::size_t calibration_trials = 1000;
    std::optional<std::uint64_t> seed;
    double tol = 1e-10;
    /// Use the sampling law itself as the ball center instead of the empirical distribution.
    bool exact_center = false;
    unsigned threads = 0;
};

struct TrialRecord {
    std::size_t trial = 0;
    std::size_t n = 0;
    double epsilon = 0.0;
    double dist_mu_muhat = 0.0;
    bool premise = false;
    /// Ball contains the evaluation law; differs from `premise` only when sampling and evaluation laws differ.
    bool eval_premise = false;
    bool coverage_ok = false;
    double sup_gap_robust = 0.0;
    double sup_gap_oos = 0.0;
    /// Bound checked by the rate and out-of-distribution experiments (NaN otherwise).
    double bound = std::numeric_limits<double>::quiet_NaN();
    bool bound_ok = true;
    /// Sample counts per disturbance.
    std::vector<std::size_t> counts;
    double wall_ms = 0.0;
};

struct StageSummary {
    std::size_t n = 0;
    std::size_t trials = 0;
    /// Radius shared by the stage (fixed, formula or calibrated).
    double epsilon = 0.0;
    double coverage = 0.0;
    double premise_rate = 0.0;
    std::size_t implication_violations = 0;
    std::size_t bound_violations = 0;
    double median_gap_robust = 0.0;
    double median_gap_oos = 0.0;
    double mean_gap_robust = 0.0;
    double mean_gap_oos = 0.0;
    double max_gap_robust = 0.0;
    double max_gap_oos = 0.0;
};

struct ExperimentReport {
    std::string experiment;
    DistanceKind kind = DistanceKind::TV;
    RadiusMode radius_mode = RadiusMode::Calibrated;
    double gamma = 0.0;
    std::uint64_t seed = 0;
    std::size_t trials_per_stage = 0;
    std::vector<TrialRecord> records;
    std::vector<StageSummary> stages;
    /// Trials with d(mu, mu_hat) <= eps but J(pi_hat, x) > J_tilde(x) + tol for some x.
    std::size_t implication_violations = 0;
    /// Premise-satisfying trials that break the rate or out-of-distribution bound.
    std::size_t bound_violations = 0;
    /// Stage-to-stage strict decreases of the median gaps (convergence experiment).
    std::size_t robust_gap_decreases = 0;
    std::size_t oos_gap_decreases = 0;
    std::optional<double> delta;
    std::optional<double> beta_gap;
    double total_wall_ms = 0.0;
};

namespace detail {

enum class BoundKind { None, Rate, OutOfDistribution };

struct ExperimentSetup {
    BoundKind bound = BoundKind::None;
    /// Evaluation law; defaults to the sampling law.
    std::optional<Distribution> eval_dist;
    double delta = 0.0;
    double beta_gap = 0.0;
    double alpha = 0.5;
};

inline double median(numvec v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

inline void validate_config(const ExperimentConfig& c) {
    require_valid(c.model);
    if (!c.seed) throw ValidationError("experiments require an explicit seed");
    if (c.trials < 1) throw ValidationError("trial count must be at least 1");
    if (c.sample_sizes.empty()) throw ValidationError("at least one sample size is required");
    for (std::size_t n : c.sample_sizes)
        if (n < 1) throw ValidationError("sample size must be at least 1");
    if (!(c.gamma > 0.0 && c.gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
    if (!(c.tol > 0.0)) throw ValidationError("tolerance must be positive");
    if (c.true_dist.size() != c.model.num_disturbances())
        throw ValidationError("true distribution does not match the model's disturbances");
    if (c.radius_mode == RadiusMode::Fixed && !(c.epsilon >= 0.0)) throw ValidationError("epsilon must be nonnegative");
    if (c.radius_mode == RadiusMode::Formula) validate_params(c.params);
}

inline double stage_radius(const ExperimentConfig& c, std::size_t n) {
    switch (c.radius_mode) {
    case RadiusMode::Fixed: return c.epsilon;
    case RadiusMode::Formula: return formula_radius(c.kind, n, c.gamma, c.params);
    case RadiusMode::Calibrated:
        return calibrate_radius_mc(c.kind, c.true_dist, n, c.gamma, c.calibration_trials,
                                   derive_seed(derive_seed(*c.seed, n), 0xca11b4a7eULL), &c.model.w_metric());
    }
    return 0.0;
}

inline ExperimentReport run_experiment(const ExperimentConfig& c, std::string name, const ExperimentSetup& setup) {
    validate_config(c);
    const auto start = std::chrono::steady_clock::now();
    const MdpModel& model = c.model;
    const SquareMatrix& metric = model.w_metric();
    const Distribution& sampling = c.true_dist;
    const Distribution& eval = setup.eval_dist ? *setup.eval_dist : sampling;

    // J* of the evaluation law, made exact by evaluating the optimal policy with a linear solve.
    const Policy opt_policy = value_iterate(model, eval, 1e-12).policy;
    const ValueFunction j_star = evaluate_policy(model, eval, opt_policy);

    ExperimentReport report;
    report.experiment = std::move(name);
    report.kind = c.kind;
    report.radius_mode = c.radius_mode;
    report.gamma = c.gamma;
    report.seed = *c.seed;
    report.trials_per_stage = c.trials;
    if (setup.bound != BoundKind::None) report.delta = setup.delta;
    if (setup.bound == BoundKind::OutOfDistribution) report.beta_gap = setup.beta_gap;

    for (std::size_t n : c.sample_sizes) {
        const double eps = stage_radius(c, n);
        std::vector<TrialRecord> stage(c.trials);
        parallel_for(
            c.trials,
            [&](std::size_t t) {
                const auto t0 = std::chrono::steady_clock::now();
                TrialRecord& rec = stage[t];
                rec.trial = t;
                rec.n = n;
                rec.epsilon = eps;
                Rng rng(derive_seed(derive_seed(*c.seed, n), t));
                const auto samples = rng.sample(sampling, n);
                rec.counts.assign(model.num_disturbances(), 0);
                for (std::size_t s : samples) ++rec.counts[s];
                const Distribution center =
                    c.exact_center ? sampling : empirical_from_samples(samples, model.num_disturbances());
                rec.dist_mu_muhat = distance(c.kind, sampling, center, &metric);
                rec.premise = rec.dist_mu_muhat <= eps;
                rec.eval_premise =
                    setup.eval_dist ? distance(c.kind, eval, center, &metric) <= eps : rec.premise;

                AmbiguitySpec spec{c.kind, center, eps, std::nullopt};
                if (requires_metric(c.kind)) spec.metric = metric;
                SolveResult robust;
                try {
                    robust = robust_value_iterate(model, spec, c.tol);
                } catch (const std::exception& e) {
                    throw SolverError("trial " + std::to_string(t) + " (N=" + std::to_string(n) + "): " + e.what());
                }
                const ValueFunction oos = evaluate_policy(model, eval, robust.policy);
                rec.coverage_ok = true;
                rec.bound_ok = true;
                if (setup.bound == BoundKind::Rate) rec.bound = 2.0 * psi(c.kind, eps) * setup.delta;
                if (setup.bound == BoundKind::OutOfDistribution)
                    rec.bound = (2.0 * psi(c.kind, eps) + setup.beta_gap) * setup.delta / (1.0 - setup.alpha);
                for (std::size_t x = 0; x < model.num_states(); ++x) {
                    const double robust_gap = robust.value[x] - j_star[x];
                    const double oos_gap = oos[x] - j_star[x];
                    rec.sup_gap_robust = std::max(rec.sup_gap_robust, std::abs(robust_gap));
                    rec.sup_gap_oos = std::max(rec.sup_gap_oos, std::abs(oos_gap));
                    if (oos[x] > robust.value[x] + kAssertionTol) rec.coverage_ok = false;
                    if (setup.bound == BoundKind::Rate &&
                        (oos_gap > robust_gap + kAssertionTol || robust_gap > rec.bound + kAssertionTol))
                        rec.bound_ok = false;
                    if (setup.bound == BoundKind::OutOfDistribution && oos_gap > rec.bound + kAssertionTol)
                        rec.bound_ok = false;
                }
                rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            },
            c.threads);

        StageSummary s;
        s.n = n;
        s.trials = c.trials;
        s.epsilon = eps;
        numvec gr, go;
        std::size_t covered = 0, premises = 0;
        for (const auto& rec : stage) {
            covered += rec.coverage_ok;
            premises += rec.premise;
            if (rec.eval_premise && !rec.coverage_ok) ++s.implication_violations;
            if (setup.bound != BoundKind::None && rec.premise && !rec.bound_ok) ++s.bound_violations;
            gr.push_back(rec.sup_gap_robust);
            go.push_back(rec.sup_gap_oos);
        }
        const double m = static_cast<double>(c.trials);
        s.coverage = static_cast<double>(covered) / m;
        s.premise_rate = static_cast<double>(premises) / m;
        s.median_gap_robust = median(gr);
        s.median_gap_oos = median(go);
        s.mean_gap_robust = std::accumulate(gr.begin(), gr.end(), 0.0) / m;
        s.mean_gap_oos = std::accumulate(go.begin(), go.end(), 0.0) / m;
        s.max_gap_robust = *std::max_element(gr.begin(), gr.end());
        s.max_gap_oos = *std::max_element(go.begin(), go.end());
        report.implication_violations += s.implication_violations;
        report.bound_violations += s.bound_violations;
        if (!report.stages.empty()) {
            report.robust_gap_decreases += s.median_gap_robust < report.stages.back().median_gap_robust;
            report.oos_gap_decreases += s.median_gap_oos < report.stages.back().median_gap_oos;
        }
        report.stages.push_back(s);
        std::move(stage.begin(), stage.end(), std::back_inserter(report.records));
    }
    report.total_wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace detail

/// Monte-Carlo estimate of P[J(pi_hat, x) <= J_tilde(x) for all x] per sample size, with the
/// per-trial check that d(mu, mu_hat) <= eps implies the upper bound.
inline ExperimentReport coverage_experiment(const ExperimentConfig& config) {
    return detail::run_experiment(config, "coverage", {});
}

/// Median sup-norm gaps |J_tilde - J*| and |J(pi_hat) - J*| over a schedule of sample sizes.
inline ExperimentReport convergence_experiment(const ExperimentConfig& config) {
    return detail::run_experiment(config, "convergence", {});
}

/// Checks J(pi_hat) - J* <= J_tilde - J* <= 2 psi(eps) Delta on every trial with d(mu, mu_hat) <= eps.
inline ExperimentReport rate_experiment(const ExperimentConfig& config, const LipschitzProfile& profile) {
    detail::ExperimentSetup setup;
    setup.bound = detail::BoundKind::Rate;
    setup.delta = delta_constant(profile);
    setup.alpha = profile.alpha;
    return detail::run_experiment(config, "rate", setup);
}

/// Samples from `proxy` (overriding config.true_dist) and checks
/// J_true(pi_hat) - J*_true <= (2 psi(eps) + beta(true, proxy)) Delta / (1 - alpha)
/// on every trial with d(proxy, mu_hat) <= eps.
inline ExperimentReport ood_experiment(ExperimentConfig config, const Distribution& truth, const Distribution& proxy,
                                       const std::optional<LipschitzProfile>& profile = std::nullopt) {
    if (truth.size() != config.model.num_disturbances() || proxy.size() != config.model.num_disturbances())
        throw ValidationError("true and proxy distributions must match the model's disturbances");
    const LipschitzProfile p = profile ? *profile : lipschitz_estimate(config.model);
    config.true_dist = proxy;
    detail::ExperimentSetup setup;
    setup.bound = detail::BoundKind::OutOfDistribution;
    setup.eval_dist = truth;
    setup.delta = delta_constant(p);
    setup.alpha = p.alpha;
    setup.beta_gap = bounded_lipschitz(truth, proxy, config.model.w_metric());
    return detail::run_experiment(config, "ood", setup);
}

/**
 * Inventory control: stock x in {0..capacity}, order a in {0..capacity - x}, demand w from
 * `demands`; next stock max(x + a - w, 0) and cost
 *   order_cost a + holding_cost max(x + a - w, 0) + shortage_cost max(w - x - a, 0).
 * Metrics are |x - x'| on stock and |d - d'| on demand levels.
 */
inline MdpModel inventory_instance(std::size_t capacity, const std::vector<std::size_t>& demands, double order_cost,
                                   double holding_cost, double shortage_cost, double alpha) {
    if (capacity < 1) throw ValidationError("capacity must be positive");
    if (demands.empty()) throw ValidationError("at least one demand level is required");
    for (std::size_t i = 0; i < demands.size(); ++i)
        for (std::size_t j = i + 1; j < demands.size(); ++j)
            if (demands[i] == demands[j]) throw ValidationError("demand levels must be distinct");
    for (double c : {order_cost, holding_cost, shortage_cost})
        if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("costs must be nonnegative and finite");
    std::vector<std::string> states, actions, dist_labels;
    for (std::size_t x = 0; x <= capacity; ++x) {
        states.push_back(std::to_string(x));
        actions.push_back(std::to_string(x));
    }
    for (std::size_t d : demands) dist_labels.push_back(std::to_string(d));
    MdpModel m(states, actions, dist_labels, alpha);
    for (std::size_t x = 0; x <= capacity; ++x) {
        indvec adm(capacity - x + 1);
        std::iota(adm.begin(), adm.end(), std::size_t{0});
        m.set_admissible(x, adm);
        for (std::size_t a : adm)
            for (std::size_t w = 0; w < demands.size(); ++w) {
                const double level = static_cast<double>(x + a);
                const double d = static_cast<double>(demands[w]);
                const double left = std::max(level - d, 0.0);
                const double cost = order_cost * static_cast<double>(a) + holding_cost * left +
                                    shortage_cost * std::max(d - level, 0.0);
                m.set_transition(x, a, w, static_cast<std::size_t>(left), cost);
            }
    }
    numvec xs(capacity + 1), ds;
    std::iota(xs.begin(), xs.end(), 0.0);
    for (std::size_t d : demands) ds.push_back(static_cast<double>(d));
    m.set_x_metric(SquareMatrix::from_line(xs));
    m.set_w_metric(SquareMatrix::from_line(ds));
    require_valid(m);
    return m;
}

} // namespace drmdp
