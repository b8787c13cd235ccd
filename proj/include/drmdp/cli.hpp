#pragma once

#include "drmdp/empirical.hpp"
#include "drmdp/io.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace drmdp {

namespace cli {

struct Options {
    std::string model_path;
    std::string out;
    std::uint64_t seed = 0;
    double tol = 1e-10;

    std::string distance = "tv";
    double epsilon = 0.0;
    numvec center, payoff, p, q, points, dist, true_dist, proxy_dist;
    std::vector<std::string> policy;
    std::string eval_mode = "exact";

    std::size_t samples = 50;
    std::vector<std::size_t> schedule;
    std::size_t trials = 100;
    std::size_t calibration_trials = 1000;
    double gamma = 0.1;
    std::string radius_mode;
    double c1 = 2.0, c2 = 1.0, tail_a = 3.0;
    int dim_m = 3;
    unsigned threads = 0;

    double delta = 1.0;
    double beta_gap = 0.0;
    double lc = -1.0, lf = -1.0, c_sup = -1.0, alpha = -1.0;

    std::size_t max_n = 12;
    bool enumerate = false;

    std::size_t capacity = 4;
    std::vector<std::size_t> demands{0, 1, 2, 3};
    double order_cost = 1.0, holding_cost = 0.5, shortage_cost = 3.0, discount = 0.9;
};

inline std::string join(std::span<const double> v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
    return s;
}

class Runner {
public:
    Runner(const Options& o, std::ostream& out, CLI::App& app) : o_(o), out_(out), app_(app) {}

    bool given(const char* sub, const char* flag) const { return app_.get_subcommand(sub)->count(flag) > 0; }

    ModelDocument model_doc() const {
        if (o_.model_path.empty()) throw ValidationError("--model is required");
        return load_model_document(o_.model_path);
    }

    Distribution law(const numvec& flag_value, const ModelDocument* doc, const char* flag) const {
        if (!flag_value.empty()) return Distribution(flag_value);
        if (doc && doc->true_dist) return *doc->true_dist;
        throw ValidationError(std::string("no disturbance distribution: pass ") + flag + " or add true_dist to the model");
    }

    std::optional<SquareMatrix> metric(const ModelDocument* doc) const {
        if (doc) return doc->model.w_metric();
        if (!o_.points.empty()) return SquareMatrix::from_line(o_.points);
        return std::nullopt;
    }

    ConcentrationParams params() const { return {o_.dim_m, o_.tail_a, o_.c1, o_.c2}; }

    void print_solution(const MdpModel& m, const SolveResult& r) {
        out_ << "iterations " << r.iterations << "\n";
        out_ << "state,value,action\n";
        for (std::size_t x = 0; x < m.num_states(); ++x)
            out_ << m.states()[x] << "," << format_number(r.value[x]) << "," << m.actions()[r.policy[x]] << "\n";
        if (!o_.out.empty()) {
            json doc = {{"values", r.value.values}, {"iterations", r.iterations}};
            json pol = json::array();
            for (std::size_t a : r.policy.action) pol.push_back(m.actions()[a]);
            doc["policy"] = pol;
            write_text(o_.out, doc.dump(2) + "\n");
        }
    }

    int solve() {
        const auto doc = model_doc();
        const Distribution d = law(o_.dist, &doc, "--dist");
        print_solution(doc.model, value_iterate(doc.model, d, o_.tol));
        return 0;
    }

    AmbiguitySpec spec_for(const ModelDocument& doc, const Distribution& center) const {
        AmbiguitySpec s{parse_distance_kind(o_.distance), center, o_.epsilon, std::nullopt};
        if (requires_metric(s.kind)) s.metric = doc.model.w_metric();
        return s;
    }

    int robust_solve() {
        const auto doc = model_doc();
        const AmbiguitySpec s = spec_for(doc, law(o_.center, &doc, "--center"));
        print_solution(doc.model, robust_value_iterate(doc.model, s, o_.tol));
        return 0;
    }

    int evaluate() {
        const auto doc = model_doc();
        const MdpModel& m = doc.model;
        const Distribution d = law(o_.dist, &doc, "--dist");
        if (o_.policy.size() != m.num_states())
            throw ValidationError("--policy needs one action label per state (" + std::to_string(m.num_states()) + ")");
        Policy pol{indvec(m.num_states())};
        for (std::size_t x = 0; x < m.num_states(); ++x) {
            auto it = std::find(m.actions().begin(), m.actions().end(), o_.policy[x]);
            if (it == m.actions().end()) throw ValidationError("unknown action label '" + o_.policy[x] + "'");
            pol.action[x] = static_cast<std::size_t>(it - m.actions().begin());
        }
        if (o_.eval_mode != "exact" && o_.eval_mode != "iterative")
            throw ValidationError("--mode must be exact or iterative");
        const auto mode = o_.eval_mode == "exact" ? EvaluationMode::Exact : EvaluationMode::Iterative;
        const ValueFunction v = evaluate_policy(m, d, pol, mode, o_.tol);
        out_ << "state,value\n";
        for (std::size_t x = 0; x < m.num_states(); ++x) out_ << m.states()[x] << "," << format_number(v[x]) << "\n";
        return 0;
    }

    int distance_cmd() {
        std::optional<ModelDocument> doc;
        if (!o_.model_path.empty()) doc = model_doc();
        const DistanceKind kind = parse_distance_kind(o_.distance);
        const auto m = metric(doc ? &*doc : nullptr);
        const double d =
            distance(kind, Distribution(o_.p), Distribution(o_.q), requires_metric(kind) && m ? &*m : nullptr);
        out_ << "distance " << format_number(d) << "\n";
        return 0;
    }

    int worst_case_cmd() {
        std::optional<ModelDocument> doc;
        if (!o_.model_path.empty()) doc = model_doc();
        AmbiguitySpec s{parse_distance_kind(o_.distance), Distribution(o_.center), o_.epsilon, std::nullopt};
        if (requires_metric(s.kind)) s.metric = metric(doc ? &*doc : nullptr);
        const WorstCase wc = worst_case_expectation(s, o_.payoff);
        out_ << "value " << format_number(wc.value) << "\n";
        out_ << "witness " << join(wc.witness.mass()) << "\n";
        return 0;
    }

    int radius() {
        const DistanceKind kind = parse_distance_kind(o_.distance);
        const std::string mode = o_.radius_mode.empty() ? "formula" : o_.radius_mode;
        double eps;
        if (parse_radius_mode(mode) == RadiusMode::Formula) {
            eps = formula_radius(kind, o_.samples, o_.gamma, params());
        } else if (parse_radius_mode(mode) == RadiusMode::Calibrated) {
            if (!given("radius", "--seed")) throw ValidationError("calibrated radii require --seed");
            std::optional<ModelDocument> doc;
            if (!o_.model_path.empty()) doc = model_doc();
            const Distribution truth = law(o_.true_dist, doc ? &*doc : nullptr, "--true-dist");
            const auto m = metric(doc ? &*doc : nullptr);
            eps = calibrate_radius_mc(kind, truth, o_.samples, o_.gamma, o_.calibration_trials, o_.seed,
                                      m ? &*m : nullptr);
        } else {
            eps = o_.epsilon;
        }
        out_ << "epsilon " << format_number(eps) << "\n";
        return 0;
    }

    int guarantees() {
        LipschitzProfile prof;
        if (!o_.model_path.empty()) prof = lipschitz_estimate(model_doc().model);
        if (o_.lc >= 0.0) prof.L_c = o_.lc;
        if (o_.lf >= 0.0) prof.L_F = o_.lf;
        if (o_.c_sup >= 0.0) prof.c_sup = o_.c_sup;
        if (o_.alpha >= 0.0) prof.alpha = o_.alpha;
        const DistanceKind kind =
            given("guarantees", "--distance") ? parse_distance_kind(o_.distance) : DistanceKind::Wasserstein;
        const double delta_c = delta_constant(prof);
        const RadiusWindow w = radius_window(o_.delta, o_.gamma, o_.samples, prof, params(), kind);
        out_ << "L_c " << format_number(prof.L_c) << "\n";
        out_ << "L_F " << format_number(prof.L_F) << "\n";
        out_ << "c_sup " << format_number(prof.c_sup) << "\n";
        out_ << "alpha " << format_number(prof.alpha) << "\n";
        out_ << "Delta " << format_number(delta_c) << "\n";
        out_ << "eps_lb " << format_number(w.lower) << "\n";
        out_ << "eps_ub " << format_number(w.upper) << "\n";
        out_ << "window_nonempty " << (w.nonempty() ? 1 : 0) << "\n";
        out_ << "sample_complexity " << sample_complexity(o_.delta, o_.gamma, prof, params()) << "\n";
        if (given("guarantees", "--epsilon")) {
            const OodBound b = ood_bound(kind, o_.epsilon, o_.beta_gap, prof);
            out_ << "rate_bound " << format_number(rate_bound(kind, o_.epsilon, delta_c)) << "\n";
            out_ << "ood_bound " << format_number(b.total) << "\n";
            out_ << "ood_statistical " << format_number(b.statistical) << "\n";
            out_ << "ood_nonstatistical " << format_number(b.nonstatistical) << "\n";
        }
        return 0;
    }

    ExperimentConfig experiment_config(const char* sub, const ModelDocument& doc) const {
        if (!given(sub, "--seed")) throw ValidationError("experiments require --seed");
        ExperimentConfig c;
        c.model = doc.model;
        c.kind = parse_distance_kind(o_.distance);
        c.radius_mode = parse_radius_mode(o_.radius_mode.empty() ? "calibrated" : o_.radius_mode);
        c.epsilon = o_.epsilon;
        c.params = params();
        c.sample_sizes = o_.schedule.empty() ? std::vector<std::size_t>{o_.samples} : o_.schedule;
        c.trials = o_.trials;
        c.gamma = o_.gamma;
        c.calibration_trials = o_.calibration_trials;
        c.seed = o_.seed;
        c.tol = o_.tol;
        c.threads = o_.threads;
        return c;
    }

    int report(const ExperimentReport& r) {
        out_ << "experiment " << r.experiment << "\n";
        out_ << "N,epsilon,coverage,premise_rate,median_gap_robust,median_gap_oos,implication_violations,"
                "bound_violations\n";
        for (const auto& s : r.stages)
            out_ << s.n << "," << format_number(s.epsilon) << "," << format_number(s.coverage) << ","
                 << format_number(s.premise_rate) << "," << format_number(s.median_gap_robust) << ","
                 << format_number(s.median_gap_oos) << "," << s.implication_violations << "," << s.bound_violations
                 << "\n";
        out_ << "implication_violations " << r.implication_violations << "\n";
        if (r.delta) out_ << "Delta " << format_number(*r.delta) << "\n";
        if (r.beta_gap) out_ << "beta_gap " << format_number(*r.beta_gap) << "\n";
        if (r.experiment == "rate" || r.experiment == "ood") out_ << "bound_violations " << r.bound_violations << "\n";
        if (!o_.out.empty()) write_report(o_.out, r);
        return 0;
    }

    int experiment(const char* sub) {
        const auto doc = model_doc();
        ExperimentConfig c = experiment_config(sub, doc);
        const std::string name = sub;
        if (name == "ood") {
            const Distribution proxy = law(o_.proxy_dist, &doc, "--proxy-dist");
            if (o_.true_dist.empty()) throw ValidationError("ood requires --true-dist");
            c.true_dist = proxy;
            return report(ood_experiment(c, Distribution(o_.true_dist), proxy));
        }
        c.true_dist = law(o_.true_dist, &doc, "--true-dist");
        if (name == "coverage") return report(coverage_experiment(c));
        if (name == "convergence") return report(convergence_experiment(c));
        return report(rate_experiment(c, lipschitz_estimate(c.model)));
    }

    int counterexample() {
        if (o_.max_n < 1 || o_.max_n > kMaxExactSampleSize)
            throw ValidationError("--max-n must lie in [1, " + std::to_string(kMaxExactSampleSize) + "]");
        out_ << "N,numerator,denominator,probability" << (o_.enumerate ? ",enumerated" : "") << "\n";
        for (std::size_t n = 1; n <= o_.max_n; ++n) {
            const Rational r = counterexample_coverage_exact(n);
            out_ << n << "," << r.num << "," << r.den << "," << format_number(r.value());
            if (o_.enumerate) out_ << "," << (n <= 20 ? counterexample_coverage_enumerated(n).probability.str() : "");
            out_ << "\n";
        }
        return 0;
    }

    int generate_inventory() {
        const MdpModel m = inventory_instance(o_.capacity, o_.demands, o_.order_cost, o_.holding_cost,
                                              o_.shortage_cost, o_.discount);
        std::optional<Distribution> d;
        if (!o_.true_dist.empty()) d = Distribution(o_.true_dist);
        const std::string text = model_to_json(m, d).dump(2) + "\n";
        if (o_.out.empty())
            out_ << text;
        else
            write_text(o_.out, text);
        return 0;
    }

private:
    const Options& o_;
    std::ostream& out_;
    CLI::App& app_;
};

} // namespace cli

/// Command-line entry point. Exit codes: 0 success, 1 invalid input or usage, 2 solver failure.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    cli::Options o;
    CLI::App app{"Distance-based robust MDPs on finite spaces", "drmdp"};
    app.require_subcommand(1);

    auto global = [&](CLI::App* s) {
        s->add_option("--model", o.model_path, "Model file (JSON)");
        s->add_option("--out", o.out, "Output path (experiments: prefix for .json and .csv)");
        s->add_option("--seed", o.seed, "Random seed");
        s->add_option("--tol", o.tol, "Solver tolerance")->check(CLI::PositiveNumber);
        s->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    };
    auto dist_flags = [&](CLI::App* s) {
        s->add_option("--distance", o.distance, "tv, hellinger, kl, chi2, wasserstein, bl or prokhorov");
        s->add_option("--epsilon", o.epsilon, "Ambiguity radius");
    };
    auto conc_flags = [&](CLI::App* s) {
        s->add_option("--c1", o.c1, "Concentration constant c1");
        s->add_option("--c2", o.c2, "Concentration constant c2");
        s->add_option("--dim-m", o.dim_m, "Disturbance dimension m");
        s->add_option("--tail-a", o.tail_a, "Light-tail exponent a");
    };
    auto exp_flags = [&](CLI::App* s) {
        global(s);
        dist_flags(s);
        conc_flags(s);
        s->add_option("--samples", o.samples, "Sample size N");
        s->add_option("--trials", o.trials, "Trials per sample size");
        s->add_option("--gamma", o.gamma, "Confidence parameter");
        s->add_option("--radius-mode", o.radius_mode, "fixed, formula or calibrated");
        s->add_option("--calibration-trials", o.calibration_trials, "Resamplings for calibrated radii");
        s->add_option("--true-dist", o.true_dist, "Disturbance law")->delimiter(',');
    };
    auto list = [](CLI::App* s, const char* name, numvec& v, const char* help) {
        return s->add_option(name, v, help)->delimiter(',');
    };

    auto* solve = app.add_subcommand("solve", "Value iteration on the nominal MDP");
    global(solve);
    list(solve, "--dist", o.dist, "Disturbance law (default: model true_dist)");

    auto* rsolve = app.add_subcommand("robust-solve", "Robust value iteration");
    global(rsolve);
    dist_flags(rsolve);
    list(rsolve, "--center", o.center, "Ball center (default: model true_dist)");

    auto* eval = app.add_subcommand("evaluate", "Evaluate a stationary policy");
    global(eval);
    list(eval, "--dist", o.dist, "Disturbance law (default: model true_dist)");
    eval->add_option("--policy", o.policy, "Action label per state")->delimiter(',')->required();
    eval->add_option("--mode", o.eval_mode, "exact or iterative");

    auto* dist = app.add_subcommand("distance", "Distance between two distributions");
    global(dist);
    dist_flags(dist);
    list(dist, "--p", o.p, "First distribution")->required();
    list(dist, "--q", o.q, "Reference distribution")->required();
    list(dist, "--points", o.points, "Support points on the line (metric |x - y|)");

    auto* wc = app.add_subcommand("worst-case", "Worst-case expectation over a ball");
    global(wc);
    dist_flags(wc);
    list(wc, "--center", o.center, "Ball center")->required();
    list(wc, "--payoff", o.payoff, "Payoff vector")->required();
    list(wc, "--points", o.points, "Support points on the line (metric |x - y|)");

    auto* rad = app.add_subcommand("radius", "Ambiguity radius");
    global(rad);
    dist_flags(rad);
    conc_flags(rad);
    rad->add_option("--samples", o.samples, "Sample size N");
    rad->add_option("--gamma", o.gamma, "Confidence parameter");
    rad->add_option("--radius-mode", o.radius_mode, "formula (default), calibrated or fixed");
    rad->add_option("--trials", o.calibration_trials, "Resamplings for calibrated radii");
    list(rad, "--true-dist", o.true_dist, "Disturbance law for calibration");
    list(rad, "--points", o.points, "Support points on the line (metric |x - y|)");

    auto* guar = app.add_subcommand("guarantees", "Delta constant, radius window, sample complexity, bounds");
    global(guar);
    dist_flags(guar);
    conc_flags(guar);
    guar->add_option("--samples", o.samples, "Sample size N for the radius window");
    guar->add_option("--gamma", o.gamma, "Confidence parameter");
    guar->add_option("--delta", o.delta, "Target suboptimality");
    guar->add_option("--beta-gap", o.beta_gap, "Bounded-Lipschitz distance between true and proxy laws");
    guar->add_option("--lc", o.lc, "Lipschitz constant of the cost");
    guar->add_option("--lf", o.lf, "Lipschitz constant of the dynamics");
    guar->add_option("--c-sup", o.c_sup, "Sup-norm of the cost");
    guar->add_option("--alpha", o.alpha, "Discount factor");

    std::vector<std::pair<const char*, CLI::App*>> experiments;
    for (const char* name : {"coverage", "convergence", "rate", "ood"}) {
        auto* s = app.add_subcommand(name, std::string("Monte-Carlo ") + name + " experiment");
        exp_flags(s);
        experiments.emplace_back(name, s);
    }
    experiments[1].second->add_option("--schedule", o.schedule, "Sample sizes")->delimiter(',');
    list(experiments[3].second, "--proxy-dist", o.proxy_dist, "Sampling law (default: model true_dist)");

    auto* cx = app.add_subcommand("counterexample", "Exact coverage probabilities of the empirical MDP policy");
    cx->add_option("--max-n", o.max_n, "Largest sample size");
    cx->add_flag("--enumerate", o.enumerate, "Add exhaustive enumeration for N <= 20");

    auto* inv = app.add_subcommand("generate-inventory", "Write an inventory-control model");
    global(inv);
    inv->add_option("--capacity", o.capacity, "Storage capacity");
    inv->add_option("--demands", o.demands, "Demand levels")->delimiter(',');
    inv->add_option("--order-cost", o.order_cost, "Cost per unit ordered");
    inv->add_option("--holding-cost", o.holding_cost, "Cost per unit held");
    inv->add_option("--shortage-cost", o.shortage_cost, "Cost per unit short");
    inv->add_option("--discount", o.discount, "Discount factor");
    list(inv, "--true-dist", o.true_dist, "Demand law stored in the file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 1;
    }

    cli::Runner r(o, out, app);
    try {
        if (solve->parsed()) return r.solve();
        if (rsolve->parsed()) return r.robust_solve();
        if (eval->parsed()) return r.evaluate();
        if (dist->parsed()) return r.distance_cmd();
        if (wc->parsed()) return r.worst_case_cmd();
        if (rad->parsed()) return r.radius();
        if (guar->parsed()) return r.guarantees();
        for (auto& [name, sub] : experiments)
            if (sub->parsed()) return r.experiment(name);
        if (cx->parsed()) return r.counterexample();
        if (inv->parsed()) return r.generate_inventory();
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "solver failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    std::vector<const char*> argv{"drmdp"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace drmdp
