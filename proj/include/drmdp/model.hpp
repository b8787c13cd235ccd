#pragma once

#include "drmdp/types.hpp"

#include <Eigen/Dense>

#include <optional>

namespace drmdp {

/// Sentinel for (x, a, w) entries outside the admissible set.
inline constexpr std::size_t kNoTransition = std::numeric_limits<std::size_t>::max();

/**
 * Finite MDP with disturbance-driven dynamics x' = F(x, a, w) and stage cost c(x, a, w).
 *
 * Tables are dense over (x, a, w); entries for inadmissible (x, a) pairs hold
 * kNoTransition and are ignored by every solver.
 */
class MdpModel {
public:
    MdpModel() = default;

    /// Allocates an empty model where every action is admissible and no transition is set yet.
    MdpModel(std::vector<std::string> states, std::vector<std::string> actions, std::vector<std::string> disturbances,
             double discount)
        : states_(std::move(states)), actions_(std::move(actions)), disturbances_(std::move(disturbances)),
          admissible_(states_.size()), w_metric_(SquareMatrix::discrete(disturbances_.size())),
          evolution_(states_.size() * actions_.size() * disturbances_.size(), kNoTransition),
          cost_(evolution_.size(), 0.0), discount_(discount) {
        for (auto& adm : admissible_) {
            adm.resize(actions_.size());
            std::iota(adm.begin(), adm.end(), std::size_t{0});
        }
    }

    std::size_t num_states() const noexcept { return states_.size(); }
    std::size_t num_actions() const noexcept { return actions_.size(); }
    std::size_t num_disturbances() const noexcept { return disturbances_.size(); }

    const std::vector<std::string>& states() const noexcept { return states_; }
    const std::vector<std::string>& actions() const noexcept { return actions_; }
    const std::vector<std::string>& disturbances() const noexcept { return disturbances_; }
    const indvec& admissible(std::size_t x) const { return admissible_.at(x); }
    const SquareMatrix& w_metric() const noexcept { return w_metric_; }
    const std::optional<SquareMatrix>& x_metric() const noexcept { return x_metric_; }
    double discount() const noexcept { return discount_; }

    bool is_admissible(std::size_t x, std::size_t a) const {
        const auto& adm = admissible_.at(x);
        return std::find(adm.begin(), adm.end(), a) != adm.end();
    }

    std::size_t next(std::size_t x, std::size_t a, std::size_t w) const { return evolution_[index(x, a, w)]; }
    double cost(std::size_t x, std::size_t a, std::size_t w) const { return cost_[index(x, a, w)]; }

    void set_admissible(std::size_t x, indvec actions) { admissible_.at(x) = std::move(actions); }
    void set_transition(std::size_t x, std::size_t a, std::size_t w, std::size_t next_state, double stage_cost) {
        evolution_.at(index(x, a, w)) = next_state;
        cost_.at(index(x, a, w)) = stage_cost;
    }
    void set_w_metric(SquareMatrix m) { w_metric_ = std::move(m); }
    void set_x_metric(std::optional<SquareMatrix> m) { x_metric_ = std::move(m); }
    void set_discount(double alpha) { discount_ = alpha; }

    /// Largest absolute stage cost over admissible entries.
    double cost_sup() const {
        double m = 0.0;
        for (std::size_t x = 0; x < num_states(); ++x)
            for (std::size_t a : admissible_[x])
                for (std::size_t w = 0; w < num_disturbances(); ++w) m = std::max(m, std::abs(cost(x, a, w)));
        return m;
    }

    std::size_t index(std::size_t x, std::size_t a, std::size_t w) const {
        return (x * actions_.size() + a) * disturbances_.size() + w;
    }

    bool operator==(const MdpModel&) const = default;

private:
    std::vector<std::string> states_, actions_, disturbances_;
    std::vector<indvec> admissible_;
    SquareMatrix w_metric_;
    std::optional<SquareMatrix> x_metric_;
    indvec evolution_;
    numvec cost_;
    double discount_ = 0.9;
};

struct ValueFunction {
    numvec values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t x) const { return values[x]; }
    bool operator==(const ValueFunction&) const = default;
};

/// Deterministic stationary policy: action index per state.
struct Policy {
    indvec action;

    std::size_t size() const noexcept { return action.size(); }
    std::size_t operator[](std::size_t x) const { return action[x]; }
    bool operator==(const Policy&) const = default;
};

/// Returns the first violated model invariant, or nothing when the model is valid.
inline std::optional<std::string> validate_model(const MdpModel& model) {
    const std::size_t nx = model.num_states(), na = model.num_actions(), nw = model.num_disturbances();
    if (nx == 0) return "model has no states";
    if (na == 0) return "model has no actions";
    if (nw == 0) return "model has no disturbances";
    if (!(model.discount() > 0.0 && model.discount() < 1.0)) return "discount outside (0,1)";
    for (std::size_t x = 0; x < nx; ++x) {
        const auto& adm = model.admissible(x);
        if (adm.empty()) return "empty action set at state " + std::to_string(x);
        for (std::size_t a : adm)
            if (a >= na) return "admissible action index out of range at state " + std::to_string(x);
        for (std::size_t a = 0; a < na; ++a) {
            const bool allowed = model.is_admissible(x, a);
            for (std::size_t w = 0; w < nw; ++w) {
                const std::size_t nxt = model.next(x, a, w);
                const std::string where =
                    "(" + std::to_string(x) + "," + std::to_string(a) + "," + std::to_string(w) + ")";
                if (!allowed) {
                    if (nxt != kNoTransition) return "transition defined for inadmissible entry " + where;
                    continue;
                }
                if (nxt == kNoTransition) return "missing transition for " + where;
                if (nxt >= nx) return "transition target out of range at " + where;
                const double c = model.cost(x, a, w);
                if (!std::isfinite(c)) return "non-finite cost at " + where;
                if (c < 0.0) return "negative cost at " + where;
            }
        }
    }
    if (model.w_metric().size() != nw) return "w_metric dimension does not match disturbances";
    if (auto err = metric_violation(model.w_metric()); !err.empty()) return "w_metric: " + err;
    if (model.x_metric()) {
        if (model.x_metric()->size() != nx) return "x_metric dimension does not match states";
        if (auto err = metric_violation(*model.x_metric()); !err.empty()) return "x_metric: " + err;
    }
    return std::nullopt;
}

/// Throws ValidationError with the first violation.
inline void require_valid(const MdpModel& model) {
    if (auto err = validate_model(model)) throw ValidationError(*err);
}

inline void check_policy(const MdpModel& model, const Policy& policy) {
    if (policy.size() != model.num_states()) throw ValidationError("policy size does not match the number of states");
    for (std::size_t x = 0; x < policy.size(); ++x)
        if (!model.is_admissible(x, policy[x]))
            throw ValidationError("policy action at state " + std::to_string(x) + " is not admissible");
}

namespace detail {

inline void check_dims(const MdpModel& model, const Distribution& dist, const ValueFunction& v) {
    if (dist.size() != model.num_disturbances())
        throw ValidationError("distribution support size " + std::to_string(dist.size()) +
                              " does not match disturbance count " + std::to_string(model.num_disturbances()));
    if (v.size() != model.num_states()) throw ValidationError("value function size does not match the number of states");
}

} // namespace detail

/// sum_w dist(w) [c(x,a,w) + alpha v(F(x,a,w))]. Shared by the classical and robust
/// operators so a singleton ambiguity set reproduces the classical result exactly.
inline double q_value(const MdpModel& model, std::span<const double> dist, const ValueFunction& v, std::size_t x,
                      std::size_t a) {
    const double alpha = model.discount();
    double s = 0.0;
    for (std::size_t w = 0; w < dist.size(); ++w) s += dist[w] * (model.cost(x, a, w) + alpha * v[model.next(x, a, w)]);
    return s;
}

/// Payoff vector g_w = c(x,a,w) + alpha v(F(x,a,w)).
inline numvec payoff(const MdpModel& model, const ValueFunction& v, std::size_t x, std::size_t a) {
    numvec g(model.num_disturbances());
    for (std::size_t w = 0; w < g.size(); ++w) g[w] = model.cost(x, a, w) + model.discount() * v[model.next(x, a, w)];
    return g;
}

/// Greedy policy w.r.t. `v` (lowest action index on ties) together with the Bellman image.
inline std::pair<ValueFunction, Policy> bellman_greedy(const MdpModel& model, const Distribution& dist,
                                                       const ValueFunction& v) {
    detail::check_dims(model, dist, v);
    ValueFunction out{numvec(model.num_states())};
    Policy pol{indvec(model.num_states())};
    for (std::size_t x = 0; x < model.num_states(); ++x) {
        double best = kInfinity;
        std::size_t best_a = model.admissible(x).front();
        for (std::size_t a : model.admissible(x)) {
            const double q = q_value(model, dist.mass(), v, x, a);
            if (q < best || (q == best && a < best_a)) {
                best = q;
                best_a = a;
            }
        }
        out.values[x] = best;
        pol.action[x] = best_a;
    }
    return {std::move(out), std::move(pol)};
}

/// Classical Bellman operator (min over admissible actions).
inline ValueFunction bellman_apply(const MdpModel& model, const Distribution& dist, const ValueFunction& v) {
    return bellman_greedy(model, dist, v).first;
}

enum class EvaluationMode { Iterative, Exact };

/// Value J(pi, .) of a stationary policy under `dist`.
///
/// Exact mode solves (I - alpha P_pi) J = c_pi with a pivoted LU factorization;
/// iterative mode applies the evaluation operator until
/// alpha/(1-alpha) ||v_{t+1} - v_t|| <= tol.
inline ValueFunction evaluate_policy(const MdpModel& model, const Distribution& dist, const Policy& policy,
                                     EvaluationMode mode = EvaluationMode::Exact, double tol = 1e-12) {
    check_policy(model, policy);
    const std::size_t nx = model.num_states();
    ValueFunction v{numvec(nx, 0.0)};
    detail::check_dims(model, dist, v);
    const double alpha = model.discount();
    if (mode == EvaluationMode::Exact) {
        Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(nx));
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nx));
        for (std::size_t x = 0; x < nx; ++x) {
            const std::size_t a = policy[x];
            for (std::size_t w = 0; w < model.num_disturbances(); ++w) {
                const auto row = static_cast<Eigen::Index>(x);
                lhs(row, static_cast<Eigen::Index>(model.next(x, a, w))) -= alpha * dist[w];
                rhs(row) += dist[w] * model.cost(x, a, w);
            }
        }
        const Eigen::VectorXd sol = lhs.partialPivLu().solve(rhs);
        if (!sol.allFinite()) throw SolverError("policy evaluation: linear solve failed");
        v.values.assign(sol.data(), sol.data() + nx);
        return v;
    }
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
    const double factor = alpha / (1.0 - alpha);
    for (std::size_t iter = 0; iter < 100'000'000; ++iter) {
        ValueFunction next{numvec(nx)};
        for (std::size_t x = 0; x < nx; ++x) next.values[x] = q_value(model, dist.mass(), v, x, policy[x]);
        const double diff = sup_distance(next.values, v.values);
        v = std::move(next);
        if (factor * diff <= tol) return v;
    }
    throw SolverError("policy evaluation did not converge");
}

struct SolveResult {
    ValueFunction value;
    Policy policy;
    std::size_t iterations = 0;
};

/// Value iteration from v = 0 with the contraction stopping rule; the returned value is
/// within `tol` of J* in sup-norm and the policy is greedy w.r.t. it.
inline SolveResult value_iterate(const MdpModel& model, const Distribution& dist, double tol) {
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
    const double factor = model.discount() / (1.0 - model.discount());
    ValueFunction v{numvec(model.num_states(), 0.0)};
    for (std::size_t iter = 1; iter < 100'000'000; ++iter) {
        ValueFunction next = bellman_apply(model, dist, v);
        const double diff = sup_distance(next.values, v.values);
        v = std::move(next);
        if (factor * diff <= tol) {
            auto [unused, pol] = bellman_greedy(model, dist, v);
            return {std::move(v), std::move(pol), iter};
        }
    }
    throw SolverError("value iteration did not converge");
}

} // namespace drmdp
