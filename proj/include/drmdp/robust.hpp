#pragma once

#include "drmdp/adversary.hpp"
#include "drmdp/model.hpp"

namespace drmdp {

namespace detail {

inline void check_spec_for_model(const MdpModel& model, const AmbiguitySpec& spec) {
    validate_spec(spec);
    if (spec.center.size() != model.num_disturbances())
        throw ValidationError("ambiguity center has " + std::to_string(spec.center.size()) + " atoms, model has " +
                              std::to_string(model.num_disturbances()) + " disturbances");
}

} // namespace detail

/// Worst-case expected cost of action `a` at state `x` against continuation value `v`.
inline double robust_q_value(const MdpModel& model, const AmbiguitySpec& spec, const ValueFunction& v, std::size_t x,
                             std::size_t a) {
    return worst_case_expectation(spec, payoff(model, v, x, a)).value;
}

/// Robust Bellman image and the robust-greedy policy (lowest action index on ties).
inline std::pair<ValueFunction, Policy> robust_bellman_greedy(const MdpModel& model, const AmbiguitySpec& spec,
                                                              const ValueFunction& v) {
    detail::check_spec_for_model(model, spec);
    if (v.size() != model.num_states()) throw ValidationError("value function size does not match the number of states");
    for (double value : v.values)
        if (!std::isfinite(value)) throw ValidationError("value function has a non-finite entry");
    ValueFunction out{numvec(model.num_states())};
    Policy pol{indvec(model.num_states())};
    for (std::size_t x = 0; x < model.num_states(); ++x) {
        double best = kInfinity;
        std::size_t best_a = model.admissible(x).front();
        for (std::size_t a : model.admissible(x)) {
            const double q = robust_q_value(model, spec, v, x, a);
            if (q < best) {
                best = q;
                best_a = a;
            }
        }
        out.values[x] = best;
        pol.action[x] = best_a;
    }
    return {std::move(out), std::move(pol)};
}

inline ValueFunction robust_bellman_apply(const MdpModel& model, const AmbiguitySpec& spec, const ValueFunction& v) {
    return robust_bellman_greedy(model, spec, v).first;
}

/// Robust value iteration from v = 0, stopping once alpha/(1-alpha) ||v_{t+1} - v_t|| <= tol.
inline SolveResult robust_value_iterate(const MdpModel& model, const AmbiguitySpec& spec, double tol) {
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
    const double factor = model.discount() / (1.0 - model.discount());
    ValueFunction v{numvec(model.num_states(), 0.0)};
    for (std::size_t iter = 1; iter < 100'000'000; ++iter) {
        ValueFunction next = robust_bellman_apply(model, spec, v);
        const double diff = sup_distance(next.values, v.values);
        v = std::move(next);
        if (factor * diff <= tol) {
            auto [unused, pol] = robust_bellman_greedy(model, spec, v);
            return {std::move(v), std::move(pol), iter};
        }
    }
    throw SolverError("robust value iteration did not converge");
}

struct OptimalityCheck {
    bool ok = false;
    double violation = 0.0;
};

/// Checks value(x) = sup over the ball of E[c(x, pi(x), w) + alpha value(F(x, pi(x), w))] and
/// that pi(x) attains the robust minimum, reporting the largest deviation over states.
inline OptimalityCheck verify_robust_optimal(const MdpModel& model, const AmbiguitySpec& spec, const Policy& policy,
                                             const ValueFunction& value, double tol) {
    check_policy(model, policy);
    const ValueFunction image = robust_bellman_apply(model, spec, value);
    double worst = 0.0;
    for (std::size_t x = 0; x < model.num_states(); ++x) {
        const double q = robust_q_value(model, spec, value, x, policy[x]);
        worst = std::max({worst, std::abs(value[x] - q), q - image[x]});
    }
    return {worst <= tol, worst};
}

} // namespace drmdp
