#pragma once

#include "drmdp/types.hpp"

#include <cassert>

/// Small dense two-phase simplex solver.
///
/// Problems arising here are tiny (transport plans and Lipschitz-function LPs
/// over at most a few dozen atoms), so a dense tableau is adequate. Pricing is
/// Dantzig's rule with a switch to Bland's rule after a run of degenerate
/// pivots, which guarantees termination on the highly degenerate transport
/// polytopes.
namespace drmdp::lp {

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Constraint {
    numvec coeffs;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
};

/// maximize objective' x  subject to constraints, x >= 0.
struct Problem {
    std::size_t num_vars = 0;
    numvec objective;
    std::vector<Constraint> constraints;

    explicit Problem(std::size_t n = 0) : num_vars(n), objective(n, 0.0) {}

    Constraint& add(Sense sense, double rhs) {
        constraints.push_back(Constraint{numvec(num_vars, 0.0), sense, rhs});
        return constraints.back();
    }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
    Status status = Status::Infeasible;
    double value = 0.0;
    numvec x;
};

namespace detail {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_((rows + 2) * (cols + 1), 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols_); }
    double rhs(std::size_t r) const { return at(r, cols_); }

    void pivot(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / at(pr, pc);
        for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) *= inv;
        at(pr, pc) = 1.0;
        for (std::size_t r = 0; r < rows_ + 2; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
            at(r, pc) = 0.0;
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

private:
    std::size_t rows_, cols_;
    numvec data_;
};

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;

// Optimizes the objective stored in row `obj_row` (reduced costs; negative entries improve).
inline Status run(Tableau& t, indvec& basis, std::size_t obj_row, std::size_t allowed_cols) {
    const std::size_t m = t.rows();
    std::size_t degenerate_run = 0;
    const std::size_t max_iter = 50000 + 50 * (m + t.cols());
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        const bool bland = degenerate_run > 50;
        std::size_t enter = allowed_cols;
        double best = -kCostTol;
        for (std::size_t c = 0; c < allowed_cols; ++c) {
            const double rc = t.at(obj_row, c);
            if (rc < -kCostTol) {
                if (bland) {
                    enter = c;
                    break;
                }
                if (rc < best) {
                    best = rc;
                    enter = c;
                }
            }
        }
        if (enter == allowed_cols) return Status::Optimal;

        std::size_t leave = m;
        double ratio = kInfinity;
        for (std::size_t r = 0; r < m; ++r) {
            const double a = t.at(r, enter);
            if (a > kPivotTol) {
                const double q = t.rhs(r) / a;
                if (q < ratio - 1e-14 || (std::abs(q - ratio) <= 1e-14 && leave < m && basis[r] < basis[leave])) {
                    ratio = q;
                    leave = r;
                }
            }
        }
        if (leave == m) return Status::Unbounded;
        degenerate_run = (ratio <= 1e-14) ? degenerate_run + 1 : 0;
        t.pivot(leave, enter);
        basis[leave] = enter;
    }
    return Status::IterationLimit;
}

} // namespace detail

/// Solves `problem` (maximization, nonnegative variables) by the two-phase method.
inline Solution maximize(const Problem& problem) {
    const std::size_t n = problem.num_vars;
    const std::size_t m = problem.constraints.size();
    assert(problem.objective.size() == n);

    // Normalize rows to nonnegative right-hand sides.
    std::vector<Constraint> rows = problem.constraints;
    std::size_t num_slack = 0, num_art = 0;
    for (auto& row : rows) {
        if (row.coeffs.size() != n) throw ValidationError("LP constraint has wrong width");
        if (row.rhs < 0.0) {
            for (auto& v : row.coeffs) v = -v;
            row.rhs = -row.rhs;
            if (row.sense == Sense::LessEqual)
                row.sense = Sense::GreaterEqual;
            else if (row.sense == Sense::GreaterEqual)
                row.sense = Sense::LessEqual;
        }
        if (row.sense != Sense::Equal) ++num_slack;
        if (row.sense != Sense::LessEqual) ++num_art;
    }

    const std::size_t art_begin = n + num_slack;
    const std::size_t cols = art_begin + num_art;
    detail::Tableau t(m, cols);
    indvec basis(m, 0);
    const std::size_t phase2 = m, phase1 = m + 1;

    std::size_t slack = n, art = art_begin;
    for (std::size_t r = 0; r < m; ++r) {
        const auto& row = rows[r];
        for (std::size_t c = 0; c < n; ++c) t.at(r, c) = row.coeffs[c];
        t.rhs(r) = row.rhs;
        if (row.sense == Sense::LessEqual) {
            t.at(r, slack) = 1.0;
            basis[r] = slack++;
        } else {
            if (row.sense == Sense::GreaterEqual) t.at(r, slack++) = -1.0;
            t.at(r, art) = 1.0;
            basis[r] = art++;
        }
    }
    for (std::size_t c = 0; c < n; ++c) t.at(phase2, c) = -problem.objective[c];
    // Phase-one objective: maximize -sum(artificials), expressed in nonbasic terms.
    for (std::size_t r = 0; r < m; ++r) {
        if (basis[r] < art_begin) continue;
        for (std::size_t c = 0; c <= cols; ++c)
            if (c < art_begin || c == cols) t.at(phase1, c) -= t.at(r, c);
    }

    Solution sol;
    if (num_art > 0) {
        const Status s1 = detail::run(t, basis, phase1, cols);
        if (s1 == Status::IterationLimit) {
            sol.status = s1;
            return sol;
        }
        double scale = 1.0;
        for (const auto& row : rows) scale = std::max(scale, std::abs(row.rhs));
        if (-t.rhs(phase1) > 1e-9 * scale) {
            sol.status = Status::Infeasible;
            return sol;
        }
        // Drive remaining (zero-level) artificials out of the basis.
        for (std::size_t r = 0; r < m; ++r) {
            if (basis[r] < art_begin) continue;
            for (std::size_t c = 0; c < art_begin; ++c) {
                if (std::abs(t.at(r, c)) > 1e-9) {
                    t.pivot(r, c);
                    basis[r] = c;
                    break;
                }
            }
        }
    }

    const Status s2 = detail::run(t, basis, phase2, art_begin);
    sol.status = s2;
    if (s2 != Status::Optimal) return sol;
    sol.x.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        if (basis[r] < n) sol.x[basis[r]] = std::max(0.0, t.rhs(r));
    sol.value = dot(problem.objective, sol.x);
    return sol;
}

inline const char* to_string(Status s) {
    switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration limit";
    }
    return "unknown";
}

/// Like `maximize`, but throws SolverError unless an optimum is found.
inline Solution maximize_or_throw(const Problem& problem, const char* what) {
    Solution s = maximize(problem);
    if (s.status != Status::Optimal)
        throw SolverError(std::string(what) + ": linear program " + to_string(s.status));
    return s;
}

} // namespace drmdp::lp
