#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace drmdp {

using numvec = std::vector<double>;
using indvec = std::vector<std::size_t>;

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Thrown when inputs violate a documented precondition or model invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine fails to produce an answer.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major square matrix, used for metrics on finite spaces.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    /// Builds from nested rows; every row must have the same length as the outer list.
    static SquareMatrix from_rows(const std::vector<numvec>& rows) {
        SquareMatrix m(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size())
                throw ValidationError("matrix row " + std::to_string(i) + " has length " +
                                      std::to_string(rows[i].size()) + ", expected " +
                                      std::to_string(rows.size()));
            std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * m.n_);
        }
        return m;
    }

    /// Discrete metric: 1 off the diagonal.
    static SquareMatrix discrete(std::size_t n) {
        SquareMatrix m(n, 1.0);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 0.0;
        return m;
    }

    /// Metric |p_i - p_j| induced by points on the real line.
    static SquareMatrix from_line(std::span<const double> points) {
        SquareMatrix m(points.size());
        for (std::size_t i = 0; i < points.size(); ++i)
            for (std::size_t j = 0; j < points.size(); ++j) m(i, j) = std::abs(points[i] - points[j]);
        return m;
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

    std::vector<numvec> rows() const {
        std::vector<numvec> out(n_);
        for (std::size_t i = 0; i < n_; ++i)
            out[i].assign(data_.begin() + i * n_, data_.begin() + (i + 1) * n_);
        return out;
    }

    bool operator==(const SquareMatrix&) const = default;

private:
    std::size_t n_ = 0;
    numvec data_;
};

/// Returns an error description when `m` is not a (pseudo)metric, empty otherwise.
inline std::string metric_violation(const SquareMatrix& m, double tol = 1e-12) {
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (m(i, i) != 0.0) return "metric has nonzero diagonal at " + std::to_string(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(m(i, j)) || m(i, j) < 0.0)
                return "metric entry (" + std::to_string(i) + "," + std::to_string(j) +
                       ") is negative or not finite";
            if (m(i, j) != m(j, i))
                return "asymmetric metric at (" + std::to_string(i) + "," + std::to_string(j) + ")";
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                if (m(i, k) > m(i, j) + m(j, k) + tol)
                    return "metric violates the triangle inequality at (" + std::to_string(i) + "," +
                           std::to_string(j) + "," + std::to_string(k) + ")";
    return {};
}

/// Probability vector over a finite support.
class Distribution {
public:
    Distribution() = default;

    /// Validates nonnegativity and unit mass (within 1e-9), then renormalizes.
    explicit Distribution(numvec mass) : mass_(std::move(mass)) {
        if (mass_.empty()) throw ValidationError("distribution over an empty support");
        double total = 0.0;
        for (std::size_t i = 0; i < mass_.size(); ++i) {
            if (!std::isfinite(mass_[i]) || mass_[i] < 0.0)
                throw ValidationError("distribution entry " + std::to_string(i) + " is negative or not finite");
            total += mass_[i];
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw ValidationError("distribution mass sums to " + std::to_string(total) + ", expected 1");
        for (auto& m : mass_) m /= total;
    }

    static Distribution point_mass(std::size_t n, std::size_t at) {
        numvec m(n, 0.0);
        m.at(at) = 1.0;
        return Distribution(std::move(m));
    }

    static Distribution uniform(std::size_t n) { return Distribution(numvec(n, 1.0 / static_cast<double>(n))); }

    std::size_t size() const noexcept { return mass_.size(); }
    double operator[](std::size_t i) const { return mass_[i]; }
    const numvec& mass() const noexcept { return mass_; }
    auto begin() const noexcept { return mass_.begin(); }
    auto end() const noexcept { return mass_.end(); }

    bool operator==(const Distribution&) const = default;

private:
    numvec mass_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sup_norm(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace drmdp
