#pragma once

// Finite time scales, their two-dimensional products and grid functions with
// forward (delta) differences.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsnet/error.hpp"

namespace tsnet {

/// Points closer than this are treated as duplicates.
inline constexpr double kDuplicateTolerance = 1e-12;

/// Steps below this are reported as approximating a dense region.
inline constexpr double kDenseEpsilon = 1e-3;

struct Jump {
    double sigma;
    double graininess;
};

/// A finite, strictly increasing set of reals.
///
/// The forward jump at the largest point returns the point itself with zero
/// graininess; delta derivatives are undefined there.
class TimeScale {
public:
    /// Validates an explicit point list: at least two points, strictly increasing
    /// with gaps larger than the duplicate tolerance.
    explicit TimeScale(std::vector<double> points, std::string label = "explicit")
        : points_(std::move(points)), label_(std::move(label)) {
        if (points_.size() < 2) {
            throw ConstructionError("time scale needs at least two points, got " +
                                    std::to_string(points_.size()));
        }
        for (std::size_t k = 0; k < points_.size(); ++k) {
            if (!std::isfinite(points_[k])) {
                throw ConstructionError("time scale point " + std::to_string(k) + " is not finite");
            }
            if (k > 0 && !(points_[k] - points_[k - 1] > kDuplicateTolerance)) {
                throw ConstructionError("time scale points must be strictly increasing (index " +
                                        std::to_string(k) + ")");
            }
        }
    }

    /// n points t0, t0 + step, ..., t0 + (n-1) step.
    static TimeScale uniform(double t0, double step, std::size_t n) {
        if (n < 2) throw ConstructionError("uniform: n must be >= 2");
        if (!(step > 0.0)) throw ConstructionError("uniform: step must be positive");
        std::vector<double> pts(n);
        for (std::size_t k = 0; k < n; ++k) pts[k] = t0 + static_cast<double>(k) * step;
        return TimeScale(std::move(pts), "uniform");
    }

    /// n equally spaced points covering [a, b], endpoints included.
    static TimeScale interval(double a, double b, std::size_t n) {
        if (n < 2) throw ConstructionError("interval: n must be >= 2");
        if (!(a < b)) throw ConstructionError("interval: degenerate interval, need a < b");
        std::vector<double> pts(n);
        const double h = (b - a) / static_cast<double>(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) pts[k] = a + static_cast<double>(k) * h;
        pts.back() = b;
        return TimeScale(std::move(pts), "interval");
    }

    /// Endpoints of the middle-thirds construction on [a, b] after `level`
    /// removals: 2^(level+1) points.
    static TimeScale cantor(int level, double a, double b) {
        if (level < 0) throw ConstructionError("cantor: level must be >= 0");
        if (level > 24) throw ConstructionError("cantor: level too large");
        if (!(a < b)) throw ConstructionError("cantor: degenerate interval, need a < b");
        std::vector<std::pair<double, double>> segments{{a, b}};
        for (int l = 0; l < level; ++l) {
            std::vector<std::pair<double, double>> next;
            next.reserve(2 * segments.size());
            for (auto [lo, hi] : segments) {
                const double third = (hi - lo) / 3.0;
                next.emplace_back(lo, lo + third);
                next.emplace_back(hi - third, hi);
            }
            segments = std::move(next);
        }
        std::vector<double> pts;
        pts.reserve(2 * segments.size());
        for (auto [lo, hi] : segments) {
            pts.push_back(lo);
            pts.push_back(hi);
        }
        return TimeScale(std::move(pts), "cantor");
    }

    /// Sorted union; points within the duplicate tolerance are merged.
    static TimeScale merge(std::span<const TimeScale> parts) {
        if (parts.empty()) throw ConstructionError("union: no input time scales");
        std::vector<double> all;
        for (const auto& ts : parts) all.insert(all.end(), ts.points_.begin(), ts.points_.end());
        std::ranges::sort(all);
        std::vector<double> pts;
        pts.reserve(all.size());
        for (double t : all) {
            if (pts.empty() || t - pts.back() > kDuplicateTolerance) pts.push_back(t);
        }
        return TimeScale(std::move(pts), "union");
    }

    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    std::span<const double> points() const { return points_; }
    const std::string& label() const { return label_; }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }

    Jump jump(std::size_t i) const {
        check_index(i);
        if (i + 1 == points_.size()) return {points_[i], 0.0};
        return {points_[i + 1], points_[i + 1] - points_[i]};
    }

    double sigma(std::size_t i) const { return jump(i).sigma; }
    double graininess(std::size_t i) const { return jump(i).graininess; }

    /// Backward jump; the smallest point maps to itself.
    double rho(std::size_t i) const {
        check_index(i);
        return i == 0 ? points_[0] : points_[i - 1];
    }

    bool has_successor(std::size_t i) const { return i + 1 < points_.size(); }

    /// Reporting only: a step shorter than dense_epsilon stands in for a dense region.
    bool is_dense_step(std::size_t i, double dense_epsilon = kDenseEpsilon) const {
        return has_successor(i) && graininess(i) < dense_epsilon;
    }

    std::size_t dense_step_count(double dense_epsilon = kDenseEpsilon) const {
        std::size_t count = 0;
        for (std::size_t i = 0; i + 1 < points_.size(); ++i) count += is_dense_step(i, dense_epsilon);
        return count;
    }

    friend bool operator==(const TimeScale& a, const TimeScale& b) { return a.points_ == b.points_; }

private:
    void check_index(std::size_t i) const {
        if (i >= points_.size()) {
            throw DomainError("time scale index " + std::to_string(i) + " out of range (size " +
                              std::to_string(points_.size()) + ")");
        }
    }

    std::vector<double> points_;
    std::string label_;
};

inline void check_direction(int direction) {
    if (direction != 1 && direction != 2) {
        throw DomainError("direction must be 1 or 2, got " + std::to_string(direction));
    }
}

/// Product T1 x T2 of two time scales.
class GridDomain {
public:
    GridDomain(TimeScale t1, TimeScale t2) : t1_(std::move(t1)), t2_(std::move(t2)) {}

    const TimeScale& t1() const { return t1_; }
    const TimeScale& t2() const { return t2_; }
    const TimeScale& axis(int direction) const {
        check_direction(direction);
        return direction == 1 ? t1_ : t2_;
    }

    std::size_t n1() const { return t1_.size(); }
    std::size_t n2() const { return t2_.size(); }
    std::size_t node_count() const { return n1() * n2(); }

    bool contains(std::size_t i, std::size_t j) const { return i < n1() && j < n2(); }

    /// Graininess in the given direction (1 or 2) at node (i, j).
    double graininess(int direction, std::size_t i, std::size_t j) const {
        check_direction(direction);
        return direction == 1 ? t1_.graininess(i) : t2_.graininess(j);
    }

    /// True when node (i, j) has a forward neighbour in the given direction.
    bool has_successor(int direction, std::size_t i, std::size_t j) const {
        check_direction(direction);
        return direction == 1 ? t1_.has_successor(i) : t2_.has_successor(j);
    }

    friend bool operator==(const GridDomain& a, const GridDomain& b) {
        return a.t1_ == b.t1_ && a.t2_ == b.t2_;
    }

private:
    TimeScale t1_;
    TimeScale t2_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

inline DomainPtr make_domain(TimeScale t1, TimeScale t2) {
    return std::make_shared<const GridDomain>(std::move(t1), std::move(t2));
}

/// Values of type V at every node of a grid domain, indexed (i, j).
template <typename V>
class GridFunction {
public:
    using value_type = V;

    GridFunction() = default;
    explicit GridFunction(DomainPtr domain, const V& fill = V{})
        : domain_(std::move(domain)), values_(domain_ ? domain_->node_count() : 0, fill) {
        if (!domain_) throw DomainError("grid function needs a domain");
    }

    /// Samples f(t1, t2) at every node.
    template <typename F>
    static GridFunction sample(DomainPtr domain, F&& f) {
        GridFunction out(std::move(domain));
        const auto& d = *out.domain_;
        for (std::size_t i = 0; i < d.n1(); ++i)
            for (std::size_t j = 0; j < d.n2(); ++j) out(i, j) = f(d.t1()[i], d.t2()[j]);
        return out;
    }

    const GridDomain& domain() const { return *domain_; }
    const DomainPtr& domain_ptr() const { return domain_; }
    std::size_t n1() const { return domain_->n1(); }
    std::size_t n2() const { return domain_->n2(); }

    V& operator()(std::size_t i, std::size_t j) { return values_[i * domain_->n2() + j]; }
    const V& operator()(std::size_t i, std::size_t j) const { return values_[i * domain_->n2() + j]; }

    V& at(std::size_t i, std::size_t j) {
        check(i, j);
        return (*this)(i, j);
    }
    const V& at(std::size_t i, std::size_t j) const {
        check(i, j);
        return (*this)(i, j);
    }

    /// Value at the forward neighbour sigma_j(node); the node itself on the trailing boundary.
    const V& shifted(int direction, std::size_t i, std::size_t j) const {
        if (direction == 1) return (*this)(std::min(i + 1, n1() - 1), j);
        return (*this)(i, std::min(j + 1, n2() - 1));
    }

    std::span<const V> values() const { return values_; }
    std::span<V> values() { return values_; }

private:
    void check(std::size_t i, std::size_t j) const {
        if (!domain_->contains(i, j)) {
            throw DomainError("node (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") outside the grid");
        }
    }

    DomainPtr domain_;
    std::vector<V> values_;
};

/// Forward difference (f(sigma_j node) - f(node)) / eps_j at a node with a successor.
template <typename V>
V delta_at(const GridFunction<V>& f, int direction, std::size_t i, std::size_t j) {
    check_direction(direction);
    const auto& d = f.domain();
    if (!d.has_successor(direction, i, j)) {
        throw DomainError("delta derivative undefined on the trailing boundary");
    }
    const double eps = d.graininess(direction, i, j);
    if (!(eps > 0.0)) throw NumericalError("zero graininess at an interior node");
    return (f.shifted(direction, i, j) - f(i, j)) / eps;
}

/// Partial delta derivative in direction 1 or 2; nullopt on the trailing boundary.
template <typename V>
GridFunction<std::optional<V>> delta_derivative(const GridFunction<V>& f, int direction) {
    check_direction(direction);
    GridFunction<std::optional<V>> out(f.domain_ptr(), std::nullopt);
    const auto& d = f.domain();
    for (std::size_t i = 0; i < d.n1(); ++i)
        for (std::size_t j = 0; j < d.n2(); ++j)
            if (d.has_successor(direction, i, j)) out(i, j) = delta_at(f, direction, i, j);
    return out;
}

namespace detail {

inline double magnitude(double v) { return std::abs(v); }

template <typename V>
auto magnitude(const V& v) -> decltype(v.op_norm()) {
    return v.op_norm();
}

template <typename V>
auto magnitude(const V& v) -> decltype(v.norm()) {
    return v.norm();
}

template <typename V>
auto magnitude(const V& v) -> decltype(norm(v)) {
    return norm(v);
}

}  // namespace detail

/// max over nodes (i < n1-1, j < n2-1) of |D1 D2 f - D2 D1 f|.
template <typename V>
double mixed_delta_commutator(const GridFunction<V>& f) {
    const auto& d = f.domain();
    if (d.n1() < 2 || d.n2() < 2) {
        throw DomainError("mixed_delta_commutator needs at least a 2x2 grid");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < d.n1(); ++i) {
        for (std::size_t j = 0; j + 1 < d.n2(); ++j) {
            const double e1 = d.graininess(1, i, j);
            const double e2 = d.graininess(2, i, j);
            // D1 (D2 f) and D2 (D1 f), each built from first differences.
            const V d2_here = (f(i, j + 1) - f(i, j)) / e2;
            const V d2_next = (f(i + 1, j + 1) - f(i + 1, j)) / e2;
            const V d1_here = (f(i + 1, j) - f(i, j)) / e1;
            const V d1_next = (f(i + 1, j + 1) - f(i, j + 1)) / e1;
            const V d12 = (d2_next - d2_here) / e1;
            const V d21 = (d1_next - d1_here) / e2;
            worst = std::max(worst, detail::magnitude(d12 - d21));
        }
    }
    return worst;
}

}  // namespace tsnet
