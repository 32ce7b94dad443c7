#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ibstokes/errors.hpp"
#include "ibstokes/geometry.hpp"
#include "ibstokes/kernel.hpp"

namespace ibstokes {

/// Closed or open curve X(theta) with a force density F(theta) per unit of
/// the parameter, plus the partition count used to discretize it.
struct ImmersedBoundary {
    double theta_begin = 0.0;
    double theta_end = 0.0;
    int segments = 0;  // number of parameter intervals M
    std::function<Vec2(double)> X;
    std::function<Vec2(double)> F;
    std::function<Vec2(double)> dX;   // analytic derivative; may be empty
    std::vector<double> sample_nodes; // non-empty when built from sampled data
};

/// Circle of radius 1/2 about the origin under the tension force
/// F = kappa * X''(theta) = -(kappa/2)(cos theta, sin theta); the default
/// tension gives F(theta) = -(cos theta, sin theta).
inline ImmersedBoundary circle_boundary(int segments, double kappa = 2.0) {
    ImmersedBoundary ib;
    ib.theta_begin = 0.0;
    ib.theta_end = 2.0 * M_PI;
    ib.segments = segments;
    ib.X = [](double t) { return Vec2{0.5 * std::cos(t), 0.5 * std::sin(t)}; };
    ib.F = [kappa](double t) {
        return Vec2{-0.5 * kappa * std::cos(t), -0.5 * kappa * std::sin(t)};
    };
    ib.dX = [](double t) { return Vec2{-0.5 * std::sin(t), 0.5 * std::cos(t)}; };
    return ib;
}

namespace detail {

/// Piecewise-linear lookup that returns stored values bitwise at the nodes.
inline Vec2 interp_samples(const std::vector<double>& nodes,
                           const std::vector<Vec2>& values, double t) {
    if (t <= nodes.front()) return values.front();
    if (t >= nodes.back()) return values.back();
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - nodes.begin());
    if (nodes[k - 1] == t) return values[k - 1];
    const double w = (t - nodes[k - 1]) / (nodes[k] - nodes[k - 1]);
    return values[k - 1] + w * (values[k] - values[k - 1]);
}

}  // namespace detail

/// Boundary from sampled data; the samples become the partition nodes as-is.
inline ImmersedBoundary sampled_boundary(std::vector<double> nodes,
                                         std::vector<Vec2> positions,
                                         std::vector<Vec2> forces) {
    if (nodes.size() < 2 || nodes.size() != positions.size() ||
        nodes.size() != forces.size())
        throw Error("sampled boundary needs matching node, position and force arrays");
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!(nodes[i] > nodes[i - 1]))
            throw Error("sampled boundary nodes must be strictly increasing");
    }
    ImmersedBoundary ib;
    ib.theta_begin = nodes.front();
    ib.theta_end = nodes.back();
    ib.segments = static_cast<int>(nodes.size()) - 1;
    ib.sample_nodes = nodes;
    ib.X = [nodes, positions](double t) { return detail::interp_samples(nodes, positions, t); };
    ib.F = [nodes, forces](double t) { return detail::interp_samples(nodes, forces, t); };
    return ib;
}

/// |X'(theta)|, from the analytic derivative when available and otherwise by
/// a central difference with step (theta_end - theta_begin) * 1e-6, one-sided
/// near the parameter interval's ends.
inline double jacobian(const ImmersedBoundary& ib, double theta) {
    double j;
    if (ib.dX) {
        j = ib.dX(theta).norm();
    } else {
        const double step = (ib.theta_end - ib.theta_begin) * 1e-6;
        const double lo = std::max(ib.theta_begin, theta - step);
        const double hi = std::min(ib.theta_end, theta + step);
        j = (ib.X(hi) - ib.X(lo)).norm() / (hi - lo);
    }
    if (j < 1e-12) throw DegenerateParametrization("parametrization has |X'| < 1e-12");
    return j;
}

/// Midpoint-rule partition of [theta_0, theta_M]: one weight per node,
/// zeta_i = theta_{i+1/2} - theta_{i-1/2} with the half nodes clamped to the
/// interval's ends, so the weights always sum to the parameter span.
struct MidpointPartition {
    std::vector<double> nodes;
    std::vector<double> weights;
    double zeta_max = 0.0;

    int segments() const { return static_cast<int>(nodes.size()) - 1; }
    double span() const { return nodes.back() - nodes.front(); }
};

inline MidpointPartition midpoint_partition_from_nodes(std::vector<double> nodes) {
    if (nodes.size() < 2) throw Error("partition needs at least two nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!(nodes[i] > nodes[i - 1]))
            throw Error("partition nodes must be strictly increasing");
    }
    MidpointPartition part;
    part.weights.resize(nodes.size());
    const std::size_t m = nodes.size() - 1;
    part.weights[0] = 0.5 * (nodes[1] - nodes[0]);
    for (std::size_t i = 1; i < m; ++i)
        part.weights[i] = 0.5 * (nodes[i + 1] - nodes[i - 1]);
    part.weights[m] = 0.5 * (nodes[m] - nodes[m - 1]);
    part.nodes = std::move(nodes);
    part.zeta_max = *std::max_element(part.weights.begin(), part.weights.end());
    return part;
}

inline MidpointPartition build_midpoint_partition(double theta_begin, double theta_end,
                                                  int segments) {
    if (segments < 1) throw Error("partition needs at least one segment");
    if (!(theta_end > theta_begin)) throw Error("partition interval is empty");
    const double span = theta_end - theta_begin;
    MidpointPartition part;
    part.nodes.resize(segments + 1);
    part.weights.resize(segments + 1);
    for (int i = 0; i <= segments; ++i)
        part.nodes[i] = theta_begin + span * i / segments;
    part.nodes[segments] = theta_end;
    const double interior = span / segments;
    part.weights.assign(segments + 1, interior);
    part.weights[0] = 0.5 * interior;
    part.weights[segments] = 0.5 * interior;
    part.zeta_max = interior;
    return part;
}

/// Partition implied by the boundary itself: its samples when present, else
/// the uniform partition with ib.segments intervals.
inline MidpointPartition build_midpoint_partition(const ImmersedBoundary& ib) {
    if (!ib.sample_nodes.empty()) return midpoint_partition_from_nodes(ib.sample_nodes);
    return build_midpoint_partition(ib.theta_begin, ib.theta_end, ib.segments);
}

/// Checks |X'| at every partition node; throws DegenerateParametrization.
inline void validate_parametrization(const ImmersedBoundary& ib) {
    const MidpointPartition part = build_midpoint_partition(ib);
    for (double t : part.nodes) jacobian(ib, t);
}

/// Requires every partition node to keep more than the kernel's support
/// radius of clearance from the box boundary; otherwise the regularized
/// force would leak outside the domain.
inline double validate_separation(const ImmersedBoundary& ib, const AxisBox& box,
                                  const DeltaKernel& kernel) {
    const MidpointPartition part = build_midpoint_partition(ib);
    double min_dist = std::numeric_limits<double>::infinity();
    for (double t : part.nodes)
        min_dist = std::min(min_dist, box.distance_to_boundary(ib.X(t)));
    const double required = kernel.support_radius();
    if (!(min_dist > required)) throw BoundaryTooClose(min_dist, required);
    return min_dist;
}

/// Spreads the Lagrangian force onto Eulerian points:
///   f(x) = sum_i F(theta_i) delta_eps(x - X(theta_i)) zeta_i.
/// Nodes are binned into a uniform grid of cell size equal to the kernel's
/// box half-width, so an evaluation only visits the 3x3 neighborhood of x's
/// bin.  Skipped nodes lie outside the kernel support box and contribute an
/// exact zero, hence the pruned sum is bitwise equal to the full one.
class ForceSpreader {
public:
    ForceSpreader(const ImmersedBoundary& ib, const MidpointPartition& part,
                  DeltaKernel kernel)
        : kernel_(std::move(kernel)), bin_size_(kernel_.box_halfwidth()) {
        const std::size_t m = part.nodes.size();
        positions_.reserve(m);
        coefficients_.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            positions_.push_back(ib.X(part.nodes[i]));
            coefficients_.push_back(part.weights[i] * ib.F(part.nodes[i]));
            bins_[bin_key(positions_.back())].push_back(static_cast<int>(i));
        }
    }

    const DeltaKernel& kernel() const { return kernel_; }
    std::size_t num_nodes() const { return positions_.size(); }

    Vec2 operator()(const Vec2& x) const {
        const auto [bx, by] = bin_coords(x);
        std::vector<int> candidates;
        candidates.reserve(32);
        for (std::int64_t i = bx - 1; i <= bx + 1; ++i) {
            for (std::int64_t j = by - 1; j <= by + 1; ++j) {
                const auto it = bins_.find(pack(i, j));
                if (it == bins_.end()) continue;
                candidates.insert(candidates.end(), it->second.begin(), it->second.end());
            }
        }
        // node order keeps the accumulation identical to full_sum
        std::sort(candidates.begin(), candidates.end());
        Vec2 sum{0.0, 0.0};
        for (int i : candidates) sum += kernel_.evaluate(x - positions_[i]) * coefficients_[i];
        return sum;
    }

    /// Unpruned reference sum over every node, in node order.
    Vec2 full_sum(const Vec2& x) const {
        Vec2 sum{0.0, 0.0};
        for (std::size_t i = 0; i < positions_.size(); ++i)
            sum += kernel_.evaluate(x - positions_[i]) * coefficients_[i];
        return sum;
    }

private:
    static std::uint64_t pack(std::int64_t i, std::int64_t j) {
        const auto u = static_cast<std::uint64_t>(static_cast<std::uint32_t>(i));
        const auto v = static_cast<std::uint64_t>(static_cast<std::uint32_t>(j));
        return (u << 32) | v;
    }

    std::pair<std::int64_t, std::int64_t> bin_coords(const Vec2& p) const {
        return {static_cast<std::int64_t>(std::floor(p.x / bin_size_)),
                static_cast<std::int64_t>(std::floor(p.y / bin_size_))};
    }

    std::uint64_t bin_key(const Vec2& p) const {
        const auto [i, j] = bin_coords(p);
        return pack(i, j);
    }

    DeltaKernel kernel_;
    double bin_size_;
    std::vector<Vec2> positions_;
    std::vector<Vec2> coefficients_;
    std::unordered_map<std::uint64_t, std::vector<int>> bins_;
};

/// One-off spreading without the spatial index; used as a reference path.
inline Vec2 spread_force(const ImmersedBoundary& ib, const MidpointPartition& part,
                         const DeltaKernel& kernel, const Vec2& x) {
    Vec2 sum{0.0, 0.0};
    for (std::size_t i = 0; i < part.nodes.size(); ++i) {
        const Vec2 coef = part.weights[i] * ib.F(part.nodes[i]);
        sum += kernel.evaluate(x - ib.X(part.nodes[i])) * coef;
    }
    return sum;
}

}  // namespace ibstokes
