#pragma once

#include <stdexcept>
#include <string>

namespace ibstokes {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Query point lies outside the closure of the computational domain.
struct PointOutsideDomain : Error {
    using Error::Error;
};

/// |X'(theta)| vanished (below tolerance) at a partition node.
struct DegenerateParametrization : Error {
    using Error::Error;
};

/// The immersed boundary is closer to the domain boundary than the kernel
/// support radius, so the regularized force would leak out of the domain.
struct BoundaryTooClose : Error {
    double min_distance;
    double required_radius;
    BoundaryTooClose(double min_distance_, double required_radius_)
        : Error("immersed boundary too close to domain boundary: dist=" +
                std::to_string(min_distance_) +
                " < required kernel radius=" + std::to_string(required_radius_)),
          min_distance(min_distance_),
          required_radius(required_radius_) {}
};

struct SolverBreakdown : Error {
    int iterations;
    double residual;
    SolverBreakdown(const std::string& what_, int iterations_, double residual_)
        : Error(what_ + " (iterations=" + std::to_string(iterations_) +
                ", residual=" + std::to_string(residual_) + ")"),
          iterations(iterations_),
          residual(residual_) {}
};

struct ConfigError : Error {
    using Error::Error;
};

struct IndexOutOfRange : Error {
    using Error::Error;
};

/// Convergence-rate input levels whose mesh sizes do not halve row to row.
struct NonHalvingLevels : Error {
    using Error::Error;
};

}  // namespace ibstokes
