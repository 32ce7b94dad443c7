#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "ibstokes/errors.hpp"
#include "ibstokes/geometry.hpp"
#include "ibstokes/mesh.hpp"
#include "ibstokes/stokes.hpp"

namespace ibstokes {

struct FieldSample {
    Vec2 u;
    Mat2 grad_u;  // grad_u.m[i][j] = du_i/dx_j
    double p = 0.0;
};

/// Evaluates the discrete fields on a known cell at barycentric coordinates.
inline FieldSample eval_on_cell(const DiscreteSolution& sol, int cell,
                                const std::array<double, 3>& lambda) {
    const FemSpaces& spaces = *sol.spaces;
    const auto gl = spaces.mesh().barycentric_gradients(cell);
    const auto vals = detail::scalar_basis_values(lambda);
    const auto grads = detail::scalar_basis_gradients(gl, lambda);
    FieldSample s{};
    for (int i = 0; i < 2; ++i) {
        double ui = 0.0;
        Vec2 gi{};
        for (int a = 0; a < 4; ++a) {
            const double coef = sol.velocity[detail::local_to_global(spaces, i, cell, a)];
            ui += coef * vals[a];
            gi += coef * grads[a];
        }
        (i == 0 ? s.u.x : s.u.y) = ui;
        s.grad_u.m[i][0] = gi.x;
        s.grad_u.m[i][1] = gi.y;
    }
    const auto& tri = spaces.mesh().cell(cell);
    for (int t = 0; t < 3; ++t) s.p += sol.pressure[tri[t]] * lambda[t];
    return s;
}

inline FieldSample eval_solution(const DiscreteSolution& sol, const Vec2& x) {
    const LocatedPoint loc = sol.spaces->mesh().locate_point(x);
    return eval_on_cell(sol, loc.cell, loc.lambda);
}

inline double eval_pressure(const DiscreteSolution& sol, const Vec2& x) {
    const LocatedPoint loc = sol.spaces->mesh().locate_point(x);
    const auto& tri = sol.spaces->mesh().cell(loc.cell);
    double p = 0.0;
    for (int t = 0; t < 3; ++t) p += sol.pressure[tri[t]] * loc.lambda[t];
    return p;
}

/// Closed-form solution of the default experiment on a box centered at the
/// origin: a constant outer force g is the gradient of g.x, and the circle's
/// normal force (tension kappa) is balanced by a pressure jump equal to
/// kappa, so u = 0 and p = g.x + jump*[|x| < R] minus the mean.
struct AnalyticSolution {
    double interface_radius = 0.5;
    double jump = 2.0;
    Vec2 g{1.0, 0.0};
    double domain_area = 4.0;

    double mean_shift() const {
        return jump * M_PI * interface_radius * interface_radius / domain_area;
    }
    Vec2 velocity(const Vec2&) const { return {0.0, 0.0}; }
    Mat2 velocity_gradient(const Vec2&) const { return {}; }
    double pressure(const Vec2& x) const {
        double p = x.dot(g) - mean_shift();
        if (x.norm() < interface_radius) p += jump;
        return p;
    }
};

struct ReferenceSolution {
    enum class Kind { analytic, fine_mesh };
    Kind kind = Kind::analytic;
    AnalyticSolution analytic;
    const DiscreteSolution* fine = nullptr;  // non-owning; must outlive use
};

inline ReferenceSolution analytic_reference() { return {}; }

inline ReferenceSolution fine_mesh_reference(const DiscreteSolution& fine) {
    ReferenceSolution ref;
    ref.kind = ReferenceSolution::Kind::fine_mesh;
    ref.fine = &fine;
    return ref;
}

/// One error measurement: L^r of the velocity, full W^{1,r} of the velocity
/// and L^r of the pressure.
struct ErrorTriple {
    double velocity_Lr = 0.0;
    double velocity_W1r = 0.0;
    double pressure_Lr = 0.0;
};

namespace detail {

struct ErrorSums {
    double u = 0.0, grad = 0.0, p = 0.0;
};

/// |u|^r with the Euclidean norm pointwise; gradients use Frobenius.
inline void accumulate_error(std::vector<ErrorSums>& sums, const std::vector<double>& rs,
                             const Vec2& du, const Mat2& dg, double dp, double w) {
    const double nu = du.norm();
    const double ng = dg.frobenius();
    const double np = std::abs(dp);
    for (std::size_t k = 0; k < rs.size(); ++k) {
        const double r = rs[k];
        sums[k].u += w * std::pow(nu, r);
        sums[k].grad += w * std::pow(ng, r);
        sums[k].p += w * std::pow(np, r);
    }
}

template <class SamplePoint>
void integrate_triangle_recursive(const std::array<Vec2, 3>& tri, int depth,
                                  const QuadratureRule& rule, SamplePoint&& sample) {
    if (depth == 0) {
        const double area =
            0.5 * std::abs(cross(tri[1] - tri[0], tri[2] - tri[0]));
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto& l = rule.points[q];
            const Vec2 x = l[0] * tri[0] + l[1] * tri[1] + l[2] * tri[2];
            sample(x, rule.weights[q] * area);
        }
        return;
    }
    const Vec2 m01 = 0.5 * (tri[0] + tri[1]);
    const Vec2 m12 = 0.5 * (tri[1] + tri[2]);
    const Vec2 m20 = 0.5 * (tri[2] + tri[0]);
    integrate_triangle_recursive({tri[0], m01, m20}, depth - 1, rule, sample);
    integrate_triangle_recursive({m01, tri[1], m12}, depth - 1, rule, sample);
    integrate_triangle_recursive({m20, m12, tri[2]}, depth - 1, rule, sample);
    integrate_triangle_recursive({m01, m12, m20}, depth - 1, rule, sample);
}

}  // namespace detail

/// Errors in several norms at once, sharing the field evaluations.
///
/// Against a fine-mesh reference the integration runs over the finer of the
/// two meshes.  Against the analytic reference it runs over the solution
/// mesh, sub-dividing cells near the pressure interface twice before
/// applying the rule, since the exact pressure is discontinuous there.
inline std::vector<ErrorTriple> error_norms_multi(const DiscreteSolution& sol,
                                                  const ReferenceSolution& ref,
                                                  const std::vector<double>& r_list,
                                                  int quad_order = 6) {
    if (quad_order < 4) throw Error("error quadrature order must be at least 4");
    for (double r : r_list)
        if (!(r >= 1.0)) throw Error("norm order must be >= 1");
    const QuadratureRule& rule = triangle_rule(quad_order);
    std::vector<detail::ErrorSums> sums(r_list.size());

    if (ref.kind == ReferenceSolution::Kind::fine_mesh) {
        const DiscreteSolution* local = ref.fine;
        const DiscreteSolution* other = &sol;
        if (sol.spaces->num_cells() > local->spaces->num_cells()) std::swap(local, other);
        const TriangleMesh& mesh = local->spaces->mesh();
        for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
            const auto p = mesh.cell_vertices(c);
            const double area = mesh.cell_area(c);
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const auto& l = rule.points[q];
                const Vec2 x = l[0] * p[0] + l[1] * p[1] + l[2] * p[2];
                const FieldSample a = eval_on_cell(*local, c, l);
                const FieldSample b = eval_solution(*other, x);
                detail::accumulate_error(sums, r_list, a.u - b.u, a.grad_u - b.grad_u,
                                         a.p - b.p, rule.weights[q] * area);
            }
        }
    } else {
        const TriangleMesh& mesh = sol.spaces->mesh();
        const double h = mesh.mesh_size();
        const double lo = ref.analytic.interface_radius - 3.0 * h;
        const double hi = ref.analytic.interface_radius + 3.0 * h;
        for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
            const auto p = mesh.cell_vertices(c);
            double dmin = p[0].norm(), dmax = dmin;
            for (int t = 1; t < 3; ++t) {
                dmin = std::min(dmin, p[t].norm());
                dmax = std::max(dmax, p[t].norm());
            }
            const bool near = dmin - h <= hi && dmax + h >= lo;
            detail::integrate_triangle_recursive(
                p, near ? 2 : 0, rule, [&](const Vec2& x, double w) {
                    const FieldSample s = eval_solution(sol, x);
                    detail::accumulate_error(sums, r_list, s.u,
                                             s.grad_u,
                                             s.p - ref.analytic.pressure(x), w);
                });
        }
    }

    std::vector<ErrorTriple> out(r_list.size());
    for (std::size_t k = 0; k < r_list.size(); ++k) {
        const double r = r_list[k];
        out[k].velocity_Lr = std::pow(sums[k].u, 1.0 / r);
        out[k].velocity_W1r = std::pow(sums[k].u + sums[k].grad, 1.0 / r);
        out[k].pressure_Lr = std::pow(sums[k].p, 1.0 / r);
    }
    return out;
}

inline ErrorTriple error_norms(const DiscreteSolution& sol, const ReferenceSolution& ref,
                               double r, int quad_order = 6) {
    return error_norms_multi(sol, ref, {r}, quad_order)[0];
}

/// Per-level errors with the rate against the previous (twice-coarser) level.
struct ConvergenceRow {
    double h = 0.0;
    ErrorTriple errors;
    std::array<double, 3> rho{};  // NaN where undefined (first row, zero error)
    bool has_rho = false;
};

struct ConvergenceReport {
    double r = 2.0;
    std::vector<ConvergenceRow> rows;
};

/// rho = log2(E_{2h} / E_h) between consecutive rows; h must halve exactly
/// between rows (1e-9 relative slack).
inline ConvergenceReport convergence_rates(
    double r, const std::vector<std::pair<double, ErrorTriple>>& levels) {
    ConvergenceReport report;
    report.r = r;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < levels.size(); ++k) {
        ConvergenceRow row;
        row.h = levels[k].first;
        row.errors = levels[k].second;
        row.rho = {nan, nan, nan};
        if (k > 0) {
            const double ratio = levels[k - 1].first / levels[k].first;
            if (std::abs(ratio - 2.0) > 2e-9)
                throw NonHalvingLevels("level mesh sizes must halve between rows");
            const ErrorTriple& prev = levels[k - 1].second;
            const auto rate = [](double coarse, double fine) {
                return (coarse > 0.0 && fine > 0.0)
                           ? std::log2(coarse / fine)
                           : std::numeric_limits<double>::quiet_NaN();
            };
            row.rho = {rate(prev.velocity_Lr, row.errors.velocity_Lr),
                       rate(prev.velocity_W1r, row.errors.velocity_W1r),
                       rate(prev.pressure_Lr, row.errors.pressure_Lr)};
            row.has_rho = true;
        }
        report.rows.push_back(row);
    }
    return report;
}

/// Difference of the angular averages of the discrete pressure on two
/// circles centered at the origin.  The smooth pressure part x_1 averages to
/// zero on centered circles, so this isolates the interface jump.
inline double pressure_jump_probe(const DiscreteSolution& sol, double r_in = 0.35,
                                  double r_out = 0.65, int samples = 360) {
    if (samples < 1) throw Error("jump probe needs at least one sample");
    double inner = 0.0, outer = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = 2.0 * M_PI * k / samples;
        const Vec2 dir{std::cos(t), std::sin(t)};
        inner += eval_pressure(sol, r_in * dir);
        outer += eval_pressure(sol, r_out * dir);
    }
    return (inner - outer) / samples;
}

}  // namespace ibstokes
