#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ibstokes/errors.hpp"
#include "ibstokes/geometry.hpp"
#include "ibstokes/mesh.hpp"
#include "ibstokes/saddle_solver.hpp"
#include "ibstokes/sparse.hpp"

namespace ibstokes {

/// Velocity/pressure spaces of the P1-bubble / P1 pair: each velocity
/// component has one dof per vertex plus one cubic bubble dof per cell and
/// vanishes on the domain boundary; pressure is continuous P1.
class FemSpaces {
public:
    explicit FemSpaces(const TriangleMesh& mesh)
        : mesh_(&mesh),
          nv_(static_cast<int>(mesh.num_vertices())),
          nc_(static_cast<int>(mesh.num_cells())) {
        free_index_.assign(num_velocity_dofs(), -1);
        for (int dof = 0; dof < num_velocity_dofs(); ++dof) {
            if (!velocity_dof_constrained(dof)) {
                free_index_[dof] = static_cast<int>(free_dofs_.size());
                free_dofs_.push_back(dof);
            }
        }
    }

    const TriangleMesh& mesh() const { return *mesh_; }
    int num_vertices() const { return nv_; }
    int num_cells() const { return nc_; }

    /// dofs per velocity component
    int velocity_stride() const { return nv_ + nc_; }
    int num_velocity_dofs() const { return 2 * (nv_ + nc_); }
    int num_pressure_dofs() const { return nv_; }

    int vertex_dof(int component, int vertex) const {
        return component * velocity_stride() + vertex;
    }
    int bubble_dof(int component, int cell) const {
        return component * velocity_stride() + nv_ + cell;
    }

    /// Boundary-vertex velocity dofs carry the homogeneous Dirichlet
    /// condition; bubbles are interior by construction.
    bool velocity_dof_constrained(int dof) const {
        const int local = dof % velocity_stride();
        return local < nv_ && mesh_->vertex_on_boundary(local);
    }

    int num_free_velocity_dofs() const { return static_cast<int>(free_dofs_.size()); }
    int free_index(int dof) const { return free_index_[dof]; }
    const std::vector<int>& free_dofs() const { return free_dofs_; }

private:
    const TriangleMesh* mesh_;
    int nv_, nc_;
    std::vector<int> free_index_;
    std::vector<int> free_dofs_;
};

namespace detail {

/// Scalar basis on one cell: three vertex hats and the centroid-normalized
/// bubble 27*l0*l1*l2, evaluated at a barycentric point.
inline std::array<double, 4> scalar_basis_values(const std::array<double, 3>& l) {
    return {l[0], l[1], l[2], 27.0 * l[0] * l[1] * l[2]};
}

inline std::array<Vec2, 4> scalar_basis_gradients(const std::array<Vec2, 3>& gl,
                                                  const std::array<double, 3>& l) {
    return {gl[0], gl[1], gl[2],
            27.0 * (l[1] * l[2] * gl[0] + l[0] * l[2] * gl[1] + l[0] * l[1] * gl[2])};
}

/// Global scalar dof for local index a (0..2 vertices, 3 bubble).
inline int local_to_global(const FemSpaces& spaces, int component, int cell, int a) {
    if (a < 3) return spaces.vertex_dof(component, spaces.mesh().cell(cell)[a]);
    return spaces.bubble_dof(component, cell);
}

}  // namespace detail

/// Viscous block of the deformation-rate form
///   a(u,v) = (nu/2) int (du_j/dx_i + du_i/dx_j)(dv_j/dx_i + dv_i/dx_j),
/// assembled over all velocity dofs (boundary conditions not applied).
/// Row (a,i), column (b,j) holds
///   nu * int [ delta_ij grad(phi_a).grad(phi_b) + d_j phi_a d_i phi_b ].
inline SparseMatrix assemble_viscous(const FemSpaces& spaces, double nu) {
    if (!(nu > 0.0)) throw Error("viscosity must be positive");
    const TriangleMesh& mesh = spaces.mesh();
    const QuadratureRule& rule = triangle_rule(4);  // exact: integrands are quartic
    std::vector<Triplet> trip;
    trip.reserve(spaces.num_cells() * 64);
    for (int c = 0; c < spaces.num_cells(); ++c) {
        const auto gl = mesh.barycentric_gradients(c);
        const double area = mesh.cell_area(c);
        // G[p][q][a][b] = int (d_p phi_a)(d_q phi_b)
        double G[2][2][4][4] = {};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double w = rule.weights[q] * area;
            const auto grads = detail::scalar_basis_gradients(gl, rule.points[q]);
            for (int a = 0; a < 4; ++a) {
                const double ga[2] = {grads[a].x, grads[a].y};
                for (int b = 0; b < 4; ++b) {
                    const double gb[2] = {grads[b].x, grads[b].y};
                    for (int p = 0; p < 2; ++p)
                        for (int s = 0; s < 2; ++s) G[p][s][a][b] += w * ga[p] * gb[s];
                }
            }
        }
        for (int i = 0; i < 2; ++i) {
            for (int a = 0; a < 4; ++a) {
                const int row = detail::local_to_global(spaces, i, c, a);
                for (int j = 0; j < 2; ++j) {
                    for (int b = 0; b < 4; ++b) {
                        const int col = detail::local_to_global(spaces, j, c, b);
                        double v = G[j][i][a][b];
                        if (i == j) v += G[0][0][a][b] + G[1][1][a][b];
                        trip.push_back({row, col, nu * v});
                    }
                }
            }
        }
    }
    return SparseMatrix::finalize(spaces.num_velocity_dofs(), spaces.num_velocity_dofs(),
                                  std::move(trip));
}

/// Divergence coupling b(psi, v) = -int psi (div v) over all velocity dofs,
/// plus the pressure weights c_j = int psi_j (so sum(c) = |Omega|).
inline std::pair<SparseMatrix, std::vector<double>> assemble_divergence(
    const FemSpaces& spaces) {
    const TriangleMesh& mesh = spaces.mesh();
    const QuadratureRule& rule = triangle_rule(4);
    std::vector<Triplet> trip;
    trip.reserve(spaces.num_cells() * 24);
    std::vector<double> c(spaces.num_pressure_dofs(), 0.0);
    for (int cell = 0; cell < spaces.num_cells(); ++cell) {
        const auto gl = mesh.barycentric_gradients(cell);
        const double area = mesh.cell_area(cell);
        const auto& tri = mesh.cell(cell);
        double local[3][2][4] = {};  // [pressure t][component i][scalar a]
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double w = rule.weights[q] * area;
            const auto& l = rule.points[q];
            const auto grads = detail::scalar_basis_gradients(gl, l);
            for (int t = 0; t < 3; ++t) {
                const double psi = l[t];
                for (int a = 0; a < 4; ++a) {
                    local[t][0][a] -= w * psi * grads[a].x;
                    local[t][1][a] -= w * psi * grads[a].y;
                }
            }
        }
        for (int t = 0; t < 3; ++t) {
            const int row = tri[t];
            for (int i = 0; i < 2; ++i)
                for (int a = 0; a < 4; ++a)
                    trip.push_back({row, detail::local_to_global(spaces, i, cell, a),
                                    local[t][i][a]});
            c[tri[t]] += area / 3.0;  // int of a P1 hat over one cell
        }
    }
    return {SparseMatrix::finalize(spaces.num_pressure_dofs(), spaces.num_velocity_dofs(),
                                   std::move(trip)),
            std::move(c)};
}

/// Load vector (force, v) over all velocity dofs; cells ascending, then
/// quadrature points, so the accumulation order is fixed.
template <class ForceField>
std::vector<double> assemble_rhs(const FemSpaces& spaces, ForceField&& force,
                                 int quad_order = 6) {
    const TriangleMesh& mesh = spaces.mesh();
    const QuadratureRule& rule = triangle_rule(quad_order);
    std::vector<double> rhs(spaces.num_velocity_dofs(), 0.0);
    for (int cell = 0; cell < spaces.num_cells(); ++cell) {
        const auto p = mesh.cell_vertices(cell);
        const double area = mesh.cell_area(cell);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto& l = rule.points[q];
            const Vec2 x = l[0] * p[0] + l[1] * p[1] + l[2] * p[2];
            const double w = rule.weights[q] * area;
            const Vec2 f = force(x);
            const auto vals = detail::scalar_basis_values(l);
            for (int a = 0; a < 4; ++a) {
                rhs[detail::local_to_global(spaces, 0, cell, a)] += w * f.x * vals[a];
                rhs[detail::local_to_global(spaces, 1, cell, a)] += w * f.y * vals[a];
            }
        }
    }
    return rhs;
}

/// Saddle system reduced to the free velocity dofs, with the mean-zero
/// pressure constraint carried as the weight vector c.
struct StokesSystem {
    const FemSpaces* spaces = nullptr;
    double nu = 1.0;
    SparseMatrix A;             // free x free
    SparseMatrix B;             // pressure x free
    std::vector<double> c;      // pressure weights, int psi_j
    std::vector<double> rhs_u;  // free
};

namespace detail {

inline SparseMatrix restrict_velocity_columns(const FemSpaces& spaces,
                                              const SparseMatrix& m, bool rows_too) {
    std::vector<Triplet> trip;
    trip.reserve(m.nnz());
    for (int r = 0; r < m.rows(); ++r) {
        int row = r;
        if (rows_too) {
            row = spaces.free_index(r);
            if (row < 0) continue;
        }
        for (int k = m.row_offsets()[r]; k < m.row_offsets()[r + 1]; ++k) {
            const int col = spaces.free_index(m.col_indices()[k]);
            if (col < 0) continue;
            trip.push_back({row, col, m.values()[k]});
        }
    }
    const int rows = rows_too ? spaces.num_free_velocity_dofs() : m.rows();
    return SparseMatrix::finalize(rows, spaces.num_free_velocity_dofs(), std::move(trip));
}

}  // namespace detail

template <class ForceField>
StokesSystem build_stokes_system(const FemSpaces& spaces, double nu, ForceField&& force,
                                 int quad_order = 6) {
    StokesSystem sys;
    sys.spaces = &spaces;
    sys.nu = nu;
    sys.A = detail::restrict_velocity_columns(spaces, assemble_viscous(spaces, nu), true);
    auto [b_full, c] = assemble_divergence(spaces);
    sys.B = detail::restrict_velocity_columns(spaces, b_full, false);
    sys.c = std::move(c);
    const std::vector<double> rhs_full =
        assemble_rhs(spaces, std::forward<ForceField>(force), quad_order);
    sys.rhs_u.reserve(spaces.num_free_velocity_dofs());
    for (int dof : spaces.free_dofs()) sys.rhs_u.push_back(rhs_full[dof]);
    return sys;
}

/// Discrete velocity (full dof vector, boundary dofs exactly 0) and nodal
/// pressure with weighted mean zero.
struct DiscreteSolution {
    const FemSpaces* spaces = nullptr;
    std::vector<double> velocity;
    std::vector<double> pressure;
    SolveReport report;
};

/// Shifts the pressure by a constant so that the weighted mean c.p vanishes.
inline void apply_pressure_mean_shift(DiscreteSolution& solution,
                                      const std::vector<double>& c) {
    double total = 0.0, mean = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        total += c[j];
        mean += c[j] * solution.pressure[j];
    }
    const double shift = mean / total;
    for (double& p : solution.pressure) p -= shift;
}

inline DiscreteSolution solve_stokes(const StokesSystem& sys,
                                     const SolveOptions& opts = {}) {
    const FemSpaces& spaces = *sys.spaces;
    SaddleOperator op(sys.A, sys.B, sys.c);
    std::vector<double> rhs(op.dim(), 0.0);
    std::copy(sys.rhs_u.begin(), sys.rhs_u.end(), rhs.begin());
    DiscreteSolution solution;
    solution.spaces = &spaces;
    const std::vector<double> x = solve_symmetric_indefinite(op, rhs, opts,
                                                             &solution.report);
    solution.velocity.assign(spaces.num_velocity_dofs(), 0.0);
    for (int k = 0; k < spaces.num_free_velocity_dofs(); ++k)
        solution.velocity[spaces.free_dofs()[k]] = x[k];
    solution.pressure.assign(x.begin() + spaces.num_free_velocity_dofs(),
                             x.begin() + spaces.num_free_velocity_dofs() +
                                 spaces.num_pressure_dofs());
    apply_pressure_mean_shift(solution, sys.c);
    return solution;
}

}  // namespace ibstokes
