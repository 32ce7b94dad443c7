#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "testutil.hpp"

using namespace ibstokes;

namespace {

// discrete solution with prescribed dof vectors; pressure defaults to zero
DiscreteSolution make_solution(const FemSpaces& spaces) {
    DiscreteSolution sol;
    sol.spaces = &spaces;
    sol.velocity.assign(spaces.num_velocity_dofs(), 0.0);
    sol.pressure.assign(spaces.num_pressure_dofs(), 0.0);
    return sol;
}

}  // namespace

TEST(Evaluate, ZeroFieldsSampleToZero) {
    const ibtest::Discretization d(4);
    const DiscreteSolution sol = make_solution(d.spaces);
    const FieldSample s = eval_solution(sol, {0.3, -0.7});
    EXPECT_EQ(s.u.x, 0.0);
    EXPECT_EQ(s.u.y, 0.0);
    EXPECT_EQ(s.p, 0.0);
    EXPECT_EQ(s.grad_u.frobenius(), 0.0);
}

TEST(Evaluate, NodalPressureIsReproducedExactly) {
    const ibtest::Discretization d(5);
    DiscreteSolution sol = make_solution(d.spaces);
    for (int v = 0; v < d.spaces.num_pressure_dofs(); ++v)
        sol.pressure[v] = d.mesh.vertex(v).x;  // P1 field x_1
    ibtest::Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        const Vec2 x{ibtest::uniform(rng, -1.0, 1.0), ibtest::uniform(rng, -1.0, 1.0)};
        EXPECT_NEAR(eval_pressure(sol, x), x.x, 1e-14);
    }
}

TEST(Evaluate, LinearVelocityAndItsGradient) {
    const ibtest::Discretization d(4);
    DiscreteSolution sol = make_solution(d.spaces);
    for (int v = 0; v < d.spaces.num_vertices(); ++v) {
        const Vec2 p = d.mesh.vertex(v);
        sol.velocity[d.spaces.vertex_dof(0, v)] = 2.0 * p.x - p.y;
        sol.velocity[d.spaces.vertex_dof(1, v)] = 0.5 * p.y;
    }
    const FieldSample s = eval_solution(sol, {0.21, 0.43});
    EXPECT_NEAR(s.u.x, 2.0 * 0.21 - 0.43, 1e-14);
    EXPECT_NEAR(s.u.y, 0.5 * 0.43, 1e-14);
    EXPECT_NEAR(s.grad_u.m[0][0], 2.0, 1e-13);
    EXPECT_NEAR(s.grad_u.m[0][1], -1.0, 1e-13);
    EXPECT_NEAR(s.grad_u.m[1][0], 0.0, 1e-13);
    EXPECT_NEAR(s.grad_u.m[1][1], 0.5, 1e-13);
}

TEST(Evaluate, BubbleShape) {
    const ibtest::Discretization d(2);
    DiscreteSolution sol = make_solution(d.spaces);
    const int cell = 3;
    sol.velocity[d.spaces.bubble_dof(0, cell)] = 1.0;

    // 1 at the centroid, 0 at the vertices
    const FieldSample at_c = eval_on_cell(sol, cell, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    EXPECT_NEAR(at_c.u.x, 1.0, 1e-14);
    const FieldSample at_v = eval_on_cell(sol, cell, {1.0, 0.0, 0.0});
    EXPECT_EQ(at_v.u.x, 0.0);

    // 27 l0 l1 l2 at arbitrary barycentric coordinates
    ibtest::Rng rng(9);
    for (int t = 0; t < 50; ++t) {
        const double a = ibtest::uniform(rng, 0.0, 1.0);
        const double b = ibtest::uniform(rng, 0.0, 1.0 - a);
        const std::array<double, 3> l{a, b, 1.0 - a - b};
        const FieldSample s = eval_on_cell(sol, cell, l);
        EXPECT_NEAR(s.u.x, 27.0 * l[0] * l[1] * l[2], 1e-13);
        EXPECT_EQ(s.u.y, 0.0);
    }
}

TEST(ErrorNorms, SolutionAgainstItselfIsZero) {
    const ibtest::Discretization d(6);
    DiscreteSolution sol = make_solution(d.spaces);
    ibtest::Rng rng(17);
    for (double& v : sol.velocity) v = ibtest::uniform(rng, -1.0, 1.0);
    for (double& p : sol.pressure) p = ibtest::uniform(rng, -1.0, 1.0);
    // point location re-derives barycentric coordinates, so the difference
    // is rounding noise rather than a bitwise zero
    const ErrorTriple e = error_norms(sol, fine_mesh_reference(sol), 2.0);
    EXPECT_LE(e.velocity_Lr, 1e-12);
    EXPECT_LE(e.velocity_W1r, 1e-10);
    EXPECT_LE(e.pressure_Lr, 1e-12);
}

TEST(ErrorNorms, KnownFieldAgainstTheAnalyticReference) {
    // zero discrete fields against the analytic reference: the velocity error
    // is zero and the pressure error is |pi|_{L^r}
    const ibtest::Discretization d(16);
    const DiscreteSolution sol = make_solution(d.spaces);
    const AnalyticSolution exact;

    const auto errs = error_norms_multi(sol, analytic_reference(), {1.0, 2.0});
    EXPECT_EQ(errs[0].velocity_Lr, 0.0);
    EXPECT_EQ(errs[1].velocity_W1r, 0.0);

    // reference values by direct numeric integration of the closed form
    const double l1 = ibtest::integrate_box(d.mesh.domain(), 400, [&](const Vec2& x) {
        return std::abs(exact.pressure(x));
    });
    const double l2 = std::sqrt(
        ibtest::integrate_box(d.mesh.domain(), 400, [&](const Vec2& x) {
            const double p = exact.pressure(x);
            return p * p;
        }));
    // both rules see the jump, so only a couple of digits transfer
    EXPECT_NEAR(errs[0].pressure_Lr, l1, 2e-2 * l1);
    EXPECT_NEAR(errs[1].pressure_Lr, l2, 2e-2 * l2);
}

TEST(ErrorNorms, ArgumentValidation) {
    const ibtest::Discretization d(2);
    const DiscreteSolution sol = make_solution(d.spaces);
    EXPECT_THROW(error_norms(sol, analytic_reference(), 2.0, 2), Error);
    EXPECT_THROW(error_norms(sol, analytic_reference(), 0.5), Error);
}

TEST(AnalyticReference, PressureHasMeanZeroAndTheStatedJump) {
    const AnalyticSolution exact;
    EXPECT_DOUBLE_EQ(exact.mean_shift(), 2.0 * M_PI * 0.25 / 4.0);
    const double mean = ibtest::integrate_box(AxisBox{}, 400, [&](const Vec2& x) {
        return exact.pressure(x);
    });
    EXPECT_NEAR(mean, 0.0, 5e-3);
    // jump across the interface along a ray
    const double in = exact.pressure({0.499, 0.0});
    const double out = exact.pressure({0.501, 0.0});
    EXPECT_NEAR(in - out, 2.0, 3e-3);
    EXPECT_EQ(exact.velocity({0.2, 0.3}).x, 0.0);
}

TEST(AnalyticReference, WeakFormIdentityHoldsForSmoothFields) {
    // -int p div(phi) = line integral of F.phi + int g.phi for test fields
    // vanishing on the domain boundary; this ties the closed form, the
    // interface force and the outer force together independently of any mesh
    ibtest::Rng rng(29);
    for (int t = 0; t < 5; ++t) {
        const auto phi = ibtest::random_test_field(rng);
        EXPECT_LE(ibtest::analytic_weak_form_residual(phi), 1e-8);
    }
}

TEST(Rates, LogTwoRatiosAndGuards) {
    const ErrorTriple e0{0.0104959, 0.2, 0.04};
    const ErrorTriple e1{0.00525413, 0.1, 0.01};
    const auto report = convergence_rates(2.0, {{0.2, e0}, {0.1, e1}});
    ASSERT_EQ(report.rows.size(), 2u);
    EXPECT_FALSE(report.rows[0].has_rho);
    EXPECT_TRUE(std::isnan(report.rows[0].rho[0]));
    ASSERT_TRUE(report.rows[1].has_rho);
    EXPECT_NEAR(report.rows[1].rho[0], 0.9983, 5e-4);
    EXPECT_NEAR(report.rows[1].rho[1], 1.0, 1e-12);
    EXPECT_NEAR(report.rows[1].rho[2], 2.0, 1e-12);

    // zero errors give NaN rates, not infinities
    const auto degenerate =
        convergence_rates(2.0, {{0.2, e0}, {0.1, ErrorTriple{}}});
    EXPECT_TRUE(std::isnan(degenerate.rows[1].rho[0]));

    EXPECT_THROW(convergence_rates(2.0, {{0.2, e0}, {0.15, e1}}), NonHalvingLevels);
}

TEST(JumpProbe, ReadsTheJumpOffTheInterpolatedClosedForm) {
    const ibtest::Discretization d(64);
    DiscreteSolution sol = make_solution(d.spaces);
    const AnalyticSolution exact;
    for (int v = 0; v < d.spaces.num_pressure_dofs(); ++v)
        sol.pressure[v] = exact.pressure(d.mesh.vertex(v));
    // both probe circles are clear of the smeared interface ring, where the
    // nodal values are those of a linear function and sampling is exact
    EXPECT_NEAR(pressure_jump_probe(sol), 2.0, 1e-12);
    EXPECT_THROW(pressure_jump_probe(sol, 0.35, 0.65, 0), Error);
}

TEST(JumpProbe, SmoothPressureReadsZero)
{
    const ibtest::Discretization d(16);
    DiscreteSolution sol = make_solution(d.spaces);
    for (int v = 0; v < d.spaces.num_pressure_dofs(); ++v)
        sol.pressure[v] = 3.0 * d.mesh.vertex(v).x - d.mesh.vertex(v).y;
    EXPECT_NEAR(pressure_jump_probe(sol), 0.0, 1e-12);
}
