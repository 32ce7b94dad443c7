#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "testutil.hpp"

using namespace ibstokes;

namespace {

SparseMatrix identity(int n) {
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return SparseMatrix::finalize(n, n, std::move(t));
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(SaddleOperator, ShapeValidation) {
    EXPECT_THROW(SaddleOperator(SparseMatrix::finalize(2, 3, {}), identity(2), {}),
                 Error);
    EXPECT_THROW(SaddleOperator(identity(2), SparseMatrix::finalize(1, 3, {}), {}),
                 Error);
    EXPECT_THROW(SaddleOperator(identity(2), SparseMatrix::finalize(2, 2, {}),
                                {1.0, 1.0, 1.0}),
                 Error);
    const SaddleOperator plain(identity(3), SparseMatrix::finalize(0, 3, {}), {});
    EXPECT_FALSE(plain.has_multiplier());
    EXPECT_EQ(plain.dim(), 3);
    const SaddleOperator with(identity(2), SparseMatrix::finalize(1, 2, {{0, 0, 1.0}}),
                              {1.0});
    EXPECT_TRUE(with.has_multiplier());
    EXPECT_EQ(with.dim(), 4);
}

TEST(SaddleOperator, ApplyMatchesAssembledMatrix) {
    ibtest::Rng rng(7);
    std::vector<Triplet> ta;
    for (int i = 0; i < 5; ++i) {
        ta.push_back({i, i, 3.0});
        if (i + 1 < 5) {
            ta.push_back({i, i + 1, -1.0});
            ta.push_back({i + 1, i, -1.0});
        }
    }
    std::vector<Triplet> tb;
    for (int k = 0; k < 10; ++k)
        tb.push_back({static_cast<int>(rng() % 3), static_cast<int>(rng() % 5),
                      ibtest::uniform(rng, -1.0, 1.0)});
    const SaddleOperator op(SparseMatrix::finalize(5, 5, ta),
                            SparseMatrix::finalize(3, 5, tb), {0.4, 0.0, 1.1});
    const SparseMatrix full = op.assemble_full();
    EXPECT_EQ(full.rows(), op.dim());
    for (int t = 0; t < 20; ++t) {
        std::vector<double> x(op.dim());
        for (double& v : x) v = ibtest::uniform(rng, -1.0, 1.0);
        EXPECT_LE(max_abs_diff(op.apply(x), full.multiply(x)), 1e-14);
    }
}

TEST(SaddleSolve, IdentityBlockOnly) {
    const SaddleOperator op(identity(3), SparseMatrix::finalize(0, 3, {}), {});
    const std::vector<double> b{1.0, -2.0, 0.25};
    SolveReport report;
    const auto x = solve_symmetric_indefinite(op, b, {}, &report);
    EXPECT_LE(max_abs_diff(x, b), 1e-12);
    EXPECT_TRUE(report.direct);
    EXPECT_LE(report.residual, 1e-10);
}

TEST(SaddleSolve, TwoByTwoTextbookSystem) {
    // [2 1; 1 0] x = (3, 1) has the unique solution (1, 1)
    const SaddleOperator op(SparseMatrix::finalize(1, 1, {{0, 0, 2.0}}),
                            SparseMatrix::finalize(1, 1, {{0, 0, 1.0}}), {});
    const std::vector<double> b{3.0, 1.0};
    const std::vector<double> want{1.0, 1.0};

    const auto direct = solve_symmetric_indefinite(op, b);
    EXPECT_LE(max_abs_diff(direct, want), 1e-10);

    SolveOptions krylov;
    krylov.direct_threshold = 0;
    SolveReport report;
    const auto iterative = solve_symmetric_indefinite(op, b, krylov, &report);
    EXPECT_LE(max_abs_diff(iterative, want), 1e-8);
    EXPECT_FALSE(report.direct);
    EXPECT_GT(report.iterations, 0);
}

TEST(SaddleSolve, MultiplierRowFixesTheWeightedMean) {
    // A = I2, B = [1 0], c = [1]; solution fixed by hand
    const SaddleOperator op(identity(2), SparseMatrix::finalize(1, 2, {{0, 0, 1.0}}),
                            {1.0});
    const std::vector<double> want{1.0, 2.0, 3.0, -1.0};
    const std::vector<double> b = op.apply(want);
    EXPECT_DOUBLE_EQ(b[0], 4.0);
    EXPECT_DOUBLE_EQ(b[1], 2.0);
    EXPECT_DOUBLE_EQ(b[2], 0.0);
    EXPECT_DOUBLE_EQ(b[3], 3.0);

    const auto direct = solve_symmetric_indefinite(op, b);
    EXPECT_LE(max_abs_diff(direct, want), 1e-9);

    SolveOptions krylov;
    krylov.direct_threshold = 0;
    const auto iterative = solve_symmetric_indefinite(op, b, krylov);
    EXPECT_LE(max_abs_diff(iterative, want), 1e-7);
}

TEST(SaddleSolve, RandomSystemsBothPathsAgree) {
    ibtest::Rng rng(42);
    for (int trial = 0; trial < 3; ++trial) {
        const int nu = 40, np = 10;
        std::vector<Triplet> ta;
        for (int i = 0; i < nu; ++i) {
            ta.push_back({i, i, 4.0});
            if (i + 1 < nu) {
                ta.push_back({i, i + 1, -1.0});
                ta.push_back({i + 1, i, -1.0});
            }
        }
        std::vector<Triplet> tb;
        for (int r = 0; r < np; ++r)
            for (int k = 0; k < 6; ++k)
                tb.push_back({r, static_cast<int>(rng() % nu),
                              ibtest::uniform(rng, -1.0, 1.0)});
        std::vector<double> c(np);
        for (double& v : c) v = ibtest::uniform(rng, 0.5, 1.5);
        const SaddleOperator op(SparseMatrix::finalize(nu, nu, ta),
                                SparseMatrix::finalize(np, nu, tb), c);

        std::vector<double> want(op.dim());
        for (double& v : want) v = ibtest::uniform(rng, -2.0, 2.0);
        const std::vector<double> b = op.apply(want);

        SolveReport direct_report;
        const auto direct = solve_symmetric_indefinite(op, b, {}, &direct_report);
        EXPECT_TRUE(direct_report.direct);
        EXPECT_LE(direct_report.residual, 1e-10);
        EXPECT_LE(max_abs_diff(direct, want), 1e-7);

        SolveOptions kopts;
        kopts.direct_threshold = 0;
        kopts.tol = 1e-12;
        SolveReport krylov_report;
        const auto iterative = solve_symmetric_indefinite(op, b, kopts, &krylov_report);
        EXPECT_FALSE(krylov_report.direct);
        EXPECT_LE(max_abs_diff(iterative, direct), 1e-6);
    }
}

TEST(SaddleSolve, ZeroRightHandSide) {
    const SaddleOperator op(identity(2), SparseMatrix::finalize(1, 2, {{0, 1, 1.0}}),
                            {1.0});
    SolveReport report;
    const auto x = solve_symmetric_indefinite(op, std::vector<double>(4, 0.0), {}, &report);
    for (double v : x) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(report.iterations, 0);
    EXPECT_EQ(report.residual, 0.0);
}

TEST(SaddleSolve, InvalidArguments) {
    const SaddleOperator op(identity(2), SparseMatrix::finalize(0, 2, {}), {});
    EXPECT_THROW(solve_symmetric_indefinite(op, {1.0}), Error);
    SolveOptions bad;
    bad.tol = 0.0;
    EXPECT_THROW(solve_symmetric_indefinite(op, {1.0, 1.0}, bad), Error);
}

TEST(SaddleSolve, IncompatibleSingularSystemIsReported) {
    // K = [1 0; 0 0] with b = (0, 1) has no solution
    const SaddleOperator op(identity(1), SparseMatrix::finalize(1, 1, {}), {});
    const std::vector<double> b{0.0, 1.0};
    EXPECT_THROW(solve_symmetric_indefinite(op, b), SolverBreakdown);
    SolveOptions kopts;
    kopts.direct_threshold = 0;
    kopts.max_iter = 50;
    EXPECT_THROW(solve_symmetric_indefinite(op, b, kopts), SolverBreakdown);
}

TEST(SaddleOperator, PreconditionerDiagonal) {
    const SaddleOperator op(
        SparseMatrix::finalize(2, 2, {{0, 0, 2.0}, {1, 1, 3.0}}),
        SparseMatrix::finalize(1, 2, {{0, 0, 4.0}, {0, 1, 5.0}}), {0.5});
    const std::vector<double> want{2.0, 3.0, 0.5, 0.5};
    EXPECT_EQ(op.preconditioner_diagonal(), want);

    const SaddleOperator plain(
        SparseMatrix::finalize(2, 2, {{0, 0, 2.0}, {1, 1, 3.0}}),
        SparseMatrix::finalize(1, 2, {{0, 0, 4.0}}), {});
    const std::vector<double> want2{2.0, 3.0, 1.0};
    EXPECT_EQ(plain.preconditioner_diagonal(), want2);
}
