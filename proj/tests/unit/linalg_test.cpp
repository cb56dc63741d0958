#include "bosim/error.hpp"
#include "bosim/linalg/krylov.hpp"
#include "bosim/linalg/matrix_market.hpp"
#include "bosim/precond/ras.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace bosim;
using namespace bosim::test;

TEST(SparseMatrix, TripletsSumDuplicates)
{
    const auto a = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {0, 1, 2.0}, {1, 0, -1.0}});
    EXPECT_EQ(a.nnz(), 2);
    EXPECT_DOUBLE_EQ(a.at(0, 1), 3.0);
    EXPECT_DOUBLE_EQ(a.at(0, 0), 0.0);
    EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), InvalidInput);
}

TEST(SparseMatrix, ProductMatchesDense)
{
    std::mt19937_64 rng(3);
    const auto a = random_sparse(12, 0.3, rng), b = random_sparse(12, 0.3, rng);
    const auto c = multiply(a, b).to_dense();
    const auto da = a.to_dense(), db = b.to_dense();
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) {
            double s = 0.0;
            for (int k = 0; k < 12; ++k)
                s += da[i][k] * db[k][j];
            EXPECT_NEAR(c[i][j], s, 1e-12);
        }
}

TEST(Spmv, IdentityCopies)
{
    auto p = pool(2);
    const auto a = CsrMatrix::from_global(p, SparseMatrix::identity(7), Layout::even_offsets(7, 2));
    std::mt19937_64 rng(1);
    const auto v = random_vector(7, rng);
    DistVector x = make_vector(a, v), y(a.layout_ptr(), 5.0);
    spmv_axpby(1.0, a, x, 0.0, y);
    EXPECT_EQ(y.gather(), v);
}

TEST(Spmv, ZeroVectorReductions)
{
    auto p = pool(3);
    const auto a = CsrMatrix::from_global(p, SparseMatrix::identity(10), Layout::even_offsets(10, 3));
    DistVector x(a.layout_ptr()), y(a.layout_ptr(), 2.0);
    EXPECT_EQ(dot(x, y), 0.0);
    EXPECT_EQ(norm2(x), 0.0);
}

TEST(Spmv, MatchesDenseTripleLoopAcrossWorkerCounts)
{
    std::mt19937_64 rng(7);
    const auto g = random_sparse(10, 0.4, rng);
    const auto v = random_vector(10, rng);
    const auto ref = dense_multiply(g, v);
    std::vector<double> base;
    for (int np : {1, 2, 4}) {
        auto p = pool(np);
        const auto a = CsrMatrix::from_global(p, g, Layout::even_offsets(10, np));
        DistVector x = make_vector(a, v), y(a.layout_ptr());
        spmv(a, x, y);
        const auto out = y.gather();
        for (std::size_t i = 0; i < out.size(); ++i) {
            EXPECT_NEAR(out[i], ref[i], 1e-13 * std::max(1.0, std::abs(ref[i])));
            if (!base.empty())
                EXPECT_NEAR(out[i], base[i], 1e-14 * std::max(1.0, std::abs(base[i])));
        }
        if (base.empty())
            base = out;
    }
}

TEST(Spmv, AxpbyVariants)
{
    auto p = pool(2);
    const auto g = laplacian1d(6);
    const auto a = CsrMatrix::from_global(p, g, Layout::even_offsets(6, 2));
    const std::vector<double> xv{1, 2, 3, 4, 5, 6}, yv{1, 1, 1, 1, 1, 1};
    DistVector x = make_vector(a, xv), y = make_vector(a, yv);
    spmv_axpby(2.0, a, x, -1.0, y);
    const auto ax = dense_multiply(g, xv);
    const auto out = y.gather();
    for (int i = 0; i < 6; ++i)
        EXPECT_DOUBLE_EQ(out[static_cast<std::size_t>(i)], 2.0 * ax[static_cast<std::size_t>(i)] - 1.0);

    DistVector w(a.layout_ptr());
    waxpby(w, 2.0, x, 3.0, y);
    EXPECT_DOUBLE_EQ(w.get(2), 2.0 * 3.0 + 3.0 * out[2]);
    axpby(1.0, x, 0.0, w);
    EXPECT_EQ(w.gather(), xv);
}

TEST(Spmv, ReductionsAreDeterministic)
{
    std::mt19937_64 rng(5);
    const auto v = random_vector(1000, rng);
    auto p = pool(4);
    const auto a = CsrMatrix::from_global(p, SparseMatrix::identity(1000), Layout::even_offsets(1000, 4));
    const DistVector x = make_vector(a, v);
    const double d0 = dot(x, x);
    for (int k = 0; k < 20; ++k)
        EXPECT_EQ(dot(x, x), d0);
}

TEST(Spmv, GhostsCoverOffWorkerColumns)
{
    auto p = pool(3);
    const auto a = CsrMatrix::from_global(p, laplacian1d(9), Layout::even_offsets(9, 3));
    EXPECT_EQ(a.layout().ghosts(0).size(), 1u);
    EXPECT_EQ(a.layout().ghosts(1).size(), 2u);
    EXPECT_EQ(a.layout().ghosts(2).size(), 1u);
}

namespace {

class KrylovTest : public ::testing::TestWithParam<KrylovMethod> {};

} // namespace

TEST_P(KrylovTest, IdentityConvergesInOneIteration)
{
    auto p = pool(2);
    const auto a = CsrMatrix::from_global(p, SparseMatrix::identity(8), Layout::even_offsets(8, 2));
    std::mt19937_64 rng(2);
    const auto bv = random_vector(8, rng);
    DistVector b = make_vector(a, bv), x(a.layout_ptr());
    SolverConfig cfg;
    cfg.method = GetParam();
    cfg.tol = 1e-12;
    const auto r = krylov_solve(a, b, x, cfg);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1);
    const auto xv = x.gather();
    for (std::size_t i = 0; i < xv.size(); ++i)
        EXPECT_NEAR(xv[i], bv[i], 1e-14);
}

TEST_P(KrylovTest, DiagonalMatchesDivision)
{
    auto p = pool(2);
    std::vector<SparseMatrix::Triplet> t;
    for (Index i = 0; i < 20; ++i)
        t.emplace_back(i, i, 1.0 + static_cast<double>(i));
    const auto g = SparseMatrix::from_triplets(20, 20, std::move(t));
    const auto a = CsrMatrix::from_global(p, g, Layout::even_offsets(20, 2));
    std::vector<double> bv(20, 1.0);
    DistVector b = make_vector(a, bv), x(a.layout_ptr());
    SolverConfig cfg;
    cfg.method = GetParam();
    cfg.tol = 1e-14;
    cfg.max_iterations = 200;
    const auto r = krylov_solve(a, b, x, cfg);
    EXPECT_TRUE(r.converged);
    const auto xv = x.gather();
    for (std::size_t i = 0; i < xv.size(); ++i)
        EXPECT_NEAR(xv[i], 1.0 / (1.0 + static_cast<double>(i)), 1e-12);
}

TEST_P(KrylovTest, TrueResidualMeetsToleranceOnConvergedExit)
{
    std::mt19937_64 rng(11);
    const auto g = random_sparse(60, 0.08, rng);
    const auto bv = random_vector(60, rng);
    for (int np : {1, 3}) {
        auto p = pool(np);
        const auto a = CsrMatrix::from_global(p, g, Layout::even_offsets(60, np));
        DistVector b = make_vector(a, bv), x(a.layout_ptr()), r(a.layout_ptr());
        SolverConfig cfg;
        cfg.method = GetParam();
        cfg.tol = 1e-8;
        cfg.max_iterations = 300;
        const RasPreconditioner m(a);
        const auto res = krylov_solve(a, b, x, cfg, &m);
        ASSERT_TRUE(res.converged);
        residual(a, x, b, r);
        EXPECT_LE(norm2(r) / norm2(b), 1e-8);
        EXPECT_NEAR(res.relative_residual, norm2(r) / norm2(b), 1e-12);
    }
}

TEST_P(KrylovTest, FixedIterationModeRunsExactly)
{
    auto p = pool(2);
    const auto a = CsrMatrix::from_global(p, laplacian2d(32), Layout::even_offsets(1024, 2));
    std::vector<double> bv(1024, 1.0);
    DistVector b = make_vector(a, bv), x(a.layout_ptr());
    SolverConfig cfg;
    cfg.method = GetParam();
    cfg.fixed_iterations = 90;
    const auto r = krylov_solve(a, b, x, cfg);
    EXPECT_EQ(r.iterations, 90);
}

INSTANTIATE_TEST_SUITE_P(AllMethods, KrylovTest,
                         ::testing::Values(KrylovMethod::Gmres, KrylovMethod::Bicgstab, KrylovMethod::Orthomin),
                         [](const auto& info) { return to_string(info.param); });

TEST(Gmres, HistoryNonincreasingWithinCycle)
{
    auto p = pool(1);
    std::mt19937_64 rng(4);
    const auto a = CsrMatrix::from_global(p, random_sparse(80, 0.05, rng), Layout::even_offsets(80, 1));
    const auto bv = random_vector(80, rng);
    DistVector b = make_vector(a, bv), x(a.layout_ptr());
    SolverConfig cfg;
    cfg.restart = 30;
    cfg.tol = 1e-10;
    cfg.max_iterations = 30;
    const auto r = gmres(a, b, x, cfg);
    for (std::size_t i = 1; i < r.history.size(); ++i)
        EXPECT_LE(r.history[i], r.history[i - 1] * (1.0 + 1e-12));
}

TEST(Bicgstab, LaplacianWithIlu0)
{
    auto p = pool(1);
    const auto a = CsrMatrix::from_global(p, laplacian1d(32), Layout::even_offsets(32, 1));
    std::vector<double> bv(32, 1.0);
    DistVector b = make_vector(a, bv), x(a.layout_ptr());
    SolverConfig cfg;
    cfg.method = KrylovMethod::Bicgstab;
    cfg.tol = 1e-8;
    const RasPreconditioner ilu(a, RasConfig{0});
    const auto r = bicgstab(a, b, x, cfg, &ilu);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 10);
}

TEST(Bicgstab, SingularInconsistentSystemDiverges)
{
    auto p = pool(1);
    const auto g = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 0.0}});
    const auto a = CsrMatrix::from_global(p, g, Layout::even_offsets(2, 1));
    DistVector b = make_vector(a, {1.0, 1.0}), x(a.layout_ptr());
    SolverConfig cfg;
    cfg.method = KrylovMethod::Bicgstab;
    EXPECT_THROW(bicgstab(a, b, x, cfg), DivergenceError);
}

TEST(Orthomin, OneVectorResidualsNonincreasingOnSpd)
{
    auto p = pool(1);
    const auto a = CsrMatrix::from_global(p, laplacian2d(10), Layout::even_offsets(100, 1));
    std::mt19937_64 rng(9);
    DistVector b = make_vector(a, random_vector(100, rng)), x(a.layout_ptr());
    SolverConfig cfg;
    cfg.method = KrylovMethod::Orthomin;
    cfg.orthomin_k = 1;
    cfg.tol = 1e-10;
    cfg.max_iterations = 500;
    const auto r = orthomin(a, b, x, cfg);
    EXPECT_TRUE(r.converged);
    for (std::size_t i = 1; i < r.history.size(); ++i)
        EXPECT_LE(r.history[i], r.history[i - 1] * (1.0 + 1e-12));
}

TEST(SolverConfig, Validation)
{
    SolverConfig c;
    c.restart = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.tol = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_EQ(parse_krylov_method("bicgstab"), KrylovMethod::Bicgstab);
    EXPECT_THROW(parse_krylov_method("cg"), ConfigError);
}

TEST(MatrixMarket, RoundTrip)
{
    std::mt19937_64 rng(21);
    const auto a = random_sparse(15, 0.2, rng);
    std::stringstream ss;
    write_matrix_market(ss, a);
    const auto b = read_matrix_market(ss);
    EXPECT_EQ(a.row_ptr, b.row_ptr);
    EXPECT_EQ(a.col, b.col);
    EXPECT_EQ(a.val, b.val);
}

TEST(MatrixMarket, SymmetricExpands)
{
    std::stringstream ss("%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 4\n2 1 -1\n");
    const auto a = read_matrix_market(ss);
    EXPECT_DOUBLE_EQ(a.at(0, 1), -1.0);
    EXPECT_DOUBLE_EQ(a.at(1, 0), -1.0);
}

TEST(MatrixMarket, ErrorsCarryLineNumbers)
{
    std::stringstream ss("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 4\n3 1 1\n");
    try {
        read_matrix_market(ss, "m.mtx");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4);
    }
}

TEST(MatrixMarket, VectorRoundTrip)
{
    std::stringstream ss;
    write_mm_vector(ss, {1.5, -2.0, 1e-300});
    EXPECT_EQ(read_mm_vector(ss), (std::vector<double>{1.5, -2.0, 1e-300}));
}
