#include "bosim/error.hpp"
#include "bosim/linalg/krylov.hpp"
#include "bosim/precond/amg.hpp"
#include "bosim/precond/cpr.hpp"
#include "bosim/precond/ilu0.hpp"
#include "bosim/precond/labeling.hpp"
#include "bosim/precond/quasi_impes.hpp"
#include "bosim/precond/ras.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace bosim;
using namespace bosim::test;

namespace {

std::vector<double> apply(const Preconditioner& m, const CsrMatrix& a, const std::vector<double>& r)
{
    DistVector rv = make_vector(a, r), z(a.layout_ptr());
    m.apply(rv, z);
    return z.gather();
}

// Two unknowns per cell (pressure, saturation), cells coupled through a
// 1D stencil in both unknowns, plus an optional well unknown at the end.
SparseMatrix coupled_system(Index cells, std::mt19937_64& rng, bool with_well)
{
    std::uniform_real_distribution<double> u(0.1, 1.0);
    const Index n = 2 * cells + (with_well ? 1 : 0);
    std::vector<SparseMatrix::Triplet> t;
    for (Index c = 0; c < cells; ++c) {
        const Index p = 2 * c, s = p + 1;
        t.emplace_back(p, p, 4.0 + u(rng));
        t.emplace_back(p, s, u(rng));
        t.emplace_back(s, p, -u(rng));
        t.emplace_back(s, s, 3.0 + u(rng));
        for (Index nb : {c - 1, c + 1}) {
            if (nb < 0 || nb >= cells)
                continue;
            t.emplace_back(p, 2 * nb, -1.0 - u(rng));
            t.emplace_back(p, 2 * nb + 1, -0.3 * u(rng));
            t.emplace_back(s, 2 * nb, -0.2 * u(rng));
            t.emplace_back(s, 2 * nb + 1, -0.5 * u(rng));
        }
    }
    if (with_well) {
        const Index w = n - 1;
        t.emplace_back(w, w, 2.0);
        t.emplace_back(w, 0, -1.0);
        t.emplace_back(0, w, -1.0);
        t.emplace_back(1, w, -0.5);
    }
    return SparseMatrix::from_triplets(n, n, std::move(t));
}

BlockLabeling coupled_labeling(Index cells, bool with_well)
{
    BlockLabeling l;
    for (Index c = 0; c < cells; ++c) {
        l.kind.push_back(UnknownKind::Pressure);
        l.group.push_back(c);
        l.kind.push_back(UnknownKind::Saturation);
        l.group.push_back(c);
    }
    if (with_well) {
        l.kind.push_back(UnknownKind::Well);
        l.group.push_back(-1);
    }
    return l;
}

} // namespace

// ---------------------------------------------------------------------------
// ILU(0)

TEST(Ilu0, DiagonalMatrix)
{
    const auto a = SparseMatrix::from_triplets(3, 3, {{0, 0, 2.0}, {1, 1, 3.0}, {2, 2, 4.0}});
    const Ilu0 f(a);
    EXPECT_EQ(f.lower().to_dense(), SparseMatrix::identity(3).to_dense());
    EXPECT_EQ(f.upper().to_dense(), a.to_dense());
}

TEST(Ilu0, TwoByTwoHandElimination)
{
    const auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, 4.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}});
    const Ilu0 f(a);
    EXPECT_DOUBLE_EQ(f.lower().at(1, 0), 0.25);
    EXPECT_DOUBLE_EQ(f.upper().at(0, 0), 4.0);
    EXPECT_DOUBLE_EQ(f.upper().at(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(f.upper().at(1, 1), 2.75);
}

TEST(Ilu0, TridiagonalMatchesDenseLu)
{
    const auto a = laplacian1d(5);
    const Ilu0 f(a);
    // Dense Doolittle LU without pivoting.
    auto d = a.to_dense();
    const std::size_t n = d.size();
    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        l[k][k] = 1.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            l[i][k] = d[i][k] / d[k][k];
            for (std::size_t j = k; j < n; ++j)
                d[i][j] -= l[i][k] * d[k][j];
        }
    }
    const auto fl = f.lower().to_dense(), fu = f.upper().to_dense();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            EXPECT_NEAR(fl[i][j], l[i][j], 1e-15);
            EXPECT_NEAR(fu[i][j], d[i][j], 1e-15);
        }
}

TEST(Ilu0, PatternIdentityOnRandomMatrices)
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = random_sparse(30, 0.1, rng);
        const Ilu0 f(a);
        const auto lu = multiply(f.lower(), f.upper());
        for (Index i = 0; i < a.rows; ++i)
            for (Index k = a.row_ptr[static_cast<std::size_t>(i)]; k < a.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
                const Index j = a.col[static_cast<std::size_t>(k)];
                const double v = a.val[static_cast<std::size_t>(k)];
                EXPECT_NEAR(lu.at(i, j), v, 1e-14 * std::max(1.0, std::abs(v)));
            }
    }
}

TEST(Ilu0, ZeroPivotNamesTheRow)
{
    // Row 1 has no diagonal entry, so the shifted retry fails as well.
    const auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}});
    try {
        Ilu0 f(a);
        FAIL() << "expected a factorization error";
    } catch (const FactorizationError& e) {
        EXPECT_EQ(e.row(), 1);
    }
}

TEST(Ilu0, ShiftRetryRecoversZeroPivot)
{
    const auto b = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 0.0}, {1, 0, 0.5}});
    const Ilu0 f(b);
    EXPECT_TRUE(f.shifted());
}

// ---------------------------------------------------------------------------
// RAS

TEST(Ras, SingleWorkerEqualsGlobalIlu)
{
    std::mt19937_64 rng(8);
    const auto g = random_sparse(40, 0.08, rng);
    auto p = pool(1);
    const auto a = CsrMatrix::from_global(p, g, Layout::even_offsets(40, 1));
    const auto r = random_vector(40, rng);
    const Ilu0 ilu(g);
    std::vector<double> ref(40);
    ilu.solve(r, ref);
    for (int overlap : {0, 1, 3}) {
        const auto z = apply(RasPreconditioner(a, RasConfig{overlap}), a, r);
        for (std::size_t i = 0; i < z.size(); ++i)
            EXPECT_NEAR(z[i], ref[i], 1e-14 * std::max(1.0, std::abs(ref[i])));
    }
}

TEST(Ras, BlockDiagonalAlignedWithWorkersIsExact)
{
    std::vector<SparseMatrix::Triplet> t;
    for (Index b = 0; b < 3; ++b)
        for (Index i = 0; i < 4; ++i) {
            t.emplace_back(4 * b + i, 4 * b + i, 4.0);
            if (i > 0)
                t.emplace_back(4 * b + i, 4 * b + i - 1, -1.0);
            if (i < 3)
                t.emplace_back(4 * b + i, 4 * b + i + 1, -1.5);
        }
    const auto g = SparseMatrix::from_triplets(12, 12, std::move(t));
    auto p = pool(3);
    const auto a = CsrMatrix::from_global(p, g, {0, 4, 8, 12});
    std::mt19937_64 rng(1);
    const auto r = random_vector(12, rng);
    const auto z = apply(RasPreconditioner(a), a, r);
    const auto az = dense_multiply(g, z);
    for (std::size_t i = 0; i < 12; ++i)
        EXPECT_NEAR(az[i], r[i], 1e-14);
}

TEST(Ras, MatchesDenseSubdomainOracle)
{
    const Index n = 16;
    const auto g = laplacian1d(n);
    auto p = pool(2);
    const auto a = CsrMatrix::from_global(p, g, {0, 8, 16});
    std::mt19937_64 rng(6);
    const auto r = random_vector(n, rng);
    const auto z = apply(RasPreconditioner(a, RasConfig{1}), a, r);

    // Worker 0 overlaps onto row 8, worker 1 onto row 7. A tridiagonal
    // submatrix has no fill, so ILU(0) is its exact LU.
    const std::vector<std::pair<Index, Index>> dom{{0, 9}, {7, 16}};
    const std::vector<std::pair<Index, Index>> own{{0, 8}, {8, 16}};
    std::vector<double> ref(static_cast<std::size_t>(n));
    for (std::size_t d = 0; d < 2; ++d) {
        const Index lo = dom[d].first, hi = dom[d].second, m = hi - lo;
        std::vector<SparseMatrix::Triplet> t;
        for (Index i = lo; i < hi; ++i)
            for (Index j = lo; j < hi; ++j)
                if (g.at(i, j) != 0.0)
                    t.emplace_back(i - lo, j - lo, g.at(i, j));
        const auto sub = SparseMatrix::from_triplets(m, m, std::move(t));
        std::vector<double> rl(r.begin() + lo, r.begin() + hi);
        const auto zl = dense_solve(sub, rl);
        for (Index i = own[d].first; i < own[d].second; ++i)
            ref[static_cast<std::size_t>(i)] = zl[static_cast<std::size_t>(i - lo)];
    }
    for (std::size_t i = 0; i < ref.size(); ++i)
        EXPECT_NEAR(z[i], ref[i], 1e-13);
}

TEST(Ras, OverlapGrowsDomain)
{
    auto p = pool(2);
    const auto a = CsrMatrix::from_global(p, laplacian1d(20), {0, 10, 20});
    EXPECT_EQ(RasPreconditioner(a, RasConfig{0}).domain(0).size(), 10u);
    EXPECT_EQ(RasPreconditioner(a, RasConfig{1}).domain(0).size(), 11u);
    EXPECT_EQ(RasPreconditioner(a, RasConfig{2}).domain(1).size(), 12u);
    EXPECT_THROW(RasPreconditioner(a, RasConfig{-1}), ConfigError);
}

// ---------------------------------------------------------------------------
// Labeling

TEST(Labeling, RestrictProlongRoundTrip)
{
    const auto l = coupled_labeling(5, true);
    const PressureMap m(l);
    EXPECT_EQ(m.size(), 5);
    auto p = pool(2);
    std::mt19937_64 rng(3);
    const auto a = CsrMatrix::from_global(p, coupled_system(5, rng, true), Layout::even_offsets(11, 2));
    DistVector full(a.layout_ptr());
    const std::vector<double> pv{1, 2, 3, 4, 5};
    m.prolong_add(pv, full);
    std::vector<double> back;
    m.restrict_to(full, back);
    EXPECT_EQ(back, pv);
    EXPECT_EQ(full.get(1), 0.0);
    EXPECT_EQ(full.get(10), 0.0);
}

TEST(Labeling, SidecarRoundTrip)
{
    const auto l = coupled_labeling(3, true);
    std::stringstream ss;
    write_labeling(ss, l);
    const auto r = read_labeling(ss);
    EXPECT_EQ(r.kind, l.kind);
    EXPECT_EQ(r.group, l.group);
    std::stringstream bad("p 0\nx 1\n");
    EXPECT_THROW(read_labeling(bad), ParseError);
}

// ---------------------------------------------------------------------------
// Quasi-IMPES

TEST(QuasiImpes, NoCouplingLeavesSystemUnchanged)
{
    const auto g = SparseMatrix::from_triplets(2, 2, {{0, 0, 3.0}, {1, 0, 2.0}, {1, 1, 5.0}});
    auto p = pool(1);
    const auto a = CsrMatrix::from_global(p, g, {0, 2});
    const DistVector b = make_vector(a, {1.0, 2.0});
    const auto d = quasi_impes_decouple(a, b, coupled_labeling(1, false));
    EXPECT_EQ(d.a.to_global().to_dense(), g.to_dense());
    EXPECT_EQ(d.b.gather(), (std::vector<double>{1.0, 2.0}));
}

TEST(QuasiImpes, OneCellHandElimination)
{
    const double av = 3.0, c = 2.0, dv = 1.5, s = 4.0;
    const auto g = SparseMatrix::from_triplets(2, 2, {{0, 0, av}, {0, 1, c}, {1, 0, dv}, {1, 1, s}});
    auto p = pool(1);
    const auto a = CsrMatrix::from_global(p, g, {0, 2});
    const DistVector b = make_vector(a, {1.0, 2.0});
    const auto d = quasi_impes_decouple(a, b, coupled_labeling(1, false));
    const auto m = d.a.to_global().to_dense();
    EXPECT_DOUBLE_EQ(m[0][0], av - c * dv / s);
    EXPECT_EQ(m[0][1], 0.0);
    EXPECT_DOUBLE_EQ(d.b.get(0), 1.0 - c / s * 2.0);
    EXPECT_EQ(m[1][0], dv);
    EXPECT_EQ(m[1][1], s);
}

TEST(QuasiImpes, ZeroesCellLocalCouplingAndPreservesSolution)
{
    std::mt19937_64 rng(77);
    for (int np : {1, 3}) {
        const Index cells = 40;
        const auto g = coupled_system(cells, rng, true);
        const Index n = g.rows;
        auto p = pool(np);
        // Cell unknowns of a cell stay on one worker.
        std::vector<Index> offs{0};
        for (int w = 1; w < np; ++w)
            offs.push_back(2 * (cells * w / np));
        offs.push_back(n);
        const auto a = CsrMatrix::from_global(p, g, offs);
        const auto bv = random_vector(n, rng);
        const DistVector b = make_vector(a, bv);
        const auto lab = coupled_labeling(cells, true);
        const auto d = quasi_impes_decouple(a, b, lab);
        EXPECT_EQ(d.skipped_cells, 0);
        const auto ad = d.a.to_global();
        for (Index c = 0; c < cells; ++c)
            EXPECT_EQ(ad.at(2 * c, 2 * c + 1), 0.0);
        const auto x0 = dense_solve(g, bv);
        const auto x1 = dense_solve(ad, d.b.gather());
        for (std::size_t i = 0; i < x0.size(); ++i)
            EXPECT_NEAR(x1[i], x0[i], 1e-12 * std::max(1.0, std::abs(x0[i])));
        // Well row untouched.
        EXPECT_EQ(ad.at(n - 1, n - 1), g.at(n - 1, n - 1));
    }
}

TEST(QuasiImpes, SingularSaturationBlockIsSkipped)
{
    const auto g = SparseMatrix::from_triplets(2, 2, {{0, 0, 3.0}, {0, 1, 2.0}, {1, 0, 1.0}});
    auto p = pool(1);
    const auto a = CsrMatrix::from_global(p, g, {0, 2});
    const DistVector b = make_vector(a, {1.0, 2.0});
    const auto d = quasi_impes_decouple(a, b, coupled_labeling(1, false));
    EXPECT_EQ(d.skipped_cells, 1);
    EXPECT_EQ(d.a.to_global().to_dense(), g.to_dense());
}

// ---------------------------------------------------------------------------
// AMG

TEST(Amg, OneByOneIsSingleDirectLevel)
{
    const auto a = SparseMatrix::from_triplets(1, 1, {{0, 0, 5.0}});
    const auto h = amg_setup(a);
    EXPECT_EQ(h.num_levels(), 1u);
    EXPECT_TRUE(h.direct_coarse());
    std::vector<double> f{10.0}, x(1);
    amg_vcycle(h, f, x);
    EXPECT_DOUBLE_EQ(x[0], 2.0);
}

TEST(Amg, EmptyMatrixIsConfigError)
{
    EXPECT_THROW(amg_setup(SparseMatrix{}), ConfigError);
}

TEST(Amg, HierarchyShrinksAndAggregatesPartition)
{
    const auto a = laplacian2d(32);
    const auto h = amg_setup(a);
    ASSERT_GE(h.num_levels(), 2u);
    for (std::size_t l = 1; l < h.num_levels(); ++l)
        EXPECT_LT(h.level(l).a.rows, h.level(l - 1).a.rows);
    EXPECT_LE(h.level(h.num_levels() - 1).a.rows, 64);
    std::vector<Index> agg;
    const Index n = sa_aggregate(a, 0.08, agg);
    for (Index v : agg) {
        EXPECT_GE(v, 0);
        EXPECT_LT(v, n);
    }
}

TEST(Amg, VcycleReducesLaplacianResidual)
{
    const auto a = laplacian2d(32);
    const auto h = amg_setup(a);
    std::mt19937_64 rng(12);
    const auto f = random_vector(a.rows, rng);
    std::vector<double> x(f.size()), ax(f.size());
    amg_vcycle(h, f, x);
    a.multiply(x, ax);
    double r0 = 0.0, r1 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        r0 += f[i] * f[i];
        r1 += (f[i] - ax[i]) * (f[i] - ax[i]);
    }
    const double factor = std::sqrt(r0 / r1);
    EXPECT_GE(factor, 3.0);
    std::cout << "[ amg ] one V-cycle residual reduction factor " << factor << '\n';
}

TEST(Amg, PreconditionedGmresConverges)
{
    auto p = pool(1);
    const auto a = CsrMatrix::from_global(p, laplacian2d(32), Layout::even_offsets(1024, 1));
    std::mt19937_64 rng(13);
    DistVector b = make_vector(a, random_vector(1024, rng)), x(a.layout_ptr());
    const AmgPreconditioner m(a);
    SolverConfig cfg;
    cfg.tol = 1e-8;
    const auto r = gmres(a, b, x, cfg, &m);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 20);
    std::cout << "[ amg ] GMRES+AMG iterations " << r.iterations << '\n';
}

// ---------------------------------------------------------------------------
// CPR-FPF

TEST(Cpr, IdentityIsExact)
{
    auto p = pool(2);
    const auto a = CsrMatrix::from_global(p, SparseMatrix::identity(10), Layout::even_offsets(10, 2));
    std::mt19937_64 rng(1);
    const auto f = random_vector(10, rng);
    const auto x = apply(CprFpfPreconditioner(a, coupled_labeling(5, false)), a, f);
    for (std::size_t i = 0; i < f.size(); ++i)
        EXPECT_NEAR(x[i], f[i], 1e-15);
}

TEST(Cpr, PressureOnlyMatchesExplicitComposition)
{
    const Index n = 16;
    std::mt19937_64 rng(31);
    auto g = laplacian1d(n);
    for (Index i = 0; i < n; ++i)
        g.val[static_cast<std::size_t>(g.find(i, i))] += 0.1 * static_cast<double>(i % 3);
    auto p = pool(2);
    const auto a = CsrMatrix::from_global(p, g, Layout::even_offsets(n, 2));
    const auto lab = BlockLabeling::all_pressure(n);
    const CprFpfPreconditioner cpr(a, lab);
    const RasPreconditioner ras(a);
    const auto h = amg_setup(g);

    const auto f = random_vector(n, rng);
    auto ras_of = [&](const std::vector<double>& v) { return apply(ras, a, v); };
    auto resid = [&](const std::vector<double>& x) {
        auto ax = dense_multiply(g, x);
        for (std::size_t i = 0; i < ax.size(); ++i)
            ax[i] = f[i] - ax[i];
        return ax;
    };
    auto x = ras_of(f);
    auto r = resid(x);
    std::vector<double> c(r.size());
    amg_vcycle(h, r, c);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] += c[i];
    r = resid(x);
    const auto z = ras_of(r);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] += z[i];

    const auto got = apply(cpr, a, f);
    for (std::size_t i = 0; i < x.size(); ++i)
        EXPECT_NEAR(got[i], x[i], 1e-13 * std::max(1.0, std::abs(x[i])));
}

TEST(Cpr, LinearOperator)
{
    std::mt19937_64 rng(44);
    const Index cells = 30;
    const auto g = coupled_system(cells, rng, true);
    auto p = pool(2);
    const auto a = CsrMatrix::from_global(p, g, {0, 30, g.rows});
    const auto lab = coupled_labeling(cells, true);
    const DistVector b0(a.layout_ptr());
    const auto dec = quasi_impes_decouple(a, b0, lab);
    const CprFpfPreconditioner m(dec.a, lab);

    const std::vector<double> zero(static_cast<std::size_t>(g.rows), 0.0);
    for (double v : apply(m, dec.a, zero))
        EXPECT_EQ(v, 0.0);

    const auto f1 = random_vector(g.rows, rng), f2 = random_vector(g.rows, rng);
    std::vector<double> comb(f1.size());
    for (std::size_t i = 0; i < f1.size(); ++i)
        comb[i] = 2.0 * f1[i] - 0.5 * f2[i];
    const auto z1 = apply(m, dec.a, f1), z2 = apply(m, dec.a, f2), zc = apply(m, dec.a, comb);
    for (std::size_t i = 0; i < zc.size(); ++i)
        EXPECT_NEAR(zc[i], 2.0 * z1[i] - 0.5 * z2[i], 1e-12 * std::max(1.0, std::abs(zc[i])));
}

TEST(Cpr, BeatsRasOnCoupledSystem)
{
    std::mt19937_64 rng(5);
    const Index cells = 400;
    const auto g = coupled_system(cells, rng, false);
    auto p = pool(2);
    const auto a = CsrMatrix::from_global(p, g, {0, 400, 800});
    const auto lab = coupled_labeling(cells, false);
    const auto bv = random_vector(g.rows, rng);
    const DistVector b = make_vector(a, bv);
    const auto dec = quasi_impes_decouple(a, b, lab);
    SolverConfig cfg;
    cfg.method = KrylovMethod::Bicgstab;
    cfg.tol = 1e-8;
    cfg.max_iterations = 500;
    DistVector x1(dec.a.layout_ptr()), x2(dec.a.layout_ptr());
    const auto r_cpr = bicgstab(dec.a, dec.b, x1, cfg, make_preconditioner(PrecondKind::CprFpf, dec.a, lab).get());
    const auto r_ras = bicgstab(dec.a, dec.b, x2, cfg, make_preconditioner(PrecondKind::Ras, dec.a, lab).get());
    EXPECT_TRUE(r_cpr.converged);
    EXPECT_LE(r_cpr.iterations, r_ras.iterations);
}

TEST(PrecondKind, ParseNames)
{
    EXPECT_EQ(parse_precond_kind("cpr-fpf"), PrecondKind::CprFpf);
    EXPECT_EQ(parse_precond_kind("ilu0"), PrecondKind::Ilu0);
    EXPECT_THROW(parse_precond_kind("jacobi"), ConfigError);
}
