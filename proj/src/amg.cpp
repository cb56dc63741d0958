#include "bosim/precond/amg.hpp"

#include "bosim/error.hpp"

#include <algorithm>
#include <cmath>

namespace bosim {

namespace {

using Sz = std::size_t;

inline Sz u(Index i) { return static_cast<Sz>(i); }

// Strong neighbours (excluding self) of every row.
std::vector<std::vector<Index>> strength_graph(const SparseMatrix& a, double theta)
{
    const auto d = a.diagonal();
    std::vector<std::vector<Index>> s(u(a.rows));
    for (Index i = 0; i < a.rows; ++i)
        for (Index k = a.row_ptr[u(i)]; k < a.row_ptr[u(i) + 1]; ++k) {
            const Index j = a.col[u(k)];
            if (j == i)
                continue;
            const double v = std::abs(a.val[u(k)]);
            if (v > 0.0 && v >= theta * std::sqrt(std::abs(d[u(i)] * d[u(j)])))
                s[u(i)].push_back(j);
        }
    return s;
}

SparseMatrix smoothed_prolongation(const SparseMatrix& a, const std::vector<Index>& agg, Index naggs, double omega)
{
    std::vector<SparseMatrix::Triplet> t;
    t.reserve(u(a.rows));
    for (Index i = 0; i < a.rows; ++i)
        t.emplace_back(i, agg[u(i)], 1.0);
    const SparseMatrix tentative = SparseMatrix::from_triplets(a.rows, naggs, std::move(t));

    // S = I - omega D^{-1} A
    SparseMatrix s = a;
    const auto d = a.diagonal();
    for (Index i = 0; i < s.rows; ++i) {
        const double inv = d[u(i)] != 0.0 ? omega / d[u(i)] : 0.0;
        for (Index k = s.row_ptr[u(i)]; k < s.row_ptr[u(i) + 1]; ++k) {
            s.val[u(k)] *= -inv;
            if (s.col[u(k)] == i)
                s.val[u(k)] += 1.0;
        }
    }
    return multiply(s, tentative);
}

} // namespace

void AmgConfig::validate() const
{
    if (!(strength_threshold >= 0.0) || !(jacobi_weight > 0.0) || max_levels < 1 || coarse_size < 1 || pre_sweeps < 0 ||
        post_sweeps < 0 || coarse_sweeps < 1)
        throw ConfigError("amg: invalid configuration");
}

Index sa_aggregate(const SparseMatrix& a, double theta, std::vector<Index>& agg)
{
    const auto s = strength_graph(a, theta);
    agg.assign(u(a.rows), -1);
    Index n = 0;

    // Pass 1: roots whose whole strong neighbourhood is still free.
    for (Index i = 0; i < a.rows; ++i) {
        if (agg[u(i)] >= 0)
            continue;
        bool free = true;
        for (Index j : s[u(i)])
            free = free && agg[u(j)] < 0;
        if (!free)
            continue;
        agg[u(i)] = n;
        for (Index j : s[u(i)])
            agg[u(j)] = n;
        ++n;
    }

    // Pass 2: attach leftovers to a neighbouring aggregate (strongest link).
    std::vector<Index> pass2(u(a.rows), -1);
    for (Index i = 0; i < a.rows; ++i) {
        if (agg[u(i)] >= 0)
            continue;
        double best = -1.0;
        for (Index k = a.row_ptr[u(i)]; k < a.row_ptr[u(i) + 1]; ++k) {
            const Index j = a.col[u(k)];
            if (j == i || agg[u(j)] < 0)
                continue;
            if (std::find(s[u(i)].begin(), s[u(i)].end(), j) == s[u(i)].end())
                continue;
            if (std::abs(a.val[u(k)]) > best) {
                best = std::abs(a.val[u(k)]);
                pass2[u(i)] = agg[u(j)];
            }
        }
    }
    for (Index i = 0; i < a.rows; ++i)
        if (pass2[u(i)] >= 0)
            agg[u(i)] = pass2[u(i)];

    // Pass 3: whatever is left forms aggregates with its free strong neighbours.
    for (Index i = 0; i < a.rows; ++i) {
        if (agg[u(i)] >= 0)
            continue;
        agg[u(i)] = n;
        for (Index j : s[u(i)])
            if (agg[u(j)] < 0)
                agg[u(j)] = n;
        ++n;
    }
    return n;
}

AmgHierarchy amg_setup(const SparseMatrix& a, const AmgConfig& cfg)
{
    cfg.validate();
    if (a.rows == 0)
        throw ConfigError("amg: empty matrix");
    if (a.rows != a.cols)
        throw ContractViolation("amg: matrix must be square");

    AmgHierarchy h;
    h.cfg_ = cfg;
    h.levels_.push_back({a, {}, {}});
    while (static_cast<int>(h.levels_.size()) < cfg.max_levels && h.levels_.back().a.rows > cfg.coarse_size) {
        const SparseMatrix& fine = h.levels_.back().a;
        std::vector<Index> agg;
        const Index nc = sa_aggregate(fine, cfg.strength_threshold, agg);
        if (nc >= fine.rows || nc == 0)
            break; // coarsening stagnated
        SparseMatrix p = smoothed_prolongation(fine, agg, nc, cfg.jacobi_weight);
        SparseMatrix r = p.transpose();
        SparseMatrix coarse = multiply(r, multiply(fine, p));
        h.levels_.back().p = std::move(p);
        h.levels_.back().r = std::move(r);
        h.levels_.push_back({std::move(coarse), {}, {}});
    }

    const SparseMatrix& last = h.levels_.back().a;
    if (last.rows <= std::max<Index>(cfg.coarse_size, 512)) {
        try {
            h.coarse_ = DenseLu(last.to_dense());
            h.direct_ = true;
        } catch (const FactorizationError&) {
            h.direct_ = false;
        }
    }
    return h;
}

void gauss_seidel(const SparseMatrix& a, std::span<const double> f, std::span<double> x, bool backward)
{
    const Index n = a.rows;
    for (Index step = 0; step < n; ++step) {
        const Index i = backward ? n - 1 - step : step;
        double s = f[u(i)], d = 0.0;
        for (Index k = a.row_ptr[u(i)]; k < a.row_ptr[u(i) + 1]; ++k) {
            const Index j = a.col[u(k)];
            if (j == i)
                d = a.val[u(k)];
            else
                s -= a.val[u(k)] * x[u(j)];
        }
        if (d != 0.0)
            x[u(i)] = s / d;
    }
}

void AmgHierarchy::vcycle(std::span<const double> f, std::span<double> x) const
{
    std::fill(x.begin(), x.end(), 0.0);
    cycle(0, f, x);
}

void AmgHierarchy::cycle(std::size_t lvl, std::span<const double> f, std::span<double> x) const
{
    const Level& L = levels_[lvl];
    if (lvl + 1 == levels_.size()) {
        if (direct_) {
            coarse_.solve(f, x);
        } else {
            for (int s = 0; s < cfg_.coarse_sweeps; ++s)
                gauss_seidel(L.a, f, x, s % 2 == 1);
        }
        return;
    }
    for (int s = 0; s < cfg_.pre_sweeps; ++s)
        gauss_seidel(L.a, f, x, false);

    std::vector<double> res(f.size());
    L.a.multiply(x, res);
    for (Sz i = 0; i < res.size(); ++i)
        res[i] = f[i] - res[i];
    std::vector<double> fc(u(L.p.cols)), xc(u(L.p.cols), 0.0);
    L.r.multiply(res, fc);
    cycle(lvl + 1, fc, xc);
    L.p.multiply(xc, res);
    for (Sz i = 0; i < res.size(); ++i)
        x[i] += res[i];

    for (int s = 0; s < cfg_.post_sweeps; ++s)
        gauss_seidel(L.a, f, x, true);
}

AmgPreconditioner::AmgPreconditioner(const CsrMatrix& a, const AmgConfig& cfg) : h_(amg_setup(a.to_global(), cfg)) {}

void AmgPreconditioner::apply(const DistVector& r, DistVector& z) const
{
    const auto f = r.gather();
    std::vector<double> x(f.size());
    h_.vcycle(f, x);
    z.scatter(x);
}

} // namespace bosim
