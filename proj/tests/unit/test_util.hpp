#pragma once

#include "bosim/linalg/distributed.hpp"
#include "bosim/linalg/sparse.hpp"

#include <memory>
#include <random>
#include <vector>

namespace bosim::test {

inline std::shared_ptr<WorkerPool> pool(int n) { return std::make_shared<WorkerPool>(n); }

inline SparseMatrix laplacian1d(Index n)
{
    std::vector<SparseMatrix::Triplet> t;
    for (Index i = 0; i < n; ++i) {
        t.emplace_back(i, i, 2.0);
        if (i > 0)
            t.emplace_back(i, i - 1, -1.0);
        if (i + 1 < n)
            t.emplace_back(i, i + 1, -1.0);
    }
    return SparseMatrix::from_triplets(n, n, std::move(t));
}

inline SparseMatrix laplacian2d(Index m)
{
    std::vector<SparseMatrix::Triplet> t;
    auto id = [m](Index i, Index j) { return i + m * j; };
    for (Index j = 0; j < m; ++j)
        for (Index i = 0; i < m; ++i) {
            t.emplace_back(id(i, j), id(i, j), 4.0);
            if (i > 0)
                t.emplace_back(id(i, j), id(i - 1, j), -1.0);
            if (i + 1 < m)
                t.emplace_back(id(i, j), id(i + 1, j), -1.0);
            if (j > 0)
                t.emplace_back(id(i, j), id(i, j - 1), -1.0);
            if (j + 1 < m)
                t.emplace_back(id(i, j), id(i, j + 1), -1.0);
        }
    return SparseMatrix::from_triplets(m * m, m * m, std::move(t));
}

/// Random sparse matrix with a dominant diagonal.
inline SparseMatrix random_sparse(Index n, double density, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> val(-1.0, 1.0), coin(0.0, 1.0);
    std::vector<SparseMatrix::Triplet> t;
    for (Index i = 0; i < n; ++i) {
        t.emplace_back(i, i, static_cast<double>(n) * 0.5 + 1.0 + coin(rng));
        for (Index j = 0; j < n; ++j)
            if (j != i && coin(rng) < density)
                t.emplace_back(i, j, val(rng));
    }
    return SparseMatrix::from_triplets(n, n, std::move(t));
}

inline std::vector<double> random_vector(Index n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v)
        x = val(rng);
    return v;
}

inline DistVector make_vector(const CsrMatrix& a, const std::vector<double>& v)
{
    DistVector x(a.layout_ptr());
    x.scatter(v);
    return x;
}

inline std::vector<double> dense_solve(const SparseMatrix& a, const std::vector<double>& b)
{
    DenseLu lu(a.to_dense());
    std::vector<double> x(b.size());
    lu.solve(b, x);
    return x;
}

inline std::vector<double> dense_multiply(const SparseMatrix& a, const std::vector<double>& x)
{
    const auto d = a.to_dense();
    std::vector<double> y(d.size(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d[i].size(); ++j)
            y[i] += d[i][j] * x[j];
    return y;
}

} // namespace bosim::test
