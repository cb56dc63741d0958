#include "bosim/linalg/sparse.hpp"

#include "bosim/error.hpp"

#include <algorithm>
#include <cmath>

namespace bosim {

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> entries)
{
    for (const auto& [i, j, v] : entries)
        if (i < 0 || i >= rows || j < 0 || j >= cols)
            throw InvalidInput("SparseMatrix: entry outside matrix bounds");
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return std::get<0>(a) != std::get<0>(b) ? std::get<0>(a) < std::get<0>(b) : std::get<1>(a) < std::get<1>(b);
    });

    SparseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& [i, j, v] = entries[k];
        if (!m.col.empty() && k > 0 && std::get<0>(entries[k - 1]) == i && std::get<1>(entries[k - 1]) == j) {
            m.val.back() += v;
            continue;
        }
        m.col.push_back(j);
        m.val.push_back(v);
        ++m.row_ptr[static_cast<std::size_t>(i) + 1];
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(rows); ++i)
        m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
}

SparseMatrix SparseMatrix::identity(Index n)
{
    SparseMatrix m;
    m.rows = m.cols = n;
    m.row_ptr.resize(static_cast<std::size_t>(n) + 1);
    m.col.resize(static_cast<std::size_t>(n));
    m.val.assign(static_cast<std::size_t>(n), 1.0);
    for (Index i = 0; i <= n; ++i)
        m.row_ptr[static_cast<std::size_t>(i)] = i;
    for (Index i = 0; i < n; ++i)
        m.col[static_cast<std::size_t>(i)] = i;
    return m;
}

Index SparseMatrix::find(Index i, Index j) const
{
    const auto b = col.begin() + row_ptr[static_cast<std::size_t>(i)];
    const auto e = col.begin() + row_ptr[static_cast<std::size_t>(i) + 1];
    const auto it = std::lower_bound(b, e, j);
    return (it != e && *it == j) ? static_cast<Index>(it - col.begin()) : -1;
}

double SparseMatrix::at(Index i, Index j) const
{
    const Index k = find(i, j);
    return k < 0 ? 0.0 : val[static_cast<std::size_t>(k)];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    for (Index i = 0; i < rows; ++i) {
        double s = 0.0;
        for (Index k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
            s += val[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col[static_cast<std::size_t>(k)])];
        y[static_cast<std::size_t>(i)] = s;
    }
}

SparseMatrix SparseMatrix::transpose() const
{
    SparseMatrix t;
    t.rows = cols;
    t.cols = rows;
    t.row_ptr.assign(static_cast<std::size_t>(cols) + 1, 0);
    for (Index c : col)
        ++t.row_ptr[static_cast<std::size_t>(c) + 1];
    for (std::size_t i = 0; i < static_cast<std::size_t>(cols); ++i)
        t.row_ptr[i + 1] += t.row_ptr[i];
    t.col.resize(col.size());
    t.val.resize(val.size());
    std::vector<Index> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (Index i = 0; i < rows; ++i)
        for (Index k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            const auto c = static_cast<std::size_t>(col[static_cast<std::size_t>(k)]);
            const auto dst = static_cast<std::size_t>(next[c]++);
            t.col[dst] = i;
            t.val[dst] = val[static_cast<std::size_t>(k)];
        }
    return t;
}

std::vector<double> SparseMatrix::diagonal() const
{
    std::vector<double> d(static_cast<std::size_t>(std::min(rows, cols)), 0.0);
    for (Index i = 0; i < static_cast<Index>(d.size()); ++i)
        d[static_cast<std::size_t>(i)] = at(i, i);
    return d;
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const
{
    std::vector<std::vector<double>> d(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(cols)));
    for (Index i = 0; i < rows; ++i)
        for (Index k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
            d[static_cast<std::size_t>(i)][static_cast<std::size_t>(col[static_cast<std::size_t>(k)])] =
                val[static_cast<std::size_t>(k)];
    return d;
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b)
{
    if (a.cols != b.rows)
        throw ContractViolation("multiply: inner dimensions differ");
    SparseMatrix c;
    c.rows = a.rows;
    c.cols = b.cols;
    c.row_ptr.assign(static_cast<std::size_t>(a.rows) + 1, 0);
    std::vector<Index> marker(static_cast<std::size_t>(b.cols), -1);
    std::vector<double> acc(static_cast<std::size_t>(b.cols), 0.0);
    std::vector<Index> cols;
    for (Index i = 0; i < a.rows; ++i) {
        cols.clear();
        for (Index ka = a.row_ptr[static_cast<std::size_t>(i)]; ka < a.row_ptr[static_cast<std::size_t>(i) + 1]; ++ka) {
            const Index k = a.col[static_cast<std::size_t>(ka)];
            const double av = a.val[static_cast<std::size_t>(ka)];
            for (Index kb = b.row_ptr[static_cast<std::size_t>(k)]; kb < b.row_ptr[static_cast<std::size_t>(k) + 1]; ++kb) {
                const auto j = static_cast<std::size_t>(b.col[static_cast<std::size_t>(kb)]);
                if (marker[j] != i) {
                    marker[j] = i;
                    acc[j] = 0.0;
                    cols.push_back(static_cast<Index>(j));
                }
                acc[j] += av * b.val[static_cast<std::size_t>(kb)];
            }
        }
        std::sort(cols.begin(), cols.end());
        for (Index j : cols) {
            c.col.push_back(j);
            c.val.push_back(acc[static_cast<std::size_t>(j)]);
        }
        c.row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<Index>(c.col.size());
    }
    return c;
}

DenseLu::DenseLu(std::vector<std::vector<double>> a) : n_(a.size()), lu_(n_ * n_), piv_(n_)
{
    for (std::size_t i = 0; i < n_; ++i) {
        if (a[i].size() != n_)
            throw ContractViolation("DenseLu: matrix is not square");
        std::copy(a[i].begin(), a[i].end(), lu_.begin() + static_cast<std::ptrdiff_t>(i * n_));
    }
    auto at = [&](std::size_t i, std::size_t j) -> double& { return lu_[i * n_ + j]; };
    for (std::size_t k = 0; k < n_; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n_; ++i)
            if (std::abs(at(i, k)) > std::abs(at(p, k)))
                p = i;
        piv_[k] = p;
        if (at(p, k) == 0.0)
            throw FactorizationError("DenseLu: singular matrix", static_cast<long>(k));
        if (p != k)
            for (std::size_t j = 0; j < n_; ++j)
                std::swap(at(k, j), at(p, j));
        const double inv = 1.0 / at(k, k);
        for (std::size_t i = k + 1; i < n_; ++i) {
            const double l = at(i, k) * inv;
            at(i, k) = l;
            if (l != 0.0)
                for (std::size_t j = k + 1; j < n_; ++j)
                    at(i, j) -= l * at(k, j);
        }
    }
}

void DenseLu::solve(std::span<const double> b, std::span<double> x) const
{
    std::vector<double> y(b.begin(), b.end());
    for (std::size_t k = 0; k < n_; ++k)
        std::swap(y[k], y[piv_[k]]);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < i; ++j)
            y[i] -= lu_[i * n_ + j] * y[j];
    for (std::size_t i = n_; i-- > 0;) {
        for (std::size_t j = i + 1; j < n_; ++j)
            y[i] -= lu_[i * n_ + j] * y[j];
        y[i] /= lu_[i * n_ + i];
    }
    std::copy(y.begin(), y.end(), x.begin());
}

} // namespace bosim
