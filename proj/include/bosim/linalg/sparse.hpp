#pragma once

#include "bosim/grid.hpp"

#include <span>
#include <tuple>
#include <vector>

namespace bosim {

/// Serial compressed-sparse-row matrix with sorted, duplicate-free columns.
/// Used for local subdomain problems, the multigrid hierarchy and tests.
struct SparseMatrix {
    Index rows = 0;
    Index cols = 0;
    std::vector<Index> row_ptr{0};
    std::vector<Index> col;
    std::vector<double> val;

    using Triplet = std::tuple<Index, Index, double>;

    /// Sums duplicates and sorts columns. Throws InvalidInput on out-of-range entries.
    static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> entries);
    static SparseMatrix identity(Index n);

    Index nnz() const noexcept { return static_cast<Index>(col.size()); }

    /// Position of (i, j) in col/val, or -1.
    Index find(Index i, Index j) const;
    double at(Index i, Index j) const;

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;

    SparseMatrix transpose() const;
    std::vector<double> diagonal() const;
    std::vector<std::vector<double>> to_dense() const;
};

/// C = A B
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

/// Dense LU with partial pivoting; used for coarse multigrid levels and as a
/// test oracle.
class DenseLu {
public:
    DenseLu() = default;
    explicit DenseLu(std::vector<std::vector<double>> a);

    std::size_t size() const noexcept { return n_; }
    void solve(std::span<const double> b, std::span<double> x) const;

private:
    std::size_t n_ = 0;
    std::vector<double> lu_;
    std::vector<std::size_t> piv_;
};

} // namespace bosim
