#pragma once

#include "bosim/linalg/sparse.hpp"

#include <span>
#include <vector>

namespace bosim {

/// Incomplete LU factorization with zero fill: L (unit lower) and U share the
/// sparsity pattern of A, and (LU)_ij = A_ij on that pattern.
///
/// A zero pivot triggers one retry with the diagonal shifted by
/// 1e-12 * max|a_ii|; if that also fails a FactorizationError names the row.
class Ilu0 {
public:
    Ilu0() = default;
    explicit Ilu0(const SparseMatrix& a);

    Index size() const noexcept { return lu_.rows; }
    bool shifted() const noexcept { return shifted_; }

    /// Solves L U x = b.
    void solve(std::span<const double> b, std::span<double> x) const;

    /// Factors split into explicit matrices (L with unit diagonal stored).
    SparseMatrix lower() const;
    SparseMatrix upper() const;

private:
    bool factor(double shift, Index& bad_row);

    SparseMatrix a_;
    SparseMatrix lu_;
    std::vector<Index> diag_;
    bool shifted_ = false;
};

} // namespace bosim
