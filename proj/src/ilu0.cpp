#include "bosim/precond/ilu0.hpp"

#include "bosim/error.hpp"

#include <cmath>

namespace bosim {

Ilu0::Ilu0(const SparseMatrix& a) : a_(a)
{
    if (a.rows != a.cols)
        throw ContractViolation("ilu0: matrix must be square");
    Index bad = -1;
    if (factor(0.0, bad))
        return;
    double dmax = 0.0;
    for (double d : a.diagonal())
        dmax = std::max(dmax, std::abs(d));
    shifted_ = true;
    if (dmax > 0.0 && factor(1e-12 * dmax, bad))
        return;
    throw FactorizationError("ilu0: zero pivot in row " + std::to_string(bad), static_cast<long>(bad));
}

bool Ilu0::factor(double shift, Index& bad_row)
{
    lu_ = a_;
    const Index n = lu_.rows;
    diag_.assign(static_cast<std::size_t>(n), -1);
    for (Index i = 0; i < n; ++i) {
        diag_[static_cast<std::size_t>(i)] = lu_.find(i, i);
        if (diag_[static_cast<std::size_t>(i)] < 0) {
            bad_row = i;
            return false;
        }
        lu_.val[static_cast<std::size_t>(diag_[static_cast<std::size_t>(i)])] += shift;
    }

    std::vector<Index> pos(static_cast<std::size_t>(n), -1);
    for (Index i = 0; i < n; ++i) {
        const Index b = lu_.row_ptr[static_cast<std::size_t>(i)], e = lu_.row_ptr[static_cast<std::size_t>(i) + 1];
        for (Index k = b; k < e; ++k)
            pos[static_cast<std::size_t>(lu_.col[static_cast<std::size_t>(k)])] = k;

        for (Index k = b; k < e; ++k) {
            const Index c = lu_.col[static_cast<std::size_t>(k)];
            if (c >= i)
                break;
            const double piv = lu_.val[static_cast<std::size_t>(diag_[static_cast<std::size_t>(c)])];
            const double l = lu_.val[static_cast<std::size_t>(k)] / piv;
            lu_.val[static_cast<std::size_t>(k)] = l;
            for (Index kk = diag_[static_cast<std::size_t>(c)] + 1; kk < lu_.row_ptr[static_cast<std::size_t>(c) + 1]; ++kk) {
                const Index p = pos[static_cast<std::size_t>(lu_.col[static_cast<std::size_t>(kk)])];
                if (p >= 0)
                    lu_.val[static_cast<std::size_t>(p)] -= l * lu_.val[static_cast<std::size_t>(kk)];
            }
        }
        for (Index k = b; k < e; ++k)
            pos[static_cast<std::size_t>(lu_.col[static_cast<std::size_t>(k)])] = -1;

        const double d = lu_.val[static_cast<std::size_t>(diag_[static_cast<std::size_t>(i)])];
        if (d == 0.0 || !std::isfinite(d)) {
            bad_row = i;
            return false;
        }
    }
    return true;
}

void Ilu0::solve(std::span<const double> b, std::span<double> x) const
{
    const Index n = lu_.rows;
    for (Index i = 0; i < n; ++i) {
        double s = b[static_cast<std::size_t>(i)];
        for (Index k = lu_.row_ptr[static_cast<std::size_t>(i)]; k < diag_[static_cast<std::size_t>(i)]; ++k)
            s -= lu_.val[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(lu_.col[static_cast<std::size_t>(k)])];
        x[static_cast<std::size_t>(i)] = s;
    }
    for (Index i = n - 1; i >= 0; --i) {
        double s = x[static_cast<std::size_t>(i)];
        for (Index k = diag_[static_cast<std::size_t>(i)] + 1; k < lu_.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
            s -= lu_.val[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(lu_.col[static_cast<std::size_t>(k)])];
        x[static_cast<std::size_t>(i)] = s / lu_.val[static_cast<std::size_t>(diag_[static_cast<std::size_t>(i)])];
    }
}

SparseMatrix Ilu0::lower() const
{
    std::vector<SparseMatrix::Triplet> t;
    for (Index i = 0; i < lu_.rows; ++i) {
        for (Index k = lu_.row_ptr[static_cast<std::size_t>(i)]; k < diag_[static_cast<std::size_t>(i)]; ++k)
            t.emplace_back(i, lu_.col[static_cast<std::size_t>(k)], lu_.val[static_cast<std::size_t>(k)]);
        t.emplace_back(i, i, 1.0);
    }
    return SparseMatrix::from_triplets(lu_.rows, lu_.cols, std::move(t));
}

SparseMatrix Ilu0::upper() const
{
    std::vector<SparseMatrix::Triplet> t;
    for (Index i = 0; i < lu_.rows; ++i)
        for (Index k = diag_[static_cast<std::size_t>(i)]; k < lu_.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
            t.emplace_back(i, lu_.col[static_cast<std::size_t>(k)], lu_.val[static_cast<std::size_t>(k)]);
    return SparseMatrix::from_triplets(lu_.rows, lu_.cols, std::move(t));
}

} // namespace bosim
