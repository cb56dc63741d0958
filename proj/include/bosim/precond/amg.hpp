#pragma once

#include "bosim/linalg/krylov.hpp"
#include "bosim/linalg/sparse.hpp"

#include <span>
#include <vector>

namespace bosim {

struct AmgConfig {
    double strength_threshold = 0.08; // |a_ij| >= theta sqrt(a_ii a_jj)
    double jacobi_weight = 2.0 / 3.0; // prolongation smoothing
    int max_levels = 10;
    Index coarse_size = 64;           // direct solve at or below this size
    int pre_sweeps = 1;
    int post_sweeps = 1;
    int coarse_sweeps = 20;           // Gauss-Seidel fallback when no direct solve is possible

    void validate() const;
};

/// Smoothed-aggregation hierarchy. Level 0 holds the input matrix; each level
/// but the last carries the prolongation to it from the next coarser level.
class AmgHierarchy {
public:
    struct Level {
        SparseMatrix a;
        SparseMatrix p; // fine x coarse (empty on the coarsest level)
        SparseMatrix r; // p transposed
    };

    std::size_t num_levels() const noexcept { return levels_.size(); }
    const Level& level(std::size_t i) const { return levels_[i]; }
    /// True when the coarsest level is solved exactly by dense LU.
    bool direct_coarse() const noexcept { return direct_; }
    const AmgConfig& config() const noexcept { return cfg_; }

    /// x = one V-cycle applied to f from a zero initial guess.
    void vcycle(std::span<const double> f, std::span<double> x) const;

private:
    friend AmgHierarchy amg_setup(const SparseMatrix& a, const AmgConfig& cfg);
    void cycle(std::size_t lvl, std::span<const double> f, std::span<double> x) const;

    AmgConfig cfg_;
    std::vector<Level> levels_;
    DenseLu coarse_;
    bool direct_ = false;
};

/// Aggregates of the strength graph of a: agg[i] is the aggregate of row i.
/// Returns the number of aggregates.
Index sa_aggregate(const SparseMatrix& a, double theta, std::vector<Index>& agg);

AmgHierarchy amg_setup(const SparseMatrix& a, const AmgConfig& cfg = {});

inline void amg_vcycle(const AmgHierarchy& h, std::span<const double> f, std::span<double> x) { h.vcycle(f, x); }

/// Forward (or backward) Gauss-Seidel sweep on a x = f. Rows with a zero
/// diagonal are left unchanged.
void gauss_seidel(const SparseMatrix& a, std::span<const double> f, std::span<double> x, bool backward = false);

/// One V-cycle as a preconditioner for a scalar distributed system.
class AmgPreconditioner final : public Preconditioner {
public:
    explicit AmgPreconditioner(const CsrMatrix& a, const AmgConfig& cfg = {});
    void apply(const DistVector& r, DistVector& z) const override;
    const AmgHierarchy& hierarchy() const noexcept { return h_; }

private:
    AmgHierarchy h_;
};

} // namespace bosim
