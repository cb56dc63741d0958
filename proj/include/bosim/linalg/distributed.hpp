#pragma once

#include "bosim/grid.hpp"
#include "bosim/linalg/sparse.hpp"
#include "bosim/parallel.hpp"

#include <memory>
#include <span>
#include <vector>

namespace bosim {

/// Row distribution of a global index space over the workers of a pool,
/// together with each worker's ghost indices and the exchange plan that
/// refreshes them. Rows of worker w are the contiguous global range
/// [begin(w), end(w)). Local numbering on a worker is owned rows first, then
/// ghosts in ascending global order.
class Layout {
public:
    struct Link {
        int peer;
        std::vector<Index> local; // positions in the sender's owned block
        std::vector<Index> slot;  // matching ghost slots on the receiver
    };

    Layout(std::shared_ptr<WorkerPool> pool, std::vector<Index> offsets, std::vector<std::vector<Index>> ghosts);

    /// Layout with no ghosts.
    static std::shared_ptr<const Layout> plain(std::shared_ptr<WorkerPool> pool, std::vector<Index> offsets);
    /// Even split of n rows (sizes differ by at most one).
    static std::vector<Index> even_offsets(Index n, int workers);

    WorkerPool& pool() const noexcept { return *pool_; }
    const std::shared_ptr<WorkerPool>& pool_ptr() const noexcept { return pool_; }
    int num_workers() const noexcept { return static_cast<int>(offsets_.size()) - 1; }
    Index global_size() const noexcept { return offsets_.back(); }
    Index begin(int w) const noexcept { return offsets_[static_cast<std::size_t>(w)]; }
    Index end(int w) const noexcept { return offsets_[static_cast<std::size_t>(w) + 1]; }
    Index nlocal(int w) const noexcept { return end(w) - begin(w); }
    Index localsize(int w) const noexcept
    {
        return nlocal(w) + static_cast<Index>(ghosts_[static_cast<std::size_t>(w)].size());
    }
    const std::vector<Index>& offsets() const noexcept { return offsets_; }

    int owner(Index global) const;
    std::span<const Index> ghosts(int w) const noexcept { return ghosts_[static_cast<std::size_t>(w)]; }
    /// Local index of a global index on worker w, or -1 when w neither owns nor ghosts it.
    Index local_index(int w, Index global) const;
    Index global_index(int w, Index local) const;

    /// receives(w): one link per peer, slot = ghost slot on w, local = position in peer's owned block.
    std::span<const Link> receives(int w) const noexcept { return recv_[static_cast<std::size_t>(w)]; }
    /// sends(w): one link per destination peer; slot refers to the destination's ghost slot.
    std::span<const Link> sends(int w) const noexcept { return send_[static_cast<std::size_t>(w)]; }

    bool same_rows(const Layout& o) const noexcept { return offsets_ == o.offsets_; }

private:
    std::shared_ptr<WorkerPool> pool_;
    std::vector<Index> offsets_;
    std::vector<std::vector<Index>> ghosts_;
    std::vector<std::vector<Link>> recv_;
    std::vector<std::vector<Link>> send_;
};

/// Distributed vector: each worker holds its owned entries followed by a
/// ghost tail (nlocal <= localsize).
class DistVector {
public:
    DistVector() = default;
    explicit DistVector(std::shared_ptr<const Layout> layout, double fill = 0.0);

    const Layout& layout() const { return *layout_; }
    const std::shared_ptr<const Layout>& layout_ptr() const noexcept { return layout_; }
    Index global_size() const { return layout_->global_size(); }

    std::span<double> owned(int w);
    std::span<const double> owned(int w) const;
    std::span<double> local(int w) { return parts_[static_cast<std::size_t>(w)]; }
    std::span<const double> local(int w) const { return parts_[static_cast<std::size_t>(w)]; }

    /// Copies owner values into every worker's ghost tail.
    void exchange_ghosts();

    double get(Index global) const;
    void set(Index global, double v);

    std::vector<double> gather() const;
    void scatter(std::span<const double> global);

private:
    std::shared_ptr<const Layout> layout_;
    std::vector<std::vector<double>> parts_;
};

/// Row-distributed sparse matrix. Each worker stores its owned rows with both
/// local column ids (into its owned+ghost vector) and global column ids; the
/// layout's ghost list covers exactly the off-worker columns referenced.
class CsrMatrix {
public:
    struct Part {
        std::vector<Index> row_ptr{0};
        std::vector<Index> cols;  // local ids
        std::vector<Index> gcols; // global ids, ascending within a row
        std::vector<double> vals;
    };

    /// Rows handed to the constructor: per worker, CSR with global columns
    /// (any order, duplicates summed).
    struct RowBlock {
        std::vector<Index> row_ptr{0};
        std::vector<Index> gcols;
        std::vector<double> vals;
    };

    CsrMatrix() = default;
    CsrMatrix(std::shared_ptr<WorkerPool> pool, std::vector<Index> offsets, std::vector<RowBlock> rows);

    /// Distributes a global matrix by row ranges.
    static CsrMatrix from_global(std::shared_ptr<WorkerPool> pool, const SparseMatrix& a, std::vector<Index> offsets);

    const Layout& layout() const { return *layout_; }
    const std::shared_ptr<const Layout>& layout_ptr() const noexcept { return layout_; }
    Index global_size() const { return layout_->global_size(); }
    int num_workers() const { return layout_->num_workers(); }

    const Part& part(int w) const { return parts_[static_cast<std::size_t>(w)]; }
    std::span<double> values(int w) { return parts_[static_cast<std::size_t>(w)].vals; }

    /// Row view by global row id (any worker's row; shared-memory read).
    struct RowView {
        std::span<const Index> gcols;
        std::span<const double> vals;
    };
    RowView row(Index global_row) const;

    /// Position of (global_row, global_col) within the owning worker's value
    /// array, or -1 when outside the pattern.
    Index find(Index global_row, Index global_col) const;

    void set_zero();
    std::size_t nnz() const;
    SparseMatrix to_global() const;

    /// Copy with the same structure and new values taken row-wise from rows.
    CsrMatrix with_rows(std::vector<RowBlock> rows) const;

private:
    std::shared_ptr<const Layout> layout_;
    std::vector<Part> parts_;
};

// Basic operations. Reductions combine per-worker partial sums in rank order,
// so results are identical on every worker and reproducible for a fixed
// worker count.

double dot(const DistVector& x, const DistVector& y);
double norm2(const DistVector& x);
/// y = a x + b y
void axpby(double a, const DistVector& x, double b, DistVector& y);
/// w = a x + b y
void waxpby(DistVector& w, double a, const DistVector& x, double b, const DistVector& y);
void copy(const DistVector& x, DistVector& y);
void fill(DistVector& x, double v);
/// y = alpha A x + beta y. Refreshes the ghosts of x first.
void spmv_axpby(double alpha, const CsrMatrix& a, DistVector& x, double beta, DistVector& y);
/// y = A x
void spmv(const CsrMatrix& a, DistVector& x, DistVector& y);
/// r = b - A x
void residual(const CsrMatrix& a, DistVector& x, const DistVector& b, DistVector& r);

} // namespace bosim
