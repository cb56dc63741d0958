#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace bosim {

using Index = std::int64_t;

/// Face numbering shared by Cell::face_area, Cell::neighbor and
/// Cell::boundary: -x, +x, -y, +y, -z, +z.
enum class Face : int { XMinus = 0, XPlus, YMinus, YPlus, ZMinus, ZPlus };

inline constexpr int face_axis(int face) { return face / 2; }

enum class BoundaryType : unsigned short { Interior = 0, NoFlow = 1 };

struct Cell {
    std::array<double, 3> centroid{};  // m; z component is depth, positive downward
    std::array<double, 6> face_area{}; // m^2
    double volume = 0.0;               // m^3
    double depth = 0.0;                // m, cell centre
    std::array<int, 3> ijk{};
    Index global_index = 0;
    std::array<Index, 6> neighbor{};   // -1 on exterior faces
    std::array<BoundaryType, 6> boundary{};
};

/// Regular structured hexahedral grid. Cells are stored in natural order,
/// i fastest, then j, then k (k = 0 is the top layer).
class Grid {
public:
    int nx() const noexcept { return dims_[0]; }
    int ny() const noexcept { return dims_[1]; }
    int nz() const noexcept { return dims_[2]; }
    std::array<int, 3> dims() const noexcept { return dims_; }
    Index num_cells() const noexcept { return static_cast<Index>(cells_.size()); }

    const Cell& cell(Index c) const { return cells_[static_cast<std::size_t>(c)]; }
    std::span<const Cell> cells() const noexcept { return cells_; }

    std::span<const double> dx() const noexcept { return dx_; }
    std::span<const double> dy() const noexcept { return dy_; }
    std::span<const double> dz() const noexcept { return dz_; }
    double top_depth() const noexcept { return top_; }

    Index index(int i, int j, int k) const noexcept
    {
        return static_cast<Index>(i) + static_cast<Index>(dims_[0]) * (static_cast<Index>(j) + static_cast<Index>(dims_[1]) * k);
    }

    /// Cell extent along axis (0, 1, 2).
    double extent(Index c, int axis) const;

    double bulk_volume() const;

    friend Grid build_grid(int, int, int, std::span<const double>, std::span<const double>, std::span<const double>,
                           double);

private:
    std::array<int, 3> dims_{};
    std::vector<double> dx_, dy_, dz_;
    double top_ = 0.0;
    std::vector<Cell> cells_;
};

/// Builds the grid; throws InvalidInput on non-positive dimensions or spacings,
/// or when a spacing array does not match its axis length.
Grid build_grid(int nx, int ny, int nz, std::span<const double> dx, std::span<const double> dy,
                std::span<const double> dz, double top_depth);

/// Position of lattice point (i, j, k) along the 3D Hilbert curve filling the
/// 2^order cube. Throws InvalidInput when a coordinate is outside [0, 2^order).
std::uint64_t hilbert_index(const std::array<int, 3>& ijk, int order);

/// Smallest order whose cube contains the grid.
int hilbert_order(const Grid& grid);

struct Partition {
    int num_workers = 1;
    std::vector<int> owner;                 // per grid cell; -1 for cells left out
    std::vector<std::vector<Index>> cells;  // per worker, ascending Hilbert order
};

/// Hilbert-order chunking of all grid cells into contiguous, balanced pieces.
Partition partition_grid(const Grid& grid, int num_workers);

/// Same, restricted to the cells with include[c] set (used to drop inactive
/// cells from the unknown set).
Partition partition_grid(const Grid& grid, std::span<const char> include, int num_workers);

/// Per-worker halo of face-adjacent cells owned elsewhere.
struct GhostPlan {
    struct Link {
        int peer;
        std::vector<Index> cells; // sorted global cell ids
    };
    // receives[w]: cells worker w needs, grouped by owning peer.
    std::vector<std::vector<Link>> receives;
    // sends[w]: cells worker w must ship, grouped by destination peer.
    std::vector<std::vector<Link>> sends;

    Index total_received() const;
};

GhostPlan build_ghost_plan(const Grid& grid, const Partition& partition);

} // namespace bosim
