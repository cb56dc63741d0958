#pragma once

#include "bosim/grid.hpp"
#include "bosim/linalg/distributed.hpp"
#include "bosim/precond/labeling.hpp"
#include "bosim/props.hpp"
#include "bosim/units.hpp"
#include "bosim/wells.hpp"

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace bosim {

struct RockModel {
    std::vector<double> poro;                // per grid cell, reference porosity
    std::vector<std::array<double, 3>> perm; // per grid cell, m^2
    double cr = 0.0;                         // 1/Pa
    double p_ref = 1.0e5;                    // Pa

    void validate(Index ncells) const;
};

struct FluidModel {
    bool black_oil = false;
    RelPermTable relperm;
    PvtTable pvt;
};

/// Fracture continuum of a dual-porosity run. The RockModel then describes the
/// matrix, and wells connect to the fracture cells.
struct DualPorosityConfig {
    bool enabled = false;
    bool dual_permeability = false;          // keep matrix-matrix connections
    std::vector<double> poro_f;
    std::vector<std::array<double, 3>> perm_f;
    std::array<double, 3> block{1.0, 1.0, 1.0}; // matrix block size, m
    double sigma = 0.0;                         // 1/m^2; 0 selects the Kazemi value

    double shape_factor() const;
    void validate(Index ncells) const;
};

/// Kazemi shape factor 4 (1/Lx^2 + 1/Ly^2 + 1/Lz^2). Throws ConfigError unless
/// all lengths are positive.
double kazemi_sigma(const std::array<double, 3>& block);

/// Two-point transmissibility between face neighbours a and b (m^3): the face
/// area over the sum of half-cell resistances. Zero when either side has zero
/// permeability along the axis.
double transmissibility(const Grid& grid, std::span<const std::array<double, 3>> perm, Index a, Index b);

/// Phase potential with depth positive downward: p - rho g depth.
template <class T>
T phase_potential(const T& p, const T& rho, double depth)
{
    return p - rho * (units::gravity * depth);
}

/// Primary unknowns, indexed by model cell. Model cells are the active grid
/// cells in natural order, followed in dual-porosity runs by the matrix copies.
struct ReservoirState {
    std::vector<double> p;           // oil pressure, Pa
    std::vector<double> sw;
    std::vector<double> x;           // S_g when saturated, else bubble point (Pa); unused in two-phase runs
    std::vector<unsigned char> saturated;
    std::vector<double> ph;          // per well bottom-hole pressure
    double time = 0.0;

    double sg(Index m) const { return saturated[static_cast<std::size_t>(m)] ? x[static_cast<std::size_t>(m)] : 0.0; }
};

/// Flux connection between two model cells; gravity uses depth_b - depth_a.
struct Connection {
    Index a, b;
    double trans;
    double ddepth;
};

/// Per-cell fluid state derived from the primary unknowns.
template <class T>
struct CellProps {
    std::array<T, 3> pressure{}; // phase pressures (water, oil, gas)
    std::array<T, 3> rho{};
    std::array<T, 3> krmu{};     // kr / mu
    std::array<T, 3> invb{};     // 1 / B
    std::array<T, 3> mob{};      // kr / (mu B)
    T rs{};
    std::array<T, 3> acc{};      // component surface volume in the pore space (water, oil, gas)
};

struct LinearSystem {
    CsrMatrix jacobian;
    DistVector residual;
};

inline constexpr double bubble_point_offset = 1.0; // Pa

/// Discrete black-oil or two-phase model on a partitioned structured grid.
///
/// Unknowns are numbered worker by worker: each worker's cells in partition
/// order (with the matrix copy right after its fracture cell in dual-porosity
/// runs), then the wells it owns. Within a cell the unknowns are
/// [p_o, S_w, S_g or p_b] and the rows are [oil, water, gas], so the oil
/// balance sits in the pressure row.
class Model {
public:
    /// Partitions the active cells over the pool's workers along the Hilbert
    /// curve. Throws ConfigError or InvalidInput on inconsistent input.
    Model(const Grid& grid, RockModel rock, FluidModel fluid, std::vector<Well> wells, DualPorosityConfig dual,
          std::shared_ptr<WorkerPool> pool);

    int num_components() const noexcept { return nc_; }
    bool black_oil() const noexcept { return nc_ == 3; }
    Index num_cells() const noexcept { return static_cast<Index>(volume_.size()); }
    Index num_active() const noexcept { return static_cast<Index>(active_.size()); }
    Index num_unknowns() const noexcept { return offsets_.back(); }
    int num_wells() const noexcept { return static_cast<int>(wells_.size()); }
    int num_workers() const noexcept { return static_cast<int>(owned_.size()); }
    bool dual_porosity() const noexcept { return dual_; }

    const std::vector<Well>& wells() const noexcept { return wells_; }
    const FluidModel& fluid() const noexcept { return fluid_; }
    const std::vector<Connection>& connections() const noexcept { return conns_; }
    WorkerPool& pool() const noexcept { return *pool_; }
    const std::shared_ptr<WorkerPool>& pool_ptr() const noexcept { return pool_; }
    const std::shared_ptr<const Layout>& layout() const noexcept { return layout_; }
    const Partition& partition() const noexcept { return partition_; }

    Index cell_unknown(Index m) const { return cell_row_[static_cast<std::size_t>(m)]; }
    Index well_unknown(int i) const { return well_row_[static_cast<std::size_t>(i)]; }
    int well_owner(int i) const { return well_owner_[static_cast<std::size_t>(i)]; }
    std::span<const Index> owned_cells(int w) const { return owned_[static_cast<std::size_t>(w)]; }
    /// Grid cell of a model cell, and 0 (fracture or single continuum) or 1 (matrix).
    Index grid_cell(Index m) const { return active_[static_cast<std::size_t>(m % num_active())]; }
    int continuum(Index m) const { return static_cast<int>(m / num_active()); }
    /// Model cell of an active grid cell in the given continuum, or -1.
    Index model_cell(Index grid_cell, int continuum = 0) const;
    double volume(Index m) const { return volume_[static_cast<std::size_t>(m)]; }
    double depth(Index m) const { return depth_[static_cast<std::size_t>(m)]; }
    double porosity(Index m) const { return poro_[static_cast<std::size_t>(m)]; }

    BlockLabeling labeling() const;

    /// State with uniform values; wells start at their cell pressure.
    ReservoirState uniform_state(double p, double sw, double sg = 0.0) const;
    /// Sets p_h of BHP-controlled wells to their targets.
    void apply_controls(ReservoirState& s, std::span<const Constraint> controls) const;

    CellProps<double> cell_props(const ReservoirState& s, Index m) const;

    /// Residual only (double arithmetic). Throws InvalidInput for dt <= 0.
    DistVector assemble_residual(const ReservoirState& old_state, const ReservoirState& state, double dt,
                                 std::span<const Constraint> controls) const;
    /// Residual and analytic Jacobian.
    LinearSystem assemble(const ReservoirState& old_state, const ReservoirState& state, double dt,
                          std::span<const Constraint> controls) const;

    /// Surface-volume inflow into cell a from cell b over one connection, per component.
    std::array<double, 3> connection_inflow(const ReservoirState& s, const Connection& c) const;
    /// Matrix-to-fracture transfer for an active grid cell, per component.
    std::array<double, 3> dual_porosity_transfer(const ReservoirState& s, Index active_cell) const;

    /// Per-well component rates (positive into the reservoir).
    std::vector<WellRates<double>> well_rates(const ReservoirState& s) const;
    /// Component surface volumes in place, summed over all cells.
    std::array<double, 3> fluid_in_place(const ReservoirState& s) const;

    /// x += scale * dx (dx in unknown numbering), then variable switching.
    void update(ReservoirState& s, const DistVector& dx, double scale) const;
    /// Largest |dS_w| or |dS_g| that dx would apply.
    double max_saturation_change(const ReservoirState& s, const DistVector& dx) const;

    /// Converts global unknown vector to a state (inverse of to_vector).
    std::vector<double> to_vector(const ReservoirState& s) const;
    void from_vector(ReservoirState& s, std::span<const double> v) const;

    double total_pore_volume() const;

private:
    template <int NC, bool J>
    void assemble_impl(const ReservoirState& old_state, const ReservoirState& state, double dt,
                       std::span<const Constraint> controls, DistVector& r, CsrMatrix* jac) const;

    int nc_;
    bool dual_;
    std::shared_ptr<WorkerPool> pool_;
    FluidModel fluid_;
    std::vector<Well> wells_;
    double cr_, p_ref_;

    Partition partition_;
    std::vector<Index> active_;       // active index -> grid cell
    std::vector<Index> grid_to_active_;
    std::vector<double> volume_, depth_, poro_;
    std::vector<Connection> conns_;
    std::vector<double> transfer_;    // per active cell, matrix-fracture transmissibility
    std::vector<std::vector<Index>> cell_conns_; // per model cell, connection ids
    std::vector<std::vector<std::pair<int, int>>> cell_perfs_; // per model cell, (well, perforation)
    std::vector<std::vector<Index>> perf_cells_; // per well, model cell of each perforation

    std::vector<std::vector<Index>> owned_;  // per worker, model cells in unknown order
    std::vector<std::vector<int>> owned_wells_;
    std::vector<int> well_owner_;
    std::vector<Index> cell_row_, well_row_;
    std::vector<Index> offsets_;
    std::shared_ptr<const Layout> layout_;
};

/// Applies the variable-switching rules and clamps saturations into [0, 1].
void switch_variables(ReservoirState& s, bool black_oil);

} // namespace bosim
