#pragma once

#include "bosim/model.hpp"
#include "bosim/newton.hpp"
#include "bosim/simulator.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace bosim {

// Input deck in field units, exactly as written. to_sim_input() converts to SI.

struct DeckWell {
    std::string name;
    WellType type = WellType::Producer;
    Phase injected = Phase::Water;
    int i = 1, j = 1;                   // 1-based wellhead column
    std::optional<double> ref_depth;    // ft; default: first perforation

    bool operator==(const DeckWell&) const = default;
};

struct DeckCompletion {
    std::string well;
    int i = 1, j = 1, k1 = 1, k2 = 1;   // 1-based, k1..k2 inclusive
    double rw = 0.25;                   // ft
    double skin = 0.0;
    std::optional<double> wi;           // cP rb/day/psi; default: Peaceman

    bool operator==(const DeckCompletion&) const = default;
};

/// One WCONPROD/WCONINJE record. `time` is the schedule time (days) at which
/// the record appeared, i.e. the sum of the TSTEP values before it.
struct DeckControl {
    double time = 0.0;
    std::string well;
    ConstraintKind kind = ConstraintKind::Bhp;
    double target = 0.0;                // psi or stb/day (Mscf/day for gas)
    std::optional<double> limit;        // BHP limit (psi) on rate control, rate limit on BHP control
    std::optional<Phase> phase;         // set for injectors

    bool operator==(const DeckControl&) const = default;
};

struct DeckSolver {
    double newton_tol = 1e-3;
    int newton_max_iterations = 15;
    ForcingMode forcing = ForcingMode::Choice3;
    double theta = 1e-4;
    KrylovMethod method = KrylovMethod::Gmres;
    PrecondKind precond = PrecondKind::CprFpf;
    int restart = 30;
    double linear_tol = 1e-4;
    int linear_max_iterations = 200;
    double dt_init = 1.0, dt_max = 30.0, dt_min = 1.0 / 86400.0; // days
    int workers = 1;

    bool operator==(const DeckSolver&) const = default;
};

struct SimDeck {
    bool black_oil = false;
    std::array<int, 3> dims{};
    std::vector<double> dx, dy, dz;     // ft, one per column/row/layer
    double tops = 0.0;                  // ft
    std::vector<double> poro, permx, permy, permz; // permy/permz empty: copy permx
    double rock_p_ref = 14.7, rock_c = 0.0;        // psi, 1/psi

    std::vector<std::array<double, 4>> swof;       // sw krw krow pcow(psi)
    std::vector<std::array<double, 4>> sgof;       // sg krg krog pcog(psi)
    std::vector<std::array<double, 4>> pvto;       // p(psi) rs(Mscf/stb) bo(rb/stb) mu(cP)
    std::array<double, 2> oil_usat{};              // dBo/dp (1/psi), dmu/dp (cP/psi)
    std::array<double, 4> pvtw{14.7, 1.0, 0.0, 1.0}; // p_ref(psi) bw cw(1/psi) mu(cP)
    std::vector<std::array<double, 3>> pvdg;       // p(psi) bg(rb/Mscf) mu(cP)
    std::array<double, 3> density{};               // oil water gas, lb/ft3

    bool dual_porosity = false, dual_permeability = false;
    std::optional<double> sigma;                   // 1/ft2
    std::array<double, 3> block_dims{1.0, 1.0, 1.0}; // ft
    std::vector<double> fporo, fpermx, fpermy, fpermz;

    std::array<double, 3> init{};                  // p(psi) sw sg
    std::optional<double> init_pb;                 // psi, undersaturated start

    std::vector<DeckWell> wells;
    std::vector<DeckCompletion> completions;
    std::vector<DeckControl> controls;

    DeckSolver solver;
    std::vector<double> tsteps;                    // days
    std::optional<double> end_time;                // days
    int vtk_every = 0;                             // write VTK every n report steps; 0 = never

    Index num_cells() const { return static_cast<Index>(dims[0]) * dims[1] * dims[2]; }
    /// Report times in days: the cumulative TSTEP values, or {end_time}.
    std::vector<double> report_times() const;

    bool operator==(const SimDeck&) const = default;
};

/// Parses deck text. `file` names the source in diagnostics and anchors
/// relative INCLUDE paths. Throws ParseError with line and column.
SimDeck parse_deck(const std::string& text, const std::string& file = "<deck>");
SimDeck parse_deck_file(const std::string& path);

/// Canonical deck text; parse_deck(write_deck(d)) == d.
std::string write_deck(const SimDeck& deck);

/// Everything needed to build and run a model, in SI.
struct SimInput {
    Grid grid;
    RockModel rock;
    FluidModel fluid;
    std::vector<Well> wells;
    DualPorosityConfig dual;
    NewtonConfig newton;
    TimestepConfig steps;
    int workers = 1;
    double p_init = 0.0, sw_init = 0.0, sg_init = 0.0;
    std::optional<double> pb_init;
    std::vector<double> report_times; // s

    ReservoirState initial_state(const Model& model) const;
};

/// Unit conversion and model assembly. Throws ConfigError or InvalidInput.
SimInput to_sim_input(const SimDeck& deck);

} // namespace bosim
