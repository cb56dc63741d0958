#pragma once

#include "bosim/model.hpp"
#include "bosim/simulator.hpp"

#include <string>
#include <vector>

namespace bosim {

/// Everything the CSV writers need from a run.
struct RunReport {
    std::vector<std::string> well_names;
    std::vector<WellType> well_types;
    std::vector<StepReport> steps;
    std::vector<double> avg_pressure; // Pa, per step

    static RunReport for_model(const Model& model);
    void record(const Model& model, const ReservoirState& state, const StepReport& step);
};

/// Pore-volume weighted oil pressure.
double average_pressure(const Model& model, const ReservoirState& state);

/// Water cut q_w / (q_w + q_o) of produced liquid; 0 when nothing flows.
double water_cut(double qw, double qo);

/// Writes wells.csv, steps.csv and field.csv into dir (created if needed).
/// Field units: days, stb/day, Mscf/day, psi. Throws IoError.
void write_csv_reports(const std::string& dir, const RunReport& run);

/// Legacy ASCII VTK with cell data pressure (psi), sw, sg over the full grid;
/// inactive cells hold zeros and active = 0. Dual-porosity runs add the matrix
/// fields. Uniform grids use STRUCTURED_POINTS, others RECTILINEAR_GRID.
void write_vtk(const std::string& path, const Grid& grid, const Model& model, const ReservoirState& state, int step);

} // namespace bosim
