#pragma once

#include "bosim/model.hpp"
#include "bosim/newton.hpp"

#include <array>
#include <string>
#include <vector>

namespace bosim {

struct TimestepConfig {
    double dt_init = 86400.0;   // s
    double dt_min = 1.0;
    double dt_max = 30 * 86400.0;
    double growth = 1.5;
    double cut = 0.5;
    int grow_below = 5;         // Newton iterations that allow growth
    int hold_below = 10;        // Newton iterations that hold dt; above, dt shrinks by `cut`

    void validate() const;
};

struct StepReport {
    int index = 0;
    double time = 0.0;          // end of step, s
    double dt = 0.0;
    int newton_iterations = 0;
    int linear_iterations = 0;
    int cuts = 0;               // failed attempts before this step converged
    int resolves = 0;           // extra solves after constraint switches
    std::vector<WellRates<double>> well_rates;
    std::vector<double> bhp;
    std::vector<ConstraintKind> control;
    std::array<double, 3> mass_balance_error{}; // |dFIP - dt sum q| / FIP per component
    std::vector<std::string> events;
    double assembly_seconds = 0.0, setup_seconds = 0.0, solve_seconds = 0.0;
};

/// Drives a model through time: schedule events, adaptive timesteps and the
/// well-constraint switch loop around each Newton solve.
class Simulator {
public:
    Simulator(const Model& model, ReservoirState initial, NewtonConfig newton = {}, TimestepConfig steps = {});

    /// Advances to t_end (s). Throws NonConvergence when dt falls below dt_min;
    /// reports up to the failure stay available.
    void advance(double t_end);
    /// One step ending no later than t_limit or the next schedule event.
    /// Throws NonConvergence as advance does.
    const StepReport& step(double t_limit);

    const ReservoirState& state() const noexcept { return state_; }
    double time() const noexcept { return state_.time; }
    double next_dt() const noexcept { return dt_; }
    const std::vector<Constraint>& controls() const noexcept { return controls_; }
    const std::vector<StepReport>& reports() const noexcept { return reports_; }
    const Model& model() const noexcept { return *model_; }
    const NewtonConfig& newton_config() const noexcept { return newton_; }

private:
    void refresh_schedule();

    const Model* model_;
    ReservoirState state_;
    NewtonConfig newton_;
    TimestepConfig steps_;
    double dt_;
    std::vector<Constraint> controls_;
    std::vector<const Constraint*> scheduled_; // schedule entry each control came from
    std::vector<StepReport> reports_;
};

} // namespace bosim
