#include "bosim/simulator.hpp"

#include "bosim/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bosim {

void TimestepConfig::validate() const
{
    if (!(dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max))
        throw ConfigError("timestep: need 0 < dt_min <= dt_init <= dt_max");
    if (!(growth >= 1.0) || !(cut > 0.0 && cut < 1.0))
        throw ConfigError("timestep: growth must be >= 1 and cut in (0, 1)");
    if (grow_below < 0 || hold_below < grow_below)
        throw ConfigError("timestep: iteration thresholds out of order");
}

Simulator::Simulator(const Model& model, ReservoirState initial, NewtonConfig newton, TimestepConfig steps)
    : model_(&model), state_(std::move(initial)), newton_(std::move(newton)), steps_(steps), dt_(steps.dt_init)
{
    newton_.validate();
    steps_.validate();
    if (static_cast<Index>(state_.p.size()) != model.num_cells() ||
        static_cast<int>(state_.ph.size()) != model.num_wells())
        throw ContractViolation("initial state does not match the model");
    controls_.resize(static_cast<std::size_t>(model.num_wells()));
    scheduled_.assign(static_cast<std::size_t>(model.num_wells()), nullptr);
    refresh_schedule();
    model.apply_controls(state_, controls_);
}

void Simulator::refresh_schedule()
{
    for (int i = 0; i < model_->num_wells(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        const Constraint* c = &active_constraint(model_->wells()[k], state_.time);
        if (c != scheduled_[k]) {
            scheduled_[k] = c;
            controls_[k] = *c;
        }
    }
}

const StepReport& Simulator::step(double t_limit)
{
    refresh_schedule();
    const auto events = schedule_events(model_->wells(), state_.time, t_limit);
    const double t_stop = events.empty() ? t_limit : events.front();
    double dt = std::min(dt_, t_stop - state_.time);
    const bool clipped = dt < dt_;
    const int nw = model_->num_wells();

    StepReport rep;
    for (;;) {
        std::vector<Constraint> ctl = controls_;
        std::vector<int> switches(static_cast<std::size_t>(nw), 0);
        std::vector<std::string> notes;
        ReservoirState s;
        NewtonResult last;
        int resolves = 0;
        bool ok = false;
        for (;;) {
            s = state_;
            last = newton_solve(*model_, state_, s, dt, ctl, newton_);
            rep.newton_iterations += last.iterations;
            rep.linear_iterations += last.linear_iterations;
            rep.assembly_seconds += last.assembly_seconds;
            rep.setup_seconds += last.setup_seconds;
            rep.solve_seconds += last.solve_seconds;
            if (!last.converged)
                break;
            const auto rates = model_->well_rates(s);
            bool changed = false;
            for (int i = 0; i < nw && resolves < 2 * nw; ++i) {
                const auto k = static_cast<std::size_t>(i);
                if (switches[k] >= 2)
                    continue;
                const auto n = check_limits(model_->wells()[k], ctl[k], s.ph[k], rates[k]);
                if (!n)
                    continue;
                notes.push_back(model_->wells()[k].name + ": " + to_string(ctl[k].kind) + " -> " + to_string(n->kind));
                ctl[k] = *n;
                ++switches[k];
                changed = true;
            }
            if (!changed) {
                ok = true;
                break;
            }
            ++resolves;
        }

        if (ok) {
            const auto f0 = model_->fluid_in_place(state_);
            const auto f1 = model_->fluid_in_place(s);
            rep.well_rates = model_->well_rates(s);
            std::array<double, 3> q{};
            for (const auto& r : rep.well_rates) {
                q[0] += r.water;
                q[1] += r.oil;
                q[2] += r.gas;
            }
            for (std::size_t c = 0; c < 3; ++c)
                rep.mass_balance_error[c] = f1[c] > 0.0 ? std::abs(f1[c] - f0[c] - dt * q[c]) / f1[c] : 0.0;

            s.time = state_.time + dt;
            if (t_stop - s.time <= 1e-9 * std::max(1.0, t_stop))
                s.time = t_stop;
            state_ = std::move(s);
            controls_ = std::move(ctl);
            rep.index = static_cast<int>(reports_.size()) + 1;
            rep.time = state_.time;
            rep.dt = dt;
            rep.resolves = resolves;
            rep.bhp = state_.ph;
            for (const auto& c : controls_)
                rep.control.push_back(c.kind);
            rep.events = std::move(notes);
            if (!events.empty() && state_.time == events.front())
                rep.events.push_back("schedule event");

            const double base = (clipped && rep.cuts == 0) ? dt_ : dt;
            const double factor = last.iterations <= steps_.grow_below   ? steps_.growth
                                  : last.iterations <= steps_.hold_below ? 1.0
                                                                         : steps_.cut;
            dt_ = std::clamp(base * factor, steps_.dt_min, steps_.dt_max);
            reports_.push_back(std::move(rep));
            return reports_.back();
        }

        ++rep.cuts;
        dt *= steps_.cut;
        if (dt < steps_.dt_min) {
            std::ostringstream msg;
            msg << "timestep fell below the minimum at t = " << state_.time / units::day << " days ("
                << last.failure << ")";
            throw NonConvergence(msg.str());
        }
    }
}

void Simulator::advance(double t_end)
{
    while (state_.time < t_end - 1e-9 * std::max(1.0, t_end))
        step(t_end);
}

} // namespace bosim
