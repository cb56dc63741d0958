#include "bosim/newton.hpp"

#include "bosim/error.hpp"
#include "bosim/precond/quasi_impes.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace bosim {

ForcingMode parse_forcing_mode(const std::string& s)
{
    if (s == "constant")
        return ForcingMode::Constant;
    if (s == "choice1")
        return ForcingMode::Choice1;
    if (s == "choice2")
        return ForcingMode::Choice2;
    if (s == "choice3")
        return ForcingMode::Choice3;
    throw ConfigError("unknown forcing mode '" + s + "'");
}

std::string to_string(ForcingMode m)
{
    switch (m) {
    case ForcingMode::Constant: return "constant";
    case ForcingMode::Choice1: return "choice1";
    case ForcingMode::Choice2: return "choice2";
    case ForcingMode::Choice3: return "choice3";
    }
    return "?";
}

void NewtonConfig::validate() const
{
    if (!(tol > 0.0))
        throw ConfigError("newton: tolerance must be positive");
    if (!(abs_floor >= 0.0))
        throw ConfigError("newton: absolute floor must be non-negative");
    if (max_iterations < 0)
        throw ConfigError("newton: max iterations must be >= 0");
    if (!(theta_min > 0.0 && theta_min <= theta_max && theta_max < 1.0))
        throw ConfigError("newton: need 0 < theta_min <= theta_max < 1");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw ConfigError("newton: gamma must lie in (0, 1]");
    if (!(beta > 1.0 && beta <= 2.0))
        throw ConfigError("newton: beta must lie in (1, 2]");
    if (!(theta > 0.0 && theta < 1.0))
        throw ConfigError("newton: constant forcing term must lie in (0, 1)");
    if (!(max_saturation_change > 0.0))
        throw ConfigError("newton: saturation change limit must be positive");
    linear.validate();
    amg.validate();
}

double forcing_raw(ForcingMode mode, const ForcingInputs& in, double gamma, double beta)
{
    if (mode == ForcingMode::Constant)
        throw ContractViolation("constant forcing has no raw formula");
    if (!(in.b_prev_norm > 0.0))
        throw ContractViolation("forcing term needs a non-zero previous residual");
    switch (mode) {
    case ForcingMode::Choice1: return in.diff_norm / in.b_prev_norm;
    case ForcingMode::Choice2: return std::abs(in.b_norm - in.r_prev_norm) / in.b_prev_norm;
    case ForcingMode::Choice3: return gamma * std::pow(in.b_norm / in.b_prev_norm, beta);
    case ForcingMode::Constant: break;
    }
    return 0.0;
}

double forcing_term(const NewtonConfig& cfg, const ForcingInputs& in, bool first)
{
    if (cfg.forcing == ForcingMode::Constant)
        return cfg.theta;
    if (first)
        return cfg.theta_max;
    return std::clamp(forcing_raw(cfg.forcing, in, cfg.gamma, cfg.beta), cfg.theta_min, cfg.theta_max);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

} // namespace

NewtonResult newton_solve(const Model& model, const ReservoirState& old_state, ReservoirState& state, double dt,
                          std::span<const Constraint> controls, const NewtonConfig& cfg)
{
    cfg.validate();
    NewtonResult res;
    const auto fip = model.fluid_in_place(old_state);
    const double floor = cfg.abs_floor * (fip[0] + fip[1]) / dt;
    const BlockLabeling labeling = model.labeling();

    model.apply_controls(state, controls);

    try {
        auto t0 = Clock::now();
        LinearSystem sys = model.assemble(old_state, state, dt, controls);
        res.assembly_seconds += seconds_since(t0);
        DistVector b(sys.jacobian.layout_ptr());
        axpby(-1.0, sys.residual, 0.0, b);
        double bnorm = norm2(b);
        const double b0 = bnorm;
        res.residual_norms.push_back(bnorm);

        ForcingInputs fin;
        DistVector r_prev;
        double b_prev = 0.0;

        for (int l = 0;; ++l) {
            if (!std::isfinite(bnorm)) {
                res.failure = "non-finite residual";
                return res;
            }
            if (bnorm <= floor || (l > 0 && bnorm <= cfg.tol * b0) || bnorm == 0.0) {
                res.converged = true;
                return res;
            }
            if (l >= cfg.max_iterations) {
                res.failure = "maximum Newton iterations reached";
                return res;
            }

            if (l > 0) {
                fin.b_norm = bnorm;
                fin.b_prev_norm = b_prev;
                fin.r_prev_norm = norm2(r_prev);
                if (cfg.forcing == ForcingMode::Choice1) {
                    DistVector d(b.layout_ptr());
                    waxpby(d, 1.0, b, -1.0, r_prev);
                    fin.diff_norm = norm2(d);
                }
            }
            const double theta = forcing_term(cfg, fin, l == 0);
            res.thetas.push_back(theta);

            // Linear solve A dx = b to relative accuracy theta.
            t0 = Clock::now();
            const CsrMatrix* a = &sys.jacobian;
            const DistVector* rhs = &b;
            DecoupledSystem dec;
            if (cfg.decouple) {
                dec = quasi_impes_decouple(sys.jacobian, b, labeling);
                a = &dec.a;
                rhs = &dec.b;
            }
            const auto m = make_preconditioner(cfg.precond, *a, labeling, cfg.ras, cfg.amg);
            res.setup_seconds += seconds_since(t0);

            t0 = Clock::now();
            SolverConfig lc = cfg.linear;
            lc.tol = theta;
            DistVector dx(a->layout_ptr());
            const SolveResult sr = krylov_solve(*a, *rhs, dx, lc, m.get());
            res.solve_seconds += seconds_since(t0);
            res.linear_iterations += sr.iterations;
            res.linear_counts.push_back(sr.iterations);

            // Linear residual against the undecoupled system.
            DistVector x(sys.jacobian.layout_ptr());
            x.scatter(dx.gather());
            r_prev = DistVector(sys.jacobian.layout_ptr());
            residual(sys.jacobian, x, b, r_prev);

            const double ds = model.max_saturation_change(state, x);
            const double scale = ds > cfg.max_saturation_change ? cfg.max_saturation_change / ds : 1.0;
            model.update(state, x, scale);
            model.apply_controls(state, controls);
            ++res.iterations;

            b_prev = bnorm;
            t0 = Clock::now();
            sys = model.assemble(old_state, state, dt, controls);
            res.assembly_seconds += seconds_since(t0);
            b = DistVector(sys.jacobian.layout_ptr());
            axpby(-1.0, sys.residual, 0.0, b);
            bnorm = norm2(b);
            res.residual_norms.push_back(bnorm);
            // Layouts of successive Jacobians share row offsets.
            DistVector rp(sys.jacobian.layout_ptr());
            rp.scatter(r_prev.gather());
            r_prev = std::move(rp);
        }
    } catch (const OutOfRange& e) {
        res.failure = e.what();
    } catch (const DivergenceError& e) {
        res.failure = e.what();
    } catch (const FactorizationError& e) {
        res.failure = e.what();
    }
    return res;
}

} // namespace bosim
