#pragma once

#include "bosim/linalg/krylov.hpp"
#include "bosim/model.hpp"
#include "bosim/precond/cpr.hpp"

#include <string>
#include <vector>

namespace bosim {

enum class ForcingMode { Constant, Choice1, Choice2, Choice3 };

ForcingMode parse_forcing_mode(const std::string& s);
std::string to_string(ForcingMode m);

struct NewtonConfig {
    double tol = 1e-3;           // on ||b|| relative to the first iterate
    double abs_floor = 1e-6;     // absolute floor, times fluid in place / dt
    int max_iterations = 15;
    ForcingMode forcing = ForcingMode::Choice3;
    double theta = 1e-4;         // constant mode
    double gamma = 0.9, beta = 2.0;
    double theta_min = 1e-4, theta_max = 0.9;
    double max_saturation_change = 0.2;

    SolverConfig linear{KrylovMethod::Gmres, 30, 5, 1e-4, 200, 0};
    PrecondKind precond = PrecondKind::CprFpf;
    bool decouple = true;        // Quasi-IMPES before the solve
    RasConfig ras;
    AmgConfig amg;

    void validate() const;
};

/// Norms entering the forcing term at iteration l.
struct ForcingInputs {
    double b_norm = 0.0;       // ||b(x^l)||
    double b_prev_norm = 0.0;  // ||b(x^{l-1})||
    double r_prev_norm = 0.0;  // ||r^{l-1}||, final linear residual of the previous solve
    double diff_norm = 0.0;    // ||b(x^l) - r^{l-1}||
};

/// Unclamped forcing term. Throws ContractViolation when b_prev_norm is zero.
double forcing_raw(ForcingMode mode, const ForcingInputs& in, double gamma, double beta);

/// Forcing term for iteration l; first selects theta_max (or theta in
/// constant mode). Adaptive modes are clamped into [theta_min, theta_max].
double forcing_term(const NewtonConfig& cfg, const ForcingInputs& in, bool first);

struct NewtonResult {
    bool converged = false;
    int iterations = 0;
    int linear_iterations = 0;
    std::vector<double> residual_norms;
    std::vector<int> linear_counts;
    std::vector<double> thetas;
    double assembly_seconds = 0.0, setup_seconds = 0.0, solve_seconds = 0.0;
    std::string failure;
};

/// Inexact Newton on the implicit step from old_state. `state` holds the
/// initial guess and receives the final iterate. Property-range, factorization
/// and Krylov breakdown errors end the solve as non-converged.
NewtonResult newton_solve(const Model& model, const ReservoirState& old_state, ReservoirState& state, double dt,
                          std::span<const Constraint> controls, const NewtonConfig& cfg);

} // namespace bosim
