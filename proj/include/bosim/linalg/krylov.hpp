#pragma once

#include "bosim/linalg/distributed.hpp"

#include <string>
#include <vector>

namespace bosim {

/// Linear operator M^{-1} applied on the right of the system matrix.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    /// z = M^{-1} r. z must use the layout of the system matrix.
    virtual void apply(const DistVector& r, DistVector& z) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
public:
    void apply(const DistVector& r, DistVector& z) const override { copy(r, z); }
};

enum class KrylovMethod { Gmres, Bicgstab, Orthomin };

KrylovMethod parse_krylov_method(const std::string& name);
std::string to_string(KrylovMethod m);

struct SolverConfig {
    KrylovMethod method = KrylovMethod::Gmres;
    int restart = 30;          // GMRES(m) cycle length
    int orthomin_k = 5;        // Orthomin truncation
    double tol = 1e-6;         // on ||b - A x|| / ||b||
    int max_iterations = 100;
    int fixed_iterations = 0;  // > 0: run exactly this many iterations, ignoring tol

    void validate() const;
};

struct SolveResult {
    int iterations = 0;
    bool converged = false;
    double relative_residual = 0.0; // true residual, recomputed at exit
    std::vector<double> history;    // relative residual after each iteration (estimate)
};

/// Restarted right-preconditioned GMRES(m).
SolveResult gmres(const CsrMatrix& a, const DistVector& b, DistVector& x, const SolverConfig& cfg,
                  const Preconditioner* m = nullptr);

/// Right-preconditioned BiCGSTAB. One restart from the current residual is
/// allowed after a breakdown; a second breakdown raises DivergenceError.
SolveResult bicgstab(const CsrMatrix& a, const DistVector& b, DistVector& x, const SolverConfig& cfg,
                     const Preconditioner* m = nullptr);

/// Right-preconditioned Orthomin(k).
SolveResult orthomin(const CsrMatrix& a, const DistVector& b, DistVector& x, const SolverConfig& cfg,
                     const Preconditioner* m = nullptr);

/// Dispatches on cfg.method.
SolveResult krylov_solve(const CsrMatrix& a, const DistVector& b, DistVector& x, const SolverConfig& cfg,
                         const Preconditioner* m = nullptr);

} // namespace bosim
