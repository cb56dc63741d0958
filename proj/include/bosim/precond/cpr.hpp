#pragma once

#include "bosim/precond/amg.hpp"
#include "bosim/precond/labeling.hpp"
#include "bosim/precond/ras.hpp"

#include <memory>
#include <string>

namespace bosim {

/// Two-stage CPR-FPF preconditioner for a (decoupled) system:
///   x = R^{-1} f;  r = f - A x;  x += P AMG(A_pp)^{-1} Pr r;  r = f - A x;  x += R^{-1} r
/// with R^{-1} one RAS application and AMG^{-1} one V-cycle.
class CprFpfPreconditioner final : public Preconditioner {
public:
    CprFpfPreconditioner(const CsrMatrix& a, const BlockLabeling& labeling, const RasConfig& ras = {},
                         const AmgConfig& amg = {});

    void apply(const DistVector& f, DistVector& x) const override;

    const RasPreconditioner& ras() const noexcept { return ras_; }
    const AmgHierarchy& amg() const noexcept { return amg_; }
    const PressureMap& pressure_map() const noexcept { return map_; }

private:
    const CsrMatrix* a_;
    RasPreconditioner ras_;
    PressureMap map_;
    AmgHierarchy amg_;
};

enum class PrecondKind { None, Ilu0, Ras, Amg, CprFpf };

PrecondKind parse_precond_kind(const std::string& name);
std::string to_string(PrecondKind k);

/// Builds a preconditioner for a. The matrix must outlive the result. The
/// labeling is only used by CPR-FPF. ilu0 is RAS without overlap (block
/// Jacobi; global ILU(0) on one worker).
std::unique_ptr<Preconditioner> make_preconditioner(PrecondKind kind, const CsrMatrix& a, const BlockLabeling& labeling,
                                                    const RasConfig& ras = {}, const AmgConfig& amg = {});

} // namespace bosim
