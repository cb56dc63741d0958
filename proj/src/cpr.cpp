#include "bosim/precond/cpr.hpp"

#include "bosim/error.hpp"

namespace bosim {

CprFpfPreconditioner::CprFpfPreconditioner(const CsrMatrix& a, const BlockLabeling& labeling, const RasConfig& ras,
                                           const AmgConfig& amg)
    : a_(&a), ras_(a, ras), map_(labeling), amg_()
{
    if (labeling.size() != a.global_size())
        throw ContractViolation("CPR-FPF: labeling size does not match the matrix");
    if (map_.size() == 0)
        throw ConfigError("CPR-FPF: labeling has no pressure unknowns");
    amg_ = amg_setup(map_.extract(a), amg);
}

void CprFpfPreconditioner::apply(const DistVector& f, DistVector& x) const
{
    const auto& layout = a_->layout_ptr();
    DistVector xs(layout), r(layout), z(layout);
    std::vector<double> rp, xp(static_cast<std::size_t>(map_.size()));

    ras_.apply(f, xs);
    residual(*a_, xs, f, r);
    map_.restrict_to(r, rp);
    amg_.vcycle(rp, xp);
    map_.prolong_add(xp, xs);
    residual(*a_, xs, f, r);
    ras_.apply(r, z);
    waxpby(x, 1.0, xs, 1.0, z);
}

PrecondKind parse_precond_kind(const std::string& name)
{
    if (name == "none")
        return PrecondKind::None;
    if (name == "ilu0")
        return PrecondKind::Ilu0;
    if (name == "ras")
        return PrecondKind::Ras;
    if (name == "amg")
        return PrecondKind::Amg;
    if (name == "cpr-fpf" || name == "cpr")
        return PrecondKind::CprFpf;
    throw ConfigError("unknown preconditioner '" + name + "'");
}

std::string to_string(PrecondKind k)
{
    switch (k) {
    case PrecondKind::None: return "none";
    case PrecondKind::Ilu0: return "ilu0";
    case PrecondKind::Ras: return "ras";
    case PrecondKind::Amg: return "amg";
    case PrecondKind::CprFpf: return "cpr-fpf";
    }
    return "?";
}

std::unique_ptr<Preconditioner> make_preconditioner(PrecondKind kind, const CsrMatrix& a, const BlockLabeling& labeling,
                                                    const RasConfig& ras, const AmgConfig& amg)
{
    switch (kind) {
    case PrecondKind::None: return std::make_unique<IdentityPreconditioner>();
    case PrecondKind::Ilu0: return std::make_unique<RasPreconditioner>(a, RasConfig{0});
    case PrecondKind::Ras: return std::make_unique<RasPreconditioner>(a, ras);
    case PrecondKind::Amg: return std::make_unique<AmgPreconditioner>(a, amg);
    case PrecondKind::CprFpf: return std::make_unique<CprFpfPreconditioner>(a, labeling, ras, amg);
    }
    throw ConfigError("unknown preconditioner");
}

} // namespace bosim
