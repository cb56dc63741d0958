#pragma once

#include "bosim/linalg/krylov.hpp"
#include "bosim/precond/ilu0.hpp"

#include <vector>

namespace bosim {

struct RasConfig {
    int overlap = 1; // graph distance added around each worker's rows
};

/// Restricted additive Schwarz. Each worker factors (ILU(0)) the submatrix on
/// its rows grown by `overlap` levels of the matrix graph; apply gathers the
/// residual on the overlapped set, solves locally without communication, and
/// keeps only the owned part of the local solution.
class RasPreconditioner final : public Preconditioner {
public:
    RasPreconditioner(const CsrMatrix& a, const RasConfig& cfg = {});

    void apply(const DistVector& r, DistVector& z) const override;

    /// Overlapped index set of worker w, ascending global ids.
    const std::vector<Index>& domain(int w) const { return domains_[static_cast<std::size_t>(w)].rows; }

private:
    struct Domain {
        std::vector<Index> rows;     // ascending global ids (owned and overlap)
        std::vector<Index> owned_at; // positions in rows of the owned block, in order
        Ilu0 ilu;
    };

    std::shared_ptr<const Layout> layout_;
    std::vector<Domain> domains_;
};

} // namespace bosim
