#pragma once

#include "bosim/linalg/distributed.hpp"
#include "bosim/precond/labeling.hpp"

namespace bosim {

struct DecoupledSystem {
    CsrMatrix a;
    DistVector b;        // on a's layout
    Index skipped_cells; // cells whose saturation block was singular
};

/// Quasi-IMPES decoupling. For every cell, the pressure row is replaced by
/// pressure_row - sum_k w_k saturation_row_k where w solves D_ss^T w = D_ps^T,
/// with D_ps the cell's pressure-row entries at its own saturation unknowns and
/// D_ss the cell's saturation block. Afterwards the cell-local A_ps entries are
/// zero. The same combination is applied to b. Well rows are untouched.
DecoupledSystem quasi_impes_decouple(const CsrMatrix& a, const DistVector& b, const BlockLabeling& labeling);

} // namespace bosim
