#pragma once

#include "bosim/linalg/distributed.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace bosim {

enum class UnknownKind : unsigned char { Pressure = 0, Saturation = 1, Well = 2 };

/// Kind of every global unknown plus the cell it belongs to, which recovers
/// the A_pp / A_ss / A_ww block structure without physically reordering rows.
/// Unknowns sharing a group id belong to the same cell; wells use group -1.
struct BlockLabeling {
    std::vector<UnknownKind> kind;
    std::vector<Index> group;

    Index size() const noexcept { return static_cast<Index>(kind.size()); }

    /// Global ids of the pressure unknowns, ascending. Position in this list is
    /// the index in the pressure space.
    std::vector<Index> pressure_unknowns() const;

    /// Every unknown is pressure-kind (scalar system).
    static BlockLabeling all_pressure(Index n);

    void validate() const;
};

/// Restriction onto the pressure space (Pi_r) and prolongation back (Pi_p).
class PressureMap {
public:
    PressureMap() = default;
    explicit PressureMap(const BlockLabeling& labeling);

    Index size() const noexcept { return static_cast<Index>(index_.size()); }
    const std::vector<Index>& unknowns() const noexcept { return index_; }

    /// out[k] = full[pressure_unknown k]
    void restrict_to(const DistVector& full, std::vector<double>& out) const;
    /// full[pressure_unknown k] += p[k]
    void prolong_add(const std::vector<double>& p, DistVector& full) const;

    /// A_pp as a serial matrix in pressure-space numbering.
    SparseMatrix extract(const CsrMatrix& a) const;

private:
    std::pair<std::size_t, std::size_t> owned_range(const Layout& l, int w) const;

    std::vector<Index> index_;
    std::vector<Index> position_; // global unknown -> pressure index or -1
};

/// Sidecar text format: one line per unknown, "<kind> <group>" where kind is
/// p, s or w. Blank lines and lines starting with '#' are skipped.
BlockLabeling read_labeling(std::istream& in);
void write_labeling(std::ostream& out, const BlockLabeling& labeling);

} // namespace bosim
