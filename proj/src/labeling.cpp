#include "bosim/precond/labeling.hpp"

#include "bosim/error.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace bosim {

std::vector<Index> BlockLabeling::pressure_unknowns() const
{
    std::vector<Index> p;
    for (Index i = 0; i < size(); ++i)
        if (kind[static_cast<std::size_t>(i)] == UnknownKind::Pressure)
            p.push_back(i);
    return p;
}

BlockLabeling BlockLabeling::all_pressure(Index n)
{
    BlockLabeling l;
    l.kind.assign(static_cast<std::size_t>(n), UnknownKind::Pressure);
    l.group.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        l.group[static_cast<std::size_t>(i)] = i;
    return l;
}

void BlockLabeling::validate() const
{
    if (kind.size() != group.size())
        throw ConfigError("labeling: kind and group arrays differ in length");
    for (std::size_t i = 0; i < kind.size(); ++i) {
        if (kind[i] == UnknownKind::Well && group[i] != -1)
            throw ConfigError("labeling: well unknowns must use group -1");
        if (kind[i] != UnknownKind::Well && group[i] < 0)
            throw ConfigError("labeling: cell unknowns need a non-negative group");
    }
}

PressureMap::PressureMap(const BlockLabeling& labeling)
    : index_(labeling.pressure_unknowns()), position_(static_cast<std::size_t>(labeling.size()), -1)
{
    for (std::size_t k = 0; k < index_.size(); ++k)
        position_[static_cast<std::size_t>(index_[k])] = static_cast<Index>(k);
}

std::pair<std::size_t, std::size_t> PressureMap::owned_range(const Layout& l, int w) const
{
    const auto first = std::lower_bound(index_.begin(), index_.end(), l.begin(w));
    const auto last = std::lower_bound(first, index_.end(), l.end(w));
    return {static_cast<std::size_t>(first - index_.begin()), static_cast<std::size_t>(last - index_.begin())};
}

void PressureMap::restrict_to(const DistVector& full, std::vector<double>& out) const
{
    out.resize(index_.size());
    const Layout& l = full.layout();
    l.pool().run([&](int w) {
        auto o = full.owned(w);
        const Index b = l.begin(w);
        const auto [first, last] = owned_range(l, w);
        for (std::size_t k = first; k < last; ++k)
            out[k] = o[static_cast<std::size_t>(index_[k] - b)];
    });
}

void PressureMap::prolong_add(const std::vector<double>& p, DistVector& full) const
{
    const Layout& l = full.layout();
    l.pool().run([&](int w) {
        auto o = full.owned(w);
        const Index b = l.begin(w);
        const auto [first, last] = owned_range(l, w);
        for (std::size_t k = first; k < last; ++k)
            o[static_cast<std::size_t>(index_[k] - b)] += p[k];
    });
}

SparseMatrix PressureMap::extract(const CsrMatrix& a) const
{
    SparseMatrix s;
    s.rows = s.cols = size();
    s.row_ptr.assign(1, 0);
    for (Index g : index_) {
        const auto row = a.row(g);
        for (std::size_t k = 0; k < row.gcols.size(); ++k) {
            const Index pc = position_[static_cast<std::size_t>(row.gcols[k])];
            if (pc >= 0) {
                s.col.push_back(pc);
                s.val.push_back(row.vals[k]);
            }
        }
        s.row_ptr.push_back(static_cast<Index>(s.col.size()));
    }
    return s;
}

BlockLabeling read_labeling(std::istream& in)
{
    BlockLabeling l;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string kind;
        if (!(ss >> kind) || kind[0] == '#')
            continue;
        Index group = 0;
        if (!(ss >> group))
            throw ParseError("labeling: expected '<kind> <group>'", "labeling", lineno, 1);
        if (kind == "p")
            l.kind.push_back(UnknownKind::Pressure);
        else if (kind == "s")
            l.kind.push_back(UnknownKind::Saturation);
        else if (kind == "w")
            l.kind.push_back(UnknownKind::Well);
        else
            throw ParseError("labeling: unknown kind '" + kind + "'", "labeling", lineno, 1);
        l.group.push_back(group);
    }
    l.validate();
    return l;
}

void write_labeling(std::ostream& out, const BlockLabeling& labeling)
{
    out << "# kind group\n";
    for (std::size_t i = 0; i < labeling.kind.size(); ++i) {
        const char k = labeling.kind[i] == UnknownKind::Pressure ? 'p'
                       : labeling.kind[i] == UnknownKind::Saturation ? 's'
                                                                      : 'w';
        out << k << ' ' << labeling.group[i] << '\n';
    }
}

} // namespace bosim
