#include "bosim/precond/ras.hpp"

#include "bosim/error.hpp"

#include <algorithm>

namespace bosim {

RasPreconditioner::RasPreconditioner(const CsrMatrix& a, const RasConfig& cfg) : layout_(a.layout_ptr())
{
    if (cfg.overlap < 0)
        throw ConfigError("RAS: overlap must be >= 0");
    const Layout& l = *layout_;
    domains_.resize(static_cast<std::size_t>(l.num_workers()));

    l.pool().run([&](int w) {
        Domain& d = domains_[static_cast<std::size_t>(w)];
        std::vector<Index> set;
        for (Index g = l.begin(w); g < l.end(w); ++g)
            set.push_back(g);
        std::vector<Index> frontier = set;
        for (int level = 0; level < cfg.overlap; ++level) {
            std::vector<Index> next;
            for (Index g : frontier)
                for (Index c : a.row(g).gcols)
                    next.push_back(c);
            std::sort(next.begin(), next.end());
            next.erase(std::unique(next.begin(), next.end()), next.end());
            std::vector<Index> added;
            std::set_difference(next.begin(), next.end(), set.begin(), set.end(), std::back_inserter(added));
            if (added.empty())
                break;
            std::vector<Index> merged;
            std::merge(set.begin(), set.end(), added.begin(), added.end(), std::back_inserter(merged));
            set.swap(merged);
            frontier.swap(added);
        }
        d.rows = std::move(set);
        const auto first = std::lower_bound(d.rows.begin(), d.rows.end(), l.begin(w));
        for (Index g = l.begin(w); g < l.end(w); ++g)
            d.owned_at.push_back(static_cast<Index>(first - d.rows.begin()) + (g - l.begin(w)));

        // Local matrix: rows of the set, columns restricted to the set.
        SparseMatrix sub;
        sub.rows = sub.cols = static_cast<Index>(d.rows.size());
        sub.row_ptr.assign(1, 0);
        for (Index g : d.rows) {
            const auto row = a.row(g);
            for (std::size_t k = 0; k < row.gcols.size(); ++k) {
                const auto it = std::lower_bound(d.rows.begin(), d.rows.end(), row.gcols[k]);
                if (it != d.rows.end() && *it == row.gcols[k]) {
                    sub.col.push_back(static_cast<Index>(it - d.rows.begin()));
                    sub.val.push_back(row.vals[k]);
                }
            }
            sub.row_ptr.push_back(static_cast<Index>(sub.col.size()));
        }
        d.ilu = Ilu0(sub);
    });
}

void RasPreconditioner::apply(const DistVector& r, DistVector& z) const
{
    const Layout& l = *layout_;
    if (!r.layout().same_rows(l) || !z.layout().same_rows(l))
        throw ContractViolation("RAS: vector layout does not match the matrix");
    // Workers read r from any owner (overlap gather) and write only their own
    // rows of z.
    l.pool().run([&](int w) {
        const Domain& d = domains_[static_cast<std::size_t>(w)];
        std::vector<double> rhs(d.rows.size()), sol(d.rows.size());
        for (std::size_t k = 0; k < d.rows.size(); ++k)
            rhs[k] = r.get(d.rows[k]);
        d.ilu.solve(rhs, sol);
        auto zo = z.owned(w);
        for (std::size_t i = 0; i < d.owned_at.size(); ++i)
            zo[i] = sol[static_cast<std::size_t>(d.owned_at[i])];
    });
}

} // namespace bosim
