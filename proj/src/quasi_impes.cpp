#include "bosim/precond/quasi_impes.hpp"

#include "bosim/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace bosim {

namespace {

// Solves the small dense system m x = r in place (partial pivoting).
bool small_solve(std::vector<std::vector<double>> m, std::vector<double>& r)
{
    const std::size_t n = r.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t i = c + 1; i < n; ++i)
            if (std::abs(m[i][c]) > std::abs(m[piv][c]))
                piv = i;
        if (m[piv][c] == 0.0 || !std::isfinite(m[piv][c]))
            return false;
        std::swap(m[c], m[piv]);
        std::swap(r[c], r[piv]);
        for (std::size_t i = c + 1; i < n; ++i) {
            const double f = m[i][c] / m[c][c];
            for (std::size_t j = c; j < n; ++j)
                m[i][j] -= f * m[c][j];
            r[i] -= f * r[c];
        }
    }
    for (std::size_t c = n; c-- > 0;) {
        double s = r[c];
        for (std::size_t j = c + 1; j < n; ++j)
            s -= m[c][j] * r[j];
        r[c] = s / m[c][c];
    }
    return true;
}

double entry(const CsrMatrix::RowView& row, Index col)
{
    const auto it = std::lower_bound(row.gcols.begin(), row.gcols.end(), col);
    if (it == row.gcols.end() || *it != col)
        return 0.0;
    return row.vals[static_cast<std::size_t>(it - row.gcols.begin())];
}

} // namespace

DecoupledSystem quasi_impes_decouple(const CsrMatrix& a, const DistVector& b, const BlockLabeling& labeling)
{
    labeling.validate();
    const Layout& l = a.layout();
    if (labeling.size() != l.global_size() || !b.layout().same_rows(l))
        throw ContractViolation("quasi-IMPES: labeling or vector size does not match the matrix");

    // Saturation unknowns per cell group, keyed by the group's pressure unknown.
    std::map<Index, Index> pressure_of_group;
    for (Index i = 0; i < labeling.size(); ++i)
        if (labeling.kind[static_cast<std::size_t>(i)] == UnknownKind::Pressure)
            pressure_of_group[labeling.group[static_cast<std::size_t>(i)]] = i;
    std::vector<std::vector<Index>> sats(static_cast<std::size_t>(labeling.size()));
    for (Index i = 0; i < labeling.size(); ++i) {
        if (labeling.kind[static_cast<std::size_t>(i)] != UnknownKind::Saturation)
            continue;
        const auto it = pressure_of_group.find(labeling.group[static_cast<std::size_t>(i)]);
        if (it != pressure_of_group.end())
            sats[static_cast<std::size_t>(it->second)].push_back(i);
    }

    const int np = l.num_workers();
    std::vector<CsrMatrix::RowBlock> rows(static_cast<std::size_t>(np));
    std::vector<std::vector<double>> rhs(static_cast<std::size_t>(np));
    std::vector<Index> skipped(static_cast<std::size_t>(np), 0);

    l.pool().run([&](int w) {
        auto& rb = rows[static_cast<std::size_t>(w)];
        auto& bw = rhs[static_cast<std::size_t>(w)];
        const auto bo = b.owned(w);
        bw.assign(bo.begin(), bo.end());
        std::vector<std::pair<Index, double>> merged;
        for (Index g = l.begin(w); g < l.end(w); ++g) {
            const auto row = a.row(g);
            const auto& s = sats[static_cast<std::size_t>(g)];
            std::vector<double> weights;
            bool ok = false;
            if (!s.empty()) {
                std::vector<std::vector<double>> dss(s.size(), std::vector<double>(s.size()));
                weights.resize(s.size());
                for (std::size_t r = 0; r < s.size(); ++r) {
                    const auto srow = a.row(s[r]);
                    for (std::size_t c = 0; c < s.size(); ++c)
                        dss[c][r] = entry(srow, s[c]); // transposed block
                    weights[r] = entry(row, s[r]);
                }
                const bool nonzero = std::any_of(weights.begin(), weights.end(), [](double v) { return v != 0.0; });
                ok = nonzero && small_solve(std::move(dss), weights);
                if (nonzero && !ok)
                    ++skipped[static_cast<std::size_t>(w)];
            }
            merged.clear();
            for (std::size_t k = 0; k < row.gcols.size(); ++k)
                merged.emplace_back(row.gcols[k], row.vals[k]);
            if (ok) {
                const auto local = static_cast<std::size_t>(g - l.begin(w));
                for (std::size_t r = 0; r < s.size(); ++r) {
                    const auto srow = a.row(s[r]);
                    for (std::size_t k = 0; k < srow.gcols.size(); ++k)
                        merged.emplace_back(srow.gcols[k], -weights[r] * srow.vals[k]);
                    bw[local] -= weights[r] * b.get(s[r]);
                }
            }
            std::sort(merged.begin(), merged.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
            for (std::size_t k = 0; k < merged.size(); ++k) {
                if (k > 0 && merged[k].first == merged[k - 1].first) {
                    rb.vals.back() += merged[k].second;
                    continue;
                }
                rb.gcols.push_back(merged[k].first);
                rb.vals.push_back(merged[k].second);
            }
            // Cell-local A_ps entries cancel exactly in exact arithmetic;
            // drop the round-off.
            if (ok)
                for (std::size_t k = static_cast<std::size_t>(rb.row_ptr.back()); k < rb.gcols.size(); ++k)
                    if (std::find(s.begin(), s.end(), rb.gcols[k]) != s.end())
                        rb.vals[k] = 0.0;
            rb.row_ptr.push_back(static_cast<Index>(rb.gcols.size()));
        }
    });

    DecoupledSystem out{a.with_rows(std::move(rows)), DistVector(), 0};
    for (Index s : skipped)
        out.skipped_cells += s;
    out.b = DistVector(out.a.layout_ptr());
    for (int w = 0; w < np; ++w) {
        auto o = out.b.owned(w);
        std::copy(rhs[static_cast<std::size_t>(w)].begin(), rhs[static_cast<std::size_t>(w)].end(), o.begin());
    }
    return out;
}

} // namespace bosim
