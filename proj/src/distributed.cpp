#include "bosim/linalg/distributed.hpp"

#include "bosim/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace bosim {

// ---------------------------------------------------------------------------
// Layout

Layout::Layout(std::shared_ptr<WorkerPool> pool, std::vector<Index> offsets, std::vector<std::vector<Index>> ghosts)
    : pool_(std::move(pool)), offsets_(std::move(offsets)), ghosts_(std::move(ghosts))
{
    const int np = static_cast<int>(offsets_.size()) - 1;
    if (np < 1 || offsets_.front() != 0)
        throw ContractViolation("Layout: offsets must start at 0 and describe at least one worker");
    if (np != pool_->size())
        throw ContractViolation("Layout: offsets do not match the worker count");
    for (int w = 0; w < np; ++w)
        if (offsets_[static_cast<std::size_t>(w) + 1] < offsets_[static_cast<std::size_t>(w)])
            throw ContractViolation("Layout: offsets must be nondecreasing");
    ghosts_.resize(static_cast<std::size_t>(np));

    recv_.resize(static_cast<std::size_t>(np));
    send_.resize(static_cast<std::size_t>(np));
    std::vector<std::map<int, Link>> by_peer(static_cast<std::size_t>(np));
    for (int w = 0; w < np; ++w) {
        auto& g = ghosts_[static_cast<std::size_t>(w)];
        if (!std::is_sorted(g.begin(), g.end()) || std::adjacent_find(g.begin(), g.end()) != g.end())
            throw ContractViolation("Layout: ghost list must be sorted and unique");
        for (std::size_t s = 0; s < g.size(); ++s) {
            const int o = owner(g[s]);
            if (o == w)
                throw ContractViolation("Layout: a worker cannot ghost its own row");
            auto& link = by_peer[static_cast<std::size_t>(w)][o];
            link.peer = o;
            link.local.push_back(g[s] - begin(o));
            link.slot.push_back(nlocal(w) + static_cast<Index>(s));
        }
    }
    for (int w = 0; w < np; ++w)
        for (auto& [peer, link] : by_peer[static_cast<std::size_t>(w)]) {
            send_[static_cast<std::size_t>(peer)].push_back({w, link.local, link.slot});
            recv_[static_cast<std::size_t>(w)].push_back(std::move(link));
        }
}

std::shared_ptr<const Layout> Layout::plain(std::shared_ptr<WorkerPool> pool, std::vector<Index> offsets)
{
    return std::make_shared<const Layout>(std::move(pool), std::move(offsets), std::vector<std::vector<Index>>{});
}

std::vector<Index> Layout::even_offsets(Index n, int workers)
{
    std::vector<Index> off(static_cast<std::size_t>(workers) + 1, 0);
    const Index base = n / workers, extra = n % workers;
    for (int w = 0; w < workers; ++w)
        off[static_cast<std::size_t>(w) + 1] = off[static_cast<std::size_t>(w)] + base + (w < extra ? 1 : 0);
    return off;
}

int Layout::owner(Index global) const
{
    if (global < 0 || global >= global_size())
        throw ContractViolation("Layout: global index out of range");
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), global);
    return static_cast<int>(it - offsets_.begin()) - 1;
}

Index Layout::local_index(int w, Index global) const
{
    if (global >= begin(w) && global < end(w))
        return global - begin(w);
    const auto& g = ghosts_[static_cast<std::size_t>(w)];
    const auto it = std::lower_bound(g.begin(), g.end(), global);
    if (it == g.end() || *it != global)
        return -1;
    return nlocal(w) + static_cast<Index>(it - g.begin());
}

Index Layout::global_index(int w, Index local) const
{
    if (local < nlocal(w))
        return begin(w) + local;
    return ghosts_[static_cast<std::size_t>(w)][static_cast<std::size_t>(local - nlocal(w))];
}

// ---------------------------------------------------------------------------
// DistVector

DistVector::DistVector(std::shared_ptr<const Layout> layout, double fill_value) : layout_(std::move(layout))
{
    parts_.resize(static_cast<std::size_t>(layout_->num_workers()));
    for (int w = 0; w < layout_->num_workers(); ++w)
        parts_[static_cast<std::size_t>(w)].assign(static_cast<std::size_t>(layout_->localsize(w)), fill_value);
}

std::span<double> DistVector::owned(int w)
{
    return std::span<double>(parts_[static_cast<std::size_t>(w)]).first(static_cast<std::size_t>(layout_->nlocal(w)));
}

std::span<const double> DistVector::owned(int w) const
{
    return std::span<const double>(parts_[static_cast<std::size_t>(w)])
        .first(static_cast<std::size_t>(layout_->nlocal(w)));
}

void DistVector::exchange_ghosts()
{
    const Layout& l = *layout_;
    l.pool().run([&](int w) {
        auto& mine = parts_[static_cast<std::size_t>(w)];
        for (const auto& link : l.receives(w)) {
            const auto& src = parts_[static_cast<std::size_t>(link.peer)];
            for (std::size_t k = 0; k < link.local.size(); ++k)
                mine[static_cast<std::size_t>(link.slot[k])] = src[static_cast<std::size_t>(link.local[k])];
        }
    });
}

double DistVector::get(Index global) const
{
    const int o = layout_->owner(global);
    return parts_[static_cast<std::size_t>(o)][static_cast<std::size_t>(global - layout_->begin(o))];
}

void DistVector::set(Index global, double v)
{
    const int o = layout_->owner(global);
    parts_[static_cast<std::size_t>(o)][static_cast<std::size_t>(global - layout_->begin(o))] = v;
}

std::vector<double> DistVector::gather() const
{
    std::vector<double> g(static_cast<std::size_t>(global_size()));
    for (int w = 0; w < layout_->num_workers(); ++w) {
        auto o = owned(w);
        std::copy(o.begin(), o.end(), g.begin() + layout_->begin(w));
    }
    return g;
}

void DistVector::scatter(std::span<const double> global)
{
    if (static_cast<Index>(global.size()) != global_size())
        throw ContractViolation("DistVector::scatter: size mismatch");
    for (int w = 0; w < layout_->num_workers(); ++w) {
        auto o = owned(w);
        std::copy(global.begin() + layout_->begin(w), global.begin() + layout_->end(w), o.begin());
    }
}

// ---------------------------------------------------------------------------
// CsrMatrix

CsrMatrix::CsrMatrix(std::shared_ptr<WorkerPool> pool, std::vector<Index> offsets, std::vector<RowBlock> rows)
{
    const int np = static_cast<int>(offsets.size()) - 1;
    if (static_cast<int>(rows.size()) != np)
        throw ContractViolation("CsrMatrix: one row block per worker required");

    parts_.resize(static_cast<std::size_t>(np));
    std::vector<std::vector<Index>> ghosts(static_cast<std::size_t>(np));
    const Index n = offsets.back();
    for (int w = 0; w < np; ++w) {
        const RowBlock& rb = rows[static_cast<std::size_t>(w)];
        const Index nrows = offsets[static_cast<std::size_t>(w) + 1] - offsets[static_cast<std::size_t>(w)];
        if (static_cast<Index>(rb.row_ptr.size()) != nrows + 1)
            throw ContractViolation("CsrMatrix: row block size does not match offsets");
        Part& p = parts_[static_cast<std::size_t>(w)];
        p.row_ptr.assign(1, 0);
        std::vector<std::pair<Index, double>> row;
        for (Index i = 0; i < nrows; ++i) {
            row.clear();
            for (Index k = rb.row_ptr[static_cast<std::size_t>(i)]; k < rb.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
                const Index c = rb.gcols[static_cast<std::size_t>(k)];
                if (c < 0 || c >= n)
                    throw ContractViolation("CsrMatrix: column index out of range");
                row.emplace_back(c, rb.vals[static_cast<std::size_t>(k)]);
            }
            std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            for (std::size_t k = 0; k < row.size(); ++k) {
                if (k > 0 && row[k].first == row[k - 1].first) {
                    p.vals.back() += row[k].second;
                    continue;
                }
                p.gcols.push_back(row[k].first);
                p.vals.push_back(row[k].second);
            }
            p.row_ptr.push_back(static_cast<Index>(p.gcols.size()));
        }
        const Index b = offsets[static_cast<std::size_t>(w)], e = offsets[static_cast<std::size_t>(w) + 1];
        auto& g = ghosts[static_cast<std::size_t>(w)];
        for (Index c : p.gcols)
            if (c < b || c >= e)
                g.push_back(c);
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
    }
    layout_ = std::make_shared<const Layout>(std::move(pool), std::move(offsets), std::move(ghosts));
    for (int w = 0; w < np; ++w) {
        Part& p = parts_[static_cast<std::size_t>(w)];
        p.cols.resize(p.gcols.size());
        for (std::size_t k = 0; k < p.gcols.size(); ++k)
            p.cols[k] = layout_->local_index(w, p.gcols[k]);
    }
}

CsrMatrix CsrMatrix::from_global(std::shared_ptr<WorkerPool> pool, const SparseMatrix& a, std::vector<Index> offsets)
{
    if (a.rows != a.cols || offsets.back() != a.rows)
        throw ContractViolation("CsrMatrix::from_global: matrix must be square and match offsets");
    const int np = static_cast<int>(offsets.size()) - 1;
    std::vector<RowBlock> rows(static_cast<std::size_t>(np));
    for (int w = 0; w < np; ++w) {
        RowBlock& rb = rows[static_cast<std::size_t>(w)];
        for (Index i = offsets[static_cast<std::size_t>(w)]; i < offsets[static_cast<std::size_t>(w) + 1]; ++i) {
            for (Index k = a.row_ptr[static_cast<std::size_t>(i)]; k < a.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
                rb.gcols.push_back(a.col[static_cast<std::size_t>(k)]);
                rb.vals.push_back(a.val[static_cast<std::size_t>(k)]);
            }
            rb.row_ptr.push_back(static_cast<Index>(rb.gcols.size()));
        }
    }
    return CsrMatrix(std::move(pool), std::move(offsets), std::move(rows));
}

CsrMatrix::RowView CsrMatrix::row(Index global_row) const
{
    const int o = layout_->owner(global_row);
    const Part& p = parts_[static_cast<std::size_t>(o)];
    const auto i = static_cast<std::size_t>(global_row - layout_->begin(o));
    const auto b = static_cast<std::size_t>(p.row_ptr[i]);
    const auto len = static_cast<std::size_t>(p.row_ptr[i + 1] - p.row_ptr[i]);
    return {std::span<const Index>(p.gcols).subspan(b, len), std::span<const double>(p.vals).subspan(b, len)};
}

Index CsrMatrix::find(Index global_row, Index global_col) const
{
    const int o = layout_->owner(global_row);
    const Part& p = parts_[static_cast<std::size_t>(o)];
    const auto i = static_cast<std::size_t>(global_row - layout_->begin(o));
    const auto b = p.gcols.begin() + p.row_ptr[i];
    const auto e = p.gcols.begin() + p.row_ptr[i + 1];
    const auto it = std::lower_bound(b, e, global_col);
    return (it != e && *it == global_col) ? static_cast<Index>(it - p.gcols.begin()) : -1;
}

void CsrMatrix::set_zero()
{
    for (auto& p : parts_)
        std::fill(p.vals.begin(), p.vals.end(), 0.0);
}

std::size_t CsrMatrix::nnz() const
{
    std::size_t n = 0;
    for (const auto& p : parts_)
        n += p.vals.size();
    return n;
}

SparseMatrix CsrMatrix::to_global() const
{
    SparseMatrix a;
    a.rows = a.cols = global_size();
    a.row_ptr.assign(1, 0);
    for (int w = 0; w < num_workers(); ++w) {
        const Part& p = parts_[static_cast<std::size_t>(w)];
        a.col.insert(a.col.end(), p.gcols.begin(), p.gcols.end());
        a.val.insert(a.val.end(), p.vals.begin(), p.vals.end());
        const Index base = a.row_ptr.back();
        for (std::size_t i = 1; i < p.row_ptr.size(); ++i)
            a.row_ptr.push_back(base + p.row_ptr[i]);
    }
    return a;
}

CsrMatrix CsrMatrix::with_rows(std::vector<RowBlock> rows) const
{
    return CsrMatrix(layout_->pool_ptr(), layout_->offsets(), std::move(rows));
}

// ---------------------------------------------------------------------------
// Operations

namespace {

void require_same_rows(const DistVector& a, const DistVector& b)
{
    if (&a.layout() != &b.layout() && !a.layout().same_rows(b.layout()))
        throw ContractViolation("vector layouts differ");
}

} // namespace

double dot(const DistVector& x, const DistVector& y)
{
    require_same_rows(x, y);
    const Layout& l = x.layout();
    std::vector<double> partial(static_cast<std::size_t>(l.num_workers()), 0.0);
    l.pool().run([&](int w) {
        auto a = x.owned(w);
        auto b = y.owned(w);
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s += a[i] * b[i];
        partial[static_cast<std::size_t>(w)] = s;
    });
    double s = 0.0;
    for (double p : partial)
        s += p;
    return s;
}

double norm2(const DistVector& x) { return std::sqrt(dot(x, x)); }

void axpby(double a, const DistVector& x, double b, DistVector& y)
{
    require_same_rows(x, y);
    x.layout().pool().run([&](int w) {
        auto xs = x.owned(w);
        auto ys = y.owned(w);
        if (b == 0.0)
            for (std::size_t i = 0; i < xs.size(); ++i)
                ys[i] = a * xs[i];
        else
            for (std::size_t i = 0; i < xs.size(); ++i)
                ys[i] = a * xs[i] + b * ys[i];
    });
}

void waxpby(DistVector& out, double a, const DistVector& x, double b, const DistVector& y)
{
    require_same_rows(x, y);
    require_same_rows(x, out);
    x.layout().pool().run([&](int w) {
        auto xs = x.owned(w);
        auto ys = y.owned(w);
        auto os = out.owned(w);
        for (std::size_t i = 0; i < xs.size(); ++i)
            os[i] = a * xs[i] + b * ys[i];
    });
}

void copy(const DistVector& x, DistVector& y)
{
    require_same_rows(x, y);
    x.layout().pool().run([&](int w) {
        auto xs = x.owned(w);
        std::copy(xs.begin(), xs.end(), y.owned(w).begin());
    });
}

void fill(DistVector& x, double v)
{
    x.layout().pool().run([&](int w) {
        auto s = x.local(w);
        std::fill(s.begin(), s.end(), v);
    });
}

void spmv_axpby(double alpha, const CsrMatrix& a, DistVector& x, double beta, DistVector& y)
{
    if (&x.layout() != &a.layout())
        throw ContractViolation("spmv: x must use the matrix layout");
    require_same_rows(x, y);
    x.exchange_ghosts();
    a.layout().pool().run([&](int w) {
        const auto& p = a.part(w);
        auto xs = x.local(w);
        auto ys = y.owned(w);
        const Index n = a.layout().nlocal(w);
        for (Index i = 0; i < n; ++i) {
            double s = 0.0;
            for (Index k = p.row_ptr[static_cast<std::size_t>(i)]; k < p.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
                s += p.vals[static_cast<std::size_t>(k)] * xs[static_cast<std::size_t>(p.cols[static_cast<std::size_t>(k)])];
            auto& yi = ys[static_cast<std::size_t>(i)];
            yi = beta == 0.0 ? alpha * s : alpha * s + beta * yi;
        }
    });
}

void spmv(const CsrMatrix& a, DistVector& x, DistVector& y) { spmv_axpby(1.0, a, x, 0.0, y); }

void residual(const CsrMatrix& a, DistVector& x, const DistVector& b, DistVector& r)
{
    copy(b, r);
    spmv_axpby(-1.0, a, x, 1.0, r);
}

} // namespace bosim
