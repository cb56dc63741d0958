#include "bosim/model.hpp"

#include "bosim/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

namespace bosim {

namespace {

constexpr int kWater = 0, kOil = 1, kGas = 2;
// Row of each component inside a cell block, and the reverse.
constexpr std::array<int, 3> row_of{1, 0, 2};
constexpr std::array<int, 3> comp_of{1, 0, 2};

template <int N, bool J>
using Ad = std::conditional_t<J, Eval<N>, double>;

template <int N2>
double lift(double x, int) { return x; }
template <int N2, int M>
Eval<N2> lift(const Eval<M>& x, int off) { return widen<N2, M>(x, off); }

template <int N2, class T>
auto lift_props(const CellProps<T>& c, int off)
{
    using U = decltype(lift<N2>(std::declval<T>(), 0));
    CellProps<U> r;
    for (int a = 0; a < 3; ++a) {
        r.pressure[a] = lift<N2>(c.pressure[a], off);
        r.rho[a] = lift<N2>(c.rho[a], off);
        r.krmu[a] = lift<N2>(c.krmu[a], off);
        r.invb[a] = lift<N2>(c.invb[a], off);
        r.mob[a] = lift<N2>(c.mob[a], off);
    }
    r.rs = lift<N2>(c.rs, off);
    return r;
}

template <int N>
double dv(const Eval<N>& x, int i) { return x.d[static_cast<std::size_t>(i)]; }

template <int NC, class T>
CellProps<T> compute_props(const FluidModel& f, double pv_ref, double cr, double p_ref, const T& p, const T& sw,
                           const T& x, bool saturated)
{
    CellProps<T> c;
    const T sg = (NC == 3 && saturated) ? x : T(0.0);
    const T pb = (NC == 3 && !saturated) ? x : p;
    const T so = 1.0 - sw - sg;

    const auto wo = eval_water_oil(f.relperm, sw);
    const auto pw = eval_pvt_water(f.pvt, p);
    const auto po = eval_pvt_oil(f.pvt, p, pb);
    T kro = wo.krow;

    c.pressure[kWater] = p - wo.pcow;
    c.pressure[kOil] = p;
    c.rho[kWater] = pw.rho;
    c.rho[kOil] = po.rho;
    c.invb[kWater] = 1.0 / pw.b;
    c.invb[kOil] = 1.0 / po.b;
    c.krmu[kWater] = wo.krw / pw.mu;
    if constexpr (NC == 3) {
        const auto go = eval_gas_oil(f.relperm, sg);
        const auto pg = eval_pvt_gas(f.pvt, p);
        kro = stone2_kro(wo.krw, wo.krow, go.krg, go.krog, f.relperm.krocw());
        c.pressure[kGas] = p + go.pcog;
        c.rho[kGas] = pg.rho;
        c.invb[kGas] = 1.0 / pg.b;
        c.krmu[kGas] = go.krg / pg.mu;
        c.rs = po.rs;
    }
    c.krmu[kOil] = kro / po.mu;
    for (int a = 0; a < NC; ++a)
        c.mob[a] = c.krmu[a] * c.invb[a];

    const T pv = pv_ref * (1.0 + cr * (p - p_ref));
    c.acc[kWater] = pv * sw * c.invb[kWater];
    c.acc[kOil] = pv * so * c.invb[kOil];
    if constexpr (NC == 3)
        c.acc[kGas] = pv * (sg * c.invb[kGas] + c.rs * so * c.invb[kOil]);
    return c;
}

// Inflow into cell a from cell b, per component.
template <int NC, class T>
std::array<T, 3> face_inflow(const CellProps<T>& a, const CellProps<T>& b, double trans, double ddepth)
{
    std::array<T, 3> f{};
    for (int ph = 0; ph < NC; ++ph) {
        const T rho = 0.5 * (a.rho[ph] + b.rho[ph]);
        const T dphi = (b.pressure[ph] - a.pressure[ph]) - rho * (units::gravity * ddepth);
        const bool from_b = value(dphi) > 0.0;
        const T q = trans * (from_b ? b.mob[ph] : a.mob[ph]) * dphi;
        f[ph] += q;
        if (NC == 3 && ph == kOil)
            f[kGas] += (from_b ? b.rs : a.rs) * q;
    }
    return f;
}

template <int NC, class T>
std::array<T, 3> perforation_rates(const Well& w, const Perforation& pf, const CellProps<T>& c, const T& ph)
{
    std::array<T, 3> q{};
    if (w.type == WellType::Injector) {
        const int a = static_cast<int>(w.injected);
        T mt = c.krmu[kWater] + c.krmu[kOil];
        if constexpr (NC == 3)
            mt += c.krmu[kGas];
        q[a] = perforation_rate(pf.wi, T(mt * c.invb[a]), ph, c.pressure[a], c.rho[a], w.ref_depth, pf.depth);
        return q;
    }
    for (int a = 0; a < NC; ++a)
        q[a] = perforation_rate(pf.wi, c.mob[a], ph, c.pressure[a], c.rho[a], w.ref_depth, pf.depth);
    if constexpr (NC == 3)
        q[kGas] += c.rs * q[kOil];
    return q;
}

std::array<double, 3> rate_weights(ConstraintKind k)
{
    switch (k) {
    case ConstraintKind::OilRate: return {0.0, 1.0, 0.0};
    case ConstraintKind::WaterRate: return {1.0, 0.0, 0.0};
    case ConstraintKind::LiquidRate: return {1.0, 1.0, 0.0};
    case ConstraintKind::Bhp: break;
    }
    return {0.0, 0.0, 0.0};
}

struct Entry {
    Index col;
    std::array<double, 3> v; // by row offset
};

} // namespace

// ---------------------------------------------------------------------------

void RockModel::validate(Index ncells) const
{
    if (static_cast<Index>(poro.size()) != ncells || static_cast<Index>(perm.size()) != ncells)
        throw ConfigError("rock arrays must have one entry per grid cell");
    for (std::size_t c = 0; c < poro.size(); ++c) {
        if (!(poro[c] >= 0.0 && poro[c] <= 1.0))
            throw ConfigError("porosity of cell " + std::to_string(c) + " outside [0, 1]");
        for (double k : perm[c])
            if (!(k >= 0.0))
                throw ConfigError("negative permeability in cell " + std::to_string(c));
    }
}

double kazemi_sigma(const std::array<double, 3>& block)
{
    double s = 0.0;
    for (double l : block) {
        if (!(l > 0.0))
            throw ConfigError("matrix block dimensions must be positive");
        s += 1.0 / (l * l);
    }
    return 4.0 * s;
}

double DualPorosityConfig::shape_factor() const
{
    const double s = sigma > 0.0 ? sigma : kazemi_sigma(block);
    if (!(s > 0.0))
        throw ConfigError("shape factor must be positive");
    return s;
}

void DualPorosityConfig::validate(Index ncells) const
{
    if (!enabled)
        return;
    if (sigma < 0.0)
        throw ConfigError("shape factor must be positive");
    shape_factor();
    RockModel f{poro_f, perm_f};
    f.validate(ncells);
}

double transmissibility(const Grid& grid, std::span<const std::array<double, 3>> perm, Index a, Index b)
{
    const Cell& ca = grid.cell(a);
    int face = -1;
    for (int f = 0; f < 6; ++f)
        if (ca.neighbor[static_cast<std::size_t>(f)] == b)
            face = f;
    if (face < 0)
        throw InvalidInput("cells " + std::to_string(a) + " and " + std::to_string(b) + " are not face neighbours");
    const int axis = face_axis(face);
    const double ka = perm[static_cast<std::size_t>(a)][static_cast<std::size_t>(axis)];
    const double kb = perm[static_cast<std::size_t>(b)][static_cast<std::size_t>(axis)];
    if (!(ka > 0.0) || !(kb > 0.0))
        return 0.0;
    const double ra = grid.extent(a, axis) / (2.0 * ka);
    const double rb = grid.extent(b, axis) / (2.0 * kb);
    return ca.face_area[static_cast<std::size_t>(face)] / (ra + rb);
}

void switch_variables(ReservoirState& s, bool black_oil)
{
    for (std::size_t m = 0; m < s.p.size(); ++m) {
        s.sw[m] = std::clamp(s.sw[m], 0.0, 1.0);
        if (!black_oil)
            continue;
        if (s.saturated[m]) {
            if (s.x[m] < 0.0) {
                s.saturated[m] = 0;
                s.x[m] = s.p[m] - bubble_point_offset;
            } else {
                s.x[m] = std::min(s.x[m], 1.0 - s.sw[m]);
            }
        } else if (s.x[m] > s.p[m]) {
            s.saturated[m] = 1;
            s.x[m] = 0.0;
        }
    }
}

// ---------------------------------------------------------------------------

Model::Model(const Grid& grid, RockModel rock, FluidModel fluid, std::vector<Well> wells, DualPorosityConfig dual,
             std::shared_ptr<WorkerPool> pool)
    : nc_(fluid.black_oil ? 3 : 2), dual_(dual.enabled), pool_(std::move(pool)), fluid_(std::move(fluid)),
      wells_(std::move(wells)), cr_(rock.cr), p_ref_(rock.p_ref)
{
    const Index ng = grid.num_cells();
    rock.validate(ng);
    dual.validate(ng);
    if (fluid_.pvt.oil_p().empty() || fluid_.relperm.sw().empty())
        throw ConfigError("fluid model needs water-oil saturation and oil PVT tables");
    if (nc_ == 3 && (!fluid_.relperm.has_gas() || !fluid_.pvt.has_gas()))
        throw ConfigError("black-oil runs need gas saturation and gas PVT tables");
    if (nc_ == 3)
        check_krocw(fluid_.relperm.krocw());

    std::vector<char> include(static_cast<std::size_t>(ng), 0);
    grid_to_active_.assign(static_cast<std::size_t>(ng), -1);
    for (Index c = 0; c < ng; ++c) {
        const auto i = static_cast<std::size_t>(c);
        const bool on = rock.poro[i] > 0.0 && (!dual_ || dual.poro_f[i] > 0.0);
        if (on) {
            include[i] = 1;
            grid_to_active_[i] = static_cast<Index>(active_.size());
            active_.push_back(c);
        }
    }
    if (active_.empty())
        throw ConfigError("grid has no active cells");
    partition_ = partition_grid(grid, include, pool_->size());

    const Index na = num_active();
    const int ncont = dual_ ? 2 : 1;
    const Index nm = na * ncont;
    volume_.resize(static_cast<std::size_t>(nm));
    depth_.resize(static_cast<std::size_t>(nm));
    poro_.resize(static_cast<std::size_t>(nm));
    for (int k = 0; k < ncont; ++k)
        for (Index a = 0; a < na; ++a) {
            const auto m = static_cast<std::size_t>(k * na + a);
            const Cell& cell = grid.cell(active_[static_cast<std::size_t>(a)]);
            volume_[m] = cell.volume;
            depth_[m] = cell.depth;
            poro_[m] = (dual_ && k == 0) ? dual.poro_f[static_cast<std::size_t>(cell.global_index)]
                                         : rock.poro[static_cast<std::size_t>(cell.global_index)];
        }

    // Connections: +x, +y, +z faces of each active cell.
    const auto& primary_perm = dual_ ? dual.perm_f : rock.perm;
    auto add_grid_conns = [&](const std::vector<std::array<double, 3>>& perm, int k) {
        for (Index a = 0; a < na; ++a) {
            const Index c = active_[static_cast<std::size_t>(a)];
            const Cell& cell = grid.cell(c);
            for (int f = 1; f < 6; f += 2) {
                const Index n = cell.neighbor[static_cast<std::size_t>(f)];
                if (n < 0 || grid_to_active_[static_cast<std::size_t>(n)] < 0)
                    continue;
                const double t = transmissibility(grid, perm, c, n);
                if (t > 0.0)
                    conns_.push_back({k * na + a, k * na + grid_to_active_[static_cast<std::size_t>(n)], t,
                                      grid.cell(n).depth - cell.depth});
            }
        }
    };
    add_grid_conns(primary_perm, 0);
    if (dual_) {
        if (dual.dual_permeability)
            add_grid_conns(rock.perm, 1);
        const double sigma = dual.shape_factor();
        transfer_.resize(static_cast<std::size_t>(na));
        for (Index a = 0; a < na; ++a) {
            const auto& k = rock.perm[static_cast<std::size_t>(active_[static_cast<std::size_t>(a)])];
            const double km = (k[0] + k[1] + k[2]) / 3.0;
            const double t = sigma * volume_[static_cast<std::size_t>(a)] * km;
            transfer_[static_cast<std::size_t>(a)] = t;
            if (t > 0.0)
                conns_.push_back({a, na + a, t, 0.0});
        }
    }
    cell_conns_.resize(static_cast<std::size_t>(nm));
    for (std::size_t i = 0; i < conns_.size(); ++i) {
        cell_conns_[static_cast<std::size_t>(conns_[i].a)].push_back(static_cast<Index>(i));
        cell_conns_[static_cast<std::size_t>(conns_[i].b)].push_back(static_cast<Index>(i));
    }

    // Wells.
    cell_perfs_.resize(static_cast<std::size_t>(nm));
    perf_cells_.resize(wells_.size());
    well_owner_.resize(wells_.size());
    for (std::size_t i = 0; i < wells_.size(); ++i) {
        const Well& w = wells_[i];
        w.validate();
        if (w.perforations.empty())
            throw InvalidInput("well '" + w.name + "' has no perforations");
        if (nc_ == 2 && w.type == WellType::Injector && w.injected == Phase::Gas)
            throw ConfigError("well '" + w.name + "': gas injection needs a black-oil model");
        for (std::size_t j = 0; j < w.perforations.size(); ++j) {
            const Index c = w.perforations[j].cell;
            if (c < 0 || c >= ng || grid_to_active_[static_cast<std::size_t>(c)] < 0)
                throw InvalidInput("well '" + w.name + "' perforates an inactive or missing cell");
            const Index m = grid_to_active_[static_cast<std::size_t>(c)];
            perf_cells_[i].push_back(m);
            cell_perfs_[static_cast<std::size_t>(m)].emplace_back(static_cast<int>(i), static_cast<int>(j));
        }
        well_owner_[i] = partition_.owner[static_cast<std::size_t>(w.perforations.front().cell)];
    }

    // Numbering.
    const int nw = pool_->size();
    owned_.assign(static_cast<std::size_t>(nw), {});
    owned_wells_.assign(static_cast<std::size_t>(nw), {});
    for (std::size_t i = 0; i < wells_.size(); ++i)
        owned_wells_[static_cast<std::size_t>(well_owner_[i])].push_back(static_cast<int>(i));
    cell_row_.assign(static_cast<std::size_t>(nm), -1);
    well_row_.assign(wells_.size(), -1);
    offsets_.assign(static_cast<std::size_t>(nw) + 1, 0);
    Index next = 0;
    for (int w = 0; w < nw; ++w) {
        auto& own = owned_[static_cast<std::size_t>(w)];
        for (Index c : partition_.cells[static_cast<std::size_t>(w)]) {
            const Index a = grid_to_active_[static_cast<std::size_t>(c)];
            for (int k = 0; k < ncont; ++k) {
                own.push_back(k * na + a);
                cell_row_[static_cast<std::size_t>(k * na + a)] = next;
                next += nc_;
            }
        }
        for (int i : owned_wells_[static_cast<std::size_t>(w)])
            well_row_[static_cast<std::size_t>(i)] = next++;
        offsets_[static_cast<std::size_t>(w) + 1] = next;
    }
    layout_ = Layout::plain(pool_, offsets_);
}

Index Model::model_cell(Index grid_cell, int continuum) const
{
    if (grid_cell < 0 || grid_cell >= static_cast<Index>(grid_to_active_.size()))
        return -1;
    const Index a = grid_to_active_[static_cast<std::size_t>(grid_cell)];
    if (a < 0 || continuum < 0 || continuum > (dual_ ? 1 : 0))
        return -1;
    return continuum * num_active() + a;
}

BlockLabeling Model::labeling() const
{
    BlockLabeling l;
    l.kind.assign(static_cast<std::size_t>(num_unknowns()), UnknownKind::Saturation);
    l.group.assign(static_cast<std::size_t>(num_unknowns()), -1);
    for (Index m = 0; m < num_cells(); ++m) {
        const Index r = cell_unknown(m);
        for (int k = 0; k < nc_; ++k)
            l.group[static_cast<std::size_t>(r + k)] = m;
        l.kind[static_cast<std::size_t>(r)] = UnknownKind::Pressure;
    }
    for (int i = 0; i < num_wells(); ++i)
        l.kind[static_cast<std::size_t>(well_unknown(i))] = UnknownKind::Well;
    return l;
}

ReservoirState Model::uniform_state(double p, double sw, double sg) const
{
    ReservoirState s;
    const auto n = static_cast<std::size_t>(num_cells());
    s.p.assign(n, p);
    s.sw.assign(n, sw);
    s.x.assign(n, black_oil() ? sg : 0.0);
    s.saturated.assign(n, 1);
    s.ph.assign(wells_.size(), p);
    return s;
}

void Model::apply_controls(ReservoirState& s, std::span<const Constraint> controls) const
{
    if (controls.size() != wells_.size())
        throw ContractViolation("one constraint per well required");
    for (std::size_t i = 0; i < wells_.size(); ++i)
        if (controls[i].kind == ConstraintKind::Bhp)
            s.ph[i] = controls[i].target;
}

CellProps<double> Model::cell_props(const ReservoirState& s, Index m) const
{
    const auto i = static_cast<std::size_t>(m);
    const double pv = volume_[i] * poro_[i];
    if (nc_ == 3)
        return compute_props<3, double>(fluid_, pv, cr_, p_ref_, s.p[i], s.sw[i], s.x[i], s.saturated[i] != 0);
    return compute_props<2, double>(fluid_, pv, cr_, p_ref_, s.p[i], s.sw[i], 0.0, true);
}

template <int NC, bool J>
void Model::assemble_impl(const ReservoirState& old_state, const ReservoirState& state, double dt,
                          std::span<const Constraint> controls, DistVector& r, CsrMatrix* jac) const
{
    using T1 = Ad<NC, J>;
    using T2 = Ad<2 * NC, J>;
    using TW = Ad<NC + 1, J>;

    const auto nm = static_cast<std::size_t>(num_cells());
    std::vector<CellProps<T1>> props(nm);
    std::vector<std::array<double, 3>> acc_old(nm);

    pool_->run([&](int w) {
        for (Index m : owned_[static_cast<std::size_t>(w)]) {
            const auto i = static_cast<std::size_t>(m);
            const double pv = volume_[i] * poro_[i];
            T1 p = state.p[i], sw = state.sw[i], x = state.x[i];
            if constexpr (J) {
                p = Eval<NC>::variable(state.p[i], 0);
                sw = Eval<NC>::variable(state.sw[i], 1);
                if constexpr (NC == 3)
                    x = Eval<NC>::variable(state.x[i], 2);
            }
            props[i] = compute_props<NC, T1>(fluid_, pv, cr_, p_ref_, p, sw, x, NC == 2 || state.saturated[i] != 0);
            const auto old = compute_props<NC, double>(fluid_, pv, cr_, p_ref_, old_state.p[i], old_state.sw[i],
                                                       old_state.x[i], NC == 2 || old_state.saturated[i] != 0);
            acc_old[i] = old.acc;
        }
    });

    std::vector<CsrMatrix::RowBlock> blocks(J ? offsets_.size() - 1 : 0);
    const double inv_dt = 1.0 / dt;

    pool_->run([&](int w) {
        const Index base = offsets_[static_cast<std::size_t>(w)];
        auto rw = r.owned(w);
        CsrMatrix::RowBlock* blk = J ? &blocks[static_cast<std::size_t>(w)] : nullptr;
        std::vector<Entry> entries;

        auto emit = [&](int nrows) {
            for (int row = 0; row < nrows; ++row) {
                for (const Entry& e : entries) {
                    blk->gcols.push_back(e.col);
                    blk->vals.push_back(e.v[static_cast<std::size_t>(row)]);
                }
                blk->row_ptr.push_back(static_cast<Index>(blk->gcols.size()));
            }
        };

        for (Index m : owned_[static_cast<std::size_t>(w)]) {
            const auto i = static_cast<std::size_t>(m);
            const Index row0 = cell_row_[i];
            std::array<double, 3> res{};
            entries.clear();
            if constexpr (J)
                for (int k = 0; k < NC; ++k)
                    entries.push_back({row0 + k, {}});

            for (int c = 0; c < NC; ++c) {
                const T1& a = props[i].acc[static_cast<std::size_t>(c)];
                res[static_cast<std::size_t>(c)] += (value(a) - acc_old[i][static_cast<std::size_t>(c)]) * inv_dt;
                if constexpr (J)
                    for (int k = 0; k < NC; ++k)
                        entries[static_cast<std::size_t>(k)].v[static_cast<std::size_t>(row_of[c])] += dv(a, k) * inv_dt;
            }

            for (Index ci : cell_conns_[i]) {
                const Connection& cn = conns_[static_cast<std::size_t>(ci)];
                const bool lo = cn.a == m;
                const Index other = lo ? cn.b : cn.a;
                const auto f = face_inflow<NC, T2>(lift_props<2 * NC>(props[static_cast<std::size_t>(cn.a)], 0),
                                                   lift_props<2 * NC>(props[static_cast<std::size_t>(cn.b)], NC),
                                                   cn.trans, cn.ddepth);
                const double sign = lo ? 1.0 : -1.0;
                const int self_off = lo ? 0 : NC, other_off = lo ? NC : 0;
                std::size_t first = 0;
                if constexpr (J) {
                    first = entries.size();
                    const Index orow = cell_row_[static_cast<std::size_t>(other)];
                    for (int k = 0; k < NC; ++k)
                        entries.push_back({orow + k, {}});
                }
                for (int c = 0; c < NC; ++c) {
                    const auto cc = static_cast<std::size_t>(c);
                    res[cc] -= sign * value(f[cc]);
                    if constexpr (J) {
                        const auto ro = static_cast<std::size_t>(row_of[cc]);
                        for (int k = 0; k < NC; ++k) {
                            entries[static_cast<std::size_t>(k)].v[ro] -= sign * dv(f[cc], self_off + k);
                            entries[first + static_cast<std::size_t>(k)].v[ro] -= sign * dv(f[cc], other_off + k);
                        }
                    }
                }
            }

            for (const auto& [wi, pj] : cell_perfs_[i]) {
                const Well& well = wells_[static_cast<std::size_t>(wi)];
                TW ph = state.ph[static_cast<std::size_t>(wi)];
                if constexpr (J)
                    ph = Eval<NC + 1>::variable(state.ph[static_cast<std::size_t>(wi)], NC);
                const auto q = perforation_rates<NC, TW>(well, well.perforations[static_cast<std::size_t>(pj)],
                                                          lift_props<NC + 1>(props[i], 0), ph);
                std::size_t wcol = 0;
                if constexpr (J) {
                    wcol = entries.size();
                    entries.push_back({well_row_[static_cast<std::size_t>(wi)], {}});
                }
                for (int c = 0; c < NC; ++c) {
                    const auto cc = static_cast<std::size_t>(c);
                    res[cc] -= value(q[cc]);
                    if constexpr (J) {
                        const auto ro = static_cast<std::size_t>(row_of[cc]);
                        for (int k = 0; k < NC; ++k)
                            entries[static_cast<std::size_t>(k)].v[ro] -= dv(q[cc], k);
                        entries[wcol].v[ro] -= dv(q[cc], NC);
                    }
                }
            }

            for (int row = 0; row < NC; ++row)
                rw[static_cast<std::size_t>(row0 - base + row)] = res[static_cast<std::size_t>(comp_of[static_cast<std::size_t>(row)])];
            if constexpr (J)
                emit(NC);
        }

        for (int wi : owned_wells_[static_cast<std::size_t>(w)]) {
            const auto iw = static_cast<std::size_t>(wi);
            const Well& well = wells_[iw];
            const Constraint& con = controls[iw];
            const auto wts = rate_weights(con.kind);
            WellRates<double> sum;
            entries.clear();
            double dph = con.kind == ConstraintKind::Bhp ? 1.0 : 0.0;
            if constexpr (J)
                entries.push_back({well_row_[iw], {}});
            TW ph = state.ph[iw];
            if constexpr (J)
                ph = Eval<NC + 1>::variable(state.ph[iw], NC);
            for (std::size_t j = 0; j < well.perforations.size(); ++j) {
                const auto mc = static_cast<std::size_t>(perf_cells_[iw][j]);
                const auto q = perforation_rates<NC, TW>(well, well.perforations[j], lift_props<NC + 1>(props[mc], 0), ph);
                sum.water += value(q[kWater]);
                sum.oil += value(q[kOil]);
                sum.gas += value(q[kGas]);
                if constexpr (J) {
                    Entry e{0, {}};
                    for (int k = 0; k < NC; ++k) {
                        double d = 0.0;
                        for (int c = 0; c < NC; ++c)
                            d += wts[static_cast<std::size_t>(c)] * dv(q[static_cast<std::size_t>(c)], k);
                        e.col = cell_row_[mc] + k;
                        e.v[0] = d;
                        entries.push_back(e);
                    }
                    for (int c = 0; c < NC; ++c)
                        dph += wts[static_cast<std::size_t>(c)] * dv(q[static_cast<std::size_t>(c)], NC);
                }
            }
            rw[static_cast<std::size_t>(well_row_[iw] - base)] = well_residual(well, con, state.ph[iw], sum);
            if constexpr (J) {
                entries[0].v[0] = dph;
                emit(1);
            }
        }
    });

    if constexpr (J)
        *jac = CsrMatrix(pool_, offsets_, std::move(blocks));
}

DistVector Model::assemble_residual(const ReservoirState& old_state, const ReservoirState& state, double dt,
                                    std::span<const Constraint> controls) const
{
    if (!(dt > 0.0))
        throw InvalidInput("timestep must be positive");
    if (controls.size() != wells_.size())
        throw ContractViolation("one constraint per well required");
    DistVector r(layout_);
    if (nc_ == 3)
        assemble_impl<3, false>(old_state, state, dt, controls, r, nullptr);
    else
        assemble_impl<2, false>(old_state, state, dt, controls, r, nullptr);
    return r;
}

LinearSystem Model::assemble(const ReservoirState& old_state, const ReservoirState& state, double dt,
                             std::span<const Constraint> controls) const
{
    if (!(dt > 0.0))
        throw InvalidInput("timestep must be positive");
    if (controls.size() != wells_.size())
        throw ContractViolation("one constraint per well required");
    DistVector r(layout_);
    CsrMatrix jac;
    if (nc_ == 3)
        assemble_impl<3, true>(old_state, state, dt, controls, r, &jac);
    else
        assemble_impl<2, true>(old_state, state, dt, controls, r, &jac);
    DistVector b(jac.layout_ptr());
    b.scatter(r.gather());
    return {std::move(jac), std::move(b)};
}

std::array<double, 3> Model::connection_inflow(const ReservoirState& s, const Connection& c) const
{
    const auto a = cell_props(s, c.a), b = cell_props(s, c.b);
    return nc_ == 3 ? face_inflow<3, double>(a, b, c.trans, c.ddepth) : face_inflow<2, double>(a, b, c.trans, c.ddepth);
}

std::array<double, 3> Model::dual_porosity_transfer(const ReservoirState& s, Index active_cell) const
{
    if (!dual_)
        throw ConfigError("dual porosity is not enabled");
    if (active_cell < 0 || active_cell >= num_active())
        throw InvalidInput("active cell out of range");
    const Connection c{active_cell, num_active() + active_cell, transfer_[static_cast<std::size_t>(active_cell)], 0.0};
    return connection_inflow(s, c);
}

std::vector<WellRates<double>> Model::well_rates(const ReservoirState& s) const
{
    std::vector<WellRates<double>> out(wells_.size());
    for (std::size_t i = 0; i < wells_.size(); ++i) {
        const Well& w = wells_[i];
        for (std::size_t j = 0; j < w.perforations.size(); ++j) {
            const auto c = cell_props(s, perf_cells_[i][j]);
            const auto q = nc_ == 3 ? perforation_rates<3, double>(w, w.perforations[j], c, s.ph[i])
                                    : perforation_rates<2, double>(w, w.perforations[j], c, s.ph[i]);
            out[i].water += q[kWater];
            out[i].oil += q[kOil];
            out[i].gas += q[kGas];
        }
    }
    return out;
}

std::array<double, 3> Model::fluid_in_place(const ReservoirState& s) const
{
    std::array<double, 3> t{};
    for (Index m = 0; m < num_cells(); ++m) {
        const auto c = cell_props(s, m);
        for (int k = 0; k < 3; ++k)
            t[static_cast<std::size_t>(k)] += c.acc[static_cast<std::size_t>(k)];
    }
    return t;
}

double Model::total_pore_volume() const
{
    double v = 0.0;
    for (std::size_t m = 0; m < volume_.size(); ++m)
        v += volume_[m] * poro_[m];
    return v;
}

std::vector<double> Model::to_vector(const ReservoirState& s) const
{
    std::vector<double> v(static_cast<std::size_t>(num_unknowns()));
    for (Index m = 0; m < num_cells(); ++m) {
        const auto i = static_cast<std::size_t>(m);
        const auto r = static_cast<std::size_t>(cell_unknown(m));
        v[r] = s.p[i];
        v[r + 1] = s.sw[i];
        if (nc_ == 3)
            v[r + 2] = s.x[i];
    }
    for (int i = 0; i < num_wells(); ++i)
        v[static_cast<std::size_t>(well_unknown(i))] = s.ph[static_cast<std::size_t>(i)];
    return v;
}

void Model::from_vector(ReservoirState& s, std::span<const double> v) const
{
    if (static_cast<Index>(v.size()) != num_unknowns())
        throw ContractViolation("unknown vector size mismatch");
    for (Index m = 0; m < num_cells(); ++m) {
        const auto i = static_cast<std::size_t>(m);
        const auto r = static_cast<std::size_t>(cell_unknown(m));
        s.p[i] = v[r];
        s.sw[i] = v[r + 1];
        if (nc_ == 3)
            s.x[i] = v[r + 2];
    }
    for (int i = 0; i < num_wells(); ++i)
        s.ph[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(well_unknown(i))];
}

double Model::max_saturation_change(const ReservoirState& s, const DistVector& dx) const
{
    const auto d = dx.gather();
    double mx = 0.0;
    for (Index m = 0; m < num_cells(); ++m) {
        const auto r = static_cast<std::size_t>(cell_unknown(m));
        mx = std::max(mx, std::abs(d[r + 1]));
        if (nc_ == 3 && s.saturated[static_cast<std::size_t>(m)])
            mx = std::max(mx, std::abs(d[r + 2]));
    }
    return mx;
}

void Model::update(ReservoirState& s, const DistVector& dx, double scale) const
{
    const auto d = dx.gather();
    auto v = to_vector(s);
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] += scale * d[k];
    from_vector(s, v);
    switch_variables(s, black_oil());
}

} // namespace bosim
