#include "bosim/grid.hpp"

#include "bosim/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

namespace bosim {

namespace {

void check_spacing(std::span<const double> s, int n, const char* name)
{
    if (static_cast<int>(s.size()) != n)
        throw InvalidInput(std::string(name) + ": expected " + std::to_string(n) + " spacings, got "
                           + std::to_string(s.size()));
    for (double v : s)
        if (!(v > 0.0))
            throw InvalidInput(std::string(name) + ": spacings must be positive");
}

} // namespace

double Grid::extent(Index c, int axis) const
{
    const auto& ijk = cells_[static_cast<std::size_t>(c)].ijk;
    switch (axis) {
    case 0: return dx_[static_cast<std::size_t>(ijk[0])];
    case 1: return dy_[static_cast<std::size_t>(ijk[1])];
    default: return dz_[static_cast<std::size_t>(ijk[2])];
    }
}

double Grid::bulk_volume() const
{
    double v = 0.0;
    for (const auto& c : cells_)
        v += c.volume;
    return v;
}

Grid build_grid(int nx, int ny, int nz, std::span<const double> dx, std::span<const double> dy,
                std::span<const double> dz, double top_depth)
{
    if (nx < 1 || ny < 1 || nz < 1)
        throw InvalidInput("build_grid: dimensions must be >= 1");
    check_spacing(dx, nx, "DX");
    check_spacing(dy, ny, "DY");
    check_spacing(dz, nz, "DZ");

    Grid g;
    g.dims_ = {nx, ny, nz};
    g.dx_.assign(dx.begin(), dx.end());
    g.dy_.assign(dy.begin(), dy.end());
    g.dz_.assign(dz.begin(), dz.end());
    g.top_ = top_depth;

    std::vector<double> x0(static_cast<std::size_t>(nx) + 1, 0.0), y0(static_cast<std::size_t>(ny) + 1, 0.0),
        z0(static_cast<std::size_t>(nz) + 1, top_depth);
    std::partial_sum(dx.begin(), dx.end(), x0.begin() + 1);
    std::partial_sum(dy.begin(), dy.end(), y0.begin() + 1);
    for (int k = 0; k < nz; ++k)
        z0[static_cast<std::size_t>(k) + 1] = z0[static_cast<std::size_t>(k)] + dz[static_cast<std::size_t>(k)];

    const Index n = static_cast<Index>(nx) * ny * nz;
    g.cells_.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const Index id = g.index(i, j, k);
                Cell& c = g.cells_[static_cast<std::size_t>(id)];
                const double hx = dx[static_cast<std::size_t>(i)];
                const double hy = dy[static_cast<std::size_t>(j)];
                const double hz = dz[static_cast<std::size_t>(k)];
                c.ijk = {i, j, k};
                c.global_index = id;
                c.volume = hx * hy * hz;
                c.face_area = {hy * hz, hy * hz, hx * hz, hx * hz, hx * hy, hx * hy};
                c.depth = z0[static_cast<std::size_t>(k)] + 0.5 * hz;
                c.centroid = {x0[static_cast<std::size_t>(i)] + 0.5 * hx, y0[static_cast<std::size_t>(j)] + 0.5 * hy,
                              c.depth};
                c.neighbor = {i > 0 ? g.index(i - 1, j, k) : -1,      i + 1 < nx ? g.index(i + 1, j, k) : -1,
                              j > 0 ? g.index(i, j - 1, k) : -1,      j + 1 < ny ? g.index(i, j + 1, k) : -1,
                              k > 0 ? g.index(i, j, k - 1) : -1,      k + 1 < nz ? g.index(i, j, k + 1) : -1};
                for (int f = 0; f < 6; ++f)
                    c.boundary[static_cast<std::size_t>(f)] =
                        c.neighbor[static_cast<std::size_t>(f)] < 0 ? BoundaryType::NoFlow : BoundaryType::Interior;
            }
    return g;
}

std::uint64_t hilbert_index(const std::array<int, 3>& ijk, int order)
{
    if (order < 0 || order > 21)
        throw InvalidInput("hilbert_index: order must be in [0, 21]");
    const std::uint64_t side = std::uint64_t{1} << order;
    for (int a : ijk)
        if (a < 0 || static_cast<std::uint64_t>(a) >= side)
            throw InvalidInput("hilbert_index: coordinate outside the 2^order lattice");
    if (order == 0)
        return 0;

    // Skilling's transpose form: undo excess work, then Gray-encode.
    std::array<std::uint64_t, 3> x{static_cast<std::uint64_t>(ijk[0]), static_cast<std::uint64_t>(ijk[1]),
                                   static_cast<std::uint64_t>(ijk[2])};
    const std::uint64_t m = std::uint64_t{1} << (order - 1);
    for (std::uint64_t q = m; q > 1; q >>= 1) {
        const std::uint64_t p = q - 1;
        for (int i = 0; i < 3; ++i) {
            if (x[static_cast<std::size_t>(i)] & q) {
                x[0] ^= p;
            } else {
                const std::uint64_t t = (x[0] ^ x[static_cast<std::size_t>(i)]) & p;
                x[0] ^= t;
                x[static_cast<std::size_t>(i)] ^= t;
            }
        }
    }
    for (int i = 1; i < 3; ++i)
        x[static_cast<std::size_t>(i)] ^= x[static_cast<std::size_t>(i) - 1];
    std::uint64_t t = 0;
    for (std::uint64_t q = m; q > 1; q >>= 1)
        if (x[2] & q)
            t ^= q - 1;
    for (auto& v : x)
        v ^= t;

    std::uint64_t h = 0;
    for (int b = order - 1; b >= 0; --b)
        for (int i = 0; i < 3; ++i)
            h = (h << 1) | ((x[static_cast<std::size_t>(i)] >> b) & 1u);
    return h;
}

int hilbert_order(const Grid& grid)
{
    const int n = std::max({grid.nx(), grid.ny(), grid.nz()});
    int order = 0;
    while ((1 << order) < n)
        ++order;
    return order;
}

Partition partition_grid(const Grid& grid, int num_workers)
{
    std::vector<char> all(static_cast<std::size_t>(grid.num_cells()), 1);
    return partition_grid(grid, all, num_workers);
}

Partition partition_grid(const Grid& grid, std::span<const char> include, int num_workers)
{
    if (static_cast<Index>(include.size()) != grid.num_cells())
        throw InvalidInput("partition_grid: mask size does not match grid");
    std::vector<Index> order;
    order.reserve(include.size());
    for (Index c = 0; c < grid.num_cells(); ++c)
        if (include[static_cast<std::size_t>(c)])
            order.push_back(c);

    const Index n = static_cast<Index>(order.size());
    if (num_workers < 1 || num_workers > n)
        throw InvalidInput("partition_grid: need 1 <= workers <= cells (" + std::to_string(num_workers) + " workers, "
                           + std::to_string(n) + " cells)");

    const int hord = hilbert_order(grid);
    std::vector<std::uint64_t> key(static_cast<std::size_t>(grid.num_cells()));
    for (Index c : order)
        key[static_cast<std::size_t>(c)] = hilbert_index(grid.cell(c).ijk, hord);
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return key[static_cast<std::size_t>(a)] < key[static_cast<std::size_t>(b)]; });

    Partition p;
    p.num_workers = num_workers;
    p.owner.assign(static_cast<std::size_t>(grid.num_cells()), -1);
    p.cells.resize(static_cast<std::size_t>(num_workers));
    const Index base = n / num_workers;
    const Index extra = n % num_workers;
    Index pos = 0;
    for (int w = 0; w < num_workers; ++w) {
        const Index len = base + (w < extra ? 1 : 0);
        auto& mine = p.cells[static_cast<std::size_t>(w)];
        mine.assign(order.begin() + pos, order.begin() + pos + len);
        for (Index c : mine)
            p.owner[static_cast<std::size_t>(c)] = w;
        pos += len;
    }
    return p;
}

Index GhostPlan::total_received() const
{
    Index total = 0;
    for (const auto& links : receives)
        for (const auto& l : links)
            total += static_cast<Index>(l.cells.size());
    return total;
}

GhostPlan build_ghost_plan(const Grid& grid, const Partition& partition)
{
    const int np = partition.num_workers;
    GhostPlan plan;
    plan.receives.resize(static_cast<std::size_t>(np));
    plan.sends.resize(static_cast<std::size_t>(np));

    // recv[w][peer] and send[peer][w] are filled from the same cut faces, so
    // the two sides agree by construction.
    std::vector<std::map<int, std::vector<Index>>> recv(static_cast<std::size_t>(np));
    for (int w = 0; w < np; ++w) {
        for (Index c : partition.cells[static_cast<std::size_t>(w)]) {
            for (Index nb : grid.cell(c).neighbor) {
                if (nb < 0)
                    continue;
                const int o = partition.owner[static_cast<std::size_t>(nb)];
                if (o >= 0 && o != w)
                    recv[static_cast<std::size_t>(w)][o].push_back(nb);
            }
        }
    }
    std::vector<std::map<int, std::vector<Index>>> send(static_cast<std::size_t>(np));
    for (int w = 0; w < np; ++w) {
        for (auto& [peer, cells] : recv[static_cast<std::size_t>(w)]) {
            std::sort(cells.begin(), cells.end());
            cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
            send[static_cast<std::size_t>(peer)][w] = cells;
            plan.receives[static_cast<std::size_t>(w)].push_back({peer, cells});
        }
    }
    for (int w = 0; w < np; ++w)
        for (auto& [peer, cells] : send[static_cast<std::size_t>(w)])
            plan.sends[static_cast<std::size_t>(w)].push_back({peer, std::move(cells)});
    return plan;
}

} // namespace bosim
