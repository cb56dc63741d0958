#pragma once

#include "bosim/grid.hpp"
#include "bosim/model.hpp"
#include "bosim/props.hpp"
#include "bosim/units.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace bosim::fixtures {

/// Water-oil table with krw = s^n, krow = (1 - s)^n on s = (Sw - swc) / (1 - swc - sor).
inline std::vector<WaterOilRow> power_water_oil(double swc, double sor, double n, int nodes, double pc_max = 0.0)
{
    std::vector<WaterOilRow> rows;
    if (swc > 0.0)
        rows.push_back({0.0, 0.0, 1.0, pc_max});
    for (int k = 0; k <= nodes; ++k) {
        const double s = static_cast<double>(k) / nodes;
        rows.push_back({swc + (1.0 - swc - sor) * s, std::pow(s, n), std::pow(1.0 - s, n), pc_max * (1.0 - s)});
    }
    if (sor > 0.0)
        rows.push_back({1.0, 1.0, 0.0, 0.0});
    return rows;
}

inline std::vector<GasOilRow> power_gas_oil(double sgc, double n, int nodes, double sg_max = 0.8)
{
    std::vector<GasOilRow> rows;
    rows.push_back({0.0, 0.0, 1.0, 0.0});
    for (int k = 1; k <= nodes; ++k) {
        const double s = static_cast<double>(k) / nodes;
        const double sg = sgc + (sg_max - sgc) * s;
        rows.push_back({sg, std::pow(s, n), std::pow(1.0 - s, n), 0.0});
    }
    return rows;
}

/// Dead oil with constant B and viscosity, incompressible water.
inline PvtTable incompressible_pvt(double muo = 1e-3, double muw = 1e-3, double rho_o = 800.0, double rho_w = 1000.0)
{
    const std::vector<OilPvtRow> oil{{1e5, 1.0, muo, 0.0}, {1e8, 1.0, muo, 0.0}};
    WaterPvt w;
    w.p_ref = 1e7;
    w.bw_ref = 1.0;
    w.cw = 0.0;
    w.muw = muw;
    return PvtTable(oil, 0.0, 0.0, w, {}, SurfaceDensities{rho_o, rho_w, 1.0});
}

/// Slightly compressible dead oil and water.
inline PvtTable compressible_pvt()
{
    const std::vector<OilPvtRow> oil{{1e6, 1.05, 1.5e-3, 0.0}, {2e7, 1.02, 1.6e-3, 0.0}, {5e7, 0.99, 1.8e-3, 0.0}};
    WaterPvt w;
    w.p_ref = 2e7;
    w.bw_ref = 1.01;
    w.cw = 4.5e-10;
    w.muw = 0.5e-3;
    return PvtTable(oil, 0.0, 0.0, w, {}, SurfaceDensities{850.0, 1020.0, 0.9});
}

/// Live oil with solution gas and a dry-gas table.
inline PvtTable black_oil_pvt()
{
    std::vector<OilPvtRow> oil;
    std::vector<GasPvtRow> gas;
    for (int k = 0; k <= 10; ++k) {
        const double p = 1e6 + k * 4e6; // 1 to 41 MPa
        const double rs = 10.0 + 4.0e-6 * (p - 1e6) * 1.0;
        oil.push_back({p, 1.05 + 0.0045e-6 * (p - 1e6) * 10.0 / 4.0, 1.6e-3 - 0.02e-9 * (p - 1e6), rs});
        gas.push_back({p, 0.1 * 1e6 / p + 0.002, 1.2e-5 + 0.5e-12 * p});
    }
    WaterPvt w;
    w.p_ref = 2e7;
    w.bw_ref = 1.01;
    w.cw = 4.5e-10;
    w.muw = 0.5e-3;
    return PvtTable(oil, -1.5e-10, 2e-11, w, gas, SurfaceDensities{850.0, 1020.0, 0.9});
}

inline Grid box_grid(int nx, int ny, int nz, double dx, double dy, double dz, double top = 1000.0)
{
    const std::vector<double> vx(static_cast<std::size_t>(nx), dx), vy(static_cast<std::size_t>(ny), dy),
        vz(static_cast<std::size_t>(nz), dz);
    return build_grid(nx, ny, nz, vx, vy, vz, top);
}

inline RockModel uniform_rock(const Grid& g, double poro, double k, double cr = 0.0, double kz_ratio = 1.0)
{
    RockModel r;
    r.poro.assign(static_cast<std::size_t>(g.num_cells()), poro);
    r.perm.assign(static_cast<std::size_t>(g.num_cells()), {k, k, k * kz_ratio});
    r.cr = cr;
    r.p_ref = 2e7;
    return r;
}

inline FluidModel two_phase_fluid(const PvtTable& pvt, double swc = 0.2, double sor = 0.2, double n = 2.0,
                                  int nodes = 20, double pc = 0.0)
{
    FluidModel f;
    f.black_oil = false;
    f.relperm = RelPermTable(power_water_oil(swc, sor, n, nodes, pc));
    f.pvt = pvt;
    return f;
}

inline FluidModel black_oil_fluid()
{
    FluidModel f;
    f.black_oil = true;
    f.relperm = RelPermTable(power_water_oil(0.2, 0.2, 2.0, 20, 0.3 * units::bar), power_gas_oil(0.05, 2.0, 16));
    f.pvt = black_oil_pvt();
    return f;
}

inline Well bhp_producer(const std::string& name, Index cell, double wi, double depth, double bhp)
{
    Well w;
    w.name = name;
    w.type = WellType::Producer;
    w.perforations = {{cell, wi, depth}};
    w.ref_depth = depth;
    w.schedule = {{0.0, {ConstraintKind::Bhp, bhp}}};
    return w;
}

inline Well rate_injector(const std::string& name, Index cell, double wi, double depth, double rate,
                          double bhp_limit = std::numeric_limits<double>::quiet_NaN())
{
    Well w;
    w.name = name;
    w.type = WellType::Injector;
    w.injected = Phase::Water;
    w.perforations = {{cell, wi, depth}};
    w.ref_depth = depth;
    Constraint c{ConstraintKind::WaterRate, rate};
    c.bhp_limit = bhp_limit;
    w.schedule = {{0.0, c}};
    return w;
}

} // namespace bosim::fixtures
