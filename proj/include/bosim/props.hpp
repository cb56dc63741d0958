#pragma once

#include "bosim/autodiff.hpp"

#include <algorithm>
#include <span>
#include <vector>

namespace bosim {

/// Piecewise-linear interpolation of (xs, ys) at x, clamped to the end values
/// outside [xs.front(), xs.back()]. xs must be strictly increasing.
template <class T>
T interp_clamped(std::span<const double> xs, std::span<const double> ys, const T& x)
{
    const double xv = value(x);
    if (xs.size() == 1 || xv < xs.front())
        return T(ys.front());
    if (xv >= xs.back())
        return T(ys.back());
    const auto k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), xv) - xs.begin()) - 1;
    const double slope = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
    return ys[k] + slope * (x - xs[k]);
}

/// Same, but extends the end segments linearly beyond the table. Callers
/// reject arguments below xs.front() before getting here.
template <class T>
T interp_extrapolated(std::span<const double> xs, std::span<const double> ys, const T& x)
{
    if (xs.size() == 1)
        return T(ys.front());
    const double xv = value(x);
    std::size_t k = 0;
    if (xv >= xs.back())
        k = xs.size() - 2;
    else if (xv > xs.front())
        k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), xv) - xs.begin()) - 1;
    const double slope = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
    return ys[k] + slope * (x - xs[k]);
}

// ---------------------------------------------------------------------------
// Relative permeability and capillary pressure

struct WaterOilRow {
    double sw, krw, krow, pcow; // pcow in Pa
};

struct GasOilRow {
    double sg, krg, krog, pcog; // pcog in Pa
};

/// Saturation tables. The gas-oil part is empty for two-phase runs.
class RelPermTable {
public:
    RelPermTable() = default;
    /// Validates monotonicity and ranges; throws ConfigError.
    RelPermTable(std::span<const WaterOilRow> water_oil, std::span<const GasOilRow> gas_oil = {});

    bool has_gas() const noexcept { return !sg_.empty(); }

    double swc() const noexcept { return sw_.front(); }
    double sor() const noexcept;
    /// Oil relative permeability at connate water and zero gas.
    double krocw() const noexcept { return krow_.front(); }

    std::span<const double> sw() const noexcept { return sw_; }
    std::span<const double> krw() const noexcept { return krw_; }
    std::span<const double> krow() const noexcept { return krow_; }
    std::span<const double> pcow() const noexcept { return pcow_; }
    std::span<const double> sg() const noexcept { return sg_; }
    std::span<const double> krg() const noexcept { return krg_; }
    std::span<const double> krog() const noexcept { return krog_; }
    std::span<const double> pcog() const noexcept { return pcog_; }

private:
    std::vector<double> sw_, krw_, krow_, pcow_;
    std::vector<double> sg_, krg_, krog_, pcog_;
};

template <class T>
struct WaterOil {
    T krw, krow, pcow;
};

template <class T>
struct GasOil {
    T krg, krog, pcog;
};

template <class T>
WaterOil<T> eval_water_oil(const RelPermTable& t, const T& sw)
{
    return {interp_clamped(t.sw(), t.krw(), sw), interp_clamped(t.sw(), t.krow(), sw),
            interp_clamped(t.sw(), t.pcow(), sw)};
}

template <class T>
GasOil<T> eval_gas_oil(const RelPermTable& t, const T& sg)
{
    return {interp_clamped(t.sg(), t.krg(), sg), interp_clamped(t.sg(), t.krog(), sg),
            interp_clamped(t.sg(), t.pcog(), sg)};
}

void check_krocw(double krocw);

/// Normalized Stone II three-phase oil relative permeability, floored at zero.
/// Throws ConfigError when krocw <= 0.
template <class T>
T stone2_kro(const T& krw, const T& krow, const T& krg, const T& krog, double krocw)
{
    check_krocw(krocw);
    const T raw = krocw * ((krow / krocw + krw) * (krog / krocw + krg) - (krw + krg));
    return max_with(raw, 0.0);
}

// ---------------------------------------------------------------------------
// PVT

struct OilPvtRow {
    double p, bo, muo, rs; // Pa, m3/m3, Pa s, m3/m3
};

struct GasPvtRow {
    double p, bg, mug;
};

struct WaterPvt {
    double p_ref = 1.0e5;
    double bw_ref = 1.0;
    double cw = 0.0;   // 1/Pa
    double muw = 1e-3; // Pa s
};

struct SurfaceDensities {
    double oil = 800.0, water = 1000.0, gas = 1.0; // kg/m3
};

class PvtTable {
public:
    PvtTable() = default;
    /// Validates the tables; throws ConfigError. For dead oil pass rs = 0 rows
    /// and no gas rows.
    PvtTable(std::span<const OilPvtRow> oil, double dbo_dp_usat, double dmuo_dp_usat, const WaterPvt& water,
             std::span<const GasPvtRow> gas, const SurfaceDensities& rho_std);

    std::span<const double> oil_p() const noexcept { return op_; }
    std::span<const double> oil_b() const noexcept { return ob_; }
    std::span<const double> oil_mu() const noexcept { return omu_; }
    std::span<const double> oil_rs() const noexcept { return ors_; }
    double dbo_dp_usat() const noexcept { return dbo_dp_; }
    double dmuo_dp_usat() const noexcept { return dmu_dp_; }
    const WaterPvt& water() const noexcept { return water_; }
    std::span<const double> gas_p() const noexcept { return gp_; }
    std::span<const double> gas_b() const noexcept { return gb_; }
    std::span<const double> gas_mu() const noexcept { return gmu_; }
    bool has_gas() const noexcept { return !gp_.empty(); }
    const SurfaceDensities& surface() const noexcept { return rho_; }

    /// Throws OutOfRange when p lies below the first oil row.
    void check_oil_pressure(double p) const;
    void check_gas_pressure(double p) const;

private:
    std::vector<double> op_, ob_, omu_, ors_;
    double dbo_dp_ = 0.0, dmu_dp_ = 0.0;
    WaterPvt water_;
    std::vector<double> gp_, gb_, gmu_;
    SurfaceDensities rho_;
};

[[noreturn]] void throw_pvt_range(const char* what, double p);

template <class T>
struct PhasePvt {
    T b, mu, rs, rho; // rs only meaningful for oil
};

/// Oil properties at pressure p with bubble point pb (pb <= p). pb == p selects
/// the saturated branch; otherwise R_s is frozen at R_s(pb) and B_o, mu_o grow
/// linearly from their bubble-point values.
template <class T>
PhasePvt<T> eval_pvt_oil(const PvtTable& pvt, const T& p, const T& pb)
{
    pvt.check_oil_pressure(value(p));
    PhasePvt<T> r;
    if (value(pb) >= value(p)) {
        r.b = interp_extrapolated(pvt.oil_p(), pvt.oil_b(), p);
        r.mu = interp_extrapolated(pvt.oil_p(), pvt.oil_mu(), p);
        r.rs = interp_extrapolated(pvt.oil_p(), pvt.oil_rs(), p);
    } else {
        pvt.check_oil_pressure(value(pb));
        r.rs = interp_extrapolated(pvt.oil_p(), pvt.oil_rs(), pb);
        r.b = interp_extrapolated(pvt.oil_p(), pvt.oil_b(), pb) + pvt.dbo_dp_usat() * (p - pb);
        r.mu = interp_extrapolated(pvt.oil_p(), pvt.oil_mu(), pb) + pvt.dmuo_dp_usat() * (p - pb);
    }
    r.rho = (pvt.surface().oil + r.rs * pvt.surface().gas) / r.b;
    return r;
}

template <class T>
PhasePvt<T> eval_pvt_water(const PvtTable& pvt, const T& p)
{
    const WaterPvt& w = pvt.water();
    PhasePvt<T> r;
    using std::exp;
    r.b = w.bw_ref * exp(-w.cw * (p - w.p_ref));
    r.mu = T(w.muw);
    r.rs = T(0.0);
    r.rho = pvt.surface().water / r.b;
    return r;
}

template <class T>
PhasePvt<T> eval_pvt_gas(const PvtTable& pvt, const T& p)
{
    pvt.check_gas_pressure(value(p));
    PhasePvt<T> r;
    r.b = interp_extrapolated(pvt.gas_p(), pvt.gas_b(), p);
    r.mu = interp_extrapolated(pvt.gas_p(), pvt.gas_mu(), p);
    if (!(value(r.b) > 0.0) || !(value(r.mu) > 0.0))
        throw_pvt_range("gas properties non-positive after extrapolation", value(p));
    r.rs = T(0.0);
    r.rho = pvt.surface().gas / r.b;
    return r;
}

} // namespace bosim
