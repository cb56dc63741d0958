#include "bosim/props.hpp"

#include "bosim/error.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace bosim {

namespace {

void require(bool ok, const std::string& msg)
{
    if (!ok)
        throw ConfigError(msg);
}

void strictly_increasing(std::span<const double> v, const char* name)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        require(v[i] > v[i - 1], std::string(name) + " column must be strictly increasing");
}

void in_unit_interval(std::span<const double> v, const char* name)
{
    for (double x : v)
        require(x >= 0.0 && x <= 1.0, std::string(name) + " values must lie in [0, 1]");
}

void monotone(std::span<const double> v, bool increasing, const char* name)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        require(increasing ? v[i] >= v[i - 1] : v[i] <= v[i - 1],
                std::string(name) + (increasing ? " must be nondecreasing" : " must be nonincreasing"));
}

} // namespace

RelPermTable::RelPermTable(std::span<const WaterOilRow> water_oil, std::span<const GasOilRow> gas_oil)
{
    require(!water_oil.empty(), "water-oil saturation table is empty");
    for (const auto& r : water_oil) {
        sw_.push_back(r.sw);
        krw_.push_back(r.krw);
        krow_.push_back(r.krow);
        pcow_.push_back(r.pcow);
    }
    for (const auto& r : gas_oil) {
        sg_.push_back(r.sg);
        krg_.push_back(r.krg);
        krog_.push_back(r.krog);
        pcog_.push_back(r.pcog);
    }
    strictly_increasing(sw_, "S_w");
    in_unit_interval(sw_, "S_w");
    in_unit_interval(krw_, "K_rw");
    in_unit_interval(krow_, "K_row");
    monotone(krw_, true, "K_rw");
    monotone(krow_, false, "K_row");
    if (!sg_.empty()) {
        strictly_increasing(sg_, "S_g");
        in_unit_interval(sg_, "S_g");
        in_unit_interval(krg_, "K_rg");
        in_unit_interval(krog_, "K_rog");
        monotone(krg_, true, "K_rg");
        monotone(krog_, false, "K_rog");
    }
}

double RelPermTable::sor() const noexcept
{
    for (std::size_t i = 0; i < sw_.size(); ++i)
        if (krow_[i] <= 0.0)
            return 1.0 - sw_[i];
    return 1.0 - sw_.back();
}

void check_krocw(double krocw)
{
    if (!(krocw > 0.0))
        throw ConfigError("Stone II needs a positive oil relative permeability at connate water");
}

PvtTable::PvtTable(std::span<const OilPvtRow> oil, double dbo_dp_usat, double dmuo_dp_usat, const WaterPvt& water,
                   std::span<const GasPvtRow> gas, const SurfaceDensities& rho_std)
    : dbo_dp_(dbo_dp_usat), dmu_dp_(dmuo_dp_usat), water_(water), rho_(rho_std)
{
    require(!oil.empty(), "oil PVT table is empty");
    for (const auto& r : oil) {
        op_.push_back(r.p);
        ob_.push_back(r.bo);
        omu_.push_back(r.muo);
        ors_.push_back(r.rs);
        require(r.bo > 0.0, "B_o must be positive");
        require(r.muo > 0.0, "oil viscosity must be positive");
    }
    strictly_increasing(op_, "oil pressure");
    monotone(ors_, true, "R_s");
    for (const auto& r : gas) {
        gp_.push_back(r.p);
        gb_.push_back(r.bg);
        gmu_.push_back(r.mug);
        require(r.bg > 0.0, "B_g must be positive");
        require(r.mug > 0.0, "gas viscosity must be positive");
    }
    strictly_increasing(gp_, "gas pressure");
    for (std::size_t i = 1; i < gb_.size(); ++i)
        require(gb_[i] < gb_[i - 1], "B_g must decrease with pressure");
    require(water.bw_ref > 0.0, "B_w must be positive");
    require(water.muw > 0.0, "water viscosity must be positive");
    require(rho_std.oil > 0.0 && rho_std.water > 0.0 && rho_std.gas > 0.0, "surface densities must be positive");
}

void throw_pvt_range(const char* what, double p)
{
    std::ostringstream os;
    os << what << " (p = " << p << " Pa)";
    throw OutOfRange(os.str());
}

void PvtTable::check_oil_pressure(double p) const
{
    if (!(p >= op_.front()))
        throw_pvt_range("pressure below the oil PVT table", p);
}

void PvtTable::check_gas_pressure(double p) const
{
    if (gp_.empty())
        throw ConfigError("gas PVT table missing");
    if (!(p >= gp_.front()))
        throw_pvt_range("pressure below the gas PVT table", p);
}

} // namespace bosim
