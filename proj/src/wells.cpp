#include "bosim/wells.hpp"

#include "bosim/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bosim {

std::string to_string(ConstraintKind k)
{
    switch (k) {
    case ConstraintKind::Bhp: return "bhp";
    case ConstraintKind::OilRate: return "oil_rate";
    case ConstraintKind::WaterRate: return "water_rate";
    case ConstraintKind::LiquidRate: return "liquid_rate";
    }
    return "?";
}

ConstraintKind parse_constraint_kind(const std::string& s)
{
    if (s == "bhp" || s == "BHP")
        return ConstraintKind::Bhp;
    if (s == "oil_rate" || s == "ORAT")
        return ConstraintKind::OilRate;
    if (s == "water_rate" || s == "WRAT")
        return ConstraintKind::WaterRate;
    if (s == "liquid_rate" || s == "LRAT")
        return ConstraintKind::LiquidRate;
    throw ConfigError("unknown constraint kind '" + s + "'");
}

void Constraint::validate() const
{
    if (!std::isfinite(target))
        throw ConfigError("constraint target must be finite");
    if (kind != ConstraintKind::Bhp && target < 0.0)
        throw ConfigError("rate targets are positive magnitudes");
    if (kind == ConstraintKind::Bhp && !(target > 0.0))
        throw ConfigError("BHP target must be positive");
    if (!std::isnan(rate_limit) && rate_limit < 0.0)
        throw ConfigError("rate limit must be non-negative");
    if (limit_kind == ConstraintKind::Bhp)
        throw ConfigError("rate limit kind must be a rate");
}

void Well::validate() const
{
    if (schedule.empty())
        throw ConfigError("well '" + name + "': empty schedule");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        schedule[i].constraint.validate();
        if (i > 0 && !(schedule[i].start > schedule[i - 1].start))
            throw ConfigError("well '" + name + "': schedule times must increase strictly");
        const auto& c = schedule[i].constraint;
        if (type == WellType::Injector && injected == Phase::Gas &&
            (c.kind != ConstraintKind::Bhp || !std::isnan(c.rate_limit)))
            throw ConfigError("well '" + name + "': gas injectors support BHP control only");
        if (type == WellType::Injector && injected == Phase::Water && c.kind == ConstraintKind::OilRate)
            throw ConfigError("well '" + name + "': water injector cannot be oil-rate controlled");
    }
    for (const auto& p : perforations)
        if (p.wi < 0.0 || p.cell < 0)
            throw ConfigError("well '" + name + "': invalid perforation");
}

double peaceman_radius(double d1, double d2, double k1, double k2)
{
    const double a = std::sqrt(k2 / k1), b = std::sqrt(k1 / k2);
    return 0.28 * std::sqrt(a * d1 * d1 + b * d2 * d2) / (std::pow(k2 / k1, 0.25) + std::pow(k1 / k2, 0.25));
}

double peaceman_index(const std::array<double, 3>& extent, const std::array<double, 3>& perm, double rw, double skin,
                      char direction)
{
    int axis = 2;
    if (direction == 'x' || direction == 'X')
        axis = 0;
    else if (direction == 'y' || direction == 'Y')
        axis = 1;
    else if (direction != 'z' && direction != 'Z')
        throw InvalidInput("well direction must be x, y or z");
    const int i1 = axis == 0 ? 1 : 0;
    const int i2 = axis == 2 ? 1 : 2;
    const double d1 = extent[static_cast<std::size_t>(i1)], d2 = extent[static_cast<std::size_t>(i2)];
    const double k1 = perm[static_cast<std::size_t>(i1)], k2 = perm[static_cast<std::size_t>(i2)];
    if (!(rw > 0.0))
        throw InvalidInput("well radius must be positive");
    if (!(k1 > 0.0) || !(k2 > 0.0))
        throw InvalidInput("Peaceman index needs positive permeability normal to the well");
    const double ro = peaceman_radius(d1, d2, k1, k2);
    if (!(ro > rw))
        throw InvalidInput("Peaceman equivalent radius does not exceed the well radius");
    const double denom = std::log(ro / rw) + skin;
    if (!(denom > 0.0))
        throw InvalidInput("skin makes the well index non-positive");
    return 2.0 * std::numbers::pi * std::sqrt(k1 * k2) * extent[static_cast<std::size_t>(axis)] / denom;
}

const Constraint& active_constraint(const Well& well, double t)
{
    if (well.schedule.empty())
        throw ConfigError("well '" + well.name + "': empty schedule");
    const ScheduleEntry* cur = &well.schedule.front();
    for (const auto& e : well.schedule)
        if (e.start <= t)
            cur = &e;
    return cur->constraint;
}

std::vector<double> schedule_events(const std::vector<Well>& wells, double t0, double t1)
{
    std::vector<double> ev;
    for (const auto& w : wells)
        for (const auto& e : w.schedule)
            if (e.start > t0 && e.start <= t1)
                ev.push_back(e.start);
    std::sort(ev.begin(), ev.end());
    ev.erase(std::unique(ev.begin(), ev.end()), ev.end());
    return ev;
}

double natural_rate(const Well& well, ConstraintKind kind, const WellRates<double>& q)
{
    const double s = well.sign();
    switch (kind) {
    case ConstraintKind::OilRate: return s * q.oil;
    case ConstraintKind::WaterRate: return s * q.water;
    case ConstraintKind::LiquidRate: return s * (q.water + q.oil);
    case ConstraintKind::Bhp: break;
    }
    return 0.0;
}

std::optional<Constraint> check_limits(const Well& well, const Constraint& c, double ph, const WellRates<double>& q)
{
    const bool injector = well.type == WellType::Injector;
    if (c.kind != ConstraintKind::Bhp) {
        if (std::isnan(c.bhp_limit))
            return std::nullopt;
        const bool violated = injector ? ph > c.bhp_limit : ph < c.bhp_limit;
        if (!violated)
            return std::nullopt;
        Constraint n = c;
        n.kind = ConstraintKind::Bhp;
        n.target = c.bhp_limit;
        n.rate_limit = c.target;
        n.limit_kind = c.kind;
        return n;
    }
    if (std::isnan(c.rate_limit))
        return std::nullopt;
    if (natural_rate(well, c.limit_kind, q) <= c.rate_limit)
        return std::nullopt;
    Constraint n = c;
    n.kind = c.limit_kind;
    n.target = c.rate_limit;
    n.bhp_limit = c.target;
    return n;
}

} // namespace bosim
