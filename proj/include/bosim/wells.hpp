#pragma once

#include "bosim/grid.hpp"
#include "bosim/units.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace bosim {

enum class Phase : int { Water = 0, Oil = 1, Gas = 2 };

enum class WellType { Producer, Injector };

enum class ConstraintKind { Bhp, OilRate, WaterRate, LiquidRate };

std::string to_string(ConstraintKind k);
ConstraintKind parse_constraint_kind(const std::string& s);

/// Operating constraint. Rate targets and limits are positive surface rates
/// (m3/s) measured in the well's natural direction (produced for producers,
/// injected for injectors). A NaN limit means "no limit".
struct Constraint {
    ConstraintKind kind = ConstraintKind::Bhp;
    double target = 0.0;                                     // Pa or m3/s
    double bhp_limit = std::numeric_limits<double>::quiet_NaN();  // min for producers, max for injectors
    double rate_limit = std::numeric_limits<double>::quiet_NaN(); // max rate while on BHP control
    ConstraintKind limit_kind = ConstraintKind::LiquidRate;       // rate kind used when the rate limit binds

    void validate() const;
};

struct ScheduleEntry {
    double start = 0.0; // s
    Constraint constraint;
};

struct Perforation {
    Index cell = 0;     // grid cell
    double wi = 0.0;    // m3
    double depth = 0.0; // m, perforation depth
};

struct Well {
    std::string name;
    WellType type = WellType::Producer;
    Phase injected = Phase::Water;
    std::vector<Perforation> perforations;
    double ref_depth = 0.0; // z_h
    std::vector<ScheduleEntry> schedule;

    /// Throws ConfigError for an empty or unsorted schedule, negative indices,
    /// or an injector rate constraint that does not match its phase.
    void validate() const;
    double sign() const noexcept { return type == WellType::Injector ? 1.0 : -1.0; }
};

/// Peaceman equivalent radius in the plane normal to the well, with cell
/// extents d1, d2 and permeabilities k1, k2 along the two in-plane axes.
double peaceman_radius(double d1, double d2, double k1, double k2);

/// Anisotropic Peaceman well index. Throws InvalidInput when r_o <= r_w, when
/// r_w <= 0 or when a permeability in the normal plane is not positive.
double peaceman_index(const std::array<double, 3>& extent, const std::array<double, 3>& perm, double rw, double skin,
                      char direction = 'z');

/// Surface rate through one perforation, positive into the reservoir:
/// q = wi * mobility * (p_h - p_cell - rho g (z_h - z)).
/// `mobility` already contains the 1/B factor.
template <class T>
T perforation_rate(double wi, const T& mobility, const T& ph, const T& p_cell, const T& rho, double z_h, double z)
{
    return wi * mobility * (ph - p_cell - rho * (units::gravity * (z_h - z)));
}

/// Surface component rates of a whole well (sum over perforations), positive
/// into the reservoir.
template <class T>
struct WellRates {
    T water{}, oil{}, gas{};
};

/// Well equation residual for the active constraint.
template <class T>
T well_residual(const Well& well, const Constraint& c, const T& ph, const WellRates<T>& q)
{
    const double s = well.sign();
    switch (c.kind) {
    case ConstraintKind::Bhp: return ph - c.target;
    case ConstraintKind::OilRate: return q.oil - s * c.target;
    case ConstraintKind::WaterRate: return q.water - s * c.target;
    case ConstraintKind::LiquidRate: return q.water + q.oil - s * c.target;
    }
    return ph - c.target;
}

/// Constraint active at time t: last schedule entry with start <= t.
/// Throws ConfigError on an empty schedule.
const Constraint& active_constraint(const Well& well, double t);

/// Schedule start times after t0 and up to t1 across all wells, ascending.
std::vector<double> schedule_events(const std::vector<Well>& wells, double t0, double t1);

/// Limit check after a converged solve. Returns the replacement constraint
/// when a rate-controlled well violates its BHP limit (switch to BHP at the
/// limit) or a BHP-controlled well exceeds its rate limit (switch to rate
/// control at the limit).
std::optional<Constraint> check_limits(const Well& well, const Constraint& c, double ph, const WellRates<double>& q);

/// Produced (or injected) rate of the given kind, in the well's natural direction.
double natural_rate(const Well& well, ConstraintKind kind, const WellRates<double>& q);

} // namespace bosim
