#pragma once

// Field-unit to SI conversion factors. Kernels work in SI; conversion only
// happens when a deck is turned into a simulation model and when reports are
// written.

namespace bosim::units {

inline constexpr double psi = 6894.757293168361;      // Pa
inline constexpr double bar = 1.0e5;                  // Pa
inline constexpr double ft = 0.3048;                  // m
inline constexpr double ft2 = ft * ft;
inline constexpr double ft3 = ft * ft * ft;
inline constexpr double millidarcy = 9.869232667160128e-16; // m^2
inline constexpr double darcy = 1000.0 * millidarcy;
inline constexpr double centipoise = 1.0e-3;          // Pa s
inline constexpr double bbl = 0.158987294928;         // m^3
inline constexpr double mscf = 1000.0 * ft3;          // m^3
inline constexpr double day = 86400.0;                // s
inline constexpr double lb_per_ft3 = 16.018463373960138; // kg/m^3

inline constexpr double stb_per_day = bbl / day;      // m^3/s
inline constexpr double mscf_per_day = mscf / day;    // m^3/s
inline constexpr double rs_field = mscf / bbl;        // Mscf/stb -> m^3/m^3
inline constexpr double bg_field = bbl / mscf;        // rb/Mscf -> m^3/m^3
inline constexpr double per_psi = 1.0 / psi;          // 1/Pa

inline constexpr double gravity = 9.80665;            // m/s^2

} // namespace bosim::units
