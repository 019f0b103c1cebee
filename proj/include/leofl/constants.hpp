#pragma once

// Physical constants shared across the library. SI units throughout.

namespace leofl::constants {

inline constexpr double earth_mu_m3_s2 = 3.986004418e14;   // geocentric gravitational parameter
inline constexpr double earth_radius_m = 6.371e6;          // mean Earth radius
inline constexpr double earth_rotation_rad_s = 7.2921159e-5;
inline constexpr double light_speed_m_s = 2.99792458e8;
inline constexpr double boltzmann_j_per_k = 1.380649e-23;

} // namespace leofl::constants
