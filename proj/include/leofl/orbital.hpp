#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "leofl/constants.hpp"
#include "leofl/errors.hpp"
#include "leofl/vec3.hpp"

// Circular two-body propagation of a Walker constellation in an Earth-centered
// inertial frame, plus ground-station / inter-satellite visibility tests and
// rise-set pattern extraction.
//
// Frame conventions: +z along the rotation axis, the prime meridian lies along +x
// at t = 0, the ground station rotates with the Earth. Satellites are evaluated at
// (t + epoch_offset_s) so the constellation phase can be shifted against the ground
// track without touching the station model.

namespace leofl::orbital {

struct GroundStation {
    std::string name = "gs";
    double latitude_deg = 0.0;
    double longitude_deg = 0.0;

    void validate() const {
        if (!(latitude_deg >= -90.0 && latitude_deg <= 90.0))
            throw config_error("ground station latitude out of [-90, 90]: " +
                               std::to_string(latitude_deg));
        if (!(longitude_deg >= -180.0 && longitude_deg <= 180.0))
            throw config_error("ground station longitude out of [-180, 180]: " +
                               std::to_string(longitude_deg));
    }
};

struct ConstellationConfig {
    enum class Pattern { Delta, Star };

    int orbit_count = 1;                      // number of orbital planes
    std::vector<int> sats_per_orbit;          // satellites in each plane
    std::vector<double> altitude_m;           // altitude above mean radius, per plane
    std::vector<double> inclination_deg;      // per plane
    Pattern pattern = Pattern::Delta;         // Delta: RAAN spread 360/P, Star: 180/P
    int phasing_factor = 1;                   // inter-plane phase offset multiplier
    double epoch_offset_s = 0.0;

    int total_sats() const {
        int n = 0;
        for (int k : sats_per_orbit) n += k;
        return n;
    }

    void validate() const {
        if (orbit_count < 1)
            throw config_error("constellation needs at least one orbit");
        auto check_len = [&](std::size_t len, const char* what) {
            if (len != static_cast<std::size_t>(orbit_count))
                throw config_error(std::string(what) + " must have one entry per orbit");
        };
        check_len(sats_per_orbit.size(), "sats_per_orbit");
        check_len(altitude_m.size(), "altitude_m");
        check_len(inclination_deg.size(), "inclination_deg");
        for (int k : sats_per_orbit)
            if (k < 1) throw config_error("each orbit needs at least one satellite");
        for (double h : altitude_m)
            if (!(h > 0.0)) throw config_error("altitude must be positive");
        for (double i : inclination_deg)
            if (!(i >= 0.0 && i <= 180.0))
                throw config_error("inclination out of [0, 180]");
    }
};

// 1-based plane and in-plane slot, matching the usual constellation labelling.
struct SatelliteId {
    int orbit = 1;
    int slot = 1;

    bool operator==(const SatelliteId&) const = default;
};

struct StateVector {
    Vec3 position_m;
    double time_s = 0.0;
};

struct VisibilityInterval {
    double rise_s = 0.0;
    double set_s = 0.0;
};

struct VisibilityPattern {
    std::string subject;                      // label used in CSV export
    double horizon_s = 0.0;
    std::vector<VisibilityInterval> intervals; // sorted, non-overlapping

    bool visible_at(double t, double eps = 1e-9) const {
        for (const auto& iv : intervals) {
            if (t < iv.rise_s - eps) return false;
            if (t <= iv.set_s + eps) return true;
        }
        return false;
    }
};

inline double orbit_radius_m(const ConstellationConfig& cfg, int orbit) {
    return constants::earth_radius_m + cfg.altitude_m[static_cast<std::size_t>(orbit - 1)];
}

inline double orbital_period_s(double radius_m) {
    return 2.0 * std::numbers::pi *
           std::sqrt(radius_m * radius_m * radius_m / constants::earth_mu_m3_s2);
}

inline double mean_motion_rad_s(double radius_m) {
    return std::sqrt(constants::earth_mu_m3_s2 / (radius_m * radius_m * radius_m));
}

inline double inclination_rad(const ConstellationConfig& cfg, int orbit) {
    return cfg.inclination_deg[static_cast<std::size_t>(orbit - 1)] *
           std::numbers::pi / 180.0;
}

inline void check_satellite_id(const ConstellationConfig& cfg, const SatelliteId& sat) {
    if (sat.orbit < 1 || sat.orbit > cfg.orbit_count)
        throw config_error("invalid orbit index " + std::to_string(sat.orbit));
    int k = cfg.sats_per_orbit[static_cast<std::size_t>(sat.orbit - 1)];
    if (sat.slot < 1 || sat.slot > k)
        throw config_error("invalid satellite slot " + std::to_string(sat.slot) +
                           " in orbit " + std::to_string(sat.orbit));
}

// Position of one satellite at simulation time t (seconds).
inline StateVector propagate(const ConstellationConfig& cfg, const SatelliteId& sat,
                             double t) {
    check_satellite_id(cfg, sat);
    const double two_pi = 2.0 * std::numbers::pi;
    const std::size_t p = static_cast<std::size_t>(sat.orbit - 1);

    const double a = orbit_radius_m(cfg, sat.orbit);
    const double n = mean_motion_rad_s(a);
    const int k_p = cfg.sats_per_orbit[p];
    const int k_total = cfg.total_sats();

    const double raan_spread =
        (cfg.pattern == ConstellationConfig::Pattern::Delta) ? two_pi : std::numbers::pi;
    const double raan = raan_spread / cfg.orbit_count * (sat.orbit - 1);
    const double incl = inclination_rad(cfg, sat.orbit);

    const double phase = n * (t + cfg.epoch_offset_s)
                       + two_pi * (sat.slot - 1) / k_p
                       + two_pi * cfg.phasing_factor * (sat.orbit - 1) / k_total;

    // In-plane position rotated by inclination about x, then by RAAN about z.
    const double cp = std::cos(phase), sp = std::sin(phase);
    const double ci = std::cos(incl), si = std::sin(incl);
    const double co = std::cos(raan), so = std::sin(raan);

    const double xp = a * cp;
    const double yp = a * sp * ci;
    const double zp = a * sp * si;

    Vec3 pos{co * xp - so * yp, so * xp + co * yp, zp};
    return {pos, t};
}

// Ground-station position in the inertial frame at time t.
inline StateVector gs_position(const GroundStation& gs, double t) {
    gs.validate();
    const double lat = gs.latitude_deg * std::numbers::pi / 180.0;
    const double lon = gs.longitude_deg * std::numbers::pi / 180.0;
    const double ang = lon + constants::earth_rotation_rad_s * t;
    const double r = constants::earth_radius_m;
    Vec3 pos{r * std::cos(lat) * std::cos(ang), r * std::cos(lat) * std::sin(ang),
             r * std::sin(lat)};
    return {pos, t};
}

// Elevation test: the satellite is visible when the angle of the line of sight
// above the station's local horizon reaches the cutoff.
inline bool is_visible_gs(const Vec3& sat_pos_m, const Vec3& gs_pos_m,
                          double min_elevation_deg) {
    Vec3 los = sat_pos_m - gs_pos_m;
    const double los_norm = los.norm();
    const double gs_norm = gs_pos_m.norm();
    if (los_norm <= 0.0 || gs_norm <= 0.0)
        throw domain_error("degenerate geometry in visibility test");
    const double sin_elev = gs_pos_m.dot(los) / (gs_norm * los_norm);
    return sin_elev >= std::sin(min_elevation_deg * std::numbers::pi / 180.0);
}

// Longest line-of-sight distance between two satellites whose sight line still
// clears the Earth's surface: sum of the two horizon tangents.
inline double max_slant_range_m(double altitude_a_m, double altitude_b_m) {
    if (!(altitude_a_m > 0.0) || !(altitude_b_m > 0.0))
        throw domain_error("altitudes must be positive");
    const double re = constants::earth_radius_m;
    auto tangent = [&](double h) { return std::sqrt(h * h + 2.0 * re * h); };
    return tangent(altitude_a_m) + tangent(altitude_b_m);
}

inline bool is_visible_isl(const Vec3& pos_a_m, const Vec3& pos_b_m,
                           double altitude_a_m, double altitude_b_m) {
    const double d = (pos_a_m - pos_b_m).norm();
    return d < max_slant_range_m(altitude_a_m, altitude_b_m);
}

namespace detail {

// Boundary refinement: f flips between lo and hi; shrink until hi - lo <= tol.
template <typename F>
double bisect_flip(F&& f, double lo, double hi, bool f_lo, double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) == f_lo)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Step-sample a boolean function of time over [0, horizon] and refine every
// transition by bisection. Features shorter than the step can be missed, which is
// why the step is capped.
template <typename F>
std::vector<VisibilityInterval> scan_intervals(F&& visible, double horizon_s,
                                               double step_s, double refine_tol_s) {
    if (!(horizon_s > 0.0)) throw config_error("horizon must be positive");
    if (!(step_s > 0.0)) throw config_error("step must be positive");
    if (step_s > 30.0) throw config_error("sampling step above the 30 s contract cap");

    std::vector<VisibilityInterval> out;
    bool prev = visible(0.0);
    double t_prev = 0.0;
    double open_rise = prev ? 0.0 : -1.0;

    for (double t = step_s;; t += step_s) {
        if (t > horizon_s) t = horizon_s;
        const bool cur = visible(t);
        if (cur != prev) {
            const double boundary = bisect_flip(visible, t_prev, t, prev, refine_tol_s);
            if (cur)
                open_rise = boundary;
            else
                out.push_back({open_rise, boundary});
        }
        prev = cur;
        t_prev = t;
        if (t >= horizon_s) break;
    }
    if (prev) out.push_back({open_rise, horizon_s});
    return out;
}

} // namespace detail

// Rise-set pattern of one satellite as seen from the ground station.
inline VisibilityPattern satellite_pattern(const ConstellationConfig& cfg,
                                           const SatelliteId& sat,
                                           const GroundStation& gs,
                                           double min_elevation_deg, double horizon_s,
                                           double step_s, double refine_tol_s = 1e-3) {
    cfg.validate();
    check_satellite_id(cfg, sat);
    auto visible = [&](double t) {
        return is_visible_gs(propagate(cfg, sat, t).position_m,
                             gs_position(gs, t).position_m, min_elevation_deg);
    };
    VisibilityPattern p;
    p.subject = "k_" + std::to_string(sat.orbit) + "_" + std::to_string(sat.slot);
    p.horizon_s = horizon_s;
    p.intervals = detail::scan_intervals(visible, horizon_s, step_s, refine_tol_s);
    return p;
}

// Union of interval lists; abutting or overlapping intervals merge.
inline std::vector<VisibilityInterval>
union_intervals(const std::vector<std::vector<VisibilityInterval>>& lists,
                double merge_eps = 1e-9) {
    std::vector<VisibilityInterval> all;
    for (const auto& l : lists) all.insert(all.end(), l.begin(), l.end());
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.rise_s < b.rise_s || (a.rise_s == b.rise_s && a.set_s < b.set_s);
    });
    std::vector<VisibilityInterval> out;
    for (const auto& iv : all) {
        if (!out.empty() && iv.rise_s <= out.back().set_s + merge_eps)
            out.back().set_s = std::max(out.back().set_s, iv.set_s);
        else
            out.push_back(iv);
    }
    return out;
}

// Cumulative pattern of a whole plane: the cluster counts as visible whenever any
// member satellite is.
inline VisibilityPattern cluster_pattern(const ConstellationConfig& cfg, int orbit,
                                         const GroundStation& gs,
                                         double min_elevation_deg, double horizon_s,
                                         double step_s, double refine_tol_s = 1e-3) {
    cfg.validate();
    if (orbit < 1 || orbit > cfg.orbit_count)
        throw config_error("invalid orbit index " + std::to_string(orbit));
    std::vector<std::vector<VisibilityInterval>> member;
    const int k_p = cfg.sats_per_orbit[static_cast<std::size_t>(orbit - 1)];
    member.reserve(static_cast<std::size_t>(k_p));
    for (int j = 1; j <= k_p; ++j)
        member.push_back(satellite_pattern(cfg, {orbit, j}, gs, min_elevation_deg,
                                           horizon_s, step_s, refine_tol_s)
                             .intervals);
    VisibilityPattern p;
    p.subject = "cluster_" + std::to_string(orbit);
    p.horizon_s = horizon_s;
    p.intervals = union_intervals(member);
    return p;
}

// End of the visibility pass containing from_s (march forward, then bisect).
// Returns cap_s when the pass is still open at the cap. Requires visibility at from_s.
inline double pass_end_s(const ConstellationConfig& cfg, const SatelliteId& sat,
                         const GroundStation& gs, double min_elevation_deg,
                         double from_s, double cap_s, double refine_tol_s = 1e-3) {
    auto visible = [&](double t) {
        return is_visible_gs(propagate(cfg, sat, t).position_m,
                             gs_position(gs, t).position_m, min_elevation_deg);
    };
    if (!visible(from_s))
        throw protocol_error("pass_end_s called while not visible");
    const double step = 10.0;
    double lo = from_s;
    double hi = from_s;
    for (;;) {
        hi = std::min(lo + step, cap_s);
        if (hi >= cap_s && visible(hi)) return cap_s;
        if (!visible(hi)) break;
        lo = hi;
        if (lo >= cap_s) return cap_s;
    }
    return detail::bisect_flip(visible, lo, hi, true, refine_tol_s);
}

// Start of the visibility pass containing from_s (march backward, floor at 0).
inline double pass_start_s(const ConstellationConfig& cfg, const SatelliteId& sat,
                           const GroundStation& gs, double min_elevation_deg,
                           double from_s, double refine_tol_s = 1e-3) {
    auto visible = [&](double t) {
        return is_visible_gs(propagate(cfg, sat, t).position_m,
                             gs_position(gs, t).position_m, min_elevation_deg);
    };
    if (!visible(from_s))
        throw protocol_error("pass_start_s called while not visible");
    const double step = 10.0;
    double hi = from_s;
    double lo = from_s;
    for (;;) {
        lo = std::max(hi - step, 0.0);
        if (lo <= 0.0 && visible(lo)) return 0.0;
        if (!visible(lo)) break;
        hi = lo;
        if (hi <= 0.0) return 0.0;
    }
    // Invert the argument so the generic flip refiner sees "visible below".
    auto invisible_after = [&](double t) { return !visible(t); };
    return detail::bisect_flip(invisible_after, lo, hi, true, refine_tol_s);
}

// CSV export: one row per interval, times in seconds with millisecond precision.
inline void write_pattern_csv(std::ostream& os,
                              std::span<const VisibilityPattern> patterns) {
    os << "subject,rise_s,set_s\n";
    char buf[128];
    for (const auto& p : patterns)
        for (const auto& iv : p.intervals) {
            std::snprintf(buf, sizeof(buf), "%s,%.3f,%.3f\n", p.subject.c_str(),
                          iv.rise_s, iv.set_s);
            os << buf;
        }
}

} // namespace leofl::orbital
