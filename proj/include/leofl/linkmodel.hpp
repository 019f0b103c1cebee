#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "leofl/constants.hpp"
#include "leofl/errors.hpp"
#include "leofl/orbital.hpp"

// Free-space link budget and worst-case transfer timing. Rates come from the
// Shannon capacity of an AWGN channel with thermal noise; transfer time is
// serialization plus one-way propagation.

namespace leofl::linkmodel {

inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watts_to_dbm(double w) {
    if (!(w > 0.0)) throw domain_error("power must be positive");
    return 10.0 * std::log10(w / 1e-3);
}
inline double dbi_to_linear(double dbi) { return std::pow(10.0, dbi / 10.0); }
inline double linear_to_dbi(double g) {
    if (!(g > 0.0)) throw domain_error("gain must be positive");
    return 10.0 * std::log10(g);
}

struct LinkBudget {
    double tx_power_w = 10.0;            // 40 dBm
    double antenna_gain_linear = 1633.0; // ~32.1 dBi, both ends
    double bandwidth_hz = 5e8;
    double carrier_hz = 2e10;
    double system_temp_k = 354.0;

    void validate() const {
        auto pos = [](double v, const char* name) {
            if (!(v > 0.0)) throw config_error(std::string(name) + " must be positive");
        };
        pos(tx_power_w, "tx_power_w");
        pos(antenna_gain_linear, "antenna_gain_linear");
        pos(bandwidth_hz, "bandwidth_hz");
        pos(carrier_hz, "carrier_hz");
        pos(system_temp_k, "system_temp_k");
    }
};

// Link parameters in the units configuration files use; converted to the linear
// budget once, where needed, so configs round-trip without unit churn.
struct LinkSpec {
    double tx_power_dbm = 40.0;
    double antenna_gain_dbi = 32.13;
    double bandwidth_hz = 5e8;
    double carrier_hz = 2e10;
    double system_temp_k = 354.0;

    bool operator==(const LinkSpec&) const = default;

    LinkBudget to_budget() const {
        return {dbm_to_watts(tx_power_dbm), dbi_to_linear(antenna_gain_dbi),
                bandwidth_hz, carrier_hz, system_temp_k};
    }
};

inline double noise_power_w(double bandwidth_hz, double system_temp_k) {
    if (!(bandwidth_hz > 0.0) || !(system_temp_k > 0.0))
        throw domain_error("bandwidth and temperature must be positive");
    return constants::boltzmann_j_per_k * bandwidth_hz * system_temp_k;
}

// Achievable rate in bit/s over distance d with isotropic free-space loss.
inline double data_rate_bps(const LinkBudget& b, double distance_m) {
    b.validate();
    if (!(distance_m > 0.0)) throw domain_error("distance must be positive");
    const double c = constants::light_speed_m_s;
    const double n = noise_power_w(b.bandwidth_hz, b.system_temp_k);
    const double fspl_denom = 16.0 * std::numbers::pi * std::numbers::pi *
                              distance_m * distance_m * b.carrier_hz * b.carrier_hz;
    const double snr = b.tx_power_w * b.antenna_gain_linear * b.antenna_gain_linear *
                       c * c / (fspl_denom * n);
    return b.bandwidth_hz * std::log2(1.0 + snr);
}

struct HopTiming {
    double rate_bps = 0.0;
    double transfer_s = 0.0;      // serialization + propagation
    double propagation_s = 0.0;
};

inline HopTiming transfer_time(double payload_bits, const LinkBudget& b,
                               double distance_m) {
    if (payload_bits < 0.0) throw domain_error("payload must be non-negative");
    HopTiming t;
    t.rate_bps = data_rate_bps(b, distance_m);
    t.propagation_s = distance_m / constants::light_speed_m_s;
    t.transfer_s = payload_bits / t.rate_bps + t.propagation_s;
    return t;
}

// Slant range to a satellite sitting exactly at the elevation cutoff; this is the
// longest ground-station distance at which the link is ever used.
inline double max_gs_distance_m(double altitude_m, double min_elevation_deg) {
    if (!(altitude_m > 0.0)) throw domain_error("altitude must be positive");
    const double re = constants::earth_radius_m;
    const double ratio = (re + altitude_m) / re;
    const double a = min_elevation_deg * std::numbers::pi / 180.0;
    const double ca = std::cos(a);
    const double under = ratio * ratio - ca * ca;
    if (under < 0.0) throw domain_error("elevation cutoff exceeds geometric limit");
    return re * (std::sqrt(under) - std::sin(a));
}

// Chord between in-plane neighbours of a ring of k satellites at one altitude.
inline double isl_neighbor_chord_m(double altitude_m, int sats_in_orbit) {
    if (!(altitude_m > 0.0)) throw domain_error("altitude must be positive");
    if (sats_in_orbit < 1) throw config_error("orbit needs at least one satellite");
    const double r = constants::earth_radius_m + altitude_m;
    return 2.0 * r * std::sin(std::numbers::pi / sats_in_orbit);
}

struct GsTiming {
    double gs_to_cluster_s = 0.0;
    double cluster_to_gs_s = 0.0;
};

/// Worst-case ground-link timing for one plane: payload transferred at the rate of
// the maximum slant range. Symmetric up/down by assumption.
inline GsTiming worst_case_gs_timing(const orbital::ConstellationConfig& cfg, int orbit,
                                     const orbital::VisibilityPattern& cluster_pat,
                                     double min_elevation_deg, const LinkBudget& b,
                                     double payload_bits) {
    if (orbit < 1 || orbit > cfg.orbit_count)
        throw config_error("invalid orbit index " + std::to_string(orbit));
    if (cluster_pat.intervals.empty())
        throw infeasible_error("cluster " + std::to_string(orbit) +
                               " is never visible within the horizon");
    const double h = cfg.altitude_m[static_cast<std::size_t>(orbit - 1)];
    const double d = max_gs_distance_m(h, min_elevation_deg);
    const double t = transfer_time(payload_bits, b, d).transfer_s;
    return {t, t};
}

} // namespace leofl::linkmodel
