#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "leofl/errors.hpp"
#include "leofl/orbital.hpp"

// Cluster-side planning for one round: how much time the cluster really has between
// receiving the model and the committed global-update instant, how many local
// epochs fit into it, and which satellites act as entry point and uplink sink.

namespace leofl::cu {

// Time available to the cluster between model receipt at t_x and the committed
// update time t_n. When the cluster is visible at t_n the full window counts;
// otherwise the window ends at the last set time before t_n, because the aggregate
// must be gone before the cluster drops below the horizon.
inline double available_time(const orbital::VisibilityPattern& p, double t_n,
                             double t_x) {
    if (!(t_x < t_n))
        throw protocol_error(p.subject + ": receive time is not before the update time");
    if (!p.visible_at(t_x))
        throw protocol_error(p.subject + ": not visible at the model receive time");
    if (p.visible_at(t_n)) return t_n - t_x;
    double last_set = -1.0;
    for (const auto& iv : p.intervals)
        if (iv.set_s > t_x && iv.set_s <= t_n && iv.set_s > last_set)
            last_set = iv.set_s;
    if (last_set < 0.0)
        throw protocol_error(p.subject + ": no visibility set time inside the window");
    return last_set - t_x;
}

// Bound on one in-ring traversal: the farthest satellite is ceil(k/2) hops away.
inline double isl_round_time(int sats_in_orbit, double hop_s) {
    if (sats_in_orbit < 1) throw config_error("orbit needs at least one satellite");
    if (hop_s < 0.0) throw domain_error("hop time must be non-negative");
    return ((sats_in_orbit + 1) / 2) * hop_s;
}

struct EpochBudget {
    int raw = 0;           // what the window arithmetic yields, can be <= 0
    int epochs = 1;        // max(raw, 1); the value actually used
    bool clamped = false;  // true when raw < 1
};

// Local epochs that fit in the available window after both ring traversals and the
// final uplink are paid for. Short passes clamp to a single epoch.
inline EpochBudget epoch_budget(double available_s, double isl_round_s,
                                double cluster_to_gs_s, double epoch_s) {
    if (!(epoch_s > 0.0)) throw config_error("epoch duration must be positive");
    const double slack = available_s - 2.0 * isl_round_s - cluster_to_gs_s;
    double raw_f = std::floor(slack / epoch_s);
    if (raw_f > 1e9) raw_f = 1e9;
    if (raw_f < -1e9) raw_f = -1e9;
    EpochBudget b;
    b.raw = static_cast<int>(raw_f);
    b.clamped = b.raw < 1;
    b.epochs = b.clamped ? 1 : b.raw;
    return b;
}

struct SatChoice {
    orbital::SatelliteId sat;
    double pass_rise_s = 0.0;
    double pass_set_s = 0.0;
};

// Pick the plane member visible at `at_time_s` whose current pass lasts longest
// beyond that instant; ties go to the lowest in-plane index. The query is nudged by
// a few milliseconds either way so a choice exactly on a rise or set boundary still
// resolves. Used for both the downlink entry point and the uplink sink.
inline SatChoice select_visible_sat(const orbital::ConstellationConfig& cfg, int orbit,
                                    const orbital::GroundStation& gs,
                                    double min_elevation_deg, double at_time_s,
                                    double cap_s) {
    if (orbit < 1 || orbit > cfg.orbit_count)
        throw config_error("invalid orbit index " + std::to_string(orbit));
    const int k_p = cfg.sats_per_orbit[static_cast<std::size_t>(orbit - 1)];
    const double nudges[] = {0.0, -1e-2, 1e-2};
    for (double nudge : nudges) {
        double t = at_time_s + nudge;
        if (t < 0.0) t = 0.0;
        const Vec3 gs_pos = orbital::gs_position(gs, t).position_m;
        SatChoice best;
        bool found = false;
        for (int j = 1; j <= k_p; ++j) {
            const orbital::SatelliteId sat{orbit, j};
            const Vec3 pos = orbital::propagate(cfg, sat, t).position_m;
            if (!orbital::is_visible_gs(pos, gs_pos, min_elevation_deg)) continue;
            const double end = orbital::pass_end_s(cfg, sat, gs, min_elevation_deg, t,
                                                   cap_s);
            if (!found || end > best.pass_set_s) {
                best.sat = sat;
                best.pass_set_s = end;
                found = true;
            }
        }
        if (found) {
            best.pass_rise_s =
                orbital::pass_start_s(cfg, best.sat, gs, min_elevation_deg, t);
            return best;
        }
    }
    throw protocol_error("no satellite of cluster " + std::to_string(orbit) +
                         " visible near t = " + std::to_string(at_time_s) + " s");
}

struct ClusterPlan {
    int slot = 0;
    int cluster = 0;
    double receive_s = 0.0;        // t_x: model fully received by the entry satellite
    double available_s = 0.0;      // window until the aggregate must be gone
    EpochBudget budget;
    orbital::SatelliteId source;   // entry satellite for the downlink
    orbital::SatelliteId sink;     // uplink satellite
    double sink_pass_rise_s = 0.0;
    double sink_pass_set_s = 0.0;
    double uplink_start_s = 0.0;
    double arrival_s = 0.0;        // aggregate fully received by the station
};

} // namespace leofl::cu
