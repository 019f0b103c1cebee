#pragma once

#include <span>
#include <string>
#include <vector>

#include "leofl/errors.hpp"
#include "leofl/orbital.hpp"

// Global-update scheduling. For each training round the ground station commits to a
// global-update time before dispatching work: every cluster gets a demand time (the
// earliest instant its aggregate could be back given worst-case link timings and a
// minimum learning window), the demand is pushed to a feasible uplink completion
// using the cluster's rise/set pattern, and the slowest cluster fixes the round time.

namespace leofl::gu {

struct ClusterTiming {
    double gs_to_cluster_s = 0.0;   // worst-case downlink of the model
    double cluster_to_gs_s = 0.0;   // worst-case uplink of the aggregate
    double isl_round_s = 0.0;       // in-ring distribution or collection bound
    double min_learning_s = 0.0;    // smallest learning window budgeted per round
    double epoch_s = 0.0;           // duration of one local epoch
};

struct ClusterScheduleEntry {
    int cluster = 0;
    double rise_s = 0.0;        // first visibility at/after the slot start
    double demand_s = 0.0;      // earliest possible aggregate readiness
    double feasible_s = 0.0;    // uplink completion satisfying the visibility pattern
};

struct SlotSchedule {
    int slot = 0;
    double slot_start_s = 0.0;
    double global_update_s = 0.0;
    std::vector<ClusterScheduleEntry> clusters;
};

// First instant at or after `after_s` at which the pattern is visible: `after_s`
// itself when inside an interval, otherwise the next rise.
inline double first_rise(const orbital::VisibilityPattern& p, double after_s) {
    for (const auto& iv : p.intervals) {
        if (after_s <= iv.set_s) return (after_s >= iv.rise_s) ? after_s : iv.rise_s;
    }
    throw infeasible_error(p.subject + ": no visibility at or after " +
                           std::to_string(after_s) + " s within the horizon");
}

// Earliest time the cluster aggregate can exist: first contact, model downlink,
// in-ring distribution, the minimum learning window, then in-ring collection.
inline double demand_time(const orbital::VisibilityPattern& p, double slot_start_s,
                          const ClusterTiming& t) {
    const double rise = first_rise(p, slot_start_s);
    return rise + t.gs_to_cluster_s + t.isl_round_s + t.min_learning_s + t.isl_round_s;
}

// Push the demand to an uplink completion compatible with the pattern. In the
// default rule the uplink starts at the demand instant if the cluster is visible
// then, otherwise at the next rise. The strict rule additionally requires the whole
// uplink to fit inside one visibility interval.
inline double feasible_time(const orbital::VisibilityPattern& p, double demand_s,
                            const ClusterTiming& t, bool strict = false) {
    for (const auto& iv : p.intervals) {
        if (demand_s > iv.set_s) continue;
        const double start = (demand_s >= iv.rise_s) ? demand_s : iv.rise_s;
        if (!strict) return start + t.cluster_to_gs_s;
        if (start + t.cluster_to_gs_s <= iv.set_s) return start + t.cluster_to_gs_s;
    }
    throw infeasible_error(p.subject + ": no feasible uplink after demand " +
                           std::to_string(demand_s) + " s" +
                           (strict ? " (strict containment)" : ""));
}

struct ClusterInput {
    const orbital::VisibilityPattern* pattern = nullptr;
    ClusterTiming timing;
};

// One scheduling round: per-cluster rise/demand/feasible, slot time = the maximum.
inline SlotSchedule next_global_update(std::span<const ClusterInput> clusters,
                                       double slot_start_s, int slot_index,
                                       bool strict = false) {
    if (clusters.empty()) throw config_error("schedule needs at least one cluster");
    SlotSchedule s;
    s.slot = slot_index;
    s.slot_start_s = slot_start_s;
    int idx = 0;
    for (const auto& c : clusters) {
        ++idx;
        if (c.pattern == nullptr) throw config_error("null cluster pattern");
        ClusterScheduleEntry e;
        e.cluster = idx;
        e.rise_s = first_rise(*c.pattern, slot_start_s);
        e.demand_s = demand_time(*c.pattern, slot_start_s, c.timing);
        e.feasible_s = feasible_time(*c.pattern, e.demand_s, c.timing, strict);
        if (e.feasible_s > s.global_update_s) s.global_update_s = e.feasible_s;
        s.clusters.push_back(e);
    }
    if (!(s.global_update_s > slot_start_s))
        throw protocol_error("slot " + std::to_string(slot_index) +
                             " makes no forward progress");
    return s;
}

} // namespace leofl::gu
