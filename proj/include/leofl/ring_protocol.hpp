#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "leofl/errors.hpp"
#include "leofl/gu_scheduler.hpp"
#include "leofl/orbital.hpp"

// Store-and-forward ring communication inside one orbital plane. Satellites are a
// cyclic ring ordered by in-plane slot; every link transfer costs one hop period.
// Each satellite owns a single transmitter, so a node with two outgoing sends must
// serialize them; relays forward as soon as they hold the payload.

namespace leofl::ring {

struct RingTopology {
    int orbit = 1;       // plane label carried into satellite ids
    int size = 1;        // satellites in the ring
    double hop_s = 0.0;  // per-hop transfer time between neighbours

    void validate() const {
        if (size < 1) throw config_error("ring needs at least one satellite");
        if (hop_s < 0.0) throw config_error("hop time must be non-negative");
    }

    orbital::SatelliteId sat_at(int pos) const {   // pos is 0-based ring position
        return {orbit, pos + 1};
    }
};

enum class HopKind { Distribute, Collect, Uplink, Downlink, Fallback };

inline const char* hop_kind_name(HopKind k) {
    switch (k) {
        case HopKind::Distribute: return "distribute";
        case HopKind::Collect: return "collect";
        case HopKind::Uplink: return "uplink";
        case HopKind::Downlink: return "downlink";
        case HopKind::Fallback: return "fallback";
    }
    return "?";
}

// One payload movement. Endpoints without a satellite id are the ground station.
struct HopEvent {
    double time_s = 0.0;   // instant the payload is fully received at `to`
    std::optional<orbital::SatelliteId> from;
    std::optional<orbital::SatelliteId> to;
    HopKind kind = HopKind::Distribute;
    double payload_bits = 0.0;
};

struct DistributeResult {
    std::vector<HopEvent> events;
    double completion_s = 0.0;
    std::vector<double> arrival_s;   // indexed by ring position, source = start
};

// Flood the model from the entry satellite around the ring. The source pushes into
// the +1 arc first and into the -1 arc one hop later; every other node receives
// from whichever arc reaches it earlier (ties resolve to the +1 arc). With k >= 2
// the last arrival is exactly ceil(k/2) hops after the start.
inline DistributeResult distribute(const RingTopology& ring, int source_slot,
                                   double payload_bits, double start_s) {
    ring.validate();
    if (source_slot < 1 || source_slot > ring.size)
        throw config_error("source slot out of range");
    const int k = ring.size;
    const int src = source_slot - 1;

    DistributeResult r;
    r.arrival_s.assign(static_cast<std::size_t>(k), start_s);
    r.completion_s = start_s;
    if (k == 1) return r;

    // Served distances: the +1 arc covers d = 1..d_fwd, the -1 arc the rest.
    const int d_fwd = (k + 1) / 2;
    const int d_bwd = k - 1 - d_fwd;

    for (int d = 1; d <= d_fwd; ++d) {
        const int from = (src + d - 1) % k;
        const int to = (src + d) % k;
        const double t = start_s + d * ring.hop_s;
        r.events.push_back({t, ring.sat_at(from), ring.sat_at(to),
                            HopKind::Distribute, payload_bits});
        r.arrival_s[static_cast<std::size_t>(to)] = t;
    }
    for (int d = 1; d <= d_bwd; ++d) {
        const int from = (src - d + 1 + k) % k;
        const int to = (src - d + k) % k;
        const double t = start_s + (d + 1) * ring.hop_s;
        r.events.push_back({t, ring.sat_at(from), ring.sat_at(to),
                            HopKind::Distribute, payload_bits});
        r.arrival_s[static_cast<std::size_t>(to)] = t;
    }
    for (double t : r.arrival_s) r.completion_s = std::max(r.completion_s, t);
    return r;
}

// Exact running weighted sum: integer sample counts, one division at the end.
struct PartialAggregate {
    std::vector<double> weighted_sum;
    long long weight = 0;
    std::vector<orbital::SatelliteId> contributors;

    void add(const orbital::SatelliteId& sat, long long samples,
             std::span<const double> params) {
        if (samples <= 0) throw protocol_error("contribution needs a positive weight");
        if (weighted_sum.empty()) weighted_sum.assign(params.size(), 0.0);
        if (weighted_sum.size() != params.size())
            throw protocol_error("contribution dimension mismatch");
        for (std::size_t i = 0; i < params.size(); ++i)
            weighted_sum[i] += static_cast<double>(samples) * params[i];
        weight += samples;
        contributors.push_back(sat);
    }

    void merge(const PartialAggregate& o) {
        if (o.weight == 0) return;
        if (weighted_sum.empty()) weighted_sum.assign(o.weighted_sum.size(), 0.0);
        if (weighted_sum.size() != o.weighted_sum.size())
            throw protocol_error("aggregate dimension mismatch");
        for (std::size_t i = 0; i < weighted_sum.size(); ++i)
            weighted_sum[i] += o.weighted_sum[i];
        weight += o.weight;
        contributors.insert(contributors.end(), o.contributors.begin(),
                            o.contributors.end());
    }

    std::vector<double> finalize() const {
        if (weight <= 0) throw protocol_error("empty aggregate");
        std::vector<double> out(weighted_sum.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = weighted_sum[i] / static_cast<double>(weight);
        return out;
    }
};

struct LocalContribution {
    orbital::SatelliteId sat;
    long long samples = 0;
    std::vector<double> params;
    double ready_s = 0.0;   // instant the local result exists on the satellite
};

struct CollectResult {
    std::vector<HopEvent> events;
    PartialAggregate aggregate;
    double completion_s = 0.0;
};

// Gather local results along both arcs toward the sink. Each relay merges its own
// contribution and forwards at max(upstream arrival, own readiness) + hop. For even
// rings the satellite diametrically opposite the sink joins the arc through its
// lower-indexed neighbour.
inline CollectResult collect(const RingTopology& ring, int sink_slot,
                             std::span<const LocalContribution> locals,
                             double start_s, double payload_bits = 0.0) {
    ring.validate();
    if (sink_slot < 1 || sink_slot > ring.size)
        throw config_error("sink slot out of range");
    const int k = ring.size;
    const int snk = sink_slot - 1;

    if (locals.size() != static_cast<std::size_t>(k))
        throw protocol_error("collect needs exactly one contribution per ring member");
    std::vector<const LocalContribution*> by_pos(static_cast<std::size_t>(k), nullptr);
    for (const auto& l : locals) {
        if (l.sat.orbit != ring.orbit || l.sat.slot < 1 || l.sat.slot > k)
            throw protocol_error("contribution from a satellite outside the ring");
        auto& slot_ref = by_pos[static_cast<std::size_t>(l.sat.slot - 1)];
        if (slot_ref != nullptr)
            throw protocol_error("duplicate contribution from satellite slot " +
                                 std::to_string(l.sat.slot));
        slot_ref = &l;
    }

    CollectResult r;
    auto ready = [&](int pos) {
        return std::max(by_pos[static_cast<std::size_t>(pos)]->ready_s, start_s);
    };

    if (k == 1) {
        const auto* own = by_pos[0];
        r.aggregate.add(own->sat, own->samples, own->params);
        r.completion_s = ready(0);
        return r;
    }

    // Arc lengths: forward arc holds positions snk+1..snk+len_fwd, backward arc the
    // rest. For even k the opposite node picks the arc whose first hop goes to its
    // lower-indexed neighbour.
    int len_fwd = (k - 1) / 2;
    int len_bwd = (k - 1) / 2;
    if (k % 2 == 0) {
        const int opp = (snk + k / 2) % k;
        const int nb_fwd_side = (opp - 1 + k) % k;  // neighbour on the sink's +1 arc
        const int nb_bwd_side = (opp + 1) % k;      // neighbour on the sink's -1 arc
        if (ring.sat_at(nb_fwd_side).slot < ring.sat_at(nb_bwd_side).slot)
            len_fwd = k / 2;
        else
            len_bwd = k / 2;
    }

    // Walk one arc from the farthest member toward the sink. `dir` is the step that
    // moves a payload closer to the sink.
    auto run_arc = [&](int far_pos, int dir, int length) -> std::pair<PartialAggregate, double> {
        PartialAggregate acc;
        double arrival = start_s;
        int pos = far_pos;
        for (int i = 0; i < length; ++i) {
            const auto* own = by_pos[static_cast<std::size_t>(pos)];
            const double depart = std::max(ready(pos), arrival);
            acc.add(own->sat, own->samples, own->params);
            const int next = (pos + dir + k) % k;
            arrival = depart + ring.hop_s;
            r.events.push_back({arrival, ring.sat_at(pos), ring.sat_at(next),
                                HopKind::Collect, payload_bits});
            pos = next;
        }
        return {acc, length > 0 ? arrival : start_s};
    };

    const int far_fwd = (snk + len_fwd) % k;
    const int far_bwd = (snk - len_bwd + k) % k;
    auto [acc_fwd, t_fwd] = run_arc(far_fwd, -1, len_fwd);
    auto [acc_bwd, t_bwd] = run_arc(far_bwd, +1, len_bwd);

    const auto* own = by_pos[static_cast<std::size_t>(snk)];
    r.aggregate.merge(acc_fwd);
    r.aggregate.merge(acc_bwd);
    r.aggregate.add(own->sat, own->samples, own->params);
    std::sort(r.aggregate.contributors.begin(), r.aggregate.contributors.end(),
              [](const auto& a, const auto& b) { return a.slot < b.slot; });
    r.completion_s = std::max({ready(snk), t_fwd, t_bwd});
    return r;
}

struct FallbackResult {
    std::vector<HopEvent> events;
    orbital::SatelliteId relay;
    double uplink_start_s = 0.0;
    bool engaged = false;   // false when the sink itself was visible (no-op guard)
};

// Draft contingency path: when the sink lost visibility before the uplink could
// start, walk the aggregate along the ring to whichever member can transmit to the
// ground station soonest (ring transfer plus wait-for-visibility; ties prefer fewer
// hops, then the lower index). Experimental; the scheduler never needs it because
// scheduled sinks are picked inside a visibility pass.
inline FallbackResult fallback_handoff(const RingTopology& ring, int sink_slot,
                                       double payload_bits,
                                       std::span<const orbital::VisibilityPattern> gs_vis,
                                       double t_s) {
    ring.validate();
    if (sink_slot < 1 || sink_slot > ring.size)
        throw config_error("sink slot out of range");
    if (gs_vis.size() != static_cast<std::size_t>(ring.size))
        throw protocol_error("fallback needs one visibility pattern per ring member");
    const int k = ring.size;
    const int snk = sink_slot - 1;

    FallbackResult r;
    r.relay = ring.sat_at(snk);
    if (gs_vis[static_cast<std::size_t>(snk)].visible_at(t_s)) {
        r.uplink_start_s = t_s;
        return r;   // guard: nothing to do while the sink still sees the station
    }

    bool found = false;
    int best_pos = 0, best_dist = 0;
    double best_uplink = 0.0;
    for (int pos = 0; pos < k; ++pos) {
        const int d_fwd = (pos - snk + k) % k;
        const int d_bwd = (snk - pos + k) % k;
        const int dist = std::min(d_fwd, d_bwd);
        const double arrival = t_s + dist * ring.hop_s;
        double uplink;
        try {
            uplink = gu::first_rise(gs_vis[static_cast<std::size_t>(pos)], arrival);
        } catch (const infeasible_error&) {
            continue;
        }
        const bool better =
            !found || uplink < best_uplink ||
            (uplink == best_uplink &&
             (dist < best_dist || (dist == best_dist && pos < best_pos)));
        if (better) {
            best_pos = pos;
            best_dist = dist;
            best_uplink = uplink;
            found = true;
        }
    }
    if (!found)
        throw infeasible_error("no ring member regains ground visibility");

    const int d_fwd = (best_pos - snk + k) % k;
    const int d_bwd = (snk - best_pos + k) % k;
    const int dir = (d_fwd <= d_bwd) ? +1 : -1;
    int pos = snk;
    for (int i = 1; i <= best_dist; ++i) {
        const int next = (pos + dir + k) % k;
        r.events.push_back({t_s + i * ring.hop_s, ring.sat_at(pos), ring.sat_at(next),
                            HopKind::Fallback, payload_bits});
        pos = next;
    }
    r.relay = ring.sat_at(best_pos);
    r.uplink_start_s = best_uplink;
    r.engaged = true;
    return r;
}

} // namespace leofl::ring
