#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "leofl/cu_scheduler.hpp"
#include "leofl/errors.hpp"
#include "leofl/fl_engine.hpp"
#include "leofl/gu_scheduler.hpp"
#include "leofl/linkmodel.hpp"
#include "leofl/orbital.hpp"
#include "leofl/ring_protocol.hpp"
#include "leofl/rng.hpp"

// End-to-end orchestration: visibility extraction, per-slot scheduling, ring
// traffic, local training and the global update, driven by an event queue keyed by
// (time, sequence number) so equal-time events keep a stable order. Two timing
// modes share the machinery: Scheduled commits a global-update time up front and
// treats a late arrival as a hard fault; Fixed trains a constant epoch count and
// lets the round time emerge from the last arrival.

namespace leofl::sim {

// Committed update times and executed arrivals are both anchored to visibility
// boundaries that bisection only locates to about a millisecond, and the two sides
// refine their boundaries independently. Honoring a commitment therefore means
// landing within this slack, a few refinement tolerances wide.
inline constexpr double timing_slack_s = 5e-3;

struct DatasetSpec {
    int num_classes = 10;
    int num_features = 20;
    int train_samples = 5000;
    int test_samples = 1000;
    double dirichlet_alpha = 0.5;
    double class_separation = 3.0;

    bool operator==(const DatasetSpec&) const = default;
};

struct LearningSpec {
    DatasetSpec dataset;
    double learning_rate = 0.1;
    int batch_size = 10;
    double proximal_coeff = 0.0;
    double epoch_s = 3600.0;      // wall time one local epoch takes on a satellite
};

enum class Mode { Scheduled, Fixed };

struct Scenario {
    std::string name = "scenario";
    orbital::ConstellationConfig constellation;
    orbital::GroundStation station;
    double min_elevation_deg = 10.0;
    linkmodel::LinkSpec link;
    double payload_bits = 0.0;    // 0 means model parameters * 32 bits
    LearningSpec learning;
    int slots = 10;
    double horizon_s = 1209600.0;
    double step_s = 30.0;
    Mode mode = Mode::Scheduled;
    int fixed_epochs = 1;
    std::uint64_t seed = 42;
    bool strict_gu = false;

    fl::ModelShape model_shape() const {
        return {learning.dataset.num_classes, learning.dataset.num_features};
    }

    double effective_payload_bits() const {
        if (payload_bits > 0.0) return payload_bits;
        return static_cast<double>(model_shape().dim()) * 32.0;
    }

    std::string mode_string() const {
        if (mode == Mode::Scheduled) return "scheduled";
        return "fixed:" + std::to_string(fixed_epochs);
    }

    void validate() const {
        constellation.validate();
        station.validate();
        link.to_budget().validate();
        model_shape().validate();
        if (!(min_elevation_deg >= 0.0 && min_elevation_deg < 90.0))
            throw config_error("min elevation must be in [0, 90)");
        if (payload_bits < 0.0) throw config_error("payload_bits must be >= 0");
        if (slots < 1) throw config_error("need at least one slot");
        if (!(horizon_s > 0.0)) throw config_error("horizon must be positive");
        if (!(step_s > 0.0 && step_s <= 30.0))
            throw config_error("step must be in (0, 30] s");
        if (mode == Mode::Fixed && fixed_epochs < 1)
            throw config_error("fixed mode needs at least one epoch");
        if (!(learning.epoch_s > 0.0)) throw config_error("epoch_s must be positive");
        if (learning.batch_size < 1) throw config_error("batch size must be positive");
        if (!(learning.learning_rate >= 0.0))
            throw config_error("learning rate must be >= 0");
        if (learning.proximal_coeff < 0.0)
            throw config_error("proximal coefficient must be >= 0");
        if (learning.dataset.train_samples < constellation.total_sats())
            throw config_error("fewer training samples than satellites");
        if (learning.dataset.test_samples < 1)
            throw config_error("test set must be non-empty");
        if (!(learning.dataset.dirichlet_alpha > 0.0))
            throw config_error("dirichlet alpha must be positive");
    }
};

struct MetricsRow {
    int slot = 0;
    double t_update_s = 0.0;
    double accuracy = 0.0;
    double mean_loss = 0.0;
    std::vector<int> epochs;   // one entry per cluster
};

struct RunResult {
    Scenario scenario;
    std::vector<orbital::VisibilityPattern> cluster_patterns;
    std::vector<gu::SlotSchedule> slot_schedules;   // scheduled mode only
    std::vector<cu::ClusterPlan> plans;
    std::vector<ring::HopEvent> events;
    std::vector<MetricsRow> metrics;
    std::vector<std::string> warnings;
    fl::Params final_params;
    bool truncated = false;
    std::string truncation_reason;
};

namespace detail {

// Min-heap on (time, insertion sequence); the drain order is the event log order.
class EventQueue {
public:
    void push(const ring::HopEvent& e) { heap_.push({e.time_s, next_seq_++, e}); }

    void push_all(std::span<const ring::HopEvent> es) {
        for (const auto& e : es) push(e);
    }

    void drain_into(std::vector<ring::HopEvent>& log, double& last_time_s) {
        while (!heap_.empty()) {
            const Entry& top = heap_.top();
            if (top.time_s < last_time_s - 1e-9)
                throw protocol_error("event log time went backwards");
            last_time_s = top.time_s;
            log.push_back(top.event);
            heap_.pop();
        }
    }

private:
    struct Entry {
        double time_s;
        std::uint64_t seq;
        ring::HopEvent event;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.time_s != b.time_s) return a.time_s > b.time_s;
            return a.seq > b.seq;
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::uint64_t next_seq_ = 0;
};

struct PlaneContext {
    ring::RingTopology ring;
    gu::ClusterTiming timing;
    double period_s = 0.0;
};

} // namespace detail

// Precomputed geometry and worst-case timing for every plane.
struct Precomputed {
    std::vector<orbital::VisibilityPattern> patterns;
    std::vector<detail::PlaneContext> planes;
};

inline Precomputed precompute(const Scenario& sc) {
    Precomputed pre;
    const auto& cfg = sc.constellation;
    const double payload = sc.effective_payload_bits();
    const linkmodel::LinkBudget budget = sc.link.to_budget();
    for (int p = 1; p <= cfg.orbit_count; ++p) {
        pre.patterns.push_back(orbital::cluster_pattern(
            cfg, p, sc.station, sc.min_elevation_deg, sc.horizon_s, sc.step_s));

        detail::PlaneContext ctx;
        const double h = cfg.altitude_m[static_cast<std::size_t>(p - 1)];
        const int k_p = cfg.sats_per_orbit[static_cast<std::size_t>(p - 1)];
        const double chord = linkmodel::isl_neighbor_chord_m(h, k_p);
        ctx.ring.orbit = p;
        ctx.ring.size = k_p;
        ctx.ring.hop_s =
            (k_p > 1) ? linkmodel::transfer_time(payload, budget, chord).transfer_s
                      : 0.0;
        const auto gs_t = linkmodel::worst_case_gs_timing(
            cfg, p, pre.patterns.back(), sc.min_elevation_deg, budget, payload);
        ctx.timing.gs_to_cluster_s = gs_t.gs_to_cluster_s;
        ctx.timing.cluster_to_gs_s = gs_t.cluster_to_gs_s;
        ctx.timing.isl_round_s = cu::isl_round_time(k_p, ctx.ring.hop_s);
        ctx.timing.min_learning_s = sc.learning.epoch_s;
        ctx.timing.epoch_s = sc.learning.epoch_s;
        ctx.period_s = orbital::orbital_period_s(orbital::orbit_radius_m(cfg, p));
        pre.planes.push_back(ctx);
    }
    return pre;
}

namespace detail {

struct DataContext {
    fl::Dataset test;
    std::vector<fl::Dataset> per_sat;   // indexed by global satellite index
};

inline DataContext build_data(const Scenario& sc) {
    const auto& ds = sc.learning.dataset;
    fl::Dataset full = fl::synth_dataset(
        ds.num_classes, ds.num_features, ds.train_samples + ds.test_samples,
        rng::derive_seed(sc.seed, 1), ds.class_separation);

    // Train and test come from one draw so both halves share the class means.
    fl::Dataset train, test;
    train.num_classes = test.num_classes = ds.num_classes;
    train.num_features = test.num_features = ds.num_features;
    const std::size_t split = static_cast<std::size_t>(ds.train_samples);
    train.x.assign(full.x.begin(),
                   full.x.begin() + static_cast<std::ptrdiff_t>(split * ds.num_features));
    train.y.assign(full.y.begin(), full.y.begin() + static_cast<std::ptrdiff_t>(split));
    test.x.assign(full.x.begin() + static_cast<std::ptrdiff_t>(split * ds.num_features),
                  full.x.end());
    test.y.assign(full.y.begin() + static_cast<std::ptrdiff_t>(split), full.y.end());

    DataContext ctx;
    ctx.per_sat = fl::dirichlet_partition(train, sc.constellation.total_sats(),
                                          ds.dirichlet_alpha,
                                          rng::derive_seed(sc.seed, 2));
    ctx.test = std::move(test);
    return ctx;
}

inline int global_sat_index(const orbital::ConstellationConfig& cfg, int orbit,
                            int slot) {
    int base = 0;
    for (int q = 1; q < orbit; ++q)
        base += cfg.sats_per_orbit[static_cast<std::size_t>(q - 1)];
    return base + slot - 1;
}

} // namespace detail

inline RunResult run(const Scenario& sc) {
    sc.validate();
    RunResult rr;
    rr.scenario = sc;

    const auto& cfg = sc.constellation;
    const int num_planes = cfg.orbit_count;
    const double payload = sc.effective_payload_bits();

    Precomputed pre = precompute(sc);   // may throw infeasible_error (exit code 2)
    rr.cluster_patterns = pre.patterns;

    detail::DataContext data = detail::build_data(sc);
    fl::Params w_global = fl::zero_params(sc.model_shape());

    double slot_start = 0.0;
    double last_logged = 0.0;
    detail::EventQueue queue;

    for (int n = 1; n <= sc.slots; ++n) {
        std::vector<fl::Contribution> cluster_contribs;
        std::vector<int> slot_epochs(static_cast<std::size_t>(num_planes), 0);
        double emergent_update = slot_start;

        try {
            std::optional<gu::SlotSchedule> sched;
            if (sc.mode == Mode::Scheduled) {
                std::vector<gu::ClusterInput> inputs;
                for (int p = 0; p < num_planes; ++p)
                    inputs.push_back({&pre.patterns[static_cast<std::size_t>(p)],
                                      pre.planes[static_cast<std::size_t>(p)].timing});
                sched = gu::next_global_update(inputs, slot_start, n, sc.strict_gu);
            }

            for (int p = 1; p <= num_planes; ++p) {
                const auto& plane = pre.planes[static_cast<std::size_t>(p - 1)];
                const auto& pat = pre.patterns[static_cast<std::size_t>(p - 1)];

                const double rise = (sc.mode == Mode::Scheduled)
                    ? sched->clusters[static_cast<std::size_t>(p - 1)].rise_s
                    : gu::first_rise(pat, slot_start);
                const double cap = rise + 2.0 * plane.period_s;
                const cu::SatChoice source = cu::select_visible_sat(
                    cfg, p, sc.station, sc.min_elevation_deg, rise, cap);
                const double t_x = rise + plane.timing.gs_to_cluster_s;

                cu::ClusterPlan plan;
                plan.slot = n;
                plan.cluster = p;
                plan.receive_s = t_x;
                plan.source = source.sat;

                if (sc.mode == Mode::Scheduled) {
                    plan.available_s =
                        cu::available_time(pat, sched->global_update_s, t_x);
                    plan.budget = cu::epoch_budget(
                        plan.available_s, plane.timing.isl_round_s,
                        plane.timing.cluster_to_gs_s, plane.timing.epoch_s);
                    if (plan.budget.clamped)
                        rr.warnings.push_back(
                            "slot " + std::to_string(n) + " cluster " +
                            std::to_string(p) + ": window fits no full epoch (raw " +
                            std::to_string(plan.budget.raw) + "), forcing 1");
                } else {
                    plan.budget.raw = sc.fixed_epochs;
                    plan.budget.epochs = sc.fixed_epochs;
                    plan.budget.clamped = false;
                }
                const int epochs = plan.budget.epochs;
                slot_epochs[static_cast<std::size_t>(p - 1)] = epochs;

                queue.push({t_x, std::nullopt, source.sat, ring::HopKind::Downlink,
                            payload});
                auto dist = ring::distribute(plane.ring, source.sat.slot, payload, t_x);
                queue.push_all(dist.events);

                std::vector<ring::LocalContribution> locals;
                for (int j = 1; j <= plane.ring.size; ++j) {
                    const int gid = detail::global_sat_index(cfg, p, j);
                    const auto& local_data =
                        data.per_sat[static_cast<std::size_t>(gid)];
                    fl::HyperParams hp;
                    hp.learning_rate = sc.learning.learning_rate;
                    hp.batch_size = sc.learning.batch_size;
                    hp.epochs = epochs;
                    hp.proximal_coeff = sc.learning.proximal_coeff;
                    hp.seed = rng::derive_seed(
                        sc.seed, 3,
                        static_cast<std::uint64_t>(gid) * 1000003ULL +
                            static_cast<std::uint64_t>(n));
                    fl::LocalResult res = fl::local_sgd(w_global, local_data, hp,
                                                        w_global);
                    ring::LocalContribution c;
                    c.sat = {p, j};
                    c.samples = res.samples;
                    c.params = std::move(res.params);
                    c.ready_s = dist.arrival_s[static_cast<std::size_t>(j - 1)] +
                                epochs * sc.learning.epoch_s;
                    locals.push_back(std::move(c));
                }

                const double planned_ready =
                    t_x + 2.0 * plane.timing.isl_round_s + epochs * sc.learning.epoch_s;

                double sink_query;
                if (sc.mode == Mode::Scheduled) {
                    sink_query = t_x + plan.available_s;
                } else {
                    sink_query = gu::first_rise(pat, planned_ready);
                }
                const cu::SatChoice sink = cu::select_visible_sat(
                    cfg, p, sc.station, sc.min_elevation_deg, sink_query,
                    sink_query + 2.0 * plane.period_s);
                plan.sink = sink.sat;
                plan.sink_pass_rise_s = sink.pass_rise_s;
                plan.sink_pass_set_s = sink.pass_set_s;

                auto coll = ring::collect(plane.ring, sink.sat.slot, locals, t_x,
                                          payload);
                queue.push_all(coll.events);
                if (coll.completion_s > planned_ready + 1e-6)
                    throw protocol_error("ring collection exceeded its budget bound");

                if (sc.mode == Mode::Scheduled)
                    plan.uplink_start_s = std::max(planned_ready, sink.pass_rise_s);
                else
                    plan.uplink_start_s = std::max(planned_ready, sink_query);
                plan.arrival_s = plan.uplink_start_s + plane.timing.cluster_to_gs_s;
                queue.push({plan.arrival_s, sink.sat, std::nullopt,
                            ring::HopKind::Uplink, payload});

                if (sc.mode == Mode::Scheduled &&
                    plan.arrival_s > sched->global_update_s + timing_slack_s)
                    throw deadline_error(
                        "slot " + std::to_string(n) + " cluster " + std::to_string(p) +
                        ": aggregate arrives " + std::to_string(plan.arrival_s) +
                        " s, after the committed update at " +
                        std::to_string(sched->global_update_s) + " s");

                emergent_update = std::max(emergent_update, plan.arrival_s);

                fl::Contribution contrib;
                contrib.client_id = p;
                contrib.samples = coll.aggregate.weight;
                contrib.params = coll.aggregate.finalize();
                // The averaged cluster model re-weighted by its sample count keeps
                // the final mean identical to averaging raw members directly.
                cluster_contribs.push_back(std::move(contrib));
                rr.plans.push_back(plan);
            }

            if (sc.mode == Mode::Scheduled) {
                rr.slot_schedules.push_back(*sched);
                emergent_update = sched->global_update_s;
            }
        } catch (const infeasible_error& e) {
            rr.truncated = true;
            rr.truncation_reason = "slot " + std::to_string(n) + ": " + e.what();
            break;
        }

        queue.drain_into(rr.events, last_logged);

        w_global = fl::global_update(cluster_contribs,
                                     fl::WeightConvention::RawWithWeight);
        const fl::Metrics m = fl::evaluate(w_global, data.test);
        rr.metrics.push_back({n, emergent_update, m.accuracy, m.mean_loss,
                              slot_epochs});
        slot_start = emergent_update;
    }

    rr.final_params = std::move(w_global);
    return rr;
}

// Scheduling without any training or ring traffic; used by the schedule subcommand.
inline std::vector<gu::SlotSchedule> run_schedule_only(const Scenario& sc_in,
                                                       std::vector<cu::ClusterPlan>* plans_out = nullptr) {
    Scenario sc = sc_in;
    sc.mode = Mode::Scheduled;
    sc.validate();
    const auto& cfg = sc.constellation;
    Precomputed pre = precompute(sc);

    std::vector<gu::SlotSchedule> out;
    double slot_start = 0.0;
    for (int n = 1; n <= sc.slots; ++n) {
        std::vector<gu::ClusterInput> inputs;
        for (int p = 0; p < cfg.orbit_count; ++p)
            inputs.push_back({&pre.patterns[static_cast<std::size_t>(p)],
                              pre.planes[static_cast<std::size_t>(p)].timing});
        gu::SlotSchedule sched;
        try {
            sched = gu::next_global_update(inputs, slot_start, n, sc.strict_gu);
        } catch (const infeasible_error&) {
            break;
        }
        if (plans_out != nullptr) {
            for (int p = 1; p <= cfg.orbit_count; ++p) {
                const auto& plane = pre.planes[static_cast<std::size_t>(p - 1)];
                const auto& entry = sched.clusters[static_cast<std::size_t>(p - 1)];
                const double t_x = entry.rise_s + plane.timing.gs_to_cluster_s;
                cu::ClusterPlan plan;
                plan.slot = n;
                plan.cluster = p;
                plan.receive_s = t_x;
                plan.available_s = cu::available_time(
                    pre.patterns[static_cast<std::size_t>(p - 1)],
                    sched.global_update_s, t_x);
                plan.budget = cu::epoch_budget(plan.available_s,
                                               plane.timing.isl_round_s,
                                               plane.timing.cluster_to_gs_s,
                                               plane.timing.epoch_s);
                const cu::SatChoice source = cu::select_visible_sat(
                    cfg, p, sc.station, sc.min_elevation_deg, entry.rise_s,
                    entry.rise_s + 2.0 * plane.period_s);
                const cu::SatChoice sink = cu::select_visible_sat(
                    cfg, p, sc.station, sc.min_elevation_deg,
                    t_x + plan.available_s,
                    t_x + plan.available_s + 2.0 * plane.period_s);
                plan.source = source.sat;
                plan.sink = sink.sat;
                plan.sink_pass_rise_s = sink.pass_rise_s;
                plan.sink_pass_set_s = sink.pass_set_s;
                plan.uplink_start_s =
                    std::max(t_x + 2.0 * plane.timing.isl_round_s +
                                 plan.budget.epochs * plane.timing.epoch_s,
                             sink.pass_rise_s);
                plan.arrival_s = plan.uplink_start_s + plane.timing.cluster_to_gs_s;
                plans_out->push_back(plan);
            }
        }
        out.push_back(sched);
        slot_start = sched.global_update_s;
    }
    return out;
}

// Comparison across runs sharing one learning problem: wall-clock time at which
// each run first reaches a target accuracy.
struct Comparison {
    std::vector<double> targets;
    std::vector<std::string> labels;
    std::vector<RunResult> runs;
    std::vector<std::vector<double>> time_s;   // [target][run], NaN when unreached
};

inline double time_to_target(const RunResult& r, double target) {
    for (const auto& row : r.metrics)
        if (row.accuracy >= target) return row.t_update_s;
    return std::numeric_limits<double>::quiet_NaN();
}

inline Comparison compare(std::span<const Scenario> scenarios) {
    if (scenarios.empty()) throw config_error("compare needs at least one scenario");
    for (const auto& sc : scenarios) {
        if (!(sc.learning.dataset == scenarios.front().learning.dataset))
            throw config_error("compared scenarios must share the dataset spec");
        if (sc.seed != scenarios.front().seed)
            throw config_error("compared scenarios must share the seed");
    }
    Comparison cmp;
    for (double t = 0.10; t <= 0.951; t += 0.05) cmp.targets.push_back(t);
    for (const auto& sc : scenarios) {
        cmp.labels.push_back(sc.name + "[" + sc.mode_string() + "]");
        cmp.runs.push_back(run(sc));
    }
    cmp.time_s.assign(cmp.targets.size(), std::vector<double>(cmp.runs.size()));
    for (std::size_t i = 0; i < cmp.targets.size(); ++i)
        for (std::size_t j = 0; j < cmp.runs.size(); ++j)
            cmp.time_s[i][j] = time_to_target(cmp.runs[j], cmp.targets[i]);
    return cmp;
}

// ---- output writers ----

inline std::string endpoint_name(const std::optional<orbital::SatelliteId>& ep) {
    if (!ep.has_value()) return "gs";
    return "k_" + std::to_string(ep->orbit) + "_" + std::to_string(ep->slot);
}

inline void write_metrics_csv(std::ostream& os, const RunResult& rr) {
    const int planes = rr.scenario.constellation.orbit_count;
    os << "slot,t_n_s,accuracy,loss";
    for (int p = 1; p <= planes; ++p) os << ",I_" << p;
    os << "\n";
    char buf[160];
    for (const auto& row : rr.metrics) {
        std::snprintf(buf, sizeof(buf), "%d,%.3f,%.6f,%.6f", row.slot,
                      row.t_update_s, row.accuracy, row.mean_loss);
        os << buf;
        for (int e : row.epochs) os << "," << e;
        os << "\n";
    }
}

inline void write_events_jsonl(std::ostream& os, const RunResult& rr) {
    char buf[256];
    for (const auto& e : rr.events) {
        std::snprintf(buf, sizeof(buf),
                      "{\"time_s\":%.3f,\"kind\":\"%s\",\"from\":\"%s\",\"to\":\"%s\","
                      "\"payload_bits\":%.0f}\n",
                      e.time_s, ring::hop_kind_name(e.kind),
                      endpoint_name(e.from).c_str(), endpoint_name(e.to).c_str(),
                      e.payload_bits);
        os << buf;
    }
    if (rr.truncated) {
        nlohmann::json marker;
        marker["kind"] = "truncated";
        marker["reason"] = rr.truncation_reason;
        os << marker.dump() << "\n";
    }
}

inline nlohmann::json schedule_to_json(const std::vector<gu::SlotSchedule>& schedules,
                                       const std::vector<cu::ClusterPlan>& plans,
                                       const std::string& mode_label,
                                       bool truncated = false,
                                       const std::string& reason = "") {
    nlohmann::json root;
    root["mode"] = mode_label;
    if (truncated) {
        root["truncated"] = true;
        root["reason"] = reason;
    }
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& s : schedules) {
        nlohmann::json js;
        js["n"] = s.slot;
        js["t_prev_s"] = s.slot_start_s;
        js["t_n_s"] = s.global_update_s;
        nlohmann::json clusters = nlohmann::json::array();
        for (const auto& c : s.clusters) {
            nlohmann::json jc;
            jc["cluster"] = c.cluster;
            jc["rise_s"] = c.rise_s;
            jc["demand_s"] = c.demand_s;
            jc["feasible_s"] = c.feasible_s;
            for (const auto& plan : plans)
                if (plan.slot == s.slot && plan.cluster == c.cluster) {
                    jc["t_x_s"] = plan.receive_s;
                    jc["t_a_s"] = plan.available_s;
                    jc["epochs"] = plan.budget.epochs;
                    jc["epochs_raw"] = plan.budget.raw;
                    jc["source"] = endpoint_name(plan.source);
                    jc["sink"] = endpoint_name(plan.sink);
                    jc["uplink_start_s"] = plan.uplink_start_s;
                    jc["arrival_s"] = plan.arrival_s;
                }
            clusters.push_back(jc);
        }
        js["clusters"] = clusters;
        slots.push_back(js);
    }
    root["slots"] = slots;
    return root;
}

// Fixed-mode schedules have no committed times; export the emergent plan instead.
inline nlohmann::json emergent_to_json(const RunResult& rr) {
    nlohmann::json root;
    root["mode"] = rr.scenario.mode_string();
    if (rr.truncated) {
        root["truncated"] = true;
        root["reason"] = rr.truncation_reason;
    }
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& row : rr.metrics) {
        nlohmann::json js;
        js["n"] = row.slot;
        js["t_n_s"] = row.t_update_s;
        nlohmann::json clusters = nlohmann::json::array();
        for (const auto& plan : rr.plans)
            if (plan.slot == row.slot) {
                nlohmann::json jc;
                jc["cluster"] = plan.cluster;
                jc["t_x_s"] = plan.receive_s;
                jc["epochs"] = plan.budget.epochs;
                jc["source"] = endpoint_name(plan.source);
                jc["sink"] = endpoint_name(plan.sink);
                jc["uplink_start_s"] = plan.uplink_start_s;
                jc["arrival_s"] = plan.arrival_s;
                clusters.push_back(jc);
            }
        js["clusters"] = clusters;
        slots.push_back(js);
    }
    root["slots"] = slots;
    return root;
}

inline void write_comparison_csv(std::ostream& os, const Comparison& cmp) {
    os << "target_accuracy";
    for (const auto& l : cmp.labels) os << "," << l;
    os << "\n";
    char buf[64];
    for (std::size_t i = 0; i < cmp.targets.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.2f", cmp.targets[i]);
        os << buf;
        for (std::size_t j = 0; j < cmp.runs.size(); ++j) {
            os << ",";
            if (std::isfinite(cmp.time_s[i][j])) {
                std::snprintf(buf, sizeof(buf), "%.3f", cmp.time_s[i][j]);
                os << buf;
            }
        }
        os << "\n";
    }
}

} // namespace leofl::sim
