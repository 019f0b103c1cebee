#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "leofl/sim.hpp"

using namespace leofl;

namespace {

// Small but physically sensible: at 2000 km a 5-satellite ring keeps neighbour
// chords inside line of sight, and 300 training samples keep SGD cheap.
sim::Scenario small_scenario() {
    sim::Scenario sc;
    sc.name = "small";
    sc.constellation.orbit_count = 2;
    sc.constellation.sats_per_orbit = {5, 5};
    sc.constellation.altitude_m = {2.0e6, 2.0e6};
    sc.constellation.inclination_deg = {60.0, 60.0};
    sc.constellation.pattern = orbital::ConstellationConfig::Pattern::Delta;
    sc.constellation.phasing_factor = 1;
    sc.station = {"bremen", 53.073, 8.806};
    sc.min_elevation_deg = 10.0;
    sc.payload_bits = 1.0e6;
    sc.learning.dataset = {3, 5, 300, 100, 0.5, 3.0};
    sc.learning.learning_rate = 0.1;
    sc.learning.batch_size = 10;
    sc.learning.epoch_s = 600.0;
    sc.slots = 3;
    sc.horizon_s = 3.0 * 86400.0;
    sc.step_s = 30.0;
    sc.mode = sim::Mode::Scheduled;
    sc.seed = 42;
    return sc;
}

int count_kind(const sim::RunResult& rr, ring::HopKind k) {
    int n = 0;
    for (const auto& e : rr.events)
        if (e.kind == k) ++n;
    return n;
}

} // namespace

TEST_CASE("scheduled run produces a consistent round trace") {
    const auto sc = small_scenario();
    const auto rr = sim::run(sc);

    REQUIRE_FALSE(rr.truncated);
    REQUIRE(rr.metrics.size() == 3);
    REQUIRE(rr.slot_schedules.size() == 3);
    REQUIRE(rr.plans.size() == 6);
    REQUIRE(rr.final_params.size() ==
            static_cast<std::size_t>(sc.model_shape().dim()));

    double prev = 0.0;
    for (std::size_t i = 0; i < rr.metrics.size(); ++i) {
        const auto& row = rr.metrics[i];
        REQUIRE(row.slot == static_cast<int>(i) + 1);
        REQUIRE(row.t_update_s > prev);
        prev = row.t_update_s;
        REQUIRE(row.t_update_s == rr.slot_schedules[i].global_update_s);
        REQUIRE(row.epochs.size() == 2);
        for (int e : row.epochs) REQUIRE(e >= 1);
        REQUIRE(row.accuracy >= 0.0);
        REQUIRE(row.accuracy <= 1.0);
        REQUIRE(std::isfinite(row.mean_loss));
    }

    for (const auto& plan : rr.plans) {
        const auto& sched =
            rr.slot_schedules[static_cast<std::size_t>(plan.slot - 1)];
        // Every aggregate lands by the committed update time, within the
        // boundary-refinement slack.
        REQUIRE(plan.arrival_s <= sched.global_update_s + sim::timing_slack_s);
        REQUIRE(plan.uplink_start_s >= plan.sink_pass_rise_s - 1e-6);
        REQUIRE(plan.arrival_s > plan.uplink_start_s);
        REQUIRE(plan.receive_s >
                sched.clusters[static_cast<std::size_t>(plan.cluster - 1)].rise_s);
        REQUIRE(plan.budget.epochs >= 1);
    }

    // One downlink and one uplink per cluster per slot, nothing else touches GS.
    REQUIRE(count_kind(rr, ring::HopKind::Downlink) == 6);
    REQUIRE(count_kind(rr, ring::HopKind::Uplink) == 6);
    REQUIRE(count_kind(rr, ring::HopKind::Fallback) == 0);

    double last = 0.0;
    for (const auto& e : rr.events) {
        REQUIRE(e.time_s >= last - 1e-9);
        last = e.time_s;
        REQUIRE(e.payload_bits == sc.payload_bits);
        switch (e.kind) {
        case ring::HopKind::Downlink:
            REQUIRE_FALSE(e.from.has_value());
            REQUIRE(e.to.has_value());
            break;
        case ring::HopKind::Uplink:
            REQUIRE(e.from.has_value());
            REQUIRE_FALSE(e.to.has_value());
            break;
        default:
            REQUIRE(e.from.has_value());
            REQUIRE(e.to.has_value());
        }
    }
}

TEST_CASE("repeated runs are byte-identical") {
    const auto sc = small_scenario();
    const auto a = sim::run(sc);
    const auto b = sim::run(sc);

    REQUIRE(a.final_params == b.final_params);

    std::ostringstream ma, mb, ea, eb;
    sim::write_metrics_csv(ma, a);
    sim::write_metrics_csv(mb, b);
    sim::write_events_jsonl(ea, a);
    sim::write_events_jsonl(eb, b);
    REQUIRE(ma.str() == mb.str());
    REQUIRE(ea.str() == eb.str());
    REQUIRE(sim::schedule_to_json(a.slot_schedules, a.plans, "scheduled") ==
            sim::schedule_to_json(b.slot_schedules, b.plans, "scheduled"));
}

TEST_CASE("the seed moves the data but not the schedule") {
    auto sc = small_scenario();
    const auto a = sim::run(sc);
    sc.seed = 43;
    const auto b = sim::run(sc);

    REQUIRE(a.metrics.size() == b.metrics.size());
    for (std::size_t i = 0; i < a.metrics.size(); ++i) {
        // Timing derives from geometry and worst-case link budgets only.
        REQUIRE(a.metrics[i].t_update_s == b.metrics[i].t_update_s);
        REQUIRE(a.metrics[i].epochs == b.metrics[i].epochs);
    }
    REQUIRE(a.final_params != b.final_params);
}

TEST_CASE("fixed mode trains a constant epoch count and emergent times") {
    auto sc = small_scenario();
    sc.mode = sim::Mode::Fixed;
    sc.fixed_epochs = 2;
    const auto rr = sim::run(sc);

    REQUIRE_FALSE(rr.truncated);
    REQUIRE(rr.metrics.size() == 3);
    REQUIRE(rr.slot_schedules.empty());
    double prev = 0.0;
    for (const auto& row : rr.metrics) {
        REQUIRE(row.t_update_s > prev);
        prev = row.t_update_s;
        for (int e : row.epochs) REQUIRE(e == 2);
    }
    for (const auto& plan : rr.plans) {
        REQUIRE(plan.budget.epochs == 2);
        REQUIRE(plan.arrival_s > plan.uplink_start_s);
    }

    const auto j = sim::emergent_to_json(rr);
    REQUIRE(j["mode"] == "fixed:2");
    REQUIRE(j["slots"].size() == 3);
    REQUIRE(j["slots"][0]["clusters"].size() == 2);
    REQUIRE(j["slots"][0]["clusters"][0].contains("arrival_s"));
}

TEST_CASE("a short horizon truncates the run with a report") {
    auto sc = small_scenario();
    sc.horizon_s = 86400.0;
    sc.slots = 50;
    const auto rr = sim::run(sc);

    REQUIRE(rr.truncated);
    REQUIRE(rr.metrics.size() >= 1);
    REQUIRE(rr.metrics.size() < 50);
    REQUIRE(rr.truncation_reason.find("slot") != std::string::npos);

    std::ostringstream ev;
    sim::write_events_jsonl(ev, rr);
    REQUIRE(ev.str().find("truncated") != std::string::npos);

    const auto j = sim::schedule_to_json(rr.slot_schedules, rr.plans, "scheduled",
                                         rr.truncated, rr.truncation_reason);
    REQUIRE(j["truncated"] == true);
}

TEST_CASE("schedule-only runs match the committed times of a full run") {
    const auto sc = small_scenario();
    const auto rr = sim::run(sc);
    std::vector<cu::ClusterPlan> plans;
    const auto sched = sim::run_schedule_only(sc, &plans);

    REQUIRE(sched.size() == rr.slot_schedules.size());
    for (std::size_t i = 0; i < sched.size(); ++i) {
        REQUIRE(sched[i].global_update_s == rr.slot_schedules[i].global_update_s);
        REQUIRE(sched[i].slot_start_s == rr.slot_schedules[i].slot_start_s);
    }
    REQUIRE(plans.size() == rr.plans.size());
    for (std::size_t i = 0; i < plans.size(); ++i) {
        REQUIRE(plans[i].budget.epochs == rr.plans[i].budget.epochs);
        REQUIRE(plans[i].source == rr.plans[i].source);
        REQUIRE(plans[i].sink == rr.plans[i].sink);
        REQUIRE(plans[i].arrival_s == rr.plans[i].arrival_s);
    }
}

TEST_CASE("strict scheduling never commits earlier") {
    auto sc = small_scenario();
    sc.slots = 2;
    const auto relaxed = sim::run(sc);
    sc.strict_gu = true;
    const auto strict = sim::run(sc);
    REQUIRE_FALSE(strict.truncated);
    REQUIRE(strict.metrics[0].t_update_s >= relaxed.metrics[0].t_update_s);
}

TEST_CASE("comparison requires a shared learning problem") {
    auto a = small_scenario();
    a.slots = 2;
    auto b = a;
    b.name = "small_fixed";
    b.mode = sim::Mode::Fixed;
    b.fixed_epochs = 1;

    auto bad_data = b;
    bad_data.learning.dataset.num_classes = 4;
    std::vector<sim::Scenario> mismatched = {a, bad_data};
    REQUIRE_THROWS_AS(sim::compare(mismatched), config_error);

    auto bad_seed = b;
    bad_seed.seed = 7;
    std::vector<sim::Scenario> reseeded = {a, bad_seed};
    REQUIRE_THROWS_AS(sim::compare(reseeded), config_error);

    std::vector<sim::Scenario> ok = {a, b};
    const auto cmp = sim::compare(ok);
    REQUIRE(cmp.targets.size() == 18);
    REQUIRE(cmp.targets.front() == Catch::Approx(0.10));
    REQUIRE(cmp.targets.back() == Catch::Approx(0.95));
    REQUIRE(cmp.labels ==
            std::vector<std::string>{"small[scheduled]", "small_fixed[fixed:1]"});
    REQUIRE(cmp.runs.size() == 2);
    for (std::size_t i = 0; i < cmp.targets.size(); ++i)
        for (std::size_t j = 0; j < cmp.runs.size(); ++j) {
            const double direct = sim::time_to_target(cmp.runs[j], cmp.targets[i]);
            if (std::isnan(direct))
                REQUIRE(std::isnan(cmp.time_s[i][j]));
            else
                REQUIRE(cmp.time_s[i][j] == direct);
        }

    std::ostringstream os;
    sim::write_comparison_csv(os, cmp);
    const std::string text = os.str();
    REQUIRE(text.rfind("target_accuracy,small[scheduled],small_fixed[fixed:1]\n",
                       0) == 0);
    // Header plus one row per target.
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 19);
}

TEST_CASE("metrics writer emits the documented header") {
    const auto sc = small_scenario();
    const auto rr = sim::run(sc);
    std::ostringstream os;
    sim::write_metrics_csv(os, rr);
    const std::string text = os.str();
    REQUIRE(text.rfind("slot,t_n_s,accuracy,loss,I_1,I_2\n", 0) == 0);
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 4);

    const auto j = sim::schedule_to_json(rr.slot_schedules, rr.plans, "scheduled");
    REQUIRE(j["mode"] == "scheduled");
    REQUIRE(j["slots"].size() == 3);
    const auto& c0 = j["slots"][0]["clusters"][0];
    for (const char* key : {"rise_s", "demand_s", "feasible_s", "t_x_s", "t_a_s",
                            "epochs", "source", "sink", "uplink_start_s",
                            "arrival_s"})
        REQUIRE(c0.contains(key));
}
