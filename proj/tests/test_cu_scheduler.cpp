#include <catch2/catch_amalgamated.hpp>

#include "leofl/cu_scheduler.hpp"

using namespace leofl;
using orbital::VisibilityPattern;

namespace {

VisibilityPattern pattern(std::vector<orbital::VisibilityInterval> ivs) {
    VisibilityPattern p;
    p.subject = "cluster_t";
    p.horizon_s = 1e6;
    p.intervals = std::move(ivs);
    return p;
}

orbital::ConstellationConfig delta_5x8() {
    orbital::ConstellationConfig cfg;
    cfg.orbit_count = 5;
    cfg.sats_per_orbit.assign(5, 8);
    cfg.altitude_m.assign(5, 2.0e6);
    cfg.inclination_deg.assign(5, 60.0);
    return cfg;
}

} // namespace

TEST_CASE("available time: full window when visible at the update instant") {
    const auto p = pattern({{0.0, 100.0}, {200.0, 300.0}});
    REQUIRE(cu::available_time(p, 250.0, 50.0) == Catch::Approx(200.0));
    REQUIRE(cu::available_time(p, 300.0, 250.0) == Catch::Approx(50.0));
}

TEST_CASE("available time: window truncates at the last set before the update") {
    const auto p = pattern({{0.0, 100.0}, {200.0, 300.0}});
    // Update in the gap: the aggregate must leave before the first set.
    REQUIRE(cu::available_time(p, 150.0, 50.0) == Catch::Approx(50.0));
    // Update after the second pass: the later set applies.
    REQUIRE(cu::available_time(p, 350.0, 50.0) == Catch::Approx(250.0));
}

TEST_CASE("available time preconditions") {
    const auto p = pattern({{0.0, 100.0}});
    REQUIRE_THROWS_AS(cu::available_time(p, 50.0, 50.0), protocol_error);
    REQUIRE_THROWS_AS(cu::available_time(p, 300.0, 150.0), protocol_error);
}

TEST_CASE("ring traversal bound") {
    REQUIRE(cu::isl_round_time(8, 0.038318662478) ==
            Catch::Approx(4 * 0.038318662478).epsilon(1e-15));
    REQUIRE(cu::isl_round_time(5, 10.0) == Catch::Approx(30.0));
    REQUIRE(cu::isl_round_time(2, 10.0) == Catch::Approx(10.0));
    REQUIRE(cu::isl_round_time(1, 10.0) == Catch::Approx(10.0));
    REQUIRE_THROWS_AS(cu::isl_round_time(0, 1.0), config_error);
    REQUIRE_THROWS_AS(cu::isl_round_time(4, -1.0), domain_error);
}

TEST_CASE("epoch budget floors the slack and clamps to one") {
    const double isl = 7.0, up = 3.0, epoch = 3600.0;

    SECTION("exact fit") {
        const double avail = 3 * epoch + 2 * isl + up;
        const auto b = cu::epoch_budget(avail, isl, up, epoch);
        REQUIRE(b.raw == 3);
        REQUIRE(b.epochs == 3);
        REQUIRE_FALSE(b.clamped);
    }
    SECTION("epsilon under the fit loses one epoch") {
        const double avail = 3 * epoch + 2 * isl + up - 1e-6;
        const auto b = cu::epoch_budget(avail, isl, up, epoch);
        REQUIRE(b.raw == 2);
        REQUIRE(b.epochs == 2);
    }
    SECTION("window too short clamps to one and flags it") {
        const auto b = cu::epoch_budget(100.0, isl, up, epoch);
        REQUIRE(b.raw <= 0);
        REQUIRE(b.epochs == 1);
        REQUIRE(b.clamped);
    }
    SECTION("hugely negative slack stays sane") {
        const auto b = cu::epoch_budget(-1e18, isl, up, epoch);
        REQUIRE(b.epochs == 1);
        REQUIRE(b.clamped);
    }
    REQUIRE_THROWS_AS(cu::epoch_budget(100.0, 1.0, 1.0, 0.0), config_error);
}

TEST_CASE("sink selection picks the longest remaining pass, ties to lowest index") {
    const auto cfg = delta_5x8();
    const orbital::GroundStation gs{"bremen", 53.073, 8.806};
    const double elev = 10.0;
    const double horizon = 86400.0;

    const auto cluster = orbital::cluster_pattern(cfg, 1, gs, elev, horizon, 30.0);
    REQUIRE_FALSE(cluster.intervals.empty());
    // Query in the middle of the first cluster pass.
    const auto& iv = cluster.intervals.front();
    const double t = 0.5 * (iv.rise_s + iv.set_s);
    const auto choice = cu::select_visible_sat(cfg, 1, gs, elev, t, t + 16000.0);

    // The chosen satellite is visible and no member's pass lasts longer.
    const auto gs_pos = orbital::gs_position(gs, t).position_m;
    const auto pos = orbital::propagate(cfg, choice.sat, t).position_m;
    REQUIRE(orbital::is_visible_gs(pos, gs_pos, elev));
    for (int j = 1; j <= 8; ++j) {
        const auto pj = orbital::propagate(cfg, {1, j}, t).position_m;
        if (!orbital::is_visible_gs(pj, gs_pos, elev)) continue;
        const double end = orbital::pass_end_s(cfg, {1, j}, gs, elev, t, t + 16000.0);
        REQUIRE(end <= choice.pass_set_s + 1e-6);
    }
    REQUIRE(choice.pass_rise_s <= t);
    REQUIRE(choice.pass_set_s >= t);

    // A query exactly on the cluster rise still resolves via the nudge.
    const auto at_rise =
        cu::select_visible_sat(cfg, 1, gs, elev, iv.rise_s, iv.rise_s + 16000.0);
    REQUIRE(at_rise.sat.orbit == 1);

    // Far outside any pass there is nothing to pick.
    double gap_t = -1.0;
    for (std::size_t i = 0; i + 1 < cluster.intervals.size(); ++i) {
        const double a = cluster.intervals[i].set_s;
        const double b = cluster.intervals[i + 1].rise_s;
        if (b - a > 120.0) {
            gap_t = 0.5 * (a + b);
            break;
        }
    }
    if (gap_t > 0.0)
        REQUIRE_THROWS_AS(
            cu::select_visible_sat(cfg, 1, gs, elev, gap_t, gap_t + 16000.0),
            protocol_error);
}
