#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "leofl/scenario.hpp"
#include "leofl/sim.hpp"

// Command line front end. Subcommands: simulate, schedule, visibility, compare,
// presets. Exit codes: 0 success, 1 configuration or usage error, 2 infeasibility,
// 3 deadline violation.

namespace leofl::cli {

namespace detail {

struct Overrides {
    std::uint64_t seed = 0;
    bool seed_set = false;
    int slots = 0;
    bool slots_set = false;
    std::string mode;
    double horizon_s = 0.0;
    bool horizon_set = false;
    bool strict_gu = false;
};

inline void add_override_flags(CLI::App* cmd, Overrides& ov, bool with_mode = true) {
    cmd->add_option("--seed", ov.seed, "Master seed override")
        ->each([&ov](const std::string&) { ov.seed_set = true; });
    cmd->add_option("--slots", ov.slots, "Number of global-update slots")
        ->each([&ov](const std::string&) { ov.slots_set = true; });
    if (with_mode)
        cmd->add_option("--mode", ov.mode,
                        "Timing mode: scheduled or fixed:<epochs>");
    cmd->add_option("--horizon-s", ov.horizon_s, "Visibility horizon override (s)")
        ->each([&ov](const std::string&) { ov.horizon_set = true; });
    cmd->add_flag("--strict-gu", ov.strict_gu,
                  "Require uplinks to finish inside one visibility interval");
}

inline void apply(const Overrides& ov, sim::Scenario& sc) {
    if (ov.seed_set) sc.seed = ov.seed;
    if (ov.slots_set) sc.slots = ov.slots;
    if (!ov.mode.empty()) {
        const auto [mode, epochs] = scenario::parse_mode(ov.mode);
        sc.mode = mode;
        sc.fixed_epochs = epochs;
    }
    if (ov.horizon_set) sc.horizon_s = ov.horizon_s;
    if (ov.strict_gu) sc.strict_gu = true;
}

inline std::ofstream open_out(const std::filesystem::path& dir,
                              const std::string& file) {
    std::filesystem::create_directories(dir);
    const auto path = dir / file;
    std::ofstream out(path);
    if (!out) throw config_error("cannot write " + path.string());
    return out;
}

// Resolve a config argument: a path to a JSON file or a built-in preset name.
inline sim::Scenario load_config(const std::string& arg) {
    if (std::filesystem::exists(arg)) return scenario::load_file(arg);
    for (const auto& p : scenario::preset_names())
        if (p == arg) return scenario::preset(p);
    throw config_error("config not found (no such file or preset): " + arg);
}

inline std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (begin <= s.size()) {
        const std::size_t comma = s.find(',', begin);
        if (comma == std::string::npos) {
            out.push_back(s.substr(begin));
            break;
        }
        out.push_back(s.substr(begin, comma - begin));
        begin = comma + 1;
    }
    return out;
}

inline std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& ch : out)
        if (ch == ':' || ch == '/' || ch == ' ') ch = '_';
    return out;
}

inline void print_run_summary(std::ostream& os, const sim::RunResult& rr) {
    char buf[200];
    for (const auto& row : rr.metrics) {
        std::snprintf(buf, sizeof(buf),
                      "slot %d: t_n=%.3f s  accuracy=%.4f  loss=%.4f  epochs=[",
                      row.slot, row.t_update_s, row.accuracy, row.mean_loss);
        os << buf;
        for (std::size_t i = 0; i < row.epochs.size(); ++i)
            os << (i ? "," : "") << row.epochs[i];
        os << "]\n";
    }
    if (rr.truncated)
        os << "truncated: " << rr.truncation_reason << "\n";
}

} // namespace detail

inline int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"LEO constellation federated-learning scheduler and simulator"};
    app.require_subcommand(1);

    std::string out_dir = "out";
    std::string config_arg;
    std::string modes_arg;
    std::vector<std::string> config_args;
    detail::Overrides ov;

    auto* simulate = app.add_subcommand("simulate", "Run the full simulation");
    simulate->add_option("config", config_arg, "Config file or preset name")
        ->required();
    simulate->add_option("--out-dir", out_dir, "Output directory");
    detail::add_override_flags(simulate, ov);

    auto* schedule = app.add_subcommand("schedule", "Compute the slot schedule only");
    schedule->add_option("config", config_arg, "Config file or preset name")
        ->required();
    schedule->add_option("--out-dir", out_dir, "Output directory");
    detail::add_override_flags(schedule, ov, false);

    auto* visibility =
        app.add_subcommand("visibility", "Export rise/set patterns as CSV");
    visibility->add_option("config", config_arg, "Config file or preset name")
        ->required();
    visibility->add_option("--out-dir", out_dir, "Output directory");
    detail::add_override_flags(visibility, ov, false);

    auto* compare = app.add_subcommand(
        "compare", "Compare timing modes or scenarios on one learning problem");
    compare->add_option("configs", config_args, "Config files or preset names")
        ->required();
    compare->add_option("--modes", modes_arg,
                        "Comma-separated timing modes applied to a single config");
    compare->add_option("--out-dir", out_dir, "Output directory");
    detail::add_override_flags(compare, ov, false);

    auto* presets = app.add_subcommand("presets", "Write the built-in configs");
    presets->add_option("--out-dir", out_dir, "Output directory");

    std::vector<const char*> argv;
    argv.push_back("leofl");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (presets->parsed()) {
            for (const auto& name : scenario::preset_names()) {
                auto out = detail::open_out(out_dir, name + ".json");
                out << scenario::to_json(scenario::preset(name)).dump(2) << "\n";
                std::cout << "wrote " << (std::filesystem::path(out_dir) /
                                          (name + ".json")).string()
                          << "\n";
            }
            return 0;
        }

        if (simulate->parsed()) {
            sim::Scenario sc = detail::load_config(config_arg);
            detail::apply(ov, sc);
            const sim::RunResult rr = sim::run(sc);
            for (const auto& w : rr.warnings) std::cerr << "warning: " << w << "\n";
            {
                auto out = detail::open_out(out_dir, "metrics.csv");
                sim::write_metrics_csv(out, rr);
            }
            {
                auto out = detail::open_out(out_dir, "events.jsonl");
                sim::write_events_jsonl(out, rr);
            }
            {
                auto out = detail::open_out(out_dir, "schedule.json");
                if (sc.mode == sim::Mode::Scheduled)
                    out << sim::schedule_to_json(rr.slot_schedules, rr.plans,
                                                 sc.mode_string(), rr.truncated,
                                                 rr.truncation_reason)
                               .dump(2)
                        << "\n";
                else
                    out << sim::emergent_to_json(rr).dump(2) << "\n";
            }
            detail::print_run_summary(std::cout, rr);
            std::cout << "wrote metrics.csv, events.jsonl, schedule.json to "
                      << out_dir << "\n";
            return 0;
        }

        if (schedule->parsed()) {
            sim::Scenario sc = detail::load_config(config_arg);
            detail::apply(ov, sc);
            std::vector<cu::ClusterPlan> plans;
            const auto schedules = sim::run_schedule_only(sc, &plans);
            const bool short_run = static_cast<int>(schedules.size()) < sc.slots;
            {
                auto out = detail::open_out(out_dir, "schedule.json");
                out << sim::schedule_to_json(schedules, plans, "scheduled", short_run,
                                             short_run ? "horizon exhausted" : "")
                           .dump(2)
                    << "\n";
            }
            char buf[160];
            for (const auto& s : schedules) {
                std::snprintf(buf, sizeof(buf), "slot %d: t_n=%.3f s  epochs=[",
                              s.slot, s.global_update_s);
                std::cout << buf;
                bool first = true;
                for (const auto& plan : plans)
                    if (plan.slot == s.slot) {
                        std::cout << (first ? "" : ",") << plan.budget.epochs;
                        first = false;
                    }
                std::cout << "]\n";
            }
            if (short_run)
                std::cout << "truncated: horizon exhausted after "
                          << schedules.size() << " slots\n";
            std::cout << "wrote schedule.json to " << out_dir << "\n";
            return 0;
        }

        if (visibility->parsed()) {
            sim::Scenario sc = detail::load_config(config_arg);
            detail::apply(ov, sc);
            sc.validate();
            std::vector<orbital::VisibilityPattern> patterns;
            const auto& cfg = sc.constellation;
            for (int p = 1; p <= cfg.orbit_count; ++p) {
                patterns.push_back(orbital::cluster_pattern(
                    cfg, p, sc.station, sc.min_elevation_deg, sc.horizon_s,
                    sc.step_s));
                for (int j = 1; j <= cfg.sats_per_orbit[static_cast<std::size_t>(p - 1)];
                     ++j)
                    patterns.push_back(orbital::satellite_pattern(
                        cfg, {p, j}, sc.station, sc.min_elevation_deg, sc.horizon_s,
                        sc.step_s));
            }
            auto out = detail::open_out(out_dir, "visibility.csv");
            orbital::write_pattern_csv(out, patterns);
            std::cout << "wrote visibility.csv to " << out_dir << "\n";
            return 0;
        }

        if (compare->parsed()) {
            std::vector<sim::Scenario> scenarios;
            if (!modes_arg.empty()) {
                if (config_args.size() != 1)
                    throw config_error(
                        "--modes expects exactly one config to expand");
                for (const auto& m : detail::split_commas(modes_arg)) {
                    sim::Scenario sc = detail::load_config(config_args.front());
                    detail::apply(ov, sc);
                    const auto [mode, epochs] = scenario::parse_mode(m);
                    sc.mode = mode;
                    sc.fixed_epochs = epochs;
                    scenarios.push_back(sc);
                }
            } else {
                if (config_args.size() < 2)
                    throw config_error(
                        "compare needs --modes or at least two configs");
                for (const auto& a : config_args) {
                    sim::Scenario sc = detail::load_config(a);
                    detail::apply(ov, sc);
                    scenarios.push_back(sc);
                }
            }
            const sim::Comparison cmp = sim::compare(scenarios);
            {
                auto out = detail::open_out(out_dir, "compare.csv");
                sim::write_comparison_csv(out, cmp);
            }
            for (std::size_t i = 0; i < cmp.runs.size(); ++i) {
                auto out = detail::open_out(
                    out_dir, "metrics_" + detail::sanitize(cmp.labels[i]) + ".csv");
                sim::write_metrics_csv(out, cmp.runs[i]);
                for (const auto& w : cmp.runs[i].warnings)
                    std::cerr << "warning: " << w << "\n";
            }
            std::cout << "target";
            for (const auto& l : cmp.labels) std::cout << "  " << l;
            std::cout << "\n";
            char buf[64];
            for (std::size_t i = 0; i < cmp.targets.size(); ++i) {
                bool any = false;
                for (std::size_t j = 0; j < cmp.runs.size(); ++j)
                    any = any || std::isfinite(cmp.time_s[i][j]);
                if (!any) continue;
                std::snprintf(buf, sizeof(buf), "%.2f  ", cmp.targets[i]);
                std::cout << buf;
                for (std::size_t j = 0; j < cmp.runs.size(); ++j) {
                    if (std::isfinite(cmp.time_s[i][j]))
                        std::snprintf(buf, sizeof(buf), "%12.1f", cmp.time_s[i][j]);
                    else
                        std::snprintf(buf, sizeof(buf), "%12s", "-");
                    std::cout << buf;
                }
                std::cout << "\n";
            }
            std::cout << "wrote compare.csv to " << out_dir << "\n";
            return 0;
        }
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const infeasible_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const deadline_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

inline int run_command(const std::vector<std::string>& args) {
    return dispatch(args);
}

} // namespace leofl::cli
