#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "leofl/errors.hpp"
#include "leofl/sim.hpp"

// Scenario configuration files: strict JSON with five sections. Unknown keys are
// rejected, missing required keys are reported by their full dotted name, and a
// parsed scenario serializes back to an equivalent document.

namespace leofl::scenario {

using nlohmann::json;

namespace detail {

inline void check_keys(const json& obj, const std::set<std::string>& known,
                       const std::string& where) {
    if (!obj.is_object())
        throw config_error(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (known.count(it.key()) == 0)
            throw config_error("unknown key: " + where + "." + it.key());
}

inline const json& require(const json& obj, const std::string& key,
                           const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw config_error("missing key: " + where + "." + key);
    return *it;
}

inline double get_double(const json& obj, const std::string& key,
                         const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number())
        throw config_error(where + "." + key + ": expected a number");
    return v.get<double>();
}

inline double get_double_or(const json& obj, const std::string& key,
                            const std::string& where, double fallback) {
    if (obj.find(key) == obj.end()) return fallback;
    return get_double(obj, key, where);
}

inline int get_int(const json& obj, const std::string& key,
                   const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number_integer())
        throw config_error(where + "." + key + ": expected an integer");
    return v.get<int>();
}

inline bool get_bool_or(const json& obj, const std::string& key,
                        const std::string& where, bool fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean())
        throw config_error(where + "." + key + ": expected a boolean");
    return it->get<bool>();
}

inline std::string get_string(const json& obj, const std::string& key,
                              const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string())
        throw config_error(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

// Per-orbit values accept a scalar (applied to every plane) or an array of
// exactly orbit_count entries.
template <typename T>
std::vector<T> per_orbit(const json& obj, const std::string& key,
                         const std::string& where, int orbit_count) {
    const json& v = require(obj, key, where);
    std::vector<T> out;
    if (v.is_array()) {
        if (static_cast<int>(v.size()) != orbit_count)
            throw config_error(where + "." + key + ": expected " +
                               std::to_string(orbit_count) + " entries");
        for (const auto& e : v) {
            if (!e.is_number())
                throw config_error(where + "." + key + ": expected numbers");
            out.push_back(e.get<T>());
        }
    } else if (v.is_number()) {
        out.assign(static_cast<std::size_t>(orbit_count), v.get<T>());
    } else {
        throw config_error(where + "." + key + ": expected a number or array");
    }
    return out;
}

} // namespace detail

inline std::pair<sim::Mode, int> parse_mode(const std::string& text) {
    if (text == "scheduled") return {sim::Mode::Scheduled, 1};
    const std::string prefix = "fixed:";
    if (text.rfind(prefix, 0) == 0) {
        const std::string tail = text.substr(prefix.size());
        try {
            std::size_t used = 0;
            const int n = std::stoi(tail, &used);
            if (used == tail.size() && n >= 1) return {sim::Mode::Fixed, n};
        } catch (const std::exception&) {
        }
    }
    throw config_error("mode must be \"scheduled\" or \"fixed:<epochs>\", got \"" +
                       text + "\"");
}

inline sim::Scenario from_json(const json& root) {
    using namespace detail;
    check_keys(root, {"name", "constellation", "ground_station", "link", "learning",
                      "simulation"},
               "config");
    sim::Scenario sc;
    if (root.find("name") != root.end())
        sc.name = get_string(root, "name", "config");

    {
        const json& c = require(root, "constellation", "config");
        check_keys(c,
                   {"orbit_count", "sats_per_orbit", "altitude_m", "inclination_deg",
                    "pattern", "phasing_factor", "epoch_offset_s"},
                   "constellation");
        auto& cc = sc.constellation;
        cc.orbit_count = get_int(c, "orbit_count", "constellation");
        if (cc.orbit_count < 1)
            throw config_error("constellation.orbit_count must be >= 1");
        cc.sats_per_orbit =
            per_orbit<int>(c, "sats_per_orbit", "constellation", cc.orbit_count);
        cc.altitude_m =
            per_orbit<double>(c, "altitude_m", "constellation", cc.orbit_count);
        cc.inclination_deg =
            per_orbit<double>(c, "inclination_deg", "constellation", cc.orbit_count);
        const std::string pat = get_string(c, "pattern", "constellation");
        if (pat == "delta")
            cc.pattern = orbital::ConstellationConfig::Pattern::Delta;
        else if (pat == "star")
            cc.pattern = orbital::ConstellationConfig::Pattern::Star;
        else
            throw config_error("constellation.pattern must be \"delta\" or \"star\"");
        cc.phasing_factor = c.find("phasing_factor") != c.end()
                                ? get_int(c, "phasing_factor", "constellation")
                                : 1;
        cc.epoch_offset_s = get_double_or(c, "epoch_offset_s", "constellation", 0.0);
        cc.validate();
    }
    {
        const json& g = require(root, "ground_station", "config");
        check_keys(g, {"name", "latitude_deg", "longitude_deg", "min_elevation_deg"},
                   "ground_station");
        if (g.find("name") != g.end())
            sc.station.name = get_string(g, "name", "ground_station");
        sc.station.latitude_deg = get_double(g, "latitude_deg", "ground_station");
        sc.station.longitude_deg = get_double(g, "longitude_deg", "ground_station");
        sc.min_elevation_deg = get_double(g, "min_elevation_deg", "ground_station");
        sc.station.validate();
    }
    {
        const json& l = require(root, "link", "config");
        check_keys(l,
                   {"tx_power_dbm", "antenna_gain_dbi", "bandwidth_hz", "carrier_hz",
                    "system_temp_k", "payload_bits"},
                   "link");
        sc.link.tx_power_dbm = get_double(l, "tx_power_dbm", "link");
        sc.link.antenna_gain_dbi = get_double(l, "antenna_gain_dbi", "link");
        sc.link.bandwidth_hz = get_double(l, "bandwidth_hz", "link");
        sc.link.carrier_hz = get_double(l, "carrier_hz", "link");
        sc.link.system_temp_k = get_double(l, "system_temp_k", "link");
        sc.payload_bits = get_double_or(l, "payload_bits", "link", 0.0);
    }
    {
        const json& le = require(root, "learning", "config");
        check_keys(le,
                   {"num_classes", "num_features", "train_samples", "test_samples",
                    "dirichlet_alpha", "class_separation", "batch_size",
                    "learning_rate", "regularization", "epoch_s"},
                   "learning");
        auto& ls = sc.learning;
        ls.dataset.num_classes = get_int(le, "num_classes", "learning");
        ls.dataset.num_features = get_int(le, "num_features", "learning");
        ls.dataset.train_samples = get_int(le, "train_samples", "learning");
        ls.dataset.test_samples = get_int(le, "test_samples", "learning");
        ls.dataset.dirichlet_alpha = get_double(le, "dirichlet_alpha", "learning");
        ls.dataset.class_separation =
            get_double_or(le, "class_separation", "learning", 3.0);
        ls.batch_size = get_int(le, "batch_size", "learning");
        ls.learning_rate = get_double(le, "learning_rate", "learning");
        ls.proximal_coeff = get_double_or(le, "regularization", "learning", 0.0);
        ls.epoch_s = get_double(le, "epoch_s", "learning");
    }
    {
        const json& s = require(root, "simulation", "config");
        check_keys(s, {"slots", "horizon_s", "step_s", "mode", "seed", "strict_gu"},
                   "simulation");
        sc.slots = get_int(s, "slots", "simulation");
        sc.horizon_s = get_double(s, "horizon_s", "simulation");
        sc.step_s = get_double_or(s, "step_s", "simulation", 30.0);
        const auto [mode, epochs] = parse_mode(get_string(s, "mode", "simulation"));
        sc.mode = mode;
        sc.fixed_epochs = epochs;
        const json& seed = require(s, "seed", "simulation");
        if (!seed.is_number_integer())
            throw config_error("simulation.seed: expected an integer");
        sc.seed = seed.get<std::uint64_t>();
        sc.strict_gu = get_bool_or(s, "strict_gu", "simulation", false);
    }
    sc.validate();
    return sc;
}

inline sim::Scenario load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw config_error("invalid JSON in " + path + ": " + e.what());
    }
    return from_json(root);
}

inline json to_json(const sim::Scenario& sc) {
    json root;
    root["name"] = sc.name;
    json c;
    c["orbit_count"] = sc.constellation.orbit_count;
    c["sats_per_orbit"] = sc.constellation.sats_per_orbit;
    c["altitude_m"] = sc.constellation.altitude_m;
    c["inclination_deg"] = sc.constellation.inclination_deg;
    c["pattern"] =
        sc.constellation.pattern == orbital::ConstellationConfig::Pattern::Delta
            ? "delta"
            : "star";
    c["phasing_factor"] = sc.constellation.phasing_factor;
    c["epoch_offset_s"] = sc.constellation.epoch_offset_s;
    root["constellation"] = c;

    json g;
    g["name"] = sc.station.name;
    g["latitude_deg"] = sc.station.latitude_deg;
    g["longitude_deg"] = sc.station.longitude_deg;
    g["min_elevation_deg"] = sc.min_elevation_deg;
    root["ground_station"] = g;

    json l;
    l["tx_power_dbm"] = sc.link.tx_power_dbm;
    l["antenna_gain_dbi"] = sc.link.antenna_gain_dbi;
    l["bandwidth_hz"] = sc.link.bandwidth_hz;
    l["carrier_hz"] = sc.link.carrier_hz;
    l["system_temp_k"] = sc.link.system_temp_k;
    l["payload_bits"] = sc.payload_bits;
    root["link"] = l;

    json le;
    le["num_classes"] = sc.learning.dataset.num_classes;
    le["num_features"] = sc.learning.dataset.num_features;
    le["train_samples"] = sc.learning.dataset.train_samples;
    le["test_samples"] = sc.learning.dataset.test_samples;
    le["dirichlet_alpha"] = sc.learning.dataset.dirichlet_alpha;
    le["class_separation"] = sc.learning.dataset.class_separation;
    le["batch_size"] = sc.learning.batch_size;
    le["learning_rate"] = sc.learning.learning_rate;
    le["regularization"] = sc.learning.proximal_coeff;
    le["epoch_s"] = sc.learning.epoch_s;
    root["learning"] = le;

    json s;
    s["slots"] = sc.slots;
    s["horizon_s"] = sc.horizon_s;
    s["step_s"] = sc.step_s;
    s["mode"] = sc.mode_string();
    s["seed"] = sc.seed;
    s["strict_gu"] = sc.strict_gu;
    root["simulation"] = s;
    return root;
}

inline std::vector<std::string> preset_names() {
    return {"bremen_delta", "saopaulo_delta", "bremen_star"};
}

// Built-in scenarios: a 5x8 constellation at 2000 km, 60 deg inclination, a 500 MHz
// Ka-band style link, and a 10-class synthetic learning problem on 40 satellites.
inline sim::Scenario preset(const std::string& name) {
    sim::Scenario sc;
    sc.name = name;
    sc.constellation.orbit_count = 5;
    sc.constellation.sats_per_orbit.assign(5, 8);
    sc.constellation.altitude_m.assign(5, 2.0e6);
    sc.constellation.inclination_deg.assign(5, 60.0);
    sc.constellation.pattern = orbital::ConstellationConfig::Pattern::Delta;
    sc.constellation.phasing_factor = 1;
    sc.constellation.epoch_offset_s = 0.0;
    sc.station = {"bremen", 53.073, 8.806};
    sc.min_elevation_deg = 10.0;
    sc.link = linkmodel::LinkSpec{};   // 40 dBm, 32.13 dBi, 500 MHz, 20 GHz, 354 K
    sc.payload_bits = 3922240.0;
    sc.learning.dataset = sim::DatasetSpec{};
    sc.learning.learning_rate = 0.1;
    sc.learning.batch_size = 10;
    sc.learning.proximal_coeff = 0.0;
    sc.learning.epoch_s = 3600.0;
    sc.slots = 10;
    sc.horizon_s = 1209600.0;
    sc.step_s = 30.0;
    sc.mode = sim::Mode::Scheduled;
    sc.fixed_epochs = 1;
    sc.seed = 42;
    sc.strict_gu = false;

    if (name == "bremen_delta") return sc;
    if (name == "saopaulo_delta") {
        sc.station = {"saopaulo", -23.55, -46.633};
        return sc;
    }
    if (name == "bremen_star") {
        sc.constellation.pattern = orbital::ConstellationConfig::Pattern::Star;
        sc.constellation.inclination_deg.assign(5, 85.0);
        return sc;
    }
    throw config_error("unknown preset: " + name);
}

} // namespace leofl::scenario
