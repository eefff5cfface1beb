#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fogplace/catalog.hpp"
#include "fogplace/common.hpp"
#include "fogplace/energy.hpp"
#include "fogplace/placement_types.hpp"
#include "fogplace/scenario.hpp"
#include "fogplace/topology.hpp"

namespace fogplace {

/// Fully resolved run configuration. Every knob of the model reconstruction
/// is reachable from here; defaults reproduce the calibrated reference
/// setup.
struct RunConfig {
    DeviceCatalog catalog = default_catalog();
    GponParams gpon;
    ScenarioParams scenario_base;
    std::vector<double> pat_max_list = {50.0, 100.0, 150.0, 200.0};
    std::vector<Mode> modes = {Mode::SFA, Mode::MFA, Mode::CA};
    EnergyOptions energy;
    std::string format = "csv";
    std::string out_path;

    std::string scenario_label(std::size_t index) const {
        return "S" + std::to_string(index + 1);
    }
};

namespace config_detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::string& where,
                                const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError("unknown config key: " +
                              (where.empty() ? it.key() : where + "." + it.key()));
    }
}

inline double require_number(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError("config field " + where + " must be a number");
    return v.get<double>();
}

inline bool require_bool(const nlohmann::json& v, const std::string& where) {
    if (!v.is_boolean()) throw ConfigError("config field " + where + " must be a boolean");
    return v.get<bool>();
}

inline std::string require_string(const nlohmann::json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError("config field " + where + " must be a string");
    return v.get<std::string>();
}

inline void apply_catalog_overrides(const nlohmann::json& obj, DeviceCatalog& catalog) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        auto entry = catalog.entries.find(it.key());
        if (entry == catalog.entries.end())
            throw ConfigError("unknown device class in catalog override: " + it.key());
        const nlohmann::json& spec = it.value();
        if (!spec.is_object())
            throw ConfigError("catalog." + it.key() + " must be an object");
        reject_unknown_keys(spec, "catalog." + it.key(),
                            {"p_max_w", "capacity", "idle_fraction", "sharing"});
        if (spec.contains("p_max_w"))
            entry->second.p_max_w = require_number(spec["p_max_w"], "p_max_w");
        if (spec.contains("capacity")) {
            if (spec["capacity"].is_null())
                entry->second.capacity = std::nullopt;
            else
                entry->second.capacity = require_number(spec["capacity"], "capacity");
        }
        if (spec.contains("idle_fraction"))
            entry->second.idle_fraction = require_number(spec["idle_fraction"], "idle_fraction");
        if (spec.contains("sharing")) {
            std::string s = require_string(spec["sharing"], "sharing");
            if (s == "shared_network")
                entry->second.sharing = SharingMode::SharedNetwork;
            else if (s == "dedicated_server")
                entry->second.sharing = SharingMode::DedicatedServer;
            else
                throw ConfigError("catalog." + it.key() +
                                  ".sharing must be shared_network or dedicated_server");
        }
    }
}

} // namespace config_detail

/// Parses a config JSON into a fully defaulted RunConfig. Unknown keys are
/// rejected by name; parse errors carry line and column.
inline RunConfig parse_config(const std::string& text, const std::string& origin = "config") {
    using nlohmann::json;
    using namespace config_detail;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(origin + ": JSON parse error at line " + std::to_string(line) +
                          ", column " + std::to_string(col) + ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

    RunConfig cfg;
    reject_unknown_keys(root, "",
                        {"hc_share", "catalog", "gpon", "scenario", "energy", "modes",
                         "output"});
    if (root.contains("hc_share")) {
        cfg.catalog.hc_share = require_number(root["hc_share"], "hc_share");
        if (!(cfg.catalog.hc_share > 0.0 && cfg.catalog.hc_share <= 1.0))
            throw ConfigError("hc_share must lie in (0, 1]");
    }
    if (root.contains("catalog")) {
        if (!root["catalog"].is_object()) throw ConfigError("catalog must be an object");
        apply_catalog_overrides(root["catalog"], cfg.catalog);
    }
    if (root.contains("gpon")) {
        const json& g = root["gpon"];
        if (!g.is_object()) throw ConfigError("gpon must be an object");
        reject_unknown_keys(g, "gpon",
                            {"n_aps", "n_patients", "trunk_capacity_bps", "metro_core_hops",
                             "downstream_hc_override_bps", "fractional_patients"});
        if (g.contains("n_aps")) cfg.gpon.n_aps = static_cast<int>(require_number(g["n_aps"], "gpon.n_aps"));
        if (g.contains("n_patients"))
            cfg.gpon.n_patients = require_number(g["n_patients"], "gpon.n_patients");
        if (g.contains("trunk_capacity_bps"))
            cfg.gpon.gpon_trunk_capacity_bps =
                require_number(g["trunk_capacity_bps"], "gpon.trunk_capacity_bps");
        if (g.contains("metro_core_hops")) {
            if (!g["metro_core_hops"].is_array())
                throw ConfigError("gpon.metro_core_hops must be an array of device classes");
            cfg.gpon.metro_core_hops.clear();
            for (const auto& h : g["metro_core_hops"])
                cfg.gpon.metro_core_hops.push_back(
                    require_string(h, "gpon.metro_core_hops[]"));
        }
        if (g.contains("downstream_hc_override_bps")) {
            if (g["downstream_hc_override_bps"].is_null())
                cfg.gpon.downstream_hc_override_bps = std::nullopt;
            else
                cfg.gpon.downstream_hc_override_bps = require_number(
                    g["downstream_hc_override_bps"], "gpon.downstream_hc_override_bps");
        }
        if (g.contains("fractional_patients"))
            cfg.gpon.fractional_patients =
                require_bool(g["fractional_patients"], "gpon.fractional_patients");
    }
    if (root.contains("scenario")) {
        const json& s = root["scenario"];
        if (!s.is_object()) throw ConfigError("scenario must be an object");
        reject_unknown_keys(s, "scenario",
                            {"t_total_s", "unit_proc_time_s", "analysis_factor",
                             "unit_pa_time_s", "ecg_bits", "processed_bits", "pat_max_list"});
        if (s.contains("t_total_s"))
            cfg.scenario_base.t_total_s = require_number(s["t_total_s"], "scenario.t_total_s");
        bool custom_unit = false;
        if (s.contains("unit_proc_time_s")) {
            cfg.scenario_base.unit_proc_time_s =
                require_number(s["unit_proc_time_s"], "scenario.unit_proc_time_s");
            custom_unit = true;
        }
        if (s.contains("analysis_factor")) {
            cfg.scenario_base.analysis_factor =
                require_number(s["analysis_factor"], "scenario.analysis_factor");
            custom_unit = true;
        }
        if (custom_unit)
            cfg.scenario_base.unit_pa_time_s = cfg.scenario_base.unit_proc_time_s *
                                               (1.0 + cfg.scenario_base.analysis_factor);
        if (s.contains("unit_pa_time_s"))
            cfg.scenario_base.unit_pa_time_s =
                require_number(s["unit_pa_time_s"], "scenario.unit_pa_time_s");
        if (s.contains("ecg_bits"))
            cfg.scenario_base.ecg_bits = require_number(s["ecg_bits"], "scenario.ecg_bits");
        if (s.contains("processed_bits"))
            cfg.scenario_base.processed_bits =
                require_number(s["processed_bits"], "scenario.processed_bits");
        if (s.contains("pat_max_list")) {
            if (!s["pat_max_list"].is_array())
                throw ConfigError("scenario.pat_max_list must be an array");
            cfg.pat_max_list.clear();
            for (const auto& v : s["pat_max_list"])
                cfg.pat_max_list.push_back(require_number(v, "scenario.pat_max_list[]"));
        }
    }
    if (root.contains("energy")) {
        const json& e = root["energy"];
        if (!e.is_object()) throw ConfigError("energy must be an object");
        reject_unknown_keys(e, "energy",
                            {"server_idle_window", "activation_binaries", "ca_device_class",
                             "ca_dedicated_idle"});
        if (e.contains("server_idle_window")) {
            std::string w = require_string(e["server_idle_window"], "energy.server_idle_window");
            if (w == "t_total")
                cfg.energy.server_idle_window = EnergyOptions::ServerIdleWindow::TTotal;
            else if (w == "round_30min")
                cfg.energy.server_idle_window = EnergyOptions::ServerIdleWindow::Round30Min;
            else if (w == "t_total_plus_t_cloud")
                cfg.energy.server_idle_window =
                    EnergyOptions::ServerIdleWindow::TTotalPlusTCloud;
            else
                throw ConfigError("energy.server_idle_window must be t_total, round_30min or "
                                  "t_total_plus_t_cloud");
        }
        if (e.contains("activation_binaries"))
            cfg.energy.activation_binaries =
                require_bool(e["activation_binaries"], "energy.activation_binaries");
        if (e.contains("ca_device_class")) {
            cfg.energy.ca_device_class =
                require_string(e["ca_device_class"], "energy.ca_device_class");
            if (!cfg.catalog.contains(cfg.energy.ca_device_class))
                throw ConfigError("energy.ca_device_class names an unknown device class: " +
                                  cfg.energy.ca_device_class);
        }
        if (e.contains("ca_dedicated_idle"))
            cfg.energy.ca_dedicated_idle =
                require_bool(e["ca_dedicated_idle"], "energy.ca_dedicated_idle");
    }
    if (root.contains("modes")) {
        if (!root["modes"].is_array()) throw ConfigError("modes must be an array");
        cfg.modes.clear();
        for (const auto& m : root["modes"])
            cfg.modes.push_back(parse_mode(require_string(m, "modes[]")));
    }
    if (root.contains("output")) {
        const json& o = root["output"];
        if (!o.is_object()) throw ConfigError("output must be an object");
        reject_unknown_keys(o, "output", {"format", "path"});
        if (o.contains("format")) {
            cfg.format = require_string(o["format"], "output.format");
            if (cfg.format != "csv" && cfg.format != "json")
                throw ConfigError("output.format must be csv or json");
        }
        if (o.contains("path")) cfg.out_path = require_string(o["path"], "output.path");
    }

    if (cfg.pat_max_list.empty())
        throw ConfigError("config needs at least one scenario (scenario.pat_max_list)");
    if (cfg.modes.empty()) throw ConfigError("config needs at least one mode");
    auto issues = validate_catalog(cfg.catalog);
    if (!issues.empty())
        throw ConfigError("catalog invalid after overrides: " + issues.front().message);
    cfg.scenario_base.n_patients = cfg.gpon.n_patients;
    return cfg;
}

/// Loads and parses a config file.
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

/// Canonical serialisation of a resolved config; the report header hashes it.
inline std::string canonical_config_dump(const RunConfig& cfg) {
    nlohmann::json j;
    j["hc_share"] = cfg.catalog.hc_share;
    for (const auto& [cls, spec] : cfg.catalog.entries) {
        nlohmann::json d;
        d["p_max_w"] = spec.p_max_w;
        if (spec.capacity) d["capacity"] = *spec.capacity;
        d["idle_fraction"] = spec.idle_fraction;
        d["sharing"] = spec.sharing == SharingMode::SharedNetwork ? "shared_network"
                                                                  : "dedicated_server";
        j["catalog"][cls] = d;
    }
    j["gpon"]["n_aps"] = cfg.gpon.n_aps;
    j["gpon"]["n_patients"] = cfg.gpon.n_patients;
    j["gpon"]["trunk_capacity_bps"] = cfg.gpon.gpon_trunk_capacity_bps;
    j["gpon"]["metro_core_hops"] = cfg.gpon.metro_core_hops;
    if (cfg.gpon.downstream_hc_override_bps)
        j["gpon"]["downstream_hc_override_bps"] = *cfg.gpon.downstream_hc_override_bps;
    j["gpon"]["fractional_patients"] = cfg.gpon.fractional_patients;
    j["scenario"]["t_total_s"] = cfg.scenario_base.t_total_s;
    j["scenario"]["unit_pa_time_s"] = cfg.scenario_base.unit_pa_time_s;
    j["scenario"]["ecg_bits"] = cfg.scenario_base.ecg_bits;
    j["scenario"]["processed_bits"] = cfg.scenario_base.processed_bits;
    j["scenario"]["pat_max_list"] = cfg.pat_max_list;
    j["energy"]["server_idle_window"] = static_cast<int>(cfg.energy.server_idle_window);
    j["energy"]["activation_binaries"] = cfg.energy.activation_binaries;
    j["energy"]["ca_device_class"] = cfg.energy.ca_device_class;
    j["energy"]["ca_dedicated_idle"] = cfg.energy.ca_dedicated_idle;
    std::vector<std::string> modes;
    for (Mode m : cfg.modes) modes.push_back(mode_name(m));
    j["modes"] = modes;
    return j.dump();
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_hash(const RunConfig& cfg) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_config_dump(cfg))));
    return buf;
}

} // namespace fogplace
