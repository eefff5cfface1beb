#pragma once

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fogplace/config.hpp"
#include "fogplace/report.hpp"

namespace fogplace {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kInfeasible = 3,
    kInternalError = 4,
};

namespace cli_detail {

inline std::size_t parse_scenario_id(const RunConfig& cfg, const std::string& id) {
    std::string s = id;
    if (!s.empty() && (s[0] == 'S' || s[0] == 's')) s = s.substr(1);
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos == s.size() && v >= 1 &&
            static_cast<std::size_t>(v) <= cfg.pat_max_list.size())
            return static_cast<std::size_t>(v - 1);
    } catch (...) {
    }
    throw ConfigError("unknown scenario id: " + id + " (expected S1..S" +
                      std::to_string(cfg.pat_max_list.size()) + ")");
}

inline void write_output(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write output file: " + path);
    f << text;
}

} // namespace cli_detail

/// Command-line entry point, separated from main() so tests can drive it
/// in-process. Returns the tool exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
    CLI::App app{"fog server placement and energy comparison for a GPON-based "
                 "ECG monitoring deployment"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::string config_path, format_flag, out_flag;
    app.add_option("--config", config_path, "JSON config file (defaults built in)");
    app.add_option("--format", format_flag, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", out_flag, "Output path ('-' for stdout)");

    auto* derive = app.add_subcommand("derive", "Per-scenario times and data rates");
    auto* solve_cmd = app.add_subcommand("solve", "Optimal placement for one scenario/mode");
    std::string scenario_id = "S1", mode_str = "SFA";
    solve_cmd->add_option("--scenario", scenario_id, "Scenario id (S1..Sn)")->required();
    solve_cmd->add_option("--mode", mode_str, "SFA, MFA or CA")->required();
    auto* compare = app.add_subcommand("compare", "Energy comparison across scenarios/modes");
    auto* dump = app.add_subcommand("dump-topology", "List nodes, links and shares as CSV");
    auto* exportlp = app.add_subcommand("export-lp", "Emit the model in LP text format");
    std::string lp_scenario = "S1", lp_mode = "SFA";
    exportlp->add_option("--scenario", lp_scenario, "Scenario id (S1..Sn)")->required();
    exportlp->add_option("--mode", lp_mode, "SFA, MFA or CA")->required();
    auto* oracle_cmd =
        app.add_subcommand("oracle-check", "Randomized solver-vs-oracle equivalence");
    std::uint64_t seed = 1;
    int instances = 50;
    oracle_cmd->add_option("--seed", seed, "Random seed");
    oracle_cmd->add_option("--instances", instances, "Instance count");

    std::vector<const char*> argv;
    argv.push_back("fogplace");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kOk;
        }
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!format_flag.empty()) cfg.format = format_flag;
        if (!out_flag.empty()) cfg.out_path = out_flag;

        std::string text;
        int code = kOk;
        if (derive->parsed()) {
            text = run_derive(cfg);
        } else if (solve_cmd->parsed()) {
            text = run_solve(cfg, cli_detail::parse_scenario_id(cfg, scenario_id),
                             parse_mode(mode_str));
        } else if (compare->parsed()) {
            text = run_compare(cfg);
        } else if (dump->parsed()) {
            text = dump_topology(cfg);
        } else if (exportlp->parsed()) {
            text = run_export_lp(cfg, cli_detail::parse_scenario_id(cfg, lp_scenario),
                                 parse_mode(lp_mode));
        } else if (oracle_cmd->parsed()) {
            bool all_pass = false;
            text = run_oracle_check(seed, instances, all_pass);
            if (!all_pass) code = kInternalError;
        }
        cli_detail::write_output(text, cfg.out_path, out);
        return code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
}

} // namespace fogplace
