#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fogplace/config.hpp"
#include "fogplace/energy.hpp"
#include "fogplace/oracle.hpp"
#include "fogplace/placement.hpp"
#include "fogplace/scenario.hpp"
#include "fogplace/topology.hpp"

namespace fogplace {

namespace report_detail {

/// Fixed decimal formatting contract of every report: six significant
/// digits, '.' separator, no locale.
inline std::string g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline int thread_budget() {
    if (const char* env = std::getenv("FOGPLACE_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(0..n-1) on up to thread_budget() workers. Results must be
/// written to per-index slots; emission order stays deterministic.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    int workers = std::min<std::size_t>(thread_budget(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace report_detail

/// Topology plus the edge uplink share every scenario derivation uses.
struct BuiltInstance {
    Topology topo;
    double uplink_share_bps = 0.0;
};

inline BuiltInstance build_instance(const RunConfig& cfg) {
    BuiltInstance b{build_gpon(cfg.gpon, cfg.catalog), 0.0};
    b.uplink_share_bps = placement_detail::link_hc(b.topo, cfg.catalog,
                                                   b.topo.ont_ids.front(), b.topo.olt_id);
    return b;
}

inline Scenario scenario_for(const RunConfig& cfg, const BuiltInstance& inst,
                             std::size_t index) {
    if (index >= cfg.pat_max_list.size())
        throw ConfigError("scenario index out of range");
    return make_scenario(cfg.scenario_base.with_pat_max(cfg.pat_max_list[index]),
                         inst.uplink_share_bps);
}

inline std::string report_header(const RunConfig& cfg) {
    return "# config=" + config_hash(cfg) + "\n";
}

inline nlohmann::json breakdown_to_json(const EnergyBreakdown& e) {
    nlohmann::json j;
    j["total_j"] = e.total_j;
    j["network_j"] = e.network_j;
    j["processing_j"] = e.processing_j;
    j["per_device_class"] = e.per_device_class_j;
    return j;
}

/// CSV rows (class, joules) of a breakdown, in class order.
inline std::string breakdown_to_csv(const EnergyBreakdown& e) {
    std::ostringstream os;
    os << "class,joules\n";
    for (const auto& [cls, joules] : e.per_device_class_j)
        os << cls << ',' << report_detail::g6(joules) << '\n';
    return os.str();
}

inline nlohmann::json solution_to_json(const PlacementSolution& sol) {
    nlohmann::json j;
    j["mode"] = mode_name(sol.mode);
    j["pat_max"] = sol.pat_max;
    j["servers_per_site"] = sol.servers_per_site;
    nlohmann::json assign = nlohmann::json::object();
    for (const auto& [ap, sites] : sol.assignment) {
        nlohmann::json per = nlohmann::json::object();
        for (const auto& [site, x] : sites) per[site] = x;
        assign[ap] = per;
    }
    j["assignment"] = assign;
    j["objective_j"] = sol.objective_j;
    j["optimality"] = optimality_name(sol.optimality);
    j["cloud_servers"] = sol.cloud_servers;
    return j;
}

/// Scenario table report: per-patient times and rates of each scenario.
inline std::string run_derive(const RunConfig& cfg) {
    BuiltInstance inst = build_instance(cfg);
    auto rows = scenario_table(cfg.scenario_base, cfg.pat_max_list, inst.uplink_share_bps);
    using report_detail::g6;
    if (cfg.format == "json") {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json j;
            j["scenario"] = r.label;
            j["pat_max"] = r.pat_max;
            j["t_pa_s"] = r.t_pa_s;
            j["t_t_s"] = r.t_t_s;
            j["r_ps_kbps"] = r.r_ps_bps / 1000.0;
            j["r_cloud_kbps"] = r.r_cloud_bps / 1000.0;
            j["t_cloud_s"] = r.t_cloud_s;
            j["display"] = {{"t_pa_s", r.display_t_pa},
                            {"t_t_s", r.display_t_t},
                            {"r_ps_kbps", r.display_r_ps},
                            {"r_cloud_kbps", r.display_r_cloud},
                            {"t_cloud_s", r.display_t_cloud}};
            out.push_back(j);
        }
        return out.dump(2) + "\n";
    }
    std::ostringstream os;
    os << report_header(cfg);
    os << "scenario,pat_max,t_pa_s,t_t_s,r_ps_kbps,r_cloud_kbps,t_cloud_s\n";
    for (const auto& r : rows) {
        os << r.label << ',' << g6(r.pat_max) << ',' << g6(r.t_pa_s) << ',' << g6(r.t_t_s)
           << ',' << g6(r.r_ps_bps / 1000.0) << ',' << g6(r.r_cloud_bps / 1000.0) << ','
           << g6(r.t_cloud_s) << '\n';
    }
    return os.str();
}

/// Solves one (scenario, mode) cell and reports the placement.
inline std::string run_solve(const RunConfig& cfg, std::size_t scenario_index, Mode mode) {
    BuiltInstance inst = build_instance(cfg);
    Scenario sc = scenario_for(cfg, inst, scenario_index);
    MilpModel model = formulate(inst.topo, sc, mode, cfg.catalog, cfg.energy,
                                !cfg.gpon.fractional_patients);
    PlacementSolution sol = solve(model);
    if (sol.optimality == Optimality::Infeasible)
        throw InfeasibleError("no feasible placement for " +
                              cfg.scenario_label(scenario_index) + " " + mode_name(mode));
    if (cfg.format == "json") {
        nlohmann::json j = solution_to_json(sol);
        j["scenario"] = cfg.scenario_label(scenario_index);
        j["energy"] =
            breakdown_to_json(evaluate(inst.topo, sc, sol, cfg.catalog, cfg.energy));
        return j.dump(2) + "\n";
    }
    using report_detail::g6;
    std::ostringstream os;
    os << report_header(cfg);
    os << "site,servers,patients\n";
    if (mode == Mode::CA) {
        os << "cloud," << sol.cloud_servers << ',' << g6(sol.site_load(kCloudSite)) << '\n';
    } else {
        for (const auto& [site, servers] : sol.servers_per_site)
            os << site << ',' << servers << ',' << g6(sol.site_load(site)) << '\n';
    }
    return os.str();
}

struct CompareCell {
    std::string scenario;
    Mode mode = Mode::SFA;
    EnergyBreakdown energy;
    PlacementSolution solution;
};

/// Energy comparison across every (scenario, mode) pair, with savings
/// against CA and the MFA-vs-SFA delta per scenario. Cells may be computed
/// in parallel (FOGPLACE_THREADS caps the workers); the output order is
/// fixed either way.
inline std::vector<CompareCell> compare_cells(const RunConfig& cfg) {
    BuiltInstance inst = build_instance(cfg);
    std::vector<std::pair<std::size_t, Mode>> jobs;
    for (std::size_t s = 0; s < cfg.pat_max_list.size(); ++s)
        for (Mode m : cfg.modes) jobs.emplace_back(s, m);
    std::vector<CompareCell> cells(jobs.size());
    std::vector<std::string> errors(jobs.size());
    report_detail::parallel_for(jobs.size(), [&](std::size_t i) {
        try {
            auto [s, m] = jobs[i];
            Scenario sc = scenario_for(cfg, inst, s);
            MilpModel model = formulate(inst.topo, sc, m, cfg.catalog, cfg.energy,
                                        !cfg.gpon.fractional_patients);
            PlacementSolution sol = solve(model);
            if (sol.optimality == Optimality::Infeasible) {
                errors[i] = "no feasible placement for " + cfg.scenario_label(s) + " " +
                            mode_name(m);
                return;
            }
            CompareCell cell;
            cell.scenario = cfg.scenario_label(s);
            cell.mode = m;
            cell.energy = evaluate(inst.topo, sc, sol, cfg.catalog, cfg.energy);
            cell.solution = std::move(sol);
            cells[i] = std::move(cell);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (const auto& err : errors)
        if (!err.empty()) throw InfeasibleError(err);
    return cells;
}

inline std::string run_compare(const RunConfig& cfg) {
    std::vector<CompareCell> cells = compare_cells(cfg);
    auto find_total = [&](const std::string& scenario, Mode m) -> std::optional<double> {
        for (const auto& c : cells)
            if (c.scenario == scenario && c.mode == m) return c.energy.total_j;
        return std::nullopt;
    };
    using report_detail::g6;
    if (cfg.format == "json") {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& c : cells) {
            nlohmann::json j;
            j["scenario"] = c.scenario;
            j["mode"] = mode_name(c.mode);
            j["network_j"] = c.energy.network_j;
            j["processing_j"] = c.energy.processing_j;
            j["total_j"] = c.energy.total_j;
            auto ca = find_total(c.scenario, Mode::CA);
            if (ca && c.mode != Mode::CA)
                j["saving_vs_ca_pct"] = 100.0 * (1.0 - c.energy.total_j / *ca);
            if (c.mode == Mode::MFA) {
                auto sfa = find_total(c.scenario, Mode::SFA);
                if (sfa) j["mfa_vs_sfa_pct"] = 100.0 * (*sfa - c.energy.total_j) / *sfa;
            }
            out.push_back(j);
        }
        return out.dump(2) + "\n";
    }
    std::ostringstream os;
    os << report_header(cfg);
    os << "scenario,mode,network_j,processing_j,total_j,saving_vs_ca_pct,mfa_vs_sfa_pct\n";
    for (const auto& c : cells) {
        os << c.scenario << ',' << mode_name(c.mode) << ',' << g6(c.energy.network_j) << ','
           << g6(c.energy.processing_j) << ',' << g6(c.energy.total_j) << ',';
        auto ca = find_total(c.scenario, Mode::CA);
        if (ca && c.mode != Mode::CA) os << g6(100.0 * (1.0 - c.energy.total_j / *ca));
        os << ',';
        if (c.mode == Mode::MFA) {
            auto sfa = find_total(c.scenario, Mode::SFA);
            if (sfa) os << g6(100.0 * (*sfa - c.energy.total_j) / *sfa);
        }
        os << '\n';
    }
    return os.str();
}

/// Node/link listing of the built topology.
inline std::string dump_topology(const RunConfig& cfg) {
    BuiltInstance inst = build_instance(cfg);
    using report_detail::g6;
    std::ostringstream os;
    os << report_header(cfg);
    os << "from,to,capacity_bps,hc_capacity_bps\n";
    for (const auto& link : inst.topo.links)
        os << link.from << ',' << link.to << ',' << g6(link.capacity_bps) << ','
           << g6(link_hc_capacity(link, cfg.catalog)) << '\n';
    return os.str();
}

inline std::string run_export_lp(const RunConfig& cfg, std::size_t scenario_index, Mode mode) {
    BuiltInstance inst = build_instance(cfg);
    Scenario sc = scenario_for(cfg, inst, scenario_index);
    MilpModel model = formulate(inst.topo, sc, mode, cfg.catalog, cfg.energy,
                                !cfg.gpon.fractional_patients);
    return export_lp(model);
}

/// Randomized solver-vs-oracle equivalence report.
inline std::string run_oracle_check(std::uint64_t seed, int instances, bool& all_pass) {
    auto insts = random_instances(seed, instances);
    EquivalenceReport report = equivalence_check(insts);
    std::ostringstream os;
    for (const auto& e : report.entries) {
        os << e.name << ": " << (e.pass ? "PASS" : "FAIL");
        if (!e.detail.empty()) os << " (" << e.detail << ")";
        os << '\n';
    }
    os << "passed " << report.passed << "/" << report.entries.size() << '\n';
    all_pass = report.all_pass;
    return os.str();
}

} // namespace fogplace
