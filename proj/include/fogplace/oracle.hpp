#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fogplace/catalog.hpp"
#include "fogplace/common.hpp"
#include "fogplace/energy.hpp"
#include "fogplace/placement.hpp"
#include "fogplace/placement_types.hpp"
#include "fogplace/scenario.hpp"
#include "fogplace/topology.hpp"

namespace fogplace {

/// Server layout and per-site loads up to ONT interchangeability. The
/// oracle's whole search space is configurations of this shape.
struct SymmetricConfig {
    int k_olt = 0;
    std::vector<double> ont_loads; // per placed ONT site, canonical order
    double olt_load = 0.0;
};

struct OracleBudget {
    double max_sites_times_patients = 40.0 * 250.0;
};

namespace oracle_detail {

struct Expansion {
    bool feasible = false;
    PlacementSolution placement;
};

/// Expands a layout + load vector into a concrete assignment: home-AP
/// patients first, then the OLT (the nearest shared point), then foreign
/// sites, respecting the per-phase link shares. Sound because sites of one
/// class are interchangeable and a home assignment never costs more than a
/// remote one under the two-part power profile.
inline Expansion expand(const Topology& topo, const Scenario& sc,
                        const DeviceCatalog& catalog, Mode mode,
                        const std::vector<int>& y_ont, // servers per ONT site
                        const std::vector<double>& loads, int k_olt, double olt_load,
                        bool integral) {
    Expansion e;
    PlacementSolution& p = e.placement;
    p.mode = mode;
    p.pat_max = sc.params.pat_max;

    const double r_ps = sc.rates.r_ps_bps;
    const double r_cloud = sc.rates.r_cloud_bps;
    const double tol = 1e-9;
    std::size_t n = topo.ap_ids.size();

    for (std::size_t i = 0; i < n; ++i)
        if (y_ont[i] > 0) p.servers_per_site[topo.ont_ids[i]] = y_ont[i];
    if (k_olt > 0) p.servers_per_site[topo.olt_id] = k_olt;

    std::vector<double> remaining(n), exported(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) remaining[i] = topo.patients_of(topo.ap_ids[i]);

    auto up_hc = [&](std::size_t i) {
        return placement_detail::link_hc(topo, catalog, topo.ont_ids[i], topo.olt_id);
    };
    auto down_hc = [&](std::size_t i) {
        return placement_detail::link_hc(topo, catalog, topo.olt_id, topo.ont_ids[i]);
    };

    // Static access-link check: the AP uplink carries all of its patients.
    for (std::size_t i = 0; i < n; ++i) {
        double cap = placement_detail::link_hc(topo, catalog, topo.ap_ids[i], topo.ont_ids[i]);
        if (remaining[i] * r_ps > cap * (1.0 + tol) + tol) return e;
    }

    std::vector<double> home(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (loads[i] <= 0.0) continue;
        // Analysed upload of the whole site crosses the ONT uplink.
        if (loads[i] * r_cloud > up_hc(i) * (1.0 + tol) + tol) return e;
        home[i] = std::min(remaining[i], loads[i]);
        remaining[i] -= home[i];
        if (home[i] > 0.0) p.assignment[topo.ap_ids[i]][topo.ont_ids[i]] = home[i];
        double remote = loads[i] - home[i];
        if (remote * r_ps > down_hc(i) * (1.0 + tol) + tol) return e;
    }
    if (k_olt > 0 && olt_load > 0.0) {
        if (!topo.chain_ids.empty()) {
            double cap = placement_detail::link_hc(topo, catalog, topo.olt_id,
                                                   topo.chain_ids.front());
            if (olt_load * r_cloud > cap * (1.0 + tol) + tol) return e;
        }
        double left = olt_load;
        for (std::size_t a = 0; a < n && left > tol; ++a) {
            double export_cap = up_hc(a) / r_ps - exported[a];
            if (integral) export_cap = std::floor(export_cap + 1e-6);
            double x = std::min({remaining[a], left, export_cap});
            if (x <= 0.0) continue;
            p.assignment[topo.ap_ids[a]][topo.olt_id] += x;
            exported[a] += x;
            remaining[a] -= x;
            left -= x;
        }
        if (left > tol) return e;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double remote = loads[i] - home[i];
        for (std::size_t a = 0; a < n && remote > tol; ++a) {
            if (a == i) continue;
            double export_cap = up_hc(a) / r_ps - exported[a];
            if (integral) export_cap = std::floor(export_cap + 1e-6);
            double x = std::min({remaining[a], remote, export_cap});
            if (x <= 0.0) continue;
            p.assignment[topo.ap_ids[a]][topo.ont_ids[i]] += x;
            exported[a] += x;
            remaining[a] -= x;
            remote -= x;
        }
        if (remote > tol) return e;
    }
    for (double r : remaining)
        if (r > tol) return e;

    e.feasible = true;
    return e;
}

/// Preference between equal-energy candidates: fewer servers, then the
/// lexicographically smallest server vector over the site order, then the
/// lexicographically greatest load vector (the water-fill canonical form).
struct CandidateKey {
    int total_servers = 0;
    std::vector<int> y;
    std::vector<double> loads;

    bool preferred_over(const CandidateKey& other) const {
        if (total_servers != other.total_servers)
            return total_servers < other.total_servers;
        if (y != other.y) return y < other.y;
        return loads > other.loads;
    }
};

inline CandidateKey make_key(std::size_t n_onts, const std::vector<int>& y_ont, int k_olt,
                             const std::vector<double>& loads, double olt_load) {
    CandidateKey k;
    k.y.assign(y_ont.begin(), y_ont.end());
    k.y.push_back(k_olt);
    for (int v : k.y) k.total_servers += v;
    k.loads = loads;
    k.loads.resize(n_onts, 0.0);
    k.loads.push_back(olt_load);
    return k;
}

} // namespace oracle_detail

/// Independent brute-force optimum, for verifying solve(). Enumerates
/// symmetric configurations, expands each greedily and scores it with
/// energy::evaluate; no search or objective code is shared with the solver.
/// Integer instances only; refuses anything over budget rather than
/// approximating.
inline PlacementSolution enumerate_optimal(const Topology& topo, const Scenario& scenario,
                                           Mode mode, const DeviceCatalog& catalog,
                                           const EnergyOptions& options = {},
                                           const OracleBudget& budget = {}) {
    using namespace oracle_detail;
    const std::size_t n = topo.ap_ids.size();
    double n_patients = 0.0;
    for (const auto& ap : topo.ap_ids) {
        double pats = topo.patients_of(ap);
        if (std::abs(pats - std::round(pats)) > 1e-9)
            throw ConfigError("oracle handles integer patient groups only");
        n_patients += pats;
    }
    double sites = static_cast<double>(n + 1);
    if (sites * std::max(1.0, n_patients) > budget.max_sites_times_patients)
        throw ConfigError("instance exceeds the oracle enumeration budget");

    PlacementSolution infeasible;
    infeasible.mode = mode;
    infeasible.pat_max = scenario.params.pat_max;
    infeasible.optimality = Optimality::Infeasible;

    if (mode == Mode::CA) {
        PlacementSolution p;
        p.mode = Mode::CA;
        p.pat_max = scenario.params.pat_max;
        for (const auto& ap : topo.ap_ids)
            if (topo.patients_of(ap) > 0.0) p.assignment[ap][kCloudSite] = topo.patients_of(ap);
        p.cloud_servers = static_cast<int>(std::ceil(n_patients / scenario.params.pat_max));
        const double tol = 1e-9;
        for (std::size_t i = 0; i < n; ++i) {
            double cap = placement_detail::link_hc(topo, catalog, topo.ap_ids[i],
                                                   topo.ont_ids[i]);
            if (topo.patients_of(topo.ap_ids[i]) * scenario.rates.r_ps_bps >
                cap * (1.0 + tol) + tol)
                return infeasible;
        }
        p.optimality = Optimality::ProvedOptimal;
        p.objective_j = evaluate(topo, scenario, p, catalog, options).total_j;
        return p;
    }

    const double pm = scenario.params.pat_max;
    const int max_olt =
        mode == Mode::SFA ? 1 : static_cast<int>(std::ceil(n_patients / pm));

    // Site classes by home patient count, in site order.
    std::vector<std::vector<std::size_t>> classes;
    std::vector<double> class_pats;
    for (std::size_t i = 0; i < n; ++i) {
        double pats = topo.patients_of(topo.ap_ids[i]);
        bool found = false;
        for (std::size_t c = 0; c < classes.size(); ++c)
            if (class_pats[c] == pats) {
                classes[c].push_back(i);
                found = true;
                break;
            }
        if (!found) {
            classes.push_back({i});
            class_pats.push_back(pats);
        }
    }

    // Pruning bound: servers' idle floors plus the instance-forced idle
    // attribution are in every configuration's energy.
    const DeviceSpec& server = catalog.at("processing server");
    double window = energy_detail::server_idle_window_s(options, scenario,
                                                        scenario.timing.t_cloud_s);
    double idle_per_server = server.idle_fraction * server.p_max_w * window;
    double forced_idle = 0.0;
    if (options.activation_binaries) {
        const double hc = catalog.hc_share;
        for (std::size_t i = 0; i < n; ++i)
            if (topo.patients_of(topo.ap_ids[i]) > 0.0)
                forced_idle += (energy_detail::idle_share_watts(catalog.at("access point"), hc) +
                                energy_detail::idle_share_watts(catalog.at("ONU/ONT"), hc)) *
                               scenario.timing.t_t_s;
        if (n_patients > 0.0) {
            double tail = energy_detail::idle_share_watts(catalog.at("OLT"), hc);
            for (const auto& hop : topo.chain_ids)
                tail += energy_detail::idle_share_watts(
                    catalog.at(topo.node(hop).device_class), hc);
            tail += energy_detail::idle_share_watts(catalog.at("cloud storage"), hc);
            forced_idle += tail * scenario.timing.t_cloud_s;
        }
    }

    std::optional<PlacementSolution> best;
    double best_energy = std::numeric_limits<double>::infinity();
    CandidateKey best_key;

    auto consider = [&](const std::vector<int>& y_ont, const SymmetricConfig& config) {
        Expansion e = expand(topo, scenario, catalog, mode, y_ont, config.ont_loads,
                             config.k_olt, config.olt_load, true);
        if (!e.feasible) return;
        double energy = evaluate(topo, scenario, e.placement, catalog, options).total_j;
        CandidateKey key = make_key(n, y_ont, config.k_olt, config.ont_loads,
                                    config.olt_load);
        bool have_best = std::isfinite(best_energy);
        double tie = 1e-12 * std::max(1.0, std::abs(energy));
        if (!have_best || energy < best_energy - tie ||
            (std::abs(energy - best_energy) <= tie && key.preferred_over(best_key))) {
            best_energy = energy;
            best_key = key;
            e.placement.objective_j = energy;
            e.placement.optimality = Optimality::ProvedOptimal;
            best = std::move(e.placement);
        }
    };

    const bool tiny = n + 1 <= 6 && n_patients <= 30;
    std::vector<int> k_per_class(classes.size(), 0);
    std::function<void(std::size_t)> per_layout = [&](std::size_t c) {
        if (c < classes.size()) {
            for (int k = 0; k <= static_cast<int>(classes[c].size()); ++k) {
                k_per_class[c] = k;
                per_layout(c + 1);
            }
            k_per_class[c] = 0;
            return;
        }
        for (int k_olt = 0; k_olt <= max_olt; ++k_olt) {
            int total = k_olt;
            for (int k : k_per_class) total += k;
            if (pm * total + 1e-9 < n_patients) continue;
            if (forced_idle + total * idle_per_server >
                best_energy + 1e-9 * std::max(1.0, best_energy))
                continue;

            std::vector<int> y_ont(n, 0);
            std::vector<std::size_t> placed;
            for (std::size_t cc = 0; cc < classes.size(); ++cc)
                for (int i = 0; i < k_per_class[cc]; ++i) {
                    y_ont[classes[cc][i]] = 1;
                    placed.push_back(classes[cc][i]);
                }
            std::sort(placed.begin(), placed.end());

            if (tiny) {
                // Exhaustive load multisets: non-increasing within a class.
                std::vector<double> loads(n, 0.0);
                std::function<void(std::size_t, double)> per_load = [&](std::size_t idx,
                                                                        double assigned) {
                    if (assigned > n_patients + 1e-9) return;
                    if (idx == placed.size()) {
                        double olt_load = n_patients - assigned;
                        if (olt_load < -1e-9 || olt_load > pm * k_olt + 1e-9) return;
                        consider(y_ont, SymmetricConfig{k_olt, loads, olt_load});
                        return;
                    }
                    std::size_t site = placed[idx];
                    double cap = pm;
                    if (idx > 0) {
                        std::size_t prev = placed[idx - 1];
                        if (topo.patients_of(topo.ap_ids[prev]) ==
                            topo.patients_of(topo.ap_ids[site]))
                            cap = std::min(cap, loads[prev]);
                    }
                    for (double l = 0.0; l <= cap + 1e-9; l += 1.0) {
                        loads[site] = l;
                        per_load(idx + 1, assigned + l);
                    }
                    loads[site] = 0.0;
                };
                per_load(0, 0.0);
            } else {
                // Class-allocation cross product. Within a class the sites
                // are interchangeable and remote marginal costs equal, so a
                // home-covering fill followed by a capacity-clamped spread
                // of the excess is a lossless representative of every
                // distribution of the class total.
                std::function<void(std::size_t, double, std::vector<double>&)> per_class_alloc =
                    [&](std::size_t cc, double assigned, std::vector<double>& loads) {
                        if (cc == classes.size()) {
                            double olt_load = n_patients - assigned;
                            if (olt_load < -1e-9 || olt_load > pm * k_olt + 1e-9) return;
                            consider(y_ont, SymmetricConfig{k_olt, loads, olt_load});
                            return;
                        }
                        int k = k_per_class[cc];
                        if (k == 0) {
                            per_class_alloc(cc + 1, assigned, loads);
                            return;
                        }
                        double cap = pm * k;
                        for (double alloc = 0.0; alloc <= cap + 1e-9; alloc += 1.0) {
                            if (assigned + alloc > n_patients + 1e-9) break;
                            double left = alloc;
                            for (int i = 0; i < k; ++i) {
                                std::size_t site = classes[cc][i];
                                loads[site] = std::min(
                                    {pm, left, topo.patients_of(topo.ap_ids[site])});
                                left -= loads[site];
                            }
                            for (int i = 0; i < k && left > 1e-9; ++i) {
                                std::size_t site = classes[cc][i];
                                double rcap = std::floor(
                                    placement_detail::link_hc(topo, catalog, topo.olt_id,
                                                              topo.ont_ids[site]) /
                                        scenario.rates.r_ps_bps +
                                    1e-6);
                                double extra =
                                    std::min({pm - loads[site], left, rcap});
                                if (extra > 0.0) {
                                    loads[site] += extra;
                                    left -= extra;
                                }
                            }
                            if (left <= 1e-9)
                                per_class_alloc(cc + 1, assigned + alloc, loads);
                            for (int i = 0; i < k; ++i) loads[classes[cc][i]] = 0.0;
                        }
                    };
                std::vector<double> loads(n, 0.0);
                per_class_alloc(0, 0.0, loads);
            }
        }
    };
    per_layout(0);

    if (!best) return infeasible;
    return *best;
}

/// One randomized instance for the solver/oracle equivalence harness.
struct OracleInstance {
    std::string name;
    GponParams gpon;
    DeviceCatalog catalog;
    ScenarioParams scenario_base;
    Mode mode = Mode::SFA;
    EnergyOptions options;
    std::vector<double> patients_per_ap; // overrides the even split
};

/// Deterministic randomized small instances: up to 4 APs and 20 patients,
/// varied patient spreads, pat_max, link shares and a common power scale.
/// The relative cost order home <= OLT <= remote of the default catalog is
/// preserved so the documented greedy expansion stays optimal.
inline std::vector<OracleInstance> random_instances(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::vector<OracleInstance> out;
    for (int i = 0; i < count; ++i) {
        OracleInstance inst;
        std::uniform_int_distribution<int> ap_dist(1, 4);
        inst.gpon.n_aps = ap_dist(rng);
        std::uniform_int_distribution<int> pat_dist(0, 7);
        double total = 0.0;
        for (int a = 0; a < inst.gpon.n_aps; ++a) {
            double pats = pat_dist(rng);
            inst.patients_per_ap.push_back(pats);
            total += pats;
        }
        if (total == 0.0) {
            inst.patients_per_ap[0] = 1.0;
            total = 1.0;
        }
        while (total > 20.0) {
            for (auto& p : inst.patients_per_ap)
                if (total > 20.0 && p > 0.0) {
                    p -= 1.0;
                    total -= 1.0;
                }
        }
        inst.gpon.n_patients = total;

        inst.catalog = default_catalog();
        std::uniform_real_distribution<double> power_scale(0.5, 5.0);
        double scale = power_scale(rng);
        for (auto& [cls, spec] : inst.catalog.entries) spec.p_max_w *= scale;
        std::uniform_real_distribution<double> hc_dist(0.001, 0.05);
        inst.catalog.hc_share = hc_dist(rng);

        std::uniform_int_distribution<int> pm_dist(1, 8);
        inst.scenario_base.pat_max = pm_dist(rng);
        inst.scenario_base.n_patients = total;
        std::uniform_real_distribution<double> t_total_dist(120.0, 400.0);
        inst.scenario_base.t_total_s = t_total_dist(rng);
        std::uniform_real_distribution<double> ecg_scale(0.5, 2.0);
        inst.scenario_base.ecg_bits = 1'920'000.0 * ecg_scale(rng);
        std::uniform_int_distribution<int> proc_kind(0, 5);
        if (proc_kind(rng) == 0) inst.scenario_base.processed_bits = 0.0;

        std::uniform_real_distribution<double> trunk_scale(0.2, 2.0);
        inst.gpon.gpon_trunk_capacity_bps = 2.5e9 * trunk_scale(rng);
        // Downstream share between "one remote patient" and "everyone",
        // to make the downstream constraint bind on some draws.
        double t_pa = inst.scenario_base.pat_max * inst.scenario_base.unit_pa_time_s;
        double r_ps = inst.scenario_base.ecg_bits /
                      (inst.scenario_base.t_total_s - t_pa);
        std::uniform_real_distribution<double> down_pats(1.0, 21.0);
        inst.gpon.downstream_hc_override_bps = r_ps * down_pats(rng);

        std::uniform_int_distribution<int> mode_dist(0, 5);
        int md = mode_dist(rng);
        inst.mode = md == 0 ? Mode::CA : (md % 2 == 0 ? Mode::SFA : Mode::MFA);
        inst.name = "rand" + std::to_string(i);
        out.push_back(std::move(inst));
    }
    return out;
}

struct EquivalenceEntry {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct EquivalenceReport {
    std::vector<EquivalenceEntry> entries;
    bool all_pass = true;
    int passed = 0;
};

/// Runs solve() and enumerate_optimal() on each instance and compares the
/// objective (relative 1e-9) and the canonical placement. The solver is
/// injectable so the harness itself can be exercised against a perturbed
/// solver.
inline EquivalenceReport equivalence_check(
    const std::vector<OracleInstance>& instances,
    const std::function<PlacementSolution(const MilpModel&)>& solver =
        [](const MilpModel& m) { return solve(m); }) {
    EquivalenceReport report;
    for (const auto& inst : instances) {
        EquivalenceEntry entry;
        entry.name = inst.name;
        Topology topo = build_gpon(inst.gpon, inst.catalog);
        if (!inst.patients_per_ap.empty()) {
            for (std::size_t a = 0; a < topo.ap_ids.size(); ++a)
                topo.patients_per_ap[topo.ap_ids[a]] =
                    a < inst.patients_per_ap.size() ? inst.patients_per_ap[a] : 0.0;
        }
        double uplink_share = placement_detail::link_hc(topo, inst.catalog,
                                                        topo.ont_ids.front(), topo.olt_id);
        Scenario sc = make_scenario(inst.scenario_base, uplink_share);
        MilpModel model = formulate(topo, sc, inst.mode, inst.catalog, inst.options);
        PlacementSolution got = solver(model);
        PlacementSolution want =
            enumerate_optimal(topo, sc, inst.mode, inst.catalog, inst.options);

        std::ostringstream detail;
        bool pass = true;
        if (got.optimality != want.optimality) {
            pass = false;
            detail << "optimality " << optimality_name(got.optimality) << " vs oracle "
                   << optimality_name(want.optimality);
        } else if (got.optimality == Optimality::ProvedOptimal) {
            double tol = 1e-9 * std::max(1.0, std::abs(want.objective_j));
            if (std::abs(got.objective_j - want.objective_j) > tol) {
                pass = false;
                detail << "objective " << got.objective_j << " vs oracle "
                       << want.objective_j;
            } else if (got.servers_per_site != want.servers_per_site) {
                pass = false;
                detail << "server layout differs";
            } else {
                for (const auto& [ap, sites] : want.assignment) {
                    for (const auto& [site, x] : sites) {
                        double gx = 0.0;
                        auto ap_it = got.assignment.find(ap);
                        if (ap_it != got.assignment.end()) {
                            auto s_it = ap_it->second.find(site);
                            if (s_it != ap_it->second.end()) gx = s_it->second;
                        }
                        if (std::abs(gx - x) > 1e-9) {
                            pass = false;
                            detail << "assignment " << ap << "->" << site << " " << gx
                                   << " vs oracle " << x;
                            break;
                        }
                    }
                    if (!pass) break;
                }
            }
        }
        entry.pass = pass;
        entry.detail = detail.str();
        report.entries.push_back(entry);
        if (pass)
            ++report.passed;
        else
            report.all_pass = false;
    }
    return report;
}

} // namespace fogplace
