#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fogplace/catalog.hpp"
#include "fogplace/common.hpp"
#include "fogplace/energy.hpp"
#include "fogplace/placement_types.hpp"
#include "fogplace/scenario.hpp"
#include "fogplace/topology.hpp"

namespace fogplace {

struct MilpVariable {
    enum class Kind { General, Binary, Continuous };
    std::string name;
    Kind kind = Kind::General;
    double lower = 0.0;
    double upper = 0.0;
    double objective = 0.0;
};

struct MilpTerm {
    std::size_t var = 0;
    double coeff = 0.0;
};

struct MilpRow {
    std::string name;
    std::vector<MilpTerm> terms;
    char sense = '<'; // '<', '=', '>'
    double rhs = 0.0;
};

namespace placement_detail {

/// ONT sites grouped by the patient count of their access point. Sites of a
/// class are interchangeable; the solver's symmetry reduction and the
/// oracle's configuration space both rest on that.
struct SiteClass {
    double patients = 0.0;              // per home AP
    std::vector<std::size_t> site_pos;  // positions into candidate site order
};

/// Everything solve() needs besides the row/variable view: per-patient
/// costs, per-site capacities in patients, activation charges and the
/// constant part of the objective.
struct SolverTables {
    double n_patients = 0.0;
    double pat_max = 0.0;
    bool integral = true;

    std::vector<SiteClass> classes;       // ONT classes in first-site order
    std::vector<std::string> sites;       // candidate sites, ONTs then OLT
    std::vector<double> site_patients;    // home patients per site (0 for OLT)

    int olt_cap_servers = 0;              // mode cap on servers at the OLT
    int ont_cap_servers = 1;

    // Per-patient assignment costs; device classes are uniform across
    // APs/ONTs, so one value per destination kind is enough.
    double theta_home = 0.0;
    double theta_olt = 0.0;
    double theta_remote = 0.0;

    double server_idle_j = 0.0;           // per placed server
    double site_use_p2_j = 0.0;           // ONT idle over the analysed phase
    double site_use_p1_j = 0.0;           // ONT idle over the raw phase (zero-patient sites)
    double olt_p1_idle_j = 0.0;           // OLT activation in the raw phase
    double constant_j = 0.0;              // activation terms forced by the instance

    // Capacities in patients (floored in integer mode).
    std::vector<double> site_total_cap;   // per ONT site, analysed-phase uplink bound
    std::vector<double> site_remote_cap;  // per ONT site, downstream raw bound
    std::vector<double> donor_export_cap; // per AP, upstream raw bound
    double olt_total_cap = 0.0;           // analysed-phase bound at the OLT

    bool statically_infeasible = false;
    std::string infeasible_reason;
};

inline double floor_cap(double cap_patients, bool integral) {
    if (cap_patients < 0.0) return 0.0;
    // Tolerate one part in 10^6 of float fuzz before the floor bites.
    return integral ? std::floor(cap_patients + 1e-6) : cap_patients;
}

inline double link_hc(const Topology& topo, const DeviceCatalog& catalog,
                      const std::string& from, const std::string& to) {
    for (const auto& link : topo.links)
        if (link.from == from && link.to == to) return link_hc_capacity(link, catalog);
    throw ConfigError("no link " + from + "->" + to);
}

inline double path_prop_per_patient(const Topology& topo, const DeviceCatalog& catalog,
                                    const Path& path, double rate_bps, double duration_s,
                                    double processed_bits) {
    double j = 0.0;
    for (const auto& node_id : path.node_ids) {
        const DeviceSpec& spec = catalog.at(topo.node(node_id).device_class);
        if (spec.sharing == SharingMode::DedicatedServer) continue;
        if (spec.name == "cloud storage")
            j += (1.0 - spec.idle_fraction) * spec.p_max_w *
                 (processed_bits / spec.capacity.value()) * duration_s;
        else
            j += energy_detail::prop_joules_per_bit(spec) * rate_bps * duration_s;
    }
    return j;
}

inline SolverTables build_tables(const Topology& topo, const Scenario& scenario, Mode mode,
                                 const DeviceCatalog& catalog, const EnergyOptions& options,
                                 bool integral) {
    SolverTables t;
    t.integral = integral;
    t.pat_max = scenario.params.pat_max;
    t.sites = candidate_sites(topo);
    for (const auto& ap : topo.ap_ids) t.n_patients += topo.patients_of(ap);

    for (std::size_t pos = 0; pos + 1 < t.sites.size(); ++pos) {
        t.site_patients.push_back(topo.patients_of(topo.ap_ids[pos]));
        bool grouped = false;
        for (auto& cls : t.classes) {
            if (cls.patients == t.site_patients.back()) {
                cls.site_pos.push_back(pos);
                grouped = true;
                break;
            }
        }
        if (!grouped) t.classes.push_back({t.site_patients.back(), {pos}});
    }
    t.site_patients.push_back(0.0); // OLT

    t.ont_cap_servers = 1;
    t.olt_cap_servers =
        mode == Mode::SFA
            ? 1
            : static_cast<int>(std::ceil(t.n_patients / scenario.params.pat_max));
    if (mode == Mode::CA) t.olt_cap_servers = 0;

    const double t_t = scenario.timing.t_t_s;
    const double t_cl = scenario.timing.t_cloud_s;
    const double r_ps = scenario.rates.r_ps_bps;
    const double r_cloud = scenario.rates.r_cloud_bps;
    const double hc = catalog.hc_share;
    const double processed = scenario.params.processed_bits;

    const std::string& ap0 = topo.ap_ids.front();
    const std::string& ont0 = topo.ont_ids.front();
    const DeviceSpec& server = catalog.at("processing server");
    double busy_pp = (1.0 - server.idle_fraction) * server.p_max_w *
                     scenario.params.unit_pa_time_s;

    t.theta_home = path_prop_per_patient(topo, catalog, route(topo, ap0, ont0), r_ps, t_t, 0) +
                   path_prop_per_patient(topo, catalog,
                                         route(topo, ont0, topo.cloud_storage_id), r_cloud,
                                         t_cl, processed) +
                   busy_pp;
    t.theta_olt =
        path_prop_per_patient(topo, catalog, route(topo, ap0, topo.olt_id), r_ps, t_t, 0) +
        path_prop_per_patient(topo, catalog, route(topo, topo.olt_id, topo.cloud_storage_id),
                              r_cloud, t_cl, processed) +
        busy_pp;
    if (topo.ont_ids.size() > 1) {
        const std::string& ont1 = topo.ont_ids[1];
        t.theta_remote =
            path_prop_per_patient(topo, catalog, route(topo, ap0, ont1), r_ps, t_t, 0) +
            path_prop_per_patient(topo, catalog,
                                  route(topo, ont1, topo.cloud_storage_id), r_cloud, t_cl,
                                  processed) +
            busy_pp;
    } else {
        t.theta_remote = t.theta_home;
    }

    const DeviceSpec& ont_spec = catalog.at("ONU/ONT");
    const DeviceSpec& olt_spec = catalog.at("OLT");
    t.server_idle_j = server.idle_fraction * server.p_max_w *
                      energy_detail::server_idle_window_s(options, scenario, t_cl);
    t.site_use_p2_j = energy_detail::idle_share_watts(ont_spec, hc) * t_cl;
    t.site_use_p1_j = energy_detail::idle_share_watts(ont_spec, hc) * t_t;
    t.olt_p1_idle_j = energy_detail::idle_share_watts(olt_spec, hc) * t_t;

    // Activation terms the instance forces: every AP with patients lights up
    // its AP and home ONT for the raw phase; the OLT, the chain and the
    // storage carry analysed traffic whenever anyone does.
    const DeviceSpec& ap_spec = catalog.at("access point");
    for (const auto& ap : topo.ap_ids) {
        if (topo.patients_of(ap) > 0.0)
            t.constant_j += (energy_detail::idle_share_watts(ap_spec, hc) +
                             energy_detail::idle_share_watts(ont_spec, hc)) *
                            t_t;
    }
    if (t.n_patients > 0.0) {
        double tail = energy_detail::idle_share_watts(olt_spec, hc);
        for (const auto& hop : topo.chain_ids)
            tail += energy_detail::idle_share_watts(catalog.at(topo.node(hop).device_class), hc);
        tail += energy_detail::idle_share_watts(catalog.at("cloud storage"), hc);
        t.constant_j += tail * t_cl;
    }
    if (!options.activation_binaries) {
        // Idle charged unconditionally per phase for every shared device.
        t.constant_j = 0.0;
        for (const auto& node : topo.nodes) {
            const DeviceSpec& spec = catalog.at(node.device_class);
            if (spec.sharing == SharingMode::SharedNetwork)
                t.constant_j += energy_detail::idle_share_watts(spec, hc) * (t_t + t_cl);
        }
        t.site_use_p2_j = 0.0;
        t.site_use_p1_j = 0.0;
        t.olt_p1_idle_j = 0.0;
    }

    for (std::size_t pos = 0; pos + 1 < t.sites.size(); ++pos) {
        const std::string& ont = topo.ont_ids[pos];
        double up_p2 = link_hc(topo, catalog, ont, topo.olt_id);
        double down_p1 = link_hc(topo, catalog, topo.olt_id, ont);
        t.site_total_cap.push_back(floor_cap(up_p2 / r_cloud, integral));
        t.site_remote_cap.push_back(floor_cap(down_p1 / r_ps, integral));
    }
    for (std::size_t i = 0; i < topo.ap_ids.size(); ++i) {
        double up_p1 = link_hc(topo, catalog, topo.ont_ids[i], topo.olt_id);
        t.donor_export_cap.push_back(floor_cap(up_p1 / r_ps, integral));
        // The AP->ONT hop carries all of the AP's patients no matter where
        // they are served; if it cannot, no placement exists.
        double ap_link = link_hc(topo, catalog, topo.ap_ids[i], topo.ont_ids[i]);
        double need = topo.patients_of(topo.ap_ids[i]) * r_ps;
        if (need > ap_link * (1.0 + 1e-9) + 1e-9) {
            t.statically_infeasible = true;
            t.infeasible_reason = "raw upload of " + topo.ap_ids[i] +
                                  " exceeds its access link healthcare share";
        }
    }
    if (!topo.chain_ids.empty()) {
        double olt_up = link_hc(topo, catalog, topo.olt_id, topo.chain_ids.front());
        t.olt_total_cap = floor_cap(olt_up / r_cloud, integral);
    } else {
        t.olt_total_cap = floor_cap(t.n_patients, integral);
    }
    return t;
}

} // namespace placement_detail

/// The reconstructed optimisation model: integer server counts per site,
/// integer patient-group assignment, binary device activations, and an
/// objective assembled from the same coefficients the energy module charges,
/// so that the model objective of a solution equals evaluate() of it.
struct MilpModel {
    Mode mode = Mode::SFA;
    std::vector<MilpVariable> vars;
    std::vector<MilpRow> rows;
    std::map<std::string, std::size_t> var_index;

    const Topology* topo = nullptr;
    const DeviceCatalog* catalog = nullptr;
    Scenario scenario;
    EnergyOptions options;
    placement_detail::SolverTables tables;
};

/// Builds the optimisation model for one scenario and mode. CA has no
/// decisions; its model carries no variables and is evaluated directly.
inline MilpModel formulate(const Topology& topo, const Scenario& scenario, Mode mode,
                           const DeviceCatalog& catalog, const EnergyOptions& options = {},
                           bool integral = true) {
    using namespace placement_detail;
    MilpModel m;
    m.mode = mode;
    m.topo = &topo;
    m.catalog = &catalog;
    m.scenario = scenario;
    m.options = options;
    m.tables = build_tables(topo, scenario, mode, catalog, options, integral);
    if (mode == Mode::CA) return m;

    const auto& sites = m.tables.sites;
    const double r_ps = scenario.rates.r_ps_bps;
    const double r_cloud = scenario.rates.r_cloud_bps;

    auto add_var = [&](const std::string& name, MilpVariable::Kind kind, double lo, double hi,
                       double obj) {
        m.var_index[name] = m.vars.size();
        m.vars.push_back(MilpVariable{name, kind, lo, hi, obj});
    };

    for (std::size_t pos = 0; pos < sites.size(); ++pos) {
        bool is_olt = pos + 1 == sites.size();
        double cap = is_olt ? m.tables.olt_cap_servers : m.tables.ont_cap_servers;
        add_var("y_" + sites[pos], MilpVariable::Kind::General, 0.0, cap,
                m.tables.server_idle_j);
    }
    for (std::size_t a = 0; a < topo.ap_ids.size(); ++a) {
        double pats = topo.patients_of(topo.ap_ids[a]);
        for (std::size_t pos = 0; pos < sites.size(); ++pos) {
            double theta;
            if (pos + 1 == sites.size())
                theta = m.tables.theta_olt;
            else if (pos == a)
                theta = m.tables.theta_home;
            else
                theta = m.tables.theta_remote;
            add_var("x_" + topo.ap_ids[a] + "_" + sites[pos],
                    integral ? MilpVariable::Kind::General : MilpVariable::Kind::Continuous,
                    0.0, pats, theta);
        }
    }
    const double t_t = scenario.timing.t_t_s;
    const double t_cl = scenario.timing.t_cloud_s;
    if (options.activation_binaries) {
        for (const auto& node : topo.nodes) {
            const DeviceSpec& spec = catalog.at(node.device_class);
            if (spec.sharing != SharingMode::SharedNetwork) continue;
            double idle = energy_detail::idle_share_watts(spec, catalog.hc_share);
            bool on_p1 = node.layer == Layer::AccessPoint || node.layer == Layer::Ont ||
                         node.layer == Layer::Olt;
            bool on_p2 = node.layer != Layer::AccessPoint;
            if (on_p1)
                add_var("z_" + node.id + "_p1", MilpVariable::Kind::Binary, 0.0, 1.0,
                        idle * t_t);
            if (on_p2)
                add_var("z_" + node.id + "_p2", MilpVariable::Kind::Binary, 0.0, 1.0,
                        idle * t_cl);
        }
    }

    auto x_of = [&](std::size_t a, std::size_t pos) {
        return m.var_index.at("x_" + topo.ap_ids[a] + "_" + sites[pos]);
    };

    for (std::size_t a = 0; a < topo.ap_ids.size(); ++a) {
        MilpRow row;
        row.name = "assign_" + topo.ap_ids[a];
        row.sense = '=';
        row.rhs = topo.patients_of(topo.ap_ids[a]);
        for (std::size_t pos = 0; pos < sites.size(); ++pos)
            row.terms.push_back({x_of(a, pos), 1.0});
        m.rows.push_back(std::move(row));
    }
    for (std::size_t pos = 0; pos < sites.size(); ++pos) {
        MilpRow row;
        row.name = "servercap_" + sites[pos];
        row.sense = '<';
        row.rhs = 0.0;
        for (std::size_t a = 0; a < topo.ap_ids.size(); ++a)
            row.terms.push_back({x_of(a, pos), 1.0});
        row.terms.push_back({m.var_index.at("y_" + sites[pos]), -scenario.params.pat_max});
        m.rows.push_back(std::move(row));
    }

    // Per-link per-phase healthcare capacity plus the activation linking
    // rows, built from the actual routes.
    std::map<std::string, std::map<std::size_t, double>> link_rows_p1, link_rows_p2;
    std::map<std::string, std::map<std::size_t, double>> act_rows_p1, act_rows_p2;
    for (std::size_t a = 0; a < topo.ap_ids.size(); ++a) {
        for (std::size_t pos = 0; pos < sites.size(); ++pos) {
            std::size_t xv = x_of(a, pos);
            Path p1 = route(topo, topo.ap_ids[a], sites[pos]);
            for (std::size_t li : p1.link_indices) {
                const Link& l = topo.links[li];
                link_rows_p1[l.from + "__" + l.to][xv] += r_ps;
            }
            for (const auto& nid : p1.node_ids)
                if (m.var_index.count("z_" + nid + "_p1")) act_rows_p1[nid][xv] += r_ps;
            Path p2 = route(topo, sites[pos], topo.cloud_storage_id);
            for (std::size_t li : p2.link_indices) {
                const Link& l = topo.links[li];
                link_rows_p2[l.from + "__" + l.to][xv] += r_cloud;
            }
            for (const auto& nid : p2.node_ids)
                if (m.var_index.count("z_" + nid + "_p2")) act_rows_p2[nid][xv] += r_cloud;
        }
    }
    auto link_cap = [&](const std::string& key) {
        auto sep = key.find("__");
        return placement_detail::link_hc(topo, catalog, key.substr(0, sep),
                                         key.substr(sep + 2));
    };
    auto emit_rows = [&](const std::map<std::string, std::map<std::size_t, double>>& rows,
                         const char* prefix, bool is_link, double big_m) {
        for (const auto& [key, terms] : rows) {
            MilpRow row;
            row.name = std::string(prefix) + key;
            row.sense = '<';
            row.rhs = is_link ? link_cap(key) : 0.0;
            for (const auto& [var, coeff] : terms) row.terms.push_back({var, coeff});
            if (!is_link) {
                std::string phase = prefix == std::string("act_p1_") ? "_p1" : "_p2";
                row.terms.push_back({m.var_index.at("z_" + key + phase), -big_m});
            }
            m.rows.push_back(std::move(row));
        }
    };
    double n_pat = m.tables.n_patients;
    emit_rows(link_rows_p1, "link_p1_", true, 0.0);
    emit_rows(link_rows_p2, "link_p2_", true, 0.0);
    emit_rows(act_rows_p1, "act_p1_", false, n_pat * r_ps);
    emit_rows(act_rows_p2, "act_p2_", false, n_pat * r_cloud);
    return m;
}

namespace placement_detail {

/// Candidate server layout in canonical form: per-class counts occupying
/// the lowest-id sites of each class, plus the OLT count.
struct CanonicalLayout {
    std::vector<int> class_servers;
    int olt_servers = 0;
    int total() const {
        int n = olt_servers;
        for (int k : class_servers) n += k;
        return n;
    }
};

struct GreedyResult {
    bool feasible = false;
    double cost = 0.0; // assignment cost incl. dynamic activation charges
    std::vector<double> load;  // per ONT site position
    std::vector<double> home;  // home share per ONT site position
    double olt_load = 0.0;
    double total_export = 0.0;
};

/// Exact assignment for a fixed layout and used-site subset.
///
/// Costs take three values: theta_home <= theta_remote and
/// theta_olt <= theta_remote always hold under the two-part profile, so the
/// only order question is home vs OLT. When home is cheapest, home-maximal
/// assignment followed by OLT and remote fills is optimal (home slots are
/// pair-exclusive, everything else is destination-priced). When the OLT is
/// cheaper than home, the OLT first absorbs patients with no home slot
/// (their alternative is remote, the most expensive) and only then poaches
/// home-capable patients while it has room; both moves are supported by an
/// exchange argument. Ties across equal-cost load vectors resolve to the
/// lexicographically greatest load vector in site order.
inline GreedyResult greedy_assign(const SolverTables& t, const Topology& topo,
                                  const CanonicalLayout& layout,
                                  const std::vector<int>& used_per_class, bool home_only) {
    GreedyResult r;
    std::size_t n = t.sites.size() - 1; // ONT sites; position == AP index
    r.load.assign(n, 0.0);
    r.home.assign(n, 0.0);

    std::vector<char> used(n, 0);
    std::vector<double> site_cap(n, 0.0), home_cap(n, 0.0);
    for (std::size_t c = 0; c < t.classes.size(); ++c) {
        for (int i = 0; i < used_per_class[c]; ++i) {
            std::size_t pos = t.classes[c].site_pos[i];
            used[pos] = 1;
            site_cap[pos] = std::min(t.pat_max, t.site_total_cap[pos]);
            home_cap[pos] = std::min(t.site_patients[pos], site_cap[pos]);
        }
    }
    double olt_cap =
        (!home_only && layout.olt_servers > 0)
            ? std::min(t.pat_max * layout.olt_servers, t.olt_total_cap)
            : 0.0;

    std::vector<double> remaining(n), budget = t.donor_export_cap;
    for (std::size_t a = 0; a < n; ++a) remaining[a] = topo.patients_of(topo.ap_ids[a]);

    double olt_room = olt_cap;
    const bool olt_first = t.theta_olt < t.theta_home && !home_only;
    if (olt_first) {
        // Homeless excess first: these patients would otherwise pay remote.
        for (std::size_t a = 0; a < n && olt_room > 0.0; ++a) {
            double excess = remaining[a] - home_cap[a];
            double x = std::min({excess, olt_room, budget[a]});
            if (x <= 0.0) continue;
            r.olt_load += x;
            olt_room -= x;
            budget[a] -= x;
            remaining[a] -= x;
        }
        // Poach home-capable patients while the OLT stays cheaper. Reverse
        // site order keeps the load vector lexicographically greatest.
        for (std::size_t i = n; i-- > 0 && olt_room > 0.0;) {
            double x = std::min({remaining[i], olt_room, budget[i]});
            if (x <= 0.0) continue;
            r.olt_load += x;
            olt_room -= x;
            budget[i] -= x;
            remaining[i] -= x;
        }
    }
    // Home slots.
    for (std::size_t pos = 0; pos < n; ++pos) {
        if (!used[pos]) continue;
        double x = std::min(remaining[pos], home_cap[pos]);
        if (x <= 0.0) continue;
        r.load[pos] += x;
        r.home[pos] += x;
        remaining[pos] -= x;
    }
    if (!olt_first && !home_only) {
        for (std::size_t a = 0; a < n && olt_room > 0.0; ++a) {
            double x = std::min({remaining[a], olt_room, budget[a]});
            if (x <= 0.0) continue;
            r.olt_load += x;
            olt_room -= x;
            budget[a] -= x;
            remaining[a] -= x;
        }
    }
    if (!home_only) {
        for (std::size_t pos = 0; pos < n; ++pos) {
            if (!used[pos]) continue;
            double remote_room =
                std::min(site_cap[pos] - r.load[pos],
                         t.site_remote_cap[pos] - (r.load[pos] - r.home[pos]));
            for (std::size_t a = 0; a < n && remote_room > 0.0; ++a) {
                if (a == pos) continue;
                double x = std::min({remaining[a], remote_room, budget[a]});
                if (x <= 0.0) continue;
                r.load[pos] += x;
                remote_room -= x;
                budget[a] -= x;
                remaining[a] -= x;
            }
        }
    }
    double left = 0.0;
    for (double v : remaining) left += v;
    if (left > 1e-9) return r; // no feasible completion under this used set

    double home_total = 0.0, remote_total = 0.0;
    for (std::size_t pos = 0; pos < n; ++pos) {
        home_total += r.home[pos];
        remote_total += r.load[pos] - r.home[pos];
    }
    double cost = home_total * t.theta_home + r.olt_load * t.theta_olt +
                  remote_total * t.theta_remote;
    for (std::size_t pos = 0; pos < n; ++pos) {
        if (r.load[pos] > 0.0) {
            cost += t.site_use_p2_j;
            if (t.site_patients[pos] <= 0.0 && r.load[pos] - r.home[pos] > 0.0)
                cost += t.site_use_p1_j;
        }
    }
    r.total_export = r.olt_load + remote_total;
    if (r.total_export > 0.0) cost += t.olt_p1_idle_j;

    r.feasible = true;
    r.cost = cost;
    return r;
}

inline std::vector<int> full_y_vector(const SolverTables& t, const CanonicalLayout& layout) {
    std::vector<int> y(t.sites.size(), 0);
    for (std::size_t c = 0; c < t.classes.size(); ++c)
        for (int i = 0; i < layout.class_servers[c]; ++i)
            y[t.classes[c].site_pos[i]] = 1;
    y.back() = layout.olt_servers;
    return y;
}

} // namespace placement_detail

/// One feasibility finding: which constraint, on which entity, by how much.
struct Violation {
    std::string constraint;
    std::string entity;
    double slack = 0.0; // negative means violated by |slack|
    std::string message;
};

/// Checks every placement invariant directly against the topology and
/// scenario; an empty list means the placement is feasible.
inline std::vector<Violation> check_feasibility(const Topology& topo, const Scenario& scenario,
                                                const PlacementSolution& placement,
                                                const DeviceCatalog& catalog) {
    std::vector<Violation> out;
    const double tol = 1e-9;

    for (const auto& ap : topo.ap_ids) {
        double expected = topo.patients_of(ap);
        double assigned = 0.0;
        auto it = placement.assignment.find(ap);
        if (it != placement.assignment.end())
            for (const auto& [site, x] : it->second) assigned += x;
        if (std::abs(assigned - expected) > 1e-6)
            out.push_back({"assignment completeness", ap, assigned - expected,
                           ap + " has " + std::to_string(assigned) + " of " +
                               std::to_string(expected) + " patients assigned"});
    }

    if (placement.mode == Mode::CA) {
        if (placement.total_servers() > 0)
            out.push_back({"mode cardinality", "fog sites", -placement.total_servers() + 0.0,
                           "CA places no fog servers"});
        double need = 0.0;
        for (const auto& [ap, sites] : placement.assignment)
            for (const auto& [site, x] : sites) need += x;
        double cap = placement.cloud_servers * scenario.params.pat_max;
        if (need > cap * (1.0 + tol) + 1e-6)
            out.push_back({"server capacity", "cloud", cap - need,
                           "cloud instances cover " + std::to_string(cap) + " of " +
                               std::to_string(need) + " patients"});
    } else {
        std::map<std::string, double> site_load;
        for (const auto& [ap, sites] : placement.assignment)
            for (const auto& [site, x] : sites) site_load[site] += x;
        for (const auto& [site, load] : site_load) {
            if (site == kCloudSite) {
                out.push_back({"assignment target", site, -load,
                               "fog placement assigns patients to the cloud pseudo-site"});
                continue;
            }
            auto it = placement.servers_per_site.find(site);
            int servers = it == placement.servers_per_site.end() ? 0 : it->second;
            double cap = servers * scenario.params.pat_max;
            if (load > cap * (1.0 + tol) + 1e-6)
                out.push_back({"server capacity", site, cap - load,
                               site + " serves " + std::to_string(load) +
                                   " patients with capacity " + std::to_string(cap)});
        }
        for (const auto& [site, servers] : placement.servers_per_site) {
            bool unlimited = site == topo.olt_id && placement.mode == Mode::MFA;
            if (!unlimited && servers > 1)
                out.push_back({"mode cardinality", site, 1.0 - servers,
                               site + " holds " + std::to_string(servers) +
                                   " servers (cap 1)"});
            if (servers < 0)
                out.push_back({"mode cardinality", site, static_cast<double>(servers),
                               "negative server count"});
        }
    }

    std::map<std::size_t, double> p1_load, p2_load;
    if (placement.mode == Mode::CA) {
        for (const auto& [ap, sites] : placement.assignment) {
            double n = 0.0;
            for (const auto& [site, x] : sites) n += x;
            if (n <= 0.0) continue;
            Path p = route(topo, ap, topo.content_server_id);
            for (std::size_t li : p.link_indices) p1_load[li] += n * scenario.rates.r_ps_bps;
        }
    } else {
        std::map<std::string, double> site_load;
        for (const auto& [ap, sites] : placement.assignment) {
            for (const auto& [site, x] : sites) {
                if (x <= 0.0 || site == kCloudSite) continue;
                Path p = route(topo, ap, site);
                for (std::size_t li : p.link_indices)
                    p1_load[li] += x * scenario.rates.r_ps_bps;
                site_load[site] += x;
            }
        }
        for (const auto& [site, load] : site_load) {
            Path p = route(topo, site, topo.cloud_storage_id);
            for (std::size_t li : p.link_indices)
                p2_load[li] += load * scenario.rates.r_cloud_bps;
        }
    }
    auto check_links = [&](const std::map<std::size_t, double>& loads, const char* phase) {
        for (const auto& [li, load] : loads) {
            const Link& l = topo.links[li];
            double cap = link_hc_capacity(l, catalog);
            if (load > cap * (1.0 + tol) + 1e-9)
                out.push_back({std::string("link capacity ") + phase, l.from + "->" + l.to,
                               cap - load,
                               std::string(phase) + " load " + std::to_string(load) +
                                   " bps exceeds healthcare share " + std::to_string(cap) +
                                   " bps"});
        }
    };
    check_links(p1_load, "phase1");
    check_links(p2_load, "phase2");

    double total_assigned = 0.0;
    for (const auto& [ap, sites] : placement.assignment)
        for (const auto& [site, x] : sites) total_assigned += x;
    double stored_bits = total_assigned * scenario.params.processed_bits;
    double storage_cap = catalog.at("cloud storage").capacity.value_or(0.0);
    if (stored_bits > storage_cap)
        out.push_back({"storage volume", "cloud_storage", storage_cap - stored_bits,
                       "stored volume exceeds the storage array capacity"});
    return out;
}

/// Exact solve: branch-and-bound over canonical server layouts with an
/// optimal greedy expansion per layout and used-site subset. Symmetry
/// reduction: sites whose APs hold identical patient counts are
/// interchangeable, so per-class counts occupying the lowest-id sites cover
/// every layout up to symmetry. Deterministic tie-breaking: fewer servers
/// first, then the lexicographically smallest server vector over the
/// ordered site list (which favours the OLT on equal energy).
inline PlacementSolution solve(const MilpModel& model) {
    using namespace placement_detail;
    const Topology& topo = *model.topo;
    const DeviceCatalog& catalog = *model.catalog;
    const SolverTables& t = model.tables;
    const Scenario& sc = model.scenario;

    PlacementSolution sol;
    sol.mode = model.mode;
    sol.pat_max = sc.params.pat_max;

    if (model.mode == Mode::CA) {
        for (const auto& ap : topo.ap_ids) {
            double pats = topo.patients_of(ap);
            if (pats > 0.0) sol.assignment[ap][kCloudSite] = pats;
        }
        sol.cloud_servers =
            static_cast<int>(std::ceil(t.n_patients / sc.params.pat_max));
        for (const auto& ap : topo.ap_ids) {
            double pats = topo.patients_of(ap);
            if (pats <= 0.0) continue;
            Path p = route(topo, ap, topo.content_server_id);
            for (std::size_t li : p.link_indices) {
                const Link& l = topo.links[li];
                sol.link_loads_p1_bps[l.from + "->" + l.to] += pats * sc.rates.r_ps_bps;
            }
        }
        if (t.statically_infeasible ||
            !check_feasibility(topo, sc, sol, catalog).empty()) {
            sol.optimality = Optimality::Infeasible;
            return sol;
        }
        sol.optimality = Optimality::ProvedOptimal;
        sol.objective_j = evaluate(topo, sc, sol, catalog, model.options).total_j;
        return sol;
    }

    if (t.statically_infeasible) {
        sol.optimality = Optimality::Infeasible;
        return sol;
    }

    // Canonical layouts in tie-break preference order.
    std::vector<CanonicalLayout> layouts;
    {
        std::vector<int> counts(t.classes.size(), 0);
        std::function<void(std::size_t)> enumerate = [&](std::size_t c) {
            if (c == t.classes.size()) {
                for (int olt = 0; olt <= t.olt_cap_servers; ++olt) {
                    CanonicalLayout l;
                    l.class_servers = counts;
                    l.olt_servers = olt;
                    layouts.push_back(l);
                }
                return;
            }
            for (int k = 0; k <= static_cast<int>(t.classes[c].site_pos.size()); ++k) {
                counts[c] = k;
                enumerate(c + 1);
            }
            counts[c] = 0;
        };
        enumerate(0);
    }
    std::stable_sort(layouts.begin(), layouts.end(),
                     [&](const CanonicalLayout& a, const CanonicalLayout& b) {
                         if (a.total() != b.total()) return a.total() < b.total();
                         return full_y_vector(t, a) < full_y_vector(t, b);
                     });

    const double theta_min = std::min({t.theta_home, t.theta_olt, t.theta_remote});
    double best_cost = std::numeric_limits<double>::infinity();
    std::optional<CanonicalLayout> best_layout;
    GreedyResult best_res;

    for (const auto& layout : layouts) {
        if (t.pat_max * layout.total() + 1e-9 < t.n_patients) continue;
        double lb = t.constant_j + layout.total() * t.server_idle_j +
                    t.n_patients * theta_min;
        if (lb > best_cost + 1e-9 * std::max(1.0, best_cost)) continue;

        // A placed-but-unused server skips the site's analysed-phase
        // activation, so the per-layout optimum enumerates used subsets.
        std::vector<int> used(t.classes.size(), 0);
        std::function<void(std::size_t)> explore_used = [&](std::size_t c) {
            if (c == t.classes.size()) {
                for (int home_only = 0; home_only <= 1; ++home_only) {
                    GreedyResult r =
                        greedy_assign(t, topo, layout, used, home_only != 0);
                    if (!r.feasible) continue;
                    double cost =
                        r.cost + t.constant_j + layout.total() * t.server_idle_j;
                    double no_export = r.total_export;
                    if (!std::isfinite(best_cost) ||
                        cost < best_cost - 1e-9 * std::max(1.0, std::abs(best_cost))) {
                        best_cost = cost;
                        best_layout = layout;
                        best_res = std::move(r);
                    }
                    if (no_export == 0.0) break; // home_only adds nothing
                }
                return;
            }
            for (int u = layout.class_servers[c]; u >= 0; --u) {
                used[c] = u;
                explore_used(c + 1);
            }
        };
        explore_used(0);
    }

    if (!best_layout) {
        sol.optimality = Optimality::Infeasible;
        return sol;
    }

    std::vector<int> y = full_y_vector(t, *best_layout);
    for (std::size_t pos = 0; pos < t.sites.size(); ++pos)
        if (y[pos] > 0) sol.servers_per_site[t.sites[pos]] = y[pos];
    {
        // Canonical expansion of the winning load vector: home patients
        // first, then the OLT, then foreign sites, donors in AP order.
        std::size_t n = t.sites.size() - 1;
        std::vector<double> remaining(n), budget = t.donor_export_cap;
        for (std::size_t a = 0; a < n; ++a)
            remaining[a] = topo.patients_of(topo.ap_ids[a]);
        for (std::size_t pos = 0; pos < n; ++pos) {
            double x = std::min(remaining[pos], best_res.load[pos]);
            if (x <= 0.0) continue;
            sol.assignment[topo.ap_ids[pos]][t.sites[pos]] = x;
            remaining[pos] -= x;
        }
        double olt_left = best_res.olt_load;
        for (std::size_t a = 0; a < n && olt_left > 0.0; ++a) {
            double x = std::min({remaining[a], olt_left, budget[a]});
            if (x <= 0.0) continue;
            sol.assignment[topo.ap_ids[a]][t.sites.back()] += x;
            remaining[a] -= x;
            budget[a] -= x;
            olt_left -= x;
        }
        for (std::size_t pos = 0; pos < n; ++pos) {
            double remote = best_res.load[pos] - std::min(t.site_patients[pos],
                                                          best_res.load[pos]);
            for (std::size_t a = 0; a < n && remote > 0.0; ++a) {
                if (a == pos) continue;
                double x = std::min({remaining[a], remote, budget[a]});
                if (x <= 0.0) continue;
                sol.assignment[topo.ap_ids[a]][t.sites[pos]] += x;
                remaining[a] -= x;
                budget[a] -= x;
                remote -= x;
            }
        }
    }
    sol.optimality = Optimality::ProvedOptimal;
    sol.objective_j = best_cost;

    for (const auto& [ap, sites_map] : sol.assignment) {
        for (const auto& [site, x] : sites_map) {
            Path p = route(topo, ap, site);
            for (std::size_t li : p.link_indices) {
                const Link& l = topo.links[li];
                sol.link_loads_p1_bps[l.from + "->" + l.to] += x * sc.rates.r_ps_bps;
            }
        }
    }
    std::map<std::string, double> site_load;
    for (const auto& [ap, sites_map] : sol.assignment)
        for (const auto& [site, x] : sites_map) site_load[site] += x;
    for (const auto& [site, load] : site_load) {
        Path p = route(topo, site, topo.cloud_storage_id);
        for (std::size_t li : p.link_indices) {
            const Link& l = topo.links[li];
            sol.link_loads_p2_bps[l.from + "->" + l.to] += load * sc.rates.r_cloud_bps;
        }
    }
    return sol;
}

/// LP text export of the model, re-importable by standard MILP solvers for
/// cross-checking.
inline std::string export_lp(const MilpModel& model) {
    std::ostringstream os;
    auto num = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    os << "\\ fog placement model: mode=" << mode_name(model.mode)
       << " pat_max=" << num(model.scenario.params.pat_max) << "\n";
    os << "Minimize\n obj:";
    bool first = true;
    for (const auto& v : model.vars) {
        if (v.objective == 0.0) continue;
        os << (first ? " " : " + ") << num(v.objective) << " " << v.name;
        first = false;
    }
    if (first) os << " 0 y_none";
    os << "\nSubject To\n";
    for (const auto& row : model.rows) {
        os << " " << row.name << ":";
        bool f = true;
        for (const auto& term : row.terms) {
            double c = term.coeff;
            if (f) {
                os << " " << num(c) << " " << model.vars[term.var].name;
                f = false;
            } else if (c < 0.0) {
                os << " - " << num(-c) << " " << model.vars[term.var].name;
            } else {
                os << " + " << num(c) << " " << model.vars[term.var].name;
            }
        }
        os << (row.sense == '<' ? " <= " : row.sense == '>' ? " >= " : " = ")
           << num(row.rhs) << "\n";
    }
    os << "Bounds\n";
    for (const auto& v : model.vars) {
        if (v.kind == MilpVariable::Kind::Binary) continue;
        os << " " << num(v.lower) << " <= " << v.name << " <= " << num(v.upper) << "\n";
    }
    bool any_general = false, any_binary = false;
    for (const auto& v : model.vars) {
        if (v.kind == MilpVariable::Kind::General) any_general = true;
        if (v.kind == MilpVariable::Kind::Binary) any_binary = true;
    }
    if (any_general) {
        os << "Generals\n";
        for (const auto& v : model.vars)
            if (v.kind == MilpVariable::Kind::General) os << " " << v.name << "\n";
    }
    if (any_binary) {
        os << "Binaries\n";
        for (const auto& v : model.vars)
            if (v.kind == MilpVariable::Kind::Binary) os << " " << v.name << "\n";
    }
    os << "End\n";
    return os.str();
}

} // namespace fogplace
