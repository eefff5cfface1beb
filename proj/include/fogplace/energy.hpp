#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fogplace/catalog.hpp"
#include "fogplace/common.hpp"
#include "fogplace/placement_types.hpp"
#include "fogplace/scenario.hpp"
#include "fogplace/topology.hpp"

namespace fogplace {

enum class FlowPhase { RawUpload, AnalysedUpload, CloudRawUpload };

/// One aggregated traffic stream through the network during one phase.
struct PhaseFlow {
    Path path;
    double per_patient_rate_bps = 0.0;
    double n_patients = 0.0;
    double duration_s = 0.0;
    FlowPhase phase = FlowPhase::RawUpload;

    double aggregate_rate_bps() const { return per_patient_rate_bps * n_patients; }
};

/// Attributable energy of a placement, by device class and split into the
/// networking and processing shares.
struct EnergyBreakdown {
    std::map<std::string, double> per_device_class_j;
    double network_j = 0.0;
    double processing_j = 0.0;
    double total_j = 0.0;
};

/// Evaluation knobs that are deliberate reconstruction choices; all of them
/// are reachable from the CLI config.
struct EnergyOptions {
    enum class ServerIdleWindow { TTotal, Round30Min, TTotalPlusTCloud };
    ServerIdleWindow server_idle_window = ServerIdleWindow::TTotal;
    /// With binaries disabled, every shared device is idle-charged in every
    /// phase whether or not it carries healthcare traffic.
    bool activation_binaries = true;
    /// Device class and idle attribution of the cloud processing instances
    /// used by CA.
    std::string ca_device_class = "processing server";
    bool ca_dedicated_idle = true;
};

namespace energy_detail {

/// Load-proportional energy coefficient, joules per bit carried.
inline double prop_joules_per_bit(const DeviceSpec& spec) {
    if (!spec.capacity)
        throw ConfigError("device " + spec.name + " has no capacity for flow accounting");
    return (1.0 - spec.idle_fraction) * spec.p_max_w / *spec.capacity;
}

/// Healthcare share of a device's idle power, watts.
inline double idle_share_watts(const DeviceSpec& spec, double hc_share) {
    return hc_share * spec.idle_fraction * spec.p_max_w;
}

inline double server_idle_window_s(const EnergyOptions& opt, const Scenario& sc,
                                   double transport_s) {
    switch (opt.server_idle_window) {
        case EnergyOptions::ServerIdleWindow::TTotal: return sc.params.t_total_s;
        case EnergyOptions::ServerIdleWindow::Round30Min: return 1800.0;
        case EnergyOptions::ServerIdleWindow::TTotalPlusTCloud:
            return sc.params.t_total_s + transport_s;
    }
    throw InternalError("unhandled idle window policy");
}

} // namespace energy_detail

/// Energy attributed to each shared device traversed by one flow: the
/// healthcare share of its idle power for the phase duration plus the
/// load-proportional part at rate/capacity utilisation. Dedicated-server
/// nodes on the path (the compute endpoint) are skipped; their energy is
/// processing_energy's job. Storage utilisation is volume stored over
/// volume capacity.
inline std::map<std::string, double> flow_energy(const Topology& topo, const PhaseFlow& flow,
                                                 const DeviceCatalog& catalog) {
    std::map<std::string, double> joules;
    for (const auto& node_id : flow.path.node_ids) {
        const DeviceSpec& spec = catalog.at(topo.node(node_id).device_class);
        if (spec.sharing == SharingMode::DedicatedServer) continue;
        if (!spec.capacity)
            throw ConfigError("device " + spec.name + " has no capacity for flow accounting");
        double util = spec.name == "cloud storage"
                          ? flow.aggregate_rate_bps() * flow.duration_s / *spec.capacity
                          : flow.aggregate_rate_bps() / *spec.capacity;
        joules[node_id] = attributable_power(spec, util, catalog.hc_share) * flow.duration_s;
    }
    return joules;
}

/// Energy of one processing server over a monitoring round: the idle floor
/// for the whole window plus full-power processing of each assigned patient
/// in turn.
inline double processing_energy(const DeviceSpec& server, double n_assigned,
                                double unit_pa_time_s, double idle_window_s,
                                double idle_share = 1.0) {
    if (n_assigned < 0.0)
        throw std::domain_error("negative patient count");
    double busy = n_assigned * unit_pa_time_s;
    if (busy > idle_window_s + 1e-9)
        throw InfeasibleError("processing schedule does not fit the idle window");
    return idle_share * server.idle_fraction * server.p_max_w * idle_window_s +
           (1.0 - server.idle_fraction) * server.p_max_w * busy;
}

namespace energy_detail {

struct PhaseAccumulator {
    // node id -> aggregate healthcare rate through it during this phase
    std::map<std::string, double> rate_bps;
    double duration_s = 0.0;

    void add_path(const Topology& topo, const DeviceCatalog& catalog, const Path& path,
                  double rate) {
        for (const auto& node_id : path.node_ids) {
            const DeviceSpec& spec = catalog.at(topo.node(node_id).device_class);
            if (spec.sharing == SharingMode::DedicatedServer) continue;
            rate_bps[node_id] += rate;
        }
    }

    /// Folds the phase into the breakdown. Idle is charged once per device;
    /// utilisation uses the device's own capacity.
    void commit(const Topology& topo, const DeviceCatalog& catalog, bool charge_all_idle,
                EnergyBreakdown& out) const {
        if (duration_s <= 0.0) return;
        std::map<std::string, double> rates = rate_bps;
        if (charge_all_idle) {
            for (const auto& node : topo.nodes) {
                const DeviceSpec& spec = catalog.at(node.device_class);
                if (spec.sharing == SharingMode::SharedNetwork)
                    rates.emplace(node.id, 0.0);
            }
        }
        for (const auto& [node_id, rate] : rates) {
            const DeviceSpec& spec = catalog.at(topo.node(node_id).device_class);
            if (!spec.capacity)
                throw ConfigError("device " + spec.name + " has no capacity for flow accounting");
            double util = spec.name == "cloud storage"
                              ? rate * duration_s / *spec.capacity
                              : rate / *spec.capacity;
            double joules = attributable_power(spec, util, catalog.hc_share) * duration_s;
            out.per_device_class_j[spec.name] += joules;
            out.network_j += joules;
        }
    }
};

inline void add_processing(const DeviceSpec& server, int servers, double load,
                           double pat_max, double unit_pa_s, double window_s,
                           double idle_share, EnergyBreakdown& out) {
    // Canonical within-site split: fill servers to pat_max in order. The
    // total is independent of the split; the split only feeds the
    // per-server schedule check inside processing_energy.
    double remaining = load;
    for (int k = 0; k < servers; ++k) {
        double share = std::min(pat_max, remaining);
        remaining -= share;
        double joules = processing_energy(server, share, unit_pa_s, window_s, idle_share);
        out.per_device_class_j[server.name] += joules;
        out.processing_j += joules;
    }
    if (remaining > 1e-9) {
        // Overloaded site: feasibility is check_feasibility's concern, but
        // the busy energy of the surplus patients is still attributable.
        double joules = (1.0 - server.idle_fraction) * server.p_max_w * remaining * unit_pa_s;
        out.per_device_class_j[server.name] += joules;
        out.processing_j += joules;
    }
}

} // namespace energy_detail

/// Total attributable energy of a placement.
///
/// Fog modes charge the raw upload (AP to assigned site, t_t), the analysed
/// upload (site to cloud storage, t_cloud) and the servers' rounds. CA
/// charges the raw upload end to end (AP to the cloud), dedicated cloud
/// instances capped at pat_max patients each, and the storage write inside
/// the cloud at the local link's healthcare share.
inline EnergyBreakdown evaluate(const Topology& topo, const Scenario& scenario,
                                const PlacementSolution& placement,
                                const DeviceCatalog& catalog,
                                const EnergyOptions& options = {}) {
    using namespace energy_detail;

    for (const auto& [ap, expected] : topo.patients_per_ap) {
        double assigned = 0.0;
        auto it = placement.assignment.find(ap);
        if (it != placement.assignment.end())
            for (const auto& [site, x] : it->second) assigned += x;
        if (std::abs(assigned - expected) > 1e-9)
            throw InfeasibleError("placement leaves patients of " + ap + " unassigned");
    }

    EnergyBreakdown out;
    const double r_ps = scenario.rates.r_ps_bps;
    const double r_cloud = scenario.rates.r_cloud_bps;
    const double unit_pa = scenario.params.unit_pa_time_s;

    if (placement.mode == Mode::CA) {
        double total_patients = 0.0;
        PhaseAccumulator raw;
        raw.duration_s = scenario.timing.t_t_s;
        for (const auto& [ap, sites] : placement.assignment) {
            double n = 0.0;
            for (const auto& [site, x] : sites) n += x;
            if (n <= 0.0) continue;
            total_patients += n;
            raw.add_path(topo, catalog, route(topo, ap, topo.content_server_id), n * r_ps);
        }
        raw.commit(topo, catalog, !options.activation_binaries, out);

        // Storage write stays inside the cloud; the whole analysed volume
        // moves at the local link's healthcare share.
        double volume_bits = total_patients * scenario.params.processed_bits;
        const std::string& cloud_hop = topo.chain_ids.empty() ? topo.olt_id
                                                              : topo.chain_ids.back();
        double write_share = 0.0;
        for (const auto& link : topo.links)
            if (link.from == cloud_hop && link.to == topo.cloud_storage_id)
                write_share = link_hc_capacity(link, catalog);
        double write_s = write_share > 0.0 ? volume_bits / write_share : 0.0;
        PhaseAccumulator write;
        write.duration_s = write_s;
        if (volume_bits > 0.0)
            write.add_path(topo, catalog, route(topo, cloud_hop, topo.cloud_storage_id),
                           write_share);
        write.commit(topo, catalog, !options.activation_binaries, out);

        const DeviceSpec& instance = catalog.at(options.ca_device_class);
        double idle_share = options.ca_dedicated_idle ? 1.0 : catalog.hc_share;
        double window = server_idle_window_s(options, scenario, write_s);
        add_processing(instance, placement.cloud_servers, total_patients,
                       scenario.params.pat_max, unit_pa, window, idle_share, out);
    } else {
        PhaseAccumulator raw;
        raw.duration_s = scenario.timing.t_t_s;
        std::map<std::string, double> site_load;
        for (const auto& [ap, sites] : placement.assignment) {
            for (const auto& [site, x] : sites) {
                if (x <= 0.0) continue;
                raw.add_path(topo, catalog, route(topo, ap, site), x * r_ps);
                site_load[site] += x;
            }
        }
        raw.commit(topo, catalog, !options.activation_binaries, out);

        PhaseAccumulator analysed;
        analysed.duration_s = scenario.timing.t_cloud_s;
        for (const auto& [site, load] : site_load) {
            if (load <= 0.0) continue;
            analysed.add_path(topo, catalog, route(topo, site, topo.cloud_storage_id),
                              load * r_cloud);
        }
        analysed.commit(topo, catalog, !options.activation_binaries, out);

        const DeviceSpec& server = catalog.at("processing server");
        double window = server_idle_window_s(options, scenario, scenario.timing.t_cloud_s);
        for (const auto& [site, servers] : placement.servers_per_site) {
            if (servers <= 0 && site_load.find(site) == site_load.end()) continue;
            add_processing(server, servers, site_load.count(site) ? site_load[site] : 0.0,
                           scenario.params.pat_max, unit_pa, window, 1.0, out);
        }
    }

    out.total_j = out.network_j + out.processing_j;
    return out;
}

} // namespace fogplace
