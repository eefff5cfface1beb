#pragma once

#include <limits>
#include <map>
#include <string>

#include "fogplace/common.hpp"

namespace fogplace {

/// Placement regimes: SFA caps every site at one server, MFA leaves the OLT
/// uncapped (one per ONT), CA puts no servers at the edge at all.
enum class Mode { SFA, MFA, CA };

inline const char* mode_name(Mode m) {
    switch (m) {
        case Mode::SFA: return "SFA";
        case Mode::MFA: return "MFA";
        case Mode::CA: return "CA";
    }
    throw InternalError("unhandled mode");
}

inline Mode parse_mode(const std::string& s) {
    if (s == "SFA" || s == "sfa") return Mode::SFA;
    if (s == "MFA" || s == "mfa") return Mode::MFA;
    if (s == "CA" || s == "ca") return Mode::CA;
    throw ConfigError("unknown mode: " + s + " (expected SFA, MFA or CA)");
}

enum class Optimality { ProvedOptimal, Feasible, Infeasible };

inline const char* optimality_name(Optimality o) {
    switch (o) {
        case Optimality::ProvedOptimal: return "proved_optimal";
        case Optimality::Feasible: return "feasible";
        case Optimality::Infeasible: return "infeasible";
    }
    throw InternalError("unhandled optimality");
}

/// Pseudo-site used in CA assignments.
inline const std::string kCloudSite = "cloud";

/// Server counts per site plus the patient-group assignment and per-link
/// loads realised by it.
struct PlacementSolution {
    Mode mode = Mode::SFA;
    double pat_max = 0.0;
    std::map<std::string, int> servers_per_site;
    int cloud_servers = 0; // CA instances; always 0 in fog modes
    // AP id -> site id -> patients of that AP served at that site. CA
    // assigns everything to the "cloud" pseudo-site.
    std::map<std::string, std::map<std::string, double>> assignment;
    double objective_j = std::numeric_limits<double>::quiet_NaN();
    Optimality optimality = Optimality::Feasible;
    std::map<std::string, double> link_loads_p1_bps; // "from->to" -> bps
    std::map<std::string, double> link_loads_p2_bps;

    int total_servers() const {
        int n = 0;
        for (const auto& [site, count] : servers_per_site) n += count;
        return n;
    }
    double site_load(const std::string& site) const {
        double load = 0.0;
        for (const auto& [ap, sites] : assignment) {
            auto it = sites.find(site);
            if (it != sites.end()) load += it->second;
        }
        return load;
    }
};

} // namespace fogplace
