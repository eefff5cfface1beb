#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fogplace/common.hpp"

namespace fogplace {

/// How a device's idle power is attributed to the healthcare application.
/// Shared network gear carries many applications, so only the application's
/// capacity share of the idle floor is billed. A dedicated server bills its
/// whole idle floor.
enum class SharingMode { SharedNetwork, DedicatedServer };

/// One device class: maximum power, capacity and the two-part power profile.
///
/// `capacity` is bits per second for network devices and bits for the cloud
/// storage array. The processing server has no capacity entry; its limit is
/// the per-server patient cap of the scenario.
struct DeviceSpec {
    std::string name;
    double p_max_w = 0.0;
    std::optional<double> capacity = std::nullopt;
    double idle_fraction = 0.9;
    SharingMode sharing = SharingMode::SharedNetwork;
};

/// Device classes required in every catalog.
inline const std::vector<std::string>& required_device_classes() {
    static const std::vector<std::string> classes = {
        "access point",
        "ONU/ONT",
        "OLT",
        "aggregation switch",
        "processing server",
        "cloud switch",
        "cloud storage",
        "core router",
        "content server",
        "aggregation/cloud router",
    };
    return classes;
}

/// Device catalog plus the fraction of shared capacity (and shared idle
/// power) dedicated to the healthcare application.
struct DeviceCatalog {
    std::map<std::string, DeviceSpec> entries;
    double hc_share = 0.003;

    const DeviceSpec& at(const std::string& cls) const {
        auto it = entries.find(cls);
        if (it == entries.end())
            throw ConfigError("unknown device class: " + cls);
        return it->second;
    }
    bool contains(const std::string& cls) const { return entries.count(cls) != 0; }
};

/// Catalog with the default power and capacity figures for all ten device
/// classes. Network gear idles at 90% of maximum power, servers at 54%.
inline DeviceCatalog default_catalog() {
    auto net = [](std::string name, double p_w, double cap_bps) {
        return DeviceSpec{std::move(name), p_w, cap_bps, 0.9, SharingMode::SharedNetwork};
    };
    DeviceCatalog cat;
    cat.hc_share = 0.003;
    cat.entries["access point"]      = net("access point", 21.0, 0.3e9);
    cat.entries["ONU/ONT"]           = net("ONU/ONT", 8.0, 3.75e9);
    cat.entries["OLT"]               = net("OLT", 20.0, 128e9);
    cat.entries["aggregation switch"] = net("aggregation switch", 1766.0, 256e9);
    cat.entries["cloud switch"]      = net("cloud switch", 2020.0, 320e9);
    cat.entries["core router"]       = net("core router", 12300.0, 4480e9);
    cat.entries["aggregation/cloud router"] = net("aggregation/cloud router", 4550.0, 560e9);
    // Storage capacity is 75.6 TB expressed in bits; utilisation is volume
    // stored over capacity, not a rate.
    cat.entries["cloud storage"] = net("cloud storage", 4900.0, 75.6e12 * 8.0);
    cat.entries["processing server"] =
        DeviceSpec{"processing server", 3.96, std::nullopt, 0.54, SharingMode::DedicatedServer};
    cat.entries["content server"] =
        DeviceSpec{"content server", 380.8, 1.8e9, 0.54, SharingMode::DedicatedServer};
    return cat;
}

/// Attributable power of one device at the given utilisation.
///
/// Two-part profile: an idle floor scaled by the caller's idle share plus a
/// load-proportional term up to maximum power,
///
///   p = idle_share * idle_fraction * p_max
///       + (1 - idle_fraction) * p_max * utilization.
///
/// Shared network devices pass idle_share = catalog hc_share; dedicated
/// servers pass idle_share = 1.
inline double attributable_power(const DeviceSpec& spec, double utilization,
                                 double idle_share) {
    if (!(utilization >= 0.0 && utilization <= 1.0))
        throw std::domain_error("utilization outside [0,1] for device " + spec.name);
    if (!(idle_share >= 0.0 && idle_share <= 1.0))
        throw std::domain_error("idle_share outside [0,1] for device " + spec.name);
    return idle_share * spec.idle_fraction * spec.p_max_w +
           (1.0 - spec.idle_fraction) * spec.p_max_w * utilization;
}

/// One catalog validation finding.
struct CatalogIssue {
    std::string device_class;
    std::string rule;
    std::string message;
};

/// Checks every catalog invariant. Empty result means the catalog is valid.
inline std::vector<CatalogIssue> validate_catalog(const DeviceCatalog& catalog) {
    std::vector<CatalogIssue> issues;
    for (const auto& cls : required_device_classes()) {
        if (!catalog.contains(cls))
            issues.push_back({cls, "required class present", "missing device class: " + cls});
    }
    for (const auto& [cls, spec] : catalog.entries) {
        if (!(spec.p_max_w > 0.0))
            issues.push_back({cls, "p_max > 0", cls + " has non-positive maximum power"});
        if (!(spec.idle_fraction >= 0.0 && spec.idle_fraction <= 1.0))
            issues.push_back({cls, "0 <= idle_fraction <= 1",
                              cls + " idle fraction out of range"});
        if (spec.capacity && !(*spec.capacity > 0.0))
            issues.push_back({cls, "capacity > 0", cls + " has non-positive capacity"});
    }
    if (!(catalog.hc_share > 0.0 && catalog.hc_share <= 1.0))
        issues.push_back({"", "0 < hc_share <= 1", "healthcare share out of range"});
    return issues;
}

} // namespace fogplace
