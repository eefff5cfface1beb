#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fogplace/catalog.hpp"
#include "fogplace/common.hpp"

namespace fogplace {

enum class Layer { AccessPoint, Ont, Olt, Metro, Core, Cloud };

struct Node {
    std::string id;
    std::string device_class;
    Layer layer = Layer::AccessPoint;
};

/// Directed link. The healthcare share of a link defaults to
/// hc_share * capacity; hc_capacity_override_bps pins it instead.
struct Link {
    std::string from;
    std::string to;
    double capacity_bps = 0.0;
    std::optional<double> hc_capacity_override_bps = std::nullopt;
};

/// Ordered node path with the directed links taken.
struct Path {
    std::vector<std::string> node_ids;
    std::vector<std::size_t> link_indices;
};

/// Access tree (one AP per ONT, one OLT) plus the metro/core chain ending
/// in the cloud. Immutable after build_gpon.
struct Topology {
    std::vector<Node> nodes;
    std::vector<Link> links;
    std::vector<std::string> candidate_site_ids; // every ONT, then the OLT
    std::vector<std::string> cloud_node_ids;
    std::map<std::string, double> patients_per_ap;

    std::vector<std::string> ap_ids;   // index order
    std::vector<std::string> ont_ids;  // index order, ont_ids[i] pairs ap_ids[i]
    std::string olt_id;
    std::vector<std::string> chain_ids; // OLT-to-cloud hops in order
    std::string content_server_id;
    std::string cloud_storage_id;

    std::map<std::string, std::size_t> node_index;
    // adjacency[i] = (neighbour node index, directed link index out of i)
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency;
    // parent_of[src][v] = (previous node towards src, directed link into v),
    // precomputed per source so route() is a cheap walk. Immutable after
    // build, so concurrent readers are safe.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> parent_of;

    const Node& node(const std::string& id) const {
        auto it = node_index.find(id);
        if (it == node_index.end())
            throw RoutingError("unknown node: " + id);
        return nodes[it->second];
    }
    bool has_node(const std::string& id) const { return node_index.count(id) != 0; }
    double patients_of(const std::string& ap_id) const {
        auto it = patients_per_ap.find(ap_id);
        return it == patients_per_ap.end() ? 0.0 : it->second;
    }
    /// Home ONT of an AP (same index in the paired vectors).
    const std::string& home_ont(const std::string& ap_id) const {
        for (std::size_t i = 0; i < ap_ids.size(); ++i)
            if (ap_ids[i] == ap_id) return ont_ids[i];
        throw RoutingError("unknown access point: " + ap_id);
    }
};

/// Build parameters for the GPON instance.
struct GponParams {
    int n_aps = 32;
    double n_patients = 200.0;
    bool fractional_patients = false;
    double gpon_trunk_capacity_bps = 2.5e9;
    std::vector<std::string> metro_core_hops = {
        "aggregation switch",
        "aggregation/cloud router",
        "aggregation/cloud router",
        "cloud switch",
    };
    /// Healthcare share of the downstream OLT->ONT direction. Calibrated
    /// default; see README. nullopt falls back to hc_share * capacity.
    std::optional<double> downstream_hc_override_bps = 468750.0;
};

namespace detail {

inline std::string sanitize_id(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else if (!out.empty() && out.back() != '_')
            out.push_back('_');
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

inline void add_bidirectional_link(Topology& t, const std::string& a, const std::string& b,
                                   double capacity_bps,
                                   std::optional<double> hc_fwd = std::nullopt,
                                   std::optional<double> hc_rev = std::nullopt) {
    t.links.push_back(Link{a, b, capacity_bps, hc_fwd});
    t.links.push_back(Link{b, a, capacity_bps, hc_rev});
}

inline void finish_indexes(Topology& t) {
    t.node_index.clear();
    for (std::size_t i = 0; i < t.nodes.size(); ++i)
        t.node_index[t.nodes[i].id] = i;
    t.adjacency.assign(t.nodes.size(), {});
    for (std::size_t l = 0; l < t.links.size(); ++l) {
        auto from = t.node_index.find(t.links[l].from);
        auto to = t.node_index.find(t.links[l].to);
        if (from == t.node_index.end() || to == t.node_index.end())
            throw ConfigError("link references unknown node " + t.links[l].from + "->" +
                              t.links[l].to);
        t.adjacency[from->second].emplace_back(to->second, l);
    }
    t.parent_of.assign(t.nodes.size(), {});
    for (std::size_t src = 0; src < t.nodes.size(); ++src) {
        auto& parent = t.parent_of[src];
        parent.assign(t.nodes.size(), {SIZE_MAX, SIZE_MAX});
        std::vector<bool> seen(t.nodes.size(), false);
        std::deque<std::size_t> queue{src};
        seen[src] = true;
        while (!queue.empty()) {
            std::size_t u = queue.front();
            queue.pop_front();
            for (auto [v, l] : t.adjacency[u]) {
                if (!seen[v]) {
                    seen[v] = true;
                    parent[v] = {u, l};
                    queue.push_back(v);
                }
            }
        }
    }
}

} // namespace detail

/// Builds the device graph: n_aps access points each behind its own ONT,
/// one OLT, then the metro/core hop chain ending at the cloud switch with
/// the content server and cloud storage attached. Patients are spread as
/// evenly as integers allow (lowest AP indices take the remainder), or
/// exactly evenly in fractional mode.
inline Topology build_gpon(const GponParams& params, const DeviceCatalog& catalog) {
    if (params.n_aps <= 0) {
        if (params.n_patients > 0.0)
            throw ConfigError("zero access points cannot serve patients");
        throw ConfigError("topology needs at least one access point");
    }
    if (params.n_patients < 0.0)
        throw ConfigError("negative patient count");
    if (params.metro_core_hops.empty())
        throw ConfigError("metro/core hop chain must not be empty");
    for (const auto& cls : params.metro_core_hops)
        catalog.at(cls); // throws on unknown class

    Topology t;
    const double ap_capacity = catalog.at("access point").capacity.value();
    const double olt_capacity = catalog.at("OLT").capacity.value();
    const double per_ont_trunk = params.gpon_trunk_capacity_bps / params.n_aps;

    for (int i = 0; i < params.n_aps; ++i) {
        std::string ap = "ap" + std::to_string(i);
        std::string ont = "ont" + std::to_string(i);
        t.nodes.push_back(Node{ap, "access point", Layer::AccessPoint});
        t.nodes.push_back(Node{ont, "ONU/ONT", Layer::Ont});
        t.ap_ids.push_back(ap);
        t.ont_ids.push_back(ont);
    }
    t.olt_id = "olt";
    t.nodes.push_back(Node{t.olt_id, "OLT", Layer::Olt});

    // Layers along the chain: core routers are Core, the trailing cloud
    // switch is Cloud together with one aggregation/cloud router directly in
    // front of it (acting in its cloud-router role); the rest is Metro.
    std::vector<Layer> hop_layers(params.metro_core_hops.size(), Layer::Metro);
    for (std::size_t i = 0; i < params.metro_core_hops.size(); ++i)
        if (params.metro_core_hops[i] == "core router") hop_layers[i] = Layer::Core;
    if (!params.metro_core_hops.empty() && params.metro_core_hops.back() == "cloud switch") {
        hop_layers.back() = Layer::Cloud;
        std::size_t n = params.metro_core_hops.size();
        if (n >= 2 && params.metro_core_hops[n - 2] == "aggregation/cloud router")
            hop_layers[n - 2] = Layer::Cloud;
    }
    std::map<std::string, int> occurrence;
    for (std::size_t i = 0; i < params.metro_core_hops.size(); ++i) {
        const std::string& cls = params.metro_core_hops[i];
        std::string id = detail::sanitize_id(cls) + std::to_string(occurrence[cls]++);
        t.nodes.push_back(Node{id, cls, hop_layers[i]});
        t.chain_ids.push_back(id);
    }
    t.content_server_id = "content_server";
    t.cloud_storage_id = "cloud_storage";
    t.nodes.push_back(Node{t.content_server_id, "content server", Layer::Cloud});
    t.nodes.push_back(Node{t.cloud_storage_id, "cloud storage", Layer::Cloud});

    for (int i = 0; i < params.n_aps; ++i) {
        detail::add_bidirectional_link(t, t.ap_ids[i], t.ont_ids[i], ap_capacity);
        // Upstream ONT->OLT takes the even trunk split; the downstream
        // healthcare share is pinned by the configured override.
        detail::add_bidirectional_link(t, t.ont_ids[i], t.olt_id, per_ont_trunk,
                                       std::nullopt, params.downstream_hc_override_bps);
    }
    double prev_cap = olt_capacity;
    std::string prev = t.olt_id;
    for (std::size_t i = 0; i < t.chain_ids.size(); ++i) {
        double hop_cap = catalog.at(params.metro_core_hops[i]).capacity.value();
        detail::add_bidirectional_link(t, prev, t.chain_ids[i], std::min(prev_cap, hop_cap));
        prev = t.chain_ids[i];
        prev_cap = hop_cap;
    }
    double content_cap = catalog.at("content server").capacity.value();
    detail::add_bidirectional_link(t, prev, t.content_server_id,
                                   std::min(prev_cap, content_cap));
    // Storage capacity is a volume, not a rate; the link takes the switch side.
    detail::add_bidirectional_link(t, prev, t.cloud_storage_id, prev_cap);

    t.candidate_site_ids = t.ont_ids;
    t.candidate_site_ids.push_back(t.olt_id);
    for (const auto& n : t.nodes)
        if (n.layer == Layer::Cloud) t.cloud_node_ids.push_back(n.id);

    if (params.fractional_patients) {
        double each = params.n_patients / params.n_aps;
        for (const auto& ap : t.ap_ids) t.patients_per_ap[ap] = each;
    } else {
        double rounded = std::round(params.n_patients);
        if (std::abs(rounded - params.n_patients) > 1e-9)
            throw ConfigError("n_patients must be an integer unless fractional_patients is set");
        long long total = static_cast<long long>(rounded);
        long long base = total / params.n_aps;
        long long rem = total % params.n_aps;
        for (int i = 0; i < params.n_aps; ++i)
            t.patients_per_ap[t.ap_ids[i]] = static_cast<double>(base + (i < rem ? 1 : 0));
    }

    detail::finish_indexes(t);
    return t;
}

/// Unique simple path between two nodes of the tree. Deterministic, and
/// route(a,b) is route(b,a) reversed.
inline Path route(const Topology& topo, const std::string& src, const std::string& dst) {
    auto s = topo.node_index.find(src);
    auto d = topo.node_index.find(dst);
    if (s == topo.node_index.end())
        throw RoutingError("unknown node: " + src);
    if (d == topo.node_index.end())
        throw RoutingError("unknown node: " + dst);

    const auto& parent = topo.parent_of[s->second];
    if (s->second != d->second && parent[d->second].first == SIZE_MAX)
        throw RoutingError("no route between " + src + " and " + dst);

    Path path;
    std::size_t cur = d->second;
    while (cur != s->second) {
        path.node_ids.push_back(topo.nodes[cur].id);
        path.link_indices.push_back(parent[cur].second);
        cur = parent[cur].first;
    }
    path.node_ids.push_back(topo.nodes[cur].id);
    std::reverse(path.node_ids.begin(), path.node_ids.end());
    std::reverse(path.link_indices.begin(), path.link_indices.end());
    return path;
}

/// Healthcare share of a link's capacity.
inline double link_hc_capacity(const Link& link, const DeviceCatalog& catalog) {
    if (link.hc_capacity_override_bps)
        return *link.hc_capacity_override_bps;
    return catalog.hc_share * link.capacity_bps;
}

/// Candidate server sites: every ONT in index order, then the OLT.
inline const std::vector<std::string>& candidate_sites(const Topology& topo) {
    return topo.candidate_site_ids;
}

} // namespace fogplace
