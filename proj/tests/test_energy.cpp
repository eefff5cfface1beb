#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fogplace/energy.hpp"
#include "fogplace/placement_types.hpp"

using namespace fogplace;

namespace {

constexpr double kUplinkShare = 0.003 * 2.5e9 / 32.0;

struct Fixture {
    DeviceCatalog cat = default_catalog();
    Topology topo = build_gpon(GponParams{}, cat);
    Scenario s1 = make_scenario(ScenarioParams{}.with_pat_max(50), kUplinkShare);
};

PlacementSolution all_at_olt(const Topology& topo, double pat_max) {
    PlacementSolution p;
    p.mode = Mode::MFA;
    p.pat_max = pat_max;
    double total = 0.0;
    for (const auto& ap : topo.ap_ids) {
        double pats = topo.patients_of(ap);
        if (pats > 0.0) p.assignment[ap][topo.olt_id] = pats;
        total += pats;
    }
    p.servers_per_site[topo.olt_id] = static_cast<int>(std::ceil(total / pat_max));
    return p;
}

} // namespace

TEST_CASE("flow energy of a single-device path") {
    Fixture f;
    PhaseFlow flow;
    flow.path.node_ids = {"ap0"};
    flow.per_patient_rate_bps = f.s1.rates.r_ps_bps; // 8180.48...
    flow.n_patients = 1;
    flow.duration_s = f.s1.timing.t_t_s; // 234.705
    flow.phase = FlowPhase::RawUpload;

    auto joules = flow_energy(f.topo, flow, f.cat);
    REQUIRE(joules.count("ap0") == 1);
    // Two-part check against direct arithmetic:
    //   proportional = 0.1 * 21 * (r/0.3e9) * 234.705 ~= 0.01344 J
    //   idle         = 0.003 * 0.9 * 21 * 234.705    ~= 13.3078 J
    double prop = 0.1 * 21.0 * (flow.per_patient_rate_bps / 0.3e9) * 234.705;
    double idle = 0.003 * 0.9 * 21.0 * 234.705;
    CHECK(prop == Catch::Approx(0.01344).margin(2e-5));
    CHECK(joules["ap0"] == Catch::Approx(idle + prop).epsilon(1e-12));
}

TEST_CASE("zero patients leaves only the idle term of a declared flow") {
    Fixture f;
    PhaseFlow flow;
    flow.path.node_ids = {"olt"};
    flow.per_patient_rate_bps = 1000.0;
    flow.n_patients = 0;
    flow.duration_s = 10.0;
    auto joules = flow_energy(f.topo, flow, f.cat);
    CHECK(joules["olt"] == Catch::Approx(0.003 * 0.9 * 20.0 * 10.0).epsilon(1e-12));
}

TEST_CASE("doubling patients doubles only the proportional part") {
    Fixture f;
    PhaseFlow one;
    one.path.node_ids = {"ap0"};
    one.per_patient_rate_bps = 8000.0;
    one.n_patients = 1;
    one.duration_s = 100.0;
    PhaseFlow two = one;
    two.n_patients = 2;
    double idle = 0.003 * 0.9 * 21.0 * 100.0;
    double e1 = flow_energy(f.topo, one, f.cat)["ap0"] - idle;
    double e2 = flow_energy(f.topo, two, f.cat)["ap0"] - idle;
    CHECK(e2 == Catch::Approx(2.0 * e1).epsilon(1e-12));
}

TEST_CASE("flow over a device without capacity is a configuration error") {
    Fixture f;
    DeviceCatalog broken = f.cat;
    broken.entries["OLT"].capacity = std::nullopt;
    PhaseFlow flow;
    flow.path.node_ids = {"olt"};
    flow.per_patient_rate_bps = 1.0;
    flow.n_patients = 1;
    flow.duration_s = 1.0;
    CHECK_THROWS_AS(flow_energy(f.topo, flow, broken), ConfigError);
}

TEST_CASE("processing server round energy") {
    DeviceCatalog cat = default_catalog();
    const DeviceSpec& ps = cat.at("processing server");

    // 50 patients at 105.9 ms each inside a 240 s round:
    //   0.54*3.96*240 + 0.46*3.96*(50*0.1059) = 513.216 + 9.645372
    CHECK(processing_energy(ps, 50, 0.1059, 240.0) ==
          Catch::Approx(522.861372).margin(1e-9));
    // Idle-only round.
    CHECK(processing_energy(ps, 0, 0.1059, 240.0) == Catch::Approx(513.216).margin(1e-9));
    // Busy for the whole window costs p_max * window.
    CHECK(processing_energy(ps, 10, 1.0, 10.0) == Catch::Approx(39.6).margin(1e-9));
    // A schedule that does not fit is rejected.
    CHECK_THROWS_AS(processing_energy(ps, 10, 1.0, 9.0), InfeasibleError);
}

TEST_CASE("evaluate rejects incomplete assignments") {
    Fixture f;
    PlacementSolution p = all_at_olt(f.topo, 50);
    p.assignment["ap5"][f.topo.olt_id] -= 1.0;
    CHECK_THROWS_AS(evaluate(f.topo, f.s1, p, f.cat), InfeasibleError);
}

TEST_CASE("breakdown identity and non-negativity") {
    Fixture f;
    PlacementSolution p = all_at_olt(f.topo, 50);
    EnergyBreakdown e = evaluate(f.topo, f.s1, p, f.cat);
    CHECK(e.total_j == e.network_j + e.processing_j);
    double sum = 0.0;
    for (const auto& [cls, j] : e.per_device_class_j) {
        CHECK(j >= 0.0);
        sum += j;
    }
    CHECK(sum == Catch::Approx(e.total_j).epsilon(1e-12));
}

TEST_CASE("all-at-OLT raw phase uses three-node paths") {
    // With every patient at the OLT, phase 1 touches exactly the APs, the
    // ONTs and the OLT; the chain classes only carry the analysed phase.
    Fixture f;
    Scenario s4 = make_scenario(ScenarioParams{}.with_pat_max(200), kUplinkShare);
    PlacementSolution p = all_at_olt(f.topo, 200);

    Scenario no_p2 = s4;
    no_p2.params.processed_bits = 0.0;
    no_p2.timing.t_cloud_s = 0.0;
    EnergyBreakdown e = evaluate(f.topo, no_p2, p, f.cat);
    CHECK(e.per_device_class_j.count("aggregation switch") == 0);
    CHECK(e.per_device_class_j.count("cloud storage") == 0);
    CHECK(e.per_device_class_j.at("access point") > 0.0);
    CHECK(e.per_device_class_j.at("ONU/ONT") > 0.0);
    CHECK(e.per_device_class_j.at("OLT") > 0.0);
}

TEST_CASE("additivity on a two-AP instance against hand arithmetic") {
    DeviceCatalog cat = default_catalog();
    GponParams gp;
    gp.n_aps = 2;
    gp.n_patients = 2;
    Topology topo = build_gpon(gp, cat);
    double share = 0.003 * gp.gpon_trunk_capacity_bps / 2.0;
    Scenario sc = make_scenario(ScenarioParams{}.with_pat_max(2), share);

    PlacementSolution p;
    p.mode = Mode::MFA;
    p.pat_max = 2;
    p.assignment["ap0"][topo.olt_id] = 1.0;
    p.assignment["ap1"][topo.olt_id] = 1.0;
    p.servers_per_site[topo.olt_id] = 1;

    EnergyBreakdown e = evaluate(topo, sc, p, cat);

    // Every charged device, written out longhand.
    double t_t = sc.timing.t_t_s, t_cl = sc.timing.t_cloud_s;
    double r = sc.rates.r_ps_bps, rc = sc.rates.r_cloud_bps;
    auto dev = [&](double p_max, double cap, double rate, double dur) {
        return 0.003 * 0.9 * p_max * dur + 0.1 * p_max * (rate / cap) * dur;
    };
    double expect = 0.0;
    expect += 2.0 * dev(21.0, 0.3e9, r, t_t);     // ap0, ap1
    expect += 2.0 * dev(8.0, 3.75e9, r, t_t);     // ont0, ont1
    expect += dev(20.0, 128e9, 2.0 * r, t_t);     // olt, both flows accumulated
    expect += dev(20.0, 128e9, 2.0 * rc, t_cl);   // olt again in the analysed phase
    for (const auto& hop : topo.chain_ids) {
        const DeviceSpec& spec = cat.at(topo.node(hop).device_class);
        expect += dev(spec.p_max_w, spec.capacity.value(), 2.0 * rc, t_cl);
    }
    double stored = 2.0 * rc * t_cl;
    expect += 0.003 * 0.9 * 4900.0 * t_cl +
              0.1 * 4900.0 * (stored / (75.6e12 * 8.0)) * t_cl; // storage
    expect += 0.54 * 3.96 * 240.0 + 0.46 * 3.96 * (2.0 * 0.1059); // one server

    CHECK(e.total_j == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("scaling every p_max scales the total exactly") {
    Fixture f;
    PlacementSolution p = all_at_olt(f.topo, 50);
    EnergyBreakdown base = evaluate(f.topo, f.s1, p, f.cat);

    DeviceCatalog scaled = f.cat;
    for (auto& [cls, spec] : scaled.entries) spec.p_max_w *= 3.0;
    EnergyBreakdown big = evaluate(f.topo, f.s1, p, scaled);
    CHECK(big.total_j == Catch::Approx(3.0 * base.total_j).epsilon(1e-12));
}

TEST_CASE("zeroing processed bits removes only analysed-phase network energy") {
    Fixture f;
    PlacementSolution p = all_at_olt(f.topo, 50);
    EnergyBreakdown base = evaluate(f.topo, f.s1, p, f.cat);

    Scenario cut = f.s1;
    cut.params.processed_bits = 0.0;
    cut.timing.t_cloud_s = 0.0;
    EnergyBreakdown trimmed = evaluate(f.topo, cut, p, f.cat);
    CHECK(trimmed.processing_j == Catch::Approx(base.processing_j).epsilon(1e-12));
    CHECK(trimmed.network_j < base.network_j);
    // What remains is exactly the raw-upload phase.
    CHECK(trimmed.per_device_class_j.count("cloud storage") == 0);
}

TEST_CASE("CA evaluation charges the end-to-end upload and cloud instances") {
    Fixture f;
    PlacementSolution ca;
    ca.mode = Mode::CA;
    ca.pat_max = 50;
    for (const auto& ap : f.topo.ap_ids)
        ca.assignment[ap][kCloudSite] = f.topo.patients_of(ap);
    ca.cloud_servers = 4; // ceil(200/50)

    EnergyBreakdown e = evaluate(f.topo, f.s1, ca, f.cat);
    // The raw upload crosses the whole chain.
    CHECK(e.per_device_class_j.at("aggregation switch") > 0.0);
    // Dedicated instances: 4 idle floors plus the busy time of 200 patients.
    double proc = 4.0 * 0.54 * 3.96 * 240.0 + 0.46 * 3.96 * 200.0 * 0.1059;
    CHECK(e.processing_j == Catch::Approx(proc).epsilon(1e-9));
    // The content server is the compute endpoint, not a network hop.
    CHECK(e.per_device_class_j.count("content server") == 0);
}

TEST_CASE("disabled activation binaries charge idle unconditionally") {
    Fixture f;
    PlacementSolution p = all_at_olt(f.topo, 50);
    EnergyOptions opt;
    opt.activation_binaries = false;
    EnergyBreakdown e = evaluate(f.topo, f.s1, p, f.cat, opt);
    EnergyBreakdown base = evaluate(f.topo, f.s1, p, f.cat);
    // The unconditional variant charges strictly more idle: every shared
    // device is billed in both phases whether or not it carries traffic.
    CHECK(e.total_j > base.total_j);
    // Dedicated compute devices still stay out of the network charge.
    CHECK(e.per_device_class_j.count("content server") == 0);
}
