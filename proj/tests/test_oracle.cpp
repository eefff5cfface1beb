#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fogplace/oracle.hpp"
#include "fogplace/report.hpp"

using namespace fogplace;

namespace {
constexpr double kUplinkShare = 0.003 * 2.5e9 / 32.0;
}

TEST_CASE("oracle matches the solver on the default S4 instance") {
    DeviceCatalog cat = default_catalog();
    Topology topo = build_gpon(GponParams{}, cat);
    Scenario sc = make_scenario(ScenarioParams{}.with_pat_max(200), kUplinkShare);

    for (Mode mode : {Mode::SFA, Mode::MFA}) {
        PlacementSolution want = enumerate_optimal(topo, sc, mode, cat);
        PlacementSolution got = solve(formulate(topo, sc, mode, cat));
        REQUIRE(want.optimality == Optimality::ProvedOptimal);
        CHECK(got.servers_per_site == want.servers_per_site);
        CHECK(got.assignment == want.assignment);
        CHECK(std::abs(got.objective_j - want.objective_j) <=
              1e-9 * std::max(1.0, want.objective_j));
    }
}

TEST_CASE("two APs, four patients: oracle equals hand enumeration") {
    DeviceCatalog cat = default_catalog();
    GponParams gp;
    gp.n_aps = 2;
    gp.n_patients = 4;
    Topology topo = build_gpon(gp, cat);
    double share = 0.003 * gp.gpon_trunk_capacity_bps / 2.0;
    Scenario sc = make_scenario(ScenarioParams{}.with_pat_max(2), share);

    // With pat_max 2 and 4 patients, two servers must open. Enumerate the
    // sensible two-server placements by hand and score them via evaluate().
    auto score = [&](PlacementSolution p) {
        p.mode = Mode::SFA;
        p.pat_max = 2;
        return evaluate(topo, sc, p, cat).total_j;
    };
    PlacementSolution both_home;
    both_home.servers_per_site = {{"ont0", 1}, {"ont1", 1}};
    both_home.assignment = {{"ap0", {{"ont0", 2.0}}}, {"ap1", {{"ont1", 2.0}}}};
    PlacementSolution home_plus_olt;
    home_plus_olt.servers_per_site = {{"ont0", 1}, {"olt", 1}};
    home_plus_olt.assignment = {{"ap0", {{"ont0", 2.0}}}, {"ap1", {{"olt", 2.0}}}};
    PlacementSolution olt_pair_a; // cross assignment through the OLT
    olt_pair_a.servers_per_site = {{"ont1", 1}, {"olt", 1}};
    olt_pair_a.assignment = {{"ap0", {{"olt", 2.0}}}, {"ap1", {{"ont1", 2.0}}}};

    double hand_best = std::min({score(both_home), score(home_plus_olt),
                                 score(olt_pair_a)});

    PlacementSolution want = enumerate_optimal(topo, sc, Mode::SFA, cat);
    REQUIRE(want.optimality == Optimality::ProvedOptimal);
    CHECK(want.objective_j == Catch::Approx(hand_best).epsilon(1e-12));

    PlacementSolution got = solve(formulate(topo, sc, Mode::SFA, cat));
    CHECK(got.servers_per_site == want.servers_per_site);
    CHECK(std::abs(got.objective_j - want.objective_j) <= 1e-9 * want.objective_j);
}

TEST_CASE("infeasible toy: both routes agree") {
    DeviceCatalog cat = default_catalog();
    GponParams gp;
    gp.n_aps = 2;
    gp.n_patients = 40;
    Topology topo = build_gpon(gp, cat);
    double share = 0.003 * gp.gpon_trunk_capacity_bps / 2.0;
    Scenario sc = make_scenario(ScenarioParams{}.with_pat_max(1), share);
    PlacementSolution want = enumerate_optimal(topo, sc, Mode::SFA, cat);
    PlacementSolution got = solve(formulate(topo, sc, Mode::SFA, cat));
    CHECK(want.optimality == Optimality::Infeasible);
    CHECK(got.optimality == Optimality::Infeasible);
}

TEST_CASE("budget refusal instead of silent approximation") {
    DeviceCatalog cat = default_catalog();
    GponParams gp;
    gp.n_aps = 64;
    gp.n_patients = 400;
    Topology topo = build_gpon(gp, cat);
    double share = 0.003 * gp.gpon_trunk_capacity_bps / 64.0;
    Scenario sc = make_scenario(ScenarioParams{}.with_pat_max(100), share);
    CHECK_THROWS_AS(enumerate_optimal(topo, sc, Mode::MFA, cat), ConfigError);
}

TEST_CASE("oracle refuses fractional patient groups") {
    DeviceCatalog cat = default_catalog();
    GponParams gp;
    gp.n_aps = 2;
    gp.n_patients = 5;
    gp.fractional_patients = true;
    Topology topo = build_gpon(gp, cat);
    double share = 0.003 * gp.gpon_trunk_capacity_bps / 2.0;
    Scenario sc = make_scenario(ScenarioParams{}.with_pat_max(3), share);
    CHECK_THROWS_AS(enumerate_optimal(topo, sc, Mode::SFA, cat), ConfigError);
}

TEST_CASE("oracle is deterministic") {
    DeviceCatalog cat = default_catalog();
    GponParams gp;
    gp.n_aps = 3;
    gp.n_patients = 9;
    Topology topo = build_gpon(gp, cat);
    double share = 0.003 * gp.gpon_trunk_capacity_bps / 3.0;
    Scenario sc = make_scenario(ScenarioParams{}.with_pat_max(4), share);
    PlacementSolution a = enumerate_optimal(topo, sc, Mode::MFA, cat);
    PlacementSolution b = enumerate_optimal(topo, sc, Mode::MFA, cat);
    CHECK(solution_to_json(a).dump() == solution_to_json(b).dump());
}

TEST_CASE("oracle optimum lower-bounds random feasible placements") {
    DeviceCatalog cat = default_catalog();
    GponParams gp;
    gp.n_aps = 3;
    gp.n_patients = 10;
    Topology topo = build_gpon(gp, cat);
    double share = 0.003 * gp.gpon_trunk_capacity_bps / 3.0;
    Scenario sc = make_scenario(ScenarioParams{}.with_pat_max(6), share);
    PlacementSolution best = enumerate_optimal(topo, sc, Mode::MFA, cat);
    REQUIRE(best.optimality == Optimality::ProvedOptimal);

    std::mt19937_64 rng(7);
    int tried = 0;
    for (int it = 0; it < 200 && tried < 100; ++it) {
        // Random placement: a server wherever patients land.
        PlacementSolution p;
        p.mode = Mode::MFA;
        p.pat_max = 6;
        std::map<std::string, double> load;
        bool ok = true;
        for (const auto& ap : topo.ap_ids) {
            double left = topo.patients_of(ap);
            while (left > 0.0) {
                std::uniform_int_distribution<std::size_t> pick(0,
                                                                candidate_sites(topo).size() - 1);
                const std::string& site = candidate_sites(topo)[pick(rng)];
                p.assignment[ap][site] += 1.0;
                load[site] += 1.0;
                left -= 1.0;
            }
        }
        for (const auto& [site, l] : load) {
            int servers = static_cast<int>(std::ceil(l / 6.0));
            if (site != topo.olt_id && servers > 1) ok = false;
            p.servers_per_site[site] = servers;
        }
        if (!ok || !check_feasibility(topo, sc, p, cat).empty()) continue;
        ++tried;
        CHECK(evaluate(topo, sc, p, cat).total_j >= best.objective_j - 1e-9);
    }
    CHECK(tried > 10);
}

TEST_CASE("equivalence harness: random instances all agree") {
    auto instances = random_instances(20260811, 12);
    EquivalenceReport report = equivalence_check(instances);
    for (const auto& e : report.entries) {
        INFO(e.name << ": " << e.detail);
        CHECK(e.pass);
    }
    CHECK(report.all_pass);
}

TEST_CASE("equivalence harness localizes a perturbed solver") {
    auto instances = random_instances(99, 5);
    int calls = 0;
    auto bad_solver = [&calls](const MilpModel& m) {
        PlacementSolution sol = solve(m);
        if (calls++ == 3) { // corrupt the fourth instance
            if (sol.optimality == Optimality::ProvedOptimal)
                sol.objective_j += 1.0;
            else
                sol.optimality = Optimality::ProvedOptimal;
        }
        return sol;
    };
    EquivalenceReport report = equivalence_check(instances, bad_solver);
    REQUIRE(report.entries.size() == 5);
    CHECK_FALSE(report.all_pass);
    CHECK(report.entries[3].pass == false);
    for (std::size_t i = 0; i < report.entries.size(); ++i)
        if (i != 3) CHECK(report.entries[i].pass);
}

TEST_CASE("empty instance list yields an empty report") {
    EquivalenceReport report = equivalence_check({});
    CHECK(report.entries.empty());
    CHECK(report.all_pass);
}
