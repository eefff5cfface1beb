#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "fogplace/placement.hpp"
#include "fogplace/report.hpp"

using namespace fogplace;

namespace {

constexpr double kUplinkShare = 0.003 * 2.5e9 / 32.0;

struct Fixture {
    DeviceCatalog cat = default_catalog();
    Topology topo = build_gpon(GponParams{}, cat);

    Scenario scenario(double pat_max) const {
        return make_scenario(ScenarioParams{}.with_pat_max(pat_max), kUplinkShare);
    }
    PlacementSolution solve_mode(double pat_max, Mode mode) const {
        MilpModel m = formulate(topo, scenario(pat_max), mode, cat);
        return solve(m);
    }
};

int count_vars_with_prefix(const MilpModel& m, const std::string& prefix) {
    int n = 0;
    for (const auto& v : m.vars)
        if (v.name.rfind(prefix, 0) == 0) ++n;
    return n;
}

} // namespace

TEST_CASE("formulate: variable counts for the default instance") {
    Fixture f;
    MilpModel m = formulate(f.topo, f.scenario(50), Mode::SFA, f.cat);
    CHECK(count_vars_with_prefix(m, "y_") == 33);
    CHECK(count_vars_with_prefix(m, "x_") == 32 * 33);
    for (const auto& v : m.vars)
        if (v.name.rfind("y_", 0) == 0) CHECK(v.upper == 1.0); // SFA caps every site

    MilpModel mfa = formulate(f.topo, f.scenario(100), Mode::MFA, f.cat);
    CHECK(mfa.var_index.count("y_olt") == 1);
    CHECK(mfa.vars[mfa.var_index["y_olt"]].upper == 2.0); // ceil(200/100)
}

TEST_CASE("formulate: CA is a fixed model") {
    Fixture f;
    MilpModel m = formulate(f.topo, f.scenario(50), Mode::CA, f.cat);
    CHECK(m.vars.empty());
    CHECK(m.rows.empty());
}

TEST_CASE("S4: both fog modes place one server at the OLT and coincide") {
    Fixture f;
    PlacementSolution sfa = f.solve_mode(200, Mode::SFA);
    PlacementSolution mfa = f.solve_mode(200, Mode::MFA);
    REQUIRE(sfa.optimality == Optimality::ProvedOptimal);
    REQUIRE(mfa.optimality == Optimality::ProvedOptimal);
    CHECK(sfa.total_servers() == 1);
    CHECK(sfa.servers_per_site.at("olt") == 1);
    CHECK(sfa.servers_per_site == mfa.servers_per_site);
    CHECK(sfa.assignment == mfa.assignment);
    CHECK(sfa.objective_j == mfa.objective_j);
}

TEST_CASE("S2 MFA: two servers, both at the OLT") {
    Fixture f;
    PlacementSolution sol = f.solve_mode(100, Mode::MFA);
    REQUIRE(sol.optimality == Optimality::ProvedOptimal);
    CHECK(sol.total_servers() == 2);
    CHECK(sol.servers_per_site.size() == 1);
    CHECK(sol.servers_per_site.at("olt") == 2);
}

TEST_CASE("S2 SFA: the downstream share forces a third server") {
    Fixture f;
    PlacementSolution sol = f.solve_mode(100, Mode::SFA);
    REQUIRE(sol.optimality == Optimality::ProvedOptimal);
    CHECK(sol.total_servers() == 3);
    CHECK(sol.servers_per_site.at("olt") == 1);
    int ont_servers = 0;
    for (const auto& [site, n] : sol.servers_per_site)
        if (site != "olt") ont_servers += n;
    CHECK(ont_servers == 2);
}

TEST_CASE("the OLT hosts a server in every SFA scenario") {
    Fixture f;
    for (double pm : {50.0, 100.0, 150.0, 200.0}) {
        PlacementSolution sol = f.solve_mode(pm, Mode::SFA);
        REQUIRE(sol.optimality == Optimality::ProvedOptimal);
        CHECK(sol.servers_per_site.count("olt") == 1);
    }
}

TEST_CASE("solver outputs are feasible and ceil-bounded") {
    Fixture f;
    for (double pm : {50.0, 100.0, 150.0, 200.0}) {
        for (Mode mode : {Mode::SFA, Mode::MFA, Mode::CA}) {
            PlacementSolution sol = f.solve_mode(pm, mode);
            REQUIRE(sol.optimality == Optimality::ProvedOptimal);
            CHECK(check_feasibility(f.topo, f.scenario(pm), sol, f.cat).empty());
            if (mode != Mode::CA)
                CHECK(sol.total_servers() >= static_cast<int>(std::ceil(200.0 / pm)));
        }
    }
}

TEST_CASE("MFA never costs more than SFA") {
    Fixture f;
    for (double pm : {50.0, 100.0, 150.0, 200.0}) {
        PlacementSolution sfa = f.solve_mode(pm, Mode::SFA);
        PlacementSolution mfa = f.solve_mode(pm, Mode::MFA);
        CHECK(mfa.objective_j <= sfa.objective_j + 1e-9);
    }
}

TEST_CASE("solver objective equals the energy evaluation") {
    Fixture f;
    for (double pm : {50.0, 100.0, 150.0, 200.0}) {
        for (Mode mode : {Mode::SFA, Mode::MFA, Mode::CA}) {
            PlacementSolution sol = f.solve_mode(pm, mode);
            EnergyBreakdown e = evaluate(f.topo, f.scenario(pm), sol, f.cat);
            CHECK(std::abs(sol.objective_j - e.total_j) <=
                  1e-9 * std::max(1.0, std::abs(e.total_j)));
        }
    }
}

TEST_CASE("solving twice is byte-identical") {
    Fixture f;
    PlacementSolution a = f.solve_mode(100, Mode::SFA);
    PlacementSolution b = f.solve_mode(100, Mode::SFA);
    CHECK(solution_to_json(a).dump() == solution_to_json(b).dump());
}

TEST_CASE("check_feasibility pinpoints violations") {
    Fixture f;
    Scenario s2 = f.scenario(100);

    SECTION("overloaded downstream link") {
        // One ONT server taking all 100 patients of scenario 2: its 94
        // remote patients need ~786.8 kbps of the 468.75 kbps share.
        PlacementSolution p;
        p.mode = Mode::SFA;
        p.pat_max = 100;
        p.servers_per_site["ont8"] = 1;
        p.servers_per_site["olt"] = 1;
        double remaining = 100.0;
        p.assignment["ap8"]["ont8"] = 6.0;
        remaining -= 6.0;
        for (const auto& ap : f.topo.ap_ids) {
            if (ap == "ap8") continue;
            double pats = f.topo.patients_of(ap);
            double to_site = std::min(pats, remaining);
            if (to_site > 0.0) p.assignment[ap]["ont8"] = to_site;
            remaining -= to_site;
            if (pats - to_site > 0.0) p.assignment[ap]["olt"] = pats - to_site;
        }
        auto violations = check_feasibility(f.topo, s2, p, f.cat);
        REQUIRE_FALSE(violations.empty());
        bool found = false;
        for (const auto& v : violations) {
            if (v.constraint == "link capacity phase1" && v.entity == "olt->ont8") {
                found = true;
                // 94 remote patients at 8369.73 bps against 468.75 kbps.
                CHECK(v.slack == Catch::Approx(468750.0 - 94.0 * s2.rates.r_ps_bps));
            }
        }
        CHECK(found);
    }

    SECTION("incomplete assignment names the AP") {
        PlacementSolution sol = f.solve_mode(100, Mode::MFA);
        sol.assignment["ap3"]["olt"] -= 1.0;
        auto violations = check_feasibility(f.topo, s2, sol, f.cat);
        REQUIRE_FALSE(violations.empty());
        CHECK(violations.front().constraint == "assignment completeness");
        CHECK(violations.front().entity == "ap3");
    }

    SECTION("optimal output is clean") {
        PlacementSolution sol = f.solve_mode(100, Mode::SFA);
        CHECK(check_feasibility(f.topo, s2, sol, f.cat).empty());
    }
}

TEST_CASE("infeasible instance is reported as such") {
    DeviceCatalog cat = default_catalog();
    GponParams p;
    p.n_aps = 2; // 3 candidate sites
    p.n_patients = 40;
    Topology topo = build_gpon(p, cat);
    double share = 0.003 * p.gpon_trunk_capacity_bps / p.n_aps;
    Scenario sc = make_scenario(
        ScenarioParams{}.with_pat_max(1), share);
    MilpModel m = formulate(topo, sc, Mode::SFA, cat);
    PlacementSolution sol = solve(m);
    CHECK(sol.optimality == Optimality::Infeasible);
}

TEST_CASE("single site with enough capacity takes one server") {
    DeviceCatalog cat = default_catalog();
    GponParams p;
    p.n_aps = 1;
    p.n_patients = 3;
    Topology topo = build_gpon(p, cat);
    double share = 0.003 * p.gpon_trunk_capacity_bps;
    Scenario sc = make_scenario(ScenarioParams{}.with_pat_max(5), share);
    MilpModel m = formulate(topo, sc, Mode::SFA, cat);
    PlacementSolution sol = solve(m);
    REQUIRE(sol.optimality == Optimality::ProvedOptimal);
    CHECK(sol.total_servers() == 1);
}

TEST_CASE("CA solve reports cloud instances") {
    Fixture f;
    PlacementSolution sol = f.solve_mode(50, Mode::CA);
    REQUIRE(sol.optimality == Optimality::ProvedOptimal);
    CHECK(sol.total_servers() == 0);
    CHECK(sol.cloud_servers == 4); // ceil(200 / 50)
    CHECK(sol.site_load(kCloudSite) == 200.0);
}

TEST_CASE("fractional patient groups solve continuously") {
    DeviceCatalog cat = default_catalog();
    GponParams p;
    p.fractional_patients = true;
    Topology topo = build_gpon(p, cat);
    Scenario sc = make_scenario(ScenarioParams{}.with_pat_max(100), kUplinkShare);
    MilpModel m = formulate(topo, sc, Mode::SFA, cat, {}, /*integral=*/false);
    PlacementSolution sol = solve(m);
    REQUIRE(sol.optimality == Optimality::ProvedOptimal);
    CHECK(sol.total_servers() == 3); // same structure as the integer split
    CHECK(sol.servers_per_site.at("olt") == 1);
    CHECK(check_feasibility(topo, sc, sol, cat).empty());
}

TEST_CASE("export_lp structure") {
    Fixture f;
    MilpModel m = formulate(f.topo, f.scenario(50), Mode::SFA, f.cat);
    std::string lp = export_lp(m);

    // Exactly one objective section.
    std::size_t first = lp.find("Minimize");
    REQUIRE(first != std::string::npos);
    CHECK(lp.find("Minimize", first + 1) == std::string::npos);
    CHECK(lp.find("Subject To") != std::string::npos);
    CHECK(lp.find("Bounds") != std::string::npos);
    CHECK(lp.find("End") != std::string::npos);

    // All 33 server-count variables are integer-declared.
    std::size_t generals = lp.find("Generals");
    REQUIRE(generals != std::string::npos);
    std::size_t binaries = lp.find("Binaries");
    int y_count = 0;
    for (std::size_t pos = lp.find(" y_", generals);
         pos != std::string::npos && (binaries == std::string::npos || pos < binaries);
         pos = lp.find(" y_", pos + 1))
        ++y_count;
    CHECK(y_count == 33);

    // No constant term: every objective entry is coefficient * variable.
    std::size_t obj_start = lp.find("obj:");
    std::size_t obj_end = lp.find('\n', obj_start);
    std::string obj = lp.substr(obj_start + 4, obj_end - obj_start - 4);
    std::istringstream tokens(obj);
    std::string tok;
    int idx = 0;
    while (tokens >> tok) {
        if (tok == "+") continue;
        if (idx % 2 == 0)
            CHECK(tok.find_first_not_of("0123456789.eE+-") == std::string::npos);
        else
            CHECK(tok.find_first_not_of("0123456789.eE+-") != std::string::npos);
        ++idx;
    }
    CHECK(idx % 2 == 0);
}
