#include <catch2/catch_amalgamated.hpp>

#include "fogplace/catalog.hpp"

using namespace fogplace;

TEST_CASE("default catalog carries the reference device figures") {
    DeviceCatalog cat = default_catalog();
    REQUIRE(cat.entries.size() == 10);
    CHECK(cat.hc_share == 0.003);

    const DeviceSpec& olt = cat.at("OLT");
    CHECK(olt.p_max_w == 20.0);
    CHECK(olt.capacity.value() == 128e9);
    CHECK(olt.idle_fraction == 0.9);
    CHECK(olt.sharing == SharingMode::SharedNetwork);

    const DeviceSpec& ps = cat.at("processing server");
    CHECK(ps.p_max_w == 3.96);
    CHECK_FALSE(ps.capacity.has_value());
    CHECK(ps.idle_fraction == 0.54);
    CHECK(ps.sharing == SharingMode::DedicatedServer);

    const DeviceSpec& core = cat.at("core router");
    CHECK(core.p_max_w == 12300.0);
    CHECK(core.capacity.value() == 4480e9);

    CHECK(cat.at("access point").p_max_w == 21.0);
    CHECK(cat.at("ONU/ONT").capacity.value() == 3.75e9);
    CHECK(cat.at("aggregation switch").p_max_w == 1766.0);
    CHECK(cat.at("cloud switch").capacity.value() == 320e9);
    CHECK(cat.at("content server").p_max_w == 380.8);
    CHECK(cat.at("aggregation/cloud router").capacity.value() == 560e9);
    // 75.6 TB of storage, expressed in bits
    CHECK(cat.at("cloud storage").capacity.value() == 75.6e12 * 8.0);
}

TEST_CASE("attributable power follows the two-part profile") {
    DeviceCatalog cat = default_catalog();

    // Idle-only OLT at the healthcare share: 0.003 * 0.9 * 20 = 0.054 W
    CHECK(attributable_power(cat.at("OLT"), 0.0, 0.003) == Catch::Approx(0.054).epsilon(1e-12));
    // Dedicated server at full load reaches exactly p_max.
    CHECK(attributable_power(cat.at("processing server"), 1.0, 1.0) == 3.96);
    // Dedicated server idle floor: 0.54 * 3.96 = 2.1384 W
    CHECK(attributable_power(cat.at("processing server"), 0.0, 1.0) ==
          Catch::Approx(2.1384).epsilon(1e-12));
}

TEST_CASE("attributable power domain checks") {
    DeviceCatalog cat = default_catalog();
    CHECK_THROWS_AS(attributable_power(cat.at("OLT"), -0.1, 0.003), std::domain_error);
    CHECK_THROWS_AS(attributable_power(cat.at("OLT"), 1.1, 0.003), std::domain_error);
    CHECK_THROWS_AS(attributable_power(cat.at("OLT"), 0.5, 1.5), std::domain_error);
}

TEST_CASE("attributable power is affine in utilization") {
    DeviceCatalog cat = default_catalog();
    for (const auto& [cls, spec] : cat.entries) {
        double slope = (1.0 - spec.idle_fraction) * spec.p_max_w;
        for (double u1 : {0.0, 0.25, 0.4}) {
            for (double u2 : {0.1, 0.6, 1.0}) {
                double d = attributable_power(spec, u2, 0.003) -
                           attributable_power(spec, u1, 0.003);
                CHECK(d == Catch::Approx((u2 - u1) * slope).margin(1e-12));
            }
        }
        // p(1, full idle share) == p_max exactly
        CHECK(attributable_power(spec, 1.0, 1.0) == spec.p_max_w);
    }
}

TEST_CASE("attributable power is monotone in utilization and idle share") {
    DeviceCatalog cat = default_catalog();
    const DeviceSpec& sw = cat.at("aggregation switch");
    double prev = -1.0;
    for (double u = 0.0; u <= 1.0; u += 0.1) {
        double p = attributable_power(sw, u, 0.003);
        CHECK(p >= prev);
        prev = p;
    }
    prev = -1.0;
    for (double share = 0.0; share <= 1.0; share += 0.1) {
        double p = attributable_power(sw, 0.3, share);
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("validate_catalog reports every violation") {
    CHECK(validate_catalog(default_catalog()).empty());

    DeviceCatalog bad = default_catalog();
    bad.entries["OLT"].p_max_w = 0.0;
    auto issues = validate_catalog(bad);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].device_class == "OLT");
    CHECK(issues[0].rule == "p_max > 0");

    DeviceCatalog missing = default_catalog();
    missing.entries.erase("cloud storage");
    issues = validate_catalog(missing);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].device_class == "cloud storage");
    CHECK(issues[0].message.find("missing") != std::string::npos);

    DeviceCatalog fraction = default_catalog();
    fraction.entries["ONU/ONT"].idle_fraction = 1.5;
    issues = validate_catalog(fraction);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].device_class == "ONU/ONT");

    DeviceCatalog share = default_catalog();
    share.hc_share = 0.0;
    CHECK(validate_catalog(share).size() == 1);
}
