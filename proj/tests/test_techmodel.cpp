#include <doctest.h>

#include <cmath>

#include "setsim/rng.hpp"
#include "setsim/techmodel.hpp"
#include "test_support.hpp"

using namespace setsim;
using testing::toy_profile;
using testing::toy_profile_json;

namespace {

std::string profile_error(const nlohmann::json& j) {
    try {
        (void)load_profile(j.dump());
    } catch (const Error& e) {
        CHECK(e.code() == "E_PROFILE");
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("bundled profiles load") {
    auto names = bundled_profile_names();
    REQUIRE(names.size() == 2);
    for (const auto& n : names) {
        TechProfile p = bundled_profile(n);
        CHECK(p.node_label == n);
        CHECK(p.glitch_width > 0.0);
        CHECK(p.flop_drains.size() == 4);
    }
    TechProfile p65 = bundled_profile("65nm-like");
    TechProfile p180 = bundled_profile("180nm-like");
    CHECK(p65.glitch_width == 45.0);
    CHECK(p65.delay(GateKind::Nand, 2) < p180.delay(GateKind::Nand, 2));
    CHECK(p65.flop_drains[0].area < p180.flop_drains[0].area);
    CHECK(resolve_profile("65nm-like").node_label == "65nm-like");
}

TEST_CASE("profile round trip") {
    TechProfile a = toy_profile();
    TechProfile b = load_profile(profile_to_json(a));
    CHECK(profile_to_json(b) == profile_to_json(a));
}

TEST_CASE("profile errors") {
    SUBCASE("zero delay") {
        auto j = toy_profile_json();
        j["gate_delay"]["NAND2"] = 0;
        CHECK(profile_error(j).find("non-positive delay") != std::string::npos);
    }
    SUBCASE("missing ff_setup") {
        auto j = toy_profile_json();
        j.erase("ff_setup");
        CHECK(profile_error(j).find("missing field ff_setup") != std::string::npos);
    }
    SUBCASE("unknown gate kind") {
        auto j = toy_profile_json();
        j["gate_delay"]["MUX2"] = 10;
        CHECK(profile_error(j).find("unknown gate kind") != std::string::npos);
    }
    SUBCASE("non-positive area") {
        auto j = toy_profile_json();
        j["drain_spec"]["NOT"][0]["area"] = -1;
        CHECK(profile_error(j).find("non-positive area") != std::string::npos);
    }
    SUBCASE("flop site without node class") {
        auto j = toy_profile_json();
        j["drain_spec"]["DFF"][0].erase("ff_node_class");
        CHECK_FALSE(profile_error(j).empty());
    }
    SUBCASE("gate site with node class") {
        auto j = toy_profile_json();
        j["drain_spec"]["NOT"][0]["ff_node_class"] = "state-node";
        CHECK_FALSE(profile_error(j).empty());
    }
}

TEST_CASE("delay lookup prefers the exact fan-in") {
    auto j = toy_profile_json();
    j["gate_delay"]["NAND2"] = 40;
    TechProfile p = load_profile(j.dump());
    CHECK(p.delay(GateKind::Nand, 2) == 40.0);
    CHECK(p.delay(GateKind::Nand, 3) == 100.0);
    j["gate_delay"].erase("NAND");
    p = load_profile(j.dump());
    CHECK_THROWS_AS((void)p.delay(GateKind::Nand, 3), Error);
}

TEST_CASE("drain table: 1 NAND2 and 1 flop") {
    Circuit c = parse_bench("INPUT(a) OUTPUT(q) y=NAND(a,q) q=DFF(y)");
    DrainTable t = enumerate_drains(c, toy_profile());
    CHECK(t.size() == 6);
    CHECK(t.total_gate_area() == doctest::Approx(1.0));
    CHECK(t.total_flop_area() == doctest::Approx(3.0));
    CHECK(t.total_flop_area() / t.total_area() == doctest::Approx(0.75));
    CHECK(t.cumulative().back() == 1.0);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t.cumulative()[i] > t.cumulative()[i - 1]);
    CHECK(t.site_id(c, 0) == "y/0");
    CHECK(t.site_id(c, 5) == "q/3");
}

TEST_CASE("drain table: empty circuit rejected") {
    Circuit c = parse_bench("INPUT(a) OUTPUT(a)");
    try {
        (void)enumerate_drains(c, toy_profile());
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(e.code() == "E_EMPTY_DRAINS");
    }
}

TEST_CASE("drain table: scaling every area leaves weights unchanged") {
    Circuit c = parse_bench("INPUT(a) OUTPUT(q) y=NAND(a,q) z=NOT(y) q=DFF(z)");
    auto j = toy_profile_json();
    DrainTable t1 = enumerate_drains(c, load_profile(j.dump()));
    for (auto& [kind, sites] : j["drain_spec"].items())
        for (auto& s : sites) s["area"] = s["area"].get<double>() * 2.0;
    DrainTable t2 = enumerate_drains(c, load_profile(j.dump()));
    REQUIRE(t1.size() == t2.size());
    for (std::size_t i = 0; i < t1.size(); ++i) CHECK(t1.weight(i) == doctest::Approx(t2.weight(i)).epsilon(1e-15));
}

TEST_CASE("property: drain picks follow normalized areas within 3 sigma") {
    Circuit c = parse_bench("INPUT(a) OUTPUT(q) y=NAND(a,q) z=NOT(y) w=XOR(z,a) q=DFF(w)");
    auto j = toy_profile_json();
    j["drain_spec"]["XOR"][0]["area"] = 2.5;  // uneven sites
    DrainTable t = enumerate_drains(c, load_profile(j.dump()));
    const std::uint64_t n = 100000;
    std::vector<std::uint64_t> hits(t.size());
    for (std::uint64_t i = 0; i < n; ++i) {
        SampleRng rng(99, i);
        ++hits[t.pick(rng.uniform())];
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
        double p = t.weight(i);
        double sigma = std::sqrt(p * (1 - p) / n);
        CAPTURE(i);
        CHECK(std::abs(static_cast<double>(hits[i]) / n - p) <= 3 * sigma);
    }
}

TEST_CASE("two drains with areas 1 and 3") {
    std::vector<DrainSite> sites = {{StrikeClass::Gate, 0, 0, 1.0, Polarity::PullsLow, FlopNodeClass::None},
                                    {StrikeClass::Gate, 0, 1, 3.0, Polarity::PullsHigh, FlopNodeClass::None}};
    DrainTable t(sites);
    CHECK(t.pick(0.0) == 0);
    CHECK(t.pick(0.2499) == 0);
    CHECK(t.pick(0.25) == 1);
    CHECK(t.pick(0.9999999) == 1);
}

TEST_CASE("clock period examples") {
    TechProfile p = toy_profile();  // 100 ps gates, ctq 50, setup 30, margin 20
    SUBCASE("three-gate chain") {
        Circuit c = parse_bench("INPUT(x) OUTPUT(b) a=DFF(g3) g1=NOT(a) g2=NOT(g1) g3=NOT(g2) b=DFF(g3)");
        CHECK(clock_period(c, p) == doctest::Approx(400.0));
    }
    SUBCASE("direct flop to flop") {
        Circuit c = parse_bench("INPUT(x) OUTPUT(b) a=DFF(x) b=DFF(a)");
        CHECK(clock_period(c, p) == doctest::Approx(100.0));
    }
    SUBCASE("diamond: the longer arm dominates") {
        auto j = toy_profile_json();
        j["gate_delay"]["BUF"] = 125;
        Circuit c = parse_bench("INPUT(x) OUTPUT(q) a=DFF(x) s=NOT(a) l1=BUF(a) l2=BUF(l1) q=DFF(j) j=AND(s,l2)");
        // arms 100 and 250, join 100
        CHECK(clock_period(c, load_profile(j.dump())) == doctest::Approx(50 + 250 + 100 + 30 + 20));
    }
    SUBCASE("adding a gate on the critical path never shortens the period") {
        Circuit c1 = parse_bench("INPUT(x) OUTPUT(b) a=DFF(g1) g1=NOT(a) b=DFF(g1)");
        Circuit c2 = parse_bench("INPUT(x) OUTPUT(b) a=DFF(g2) g1=NOT(a) g2=NOT(g1) b=DFF(g2)");
        CHECK(clock_period(c2, p) >= clock_period(c1, p));
    }
}

TEST_CASE("timing summary") {
    Circuit c = parse_bench("INPUT(x) OUTPUT(q) a=DFF(x) g1=NOT(a) g2=NOT(g1) q=DFF(g1) o=NOT(g2)");
    Topology topo(c);
    TimingSummary t = analyze_timing(c, topo, toy_profile());
    CHECK(t.critical_path == doctest::Approx(100.0));
    CHECK(t.settle_bound == doctest::Approx(50 + 300));  // o settles last
    CHECK(t.period == doctest::Approx(50 + 100 + 30 + 20));
    CHECK(t.arrival[*c.find_net("g2")] == doctest::Approx(200.0));
}

TEST_CASE("setup plus hold must fit in the period") {
    auto j = toy_profile_json();
    j["ff_hold"] = 200;
    Circuit c = parse_bench("INPUT(x) OUTPUT(b) a=DFF(x) b=DFF(a)");
    CHECK_THROWS_AS((void)clock_period(c, load_profile(j.dump())), Error);
}

TEST_CASE("polarity rule") {
    CHECK(polarity_disturbs(Polarity::PullsLow, true));
    CHECK_FALSE(polarity_disturbs(Polarity::PullsLow, false));
    CHECK(polarity_disturbs(Polarity::PullsHigh, false));
    CHECK_FALSE(polarity_disturbs(Polarity::PullsHigh, true));
}
