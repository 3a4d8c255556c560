#include <doctest.h>

#include <cmath>
#include <sstream>

#include "setsim/campaign.hpp"
#include "setsim/report.hpp"
#include "test_support.hpp"

using namespace setsim;
using testing::toy_profile;
using testing::toy_profile_json;

namespace {

CampaignStats with_counts(std::initializer_list<std::pair<Outcome, std::uint64_t>> gate,
                          std::initializer_list<std::pair<Outcome, std::uint64_t>> reg) {
    CampaignStats s;
    for (auto [o, n] : gate)
        for (std::uint64_t i = 0; i < n; ++i) s.of(StrikeClass::Gate).add(o);
    for (auto [o, n] : reg)
        for (std::uint64_t i = 0; i < n; ++i) s.of(StrikeClass::Register).add(o);
    return s;
}

SampleEvaluator bernoulli_stub(double p) {
    return [p](const StrikeSample& s, SampleRng& rng) {
        SampleResult r;
        r.strike_class = s.strike_class;
        if (rng.bernoulli(p)) r.flips_e2.push_back(0);
        return r;
    };
}

std::string log_text(const std::vector<SampleRecord>& log) {
    std::ostringstream os;
    write_sample_log(os, log);
    return os.str();
}

}  // namespace

TEST_CASE("classify") {
    CHECK(classify(0, 1) == Outcome::NF);
    CHECK(classify(0, 0) == Outcome::NN);
    CHECK(classify(1, 3) == Outcome::FFm);
    CHECK(classify(2, 0) == Outcome::FmN);
    CHECK(classify(5, 5) == Outcome::FmFm);
    for (Outcome o : kAllOutcomes) CHECK(outcome_from_string(to_string(o)) == o);
    CHECK(to_string(Outcome::NFm) == "NF_m");
    CHECK(to_string(Outcome::FmF) == "F_mF");
}

TEST_CASE("standard error") {
    CHECK(standard_error(0.5, 100) == doctest::Approx(0.05));
    CHECK(standard_error(0.0, 10) == 0.0);
    CHECK(standard_error(0.1, 900) == doctest::Approx(0.01));
    CHECK_THROWS_AS((void)standard_error(0.5, 0), Error);
}

TEST_CASE("derive_metrics") {
    SUBCASE("P_GM = 19 / 38") {
        auto s = with_counts({{Outcome::NFm, 19}, {Outcome::NF, 19}, {Outcome::NN, 100}}, {});
        Metrics m = derive_metrics(s);
        CHECK(m.p_gm.value() == doctest::Approx(0.5));
        CHECK_FALSE(m.p_rm.defined());
        CHECK(m.p_m.value() == doctest::Approx(0.5));
    }
    SUBCASE("P_RM = 10 / 500") {
        auto s = with_counts({}, {{Outcome::NFm, 10}, {Outcome::FN, 400}, {Outcome::FF, 90}, {Outcome::NN, 7}});
        CHECK(derive_metrics(s).p_rm.value() == doctest::Approx(0.02));
    }
    SUBCASE("no erroneous samples") {
        auto s = with_counts({{Outcome::NN, 50}}, {{Outcome::NN, 50}});
        Metrics m = derive_metrics(s);
        CHECK_FALSE(m.p_m.value().has_value());
        CHECK_FALSE(m.p_gm.value().has_value());
        CHECK_FALSE(m.p_rm.value().has_value());
    }
    SUBCASE("FF_m and every multi class count in denominators only") {
        auto s = with_counts({{Outcome::NF, 1}, {Outcome::FFm, 1}, {Outcome::FmF, 1}, {Outcome::NFm, 1}}, {});
        Metrics m = derive_metrics(s);
        CHECK(m.p_gm.numerator == 1.0);
        CHECK(m.p_gm.denominator == 4.0);
    }
}

TEST_CASE("config validation") {
    CampaignConfig c;
    c.max_samples = 50;
    c.min_samples = 100;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.stderr_target = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c.stderr_target = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("sample_strike") {
    Circuit c = parse_bench("INPUT(x) OUTPUT(b) a=DFF(x) n=NOT(a) b=DFF(n)");
    CampaignContext ctx(c, toy_profile(), Stimulus::random(10, 1));
    SUBCASE("areas 1 and 3") {
        DrainTable t({{StrikeClass::Gate, 0, 0, 1.0, Polarity::PullsLow, FlopNodeClass::None},
                      {StrikeClass::Gate, 0, 1, 3.0, Polarity::PullsHigh, FlopNodeClass::None}});
        const std::uint64_t n = 100000;
        std::uint64_t first = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            SampleRng rng(5, i);
            first += sample_strike(rng, t, ctx.trace(), 150, 200).drain == 0;
        }
        CHECK(std::abs(static_cast<double>(first) / n - 0.25) <= 3 * std::sqrt(0.25 * 0.75 / n));
    }
    SUBCASE("single drain") {
        DrainTable t({{StrikeClass::Register, 0, 0, 2.0, Polarity::PullsLow, FlopNodeClass::StateNode}});
        for (std::uint64_t i = 0; i < 100; ++i) {
            SampleRng rng(5, i);
            CHECK(sample_strike(rng, t, ctx.trace(), 150, 200).drain == 0);
        }
    }
    SUBCASE("ranges and determinism") {
        for (std::uint64_t i = 0; i < 2000; ++i) {
            SampleRng a(9, i), b(9, i);
            StrikeSample x = sample_strike(a, ctx.drains(), ctx.trace(), 150, 200);
            StrikeSample y = sample_strike(b, ctx.drains(), ctx.trace(), 150, 200);
            CHECK(x.drain == y.drain);
            CHECK(x.cycle == y.cycle);
            CHECK(x.time == y.time);
            CHECK(x.time >= 150);
            CHECK(x.time < 200);
            CHECK(x.cycle >= 1);
            CHECK(x.cycle <= 8);
            CHECK(x.strike_class == ctx.drains()[x.drain].cell_class);
        }
    }
}

TEST_CASE("settle bound at or past the period is a config error") {
    // the PO-only inverter chain settles long after the flop-to-flop path
    const char* src = "INPUT(x) OUTPUT(o3) a=DFF(x) b=DFF(a) o1=NOT(a) o2=NOT(o1) o3=NOT(o2)";
    try {
        CampaignContext ctx(parse_bench(src), toy_profile(), Stimulus::random(10, 1));
        FAIL("expected E_CONFIG");
    } catch (const Error& e) {
        CHECK(e.code() == "E_CONFIG");
    }
}

TEST_CASE("stopping rule against a Bernoulli(0.2) stub") {
    // register-only circuit, so N = N_register
    CampaignContext ctx(parse_bench("INPUT(d) OUTPUT(q2) q0=DFF(d) q1=DFF(q0) q2=DFF(q1)"), toy_profile(),
                        Stimulus::random(20, 1));
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        CampaignConfig cfg;
        cfg.rng_seed = seed;
        cfg.max_samples = 100000;
        CampaignResult r = run_campaign(ctx, cfg, bernoulli_stub(0.2));
        CHECK(r.stats.stop_reason == StopReason::StderrMet);
        const std::uint64_t n = r.stats.total_samples();
        // replay: no earlier N satisfied the rule
        std::uint64_t flips = 0, first = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            flips += r.log[i].outcome != Outcome::NN;
            double p = static_cast<double>(flips) / (i + 1);
            if (first == 0 && i + 1 >= cfg.min_samples && p > 0 && std::sqrt(p * (1 - p) / (i + 1)) < 0.1 * p)
                first = i + 1;
        }
        CHECK(first == n);
        CHECK(n > 250);
        CHECK(n < 650);
    }
}

TEST_CASE("stopping rule respects min and max samples") {
    CampaignContext ctx(parse_bench("INPUT(d) OUTPUT(q1) q0=DFF(d) q1=DFF(q0)"), toy_profile(),
                        Stimulus::random(20, 1));
    CampaignConfig cfg;
    cfg.min_samples = 2000;
    cfg.max_samples = 5000;
    CampaignResult r = run_campaign(ctx, cfg, bernoulli_stub(0.9));
    CHECK(r.stats.total_samples() == 2000);
    cfg.min_samples = 100;
    cfg.max_samples = 300;
    r = run_campaign(ctx, cfg, bernoulli_stub(0.05));  // needs ~1900 samples
    CHECK(r.stats.total_samples() == 300);
    CHECK(r.stats.stop_reason == StopReason::MaxSamples);
    // an estimate of exactly zero is not watched
    r = run_campaign(ctx, cfg, bernoulli_stub(0.0));
    CHECK(r.stats.total_samples() == 100);
    CHECK(r.stats.stop_reason == StopReason::StderrMet);
    cfg.min_samples = 10;
    cfg.watched = Outcome::FN;  // never produced by the stub: nothing to watch, stop at min
    r = run_campaign(ctx, cfg, bernoulli_stub(0.5));
    CHECK(r.stats.total_samples() == 10);
}

TEST_CASE("results do not depend on the worker count") {
    CampaignContext ctx(load_bench_file(testing::bench_path("s27.bench")), bundled_profile("65nm-like"),
                        Stimulus::random(100, 3));
    CampaignConfig cfg;
    cfg.rng_seed = 77;
    cfg.max_samples = 3000;
    cfg.stderr_target = 0.02;
    cfg.policy = CapturePolicy::window_random(0.5);
    std::string stats1, log1;
    for (unsigned w : {1u, 2u, 8u}) {
        cfg.workers = w;
        CampaignResult r = run_campaign(ctx, cfg);
        if (w == 1) {
            stats1 = stats_to_json(r.stats);
            log1 = log_text(r.log);
        } else {
            CHECK(stats_to_json(r.stats) == stats1);
            CHECK(log_text(r.log) == log1);
        }
    }
}

TEST_CASE("conservation and flip identity") {
    CampaignContext ctx(load_bench_file(testing::bench_path("fsm.bench")), bundled_profile("65nm-like"),
                        Stimulus::random(100, 3));
    CampaignConfig cfg;
    cfg.max_samples = 5000;
    CampaignResult r = run_campaign(ctx, cfg);
    CHECK(r.log.size() == r.stats.total_samples());
    for (const ClassTally& t : r.stats.tally) {
        std::uint64_t sum = 0;
        double psum = 0;
        for (Outcome o : kAllOutcomes) {
            sum += t.count(o);
            psum += *t.probability(o);
            CHECK(*t.probability(o) >= 0.0);
            CHECK(*t.probability(o) <= 1.0);
        }
        CHECK(sum == t.samples);
        CHECK(std::abs(psum - 1.0) <= 1e-12);
        CHECK(*t.flip_probability() == doctest::Approx(1.0 - *t.probability(Outcome::NN)).epsilon(1e-12));
    }
}

TEST_CASE("strike-class mix follows the drain area ratio") {
    CampaignContext ctx(load_bench_file(testing::bench_path("s27.bench")), bundled_profile("65nm-like"),
                        Stimulus::random(100, 3));
    CampaignConfig cfg;
    cfg.max_samples = 20000;
    cfg.min_samples = 20000;
    CampaignResult r = run_campaign(ctx, cfg);
    const double n = static_cast<double>(r.stats.total_samples());
    const double p = ctx.drains().total_flop_area() / ctx.drains().total_area();
    const double observed = r.stats.of(StrikeClass::Register).samples / n;
    CHECK(std::abs(observed - p) <= 3 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("exhaustive enumeration") {
    // 1 gate, 2 flops, a 2-site flop cell: 6 drains
    auto j = toy_profile_json();
    j["drain_spec"]["DFF"] = nlohmann::json::array(
        {{{"area", 1.0}, {"polarity", "pulls-low"}, {"ff_node_class", "state-node"}},
         {{"area", 1.0}, {"polarity", "pulls-high"}, {"ff_node_class", "state-node"}}});
    CampaignContext ctx(load_bench_file(testing::bench_path("toy/single.bench")), load_profile(j.dump()),
                        Stimulus::random(4, 1));
    REQUIRE(ctx.drains().size() == 6);
    SUBCASE("cardinality") {
        CampaignStats s = exhaustive_campaign(ctx, 100);
        CHECK(s.total_samples() == 1200);
        std::uint64_t sum = 0;
        for (const ClassTally& t : s.tally)
            for (Outcome o : kAllOutcomes) sum += t.count(o);
        CHECK(sum == 1200);
        CHECK(s.stop_reason == StopReason::Exhaustive);
        CHECK(s.t_grid == 100);
    }
    SUBCASE("one grid point equals direct evaluation at the midpoint") {
        CampaignStats s = exhaustive_campaign(ctx, 1);
        const double t = (ctx.timing().settle_bound + ctx.timing().period) / 2;
        std::array<std::array<double, kOutcomeCount>, 2> mass{};
        std::array<double, 2> total{};
        for (std::size_t d = 0; d < ctx.drains().size(); ++d)
            for (std::size_t k = 1; k <= 2; ++k) {
                SampleRng rng(0, 0);
                StrikeSample smp{d, k, t, ctx.drains()[d].cell_class};
                auto cls = static_cast<std::size_t>(smp.strike_class);
                mass[cls][static_cast<std::size_t>(classify(ctx.injector().run_sample(smp, {}, rng)))] +=
                    ctx.drains().weight(d);
                total[cls] += ctx.drains().weight(d);
            }
        for (StrikeClass c : {StrikeClass::Gate, StrikeClass::Register})
            for (Outcome o : kAllOutcomes) {
                auto ci = static_cast<std::size_t>(c);
                CHECK(*s.of(c).probability(o) ==
                      doctest::Approx(mass[ci][static_cast<std::size_t>(o)] / total[ci]).epsilon(1e-12));
            }
    }
    SUBCASE("parallel enumeration is identical") {
        CHECK(stats_to_json(exhaustive_campaign(ctx, 50, 1)) == stats_to_json(exhaustive_campaign(ctx, 50, 4)));
    }
    SUBCASE("budget") {
        try {
            (void)exhaustive_campaign(ctx, kExhaustiveBudget);
            FAIL("expected E_BUDGET");
        } catch (const Error& e) {
            CHECK(e.code() == "E_BUDGET");
        }
    }
}

TEST_CASE("Monte Carlo agrees with the oracle on the toy chain") {
    CampaignContext ctx(load_bench_file(testing::bench_path("toy/chain.bench")), bundled_profile("65nm-like"),
                        Stimulus::random(20, 2));
    CampaignStats ex = exhaustive_campaign(ctx, 200);
    CampaignConfig cfg;
    cfg.max_samples = cfg.min_samples = 10000;
    CampaignResult mc = run_campaign(ctx, cfg);
    for (const OracleComparison& c : compare_to_oracle(mc.stats, ex)) {
        CAPTURE(to_string(c.outcome));
        CHECK(c.within(3.0));
    }
}

TEST_CASE("log and stats files round trip") {
    CampaignContext ctx(load_bench_file(testing::bench_path("toy/fanout.bench")), bundled_profile("65nm-like"),
                        Stimulus::random(30, 2));
    CampaignConfig cfg;
    cfg.max_samples = 2000;
    CampaignResult r = run_campaign(ctx, cfg);
    std::istringstream in(log_text(r.log));
    auto back = read_sample_log(in);
    REQUIRE(back.size() == r.log.size());
    CHECK(log_text(back) == log_text(r.log));
    CampaignStats parsed = stats_from_json(stats_to_json(r.stats));
    CHECK(stats_to_json(parsed) == stats_to_json(r.stats));
    CHECK(stats_to_json(stats_from_log(back, parsed)) == stats_to_json(r.stats));

    std::istringstream bad("sample_index,drain,strike_class,k,t,flips_e1,flips_e2,class\n0,x/0,gate,1,5,0,1,NN\n");
    CHECK_THROWS_AS((void)read_sample_log(bad), Error);
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.123456789) == "0.123457");
    CHECK(format_number(100.0) == "100");
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1234567.0) == "1.23457e+06");
    CHECK(format_number(0.0) == "0");
}
