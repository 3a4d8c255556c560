#include "setsim/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace setsim {

namespace {
constexpr std::array<std::string_view, kOutcomeCount> kOutcomeNames = {"NN",  "NF",   "NF_m", "FN",    "FF",
                                                                        "FF_m", "F_mN", "F_mF", "F_mF_m"};

int bucket(std::size_t flips) { return flips == 0 ? 0 : (flips == 1 ? 1 : 2); }
}  // namespace

std::string_view to_string(Outcome o) { return kOutcomeNames[static_cast<std::size_t>(o)]; }

std::optional<Outcome> outcome_from_string(std::string_view text) {
    for (std::size_t i = 0; i < kOutcomeCount; ++i)
        if (kOutcomeNames[i] == text) return static_cast<Outcome>(i);
    return std::nullopt;
}

Outcome classify(std::size_t flips_e1, std::size_t flips_e2) {
    return static_cast<Outcome>(bucket(flips_e1) * 3 + bucket(flips_e2));
}

double standard_error(double p, std::uint64_t n) {
    if (n == 0) throw input_error("E_DOMAIN", "standard error of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw input_error("E_DOMAIN", "proportion outside [0, 1]");
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

std::string_view to_string(StopReason r) {
    switch (r) {
        case StopReason::StderrMet: return "stderr-met";
        case StopReason::MaxSamples: return "max-samples";
        case StopReason::Exhaustive: return "exhaustive";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Tallies

void ClassTally::add(Outcome o, double weight) {
    ++samples;
    ++counts[static_cast<std::size_t>(o)];
    mass_total += weight;
    mass[static_cast<std::size_t>(o)] += weight;
}

void ClassTally::merge(const ClassTally& other) {
    samples += other.samples;
    mass_total += other.mass_total;
    for (std::size_t i = 0; i < kOutcomeCount; ++i) {
        counts[i] += other.counts[i];
        mass[i] += other.mass[i];
    }
}

std::optional<double> ClassTally::probability(Outcome o) const {
    if (samples == 0) return std::nullopt;
    return mass[static_cast<std::size_t>(o)] / mass_total;
}

std::optional<double> ClassTally::stderr_of(Outcome o) const {
    auto p = probability(o);
    if (!p) return std::nullopt;
    return standard_error(*p, samples);
}

std::optional<double> ClassTally::flip_probability() const {
    if (samples == 0) return std::nullopt;
    return (mass_total - mass[static_cast<std::size_t>(Outcome::NN)]) / mass_total;
}

std::optional<double> ClassTally::flip_stderr() const {
    auto p = flip_probability();
    if (!p) return std::nullopt;
    return standard_error(std::clamp(*p, 0.0, 1.0), samples);
}

std::optional<double> Metric::value() const {
    if (!defined()) return std::nullopt;
    return numerator / denominator;
}

std::optional<double> Metric::standard_error() const {
    auto v = value();
    if (!v) return std::nullopt;
    return setsim::standard_error(std::clamp(*v, 0.0, 1.0), denominator_count);
}

Metrics derive_metrics(const CampaignStats& stats) {
    auto one = [](const ClassTally& t) {
        Metric m;
        m.numerator = t.mass[static_cast<std::size_t>(Outcome::NFm)];
        m.denominator = t.mass_total - t.mass[static_cast<std::size_t>(Outcome::NN)];
        m.denominator_count = t.erroneous();
        return m;
    };
    Metrics out;
    out.p_gm = one(stats.of(StrikeClass::Gate));
    out.p_rm = one(stats.of(StrikeClass::Register));
    out.p_m.numerator = out.p_gm.numerator + out.p_rm.numerator;
    out.p_m.denominator = out.p_gm.denominator + out.p_rm.denominator;
    out.p_m.denominator_count = out.p_gm.denominator_count + out.p_rm.denominator_count;
    return out;
}

// ---------------------------------------------------------------------------
// Config and context

void CampaignConfig::validate() const {
    if (!(stderr_target > 0.0 && stderr_target < 1.0))
        throw usage_error("E_CONFIG", "stderr target must lie in (0, 1)");
    if (min_samples > max_samples)
        throw usage_error("E_CONFIG", "min_samples (" + std::to_string(min_samples) + ") exceeds max_samples (" +
                                          std::to_string(max_samples) + ")");
    if (max_samples == 0) throw usage_error("E_CONFIG", "max_samples must be positive");
    if (workers == 0) throw usage_error("E_CONFIG", "workers must be positive");
}

CampaignContext::CampaignContext(Circuit circuit, TechProfile profile, const Stimulus& stimulus)
    : circuit_(std::move(circuit)),
      profile_(std::move(profile)),
      topo_(circuit_),
      timing_(analyze_timing(circuit_, topo_, profile_)),
      drains_(enumerate_drains(circuit_, profile_)),
      trace_(simulate_reference(circuit_, topo_, stimulus)) {
    if (!(timing_.settle_bound < timing_.period))
        throw input_error("E_CONFIG", "settle bound " + format_number(timing_.settle_bound) +
                                          " ps is not below the clock period " + format_number(timing_.period) +
                                          " ps; no strike time is available");
    injector_ = std::make_unique<Injector>(circuit_, topo_, profile_, trace_, drains_, timing_.period);
}

StrikeSample sample_strike(SampleRng& rng, const DrainTable& drains, const Trace& trace, double settle_bound,
                           double period) {
    if (drains.empty()) throw input_error("E_EMPTY_DRAINS", "drain table is empty");
    const std::size_t cycles = strike_cycle_count(trace);
    if (cycles == 0) throw input_error("E_RANGE", "trace too short to strike");
    StrikeSample s;
    s.drain = drains.pick(rng.uniform());
    s.strike_class = drains[s.drain].cell_class;
    s.cycle = first_strike_cycle() + rng.below(cycles);
    s.time = settle_bound + rng.uniform() * (period - settle_bound);
    if (s.time >= period) s.time = std::nextafter(period, settle_bound);
    return s;
}

// ---------------------------------------------------------------------------
// Monte Carlo

bool stopping_rule_met(const CampaignStats& stats, const CampaignConfig& config) {
    if (stats.total_samples() < config.min_samples) return false;
    for (const ClassTally& t : stats.tally) {
        if (t.samples == 0) continue;
        double p = config.watched ? *t.probability(*config.watched) : *t.flip_probability();
        if (p <= 0.0) continue;
        if (!(standard_error(std::min(p, 1.0), t.samples) < config.stderr_target * p)) return false;
    }
    return true;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
}

CampaignStats base_stats(const CampaignContext& ctx) {
    CampaignStats s;
    s.circuit = ctx.circuit().name();
    s.profile_label = ctx.profile().node_label;
    s.period = ctx.timing().period;
    s.settle_bound = ctx.timing().settle_bound;
    return s;
}

}  // namespace

CampaignResult run_campaign(const CampaignContext& ctx, const CampaignConfig& config) {
    const Injector& inj = ctx.injector();
    CapturePolicy policy = config.policy;
    return run_campaign(ctx, config, [&inj, policy](const StrikeSample& s, SampleRng& rng) {
        return inj.run_sample(s, policy, rng);
    });
}

CampaignResult run_campaign(const CampaignContext& ctx, const CampaignConfig& config,
                            const SampleEvaluator& evaluator) {
    config.validate();
    CampaignResult out;
    out.stats = base_stats(ctx);
    out.stats.rng_seed = config.rng_seed;
    out.stats.capture_policy = config.policy.to_string();

    const auto& drains = ctx.drains();
    const auto& timing = ctx.timing();
    auto draw = [&](std::uint64_t index) {
        SampleRng rng(config.rng_seed, index);
        StrikeSample s = sample_strike(rng, drains, ctx.trace(), timing.settle_bound, timing.period);
        SampleResult r = evaluator(s, rng);
        SampleRecord rec;
        rec.index = index;
        rec.drain = drains.site_id(ctx.circuit(), s.drain);
        rec.strike_class = s.strike_class;
        rec.cycle = s.cycle;
        rec.time = s.time;
        rec.flips_e1 = static_cast<std::uint32_t>(r.flips_e1.size());
        rec.flips_e2 = static_cast<std::uint32_t>(r.flips_e2.size());
        rec.outcome = classify(r);
        return rec;
    };

    // Samples are evaluated in parallel batches and folded in index order, so
    // the stopping point and every tally are independent of the worker count.
    const std::size_t batch = std::max<std::size_t>(256, 64 * static_cast<std::size_t>(config.workers));
    std::vector<SampleRecord> buffer;
    bool stopped = false;
    std::uint64_t done = 0;
    while (!stopped && done < config.max_samples) {
        const std::size_t n = std::min<std::size_t>(batch, config.max_samples - done);
        buffer.assign(n, SampleRecord{});
        parallel_for(n, config.workers, [&](std::size_t i) { buffer[i] = draw(done + i); });
        for (std::size_t i = 0; i < n; ++i) {
            out.stats.of(buffer[i].strike_class).add(buffer[i].outcome);
            out.log.push_back(std::move(buffer[i]));
            if (stopping_rule_met(out.stats, config)) {
                stopped = true;
                break;
            }
        }
        done += n;
    }
    out.stats.stop_reason = stopped ? StopReason::StderrMet : StopReason::MaxSamples;

    if (config.debug_sample && *config.debug_sample < out.log.size()) {
        SampleRng rng(config.rng_seed, *config.debug_sample);
        StrikeSample s = sample_strike(rng, drains, ctx.trace(), timing.settle_bound, timing.period);
        SampleDebug dbg;
        (void)ctx.injector().run_sample(s, config.policy, rng, &dbg);
        out.debug = std::move(dbg);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

CampaignStats exhaustive_campaign(const CampaignContext& ctx, std::size_t t_grid, unsigned workers) {
    if (t_grid == 0) throw usage_error("E_CONFIG", "t_grid must be positive");
    const auto& drains = ctx.drains();
    const std::size_t cycles = strike_cycle_count(ctx.trace());
    const std::uint64_t total = static_cast<std::uint64_t>(drains.size()) * cycles * t_grid;
    if (cycles == 0) throw input_error("E_RANGE", "trace too short to strike");
    if (total > kExhaustiveBudget)
        throw input_error("E_BUDGET", "exhaustive enumeration needs " + std::to_string(total) +
                                          " samples, above the budget of " + std::to_string(kExhaustiveBudget));

    const double settle = ctx.timing().settle_bound;
    const double span = ctx.timing().period - settle;
    const double per_point = 1.0 / (static_cast<double>(cycles) * static_cast<double>(t_grid));
    const CapturePolicy instant = CapturePolicy::instant();

    std::vector<ClassTally> per_drain(drains.size());
    parallel_for(drains.size(), workers, [&](std::size_t d) {
        SampleRng unused(0, d);  // instant capture never draws
        const double weight = drains.weight(d) * per_point;
        ClassTally& tally = per_drain[d];
        for (std::size_t c = 0; c < cycles; ++c)
            for (std::size_t i = 0; i < t_grid; ++i) {
                StrikeSample s;
                s.drain = d;
                s.strike_class = drains[d].cell_class;
                s.cycle = first_strike_cycle() + c;
                s.time = settle + (static_cast<double>(i) + 0.5) * span / static_cast<double>(t_grid);
                tally.add(classify(ctx.injector().run_sample(s, instant, unused)), weight);
            }
    });

    CampaignStats stats = base_stats(ctx);
    stats.stop_reason = StopReason::Exhaustive;
    stats.t_grid = t_grid;
    for (std::size_t d = 0; d < drains.size(); ++d) stats.of(drains[d].cell_class).merge(per_drain[d]);
    return stats;
}

}  // namespace setsim
