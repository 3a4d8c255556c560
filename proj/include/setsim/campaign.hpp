#pragma once

// Monte Carlo fault-injection campaigns over (drain, cycle, time) samples,
// the two-edge outcome taxonomy, the relative-standard-error stopping rule,
// multiple-flip metrics and the exhaustive enumeration oracle.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "setsim/golden.hpp"
#include "setsim/injector.hpp"
#include "setsim/netlist.hpp"
#include "setsim/rng.hpp"
#include "setsim/techmodel.hpp"

namespace setsim {

// {N, F, F_m} at E1 x {N, F, F_m} at E2.
enum class Outcome : std::uint8_t { NN, NF, NFm, FN, FF, FFm, FmN, FmF, FmFm };

inline constexpr std::size_t kOutcomeCount = 9;
inline constexpr std::array<Outcome, kOutcomeCount> kAllOutcomes = {
    Outcome::NN, Outcome::NF,  Outcome::NFm, Outcome::FN,  Outcome::FF,
    Outcome::FFm, Outcome::FmN, Outcome::FmF, Outcome::FmFm};

[[nodiscard]] std::string_view to_string(Outcome o);  // "NN", "NF_m", "F_mF", ...
[[nodiscard]] std::optional<Outcome> outcome_from_string(std::string_view text);

[[nodiscard]] Outcome classify(std::size_t flips_e1, std::size_t flips_e2);
[[nodiscard]] inline Outcome classify(const SampleResult& r) { return classify(r.flips_e1.size(), r.flips_e2.size()); }

// sqrt(p (1 - p) / n); throws for n == 0.
[[nodiscard]] double standard_error(double p, std::uint64_t n);

// ---------------------------------------------------------------------------
// Statistics

// Outcome tallies for one strike class. `mass` equals `counts` for Monte
// Carlo runs; the exhaustive oracle weights each enumerated sample by the
// probability of drawing it.
struct ClassTally {
    std::uint64_t samples = 0;
    std::array<std::uint64_t, kOutcomeCount> counts{};
    double mass_total = 0.0;
    std::array<double, kOutcomeCount> mass{};

    void add(Outcome o, double weight = 1.0);
    void merge(const ClassTally& other);

    [[nodiscard]] std::uint64_t count(Outcome o) const { return counts[static_cast<std::size_t>(o)]; }
    [[nodiscard]] std::uint64_t erroneous() const { return samples - count(Outcome::NN); }
    // nullopt when no samples were drawn for this class
    [[nodiscard]] std::optional<double> probability(Outcome o) const;
    [[nodiscard]] std::optional<double> stderr_of(Outcome o) const;
    // 1 - P_NN
    [[nodiscard]] std::optional<double> flip_probability() const;
    [[nodiscard]] std::optional<double> flip_stderr() const;
};

// Ratio reported as undefined when the denominator is zero.
struct Metric {
    double numerator = 0.0;
    double denominator = 0.0;
    std::uint64_t denominator_count = 0;  // samples behind the denominator

    [[nodiscard]] bool defined() const { return denominator > 0.0; }
    [[nodiscard]] std::optional<double> value() const;
    [[nodiscard]] std::optional<double> standard_error() const;
};

struct Metrics {
    Metric p_m;   // NF_m over all erroneous outcomes, both strike classes
    Metric p_gm;  // gate strikes only
    Metric p_rm;  // register strikes only
};

enum class StopReason : std::uint8_t { StderrMet, MaxSamples, Exhaustive };
[[nodiscard]] std::string_view to_string(StopReason r);

struct CampaignStats {
    std::string circuit;
    std::string profile_label;
    std::string capture_policy = "instant";
    std::uint64_t rng_seed = 0;
    double period = 0.0;
    double settle_bound = 0.0;
    StopReason stop_reason = StopReason::MaxSamples;
    std::size_t t_grid = 0;  // exhaustive runs only
    std::array<ClassTally, 2> tally{};  // indexed by StrikeClass

    [[nodiscard]] const ClassTally& of(StrikeClass c) const { return tally[static_cast<std::size_t>(c)]; }
    [[nodiscard]] ClassTally& of(StrikeClass c) { return tally[static_cast<std::size_t>(c)]; }
    [[nodiscard]] std::uint64_t total_samples() const { return tally[0].samples + tally[1].samples; }
};

// Numerators count NF_m only: FF_m follows from an earlier single flip and
// F_m* never arises from a single strike here. Denominators include every
// non-NN outcome.
[[nodiscard]] Metrics derive_metrics(const CampaignStats& stats);

// ---------------------------------------------------------------------------
// Configuration and context

struct CampaignConfig {
    std::uint64_t rng_seed = 1;
    std::size_t max_samples = 100000;
    std::size_t min_samples = 100;
    double stderr_target = 0.10;
    // Estimate the stopping rule watches per strike class; nullopt = 1 - P_NN.
    std::optional<Outcome> watched;
    CapturePolicy policy;
    unsigned workers = 1;
    std::optional<std::uint64_t> debug_sample;

    void validate() const;
};

// Owns everything a campaign needs. Not copyable or movable because the
// injector refers into the other members.
class CampaignContext {
public:
    CampaignContext(Circuit circuit, TechProfile profile, const Stimulus& stimulus);
    CampaignContext(const CampaignContext&) = delete;
    CampaignContext& operator=(const CampaignContext&) = delete;

    [[nodiscard]] const Circuit& circuit() const { return circuit_; }
    [[nodiscard]] const TechProfile& profile() const { return profile_; }
    [[nodiscard]] const Topology& topology() const { return topo_; }
    [[nodiscard]] const TimingSummary& timing() const { return timing_; }
    [[nodiscard]] const DrainTable& drains() const { return drains_; }
    [[nodiscard]] const Trace& trace() const { return trace_; }
    [[nodiscard]] const Injector& injector() const { return *injector_; }

private:
    Circuit circuit_;
    TechProfile profile_;
    Topology topo_;
    TimingSummary timing_;
    DrainTable drains_;
    Trace trace_;
    std::unique_ptr<Injector> injector_;
};

// Area-weighted drain, uniform strike cycle in [1, cycles - 2], uniform time
// in [settle_bound, period).
[[nodiscard]] StrikeSample sample_strike(SampleRng& rng, const DrainTable& drains, const Trace& trace,
                                         double settle_bound, double period);

// ---------------------------------------------------------------------------
// Runs

struct SampleRecord {
    std::uint64_t index = 0;
    std::string drain;  // site id, e.g. "G10/1"
    StrikeClass strike_class = StrikeClass::Gate;
    std::size_t cycle = 0;
    double time = 0.0;
    std::uint32_t flips_e1 = 0;
    std::uint32_t flips_e2 = 0;
    Outcome outcome = Outcome::NN;
};

using SampleEvaluator = std::function<SampleResult(const StrikeSample&, SampleRng&)>;

struct CampaignResult {
    CampaignStats stats;
    std::vector<SampleRecord> log;
    std::optional<SampleDebug> debug;  // filled when config.debug_sample names a drawn sample
};

// True once every watched per-class estimate p > 0 has
// standard_error(p, N_class) < stderr_target * p and N >= min_samples.
[[nodiscard]] bool stopping_rule_met(const CampaignStats& stats, const CampaignConfig& config);

[[nodiscard]] CampaignResult run_campaign(const CampaignContext& ctx, const CampaignConfig& config);

// Same, with the injector replaced by `evaluator` (used for stubbed tests).
// The evaluator must be safe to call concurrently.
[[nodiscard]] CampaignResult run_campaign(const CampaignContext& ctx, const CampaignConfig& config,
                                          const SampleEvaluator& evaluator);

inline constexpr std::uint64_t kExhaustiveBudget = 10'000'000;

// Enumerates every (drain, cycle, grid time) once; grid times are the
// midpoints of t_grid equal slices of [settle_bound, period). Instant capture only.
[[nodiscard]] CampaignStats exhaustive_campaign(const CampaignContext& ctx, std::size_t t_grid,
                                                unsigned workers = 1);

// ---------------------------------------------------------------------------
// Files

// CSV: sample_index,drain,strike_class,k,t,flips_e1,flips_e2,class
void write_sample_log(std::ostream& os, std::span<const SampleRecord> log);
[[nodiscard]] std::vector<SampleRecord> read_sample_log(std::istream& is);

// Recomputes tallies from a log; metadata fields are copied from `meta`.
[[nodiscard]] CampaignStats stats_from_log(std::span<const SampleRecord> log, const CampaignStats& meta);

[[nodiscard]] std::string stats_to_json(const CampaignStats& stats);
[[nodiscard]] CampaignStats stats_from_json(std::string_view text);

// 6 significant digits, independent of the global locale.
[[nodiscard]] std::string format_number(double value);

}  // namespace setsim
