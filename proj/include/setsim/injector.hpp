#pragma once

// Timed faulty simulation of a single strike sample.
//
// Timing convention: the strike cycle k spans [E0, E1) with E0 at time 0 and
// E1 at the clock period T. `flips_e1` compares register state just before
// the capture at E1 against golden; `flips_e2` compares the state after that
// capture (the state during cycle k+1) against golden.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "setsim/golden.hpp"
#include "setsim/netlist.hpp"
#include "setsim/rng.hpp"
#include "setsim/techmodel.hpp"

namespace setsim {

struct CapturePolicy {
    enum class Kind { Instant, WindowRandom };

    Kind kind = Kind::Instant;
    double probability = 0.5;  // window-random only

    [[nodiscard]] static CapturePolicy instant() { return {}; }
    [[nodiscard]] static CapturePolicy window_random(double p) { return {Kind::WindowRandom, p}; }
    // "instant" or "window-random:<p>"
    [[nodiscard]] static CapturePolicy parse(std::string_view text);
    [[nodiscard]] std::string to_string() const;
};

struct StrikeSample {
    std::size_t drain = 0;  // index into the DrainTable
    std::size_t cycle = 0;  // k
    double time = 0.0;      // t, picoseconds after E0
    StrikeClass strike_class = StrikeClass::Gate;
};

// Half-open disturbance interval [start, end) during which a net carries the
// complement of its golden value.
struct Interval {
    double start = 0.0;
    double end = 0.0;

    [[nodiscard]] double width() const { return end - start; }
};

struct PulseEvent {
    NetId net = 0;
    double start = 0.0;
    double width = 0.0;
    bool disturbed_value = false;
};

struct SampleResult {
    std::vector<std::size_t> flips_e1;  // flop indices, ascending
    std::vector<std::size_t> flips_e2;
    StrikeClass strike_class = StrikeClass::Gate;
    std::uint32_t window_hits = 0;
};

// Optional per-sample record for debugging.
struct SampleDebug {
    std::vector<PulseEvent> pulses;
    std::vector<std::string> notes;  // capture decisions and masking reasons
};

// Inertial pulse degradation through one gate of delay d:
// w >= 2d passes unchanged, d < w < 2d leaves 2(w - d), anything else (or
// w <= theta * d) is filtered.
[[nodiscard]] std::optional<double> propagate_width(double width, double gate_delay, double theta);

// Sorts and unions overlapping or touching intervals in place.
void merge_intervals(std::vector<Interval>& intervals);

// Resolves what a flop latches at `edge` given the disturbance on its data
// net. Returns true when the disturbed value is captured. Disturbances that
// overlap [edge - setup, edge + hold] without covering the edge instant count
// as window hits; window-random captures them with the policy probability.
[[nodiscard]] bool capture_at_edge(std::span<const Interval> disturbance, double edge, double setup, double hold,
                                   const CapturePolicy& policy, SampleRng& rng, std::uint32_t& window_hits);

class Injector {
public:
    // All references must outlive the Injector.
    Injector(const Circuit& circuit, const Topology& topo, const TechProfile& profile, const Trace& trace,
             const DrainTable& drains, double period);

    [[nodiscard]] SampleResult run_sample(const StrikeSample& sample, const CapturePolicy& policy, SampleRng& rng,
                                          SampleDebug* debug = nullptr) const;

    // Models behind run_sample; the sample must name a drain of the matching class.
    [[nodiscard]] SampleResult disturb_register(const StrikeSample& sample, const CapturePolicy& policy,
                                                SampleRng& rng, SampleDebug* debug = nullptr) const;
    [[nodiscard]] SampleResult disturb_gate(const StrikeSample& sample, const CapturePolicy& policy, SampleRng& rng,
                                            SampleDebug* debug = nullptr) const;

    [[nodiscard]] double period() const { return period_; }
    [[nodiscard]] double gate_delay(std::size_t gate) const { return delays_[gate]; }

private:
    void check_sample(const StrikeSample& sample) const;

    // Pushes `seed` through the combinational fanout cone of `net` and returns
    // the merged disturbance per net.
    [[nodiscard]] std::vector<std::vector<Interval>> propagate(NetId net, Interval seed, std::size_t cycle,
                                                              SampleDebug* debug) const;

    // Adds to result.flips_e2 every flop whose data disturbance is captured at E1.
    void capture_all(const std::vector<std::vector<Interval>>& disturbed, const CapturePolicy& policy,
                     SampleRng& rng, SampleResult& result, SampleDebug* debug) const;

    const Circuit& circuit_;
    const Topology& topo_;
    const TechProfile& profile_;
    const Trace& trace_;
    const DrainTable& drains_;
    double period_;
    std::vector<double> delays_;
};

}  // namespace setsim
