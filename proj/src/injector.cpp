#include "setsim/injector.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <queue>
#include <sstream>

namespace setsim {

CapturePolicy CapturePolicy::parse(std::string_view text) {
    if (text == "instant") return instant();
    constexpr std::string_view prefix = "window-random:";
    if (text.substr(0, prefix.size()) == prefix) {
        std::string_view num = text.substr(prefix.size());
        double p = 0.0;
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), p);
        if (ec == std::errc{} && ptr == num.data() + num.size() && p >= 0.0 && p <= 1.0) return window_random(p);
    }
    throw usage_error("E_USAGE", "capture policy must be `instant` or `window-random:<p>` with 0<=p<=1, got '" +
                                     std::string(text) + "'");
}

std::string CapturePolicy::to_string() const {
    if (kind == Kind::Instant) return "instant";
    std::ostringstream os;
    os << "window-random:" << probability;
    return os.str();
}

std::optional<double> propagate_width(double width, double gate_delay, double theta) {
    if (!(width > theta * gate_delay)) return std::nullopt;
    if (width >= 2.0 * gate_delay) return width;
    if (width > gate_delay) return 2.0 * (width - gate_delay);
    return std::nullopt;
}

void merge_intervals(std::vector<Interval>& v) {
    if (v.size() < 2) return;
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
        return a.start < b.start || (a.start == b.start && a.end < b.end);
    });
    std::size_t out = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i].start <= v[out].end)
            v[out].end = std::max(v[out].end, v[i].end);
        else
            v[++out] = v[i];
    }
    v.resize(out + 1);
}

bool capture_at_edge(std::span<const Interval> disturbance, double edge, double setup, double hold,
                     const CapturePolicy& policy, SampleRng& rng, std::uint32_t& window_hits) {
    bool in_window = false;
    for (const Interval& iv : disturbance) {
        if (iv.start <= edge && edge < iv.end) return true;
        if (iv.start <= edge + hold && iv.end > edge - setup) in_window = true;
    }
    if (!in_window) return false;
    ++window_hits;
    if (policy.kind == CapturePolicy::Kind::WindowRandom) return rng.bernoulli(policy.probability);
    return false;
}

// ---------------------------------------------------------------------------

Injector::Injector(const Circuit& circuit, const Topology& topo, const TechProfile& profile, const Trace& trace,
                   const DrainTable& drains, double period)
    : circuit_(circuit), topo_(topo), profile_(profile), trace_(trace), drains_(drains), period_(period) {
    delays_.reserve(circuit.gates().size());
    for (const Gate& g : circuit.gates()) delays_.push_back(profile.delay(g.kind, g.inputs.size()));
}

void Injector::check_sample(const StrikeSample& s) const {
    if (s.drain >= drains_.size())
        throw input_error("E_SAMPLE", "drain index " + std::to_string(s.drain) + " out of range");
    if (!(s.time >= 0.0 && s.time < period_))
        throw input_error("E_SAMPLE", "strike time " + std::to_string(s.time) + " ps outside the clock period [0, " +
                                          std::to_string(period_) + ")");
    if (s.cycle < first_strike_cycle() || s.cycle + 2 > trace_.cycle_count())
        throw input_error("E_SAMPLE", "strike cycle " + std::to_string(s.cycle) + " outside the trace range");
}

SampleResult Injector::run_sample(const StrikeSample& sample, const CapturePolicy& policy, SampleRng& rng,
                                  SampleDebug* debug) const {
    check_sample(sample);
    if (drains_[sample.drain].node_class == FlopNodeClass::None) return disturb_gate(sample, policy, rng, debug);
    return disturb_register(sample, policy, rng, debug);
}

std::vector<std::vector<Interval>> Injector::propagate(NetId net, Interval seed, std::size_t cycle,
                                                       SampleDebug* debug) const {
    const auto golden = trace_.settled(cycle);
    std::vector<std::vector<Interval>> disturbed(circuit_.net_count());
    disturbed[net].push_back(seed);
    if (debug) debug->pulses.push_back({net, seed.start, seed.width(), golden[net] == 0});

    // Gates are visited in topological rank so every input is final when read.
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> pending;
    std::vector<bool> queued(circuit_.gates().size(), false);
    auto enqueue_fanout = [&](NetId n) {
        for (std::size_t g : topo_.fanout_gates(n))
            if (!queued[g]) {
                queued[g] = true;
                pending.push(topo_.rank(g));
            }
    };
    enqueue_fanout(net);

    std::vector<Interval> produced;
    while (!pending.empty()) {
        std::size_t g = topo_.order()[pending.top()];
        pending.pop();
        const Gate& gate = circuit_.gates()[g];
        const double d = delays_[g];
        produced.clear();

        for (std::size_t pos = 0; pos < gate.inputs.size(); ++pos) {
            NetId in = gate.inputs[pos];
            if (disturbed[in].empty()) continue;
            // handle each distinct disturbed net once, at its first position
            if (std::find(gate.inputs.begin(), gate.inputs.begin() + static_cast<std::ptrdiff_t>(pos), in) !=
                gate.inputs.begin() + static_cast<std::ptrdiff_t>(pos))
                continue;

            // Logical masking: every side input must hold a non-controlling
            // golden value. A net feeding an XOR an even number of times cancels.
            bool sensitized = true;
            if (auto ctrl = controlling_value(gate.kind)) {
                for (NetId side : gate.inputs)
                    if (side != in && (golden[side] != 0) == *ctrl) sensitized = false;
            } else if (gate.kind == GateKind::Xor || gate.kind == GateKind::Xnor) {
                sensitized = std::count(gate.inputs.begin(), gate.inputs.end(), in) % 2 == 1;
            }
            if (!sensitized) {
                if (debug)
                    debug->notes.push_back("logically masked at " + circuit_.gate_id(g) + " (input " +
                                           circuit_.net_name(in) + ")");
                continue;
            }
            for (const Interval& iv : disturbed[in]) {
                auto w = propagate_width(iv.width(), d, profile_.filter_threshold);
                if (!w) {
                    if (debug)
                        debug->notes.push_back("electrically filtered at " + circuit_.gate_id(g) + " (width " +
                                               std::to_string(iv.width()) + " ps, delay " + std::to_string(d) +
                                               " ps)");
                    continue;
                }
                produced.push_back({iv.start + d, iv.start + d + *w});
            }
        }
        if (produced.empty()) continue;
        auto& out = disturbed[gate.output];
        out.insert(out.end(), produced.begin(), produced.end());
        merge_intervals(out);
        if (debug)
            for (const Interval& iv : produced)
                debug->pulses.push_back({gate.output, iv.start, iv.width(), golden[gate.output] == 0});
        enqueue_fanout(gate.output);
    }
    return disturbed;
}

void Injector::capture_all(const std::vector<std::vector<Interval>>& disturbed, const CapturePolicy& policy,
                           SampleRng& rng, SampleResult& result, SampleDebug* debug) const {
    const auto& flops = circuit_.flops();
    for (std::size_t f = 0; f < flops.size(); ++f) {
        const auto& iv = disturbed[flops[f].data];
        if (iv.empty()) continue;
        std::uint32_t hits_before = result.window_hits;
        bool captured =
            capture_at_edge(iv, period_, profile_.ff_setup, profile_.ff_hold, policy, rng, result.window_hits);
        if (captured) result.flips_e2.push_back(f);
        if (debug) {
            std::ostringstream os;
            os << "capture at E1 by " << circuit_.flop_id(f) << ": " << (captured ? "disturbed" : "golden")
               << (result.window_hits != hits_before ? " (setup/hold window hit)" : "");
            debug->notes.push_back(os.str());
        }
    }
}

SampleResult Injector::disturb_register(const StrikeSample& sample, const CapturePolicy& policy, SampleRng& rng,
                                        SampleDebug* debug) const {
    const DrainSite& site = drains_[sample.drain];
    SampleResult result;
    result.strike_class = StrikeClass::Register;
    const Flop& flop = circuit_.flops()[site.cell];
    const std::size_t k = sample.cycle;

    if (site.node_class == FlopNodeClass::CaptureNode) {
        // The master path holds the value about to be captured at E1; an
        // upset there inverts what the flop latches.
        bool captured = trace_.value(k, flop.data);
        if (!polarity_disturbs(site.polarity, captured)) {
            if (debug) debug->notes.push_back("polarity mismatch on capture node; no disturbance");
            return result;
        }
        result.flips_e2.push_back(site.cell);
        if (debug) debug->notes.push_back("capture node upset: " + circuit_.flop_id(site.cell) + " latches inverted data");
        return result;
    }

    bool state = trace_.flop_state(k, site.cell);
    if (!polarity_disturbs(site.polarity, state)) {
        if (debug) debug->notes.push_back("polarity mismatch on state node; no disturbance");
        return result;
    }
    // The stored bit stays flipped until E1 reloads the flop (visible at
    // E1 + clk-to-q).
    result.flips_e1.push_back(site.cell);
    Interval seed{sample.time, period_ + profile_.ff_clk_to_q};
    auto disturbed = propagate(flop.output, seed, k, debug);
    capture_all(disturbed, policy, rng, result, debug);
    return result;
}

SampleResult Injector::disturb_gate(const StrikeSample& sample, const CapturePolicy& policy, SampleRng& rng,
                                    SampleDebug* debug) const {
    const DrainSite& site = drains_[sample.drain];
    SampleResult result;
    result.strike_class = StrikeClass::Gate;
    const Gate& gate = circuit_.gates()[site.cell];
    bool value = trace_.value(sample.cycle, gate.output);
    if (!polarity_disturbs(site.polarity, value)) {
        if (debug) debug->notes.push_back("polarity mismatch at gate output; no disturbance");
        return result;
    }
    Interval seed{sample.time, sample.time + profile_.glitch_width};
    auto disturbed = propagate(gate.output, seed, sample.cycle, debug);
    capture_all(disturbed, policy, rng, result, debug);
    return result;
}

}  // namespace setsim
