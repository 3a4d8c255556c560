#pragma once

// Fault-free reference simulation. Zero-delay and cycle based: at every rising
// edge the flops load their data nets, then the combinational logic settles.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "setsim/netlist.hpp"

namespace setsim {

using BitVector = std::vector<std::uint8_t>;

struct Stimulus {
    enum class Mode { Explicit, Random };

    Mode mode = Mode::Random;
    std::vector<BitVector> vectors;  // explicit mode: one per cycle, PI order
    std::size_t cycle_count = 0;
    std::uint64_t rng_seed = 0;
    BitVector initial_state;  // per flop; empty means all zero

    [[nodiscard]] static Stimulus random(std::size_t cycles, std::uint64_t seed);
    [[nodiscard]] static Stimulus from_vectors(std::vector<BitVector> vectors);
};

// Stimulus file: one line of 0/1 characters per cycle in PI declaration order,
// or the directive `random <cycles> <seed>`. An optional `init <bits>` line
// sets the initial flop state in flop declaration order. `#` starts a comment.
[[nodiscard]] Stimulus parse_stimulus(std::string_view text);

// `random:<cycles>:<seed>` or a path to a stimulus file.
[[nodiscard]] Stimulus resolve_stimulus(const std::string& spec);

class Trace {
public:
    Trace(std::size_t cycles, std::size_t nets, std::vector<NetId> flop_outputs, std::vector<NetId> inputs);

    [[nodiscard]] std::size_t cycle_count() const { return cycles_; }
    [[nodiscard]] std::size_t net_count() const { return nets_; }

    [[nodiscard]] std::span<const std::uint8_t> settled(std::size_t cycle) const {
        return {bits_.data() + cycle * nets_, nets_};
    }
    [[nodiscard]] bool value(std::size_t cycle, NetId net) const { return bits_[cycle * nets_ + net] != 0; }
    [[nodiscard]] bool flop_state(std::size_t cycle, std::size_t flop) const {
        return value(cycle, flop_outputs_[flop]);
    }
    [[nodiscard]] BitVector flop_states(std::size_t cycle) const;
    [[nodiscard]] BitVector pi_values(std::size_t cycle) const;

    std::span<std::uint8_t> mutable_settled(std::size_t cycle) { return {bits_.data() + cycle * nets_, nets_}; }

private:
    std::size_t cycles_;
    std::size_t nets_;
    std::vector<NetId> flop_outputs_;
    std::vector<NetId> inputs_;
    std::vector<std::uint8_t> bits_;
};

// Evaluates the combinational logic for one cycle. `nets` must already hold
// the PI and flop-output values; gate outputs are overwritten.
void settle(const Circuit& circuit, const Topology& topo, std::span<std::uint8_t> nets);

[[nodiscard]] Trace simulate_reference(const Circuit& circuit, const Topology& topo, const Stimulus& stimulus);
[[nodiscard]] Trace simulate_reference(const Circuit& circuit, const Stimulus& stimulus);

struct CycleSnapshot {
    BitVector flop_state;
    BitVector pi_values;
    BitVector settled_nets;
};

// Valid for 1 <= k <= cycle_count - 2: cycle k-1 initializes the registers and
// the two edges after cycle k are observed.
[[nodiscard]] CycleSnapshot cycle_snapshot(const Trace& trace, std::size_t k);

// Range of cycles a strike may target.
[[nodiscard]] inline std::size_t first_strike_cycle() { return 1; }
[[nodiscard]] inline std::size_t strike_cycle_count(const Trace& t) {
    return t.cycle_count() >= 3 ? t.cycle_count() - 2 : 0;
}

// CSV with header `cycle,flop,bit`.
void write_trace_csv(std::ostream& os, const Circuit& circuit, const Trace& trace);

}  // namespace setsim
