#include "setsim/golden.hpp"

#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

namespace setsim {

Stimulus Stimulus::random(std::size_t cycles, std::uint64_t seed) {
    Stimulus s;
    s.mode = Mode::Random;
    s.cycle_count = cycles;
    s.rng_seed = seed;
    return s;
}

Stimulus Stimulus::from_vectors(std::vector<BitVector> vectors) {
    Stimulus s;
    s.mode = Mode::Explicit;
    s.cycle_count = vectors.size();
    s.vectors = std::move(vectors);
    return s;
}

namespace {

BitVector parse_bits(std::string_view text, int line) {
    BitVector bits;
    for (char ch : text) {
        if (ch != '0' && ch != '1')
            throw input_error("E_STIMULUS", "line " + std::to_string(line) + ": expected only 0/1 characters");
        bits.push_back(ch == '1');
    }
    return bits;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        auto v = std::stoull(s, &used, 0);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw input_error("E_STIMULUS", std::string("bad ") + what + " '" + s + "'");
    }
}

}  // namespace

Stimulus parse_stimulus(std::string_view text) {
    std::vector<BitVector> vectors;
    std::optional<Stimulus> random;
    BitVector init;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view body = raw;
        if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;
        std::istringstream words{std::string(body)};
        std::string head;
        words >> head;
        if (head == "random") {
            std::string cycles, seed;
            if (!(words >> cycles >> seed))
                throw input_error("E_STIMULUS", "line " + std::to_string(line) + ": usage `random <cycles> <seed>`");
            random = Stimulus::random(parse_u64(cycles, "cycle count"), parse_u64(seed, "seed"));
        } else if (head == "init") {
            std::string bits;
            words >> bits;
            init = parse_bits(bits, line);
        } else {
            vectors.push_back(parse_bits(body, line));
        }
    }
    if (random && !vectors.empty())
        throw input_error("E_STIMULUS", "stimulus mixes a random directive with explicit vectors");
    Stimulus s = random ? *random : Stimulus::from_vectors(std::move(vectors));
    s.initial_state = std::move(init);
    return s;
}

Stimulus resolve_stimulus(const std::string& spec) {
    if (spec.rfind("random:", 0) == 0) {
        auto rest = spec.substr(7);
        auto colon = rest.find(':');
        if (colon == std::string::npos) throw input_error("E_STIMULUS", "expected random:<cycles>:<seed>");
        return Stimulus::random(parse_u64(rest.substr(0, colon), "cycle count"),
                                parse_u64(rest.substr(colon + 1), "seed"));
    }
    std::ifstream in(spec, std::ios::binary);
    if (!in) throw input_error("E_IO", "cannot open stimulus '" + spec + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_stimulus(ss.str());
}

// ---------------------------------------------------------------------------

Trace::Trace(std::size_t cycles, std::size_t nets, std::vector<NetId> flop_outputs, std::vector<NetId> inputs)
    : cycles_(cycles),
      nets_(nets),
      flop_outputs_(std::move(flop_outputs)),
      inputs_(std::move(inputs)),
      bits_(cycles * nets, 0) {}

BitVector Trace::flop_states(std::size_t cycle) const {
    BitVector out;
    out.reserve(flop_outputs_.size());
    for (NetId n : flop_outputs_) out.push_back(value(cycle, n));
    return out;
}

BitVector Trace::pi_values(std::size_t cycle) const {
    BitVector out;
    out.reserve(inputs_.size());
    for (NetId n : inputs_) out.push_back(value(cycle, n));
    return out;
}

void settle(const Circuit& c, const Topology& topo, std::span<std::uint8_t> nets) {
    BitVector scratch;
    for (std::size_t g : topo.order()) {
        const Gate& gate = c.gates()[g];
        scratch.clear();
        for (NetId in : gate.inputs) scratch.push_back(nets[in]);
        nets[gate.output] = evaluate_gate(gate.kind, scratch);
    }
}

Trace simulate_reference(const Circuit& c, const Topology& topo, const Stimulus& stim) {
    const auto& pis = c.primary_inputs();
    const auto& flops = c.flops();
    if (stim.cycle_count < 3)
        throw input_error("E_STIMULUS", "stimulus needs at least 3 cycles, got " + std::to_string(stim.cycle_count));
    if (!stim.initial_state.empty() && stim.initial_state.size() != flops.size())
        throw input_error("E_STIMULUS", "initial state has " + std::to_string(stim.initial_state.size()) +
                                            " bits but the circuit has " + std::to_string(flops.size()) + " flops");
    if (stim.mode == Stimulus::Mode::Explicit) {
        if (stim.vectors.size() != stim.cycle_count)
            throw input_error("E_STIMULUS", "explicit stimulus vector count does not match cycle_count");
        for (std::size_t i = 0; i < stim.vectors.size(); ++i)
            if (stim.vectors[i].size() != pis.size())
                throw input_error("E_STIMULUS", "vector width mismatch at cycle " + std::to_string(i) + ": got " +
                                                    std::to_string(stim.vectors[i].size()) + " bits, circuit has " +
                                                    std::to_string(pis.size()) + " inputs");
    }

    std::vector<NetId> flop_q;
    for (const Flop& f : flops) flop_q.push_back(f.output);
    Trace trace(stim.cycle_count, c.net_count(), flop_q, pis);

    std::mt19937_64 rng(stim.rng_seed);
    for (std::size_t cycle = 0; cycle < stim.cycle_count; ++cycle) {
        auto nets = trace.mutable_settled(cycle);
        for (std::size_t f = 0; f < flops.size(); ++f) {
            if (cycle == 0)
                nets[flops[f].output] = stim.initial_state.empty() ? 0 : stim.initial_state[f];
            else
                nets[flops[f].output] = trace.value(cycle - 1, flops[f].data);
        }
        for (std::size_t i = 0; i < pis.size(); ++i)
            nets[pis[i]] = stim.mode == Stimulus::Mode::Explicit ? stim.vectors[cycle][i]
                                                                 : static_cast<std::uint8_t>(rng() >> 63);
        settle(c, topo, nets);
    }
    return trace;
}

Trace simulate_reference(const Circuit& c, const Stimulus& stim) {
    Topology topo(c);
    return simulate_reference(c, topo, stim);
}

CycleSnapshot cycle_snapshot(const Trace& trace, std::size_t k) {
    if (k < first_strike_cycle() || k + 2 > trace.cycle_count())
        throw input_error("E_RANGE", "cycle " + std::to_string(k) + " outside strikeable range [1, " +
                                         std::to_string(trace.cycle_count() >= 2 ? trace.cycle_count() - 2 : 0) +
                                         "]");
    auto nets = trace.settled(k);
    return {trace.flop_states(k), trace.pi_values(k), BitVector(nets.begin(), nets.end())};
}

void write_trace_csv(std::ostream& os, const Circuit& c, const Trace& trace) {
    os << "cycle,flop,bit\n";
    for (std::size_t cycle = 0; cycle < trace.cycle_count(); ++cycle)
        for (std::size_t f = 0; f < c.flops().size(); ++f)
            os << cycle << ',' << c.flop_id(f) << ',' << (trace.flop_state(cycle, f) ? 1 : 0) << '\n';
}

}  // namespace setsim
