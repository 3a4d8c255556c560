#include "setsim/netlist.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <unordered_set>

namespace setsim {

std::string_view to_string(GateKind kind) {
    switch (kind) {
        case GateKind::And: return "AND";
        case GateKind::Nand: return "NAND";
        case GateKind::Or: return "OR";
        case GateKind::Nor: return "NOR";
        case GateKind::Not: return "NOT";
        case GateKind::Buf: return "BUF";
        case GateKind::Xor: return "XOR";
        case GateKind::Xnor: return "XNOR";
    }
    return "?";
}

std::optional<GateKind> gate_kind_from_string(std::string_view text) {
    std::string upper(text);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "BUFF") return GateKind::Buf;
    if (upper == "INV") return GateKind::Not;
    for (GateKind kind : kAllGateKinds)
        if (to_string(kind) == upper) return kind;
    return std::nullopt;
}

bool evaluate_gate(GateKind kind, std::span<const std::uint8_t> inputs) {
    switch (kind) {
        case GateKind::And:
        case GateKind::Nand: {
            bool v = std::all_of(inputs.begin(), inputs.end(), [](std::uint8_t b) { return b != 0; });
            return kind == GateKind::And ? v : !v;
        }
        case GateKind::Or:
        case GateKind::Nor: {
            bool v = std::any_of(inputs.begin(), inputs.end(), [](std::uint8_t b) { return b != 0; });
            return kind == GateKind::Or ? v : !v;
        }
        case GateKind::Not: return inputs[0] == 0;
        case GateKind::Buf: return inputs[0] != 0;
        case GateKind::Xor:
        case GateKind::Xnor: {
            bool v = false;
            for (std::uint8_t b : inputs) v ^= (b != 0);
            return kind == GateKind::Xor ? v : !v;
        }
    }
    return false;
}

std::optional<bool> controlling_value(GateKind kind) {
    switch (kind) {
        case GateKind::And:
        case GateKind::Nand: return false;
        case GateKind::Or:
        case GateKind::Nor: return true;
        default: return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// Circuit

NetId Circuit::net(std::string_view name) {
    auto it = net_index_.find(std::string(name));
    if (it != net_index_.end()) return it->second;
    auto id = static_cast<NetId>(net_names_.size());
    net_names_.emplace_back(name);
    net_index_.emplace(net_names_.back(), id);
    return id;
}

std::optional<NetId> Circuit::find_net(std::string_view name) const {
    auto it = net_index_.find(std::string(name));
    if (it == net_index_.end()) return std::nullopt;
    return it->second;
}

void Circuit::add_input(NetId net, SourceLocation loc) {
    inputs_.push_back(net);
    input_locs_.push_back(loc);
}

void Circuit::add_output(NetId net, SourceLocation loc) {
    outputs_.push_back(net);
    output_locs_.push_back(loc);
}

void Circuit::add_gate(GateKind kind, std::vector<NetId> inputs, NetId output, SourceLocation loc) {
    gates_.push_back(Gate{kind, std::move(inputs), output, loc});
}

void Circuit::add_flop(NetId data, NetId output, SourceLocation loc) {
    flops_.push_back(Flop{data, output, loc});
}

// ---------------------------------------------------------------------------
// Validation

namespace {

struct DriverCount {
    int count = 0;
    SourceLocation second;  // location of the first redundant driver
};

std::vector<DriverCount> count_drivers(const Circuit& c) {
    std::vector<DriverCount> drivers(c.net_count());
    auto note = [&](NetId n, SourceLocation loc) {
        if (++drivers[n].count == 2) drivers[n].second = loc;
    };
    for (std::size_t i = 0; i < c.primary_inputs().size(); ++i)
        note(c.primary_inputs()[i], c.input_locations()[i]);
    for (const Gate& g : c.gates()) note(g.output, g.location);
    for (const Flop& f : c.flops()) note(f.output, f.location);
    return drivers;
}

// Tarjan SCC over gates; returns each strongly connected set that forms a cycle.
std::vector<std::vector<std::size_t>> find_gate_cycles(const Circuit& c) {
    const auto& gates = c.gates();
    std::vector<std::vector<std::size_t>> gate_drivers_of_net(c.net_count());
    for (std::size_t i = 0; i < gates.size(); ++i) gate_drivers_of_net[gates[i].output].push_back(i);

    // successor lists: gate -> gates reading its output
    std::vector<std::vector<std::size_t>> succ(gates.size());
    for (std::size_t i = 0; i < gates.size(); ++i)
        for (NetId in : gates[i].inputs)
            for (std::size_t d : gate_drivers_of_net[in]) succ[d].push_back(i);

    const std::size_t n = gates.size();
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::size_t next_index = 0;
    std::vector<std::vector<std::size_t>> cycles;

    // Iterative Tarjan to stay safe on deep netlists.
    struct Frame {
        std::size_t v;
        std::size_t edge;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& fr = call.back();
            if (fr.edge < succ[fr.v].size()) {
                std::size_t w = succ[fr.v][fr.edge++];
                if (index[w] == unvisited) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[fr.v] = std::min(low[fr.v], index[w]);
                }
                continue;
            }
            std::size_t v = fr.v;
            call.pop_back();
            if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            if (low[v] != index[v]) continue;
            std::vector<std::size_t> scc;
            std::size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                scc.push_back(w);
            } while (w != v);
            bool self_loop = std::find(succ[v].begin(), succ[v].end(), v) != succ[v].end();
            if (scc.size() > 1 || self_loop) {
                std::sort(scc.begin(), scc.end());
                cycles.push_back(std::move(scc));
            }
        }
    }
    std::sort(cycles.begin(), cycles.end());
    return cycles;
}

}  // namespace

Diagnostics validate(const Circuit& c) {
    Diagnostics diag;
    auto error = [&](std::string code, std::string msg, SourceLocation loc) {
        diag.errors.push_back({std::move(code), std::move(msg), loc});
    };

    auto drivers = count_drivers(c);
    for (NetId n = 0; n < c.net_count(); ++n)
        if (drivers[n].count > 1)
            error("duplicate-driver", "net '" + c.net_name(n) + "' has " +
                                          std::to_string(drivers[n].count) + " drivers",
                  drivers[n].second);

    auto check_ref = [&](NetId n, SourceLocation loc, const char* what) {
        if (drivers[n].count == 0)
            error("undeclared-net", std::string(what) + " references undeclared net '" + c.net_name(n) + "'",
                  loc);
    };
    std::vector<bool> used(c.net_count(), false);
    for (const Gate& g : c.gates()) {
        if (g.inputs.empty())
            error("bad-fanin", "gate '" + c.net_name(g.output) + "' has no inputs", g.location);
        else if ((g.kind == GateKind::Not || g.kind == GateKind::Buf) && g.inputs.size() != 1)
            error("bad-fanin",
                  "gate '" + c.net_name(g.output) + "' of kind " + std::string(to_string(g.kind)) +
                      " must have exactly one input",
                  g.location);
        for (NetId in : g.inputs) {
            check_ref(in, g.location, "gate input");
            used[in] = true;
        }
    }
    for (const Flop& f : c.flops()) {
        check_ref(f.data, f.location, "flop input");
        used[f.data] = true;
    }
    for (std::size_t i = 0; i < c.primary_outputs().size(); ++i) {
        check_ref(c.primary_outputs()[i], c.output_locations()[i], "OUTPUT");
        used[c.primary_outputs()[i]] = true;
    }

    for (const auto& cycle : find_gate_cycles(c)) {
        std::string names;
        for (std::size_t g : cycle) {
            if (!names.empty()) names += ", ";
            names += c.gate_id(g);
        }
        error("combinational-cycle", "combinational cycle through gates {" + names + "}",
              c.gates()[cycle.front()].location);
    }

    for (NetId n = 0; n < c.net_count(); ++n)
        if (!used[n] && drivers[n].count > 0)
            diag.warnings.push_back({"unused-net", "net '" + c.net_name(n) + "' has no fanout", {}});
    return diag;
}

// ---------------------------------------------------------------------------
// Topology

namespace {

std::vector<std::size_t> topological_gate_order(const Circuit& c) {
    const auto& gates = c.gates();
    std::vector<std::ptrdiff_t> gate_of_net(c.net_count(), -1);
    for (std::size_t i = 0; i < gates.size(); ++i) gate_of_net[gates[i].output] = static_cast<std::ptrdiff_t>(i);

    std::vector<std::vector<std::size_t>> succ(gates.size());
    std::vector<std::size_t> indegree(gates.size(), 0);
    for (std::size_t i = 0; i < gates.size(); ++i)
        for (NetId in : gates[i].inputs)
            if (gate_of_net[in] >= 0) {
                succ[static_cast<std::size_t>(gate_of_net[in])].push_back(i);
                ++indegree[i];
            }

    // Lowest declaration index first among ready gates keeps the order stable.
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < gates.size(); ++i)
        if (indegree[i] == 0) ready.push(i);
    std::vector<std::size_t> order;
    order.reserve(gates.size());
    while (!ready.empty()) {
        std::size_t g = ready.top();
        ready.pop();
        order.push_back(g);
        for (std::size_t s : succ[g])
            if (--indegree[s] == 0) ready.push(s);
    }
    if (order.size() != gates.size())
        throw invariant_error("E_CYCLE", "combinational cycle detected in '" + c.name() + "'");
    return order;
}

void build_csr(std::size_t nets, const std::vector<std::pair<NetId, std::size_t>>& edges,
               std::vector<std::size_t>& offsets, std::vector<std::size_t>& targets) {
    offsets.assign(nets + 1, 0);
    for (const auto& e : edges) ++offsets[e.first + 1];
    for (std::size_t i = 0; i < nets; ++i) offsets[i + 1] += offsets[i];
    targets.resize(edges.size());
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (const auto& e : edges) targets[fill[e.first]++] = e.second;
}

}  // namespace

Topology::Topology(const Circuit& c) {
    Diagnostics diag = validate(c);
    if (!diag.ok()) {
        const Diagnostic& first = diag.errors.front();
        throw invariant_error("E_INVALID_CIRCUIT", "circuit '" + c.name() + "' is invalid: " + first.message);
    }
    order_ = topological_gate_order(c);
    rank_.resize(order_.size());
    for (std::size_t r = 0; r < order_.size(); ++r) rank_[order_[r]] = r;

    drivers_.assign(c.net_count(), Driver{});
    for (std::size_t i = 0; i < c.primary_inputs().size(); ++i)
        drivers_[c.primary_inputs()[i]] = {DriverKind::PrimaryInput, i};
    for (std::size_t i = 0; i < c.gates().size(); ++i) drivers_[c.gates()[i].output] = {DriverKind::Gate, i};
    for (std::size_t i = 0; i < c.flops().size(); ++i) drivers_[c.flops()[i].output] = {DriverKind::Flop, i};

    std::vector<std::pair<NetId, std::size_t>> gate_edges;
    for (std::size_t i = 0; i < c.gates().size(); ++i) {
        // a gate listing the same net twice still appears once in that net's fanout
        std::vector<NetId> ins = c.gates()[i].inputs;
        std::sort(ins.begin(), ins.end());
        ins.erase(std::unique(ins.begin(), ins.end()), ins.end());
        for (NetId in : ins) gate_edges.emplace_back(in, i);
    }
    build_csr(c.net_count(), gate_edges, gate_fanout_offsets_, gate_fanout_);

    std::vector<std::pair<NetId, std::size_t>> flop_edges;
    for (std::size_t i = 0; i < c.flops().size(); ++i) flop_edges.emplace_back(c.flops()[i].data, i);
    build_csr(c.net_count(), flop_edges, flop_fanout_offsets_, flop_fanout_);
}

std::span<const std::size_t> Topology::fanout_gates(NetId net) const {
    return {gate_fanout_.data() + gate_fanout_offsets_[net], gate_fanout_offsets_[net + 1] - gate_fanout_offsets_[net]};
}

std::span<const std::size_t> Topology::fanout_flops(NetId net) const {
    return {flop_fanout_.data() + flop_fanout_offsets_[net], flop_fanout_offsets_[net + 1] - flop_fanout_offsets_[net]};
}

std::vector<std::string> levelize(const Circuit& circuit) {
    std::vector<std::string> ids;
    for (std::size_t g : topological_gate_order(circuit)) ids.push_back(circuit.gate_id(g));
    return ids;
}

// ---------------------------------------------------------------------------
// Wrapping

namespace {

std::string fresh_name(const Circuit& c, const std::unordered_set<std::string>& taken, const std::string& base) {
    std::string name = base;
    for (int i = 1; c.find_net(name) || taken.count(name); ++i) name = base + "_" + std::to_string(i);
    return name;
}

}  // namespace

Circuit wrap_combinational(const Circuit& src) {
    if (!src.flops().empty())
        throw input_error("E_NOT_COMBINATIONAL",
                          "circuit '" + src.name() + "' already contains " + std::to_string(src.flops().size()) +
                              " flops");

    Circuit out(src.name());
    std::unordered_set<std::string> taken;
    // original net id -> net id used by the combinational core in `out`
    std::vector<NetId> core(src.net_count());
    std::vector<bool> is_pi(src.net_count(), false);
    for (NetId pi : src.primary_inputs()) is_pi[pi] = true;

    for (NetId n = 0; n < src.net_count(); ++n) {
        if (is_pi[n]) continue;
        core[n] = out.net(src.net_name(n));
        taken.insert(src.net_name(n));
    }
    for (std::size_t i = 0; i < src.primary_inputs().size(); ++i) {
        NetId pi = src.primary_inputs()[i];
        const std::string& name = src.net_name(pi);
        NetId pin = out.net(name);
        taken.insert(name);
        std::string qname = fresh_name(src, taken, name + "_ireg");
        taken.insert(qname);
        NetId q = out.net(qname);
        core[pi] = q;
        out.add_input(pin, src.input_locations()[i]);
        out.add_flop(pin, q, src.input_locations()[i]);
    }
    for (const Gate& g : src.gates()) {
        std::vector<NetId> ins;
        ins.reserve(g.inputs.size());
        for (NetId in : g.inputs) ins.push_back(core[in]);
        out.add_gate(g.kind, std::move(ins), core[g.output], g.location);
    }
    for (std::size_t i = 0; i < src.primary_outputs().size(); ++i) {
        NetId po = src.primary_outputs()[i];
        std::string qname = fresh_name(src, taken, src.net_name(po) + "_oreg");
        taken.insert(qname);
        NetId q = out.net(qname);
        out.add_flop(core[po], q, src.output_locations()[i]);
        out.add_output(q, src.output_locations()[i]);
    }
    return out;
}

}  // namespace setsim
