#pragma once

// Gate-level sequential netlists: the ISCAS bench reader/writer, structural
// validation, combinational wrapping and levelization.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "setsim/error.hpp"

namespace setsim {

using NetId = std::uint32_t;

enum class GateKind : std::uint8_t { And, Nand, Or, Nor, Not, Buf, Xor, Xnor };

inline constexpr GateKind kAllGateKinds[] = {GateKind::And, GateKind::Nand, GateKind::Or,
                                             GateKind::Nor, GateKind::Not,  GateKind::Buf,
                                             GateKind::Xor, GateKind::Xnor};

[[nodiscard]] std::string_view to_string(GateKind kind);
[[nodiscard]] std::optional<GateKind> gate_kind_from_string(std::string_view text);

// Evaluates a gate on fully known inputs.
[[nodiscard]] bool evaluate_gate(GateKind kind, std::span<const std::uint8_t> inputs);

// The value that forces the output of an AND/NAND/OR/NOR regardless of the
// other inputs; nullopt for kinds without one.
[[nodiscard]] std::optional<bool> controlling_value(GateKind kind);

struct SourceLocation {
    int line = 0;
    int column = 0;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, SourceLocation loc)
        : Error(ErrorKind::input, "E_PARSE",
                std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + message),
          location_(loc) {}

    [[nodiscard]] SourceLocation location() const { return location_; }

private:
    SourceLocation location_;
};

struct Gate {
    GateKind kind;
    std::vector<NetId> inputs;
    NetId output;
    SourceLocation location;
};

struct Flop {
    NetId data;
    NetId output;
    SourceLocation location;
};

// Plain structural description. Gates and flops are identified by the name of
// the net they drive. A Circuit may violate its invariants; `validate` reports
// violations and `Topology` refuses to index an invalid one.
class Circuit {
public:
    Circuit() = default;
    explicit Circuit(std::string name) : name_(std::move(name)) {}

    NetId net(std::string_view name);  // get-or-create
    [[nodiscard]] std::optional<NetId> find_net(std::string_view name) const;

    void add_input(NetId net, SourceLocation loc = {});
    void add_output(NetId net, SourceLocation loc = {});
    void add_gate(GateKind kind, std::vector<NetId> inputs, NetId output, SourceLocation loc = {});
    void add_flop(NetId data, NetId output, SourceLocation loc = {});

    [[nodiscard]] const std::string& name() const { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }

    [[nodiscard]] std::size_t net_count() const { return net_names_.size(); }
    [[nodiscard]] const std::string& net_name(NetId id) const { return net_names_.at(id); }
    [[nodiscard]] const std::vector<NetId>& primary_inputs() const { return inputs_; }
    [[nodiscard]] const std::vector<NetId>& primary_outputs() const { return outputs_; }
    [[nodiscard]] const std::vector<Gate>& gates() const { return gates_; }
    [[nodiscard]] const std::vector<Flop>& flops() const { return flops_; }

    [[nodiscard]] const std::string& gate_id(std::size_t gate) const { return net_name(gates_.at(gate).output); }
    [[nodiscard]] const std::string& flop_id(std::size_t flop) const { return net_name(flops_.at(flop).output); }

    [[nodiscard]] const std::vector<SourceLocation>& input_locations() const { return input_locs_; }
    [[nodiscard]] const std::vector<SourceLocation>& output_locations() const { return output_locs_; }

private:
    std::string name_;
    std::vector<std::string> net_names_;
    std::unordered_map<std::string, NetId> net_index_;
    std::vector<NetId> inputs_;
    std::vector<NetId> outputs_;
    std::vector<SourceLocation> input_locs_;
    std::vector<SourceLocation> output_locs_;
    std::vector<Gate> gates_;
    std::vector<Flop> flops_;
};

// ---------------------------------------------------------------------------
// Diagnostics

struct Diagnostic {
    std::string code;  // e.g. "duplicate-driver"
    std::string message;
    SourceLocation location;
};

struct Diagnostics {
    std::vector<Diagnostic> errors;
    std::vector<Diagnostic> warnings;

    [[nodiscard]] bool ok() const { return errors.empty(); }
};

// Reports every invariant violation; never throws.
[[nodiscard]] Diagnostics validate(const Circuit& circuit);

// ---------------------------------------------------------------------------
// Bench format

// Parses bench text into a Circuit without structural checks. Only syntax
// errors and unknown gate kinds throw (ParseError, with line/column).
[[nodiscard]] Circuit parse_bench_unchecked(std::string_view text, std::string name = {});

// Full parse: syntax plus duplicate-driver and undeclared-net checks.
[[nodiscard]] Circuit parse_bench(std::string_view text, std::string name = {});

[[nodiscard]] Circuit load_bench_file(const std::string& path);

[[nodiscard]] std::string to_bench(const Circuit& circuit);

// ---------------------------------------------------------------------------
// Transformations

// Registers every primary input and output. Rejects circuits with flops.
[[nodiscard]] Circuit wrap_combinational(const Circuit& circuit);

// Gate ids in a deterministic topological order of the combinational subgraph.
[[nodiscard]] std::vector<std::string> levelize(const Circuit& circuit);

// ---------------------------------------------------------------------------
// Topology: connectivity index over a valid circuit.

enum class DriverKind : std::uint8_t { None, PrimaryInput, Gate, Flop };

struct Driver {
    DriverKind kind = DriverKind::None;
    std::size_t index = 0;  // PI position, gate index or flop index
};

class Topology {
public:
    // Throws Error(invariant) if the circuit does not validate.
    explicit Topology(const Circuit& circuit);

    [[nodiscard]] std::span<const std::size_t> order() const { return order_; }
    [[nodiscard]] std::size_t rank(std::size_t gate) const { return rank_[gate]; }
    [[nodiscard]] Driver driver(NetId net) const { return drivers_[net]; }
    [[nodiscard]] std::span<const std::size_t> fanout_gates(NetId net) const;
    [[nodiscard]] std::span<const std::size_t> fanout_flops(NetId net) const;

private:
    std::vector<std::size_t> order_;
    std::vector<std::size_t> rank_;
    std::vector<Driver> drivers_;
    std::vector<std::size_t> gate_fanout_offsets_;
    std::vector<std::size_t> gate_fanout_;
    std::vector<std::size_t> flop_fanout_offsets_;
    std::vector<std::size_t> flop_fanout_;
};

}  // namespace setsim
