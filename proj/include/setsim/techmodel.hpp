#pragma once

// Technology abstraction: gate delays, strike-sensitive drain areas, the fixed
// SET glitch, flip-flop timing and clock-period computation.
//
// Units: picoseconds for every time quantity, square micrometers for areas.

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "setsim/netlist.hpp"

namespace setsim {

enum class Polarity : std::uint8_t { PullsLow, PullsHigh };
enum class FlopNodeClass : std::uint8_t { None, StateNode, CaptureNode };
enum class StrikeClass : std::uint8_t { Gate, Register };

[[nodiscard]] std::string_view to_string(Polarity p);
[[nodiscard]] std::string_view to_string(FlopNodeClass c);
[[nodiscard]] std::string_view to_string(StrikeClass c);

// A pulls-low drain can only disturb a node that currently holds 1, and vice
// versa.
[[nodiscard]] inline bool polarity_disturbs(Polarity p, bool node_value) {
    return p == Polarity::PullsLow ? node_value : !node_value;
}

struct DrainTemplate {
    double area = 0.0;
    Polarity polarity = Polarity::PullsLow;
    FlopNodeClass node_class = FlopNodeClass::None;
};

struct TechProfile {
    std::string node_label;
    // (kind, fan-in) -> delay; fan-in 0 is the fallback entry for any fan-in.
    std::map<std::pair<GateKind, std::size_t>, double> gate_delay;
    double ff_setup = 0.0;
    double ff_hold = 0.0;
    double ff_clk_to_q = 0.0;
    double clock_margin = 0.0;
    double glitch_width = 0.0;
    double filter_threshold = 1.0;
    std::map<GateKind, std::vector<DrainTemplate>> gate_drains;
    std::vector<DrainTemplate> flop_drains;

    // Throws Error(input, "E_PROFILE") when no entry covers the pair.
    [[nodiscard]] double delay(GateKind kind, std::size_t fanin) const;
    [[nodiscard]] bool has_delay(GateKind kind, std::size_t fanin) const;
};

[[nodiscard]] TechProfile load_profile(std::string_view json_text);
[[nodiscard]] TechProfile load_profile_file(const std::string& path);
[[nodiscard]] std::string profile_to_json(const TechProfile& profile);

// Profiles shipped with the library: "180nm-like" and "65nm-like".
[[nodiscard]] std::vector<std::string> bundled_profile_names();
[[nodiscard]] TechProfile bundled_profile(std::string_view label);

// Accepts either a bundled label or a path to a JSON file.
[[nodiscard]] TechProfile resolve_profile(const std::string& label_or_path);

// Throws unless the profile covers every gate kind/fan-in used by the circuit.
void check_profile_covers(const Circuit& circuit, const TechProfile& profile);

// ---------------------------------------------------------------------------
// Drains

struct DrainSite {
    StrikeClass cell_class = StrikeClass::Gate;
    std::size_t cell = 0;  // gate index or flop index
    std::size_t site = 0;  // index into the cell's template list
    double area = 0.0;
    Polarity polarity = Polarity::PullsLow;
    FlopNodeClass node_class = FlopNodeClass::None;
};

class DrainTable {
public:
    DrainTable() = default;
    explicit DrainTable(std::vector<DrainSite> sites);

    [[nodiscard]] const std::vector<DrainSite>& sites() const { return sites_; }
    [[nodiscard]] std::size_t size() const { return sites_.size(); }
    [[nodiscard]] bool empty() const { return sites_.empty(); }
    [[nodiscard]] const DrainSite& operator[](std::size_t i) const { return sites_[i]; }

    // Normalized area of site i.
    [[nodiscard]] double weight(std::size_t i) const { return sites_[i].area / total_area(); }
    [[nodiscard]] const std::vector<double>& cumulative() const { return cumulative_; }
    [[nodiscard]] double total_gate_area() const { return gate_area_; }
    [[nodiscard]] double total_flop_area() const { return flop_area_; }
    [[nodiscard]] double total_area() const { return gate_area_ + flop_area_; }

    // Maps u in [0, 1) to a site with probability proportional to its area.
    [[nodiscard]] std::size_t pick(double u) const;

    // "<cell id>/<site>" such as "G10/1".
    [[nodiscard]] std::string site_id(const Circuit& circuit, std::size_t i) const;

private:
    std::vector<DrainSite> sites_;
    std::vector<double> cumulative_;
    double gate_area_ = 0.0;
    double flop_area_ = 0.0;
};

// One site per (cell, template). Throws on a cell kind without drains or a
// circuit with zero total area.
[[nodiscard]] DrainTable enumerate_drains(const Circuit& circuit, const TechProfile& profile);

// ---------------------------------------------------------------------------
// Timing

struct TimingSummary {
    double critical_path = 0.0;  // longest source-to-register combinational delay
    double settle_bound = 0.0;   // clk-to-q plus the latest arrival on any net
    double period = 0.0;
    std::vector<double> arrival;  // per net, relative to the sources launching at 0
};

[[nodiscard]] TimingSummary analyze_timing(const Circuit& circuit, const Topology& topo, const TechProfile& profile);

// clk_to_q + critical path + setup + margin.
[[nodiscard]] double clock_period(const Circuit& circuit, const TechProfile& profile);

}  // namespace setsim
