#include "setsim/techmodel.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace setsim {

namespace detail {
// Generated from data/tech/*.json at configure time.
struct BundledProfileText {
    const char* label;
    const char* json;
};
extern const BundledProfileText kBundledProfiles[];
extern const std::size_t kBundledProfileCount;
}  // namespace detail

using nlohmann::json;

std::string_view to_string(Polarity p) { return p == Polarity::PullsLow ? "pulls-low" : "pulls-high"; }

std::string_view to_string(FlopNodeClass c) {
    switch (c) {
        case FlopNodeClass::None: return "none";
        case FlopNodeClass::StateNode: return "state-node";
        case FlopNodeClass::CaptureNode: return "capture-node";
    }
    return "?";
}

std::string_view to_string(StrikeClass c) { return c == StrikeClass::Gate ? "gate" : "register"; }

bool TechProfile::has_delay(GateKind kind, std::size_t fanin) const {
    return gate_delay.count({kind, fanin}) || gate_delay.count({kind, 0});
}

double TechProfile::delay(GateKind kind, std::size_t fanin) const {
    if (auto it = gate_delay.find({kind, fanin}); it != gate_delay.end()) return it->second;
    if (auto it = gate_delay.find({kind, 0}); it != gate_delay.end()) return it->second;
    throw input_error("E_PROFILE", "profile '" + node_label + "' has no gate_delay entry for " +
                                       std::string(to_string(kind)) + std::to_string(fanin));
}

// ---------------------------------------------------------------------------
// Loading

namespace {

[[noreturn]] void profile_error(const std::string& msg) { throw input_error("E_PROFILE", msg); }

const json& require(const json& doc, const char* field) {
    if (!doc.contains(field)) profile_error(std::string("missing field ") + field);
    return doc.at(field);
}

double positive_number(const json& doc, const char* field, const char* what) {
    const json& v = require(doc, field);
    if (!v.is_number()) profile_error(std::string("field ") + field + " must be a number");
    double x = v.get<double>();
    if (!(x > 0.0)) profile_error(std::string("non-positive ") + what + " in field " + field);
    return x;
}

// "NAND2" -> (NAND, 2); "NOT" -> (NOT, 0)
std::pair<GateKind, std::size_t> parse_delay_key(const std::string& key) {
    std::size_t split = key.size();
    while (split > 0 && std::isdigit(static_cast<unsigned char>(key[split - 1]))) --split;
    auto kind = gate_kind_from_string(key.substr(0, split));
    if (!kind) profile_error("unknown gate kind key '" + key + "' in gate_delay");
    std::size_t fanin = split < key.size() ? std::stoul(key.substr(split)) : 0;
    return {*kind, fanin};
}

Polarity parse_polarity(const json& v) {
    std::string s = v.get<std::string>();
    if (s == "pulls-low") return Polarity::PullsLow;
    if (s == "pulls-high") return Polarity::PullsHigh;
    profile_error("unknown polarity '" + s + "'");
}

FlopNodeClass parse_node_class(const std::string& s) {
    if (s == "none") return FlopNodeClass::None;
    if (s == "state-node") return FlopNodeClass::StateNode;
    if (s == "capture-node") return FlopNodeClass::CaptureNode;
    profile_error("unknown ff_node_class '" + s + "'");
}

std::vector<DrainTemplate> parse_sites(const json& list, const std::string& cell, bool is_flop) {
    if (!list.is_array() || list.empty()) profile_error("drain_spec." + cell + " must be a non-empty array");
    std::vector<DrainTemplate> out;
    for (const json& site : list) {
        DrainTemplate t;
        t.area = positive_number(site, "area", "area");
        t.polarity = parse_polarity(require(site, "polarity"));
        t.node_class = parse_node_class(site.value("ff_node_class", std::string("none")));
        if (is_flop && t.node_class == FlopNodeClass::None)
            profile_error("drain_spec.DFF sites need ff_node_class state-node or capture-node");
        if (!is_flop && t.node_class != FlopNodeClass::None)
            profile_error("drain_spec." + cell + " is combinational; ff_node_class must be none");
        out.push_back(t);
    }
    return out;
}

}  // namespace

TechProfile load_profile(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        profile_error(std::string("malformed profile JSON: ") + e.what());
    }
    if (!doc.is_object()) profile_error("profile must be a JSON object");

    TechProfile p;
    try {
        p.node_label = require(doc, "node_label").get<std::string>();
        const json& delays = require(doc, "gate_delay");
        if (!delays.is_object()) profile_error("gate_delay must be an object");
        for (const auto& [key, value] : delays.items()) {
            auto k = parse_delay_key(key);
            if (!value.is_number()) profile_error("gate_delay." + key + " must be a number");
            double d = value.get<double>();
            if (!(d > 0.0)) profile_error("non-positive delay for gate_delay." + key);
            p.gate_delay[k] = d;
        }
        p.ff_setup = positive_number(doc, "ff_setup", "delay");
        p.ff_hold = positive_number(doc, "ff_hold", "delay");
        p.ff_clk_to_q = positive_number(doc, "ff_clk_to_q", "delay");
        p.clock_margin = positive_number(doc, "clock_margin", "delay");
        p.glitch_width = positive_number(doc, "glitch_width", "width");
        const json& theta = require(doc, "filter_threshold");
        if (!theta.is_number() || theta.get<double>() < 0.0) profile_error("filter_threshold must be >= 0");
        p.filter_threshold = theta.get<double>();

        const json& drains = require(doc, "drain_spec");
        if (!drains.is_object()) profile_error("drain_spec must be an object");
        for (const auto& [key, value] : drains.items()) {
            if (key == "DFF") {
                p.flop_drains = parse_sites(value, key, true);
                continue;
            }
            auto kind = gate_kind_from_string(key);
            if (!kind) profile_error("unknown gate kind key '" + key + "' in drain_spec");
            p.gate_drains[*kind] = parse_sites(value, key, false);
        }
        if (p.flop_drains.empty()) profile_error("missing field drain_spec.DFF");
    } catch (const json::exception& e) {
        profile_error(std::string("bad profile field type: ") + e.what());
    }
    return p;
}

TechProfile load_profile_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("E_IO", "cannot open profile '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_profile(ss.str());
}

std::string profile_to_json(const TechProfile& p) {
    json doc;
    doc["node_label"] = p.node_label;
    json delays = json::object();
    for (const auto& [key, d] : p.gate_delay)
        delays[std::string(to_string(key.first)) + (key.second ? std::to_string(key.second) : "")] = d;
    doc["gate_delay"] = delays;
    doc["ff_setup"] = p.ff_setup;
    doc["ff_hold"] = p.ff_hold;
    doc["ff_clk_to_q"] = p.ff_clk_to_q;
    doc["clock_margin"] = p.clock_margin;
    doc["glitch_width"] = p.glitch_width;
    doc["filter_threshold"] = p.filter_threshold;
    auto sites = [](const std::vector<DrainTemplate>& list) {
        json arr = json::array();
        for (const DrainTemplate& t : list)
            arr.push_back({{"area", t.area},
                           {"polarity", std::string(to_string(t.polarity))},
                           {"ff_node_class", std::string(to_string(t.node_class))}});
        return arr;
    };
    json drains = json::object();
    for (const auto& [kind, list] : p.gate_drains) drains[std::string(to_string(kind))] = sites(list);
    drains["DFF"] = sites(p.flop_drains);
    doc["drain_spec"] = drains;
    return doc.dump(2);
}

std::vector<std::string> bundled_profile_names() {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < detail::kBundledProfileCount; ++i) names.emplace_back(detail::kBundledProfiles[i].label);
    return names;
}

TechProfile bundled_profile(std::string_view label) {
    for (std::size_t i = 0; i < detail::kBundledProfileCount; ++i)
        if (label == detail::kBundledProfiles[i].label) return load_profile(detail::kBundledProfiles[i].json);
    throw input_error("E_PROFILE", "no bundled profile named '" + std::string(label) + "'");
}

TechProfile resolve_profile(const std::string& label_or_path) {
    for (const auto& name : bundled_profile_names())
        if (name == label_or_path) return bundled_profile(name);
    return load_profile_file(label_or_path);
}

void check_profile_covers(const Circuit& c, const TechProfile& p) {
    for (const Gate& g : c.gates()) {
        if (!p.has_delay(g.kind, g.inputs.size()))
            throw input_error("E_PROFILE", "profile '" + p.node_label + "' has no gate_delay entry for " +
                                               std::string(to_string(g.kind)) + std::to_string(g.inputs.size()));
        if (!p.gate_drains.count(g.kind))
            throw input_error("E_PROFILE", "profile '" + p.node_label + "' has no drain_spec entry for " +
                                               std::string(to_string(g.kind)));
    }
}

// ---------------------------------------------------------------------------
// Drains

DrainTable::DrainTable(std::vector<DrainSite> sites) : sites_(std::move(sites)) {
    for (const DrainSite& s : sites_) {
        if (!(s.area > 0.0)) throw invariant_error("E_DRAIN", "drain site with non-positive area");
        (s.cell_class == StrikeClass::Gate ? gate_area_ : flop_area_) += s.area;
    }
    if (sites_.empty() || !(total_area() > 0.0))
        throw input_error("E_EMPTY_DRAINS", "drain table is empty; nothing can be struck");
    cumulative_.resize(sites_.size());
    double running = 0.0;
    const double total = total_area();
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        running += sites_[i].area;
        cumulative_[i] = running / total;
    }
    cumulative_.back() = 1.0;
}

std::size_t DrainTable::pick(double u) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
}

std::string DrainTable::site_id(const Circuit& c, std::size_t i) const {
    const DrainSite& s = sites_.at(i);
    const std::string& cell = s.cell_class == StrikeClass::Gate ? c.gate_id(s.cell) : c.flop_id(s.cell);
    return cell + "/" + std::to_string(s.site);
}

DrainTable enumerate_drains(const Circuit& c, const TechProfile& p) {
    std::vector<DrainSite> sites;
    for (std::size_t g = 0; g < c.gates().size(); ++g) {
        GateKind kind = c.gates()[g].kind;
        auto it = p.gate_drains.find(kind);
        if (it == p.gate_drains.end())
            throw input_error("E_PROFILE", "profile '" + p.node_label + "' has no drain_spec entry for " +
                                               std::string(to_string(kind)));
        for (std::size_t s = 0; s < it->second.size(); ++s) {
            const DrainTemplate& t = it->second[s];
            sites.push_back({StrikeClass::Gate, g, s, t.area, t.polarity, FlopNodeClass::None});
        }
    }
    for (std::size_t f = 0; f < c.flops().size(); ++f)
        for (std::size_t s = 0; s < p.flop_drains.size(); ++s) {
            const DrainTemplate& t = p.flop_drains[s];
            sites.push_back({StrikeClass::Register, f, s, t.area, t.polarity, t.node_class});
        }
    return DrainTable(std::move(sites));
}

// ---------------------------------------------------------------------------
// Timing

TimingSummary analyze_timing(const Circuit& c, const Topology& topo, const TechProfile& p) {
    check_profile_covers(c, p);
    TimingSummary ts;
    ts.arrival.assign(c.net_count(), 0.0);
    double latest = 0.0;
    for (std::size_t g : topo.order()) {
        const Gate& gate = c.gates()[g];
        double in = 0.0;
        for (NetId n : gate.inputs) in = std::max(in, ts.arrival[n]);
        ts.arrival[gate.output] = in + p.delay(gate.kind, gate.inputs.size());
        latest = std::max(latest, ts.arrival[gate.output]);
    }
    for (const Flop& f : c.flops()) ts.critical_path = std::max(ts.critical_path, ts.arrival[f.data]);
    ts.settle_bound = p.ff_clk_to_q + latest;
    ts.period = p.ff_clk_to_q + ts.critical_path + p.ff_setup + p.clock_margin;
    if (!(p.ff_setup + p.ff_hold < ts.period))
        throw invariant_error("E_TIMING", "setup + hold does not fit in the clock period");
    return ts;
}

double clock_period(const Circuit& c, const TechProfile& p) {
    Topology topo(c);
    return analyze_timing(c, topo, p).period;
}

}  // namespace setsim
