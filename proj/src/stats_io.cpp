#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "setsim/campaign.hpp"

namespace setsim {

using nlohmann::ordered_json;

std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 6);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

namespace {

std::string exact_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = line.find(sep, pos);
        out.push_back(line.substr(pos, next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

template <typename T>
T parse_field(std::string_view text, std::size_t line, const char* what) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw input_error("E_PARSE", "sample log line " + std::to_string(line) + ": bad " + what + " '" +
                                         std::string(text) + "'");
    return value;
}

constexpr std::string_view kLogHeader = "sample_index,drain,strike_class,k,t,flips_e1,flips_e2,class";

}  // namespace

void write_sample_log(std::ostream& os, std::span<const SampleRecord> log) {
    os << kLogHeader << '\n';
    for (const SampleRecord& r : log)
        os << r.index << ',' << r.drain << ',' << to_string(r.strike_class) << ',' << r.cycle << ','
           << exact_number(r.time) << ',' << r.flips_e1 << ',' << r.flips_e2 << ',' << to_string(r.outcome) << '\n';
}

std::vector<SampleRecord> read_sample_log(std::istream& is) {
    std::vector<SampleRecord> out;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line) || (++lineno, line != kLogHeader))
        throw input_error("E_PARSE", "sample log: missing or unexpected header");
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 8)
            throw input_error("E_PARSE", "sample log line " + std::to_string(lineno) + ": expected 8 fields, got " +
                                             std::to_string(f.size()));
        SampleRecord r;
        r.index = parse_field<std::uint64_t>(f[0], lineno, "sample index");
        r.drain = std::string(f[1]);
        if (f[2] == "gate")
            r.strike_class = StrikeClass::Gate;
        else if (f[2] == "register")
            r.strike_class = StrikeClass::Register;
        else
            throw input_error("E_PARSE", "sample log line " + std::to_string(lineno) + ": bad strike class '" +
                                             std::string(f[2]) + "'");
        r.cycle = parse_field<std::size_t>(f[3], lineno, "cycle");
        r.time = parse_field<double>(f[4], lineno, "time");
        r.flips_e1 = parse_field<std::uint32_t>(f[5], lineno, "flip count");
        r.flips_e2 = parse_field<std::uint32_t>(f[6], lineno, "flip count");
        auto o = outcome_from_string(f[7]);
        if (!o)
            throw input_error("E_PARSE", "sample log line " + std::to_string(lineno) + ": bad outcome '" +
                                             std::string(f[7]) + "'");
        if (*o != classify(r.flips_e1, r.flips_e2))
            throw input_error("E_PARSE", "sample log line " + std::to_string(lineno) +
                                             ": outcome does not match flip counts");
        r.outcome = *o;
        out.push_back(std::move(r));
    }
    return out;
}

CampaignStats stats_from_log(std::span<const SampleRecord> log, const CampaignStats& meta) {
    CampaignStats s = meta;
    s.tally = {};
    for (const SampleRecord& r : log) s.of(r.strike_class).add(r.outcome);
    return s;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

ordered_json optional_number(std::optional<double> v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json tally_to_json(const ClassTally& t) {
    ordered_json j;
    j["samples"] = t.samples;
    j["mass_total"] = t.mass_total;
    ordered_json counts = ordered_json::object(), mass = ordered_json::object(), prob = ordered_json::object(),
                 se = ordered_json::object();
    for (Outcome o : kAllOutcomes) {
        std::string key(to_string(o));
        counts[key] = t.count(o);
        mass[key] = t.mass[static_cast<std::size_t>(o)];
        prob[key] = optional_number(t.probability(o));
        se[key] = optional_number(t.stderr_of(o));
    }
    j["counts"] = counts;
    j["mass"] = mass;
    // derived, ignored on load
    j["probability"] = prob;
    j["stderr"] = se;
    j["flip_probability"] = optional_number(t.flip_probability());
    return j;
}

ordered_json metric_to_json(const Metric& m) {
    return {{"value", optional_number(m.value())},
            {"stderr", optional_number(m.standard_error())},
            {"numerator", m.numerator},
            {"denominator", m.denominator},
            {"denominator_samples", m.denominator_count}};
}

ClassTally tally_from_json(const ordered_json& j) {
    ClassTally t;
    t.samples = j.at("samples").get<std::uint64_t>();
    t.mass_total = j.at("mass_total").get<double>();
    for (Outcome o : kAllOutcomes) {
        std::string key(to_string(o));
        t.counts[static_cast<std::size_t>(o)] = j.at("counts").at(key).get<std::uint64_t>();
        t.mass[static_cast<std::size_t>(o)] = j.at("mass").at(key).get<double>();
    }
    return t;
}

}  // namespace

std::string stats_to_json(const CampaignStats& s) {
    ordered_json j;
    j["circuit"] = s.circuit;
    j["profile"] = s.profile_label;
    j["capture_policy"] = s.capture_policy;
    j["rng_seed"] = s.rng_seed;
    j["period_ps"] = s.period;
    j["settle_bound_ps"] = s.settle_bound;
    j["stop_reason"] = std::string(to_string(s.stop_reason));
    j["t_grid"] = s.t_grid;
    j["total_samples"] = s.total_samples();
    j["classes"] = {{"gate", tally_to_json(s.of(StrikeClass::Gate))},
                    {"register", tally_to_json(s.of(StrikeClass::Register))}};
    Metrics m = derive_metrics(s);
    j["metrics"] = {{"P_M", metric_to_json(m.p_m)}, {"P_GM", metric_to_json(m.p_gm)}, {"P_RM", metric_to_json(m.p_rm)}};
    return j.dump(2) + "\n";
}

CampaignStats stats_from_json(std::string_view text) {
    try {
        auto j = ordered_json::parse(text);
        CampaignStats s;
        s.circuit = j.at("circuit").get<std::string>();
        s.profile_label = j.at("profile").get<std::string>();
        s.capture_policy = j.at("capture_policy").get<std::string>();
        s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        s.period = j.at("period_ps").get<double>();
        s.settle_bound = j.at("settle_bound_ps").get<double>();
        const auto reason = j.at("stop_reason").get<std::string>();
        if (reason == "stderr-met")
            s.stop_reason = StopReason::StderrMet;
        else if (reason == "max-samples")
            s.stop_reason = StopReason::MaxSamples;
        else if (reason == "exhaustive")
            s.stop_reason = StopReason::Exhaustive;
        else
            throw input_error("E_PARSE", "stats: unknown stop_reason '" + reason + "'");
        s.t_grid = j.at("t_grid").get<std::size_t>();
        s.of(StrikeClass::Gate) = tally_from_json(j.at("classes").at("gate"));
        s.of(StrikeClass::Register) = tally_from_json(j.at("classes").at("register"));
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw input_error("E_PARSE", std::string("stats: ") + e.what());
    }
}

}  // namespace setsim
