#include "setsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace setsim {

std::optional<std::pair<double, double>> Estimate::ci95() const {
    if (!value || !stderr_value) return std::nullopt;
    return std::pair{std::max(0.0, *value - 1.96 * *stderr_value), std::min(1.0, *value + 1.96 * *stderr_value)};
}

namespace {

constexpr std::array<Outcome, 4> kPaperColumns = {Outcome::NN, Outcome::NF, Outcome::FN, Outcome::FF};

std::string cell(std::optional<double> v) { return v ? format_number(*v) : "-"; }

std::vector<Outcome> columns(bool paper_columns) {
    if (paper_columns) return {kPaperColumns.begin(), kPaperColumns.end()};
    return {kAllOutcomes.begin(), kAllOutcomes.end()};
}

std::string strike_label(StrikeClass c) { return std::string(to_string(c)) + "-strike"; }

}  // namespace

std::vector<OracleComparison> compare_to_oracle(const CampaignStats& mc, const CampaignStats& ex) {
    std::vector<OracleComparison> out;
    for (StrikeClass c : {StrikeClass::Gate, StrikeClass::Register}) {
        const ClassTally& m = mc.of(c);
        const ClassTally& e = ex.of(c);
        if (m.samples == 0 || e.samples == 0) continue;
        for (Outcome o : kAllOutcomes) {
            OracleComparison row;
            row.strike_class = c;
            row.outcome = o;
            row.monte_carlo = *m.probability(o);
            row.exhaustive = std::clamp(*e.probability(o), 0.0, 1.0);
            row.stderr_value = standard_error(row.exhaustive, m.samples);
            const double diff = row.monte_carlo - row.exhaustive;
            if (row.stderr_value > 0.0)
                row.z = diff / row.stderr_value;
            else
                row.z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
            out.push_back(row);
        }
    }
    return out;
}

ReportBundle make_report(const CampaignStats& stats, const std::optional<CampaignStats>& oracle) {
    ReportBundle r;
    r.stats = stats;
    for (StrikeClass c : {StrikeClass::Gate, StrikeClass::Register}) {
        const ClassTally& t = stats.of(c);
        OutcomeRow& row = r.rows[static_cast<std::size_t>(c)];
        row.strike_class = c;
        row.samples = t.samples;
        for (Outcome o : kAllOutcomes) row.outcomes[static_cast<std::size_t>(o)] = {t.probability(o), t.stderr_of(o)};
        row.flip = {t.flip_probability(), t.flip_stderr()};
    }
    r.metrics = derive_metrics(stats);
    if (oracle) {
        r.oracle = oracle;
        r.comparison = compare_to_oracle(stats, *oracle);
    }
    return r;
}

void write_outcome_csv(std::ostream& os, const ReportBundle& r, bool paper_columns) {
    const auto cols = columns(paper_columns);
    os << "circuit,strike_class,samples";
    for (Outcome o : cols) os << ",P_" << to_string(o) << ",SE_" << to_string(o);
    os << ",P_flip,SE_flip,CI95_low_flip,CI95_high_flip\n";
    for (const OutcomeRow& row : r.rows) {
        os << r.stats.circuit << ',' << to_string(row.strike_class) << ',' << row.samples;
        for (Outcome o : cols) {
            const Estimate& e = row.outcomes[static_cast<std::size_t>(o)];
            os << ',' << cell(e.value) << ',' << cell(e.stderr_value);
        }
        auto ci = row.flip.ci95();
        os << ',' << cell(row.flip.value) << ',' << cell(row.flip.stderr_value) << ','
           << cell(ci ? std::optional(ci->first) : std::nullopt) << ','
           << cell(ci ? std::optional(ci->second) : std::nullopt) << '\n';
    }
}

void write_metrics_csv(std::ostream& os, const ReportBundle& r) {
    os << "circuit,profile,seed,stop_reason,total_samples,P_m,SE_P_m,P_GM,SE_P_GM,P_RM,SE_P_RM\n";
    const Metrics& m = r.metrics;
    os << r.stats.circuit << ',' << r.stats.profile_label << ',' << r.stats.rng_seed << ','
       << to_string(r.stats.stop_reason) << ',' << r.stats.total_samples();
    for (const Metric* x : {&m.p_m, &m.p_gm, &m.p_rm}) os << ',' << cell(x->value()) << ',' << cell(x->standard_error());
    os << '\n';
}

void write_comparison_csv(std::ostream& os, const ReportBundle& r) {
    os << "strike_class,class,P_monte_carlo,P_exhaustive,SE,z,within_3se\n";
    for (const OracleComparison& c : r.comparison)
        os << to_string(c.strike_class) << ',' << to_string(c.outcome) << ',' << format_number(c.monte_carlo) << ','
           << format_number(c.exhaustive) << ',' << format_number(c.stderr_value) << ',' << format_number(c.z) << ','
           << (c.within(3.0) ? "yes" : "no") << '\n';
}

void write_text_report(std::ostream& os, const ReportBundle& r, bool paper_columns) {
    const CampaignStats& s = r.stats;
    os << "circuit        " << s.circuit << '\n'
       << "profile        " << s.profile_label << '\n'
       << "seed           " << s.rng_seed << '\n'
       << "capture        " << s.capture_policy
       << (s.capture_policy == "instant" ? "" : "  (setup/hold window resolved at random)") << '\n'
       << "clock period   " << format_number(s.period) << " ps, strikes in [" << format_number(s.settle_bound)
       << ", " << format_number(s.period) << ") ps\n"
       << "samples        " << s.total_samples() << " (gate " << s.of(StrikeClass::Gate).samples << ", register "
       << s.of(StrikeClass::Register).samples << ")\n"
       << "stop reason    " << to_string(s.stop_reason);
    if (s.stop_reason == StopReason::Exhaustive) os << " (t grid " << s.t_grid << ")";
    os << "\n\n";

    const auto cols = columns(paper_columns);
    os << "Outcome probabilities (value +/- standard error)\n";
    os << std::left << std::setw(16) << "strike";
    for (Outcome o : cols) os << std::setw(23) << ("P_" + std::string(to_string(o))) << ' ';
    os << '\n';
    for (const OutcomeRow& row : r.rows) {
        os << std::setw(16) << strike_label(row.strike_class);
        for (Outcome o : cols) {
            const Estimate& e = row.outcomes[static_cast<std::size_t>(o)];
            os << std::setw(23) << (e.value ? cell(e.value) + " +/- " + cell(e.stderr_value) : "-") << ' ';
        }
        os << '\n';
    }

    os << "\nProbability of at least one bit flip (95% interval, normal approximation)\n";
    for (const OutcomeRow& row : r.rows) {
        os << std::setw(16) << strike_label(row.strike_class);
        auto ci = row.flip.ci95();
        if (!row.flip.value)
            os << "-\n";
        else
            os << cell(row.flip.value) << " +/- " << cell(row.flip.stderr_value) << "  [" << format_number(ci->first)
               << ", " << format_number(ci->second) << "]\n";
    }

    os << "\nMultiple-flip probability given an error ('-' = no erroneous samples)\n";
    auto metric = [&](const char* name, const Metric& m) {
        os << std::setw(16) << name;
        if (!m.defined())
            os << "-\n";
        else
            os << cell(m.value()) << " +/- " << cell(m.standard_error()) << "  (" << format_number(m.numerator)
               << " / " << format_number(m.denominator) << ")\n";
    };
    metric("P_m", r.metrics.p_m);
    metric("P_GM", r.metrics.p_gm);
    metric("P_RM", r.metrics.p_rm);

    if (r.oracle) {
        os << "\nComparison with exhaustive enumeration (t grid " << r.oracle->t_grid << ")\n";
        os << std::setw(10) << "strike" << std::setw(9) << "class" << std::setw(14) << "monte-carlo" << std::setw(14)
           << "exhaustive" << std::setw(12) << "z" << '\n';
        std::size_t outside = 0;
        for (const OracleComparison& c : r.comparison) {
            os << std::setw(10) << to_string(c.strike_class) << std::setw(9) << to_string(c.outcome) << std::setw(14)
               << format_number(c.monte_carlo) << std::setw(14) << format_number(c.exhaustive) << std::setw(12)
               << format_number(c.z) << '\n';
            if (!c.within(3.0)) ++outside;
        }
        os << outside << " of " << r.comparison.size() << " probabilities outside 3 standard errors\n";
    }
}

}  // namespace setsim
