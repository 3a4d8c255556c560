#pragma once

// Table renderers for campaign statistics: CSV for downstream plotting and a
// plain text layout for people. Undefined cells print as "-".

#include <array>
#include <cmath>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "setsim/campaign.hpp"

namespace setsim {

struct Estimate {
    std::optional<double> value;
    std::optional<double> stderr_value;

    // p +/- 1.96 se, normal approximation, clipped to [0, 1]
    [[nodiscard]] std::optional<std::pair<double, double>> ci95() const;
};

struct OutcomeRow {
    StrikeClass strike_class = StrikeClass::Gate;
    std::uint64_t samples = 0;
    std::array<Estimate, kOutcomeCount> outcomes;
    Estimate flip;  // 1 - P_NN
};

// One Monte Carlo class probability against the exhaustive value.
struct OracleComparison {
    StrikeClass strike_class = StrikeClass::Gate;
    Outcome outcome = Outcome::NN;
    double monte_carlo = 0.0;
    double exhaustive = 0.0;
    double stderr_value = 0.0;  // sqrt(p_ex (1 - p_ex) / N_mc)
    double z = 0.0;             // 0 when both agree exactly with zero stderr, inf when they differ

    [[nodiscard]] bool within(double sigmas) const { return std::abs(monte_carlo - exhaustive) <= sigmas * stderr_value; }
};

struct ReportBundle {
    CampaignStats stats;
    std::array<OutcomeRow, 2> rows;
    Metrics metrics;
    std::vector<OracleComparison> comparison;  // empty without an oracle
    std::optional<CampaignStats> oracle;
};

// Classes with no Monte Carlo samples are skipped.
[[nodiscard]] std::vector<OracleComparison> compare_to_oracle(const CampaignStats& monte_carlo,
                                                              const CampaignStats& exhaustive);

[[nodiscard]] ReportBundle make_report(const CampaignStats& stats, const std::optional<CampaignStats>& oracle = {});

// Outcome table, one row per strike class. paper_columns keeps only NN/NF/FN/FF.
void write_outcome_csv(std::ostream& os, const ReportBundle& report, bool paper_columns);
void write_metrics_csv(std::ostream& os, const ReportBundle& report);
void write_comparison_csv(std::ostream& os, const ReportBundle& report);
void write_text_report(std::ostream& os, const ReportBundle& report, bool paper_columns);

}  // namespace setsim
