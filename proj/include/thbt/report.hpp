// SPDX-License-Identifier: Apache-2.0
//
// CSV and JSON output. CSV uses ',' separators, '.' decimals, '\n' line
// ends and RFC 4180 quoting; the column order is fixed and documented in
// README.md.
#pragma once

#include "thbt/harness.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace thbt {

/// Quotes a field if it contains ',', '"', CR or LF.
std::string csv_field(std::string_view text);
/// Shortest round-trip decimal; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double x);

std::vector<std::string> summary_header(const std::vector<double>& cdf_grid);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows, const std::vector<double>& cdf_grid);

std::vector<std::string> trials_header();
void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& trials);

/// Config echo, conventions and one entry per summary row.
nlohmann::json summary_json(const ExperimentConfig& config, const GaussianFit& fit,
                            const std::vector<SummaryRow>& rows);

} // namespace thbt
