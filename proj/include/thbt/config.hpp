// SPDX-License-Identifier: Apache-2.0
//
// JSON run configuration (schema version 1). Unknown keys are rejected;
// every omitted key takes the default documented in README.md.
#pragma once

#include "thbt/harness.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace thbt {

inline constexpr int kConfigVersion = 1;

struct OutputPaths {
    std::string summary_csv;
    std::string trials_csv;
    std::string summary_json;
};

struct RunConfig {
    ExperimentConfig experiment;
    OutputPaths output;
    std::string fit_cache;
};

/// Throws Error(invalid_config) / Error(invalid_scenario) on malformed or
/// inconsistent input.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration, suitable for echoing in run summaries and
/// for re-parsing.
nlohmann::json to_json(const ExperimentConfig& config);

nlohmann::json fit_to_json(const ArrayConfig& cfg, const GaussianFit& fit);
/// nullopt when the cached fit was made for a different array or domain.
std::optional<GaussianFit> fit_from_json(const nlohmann::json& doc, const ArrayConfig& cfg, FitDomain domain);

} // namespace thbt
