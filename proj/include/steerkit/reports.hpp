#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "steerkit/textprof.hpp"

namespace steerkit::reports {

inline constexpr const char* kToolName = "steerkit";
inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance block attached to every JSON report: the command that
/// produced it and the global seed all randomness flowed from.
nlohmann::ordered_json provenance(const std::string& command,
                                  std::uint64_t seed);

/// {metrics: {name: {mean, stddev, count, skipped}}, record_count,
/// provenance}.
nlohmann::ordered_json profile_report(const textprof::CorpusProfile& profile,
                                      const std::string& command,
                                      std::uint64_t seed);

/// CSV twin of profile_report: metric,mean,stddev,count,skipped.
std::string profile_csv(const textprof::CorpusProfile& profile);

/// Toxicity aggregates. Scorers work on [0,1]; reports use the 0-100
/// percent scale, so the conversion lives here and only here.
nlohmann::ordered_json toxicity_report(double expected_max_toxicity,
                                       double toxicity_probability,
                                       double threshold,
                                       std::int64_t prompt_count,
                                       std::int64_t generation_count,
                                       std::uint64_t seed);

/// {benchmark: {categories: {...}, aggregate}} for whichever benchmark
/// maps are present. Stereotype-style benchmarks aggregate by category
/// mean; BBQ aggregates by sum so diffs of aggregates equal sums of
/// per-category diffs.
nlohmann::ordered_json bias_report(
    const std::optional<std::map<std::string, double>>& stereoset,
    const std::optional<std::map<std::string, double>>& crows_pairs,
    const std::optional<std::map<std::string, double>>& bbq_ambiguous,
    std::uint64_t seed);

nlohmann::ordered_json calibration_report(double ece, int n_bins,
                                          std::int64_t record_count,
                                          std::uint64_t seed);

}  // namespace steerkit::reports
