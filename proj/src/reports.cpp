#include "steerkit/reports.hpp"

#include <numeric>

#include "steerkit/io.hpp"

namespace steerkit::reports {

nlohmann::ordered_json provenance(const std::string& command,
                                  std::uint64_t seed) {
  nlohmann::ordered_json p;
  p["tool"] = kToolName;
  p["version"] = kToolVersion;
  p["command"] = command;
  p["seed"] = seed;
  return p;
}

nlohmann::ordered_json profile_report(const textprof::CorpusProfile& profile,
                                      const std::string& command,
                                      std::uint64_t seed) {
  nlohmann::ordered_json metrics;
  for (const auto& [name, agg] : profile.metrics) {
    metrics[name] = {{"mean", agg.mean},
                     {"stddev", agg.stddev},
                     {"count", agg.count},
                     {"skipped", agg.skipped}};
  }
  nlohmann::ordered_json report;
  report["metrics"] = metrics;
  report["record_count"] = profile.record_count;
  report["provenance"] = provenance(command, seed);
  return report;
}

std::string profile_csv(const textprof::CorpusProfile& profile) {
  std::string out = "metric,mean,stddev,count,skipped\n";
  for (const auto& [name, agg] : profile.metrics) {
    out += csv_field(name) + ',' + format_double(agg.mean) + ',' +
           format_double(agg.stddev) + ',' + std::to_string(agg.count) + ',' +
           std::to_string(agg.skipped) + '\n';
  }
  return out;
}

nlohmann::ordered_json toxicity_report(double expected_max_toxicity,
                                       double toxicity_probability,
                                       double threshold,
                                       std::int64_t prompt_count,
                                       std::int64_t generation_count,
                                       std::uint64_t seed) {
  nlohmann::ordered_json report;
  report["expected_max_toxicity_percent"] = 100.0 * expected_max_toxicity;
  report["toxicity_probability_percent"] = 100.0 * toxicity_probability;
  report["threshold"] = threshold;
  report["prompt_count"] = prompt_count;
  report["generation_count"] = generation_count;
  report["provenance"] = provenance("toxicity", seed);
  return report;
}

namespace {

nlohmann::ordered_json benchmark_block(
    const std::map<std::string, double>& categories, bool aggregate_by_sum) {
  nlohmann::ordered_json block;
  block["categories"] = categories;
  double sum = 0.0;
  for (const auto& [category, score] : categories) sum += score;
  if (aggregate_by_sum) {
    block["aggregate"] = sum;
  } else {
    block["aggregate"] =
        categories.empty() ? 0.0
                           : sum / static_cast<double>(categories.size());
  }
  return block;
}

}  // namespace

nlohmann::ordered_json bias_report(
    const std::optional<std::map<std::string, double>>& stereoset,
    const std::optional<std::map<std::string, double>>& crows_pairs,
    const std::optional<std::map<std::string, double>>& bbq_ambiguous,
    std::uint64_t seed) {
  nlohmann::ordered_json report;
  if (stereoset) report["stereoset"] = benchmark_block(*stereoset, false);
  if (crows_pairs) report["crows_pairs"] = benchmark_block(*crows_pairs, false);
  if (bbq_ambiguous) {
    report["bbq_ambiguous"] = benchmark_block(*bbq_ambiguous, true);
  }
  report["provenance"] = provenance("bias", seed);
  return report;
}

nlohmann::ordered_json calibration_report(double ece, int n_bins,
                                          std::int64_t record_count,
                                          std::uint64_t seed) {
  nlohmann::ordered_json report;
  report["ece"] = ece;
  report["n_bins"] = n_bins;
  report["record_count"] = record_count;
  report["provenance"] = provenance("calibrate", seed);
  return report;
}

}  // namespace steerkit::reports
