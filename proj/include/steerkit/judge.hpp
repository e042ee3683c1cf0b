#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace steerkit::judge {

enum class Choice { kA, kB };

/// One pairwise decision. order marks the presentation order for
/// position-bias control runs; duplicates over the same comparison are
/// averaged away during aggregation.
struct JudgmentRecord {
  std::string prompt_id;
  std::string judge;
  std::string model_a;
  std::string model_b;
  std::int64_t len_a = 0;
  std::int64_t len_b = 0;
  Choice choice = Choice::kA;
  std::optional<int> order;
};

/// Percentage of shared comparisons decided the same way. Multiple
/// records for one (prompt, model pair) — swapped-order duplicates or
/// per-annotator human votes — collapse by majority; exact ties carry
/// no signal and drop out. A prompt judged over different model pairs
/// in the two sets is an error; so is an empty overlap.
double agreement_rate(const std::vector<JudgmentRecord>& a,
                      const std::vector<JudgmentRecord>& b);

/// Pairwise agreement over n judgment sets: symmetric, 100 diagonal.
std::vector<std::vector<double>> agreement_matrix(
    const std::vector<std::vector<JudgmentRecord>>& sets);

/// Percentage of unequal-length decisions where the longer candidate
/// won. Throws UndefinedMetricError when every pair is equal-length.
double length_bias(const std::vector<JudgmentRecord>& judgments);

/// Per family: percentage of cross-family decisions won by that family.
/// Throws ValidationError on a model without a family mapping.
std::map<std::string, double> family_preference(
    const std::vector<JudgmentRecord>& judgments,
    const std::map<std::string, std::string>& family_of);

/// Full metric row for one model.
using ModelProfile = std::map<std::string, double>;

struct DiffEntry {
  double before = 0.0;
  double after = 0.0;
  double delta = 0.0;
  std::optional<double> percent_change;  // absent when before == 0
};

/// after - before per shared metric; percent change against |before|.
/// Throws ValidationError when no metric is shared.
std::map<std::string, DiffEntry> profile_diff(const ModelProfile& before,
                                              const ModelProfile& after);

/// Static bar chart of percent changes, one bar per metric.
std::string diff_svg(const std::map<std::string, DiffEntry>& diff);

/// CSV form: metric, before, after, delta, percent_change.
std::string diff_csv(const std::map<std::string, DiffEntry>& diff);

}  // namespace steerkit::judge
