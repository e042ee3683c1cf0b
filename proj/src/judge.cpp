#include "steerkit/judge.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "steerkit/errors.hpp"
#include "steerkit/io.hpp"

namespace steerkit::judge {

namespace {

struct PairKey {
  std::string prompt_id;
  std::string first_model;   // lexicographically smaller
  std::string second_model;

  bool operator<(const PairKey& o) const {
    if (prompt_id != o.prompt_id) return prompt_id < o.prompt_id;
    if (first_model != o.first_model) return first_model < o.first_model;
    return second_model < o.second_model;
  }
};

struct VoteTally {
  double first_votes = 0.0;
  std::int64_t total = 0;
};

/// Collapses each comparison to one side by majority vote; 50/50 splits
/// are dropped. Handles both swapped-order duplicates and multiple
/// human annotations with the same rule.
std::map<PairKey, bool> aggregate(const std::vector<JudgmentRecord>& records) {
  std::map<PairKey, VoteTally> tallies;
  for (const auto& r : records) {
    if (r.model_a == r.model_b) {
      throw ValidationError("judgment compares a model with itself: " +
                            r.model_a + " on prompt " + r.prompt_id);
    }
    PairKey key{r.prompt_id, std::min(r.model_a, r.model_b),
                std::max(r.model_a, r.model_b)};
    const std::string& chosen = r.choice == Choice::kA ? r.model_a : r.model_b;
    auto& tally = tallies[key];
    ++tally.total;
    if (chosen == key.first_model) tally.first_votes += 1.0;
  }
  std::map<PairKey, bool> sides;
  for (const auto& [key, tally] : tallies) {
    const double p = tally.first_votes / static_cast<double>(tally.total);
    if (p == 0.5) continue;
    sides[key] = p > 0.5;
  }
  return sides;
}

}  // namespace

double agreement_rate(const std::vector<JudgmentRecord>& a,
                      const std::vector<JudgmentRecord>& b) {
  const auto sides_a = aggregate(a);
  const auto sides_b = aggregate(b);

  // A prompt present in both sets must cover the same model pairs;
  // anything else indicates the sets were joined on the wrong corpus.
  auto collect_pairs = [](const std::vector<JudgmentRecord>& records) {
    std::map<std::string, std::set<std::pair<std::string, std::string>>> pairs;
    for (const auto& r : records) {
      pairs[r.prompt_id].insert({std::min(r.model_a, r.model_b),
                                 std::max(r.model_a, r.model_b)});
    }
    return pairs;
  };
  const auto pairs_a = collect_pairs(a);
  const auto pairs_b = collect_pairs(b);
  for (const auto& [prompt_id, pairs] : pairs_a) {
    auto it = pairs_b.find(prompt_id);
    if (it != pairs_b.end() && it->second != pairs) {
      throw ValidationError(
          "agreement_rate: prompt '" + prompt_id +
          "' covers different model pairs in the two judgment sets");
    }
  }

  std::int64_t shared = 0;
  std::int64_t matched = 0;
  for (const auto& [key, side] : sides_a) {
    auto it = sides_b.find(key);
    if (it == sides_b.end()) continue;
    ++shared;
    if (it->second == side) ++matched;
  }
  if (shared == 0) {
    throw ValidationError("agreement_rate: no shared comparison pairs");
  }
  return 100.0 * static_cast<double>(matched) / static_cast<double>(shared);
}

std::vector<std::vector<double>> agreement_matrix(
    const std::vector<std::vector<JudgmentRecord>>& sets) {
  const std::size_t n = sets.size();
  std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 100.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      matrix[i][j] = matrix[j][i] = agreement_rate(sets[i], sets[j]);
    }
  }
  return matrix;
}

double length_bias(const std::vector<JudgmentRecord>& judgments) {
  std::int64_t unequal = 0;
  std::int64_t longer_won = 0;
  for (const auto& r : judgments) {
    if (r.len_a == r.len_b) continue;
    ++unequal;
    const std::int64_t chosen = r.choice == Choice::kA ? r.len_a : r.len_b;
    const std::int64_t other = r.choice == Choice::kA ? r.len_b : r.len_a;
    if (chosen > other) ++longer_won;
  }
  if (unequal == 0) {
    throw UndefinedMetricError("length_bias: all pairs are equal-length");
  }
  return 100.0 * static_cast<double>(longer_won) / static_cast<double>(unequal);
}

std::map<std::string, double> family_preference(
    const std::vector<JudgmentRecord>& judgments,
    const std::map<std::string, std::string>& family_of) {
  auto family = [&](const std::string& model) -> const std::string& {
    auto it = family_of.find(model);
    if (it == family_of.end()) {
      throw ValidationError("family_preference: model '" + model +
                            "' has no family mapping");
    }
    return it->second;
  };

  struct Tally {
    std::int64_t cross = 0;
    std::int64_t won = 0;
  };
  std::map<std::string, Tally> tallies;
  for (const auto& r : judgments) {
    const std::string& fam_a = family(r.model_a);
    const std::string& fam_b = family(r.model_b);
    tallies[fam_a];
    tallies[fam_b];
    if (fam_a == fam_b) continue;  // no cross-family signal
    const std::string& chosen_family = r.choice == Choice::kA ? fam_a : fam_b;
    for (const std::string* fam : {&fam_a, &fam_b}) {
      auto& t = tallies[*fam];
      ++t.cross;
      if (chosen_family == *fam) ++t.won;
    }
  }
  std::map<std::string, double> preferences;
  for (const auto& [fam, t] : tallies) {
    if (t.cross == 0) continue;
    preferences[fam] =
        100.0 * static_cast<double>(t.won) / static_cast<double>(t.cross);
  }
  return preferences;
}

std::map<std::string, DiffEntry> profile_diff(const ModelProfile& before,
                                              const ModelProfile& after) {
  std::map<std::string, DiffEntry> diff;
  for (const auto& [metric, before_value] : before) {
    auto it = after.find(metric);
    if (it == after.end()) continue;
    DiffEntry entry;
    entry.before = before_value;
    entry.after = it->second;
    entry.delta = it->second - before_value;
    if (before_value != 0.0) {
      entry.percent_change = 100.0 * entry.delta / std::abs(before_value);
    }
    diff[metric] = entry;
  }
  if (diff.empty()) {
    throw ValidationError("profile_diff: no shared metrics");
  }
  return diff;
}

std::string diff_csv(const std::map<std::string, DiffEntry>& diff) {
  std::string out = "metric,before,after,delta,percent_change\n";
  for (const auto& [metric, entry] : diff) {
    out += csv_field(metric) + ',' + format_double(entry.before) + ',' +
           format_double(entry.after) + ',' + format_double(entry.delta) + ',';
    if (entry.percent_change) out += format_double(*entry.percent_change);
    out += '\n';
  }
  return out;
}

std::string diff_svg(const std::map<std::string, DiffEntry>& diff) {
  constexpr int kWidth = 720;
  constexpr int kRowHeight = 26;
  constexpr int kLabelWidth = 180;
  constexpr int kChartHalf = (kWidth - kLabelWidth - 80) / 2;
  const int center_x = kLabelWidth + kChartHalf;
  const int height = kRowHeight * static_cast<int>(diff.size()) + 30;

  double max_abs = 1.0;
  for (const auto& [metric, entry] : diff) {
    if (entry.percent_change) {
      max_abs = std::max(max_abs, std::abs(*entry.percent_change));
    }
  }

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "  <line x1=\"" << center_x << "\" y1=\"10\" x2=\"" << center_x
      << "\" y2=\"" << height - 10 << "\" stroke=\"#888\"/>\n";
  int row = 0;
  for (const auto& [metric, entry] : diff) {
    const int y = 20 + row * kRowHeight;
    svg << "  <text x=\"8\" y=\"" << y + 12 << "\">" << metric << "</text>\n";
    if (entry.percent_change) {
      const double pct = *entry.percent_change;
      const int bar = static_cast<int>(std::lround(std::abs(pct) / max_abs *
                                                   kChartHalf));
      const int x = pct >= 0 ? center_x : center_x - bar;
      const char* color = pct >= 0 ? "#2e7d32" : "#c62828";
      svg << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\""
          << std::max(bar, 1) << "\" height=\"" << kRowHeight - 8
          << "\" fill=\"" << color << "\"/>\n";
      svg << "  <text x=\"" << (pct >= 0 ? center_x + bar + 6
                                         : center_x - bar - 52)
          << "\" y=\"" << y + 12 << "\">" << format_double(pct)
          << "%</text>\n";
    } else {
      svg << "  <text x=\"" << center_x + 6 << "\" y=\"" << y + 12
          << "\">n/a</text>\n";
    }
    ++row;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace steerkit::judge
