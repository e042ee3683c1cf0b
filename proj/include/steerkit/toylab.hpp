#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "steerkit/curate.hpp"
#include "steerkit/sources.hpp"
#include "steerkit/textprof.hpp"

namespace steerkit::toylab {

/// Add-alpha n-gram language model over lowercased word tokens, the
/// smallest student for which "train on a curated dataset, then measure
/// what it inherited" runs in milliseconds. Sentences are padded with
/// start sentinels and close on an end sentinel; a separate Bernoulli
/// tally of sentence-to-sentence continuations lets document length
/// carry over from the training corpus too.
struct NGramModel {
  int order = 3;
  double alpha = 0.1;
  std::vector<std::string> vocabulary;  // sorted distinct words
  std::map<std::vector<std::uint32_t>, std::map<std::uint32_t, std::uint64_t>>
      counts;
  std::uint64_t continue_count = 0;  // sentences followed by another
  std::uint64_t end_count = 0;       // sentences that closed a document
  bool fitted = false;

  std::uint32_t end_id() const {
    return static_cast<std::uint32_t>(vocabulary.size());
  }
  std::uint32_t start_id() const {
    return static_cast<std::uint32_t>(vocabulary.size()) + 1;
  }

  /// Smoothed next-token distribution for a context of order-1 ids:
  /// indices 0..V-1 are vocabulary words, index V the end sentinel.
  /// Sums to 1 for any context once fitted (alpha > 0) or for any
  /// context with observations (alpha = 0).
  std::vector<double> conditional(
      const std::vector<std::uint32_t>& context) const;

  /// P(another sentence follows), alpha-smoothed over the tallies.
  double continuation_probability() const;
};

/// Exact n-gram tallies over the segmented corpus; the smoothed
/// conditionals are the closed-form maximizer of add-alpha-regularized
/// log-likelihood. Records without any word token are ignored.
/// Throws ValidationError on an empty corpus, order < 2 or alpha < 0.
NGramModel fit(const std::vector<std::string>& corpus, int order = 3,
               double alpha = 0.1);

/// Ancestral sampling: words until the end sentinel closes a sentence,
/// sentences until the continuation coin says stop or max_tokens is
/// reached. Deterministic in (model, seed).
/// Throws ValidationError on an unfitted model or max_tokens < 1.
std::string generate(const NGramModel& model, std::uint64_t seed,
                     std::int64_t max_tokens = 512);

/// Configuration for the end-to-end inheritance demo. All randomness
/// derives from seed; per-source generation seeds and per-sample
/// evaluation seeds are derived, so arms stay comparable across runs.
struct DemoConfig {
  std::uint64_t seed = 0;
  curate::MetricSpec metric = curate::MetricSpec::with_default_direction(
      "token_count");
  std::vector<sources::SourceConfig> sources;  // mock sources only
  std::int64_t n_prompts = 200;
  std::int64_t pool_size = 4;  // candidates per prompt, pooled over sources
  int student_order = 3;
  double student_alpha = 0.01;
  std::int64_t eval_samples = 200;
  std::int64_t eval_max_tokens = 512;
  double noise_band = 0.2;  // |relative gap| bound for identical sources

  void validate() const;
};

/// One arm's outcome: the dataset the student saw and what the student
/// then produced.
struct ArmReport {
  double teacher_metric_mean = 0.0;       // over the curated dataset
  std::map<std::string, double> student_profile;  // metric -> mean
  double student_metric_value = 0.0;      // targeted metric only
};

struct DemoReport {
  DemoConfig config;
  ArmReport best_of_k;
  ArmReport uniform_random;
  /// profile_diff(uniform_random student, best_of_k student) flattened
  /// to metric -> {before, after, delta, percent_change?}.
  nlohmann::ordered_json diff;
  double delta = 0.0;          // steered minus baseline, targeted metric
  std::optional<double> relative_gap;  // delta / |baseline|, absent at 0
  bool steered_beats_baseline = false;

  nlohmann::ordered_json to_json() const;
};

/// Pools mock generations per prompt, curates a best-of-k and a
/// uniform-random dataset from the same pools, fits one student per
/// dataset, samples eval_samples generations from each and profiles
/// them. The report carries both arms plus the student-vs-student diff.
DemoReport demo_run(const DemoConfig& config);

}  // namespace steerkit::toylab
