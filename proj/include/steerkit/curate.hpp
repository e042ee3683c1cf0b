#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace steerkit::curate {

struct Prompt {
  std::string id;
  std::string instruction;
  std::optional<std::string> input;
};

/// One candidate generation for a prompt, annotated with its source and
/// (once computed) the targeted metric's value.
struct Candidate {
  std::string prompt_id;
  std::string source_model;
  int sample_index = 0;
  std::string text;
  std::optional<double> metric_value;
};

enum class Direction { kMaximize, kMinimize };

/// Names the profiling function driving selection. Textual metrics
/// default to maximize, toxicity to minimize.
struct MetricSpec {
  std::string name;  // token_count | mtld | gunning_fog | rix | toxicity | custom
  Direction direction = Direction::kMaximize;

  static MetricSpec with_default_direction(const std::string& name);
};

enum class PolicyKind { kBestOfK, kUniformRandom };

struct SelectionPolicy {
  PolicyKind kind = PolicyKind::kBestOfK;
  std::uint64_t seed = 0;  // uniform_random only
};

/// Picks one candidate from the pool. Best-of-k returns the first index
/// attaining the extremum for the metric's direction; uniform_random is
/// a seeded draw. Throws ValidationError on an empty pool or, under
/// best-of-k, on a candidate without a metric value.
std::size_t select(std::span<const Candidate> pool, const MetricSpec& spec,
                   const SelectionPolicy& policy);

struct CuratedRecord {
  std::string prompt_id;
  std::string instruction;
  std::optional<std::string> input;
  std::string output;
  std::string source_model;
  int sample_index = 0;
  double metric_value = 0.0;
};

struct CuratedDataset {
  std::vector<CuratedRecord> records;  // ordered by prompt id
  MetricSpec metric;
  SelectionPolicy policy;
  std::vector<std::string> pool_sources;  // distinct source labels seen
  std::int64_t candidate_count = 0;
};

/// Scoring hook for metrics that need an external scorer (toxicity).
using TextScorer = std::function<double(const std::string&)>;

/// Fills in missing metric values. Textual metrics are computed in
/// place; toxicity needs a scorer. Throws ValidationError when a value
/// cannot be computed, naming the candidate.
void ensure_metric_values(std::vector<Candidate>& candidates,
                          const MetricSpec& spec,
                          const TextScorer& scorer = nullptr);

/// Runs selection for every prompt over its candidate pool. Pools are
/// canonically ordered by (source label, sample index) before selection
/// so ties break the same way on every run; the per-prompt random seed
/// derives from (policy seed, prompt id) so parallelism cannot change a
/// draw. OpenMP-parallel across prompts.
/// Throws ValidationError listing prompts without candidates.
CuratedDataset curate_dataset(const std::vector<Prompt>& prompts,
                              std::vector<Candidate> candidates,
                              const MetricSpec& spec,
                              const SelectionPolicy& policy,
                              const TextScorer& scorer = nullptr);

/// Serial reference implementation, kept for tests and the benchmark.
CuratedDataset curate_dataset_serial(const std::vector<Prompt>& prompts,
                                     std::vector<Candidate> candidates,
                                     const MetricSpec& spec,
                                     const SelectionPolicy& policy,
                                     const TextScorer& scorer = nullptr);

struct ScoredPrompt {
  std::string id;
  std::string text;
  double toxicity = 0.0;
};

struct MitigationSplit {
  std::vector<ScoredPrompt> train;
  std::vector<ScoredPrompt> test;
  std::int64_t train_toxic = 0;    // train prompts >= toxic_threshold
  std::int64_t train_neutral = 0;  // train prompts below it
};

/// Builds the toxicity-mitigation train/test split: a seeded sample of
/// high-toxicity test prompts, then every remaining prompt above the
/// toxic threshold plus a capped seeded sample of neutral prompts.
/// Throws ValidationError when the high-toxicity pool cannot fill the
/// test set, stating the shortfall.
MitigationSplit build_mitigation_split(const std::vector<ScoredPrompt>& prompts,
                                       std::int64_t test_size,
                                       double toxic_threshold,
                                       double test_threshold,
                                       std::int64_t neutral_cap,
                                       std::uint64_t seed);

}  // namespace steerkit::curate
