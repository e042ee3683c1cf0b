#include "steerkit/curate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "steerkit/errors.hpp"
#include "steerkit/rng.hpp"
#include "steerkit/textprof.hpp"

namespace steerkit::curate {

MetricSpec MetricSpec::with_default_direction(const std::string& name) {
  MetricSpec spec;
  spec.name = name;
  spec.direction =
      name == "toxicity" ? Direction::kMinimize : Direction::kMaximize;
  return spec;
}

namespace {

std::string candidate_label(const Candidate& c) {
  std::ostringstream out;
  out << "(prompt " << c.prompt_id << ", source " << c.source_model
      << ", sample " << c.sample_index << ")";
  return out.str();
}

double computed_metric_value(const Candidate& c, const MetricSpec& spec,
                             const TextScorer& scorer) {
  if (spec.name == "token_count") {
    return static_cast<double>(textprof::segment(c.text).words.size());
  }
  if (spec.name == "mtld") {
    return textprof::mtld(textprof::segment(c.text)).value;
  }
  if (spec.name == "gunning_fog") {
    return textprof::gunning_fog(textprof::segment(c.text));
  }
  if (spec.name == "rix") {
    return textprof::rix(textprof::segment(c.text));
  }
  if (spec.name == "toxicity") {
    if (!scorer) {
      throw ValidationError("metric 'toxicity' needs a scorer for candidate " +
                            candidate_label(c));
    }
    return scorer(c.text);
  }
  throw ValidationError("metric '" + spec.name +
                        "' has no built-in computation; candidate " +
                        candidate_label(c) + " lacks a metric value");
}

}  // namespace

std::size_t select(std::span<const Candidate> pool, const MetricSpec& spec,
                   const SelectionPolicy& policy) {
  if (pool.empty()) {
    throw ValidationError("select: empty candidate pool");
  }
  if (policy.kind == PolicyKind::kUniformRandom) {
    Rng rng(policy.seed);
    return static_cast<std::size_t>(rng.bounded(pool.size()));
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!pool[i].metric_value) {
      throw ValidationError("select: candidate " + candidate_label(pool[i]) +
                            " has no metric value");
    }
    if (i == 0) continue;
    const double value = *pool[i].metric_value;
    const double best_value = *pool[best].metric_value;
    const bool better = spec.direction == Direction::kMaximize
                            ? value > best_value
                            : value < best_value;
    if (better) best = i;  // ties keep the first occurrence
  }
  return best;
}

void ensure_metric_values(std::vector<Candidate>& candidates,
                          const MetricSpec& spec, const TextScorer& scorer) {
  const std::int64_t n = static_cast<std::int64_t>(candidates.size());
  std::vector<std::string> failures(candidates.size());
  // The scorer hook may do its own I/O; only built-in metrics fan out.
  const bool parallel_safe = spec.name != "toxicity" && spec.name != "custom";
#pragma omp parallel for schedule(static) if (parallel_safe)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& c = candidates[static_cast<std::size_t>(i)];
    if (c.metric_value) continue;
    try {
      c.metric_value = computed_metric_value(c, spec, scorer);
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& failure : failures) {
    if (!failure.empty()) {
      throw ValidationError(failure);
    }
  }
}

namespace {

struct GroupedPools {
  std::vector<Prompt> prompts_by_id;
  std::vector<std::vector<Candidate>> pools;  // aligned with prompts_by_id
  std::vector<std::string> sources;
};

GroupedPools group_pools(const std::vector<Prompt>& prompts,
                         std::vector<Candidate>& candidates) {
  std::set<std::string> prompt_ids;
  for (const auto& p : prompts) {
    if (!prompt_ids.insert(p.id).second) {
      throw ValidationError("duplicate prompt id: " + p.id);
    }
  }

  std::unordered_map<std::string, std::vector<Candidate>> by_prompt;
  std::set<std::string> sources;
  std::set<std::string> candidate_keys;
  for (auto& c : candidates) {
    std::string key = c.prompt_id + "\x1f" + c.source_model + "\x1f" +
                      std::to_string(c.sample_index);
    if (!candidate_keys.insert(key).second) {
      throw ValidationError("duplicate candidate " + candidate_label(c));
    }
    sources.insert(c.source_model);
    by_prompt[c.prompt_id].push_back(std::move(c));
  }

  GroupedPools grouped;
  grouped.prompts_by_id = prompts;
  std::sort(grouped.prompts_by_id.begin(), grouped.prompts_by_id.end(),
            [](const Prompt& a, const Prompt& b) { return a.id < b.id; });

  std::vector<std::string> orphans;
  for (const auto& p : grouped.prompts_by_id) {
    auto it = by_prompt.find(p.id);
    if (it == by_prompt.end() || it->second.empty()) {
      orphans.push_back(p.id);
      grouped.pools.emplace_back();
      continue;
    }
    auto pool = std::move(it->second);
    // Canonical pool order fixes the tie-break once and for all.
    std::sort(pool.begin(), pool.end(),
              [](const Candidate& a, const Candidate& b) {
                if (a.source_model != b.source_model) {
                  return a.source_model < b.source_model;
                }
                return a.sample_index < b.sample_index;
              });
    grouped.pools.push_back(std::move(pool));
  }
  if (!orphans.empty()) {
    std::ostringstream out;
    out << "prompts without candidates:";
    for (const auto& id : orphans) out << ' ' << id;
    throw ValidationError(out.str());
  }
  grouped.sources.assign(sources.begin(), sources.end());
  return grouped;
}

CuratedRecord pick_record(const Prompt& prompt,
                          const std::vector<Candidate>& pool,
                          const MetricSpec& spec,
                          const SelectionPolicy& policy) {
  SelectionPolicy per_prompt = policy;
  if (policy.kind == PolicyKind::kUniformRandom) {
    per_prompt.seed = derive_seed(policy.seed, prompt.id);
  }
  const std::size_t chosen = select(pool, spec, per_prompt);
  const Candidate& c = pool[chosen];
  CuratedRecord record;
  record.prompt_id = prompt.id;
  record.instruction = prompt.instruction;
  record.input = prompt.input;
  record.output = c.text;
  record.source_model = c.source_model;
  record.sample_index = c.sample_index;
  record.metric_value = c.metric_value.value_or(0.0);
  return record;
}

CuratedDataset run_curation(const std::vector<Prompt>& prompts,
                            std::vector<Candidate> candidates,
                            const MetricSpec& spec,
                            const SelectionPolicy& policy,
                            const TextScorer& scorer, bool parallel) {
  ensure_metric_values(candidates, spec, scorer);
  GroupedPools grouped = group_pools(prompts, candidates);

  CuratedDataset dataset;
  dataset.metric = spec;
  dataset.policy = policy;
  dataset.pool_sources = grouped.sources;
  std::int64_t total = 0;
  for (const auto& pool : grouped.pools) {
    total += static_cast<std::int64_t>(pool.size());
  }
  dataset.candidate_count = total;

  const std::int64_t n = static_cast<std::int64_t>(grouped.prompts_by_id.size());
  dataset.records.resize(grouped.prompts_by_id.size());
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      dataset.records[idx] = pick_record(grouped.prompts_by_id[idx],
                                         grouped.pools[idx], spec, policy);
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      dataset.records[idx] = pick_record(grouped.prompts_by_id[idx],
                                         grouped.pools[idx], spec, policy);
    }
  }
  return dataset;
}

}  // namespace

CuratedDataset curate_dataset(const std::vector<Prompt>& prompts,
                              std::vector<Candidate> candidates,
                              const MetricSpec& spec,
                              const SelectionPolicy& policy,
                              const TextScorer& scorer) {
  return run_curation(prompts, std::move(candidates), spec, policy, scorer,
                      /*parallel=*/true);
}

CuratedDataset curate_dataset_serial(const std::vector<Prompt>& prompts,
                                     std::vector<Candidate> candidates,
                                     const MetricSpec& spec,
                                     const SelectionPolicy& policy,
                                     const TextScorer& scorer) {
  return run_curation(prompts, std::move(candidates), spec, policy, scorer,
                      /*parallel=*/false);
}

MitigationSplit build_mitigation_split(const std::vector<ScoredPrompt>& prompts,
                                       std::int64_t test_size,
                                       double toxic_threshold,
                                       double test_threshold,
                                       std::int64_t neutral_cap,
                                       std::uint64_t seed) {
  if (test_size < 0 || neutral_cap < 0) {
    throw ValidationError("mitigation split: negative size parameter");
  }
  auto check_threshold = [](double t, const char* name) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw ValidationError(std::string("mitigation split: ") + name +
                            " outside [0,1]");
    }
  };
  check_threshold(toxic_threshold, "toxic_threshold");
  check_threshold(test_threshold, "test_threshold");

  std::vector<std::size_t> high;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (prompts[i].toxicity >= test_threshold) high.push_back(i);
  }
  if (static_cast<std::int64_t>(high.size()) < test_size) {
    std::ostringstream out;
    out << "mitigation split: need " << test_size << " prompts with toxicity >= "
        << test_threshold << " but only " << high.size() << " available (short by "
        << (test_size - static_cast<std::int64_t>(high.size())) << ")";
    throw ValidationError(out.str());
  }

  Rng test_rng(derive_seed(seed, "mitigation-test"));
  test_rng.shuffle(high);
  std::vector<std::size_t> test_indices(high.begin(),
                                        high.begin() + test_size);
  std::sort(test_indices.begin(), test_indices.end());
  std::vector<bool> in_test(prompts.size(), false);
  for (std::size_t i : test_indices) in_test[i] = true;

  MitigationSplit split;
  for (std::size_t i : test_indices) split.test.push_back(prompts[i]);

  std::vector<std::size_t> neutral_pool;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (in_test[i]) continue;
    if (prompts[i].toxicity >= toxic_threshold) {
      split.train.push_back(prompts[i]);
      ++split.train_toxic;
    } else {
      neutral_pool.push_back(i);
    }
  }

  if (static_cast<std::int64_t>(neutral_pool.size()) > neutral_cap) {
    Rng neutral_rng(derive_seed(seed, "mitigation-neutral"));
    neutral_rng.shuffle(neutral_pool);
    neutral_pool.resize(static_cast<std::size_t>(neutral_cap));
    std::sort(neutral_pool.begin(), neutral_pool.end());
  }
  for (std::size_t i : neutral_pool) {
    split.train.push_back(prompts[i]);
    ++split.train_neutral;
  }
  return split;
}

}  // namespace steerkit::curate
