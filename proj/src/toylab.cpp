#include "steerkit/toylab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "steerkit/errors.hpp"
#include "steerkit/judge.hpp"
#include "steerkit/rng.hpp"
#include "steerkit/safety.hpp"

namespace steerkit::toylab {

namespace {

constexpr const char* kDirectionNames[] = {"maximize", "minimize"};

/// Tokens a context can predict: every vocabulary word plus the end
/// sentinel.
std::size_t outcome_count(const NGramModel& m) {
  return m.vocabulary.size() + 1;
}

}  // namespace

std::vector<double> NGramModel::conditional(
    const std::vector<std::uint32_t>& context) const {
  if (!fitted) throw ValidationError("n-gram model is not fitted");
  if (context.size() != static_cast<std::size_t>(order - 1)) {
    throw ValidationError("context must hold order - 1 token ids");
  }
  const std::size_t outcomes = outcome_count(*this);
  std::vector<double> probs(outcomes, 0.0);
  std::uint64_t observed = 0;
  auto it = counts.find(context);
  if (it != counts.end()) {
    for (const auto& [token, count] : it->second) observed += count;
  }
  const double total =
      static_cast<double>(observed) + alpha * static_cast<double>(outcomes);
  if (total == 0.0) {
    throw ValidationError(
        "context has no observations and alpha = 0: distribution undefined");
  }
  for (std::size_t id = 0; id < outcomes; ++id) probs[id] = alpha / total;
  if (it != counts.end()) {
    for (const auto& [token, count] : it->second) {
      probs[token] += static_cast<double>(count) / total;
    }
  }
  return probs;
}

double NGramModel::continuation_probability() const {
  if (!fitted) throw ValidationError("n-gram model is not fitted");
  const double denom = static_cast<double>(continue_count + end_count) +
                       2.0 * alpha;
  if (denom == 0.0) return 0.0;
  return (static_cast<double>(continue_count) + alpha) / denom;
}

NGramModel fit(const std::vector<std::string>& corpus, int order,
               double alpha) {
  if (corpus.empty()) throw ValidationError("fit: corpus is empty");
  if (order < 2) throw ValidationError("fit: order must be >= 2");
  if (alpha < 0.0) throw ValidationError("fit: alpha must be >= 0");

  std::vector<textprof::TokenizedText> docs;
  docs.reserve(corpus.size());
  std::set<std::string> vocab_set;
  for (const auto& text : corpus) {
    textprof::TokenizedText t = textprof::segment(text);
    if (t.words.empty()) continue;  // nothing to learn from
    for (const auto& w : t.words) vocab_set.insert(w);
    docs.push_back(std::move(t));
  }
  if (docs.empty()) {
    throw ValidationError("fit: corpus contains no word tokens");
  }

  NGramModel model;
  model.order = order;
  model.alpha = alpha;
  model.vocabulary.assign(vocab_set.begin(), vocab_set.end());
  std::map<std::string, std::uint32_t> word_id;
  for (std::uint32_t id = 0; id < model.vocabulary.size(); ++id) {
    word_id[model.vocabulary[id]] = id;
  }

  const std::size_t context_len = static_cast<std::size_t>(order - 1);
  for (const auto& doc : docs) {
    for (const auto& sentence : doc.sentences) {
      std::vector<std::uint32_t> context(context_len, model.start_id());
      for (std::size_t w = sentence.begin; w < sentence.end; ++w) {
        const std::uint32_t id = word_id.at(doc.words[w]);
        ++model.counts[context][id];
        context.erase(context.begin());
        context.push_back(id);
      }
      ++model.counts[context][model.end_id()];
    }
    model.continue_count += doc.sentences.size() - 1;
    ++model.end_count;
  }
  model.fitted = true;
  return model;
}

std::string generate(const NGramModel& model, std::uint64_t seed,
                     std::int64_t max_tokens) {
  if (!model.fitted) throw ValidationError("generate: model is not fitted");
  if (max_tokens < 1) throw ValidationError("generate: max_tokens must be >= 1");

  const std::size_t outcomes = outcome_count(model);
  const std::size_t context_len = static_cast<std::size_t>(model.order - 1);
  Rng rng(seed);

  // Samples one token: observed counts first, then the uniform
  // smoothing mass, so the walk is O(distinct continuations) instead of
  // O(vocabulary).
  auto sample_token = [&](const std::vector<std::uint32_t>& context) {
    const auto it = model.counts.find(context);
    std::uint64_t observed = 0;
    if (it != model.counts.end()) {
      for (const auto& [token, count] : it->second) observed += count;
    }
    const double total = static_cast<double>(observed) +
                         model.alpha * static_cast<double>(outcomes);
    if (total == 0.0) {
      throw ValidationError(
          "generate: unsmoothed model reached an unseen context");
    }
    double u = rng.next_double() * total;
    if (it != model.counts.end()) {
      for (const auto& [token, count] : it->second) {
        u -= static_cast<double>(count);
        if (u < 0.0) return token;
      }
    }
    const auto id = static_cast<std::uint32_t>(u / model.alpha);
    return std::min(id, static_cast<std::uint32_t>(outcomes - 1));
  };

  std::string out;
  std::int64_t tokens = 0;
  // Sentences carrying no words consume no budget; bound the attempts
  // so a degenerate model cannot spin forever.
  std::int64_t attempts_left = 2 * max_tokens + 16;
  bool more_sentences = true;
  while (more_sentences && tokens < max_tokens && attempts_left-- > 0) {
    std::vector<std::uint32_t> context(context_len, model.start_id());
    bool wrote_word = false;
    while (tokens < max_tokens) {
      const std::uint32_t id = sample_token(context);
      if (id == model.end_id()) break;
      if (!out.empty()) out += ' ';
      out += model.vocabulary[id];
      wrote_word = true;
      ++tokens;
      context.erase(context.begin());
      context.push_back(id);
    }
    if (wrote_word) out += '.';
    more_sentences = rng.next_bool(model.continuation_probability());
  }
  return out;
}

void DemoConfig::validate() const {
  if (sources.empty()) throw ValidationError("demo: no sources configured");
  for (const auto& src : sources) {
    if (src.kind != sources::SourceKind::kMock) {
      throw ValidationError("demo: source '" + src.name +
                            "' must be a mock source");
    }
    src.validate();
  }
  std::set<std::string> names;
  for (const auto& src : sources) {
    if (!names.insert(src.name).second) {
      throw ValidationError("demo: duplicate source name '" + src.name + "'");
    }
  }
  if (n_prompts < 1) throw ValidationError("demo: n_prompts must be >= 1");
  if (pool_size < 1) throw ValidationError("demo: pool_size must be >= 1");
  if (student_order < 2) {
    throw ValidationError("demo: student_order must be >= 2");
  }
  if (student_alpha < 0.0) {
    throw ValidationError("demo: student_alpha must be >= 0");
  }
  if (eval_samples < 1) throw ValidationError("demo: eval_samples must be >= 1");
  if (eval_max_tokens < 1) {
    throw ValidationError("demo: eval_max_tokens must be >= 1");
  }
  if (noise_band <= 0.0) throw ValidationError("demo: noise_band must be > 0");
  static const std::set<std::string> known = {"token_count", "mtld",
                                             "gunning_fog", "rix", "toxicity"};
  if (!known.count(metric.name)) {
    throw ValidationError("demo: unsupported metric '" + metric.name + "'");
  }
}

namespace {

/// Key under which the targeted metric appears in a student profile.
std::string profile_key(const std::string& metric_name) {
  return metric_name == "toxicity" ? "toxicity_emt" : metric_name;
}

ArmReport evaluate_arm(const curate::CuratedDataset& dataset,
                       const DemoConfig& cfg, const std::string& label) {
  ArmReport arm;
  double teacher_sum = 0.0;
  std::vector<std::string> training;
  training.reserve(dataset.records.size());
  for (const auto& record : dataset.records) {
    teacher_sum += record.metric_value;
    training.push_back(record.output);
  }
  arm.teacher_metric_mean =
      teacher_sum / static_cast<double>(dataset.records.size());

  const NGramModel student =
      fit(training, cfg.student_order, cfg.student_alpha);

  std::vector<std::string> samples(
      static_cast<std::size_t>(cfg.eval_samples));
  std::vector<std::string> errors(samples.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < cfg.eval_samples; ++i) {
    const auto slot = static_cast<std::size_t>(i);
    try {
      const std::uint64_t sample_seed =
          derive_seed(cfg.seed, "eval-" + label + "-" + std::to_string(i));
      samples[slot] = generate(student, sample_seed, cfg.eval_max_tokens);
    } catch (const std::exception& e) {
      errors[slot] = e.what();
    }
  }
  for (const auto& error : errors) {
    if (!error.empty()) throw ValidationError("demo: " + error);
  }

  const textprof::CorpusProfile profile = textprof::profile_corpus(samples);
  for (const auto& [name, agg] : profile.metrics) {
    if (agg.count > 0) arm.student_profile[name] = agg.mean;
  }
  safety::ToxicityMatrix matrix;
  matrix.rows.reserve(samples.size());
  for (const auto& text : samples) {
    matrix.rows.push_back({safety::lexicon_score(text,
                                                 safety::default_lexicon())});
  }
  arm.student_profile["toxicity_emt"] = safety::expected_max_toxicity(matrix);

  const std::string key = profile_key(cfg.metric.name);
  auto it = arm.student_profile.find(key);
  if (it == arm.student_profile.end()) {
    throw ValidationError("demo: student profile lacks targeted metric '" +
                          key + "'");
  }
  arm.student_metric_value = it->second;
  return arm;
}

}  // namespace

DemoReport demo_run(const DemoConfig& config) {
  config.validate();

  std::vector<curate::Prompt> prompts;
  prompts.reserve(static_cast<std::size_t>(config.n_prompts));
  for (std::int64_t i = 0; i < config.n_prompts; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "demo-%06lld",
                  static_cast<long long>(i));
    prompts.push_back({id, "Write a short passage.", std::nullopt});
  }

  // Split the pool across sources as evenly as possible; earlier
  // sources absorb the remainder.
  const auto n_sources = static_cast<std::int64_t>(config.sources.size());
  const std::int64_t base = config.pool_size / n_sources;
  const std::int64_t extra = config.pool_size % n_sources;

  std::vector<curate::Candidate> candidates;
  for (std::int64_t s = 0; s < n_sources; ++s) {
    const std::int64_t k = base + (s < extra ? 1 : 0);
    if (k == 0) continue;
    sources::SourceConfig src = config.sources[static_cast<std::size_t>(s)];
    src.seed = derive_seed(config.seed, "source-" + src.name);
    sources::GenerationBatch batch =
        sources::mock_generate_batch(src, prompts, static_cast<int>(k));
    candidates.insert(candidates.end(),
                      std::make_move_iterator(batch.candidates.begin()),
                      std::make_move_iterator(batch.candidates.end()));
  }

  curate::TextScorer scorer;
  if (config.metric.name == "toxicity") {
    scorer = [](const std::string& text) {
      return safety::lexicon_score(text, safety::default_lexicon());
    };
  }

  const curate::CuratedDataset curated = curate::curate_dataset(
      prompts, candidates, config.metric,
      {curate::PolicyKind::kBestOfK, derive_seed(config.seed, "curate")},
      scorer);
  const curate::CuratedDataset baseline = curate::curate_dataset(
      prompts, candidates, config.metric,
      {curate::PolicyKind::kUniformRandom,
       derive_seed(config.seed, "baseline")},
      scorer);

  DemoReport report;
  report.config = config;
  report.best_of_k = evaluate_arm(curated, config, "best_of_k");
  report.uniform_random = evaluate_arm(baseline, config, "uniform_random");

  const auto diff = judge::profile_diff(report.uniform_random.student_profile,
                                        report.best_of_k.student_profile);
  report.diff = nlohmann::ordered_json::object();
  for (const auto& [name, entry] : diff) {
    nlohmann::ordered_json e;
    e["before"] = entry.before;
    e["after"] = entry.after;
    e["delta"] = entry.delta;
    if (entry.percent_change) {
      e["percent_change"] = *entry.percent_change;
    } else {
      e["percent_change"] = nullptr;
    }
    report.diff[name] = e;
  }

  report.delta = report.best_of_k.student_metric_value -
                 report.uniform_random.student_metric_value;
  if (report.uniform_random.student_metric_value != 0.0) {
    report.relative_gap =
        report.delta / std::abs(report.uniform_random.student_metric_value);
  }
  report.steered_beats_baseline =
      config.metric.direction == curate::Direction::kMaximize
          ? report.delta > 0.0
          : report.delta < 0.0;
  return report;
}

nlohmann::ordered_json DemoReport::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json cfg;
  cfg["seed"] = config.seed;
  cfg["metric"] = {{"name", config.metric.name},
                   {"direction",
                    kDirectionNames[static_cast<int>(config.metric.direction)]}};
  nlohmann::ordered_json srcs = nlohmann::ordered_json::array();
  for (const auto& src : config.sources) {
    srcs.push_back({{"name", src.name},
                    {"mean_length", src.mean_length},
                    {"vocab_size", src.vocab_size},
                    {"toxic_word_rate", src.toxic_word_rate}});
  }
  cfg["sources"] = srcs;
  cfg["n_prompts"] = config.n_prompts;
  cfg["pool_size"] = config.pool_size;
  cfg["student_order"] = config.student_order;
  cfg["student_alpha"] = config.student_alpha;
  cfg["eval_samples"] = config.eval_samples;
  cfg["eval_max_tokens"] = config.eval_max_tokens;
  cfg["noise_band"] = config.noise_band;
  j["config"] = cfg;

  auto arm_json = [](const ArmReport& arm) {
    nlohmann::ordered_json a;
    a["teacher_metric_mean"] = arm.teacher_metric_mean;
    a["student_profile"] = arm.student_profile;
    a["student_metric_value"] = arm.student_metric_value;
    return a;
  };
  j["arms"] = {{"best_of_k", arm_json(best_of_k)},
               {"uniform_random", arm_json(uniform_random)}};
  j["diff"] = diff;
  nlohmann::ordered_json summary;
  summary["delta"] = delta;
  if (relative_gap) {
    summary["relative_gap"] = *relative_gap;
  } else {
    summary["relative_gap"] = nullptr;
  }
  summary["steered_beats_baseline"] = steered_beats_baseline;
  j["summary"] = summary;
  return j;
}

}  // namespace steerkit::toylab
