#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "steerkit/config.hpp"
#include "steerkit/curate.hpp"
#include "steerkit/errors.hpp"
#include "steerkit/evalmetrics.hpp"
#include "steerkit/io.hpp"
#include "steerkit/judge.hpp"
#include "steerkit/reports.hpp"
#include "steerkit/rng.hpp"
#include "steerkit/safety.hpp"
#include "steerkit/sources.hpp"
#include "steerkit/textprof.hpp"
#include "steerkit/toylab.hpp"

namespace {

using steerkit::json;
using steerkit::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitPartialFailure = 2;

void emit_error(const char* type, const std::string& message) {
  ordered_json err;
  err["error"] = {{"type", type}, {"message", message}};
  std::cerr << err.dump() << "\n";
}

std::string record_context(const std::string& path, std::size_t index) {
  return path + " record " + std::to_string(index + 1);
}

// ---------------------------------------------------------------------------
// Shared input loaders
// ---------------------------------------------------------------------------

std::vector<std::string> load_texts(const std::string& path) {
  const auto records = steerkit::read_jsonl(path);
  std::vector<std::string> texts;
  texts.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string context = record_context(path, i);
    steerkit::require_string(records[i], "id", context);
    texts.push_back(steerkit::require_string(records[i], "text", context));
  }
  return texts;
}

std::vector<steerkit::curate::Prompt> load_prompts(const std::string& path) {
  const auto records = steerkit::read_jsonl(path);
  std::vector<steerkit::curate::Prompt> prompts;
  prompts.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string context = record_context(path, i);
    steerkit::curate::Prompt p;
    p.id = steerkit::require_string(records[i], "id", context);
    p.instruction =
        steerkit::require_string(records[i], "instruction", context);
    p.input = steerkit::optional_string(records[i], "input", context);
    prompts.push_back(std::move(p));
  }
  return prompts;
}

std::vector<steerkit::curate::Candidate> load_candidates(
    const std::vector<std::string>& paths) {
  std::vector<steerkit::curate::Candidate> candidates;
  for (const auto& path : paths) {
    const auto records = steerkit::read_jsonl(path);
    candidates.reserve(candidates.size() + records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      const std::string context = record_context(path, i);
      steerkit::curate::Candidate c;
      c.prompt_id = steerkit::require_string(records[i], "prompt_id", context);
      c.source_model =
          steerkit::require_string(records[i], "source_model", context);
      c.sample_index = static_cast<int>(
          steerkit::require_int(records[i], "sample_index", context));
      c.text = steerkit::require_string(records[i], "text", context);
      c.metric_value =
          steerkit::optional_double(records[i], "metric_value", context);
      candidates.push_back(std::move(c));
    }
  }
  return candidates;
}

std::vector<steerkit::judge::JudgmentRecord> load_judgments(
    const std::string& path) {
  const auto records = steerkit::read_jsonl(path);
  std::vector<steerkit::judge::JudgmentRecord> judgments;
  judgments.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string context = record_context(path, i);
    steerkit::judge::JudgmentRecord r;
    r.prompt_id = steerkit::require_string(records[i], "prompt_id", context);
    r.judge = steerkit::require_string(records[i], "judge", context);
    r.model_a = steerkit::require_string(records[i], "model_a", context);
    r.model_b = steerkit::require_string(records[i], "model_b", context);
    r.len_a = steerkit::require_int(records[i], "len_a", context);
    r.len_b = steerkit::require_int(records[i], "len_b", context);
    const std::string choice =
        steerkit::require_string(records[i], "choice", context);
    if (choice == "a" || choice == "A") {
      r.choice = steerkit::judge::Choice::kA;
    } else if (choice == "b" || choice == "B") {
      r.choice = steerkit::judge::Choice::kB;
    } else {
      throw steerkit::ValidationError(context +
                                      ": field 'choice' must be \"a\" or "
                                      "\"b\"");
    }
    if (auto order = steerkit::optional_int(records[i], "order", context)) {
      r.order = static_cast<int>(*order);
    }
    judgments.push_back(std::move(r));
  }
  return judgments;
}

/// Accepts either a flat {metric: value} object or a profile report
/// ({"metrics": {metric: {"mean": value, ...}}}).
std::map<std::string, double> load_profile_values(const std::string& path) {
  json parsed = json::parse(steerkit::read_file(path), nullptr, false);
  if (parsed.is_discarded()) {
    throw steerkit::ValidationError(path + ": malformed JSON");
  }
  if (parsed.is_object() && parsed.contains("metrics") &&
      parsed.at("metrics").is_object()) {
    parsed = parsed.at("metrics");
  }
  if (!parsed.is_object()) {
    throw steerkit::ValidationError(path + ": expected a JSON object");
  }
  std::map<std::string, double> values;
  for (const auto& [key, value] : parsed.items()) {
    if (key == "provenance" || key == "record_count") continue;
    if (value.is_number()) {
      values[key] = value.get<double>();
    } else if (value.is_object() && value.contains("mean") &&
               value.at("mean").is_number()) {
      values[key] = value.at("mean").get<double>();
    } else {
      throw steerkit::ValidationError(
          path + ": metric '" + key +
          "' must be a number or an object with a numeric 'mean'");
    }
  }
  if (values.empty()) {
    throw steerkit::ValidationError(path + ": no metric values found");
  }
  return values;
}

void write_json_report(const std::string& path, const ordered_json& report) {
  steerkit::write_atomic(path, report.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Subcommand options
// ---------------------------------------------------------------------------

struct ProfileOpts {
  std::string in;
  std::string out;
  std::string csv;
  bool serial = false;
  std::uint64_t seed = 0;
};

struct ToxicityOpts {
  std::string in;
  std::string out;
  double threshold = 0.5;
  bool use_lexicon = false;
  std::uint64_t seed = 0;
};

struct BiasOpts {
  std::string stereoset;
  std::string crows;
  std::string bbq;
  std::string out;
  std::uint64_t seed = 0;
};

struct CalibrateOpts {
  std::string in;
  std::string out;
  int bins = 10;
  std::uint64_t seed = 0;
};

struct CurateOpts {
  std::string prompts;
  std::vector<std::string> candidates;
  std::string out;
  std::string provenance_out;
  std::string alpaca_out;
  std::string metric = "token_count";
  std::string direction;  // empty = metric default
  std::string policy = "best_of_k";
  std::string scorer = "lexicon";
  bool serial = false;
  std::uint64_t seed = 0;
};

struct MitigateOpts {
  std::string in;
  std::string train_out;
  std::string test_out;
  std::string summary_out;
  std::int64_t test_size = 300;
  double toxic_threshold = 0.5;
  double test_threshold = 0.8;
  std::int64_t neutral_cap = 40000;
  std::uint64_t seed = 0;
};

struct GenerateOpts {
  std::string prompts;
  std::string config;
  std::string out;
  std::string status_out;
  int k = 1;
  std::uint64_t seed = 0;
  bool seed_passed = false;
  bool k_passed = false;
};

struct JudgeOpts {
  std::string in;
  std::string compare;
  std::vector<std::string> family;
  std::string out;
  std::uint64_t seed = 0;
};

struct DiffOpts {
  std::string before;
  std::string after;
  std::string out;
  std::string csv;
  std::string svg;
  std::uint64_t seed = 0;
};

struct DemoOpts {
  std::string out;
  std::string config;
  std::string metric = "token_count";
  bool degenerate = false;
  std::int64_t n_prompts = 200;
  std::int64_t pool_size = 4;
  std::int64_t eval_samples = 200;
  std::int64_t eval_max_tokens = 512;
  int student_order = 3;
  double student_alpha = 0.01;
  double noise_band = 0.2;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Subcommand implementations
// ---------------------------------------------------------------------------

int run_profile(const ProfileOpts& opts) {
  const auto texts = load_texts(opts.in);
  const steerkit::textprof::CorpusProfile profile =
      opts.serial ? steerkit::textprof::profile_corpus_serial(texts)
                  : steerkit::textprof::profile_corpus(texts);
  write_json_report(opts.out,
                    steerkit::reports::profile_report(profile, "profile",
                                                      opts.seed));
  if (!opts.csv.empty()) {
    steerkit::write_atomic(opts.csv, steerkit::reports::profile_csv(profile));
  }
  std::cout << "profiled " << profile.record_count << " records -> "
            << opts.out << "\n";
  return kExitOk;
}

int run_toxicity(const ToxicityOpts& opts) {
  const auto records = steerkit::read_jsonl(opts.in);
  // Rows keyed by prompt in first-seen order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> rows;
  std::int64_t generations = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string context = record_context(opts.in, i);
    const std::string prompt_id =
        steerkit::require_string(records[i], "prompt_id", context);
    steerkit::require_int(records[i], "sample_index", context);
    const std::string text =
        steerkit::require_string(records[i], "text", context);
    double score = 0.0;
    if (opts.use_lexicon) {
      score = steerkit::safety::lexicon_score(
          text, steerkit::safety::default_lexicon());
    } else {
      score = steerkit::require_double(records[i], "toxicity", context);
    }
    if (rows.find(prompt_id) == rows.end()) order.push_back(prompt_id);
    rows[prompt_id].push_back(score);
    ++generations;
  }
  steerkit::safety::ToxicityMatrix matrix;
  matrix.rows.reserve(order.size());
  for (const auto& prompt_id : order) {
    matrix.rows.push_back(rows.at(prompt_id));
  }
  const double emt = steerkit::safety::expected_max_toxicity(matrix);
  const double prob =
      steerkit::safety::toxicity_probability(matrix, opts.threshold);
  write_json_report(
      opts.out,
      steerkit::reports::toxicity_report(
          emt, prob, opts.threshold,
          static_cast<std::int64_t>(matrix.rows.size()), generations,
          opts.seed));
  std::cout << "scored " << matrix.rows.size() << " prompts ("
            << generations << " generations) -> " << opts.out << "\n";
  return kExitOk;
}

std::vector<steerkit::evalmetrics::StereotypePairRecord> load_stereo(
    const std::string& path) {
  const auto records = steerkit::read_jsonl(path);
  std::vector<steerkit::evalmetrics::StereotypePairRecord> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string context = record_context(path, i);
    steerkit::evalmetrics::StereotypePairRecord r;
    r.category = steerkit::require_string(records[i], "category", context);
    r.score_stereo =
        steerkit::require_double(records[i], "score_stereo", context);
    r.score_anti = steerkit::require_double(records[i], "score_anti", context);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<steerkit::evalmetrics::BBQRecord> load_bbq(
    const std::string& path) {
  const auto records = steerkit::read_jsonl(path);
  std::vector<steerkit::evalmetrics::BBQRecord> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string context = record_context(path, i);
    if (auto condition =
            steerkit::optional_string(records[i], "context_condition",
                                      context);
        condition && *condition != "ambiguous") {
      throw steerkit::ValidationError(
          context + ": only ambiguous-context records are supported");
    }
    steerkit::evalmetrics::BBQRecord r;
    r.category = steerkit::require_string(records[i], "category", context);
    const std::string prediction =
        steerkit::require_string(records[i], "prediction", context);
    if (prediction == "target_bias") {
      r.prediction = steerkit::evalmetrics::BbqPrediction::kTargetBias;
    } else if (prediction == "non_target") {
      r.prediction = steerkit::evalmetrics::BbqPrediction::kNonTarget;
    } else if (prediction == "unknown") {
      r.prediction = steerkit::evalmetrics::BbqPrediction::kUnknown;
    } else {
      throw steerkit::ValidationError(
          context +
          ": field 'prediction' must be target_bias, non_target or unknown");
    }
    out.push_back(std::move(r));
  }
  return out;
}

int run_bias(const BiasOpts& opts) {
  if (opts.stereoset.empty() && opts.crows.empty() && opts.bbq.empty()) {
    throw steerkit::ValidationError(
        "bias: provide at least one of --stereoset, --crows, --bbq");
  }
  std::optional<std::map<std::string, double>> stereoset;
  std::optional<std::map<std::string, double>> crows;
  std::optional<std::map<std::string, double>> bbq;
  if (!opts.stereoset.empty()) {
    stereoset =
        steerkit::evalmetrics::stereotype_score(load_stereo(opts.stereoset));
  }
  if (!opts.crows.empty()) {
    crows = steerkit::evalmetrics::stereotype_score(load_stereo(opts.crows));
  }
  if (!opts.bbq.empty()) {
    bbq = steerkit::evalmetrics::bbq_ambiguous_bias(load_bbq(opts.bbq));
  }
  write_json_report(opts.out, steerkit::reports::bias_report(
                                  stereoset, crows, bbq, opts.seed));
  std::cout << "bias report -> " << opts.out << "\n";
  return kExitOk;
}

int run_calibrate(const CalibrateOpts& opts) {
  const auto records = steerkit::read_jsonl(opts.in);
  std::vector<steerkit::evalmetrics::CalibrationRecord> calibration;
  calibration.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string context = record_context(opts.in, i);
    steerkit::evalmetrics::CalibrationRecord r;
    r.confidence = steerkit::require_double(records[i], "confidence", context);
    r.correct = steerkit::require_bool(records[i], "correct", context);
    calibration.push_back(r);
  }
  const double value = steerkit::evalmetrics::ece(calibration, opts.bins);
  write_json_report(
      opts.out,
      steerkit::reports::calibration_report(
          value, opts.bins, static_cast<std::int64_t>(calibration.size()),
          opts.seed));
  std::cout << "ece over " << calibration.size() << " records -> " << opts.out
            << "\n";
  return kExitOk;
}

int run_curate(const CurateOpts& opts) {
  const auto prompts = load_prompts(opts.prompts);
  auto candidates = load_candidates(opts.candidates);

  steerkit::curate::MetricSpec spec =
      steerkit::curate::MetricSpec::with_default_direction(opts.metric);
  if (!opts.direction.empty()) {
    spec.direction = opts.direction == "minimize"
                         ? steerkit::curate::Direction::kMinimize
                         : steerkit::curate::Direction::kMaximize;
  }
  steerkit::curate::SelectionPolicy policy;
  policy.kind = opts.policy == "uniform_random"
                    ? steerkit::curate::PolicyKind::kUniformRandom
                    : steerkit::curate::PolicyKind::kBestOfK;
  policy.seed = opts.seed;

  steerkit::curate::TextScorer scorer;
  if (opts.scorer == "lexicon") {
    scorer = [](const std::string& text) {
      return steerkit::safety::lexicon_score(
          text, steerkit::safety::default_lexicon());
    };
  }

  const steerkit::curate::CuratedDataset dataset =
      opts.serial ? steerkit::curate::curate_dataset_serial(
                        prompts, std::move(candidates), spec, policy, scorer)
                  : steerkit::curate::curate_dataset(
                        prompts, std::move(candidates), spec, policy, scorer);

  std::vector<ordered_json> lines;
  lines.reserve(dataset.records.size());
  for (const auto& record : dataset.records) {
    ordered_json line;
    line["instruction"] = record.instruction;
    line["input"] = record.input.value_or("");
    line["output"] = record.output;
    lines.push_back(std::move(line));
  }
  steerkit::write_jsonl_atomic(opts.out, lines);

  ordered_json sidecar;
  sidecar["metric"] = {
      {"name", dataset.metric.name},
      {"direction",
       dataset.metric.direction == steerkit::curate::Direction::kMaximize
           ? "maximize"
           : "minimize"}};
  sidecar["policy"] = {
      {"kind", dataset.policy.kind ==
                       steerkit::curate::PolicyKind::kUniformRandom
                   ? "uniform_random"
                   : "best_of_k"},
      {"seed", dataset.policy.seed}};
  sidecar["pool_sources"] = dataset.pool_sources;
  sidecar["candidate_count"] = dataset.candidate_count;
  sidecar["prompt_count"] = static_cast<std::int64_t>(dataset.records.size());
  ordered_json selection = ordered_json::array();
  for (const auto& record : dataset.records) {
    selection.push_back({{"prompt_id", record.prompt_id},
                         {"source_model", record.source_model},
                         {"sample_index", record.sample_index},
                         {"metric_value", record.metric_value}});
  }
  sidecar["selection"] = selection;
  sidecar["provenance"] = steerkit::reports::provenance("curate", opts.seed);
  const std::string provenance_path = opts.provenance_out.empty()
                                          ? opts.out + ".provenance.json"
                                          : opts.provenance_out;
  write_json_report(provenance_path, sidecar);

  if (!opts.alpaca_out.empty()) {
    ordered_json array = ordered_json::array();
    for (const auto& line : lines) array.push_back(line);
    steerkit::write_atomic(opts.alpaca_out, array.dump(2) + "\n");
  }
  std::cout << "curated " << dataset.records.size() << " records from "
            << dataset.candidate_count << " candidates -> " << opts.out
            << "\n";
  return kExitOk;
}

int run_mitigate(const MitigateOpts& opts) {
  const auto records = steerkit::read_jsonl(opts.in);
  std::vector<steerkit::curate::ScoredPrompt> prompts;
  prompts.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string context = record_context(opts.in, i);
    steerkit::curate::ScoredPrompt p;
    p.id = steerkit::require_string(records[i], "id", context);
    p.text = steerkit::require_string(records[i], "text", context);
    p.toxicity = steerkit::require_double(records[i], "toxicity", context);
    prompts.push_back(std::move(p));
  }

  const steerkit::curate::MitigationSplit split =
      steerkit::curate::build_mitigation_split(
          prompts, opts.test_size, opts.toxic_threshold, opts.test_threshold,
          opts.neutral_cap, opts.seed);

  auto to_lines = [](const std::vector<steerkit::curate::ScoredPrompt>& set) {
    std::vector<ordered_json> lines;
    lines.reserve(set.size());
    for (const auto& p : set) {
      lines.push_back(
          {{"id", p.id}, {"text", p.text}, {"toxicity", p.toxicity}});
    }
    return lines;
  };
  steerkit::write_jsonl_atomic(opts.train_out, to_lines(split.train));
  steerkit::write_jsonl_atomic(opts.test_out, to_lines(split.test));

  const auto train_size = static_cast<std::int64_t>(split.train.size());
  const double toxic_share =
      train_size == 0 ? 0.0
                      : 100.0 * static_cast<double>(split.train_toxic) /
                            static_cast<double>(train_size);
  if (!opts.summary_out.empty()) {
    ordered_json summary;
    summary["train_size"] = train_size;
    summary["test_size"] = static_cast<std::int64_t>(split.test.size());
    summary["train_toxic"] = split.train_toxic;
    summary["train_neutral"] = split.train_neutral;
    summary["toxic_share_percent"] = toxic_share;
    summary["toxic_threshold"] = opts.toxic_threshold;
    summary["test_threshold"] = opts.test_threshold;
    summary["neutral_cap"] = opts.neutral_cap;
    summary["provenance"] =
        steerkit::reports::provenance("mitigate-split", opts.seed);
    write_json_report(opts.summary_out, summary);
  }
  std::cout << "split " << prompts.size() << " prompts into " << train_size
            << " train / " << split.test.size() << " test (toxic share "
            << steerkit::format_double(toxic_share) << "%)\n";
  return kExitOk;
}

int run_generate(GenerateOpts& opts) {
  const auto prompts = load_prompts(opts.prompts);
  const steerkit::config::Config cfg =
      steerkit::config::load_config(opts.config);

  // Flags win over config values.
  if (!opts.seed_passed) {
    if (auto seed = cfg.get_u64("seed")) opts.seed = *seed;
  } else {
    cfg.get_u64("seed");  // consume so a config seed is not "unknown"
  }
  if (!opts.k_passed) {
    if (auto k = cfg.get_i64("k")) opts.k = static_cast<int>(*k);
  } else {
    cfg.get_i64("k");
  }
  std::vector<steerkit::sources::SourceConfig> source_configs = cfg.sources();
  cfg.ensure_fully_consumed();
  if (source_configs.empty()) {
    throw steerkit::ValidationError(
        "generate: config defines no source.<label>.* entries");
  }
  if (opts.k < 1) {
    throw steerkit::ValidationError("generate: k must be >= 1");
  }

  std::vector<ordered_json> lines;
  ordered_json source_reports = ordered_json::array();
  std::int64_t failed_total = 0;
  for (auto& src : source_configs) {
    if (src.kind == steerkit::sources::SourceKind::kMock && src.seed == 0) {
      src.seed = steerkit::derive_seed(opts.seed, "source-" + src.name);
    }
    src.validate();
    const steerkit::sources::GenerationBatch batch =
        steerkit::sources::generate(src, prompts, opts.k);
    for (const auto& candidate : batch.candidates) {
      lines.push_back({{"prompt_id", candidate.prompt_id},
                       {"source_model", candidate.source_model},
                       {"sample_index", candidate.sample_index},
                       {"text", candidate.text}});
    }
    std::int64_t ok = 0;
    std::int64_t retried = 0;
    ordered_json failures = ordered_json::array();
    for (const auto& status : batch.statuses) {
      switch (status.state) {
        case steerkit::sources::RequestState::kOk:
          ++ok;
          break;
        case steerkit::sources::RequestState::kRetried:
          ++retried;
          break;
        case steerkit::sources::RequestState::kFailed:
          failures.push_back({{"prompt_id", status.prompt_id},
                              {"retries", status.retries},
                              {"error", status.error}});
          break;
      }
    }
    failed_total += static_cast<std::int64_t>(failures.size());
    source_reports.push_back({{"name", src.name},
                              {"ok", ok},
                              {"retried", retried},
                              {"failed", failures.size()},
                              {"failures", failures}});
  }
  steerkit::write_jsonl_atomic(opts.out, lines);

  ordered_json manifest;
  manifest["fully_ok"] = failed_total == 0;
  manifest["failed"] = failed_total;
  manifest["candidate_count"] = static_cast<std::int64_t>(lines.size());
  manifest["sources"] = source_reports;
  manifest["provenance"] = steerkit::reports::provenance("generate", opts.seed);
  const std::string status_path =
      opts.status_out.empty() ? opts.out + ".status.json" : opts.status_out;
  write_json_report(status_path, manifest);

  std::cout << "generated " << lines.size() << " candidates -> " << opts.out
            << "\n";
  if (failed_total > 0) {
    emit_error("partial_failure",
               std::to_string(failed_total) +
                   " request(s) failed after retries; see " + status_path);
    return kExitPartialFailure;
  }
  return kExitOk;
}

int run_judge(const JudgeOpts& opts) {
  const auto judgments = load_judgments(opts.in);
  ordered_json report;
  report["record_count"] = static_cast<std::int64_t>(judgments.size());
  try {
    report["length_bias_percent"] = steerkit::judge::length_bias(judgments);
  } catch (const steerkit::UndefinedMetricError&) {
    report["length_bias_percent"] = nullptr;
  }
  if (!opts.family.empty()) {
    std::map<std::string, std::string> family_of;
    for (const auto& entry : opts.family) {
      const std::size_t eq = entry.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size()) {
        throw steerkit::ValidationError(
            "judge: --family expects model=family, got '" + entry + "'");
      }
      family_of[entry.substr(0, eq)] = entry.substr(eq + 1);
    }
    report["family_preference"] =
        steerkit::judge::family_preference(judgments, family_of);
  }
  if (!opts.compare.empty()) {
    const auto other = load_judgments(opts.compare);
    report["agreement_percent"] =
        steerkit::judge::agreement_rate(judgments, other);
  }
  report["provenance"] = steerkit::reports::provenance("judge", opts.seed);
  write_json_report(opts.out, report);
  std::cout << "judge analytics over " << judgments.size() << " records -> "
            << opts.out << "\n";
  return kExitOk;
}

int run_diff(const DiffOpts& opts) {
  const auto before = load_profile_values(opts.before);
  const auto after = load_profile_values(opts.after);
  const auto diff = steerkit::judge::profile_diff(before, after);

  ordered_json body = ordered_json::object();
  for (const auto& [metric, entry] : diff) {
    ordered_json e;
    e["before"] = entry.before;
    e["after"] = entry.after;
    e["delta"] = entry.delta;
    if (entry.percent_change) {
      e["percent_change"] = *entry.percent_change;
    } else {
      e["percent_change"] = nullptr;
    }
    body[metric] = e;
  }
  ordered_json report;
  report["diff"] = body;
  report["provenance"] = steerkit::reports::provenance("diff", opts.seed);
  write_json_report(opts.out, report);
  if (!opts.csv.empty()) {
    steerkit::write_atomic(opts.csv, steerkit::judge::diff_csv(diff));
  }
  if (!opts.svg.empty()) {
    steerkit::write_atomic(opts.svg, steerkit::judge::diff_svg(diff));
  }
  std::cout << "diff over " << diff.size() << " metrics -> " << opts.out
            << "\n";
  return kExitOk;
}

int run_demo(const DemoOpts& opts) {
  steerkit::toylab::DemoConfig config;
  config.seed = opts.seed;
  config.metric =
      steerkit::curate::MetricSpec::with_default_direction(opts.metric);
  config.n_prompts = opts.n_prompts;
  config.pool_size = opts.pool_size;
  config.student_order = opts.student_order;
  config.student_alpha = opts.student_alpha;
  config.eval_samples = opts.eval_samples;
  config.eval_max_tokens = opts.eval_max_tokens;
  config.noise_band = opts.noise_band;

  if (!opts.config.empty()) {
    const steerkit::config::Config cfg =
        steerkit::config::load_config(opts.config);
    config.sources = cfg.sources();
    cfg.ensure_fully_consumed();
  } else if (opts.degenerate) {
    steerkit::sources::SourceConfig solo;
    solo.name = "solo";
    solo.mean_length = 100;
    solo.vocab_size = 25;
    solo.toxic_word_rate = opts.metric == "toxicity" ? 0.1 : 0.0;
    config.sources = {solo};
    config.pool_size = 1;  // identical arms: selection has nothing to steer
  } else if (opts.metric == "toxicity") {
    steerkit::sources::SourceConfig clean;
    clean.name = "clean";
    clean.mean_length = 100;
    clean.vocab_size = 25;
    clean.toxic_word_rate = 0.0;
    steerkit::sources::SourceConfig toxic = clean;
    toxic.name = "toxic";
    toxic.toxic_word_rate = 0.2;
    config.sources = {clean, toxic};
  } else {
    steerkit::sources::SourceConfig shorter;
    shorter.name = "short";
    shorter.mean_length = 50;
    shorter.vocab_size = 25;
    steerkit::sources::SourceConfig longer = shorter;
    longer.name = "long";
    longer.mean_length = 150;
    config.sources = {shorter, longer};
  }

  const steerkit::toylab::DemoReport report =
      steerkit::toylab::demo_run(config);
  ordered_json out = report.to_json();
  out["provenance"] = steerkit::reports::provenance("demo", opts.seed);
  write_json_report(opts.out, out);
  std::cout << "demo (" << config.metric.name << "): steered "
            << steerkit::format_double(report.best_of_k.student_metric_value)
            << " vs baseline "
            << steerkit::format_double(
                   report.uniform_random.student_metric_value)
            << (report.steered_beats_baseline ? " (steered wins)"
                                              : " (no separation)")
            << " -> " << opts.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "steerkit: synthetic-data curation and model-profiling toolkit"};
  app.require_subcommand(1);

  ProfileOpts profile_opts;
  auto* profile = app.add_subcommand(
      "profile", "Aggregate textual metrics over a generations file");
  profile->add_option("--in", profile_opts.in, "Input JSONL ({id, text})")
      ->required();
  profile->add_option("--out", profile_opts.out, "Output report JSON")
      ->required();
  profile->add_option("--csv", profile_opts.csv, "Optional CSV twin");
  profile->add_flag("--serial", profile_opts.serial,
                    "Use the serial reference implementation");
  profile->add_option("--seed", profile_opts.seed,
                      "Global seed recorded in provenance");

  ToxicityOpts toxicity_opts;
  auto* toxicity = app.add_subcommand(
      "toxicity", "Expected maximum toxicity and toxicity probability");
  toxicity
      ->add_option("--in", toxicity_opts.in,
                   "Scored generations JSONL "
                   "({prompt_id, sample_index, text, toxicity})")
      ->required();
  toxicity->add_option("--out", toxicity_opts.out, "Output report JSON")
      ->required();
  toxicity->add_option("--threshold", toxicity_opts.threshold,
                       "Toxic threshold (default 0.5)");
  toxicity->add_flag("--use-lexicon", toxicity_opts.use_lexicon,
                     "Score texts with the built-in lexicon instead of the "
                     "toxicity field");
  toxicity->add_option("--seed", toxicity_opts.seed,
                       "Global seed recorded in provenance");

  BiasOpts bias_opts;
  auto* bias = app.add_subcommand(
      "bias", "Stereotype and BBQ ambiguous bias scores from record files");
  bias->add_option("--stereoset", bias_opts.stereoset,
                   "Pair records JSONL ({category, score_stereo, score_anti})");
  bias->add_option("--crows", bias_opts.crows,
                   "Pair records JSONL, CrowS-Pairs");
  bias->add_option("--bbq", bias_opts.bbq,
                   "Ambiguous QA records JSONL ({category, prediction})");
  bias->add_option("--out", bias_opts.out, "Output report JSON")->required();
  bias->add_option("--seed", bias_opts.seed,
                   "Global seed recorded in provenance");

  CalibrateOpts calibrate_opts;
  auto* calibrate =
      app.add_subcommand("calibrate", "Expected calibration error");
  calibrate
      ->add_option("--in", calibrate_opts.in,
                   "Records JSONL ({confidence, correct})")
      ->required();
  calibrate->add_option("--out", calibrate_opts.out, "Output report JSON")
      ->required();
  calibrate->add_option("--bins", calibrate_opts.bins,
                        "Equal-width bin count (default 10)");
  calibrate->add_option("--seed", calibrate_opts.seed,
                        "Global seed recorded in provenance");

  CurateOpts curate_opts;
  auto* curate = app.add_subcommand(
      "curate", "Select one candidate per prompt into a finetuning dataset");
  curate
      ->add_option("--prompts", curate_opts.prompts,
                   "Prompts JSONL ({id, instruction, input?})")
      ->required();
  curate
      ->add_option("--candidates", curate_opts.candidates,
                   "Candidate JSONL file(s); repeat to pool sources")
      ->required();
  curate->add_option("--out", curate_opts.out, "Curated dataset JSONL")
      ->required();
  curate->add_option("--provenance-out", curate_opts.provenance_out,
                     "Sidecar JSON path (default: <out>.provenance.json)");
  curate->add_option("--alpaca-out", curate_opts.alpaca_out,
                     "Optional single-array JSON for trainers");
  curate
      ->add_option("--metric", curate_opts.metric,
                   "token_count | mtld | gunning_fog | rix | toxicity | "
                   "custom")
      ->check(CLI::IsMember({"token_count", "mtld", "gunning_fog", "rix",
                             "toxicity", "custom"}));
  curate->add_option("--direction", curate_opts.direction, "Override direction")
      ->check(CLI::IsMember({"maximize", "minimize"}));
  curate->add_option("--policy", curate_opts.policy, "Selection policy")
      ->check(CLI::IsMember({"best_of_k", "uniform_random"}));
  curate
      ->add_option("--scorer", curate_opts.scorer,
                   "Toxicity scorer: lexicon | none (none requires "
                   "precomputed metric values)")
      ->check(CLI::IsMember({"lexicon", "none"}));
  curate->add_flag("--serial", curate_opts.serial,
                   "Use the serial reference implementation");
  curate->add_option("--seed", curate_opts.seed,
                     "Seed for uniform_random selection");

  MitigateOpts mitigate_opts;
  auto* mitigate = app.add_subcommand(
      "mitigate-split",
      "Build the toxicity-mitigation train/test prompt split");
  mitigate
      ->add_option("--in", mitigate_opts.in,
                   "Scored prompts JSONL ({id, text, toxicity})")
      ->required();
  mitigate->add_option("--train-out", mitigate_opts.train_out, "Train JSONL")
      ->required();
  mitigate->add_option("--test-out", mitigate_opts.test_out, "Test JSONL")
      ->required();
  mitigate->add_option("--summary-out", mitigate_opts.summary_out,
                       "Optional summary JSON");
  mitigate->add_option("--test-size", mitigate_opts.test_size,
                       "Held-out prompt count (default 300)");
  mitigate->add_option("--toxic-threshold", mitigate_opts.toxic_threshold,
                       "Train toxic threshold (default 0.5)");
  mitigate->add_option("--test-threshold", mitigate_opts.test_threshold,
                       "Test-pool threshold (default 0.8)");
  mitigate->add_option("--neutral-cap", mitigate_opts.neutral_cap,
                       "Neutral sample cap (default 40000)");
  mitigate->add_option("--seed", mitigate_opts.seed, "Sampling seed");

  GenerateOpts generate_opts;
  auto* generate = app.add_subcommand(
      "generate", "Generate candidates from every source in a config file");
  generate
      ->add_option("--prompts", generate_opts.prompts,
                   "Prompts JSONL ({id, instruction, input?})")
      ->required();
  generate
      ->add_option("--config", generate_opts.config,
                   "Key=value config defining source.<label>.* entries")
      ->required();
  generate->add_option("--out", generate_opts.out, "Candidates JSONL")
      ->required();
  generate->add_option("--status-out", generate_opts.status_out,
                       "Status manifest JSON (default: <out>.status.json)");
  auto* k_opt = generate->add_option("--k", generate_opts.k,
                                     "Samples per prompt per source");
  auto* seed_opt =
      generate->add_option("--seed", generate_opts.seed, "Global seed");

  JudgeOpts judge_opts;
  auto* judge = app.add_subcommand(
      "judge", "Pairwise-judgment analytics (length bias, families, "
               "agreement)");
  judge
      ->add_option("--in", judge_opts.in,
                   "Judgments JSONL ({prompt_id, judge, model_a, model_b, "
                   "len_a, len_b, choice, order?})")
      ->required();
  judge->add_option("--compare", judge_opts.compare,
                    "Second judgment set for agreement rate");
  judge->add_option("--family", judge_opts.family,
                    "model=family mapping; repeat per model");
  judge->add_option("--out", judge_opts.out, "Output report JSON")->required();
  judge->add_option("--seed", judge_opts.seed,
                    "Global seed recorded in provenance");

  DiffOpts diff_opts;
  auto* diff = app.add_subcommand(
      "diff", "Before/after model-profile delta report");
  diff->add_option("--before", diff_opts.before, "Baseline profile JSON")
      ->required();
  diff->add_option("--after", diff_opts.after, "Updated profile JSON")
      ->required();
  diff->add_option("--out", diff_opts.out, "Diff report JSON")->required();
  diff->add_option("--csv", diff_opts.csv, "Optional CSV report");
  diff->add_option("--svg", diff_opts.svg, "Optional SVG bar chart");
  diff->add_option("--seed", diff_opts.seed,
                   "Global seed recorded in provenance");

  DemoOpts demo_opts;
  auto* demo = app.add_subcommand(
      "demo", "End-to-end inheritance demo with the n-gram student");
  demo->add_option("--out", demo_opts.out, "Demo report JSON")->required();
  demo->add_option("--config", demo_opts.config,
                   "Optional config overriding the built-in mock sources");
  demo->add_option("--metric", demo_opts.metric, "Targeted metric")
      ->check(CLI::IsMember({"token_count", "mtld", "gunning_fog", "rix",
                             "toxicity"}));
  demo->add_flag("--degenerate", demo_opts.degenerate,
                 "Single source, pool of one: arms differ only by noise");
  demo->add_option("--n-prompts", demo_opts.n_prompts, "Prompt count");
  demo->add_option("--pool-size", demo_opts.pool_size,
                   "Candidates per prompt pooled over sources");
  demo->add_option("--eval-samples", demo_opts.eval_samples,
                   "Generations per student for re-profiling");
  demo->add_option("--max-tokens", demo_opts.eval_max_tokens,
                   "Token cap per student generation");
  demo->add_option("--student-order", demo_opts.student_order,
                   "n-gram order");
  demo->add_option("--student-alpha", demo_opts.student_alpha,
                   "Add-alpha smoothing");
  demo->add_option("--noise-band", demo_opts.noise_band,
                   "Relative gap bound for the degenerate check");
  demo->add_option("--seed", demo_opts.seed, "Global seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (profile->parsed()) return run_profile(profile_opts);
    if (toxicity->parsed()) return run_toxicity(toxicity_opts);
    if (bias->parsed()) return run_bias(bias_opts);
    if (calibrate->parsed()) return run_calibrate(calibrate_opts);
    if (curate->parsed()) return run_curate(curate_opts);
    if (mitigate->parsed()) return run_mitigate(mitigate_opts);
    if (generate->parsed()) {
      generate_opts.k_passed = k_opt->count() > 0;
      generate_opts.seed_passed = seed_opt->count() > 0;
      return run_generate(generate_opts);
    }
    if (judge->parsed()) return run_judge(judge_opts);
    if (diff->parsed()) return run_diff(diff_opts);
    if (demo->parsed()) return run_demo(demo_opts);
    emit_error("internal", "no subcommand dispatched");
    return kExitValidation;
  } catch (const steerkit::UndefinedMetricError& e) {
    emit_error("undefined_metric", e.what());
    return kExitValidation;
  } catch (const steerkit::ValidationError& e) {
    emit_error("validation", e.what());
    return kExitValidation;
  } catch (const steerkit::IoError& e) {
    emit_error("io", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return kExitValidation;
  }
}
