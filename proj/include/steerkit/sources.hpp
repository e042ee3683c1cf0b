#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "steerkit/curate.hpp"

namespace steerkit::sources {

enum class SourceKind { kMock, kHttp };
enum class HttpApi { kCompletions, kChat };

struct SourceConfig {
  std::string name;
  SourceKind kind = SourceKind::kMock;

  // http
  std::string endpoint;       // e.g. http://127.0.0.1:8080
  std::string model;
  std::string api_key_env;    // environment variable holding the key
  HttpApi api = HttpApi::kCompletions;
  double temperature = 0.9;
  int max_tokens = 512;
  int timeout_ms = 30000;
  int max_retries = 3;
  int parallelism = 4;
  int backoff_ms = 250;       // base for exponential backoff

  // mock
  std::uint64_t seed = 0;
  int mean_length = 100;      // expected words per generation
  int vocab_size = 500;
  double toxic_word_rate = 0.0;

  void validate() const;
};

enum class RequestState { kOk, kRetried, kFailed };

struct RequestStatus {
  std::string prompt_id;
  RequestState state = RequestState::kOk;
  int retries = 0;
  std::string error;  // set when failed
};

/// Candidates plus per-request outcomes, sorted by
/// (prompt id, source, sample index) regardless of completion order.
struct GenerationBatch {
  std::vector<curate::Candidate> candidates;
  std::vector<RequestStatus> statuses;

  bool fully_ok() const;
  std::int64_t failed_count() const;
};

/// Standard instruction-tuning template; the with-input variant is used
/// when the prompt carries an input block.
/// Throws ValidationError on an empty instruction.
std::string render_prompt(const curate::Prompt& p);

/// k seeded generations for one prompt. Texts are a pure function of
/// (config seed, prompt id, sample index): word count is geometric
/// around mean_length, words come from a deterministic vocabulary, and
/// lexicon words are injected at toxic_word_rate.
std::vector<curate::Candidate> mock_generate(const SourceConfig& cfg,
                                             const curate::Prompt& p, int k);

/// Batch form, OpenMP-parallel across prompts.
GenerationBatch mock_generate_batch(const SourceConfig& cfg,
                                    const std::vector<curate::Prompt>& prompts,
                                    int k);

/// Serial reference implementation, kept for tests and the benchmark.
GenerationBatch mock_generate_batch_serial(
    const SourceConfig& cfg, const std::vector<curate::Prompt>& prompts, int k);

/// Requests k sampled completions per prompt from an OpenAI-compatible
/// endpoint, with bounded in-flight requests, retry with exponential
/// backoff on 429/5xx/timeouts, and per-request statuses. Failed
/// prompts are reported, never silently dropped.
/// Throws ValidationError when the configured API key variable is unset.
GenerationBatch http_generate(const SourceConfig& cfg,
                              const std::vector<curate::Prompt>& prompts,
                              int k);

/// Dispatches on cfg.kind.
GenerationBatch generate(const SourceConfig& cfg,
                         const std::vector<curate::Prompt>& prompts, int k);

}  // namespace steerkit::sources
