#include "steerkit/sources.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "steerkit/errors.hpp"
#include "steerkit/rng.hpp"
#include "steerkit/safety.hpp"

namespace steerkit::sources {

using json = nlohmann::json;

void SourceConfig::validate() const {
  if (name.empty()) throw ValidationError("source: empty name");
  if (max_tokens <= 0) throw ValidationError("source " + name + ": max_tokens must be > 0");
  if (max_retries < 0) throw ValidationError("source " + name + ": max_retries must be >= 0");
  if (parallelism < 1) throw ValidationError("source " + name + ": parallelism must be >= 1");
  if (kind == SourceKind::kHttp) {
    if (endpoint.empty()) throw ValidationError("source " + name + ": empty endpoint");
    if (model.empty()) throw ValidationError("source " + name + ": empty model");
    if (api_key_env.empty()) throw ValidationError("source " + name + ": empty api_key_env");
  } else {
    if (mean_length < 1) throw ValidationError("source " + name + ": mean_length must be >= 1");
    if (vocab_size < 1) throw ValidationError("source " + name + ": vocab_size must be >= 1");
    if (!(toxic_word_rate >= 0.0 && toxic_word_rate <= 1.0)) {
      throw ValidationError("source " + name + ": toxic_word_rate outside [0,1]");
    }
  }
}

bool GenerationBatch::fully_ok() const {
  return std::all_of(statuses.begin(), statuses.end(), [](const RequestStatus& s) {
    return s.state != RequestState::kFailed;
  });
}

std::int64_t GenerationBatch::failed_count() const {
  return std::count_if(statuses.begin(), statuses.end(), [](const RequestStatus& s) {
    return s.state == RequestState::kFailed;
  });
}

std::string render_prompt(const curate::Prompt& p) {
  if (p.instruction.empty()) {
    throw ValidationError("render_prompt: empty instruction for prompt " + p.id);
  }
  if (p.input && !p.input->empty()) {
    return "Below is an instruction that describes a task, paired with an "
           "input that provides further context. Write a response that "
           "appropriately completes the request.\n\n### Instruction:\n" +
           p.instruction + "\n\n### Input:\n" + *p.input +
           "\n\n### Response:\n";
  }
  return "Below is an instruction that describes a task. Write a response "
         "that appropriately completes the request.\n\n### Instruction:\n" +
         p.instruction + "\n\n### Response:\n";
}

namespace {

std::vector<std::string> build_vocab(int vocab_size) {
  static const char* kSyllables[] = {"ba", "bel", "co", "dra", "fen", "gi",
                                     "hol", "ka", "lu", "mer", "nod", "or",
                                     "pra", "qui", "ros", "sel", "tu", "vim",
                                     "wol", "zy"};
  constexpr std::uint64_t kBank = sizeof(kSyllables) / sizeof(kSyllables[0]);
  std::vector<std::string> vocab;
  for (std::uint64_t j = 0; static_cast<int>(vocab.size()) < vocab_size; ++j) {
    std::uint64_t h = Rng(j).next_u64();
    const int parts = 1 + static_cast<int>(h % 4);
    std::string word;
    for (int t = 0; t < parts; ++t) {
      word += kSyllables[(h >> (8 * t + 2)) % kBank];
    }
    if (std::find(vocab.begin(), vocab.end(), word) == vocab.end()) {
      vocab.push_back(std::move(word));
    }
  }
  return vocab;
}

std::vector<std::string> lexicon_words() {
  std::vector<std::string> words;
  for (const auto& [word, weight] : safety::default_lexicon()) {
    words.push_back(word);
  }
  return words;
}

std::string mock_text(const SourceConfig& cfg, const std::string& prompt_id,
                      int sample_index, const std::vector<std::string>& vocab,
                      const std::vector<std::string>& toxic_words) {
  Rng rng(derive_seed(derive_seed(cfg.seed, prompt_id),
                      static_cast<std::uint64_t>(sample_index)));

  // Geometric word count with mean mean_length, capped at max_tokens.
  int length = 1;
  if (cfg.mean_length > 1) {
    const double p = 1.0 / static_cast<double>(cfg.mean_length);
    const double u = rng.next_double();
    length = 1 + static_cast<int>(std::floor(std::log1p(-u) / std::log1p(-p)));
  }
  length = std::min(length, cfg.max_tokens);

  constexpr double kSentenceBreakRate = 1.0 / 12.0;
  std::string text;
  for (int w = 0; w < length; ++w) {
    if (!text.empty()) text += ' ';
    if (rng.next_bool(cfg.toxic_word_rate)) {
      text += toxic_words[rng.bounded(toxic_words.size())];
    } else {
      text += vocab[rng.bounded(vocab.size())];
    }
    if (w + 1 == length || rng.next_bool(kSentenceBreakRate)) {
      text += '.';
    }
  }
  return text;
}

void sort_batch(GenerationBatch& batch) {
  std::sort(batch.candidates.begin(), batch.candidates.end(),
            [](const curate::Candidate& a, const curate::Candidate& b) {
              if (a.prompt_id != b.prompt_id) return a.prompt_id < b.prompt_id;
              if (a.source_model != b.source_model) {
                return a.source_model < b.source_model;
              }
              return a.sample_index < b.sample_index;
            });
  std::sort(batch.statuses.begin(), batch.statuses.end(),
            [](const RequestStatus& a, const RequestStatus& b) {
              return a.prompt_id < b.prompt_id;
            });
}

GenerationBatch mock_batch_impl(const SourceConfig& cfg,
                                const std::vector<curate::Prompt>& prompts,
                                int k, bool parallel) {
  cfg.validate();
  if (k < 1) throw ValidationError("mock_generate: k must be >= 1");
  const auto vocab = build_vocab(cfg.vocab_size);
  const auto toxic_words = lexicon_words();

  std::vector<std::vector<curate::Candidate>> slots(prompts.size());
  const std::int64_t n = static_cast<std::int64_t>(prompts.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& prompt = prompts[static_cast<std::size_t>(i)];
    auto& out = slots[static_cast<std::size_t>(i)];
    out.reserve(static_cast<std::size_t>(k));
    for (int s = 0; s < k; ++s) {
      curate::Candidate c;
      c.prompt_id = prompt.id;
      c.source_model = cfg.name;
      c.sample_index = s;
      c.text = mock_text(cfg, prompt.id, s, vocab, toxic_words);
      out.push_back(std::move(c));
    }
  }

  GenerationBatch batch;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (auto& c : slots[i]) batch.candidates.push_back(std::move(c));
    batch.statuses.push_back({prompts[i].id, RequestState::kOk, 0, ""});
  }
  sort_batch(batch);
  return batch;
}

}  // namespace

std::vector<curate::Candidate> mock_generate(const SourceConfig& cfg,
                                             const curate::Prompt& p, int k) {
  return mock_batch_impl(cfg, {p}, k, /*parallel=*/false).candidates;
}

GenerationBatch mock_generate_batch(const SourceConfig& cfg,
                                    const std::vector<curate::Prompt>& prompts,
                                    int k) {
  return mock_batch_impl(cfg, prompts, k, /*parallel=*/true);
}

GenerationBatch mock_generate_batch_serial(
    const SourceConfig& cfg, const std::vector<curate::Prompt>& prompts, int k) {
  return mock_batch_impl(cfg, prompts, k, /*parallel=*/false);
}

namespace {

struct HttpOutcome {
  std::vector<std::string> texts;
  RequestStatus status;
};

bool transient_status(int code) {
  return code == 429 || (code >= 500 && code < 600);
}

HttpOutcome run_request(const SourceConfig& cfg, const std::string& api_key,
                        const curate::Prompt& prompt, int k) {
  HttpOutcome outcome;
  outcome.status.prompt_id = prompt.id;

  json body;
  body["model"] = cfg.model;
  body["temperature"] = cfg.temperature;
  body["max_tokens"] = cfg.max_tokens;
  body["n"] = k;
  std::string path;
  if (cfg.api == HttpApi::kChat) {
    path = "/v1/chat/completions";
    body["messages"] =
        json::array({{{"role", "user"}, {"content", render_prompt(prompt)}}});
  } else {
    path = "/v1/completions";
    body["prompt"] = render_prompt(prompt);
  }
  const std::string payload = body.dump();

  httplib::Client client(cfg.endpoint);
  client.set_connection_timeout(cfg.timeout_ms / 1000,
                                (cfg.timeout_ms % 1000) * 1000);
  client.set_read_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);
  const httplib::Headers headers = {{"Authorization", "Bearer " + api_key}};

  Rng jitter_rng(derive_seed(cfg.seed, "backoff-" + prompt.id));
  std::string last_error;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      const int delay = cfg.backoff_ms * (1 << (attempt - 1)) +
                        static_cast<int>(jitter_rng.bounded(
                            static_cast<std::uint64_t>(cfg.backoff_ms) + 1));
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    auto result = client.Post(path, headers, payload, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      continue;  // connection failures and timeouts are retriable
    }
    if (transient_status(result->status)) {
      last_error = "HTTP " + std::to_string(result->status);
      continue;
    }
    if (result->status < 200 || result->status >= 300) {
      outcome.status.state = RequestState::kFailed;
      outcome.status.retries = attempt;
      outcome.status.error = "HTTP " + std::to_string(result->status);
      return outcome;
    }
    json parsed = json::parse(result->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") ||
        !parsed["choices"].is_array()) {
      outcome.status.state = RequestState::kFailed;
      outcome.status.retries = attempt;
      outcome.status.error = "malformed completion response";
      return outcome;
    }
    const auto& choices = parsed["choices"];
    if (static_cast<int>(choices.size()) != k) {
      outcome.status.state = RequestState::kFailed;
      outcome.status.retries = attempt;
      outcome.status.error = "expected " + std::to_string(k) + " choices, got " +
                             std::to_string(choices.size());
      return outcome;
    }
    for (const auto& choice : choices) {
      if (cfg.api == HttpApi::kChat) {
        outcome.texts.push_back(choice.at("message").at("content").get<std::string>());
      } else {
        outcome.texts.push_back(choice.at("text").get<std::string>());
      }
    }
    outcome.status.state = attempt > 0 ? RequestState::kRetried : RequestState::kOk;
    outcome.status.retries = attempt;
    return outcome;
  }
  outcome.status.state = RequestState::kFailed;
  outcome.status.retries = cfg.max_retries;
  outcome.status.error = last_error + " after " +
                         std::to_string(cfg.max_retries) + " retries";
  return outcome;
}

}  // namespace

GenerationBatch http_generate(const SourceConfig& cfg,
                              const std::vector<curate::Prompt>& prompts,
                              int k) {
  cfg.validate();
  if (k < 1) throw ValidationError("http_generate: k must be >= 1");
  const char* key = std::getenv(cfg.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ValidationError("source " + cfg.name + ": environment variable " +
                          cfg.api_key_env + " is not set");
  }
  const std::string api_key = key;

  std::vector<HttpOutcome> outcomes(prompts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= prompts.size()) break;
      outcomes[i] = run_request(cfg, api_key, prompts[i], k);
    }
  };
  const std::size_t thread_count = std::min<std::size_t>(
      static_cast<std::size_t>(cfg.parallelism), std::max<std::size_t>(prompts.size(), 1));
  std::vector<std::thread> threads;
  threads.reserve(thread_count);
  for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  GenerationBatch batch;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    auto& outcome = outcomes[i];
    batch.statuses.push_back(outcome.status);
    for (std::size_t s = 0; s < outcome.texts.size(); ++s) {
      curate::Candidate c;
      c.prompt_id = prompts[i].id;
      c.source_model = cfg.name;
      c.sample_index = static_cast<int>(s);
      c.text = std::move(outcome.texts[s]);
      batch.candidates.push_back(std::move(c));
    }
  }
  sort_batch(batch);
  return batch;
}

GenerationBatch generate(const SourceConfig& cfg,
                         const std::vector<curate::Prompt>& prompts, int k) {
  return cfg.kind == SourceKind::kMock ? mock_generate_batch(cfg, prompts, k)
                                       : http_generate(cfg, prompts, k);
}

}  // namespace steerkit::sources
