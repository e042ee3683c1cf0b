#include "steerkit/textprof.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "steerkit/errors.hpp"

namespace steerkit::textprof {

namespace {

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_letter(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0;
}

bool is_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

struct CleanToken {
  std::string word;
  int letters = 0;
};

/// Lowercases and strips surrounding punctuation. Empty word when the
/// unit carries no letter.
CleanToken clean_token(std::string_view unit) {
  std::size_t begin = 0;
  std::size_t end = unit.size();
  while (begin < end && !is_alnum(unit[begin])) ++begin;
  while (end > begin && !is_alnum(unit[end - 1])) --end;

  CleanToken token;
  for (std::size_t i = begin; i < end; ++i) {
    char c = static_cast<char>(
        std::tolower(static_cast<unsigned char>(unit[i])));
    token.word += c;
    if (is_letter(c)) ++token.letters;
  }
  if (token.letters == 0) token.word.clear();
  return token;
}

}  // namespace

TokenizedText segment(std::string_view text) {
  TokenizedText out;
  out.raw.assign(text);

  // Sentence boundaries: terminator followed by whitespace or end.
  std::vector<std::size_t> boundaries;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_terminator(text[i]) &&
        (i + 1 == text.size() || is_space(text[i + 1]))) {
      boundaries.push_back(i);
    }
  }

  // Words carry the index of the sentence they start in.
  std::vector<std::size_t> word_sentence;
  std::size_t i = 0;
  std::size_t boundary_cursor = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    CleanToken token = clean_token(text.substr(start, i - start));
    if (token.word.empty()) continue;
    while (boundary_cursor < boundaries.size() &&
           boundaries[boundary_cursor] < start) {
      ++boundary_cursor;
    }
    out.words.push_back(std::move(token.word));
    out.word_char_lengths.push_back(token.letters);
    word_sentence.push_back(boundary_cursor);
  }

  // Group consecutive words sharing a sentence index; sentences without
  // any word token vanish here.
  for (std::size_t w = 0; w < out.words.size();) {
    std::size_t span_end = w + 1;
    while (span_end < out.words.size() &&
           word_sentence[span_end] == word_sentence[w]) {
      ++span_end;
    }
    out.sentences.push_back({w, span_end});
    w = span_end;
  }
  return out;
}

int syllable_count(std::string_view word) {
  if (word.empty()) {
    throw ValidationError("syllable_count: empty word");
  }
  int groups = 0;
  bool in_group = false;
  for (char c : word) {
    if (is_vowel(c)) {
      if (!in_group) ++groups;
      in_group = true;
    } else {
      in_group = false;
    }
  }
  if (word.back() == 'e') --groups;
  return std::max(groups, 1);
}

double gunning_fog(const TokenizedText& t) {
  if (t.words.empty() || t.sentences.empty()) {
    throw UndefinedMetricError("gunning_fog needs at least one word and sentence");
  }
  std::int64_t complex_words = 0;
  for (const auto& word : t.words) {
    if (syllable_count(word) >= 3) ++complex_words;
  }
  const double words = static_cast<double>(t.words.size());
  const double sentences = static_cast<double>(t.sentences.size());
  return 0.4 * (words / sentences + 100.0 * complex_words / words);
}

double rix(const TokenizedText& t) {
  if (t.sentences.empty()) {
    throw UndefinedMetricError("rix needs at least one sentence");
  }
  std::int64_t long_words = 0;
  for (int letters : t.word_char_lengths) {
    if (letters > 6) ++long_words;
  }
  return static_cast<double>(long_words) /
         static_cast<double>(t.sentences.size());
}

namespace {

/// One directional factor scan. A factor completes every time the
/// running type-token ratio of the open window drops below the
/// threshold; the leftover window contributes a partial factor.
template <typename Iter>
double factor_count(Iter begin, Iter end, double threshold) {
  double factors = 0.0;
  std::unordered_set<std::string_view> types;
  std::size_t window_tokens = 0;
  for (Iter it = begin; it != end; ++it) {
    types.insert(std::string_view(*it));
    ++window_tokens;
    double ttr = static_cast<double>(types.size()) /
                 static_cast<double>(window_tokens);
    if (ttr < threshold) {
      factors += 1.0;
      types.clear();
      window_tokens = 0;
    }
  }
  if (window_tokens > 0) {
    double ttr = static_cast<double>(types.size()) /
                 static_cast<double>(window_tokens);
    factors += (1.0 - ttr) / (1.0 - threshold);
  }
  return factors;
}

}  // namespace

MtldResult mtld(const TokenizedText& t, double threshold) {
  if (t.words.size() < 2) {
    throw UndefinedMetricError("mtld needs at least two words");
  }
  const double tokens = static_cast<double>(t.words.size());
  const double forward = factor_count(t.words.begin(), t.words.end(), threshold);
  const double backward =
      factor_count(t.words.rbegin(), t.words.rend(), threshold);
  // Both directions hit zero factors only when every token is distinct;
  // the token count stands in as a finite value then.
  if (forward == 0.0 || backward == 0.0) {
    return {tokens, true};
  }
  return {0.5 * (tokens / forward + tokens / backward), false};
}

TextProfile profile_text(std::string_view text) {
  TokenizedText t = segment(text);
  TextProfile profile;
  profile.token_count = static_cast<std::int64_t>(t.words.size());
  try {
    profile.gunning_fog = gunning_fog(t);
  } catch (const UndefinedMetricError&) {
  }
  try {
    profile.rix = rix(t);
  } catch (const UndefinedMetricError&) {
  }
  try {
    MtldResult r = mtld(t);
    profile.mtld = r.value;
    profile.mtld_degenerate = r.degenerate;
  } catch (const UndefinedMetricError&) {
  }
  return profile;
}

namespace {

MetricAggregate aggregate(const std::vector<double>& values,
                          std::int64_t skipped) {
  MetricAggregate agg;
  agg.count = static_cast<std::int64_t>(values.size());
  agg.skipped = skipped;
  if (values.empty()) return agg;
  auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  if (*min_it == *max_it) {
    // Constant corpus: mean is that constant, stddev exactly zero.
    agg.mean = *min_it;
    agg.stddev = 0.0;
    return agg;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  agg.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - agg.mean) * (v - agg.mean);
  agg.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return agg;
}

CorpusProfile aggregate_profiles(const std::vector<TextProfile>& profiles) {
  CorpusProfile corpus;
  corpus.record_count = static_cast<std::int64_t>(profiles.size());

  std::vector<double> tokens, fog, rix_values, mtld_values;
  std::int64_t fog_skipped = 0, rix_skipped = 0, mtld_skipped = 0;
  for (const auto& p : profiles) {
    tokens.push_back(static_cast<double>(p.token_count));
    if (p.gunning_fog) fog.push_back(*p.gunning_fog); else ++fog_skipped;
    if (p.rix) rix_values.push_back(*p.rix); else ++rix_skipped;
    if (p.mtld && !p.mtld_degenerate) {
      mtld_values.push_back(*p.mtld);
    } else {
      // The token-count fallback is a selection convention, not a
      // diversity measurement; keep it out of the corpus mean.
      ++mtld_skipped;
    }
  }
  corpus.metrics["token_count"] = aggregate(tokens, 0);
  corpus.metrics["gunning_fog"] = aggregate(fog, fog_skipped);
  corpus.metrics["rix"] = aggregate(rix_values, rix_skipped);
  corpus.metrics["mtld"] = aggregate(mtld_values, mtld_skipped);
  return corpus;
}

}  // namespace

CorpusProfile profile_corpus(const std::vector<std::string>& records) {
  if (records.empty()) {
    throw ValidationError("profile_corpus: empty record list");
  }
  std::vector<TextProfile> profiles(records.size());
  const std::int64_t n = static_cast<std::int64_t>(records.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    profiles[static_cast<std::size_t>(i)] =
        profile_text(records[static_cast<std::size_t>(i)]);
  }
  return aggregate_profiles(profiles);
}

CorpusProfile profile_corpus_serial(const std::vector<std::string>& records) {
  if (records.empty()) {
    throw ValidationError("profile_corpus: empty record list");
  }
  std::vector<TextProfile> profiles;
  profiles.reserve(records.size());
  for (const auto& record : records) {
    profiles.push_back(profile_text(record));
  }
  return aggregate_profiles(profiles);
}

}  // namespace steerkit::textprof
