#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace steerkit::textprof {

/// Half-open range of word indices belonging to one sentence.
struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t word_count() const { return end - begin; }
  bool operator==(const SentenceSpan&) const = default;
};

/// A generation broken into sentences and lowercased word tokens.
/// Word tokens are whitespace-delimited units with surrounding
/// punctuation stripped; tokens without a letter are dropped.
struct TokenizedText {
  std::string raw;
  std::vector<SentenceSpan> sentences;
  std::vector<std::string> words;
  std::vector<int> word_char_lengths;  // letters per word
};

/// Deterministic segmentation. Sentence boundaries are ., ! or ?
/// followed by whitespace or end of text; no abbreviation handling.
/// Sentences that contain no word token are dropped.
TokenizedText segment(std::string_view text);

/// Heuristic syllable count: number of maximal vowel groups
/// (a e i o u y), minus one for a terminal "e", floor 1.
/// Throws ValidationError on an empty word.
int syllable_count(std::string_view word);

/// 0.4 * (words/sentences + 100 * complex/words); complex means >= 3
/// syllables. Throws UndefinedMetricError without words or sentences.
double gunning_fog(const TokenizedText& t);

/// Long words (> 6 letters) per sentence.
/// Throws UndefinedMetricError without sentences.
double rix(const TokenizedText& t);

struct MtldResult {
  double value = 0.0;
  /// True when the token stream never completed a diversity factor and
  /// the token count was returned as a convention; corpus aggregation
  /// flags such records in the skip tally.
  bool degenerate = false;
};

constexpr double kMtldDefaultThreshold = 0.72;

/// Two-pass mean of forward and reversed factor counts. Throws
/// UndefinedMetricError for texts with fewer than two words.
MtldResult mtld(const TokenizedText& t, double threshold = kMtldDefaultThreshold);

/// Per-record metric values; metrics whose precondition fails are absent.
struct TextProfile {
  std::int64_t token_count = 0;
  std::optional<double> gunning_fog;
  std::optional<double> rix;
  std::optional<double> mtld;
  bool mtld_degenerate = false;
};

TextProfile profile_text(std::string_view text);

/// Mean / population stddev / contributing-record count for one metric.
/// skipped counts records excluded from the aggregate: those failing a
/// precondition and, for mtld, those where the token-count convention
/// kicked in. count + skipped always equals the record count.
struct MetricAggregate {
  double mean = 0.0;
  double stddev = 0.0;
  std::int64_t count = 0;
  std::int64_t skipped = 0;
};

struct CorpusProfile {
  std::map<std::string, MetricAggregate> metrics;
  std::int64_t record_count = 0;
};

/// Profiles every record and aggregates per metric. OpenMP-parallel over
/// records; the reduction runs serially over the ordered result slots so
/// thread count can never change the output.
/// Throws ValidationError on an empty record list.
CorpusProfile profile_corpus(const std::vector<std::string>& records);

/// Serial reference implementation, kept for tests and the benchmark.
CorpusProfile profile_corpus_serial(const std::vector<std::string>& records);

}  // namespace steerkit::textprof
