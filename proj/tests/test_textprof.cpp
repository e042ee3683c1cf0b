#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "steerkit/errors.hpp"
#include "steerkit/rng.hpp"
#include "steerkit/textprof.hpp"

using steerkit::Rng;
using steerkit::UndefinedMetricError;
namespace textprof = steerkit::textprof;

namespace {

// Independent reference for the lexical-diversity measure: index-based,
// set-based, one direction at a time. Deliberately written with a
// different structure than the library implementation so a shared bug
// is unlikely.
double reference_factors(const std::vector<std::string>& tokens,
                         bool reversed, double threshold) {
  std::vector<std::string> seq = tokens;
  if (reversed) std::reverse(seq.begin(), seq.end());
  double factors = 0.0;
  std::set<std::string> types;
  int window = 0;
  double ttr = 1.0;
  for (const auto& token : seq) {
    types.insert(token);
    ++window;
    ttr = static_cast<double>(types.size()) / window;
    if (ttr < threshold) {
      factors += 1.0;
      types.clear();
      window = 0;
      ttr = 1.0;
    }
  }
  if (window > 0) factors += (1.0 - ttr) / (1.0 - threshold);
  return factors;
}

/// nullopt when either direction completes zero factors (the library
/// reports the token-count convention there).
std::optional<double> reference_mtld(const std::vector<std::string>& tokens,
                                     double threshold = 0.72) {
  const double forward = reference_factors(tokens, false, threshold);
  const double backward = reference_factors(tokens, true, threshold);
  if (forward == 0.0 || backward == 0.0) return std::nullopt;
  const double n = static_cast<double>(tokens.size());
  return 0.5 * (n / forward + n / backward);
}

std::string repeat_word(const std::string& word, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

/// Random word-salad texts with controlled vocabulary size so both
/// repetitive and diverse regimes appear.
std::string random_text(Rng& rng, int vocab, int length) {
  std::string out;
  for (int i = 0; i < length; ++i) {
    if (!out.empty()) out += ' ';
    out += "w" + std::to_string(rng.bounded(static_cast<std::uint64_t>(vocab)));
    if (rng.next_bool(0.08)) out += '.';
  }
  out += '.';
  return out;
}

std::string fixture_path(const char* name) {
  return std::string(STEERKIT_FIXTURE_DIR) + "/" + name;
}

std::string read_fixture(const char* name) {
  std::ifstream in(fixture_path(name));
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("segmentation splits on terminators followed by whitespace") {
  auto t = textprof::segment("The cat sat.");
  CHECK(t.sentences.size() == 1);
  REQUIRE(t.words.size() == 3);
  CHECK(t.words[0] == "the");
  CHECK(t.words[1] == "cat");
  CHECK(t.words[2] == "sat");

  auto two = textprof::segment("Hi! Go.");
  CHECK(two.sentences.size() == 2);
  REQUIRE(two.words.size() == 2);
  CHECK(two.words[0] == "hi");
  CHECK(two.words[1] == "go");

  auto empty = textprof::segment("");
  CHECK(empty.sentences.empty());
  CHECK(empty.words.empty());
}

TEST_CASE("segmentation drops tokens without letters and strips punctuation") {
  auto t = textprof::segment("Wait -- 42 :: \"yes\", (ok)!");
  REQUIRE(t.words.size() == 3);
  CHECK(t.words[0] == "wait");
  CHECK(t.words[1] == "yes");
  CHECK(t.words[2] == "ok");
  // "3.5" and "--" carry no letter; a decimal point inside a number is
  // not a sentence boundary unless followed by whitespace.
  auto nums = textprof::segment("pi is 3.14 yes");
  REQUIRE(nums.words.size() == 3);
  CHECK(nums.sentences.size() == 1);
}

TEST_CASE("segmentation covers every word exactly once, in order") {
  Rng rng(11);
  for (int round = 0; round < 30; ++round) {
    const std::string text =
        random_text(rng, 2 + static_cast<int>(rng.bounded(30)),
                    1 + static_cast<int>(rng.bounded(120)));
    auto t = textprof::segment(text);
    std::size_t covered = 0;
    std::size_t cursor = 0;
    for (const auto& s : t.sentences) {
      CHECK(s.begin == cursor);
      CHECK(s.end > s.begin);
      cursor = s.end;
      covered += s.word_count();
    }
    CHECK(covered == t.words.size());
  }
}

TEST_CASE("re-segmenting the joined word list is a fixed point") {
  Rng rng(12);
  for (int round = 0; round < 20; ++round) {
    const std::string text = random_text(rng, 12, 60);
    auto once = textprof::segment(text);
    std::string joined;
    for (const auto& w : once.words) {
      if (!joined.empty()) joined += ' ';
      joined += w;
    }
    auto twice = textprof::segment(joined);
    CHECK(twice.words == once.words);
  }
}

TEST_CASE("syllable counting follows the vowel-group rule") {
  CHECK(textprof::syllable_count("cat") == 1);
  CHECK(textprof::syllable_count("beautiful") == 3);
  CHECK(textprof::syllable_count("the") == 1);  // terminal-e clamp
  CHECK(textprof::syllable_count("unbelievable") == 4);
  CHECK(textprof::syllable_count("complexity") == 4);
  CHECK(textprof::syllable_count("dominates") == 4);
  CHECK(textprof::syllable_count("rhythm") == 1);
  CHECK_THROWS_AS(textprof::syllable_count(""), steerkit::ValidationError);
}

TEST_CASE("readability formula on hand-checked sentences") {
  CHECK(textprof::gunning_fog(textprof::segment("The cat sat.")) ==
        doctest::Approx(1.2).epsilon(1e-12));
  CHECK(textprof::gunning_fog(
            textprof::segment("Unbelievable complexity dominates.")) ==
        doctest::Approx(41.2).epsilon(1e-12));
  CHECK_THROWS_AS(textprof::gunning_fog(textprof::segment("")),
                  UndefinedMetricError);
  CHECK_THROWS_AS(textprof::gunning_fog(textprof::segment("... !!")),
                  UndefinedMetricError);
}

TEST_CASE("long-words-per-sentence ratio") {
  CHECK(textprof::rix(textprof::segment("The elephant wandered happily.")) ==
        doctest::Approx(3.0).epsilon(1e-12));
  CHECK(textprof::rix(textprof::segment("Hi. Go.")) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(textprof::rix(textprof::segment("")), UndefinedMetricError);
}

TEST_CASE("readability metrics ignore word order within a sentence") {
  auto base = textprof::segment("unbelievable complexity dominates the day.");
  auto shuffled = textprof::segment("the day dominates unbelievable complexity.");
  CHECK(textprof::gunning_fog(base) ==
        doctest::Approx(textprof::gunning_fog(shuffled)).epsilon(1e-12));
  CHECK(textprof::rix(base) ==
        doctest::Approx(textprof::rix(shuffled)).epsilon(1e-12));
}

TEST_CASE("lexical diversity of a fully repetitive text") {
  auto t = textprof::segment(repeat_word("cat", 10) + ".");
  REQUIRE(t.words.size() == 10);
  auto r = textprof::mtld(t);
  CHECK_FALSE(r.degenerate);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("lexical diversity needs two words") {
  CHECK_THROWS_AS(textprof::mtld(textprof::segment("word.")),
                  UndefinedMetricError);
}

TEST_CASE("all-distinct texts fall back to the token count, flagged") {
  auto t = textprof::segment("alpha bravo charlie delta echo.");
  auto r = textprof::mtld(t);
  CHECK(r.degenerate);
  CHECK(r.value == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("lexical diversity matches the independent reference on the "
          "shipped fixture") {
  const std::string text = read_fixture("mtld_paragraph.txt");
  auto t = textprof::segment(text);
  REQUIRE(t.words.size() >= 500);
  auto r = textprof::mtld(t);
  REQUIRE_FALSE(r.degenerate);
  auto ref = reference_mtld(t.words);
  REQUIRE(ref.has_value());
  CHECK(r.value == doctest::Approx(*ref).epsilon(1e-6));
}

TEST_CASE("lexical diversity matches the independent reference on random "
          "texts") {
  Rng rng(99);
  int checked = 0;
  for (int round = 0; round < 50; ++round) {
    const int vocab = 2 + static_cast<int>(rng.bounded(40));
    const int length = 2 + static_cast<int>(rng.bounded(398));
    auto t = textprof::segment(random_text(rng, vocab, length));
    if (t.words.size() < 2) continue;
    auto r = textprof::mtld(t);
    auto ref = reference_mtld(t.words);
    if (!ref) {
      CHECK(r.degenerate);
      CHECK(r.value == doctest::Approx(static_cast<double>(t.words.size()))
                           .epsilon(1e-12));
    } else {
      CHECK_FALSE(r.degenerate);
      CHECK(r.value == doctest::Approx(*ref).epsilon(1e-6));
      ++checked;
    }
  }
  CHECK(checked > 20);  // the regime mix must exercise the real path
}

TEST_CASE("lexical diversity is reversal-symmetric and case-insensitive") {
  auto t = textprof::segment("The cat saw the dog and the dog saw the cat.");
  auto upper =
      textprof::segment("THE CAT SAW THE DOG AND THE DOG SAW THE CAT.");
  CHECK(textprof::mtld(t).value ==
        doctest::Approx(textprof::mtld(upper).value).epsilon(1e-12));

  std::string reversed_text;
  for (auto it = t.words.rbegin(); it != t.words.rend(); ++it) {
    if (!reversed_text.empty()) reversed_text += ' ';
    reversed_text += *it;
  }
  auto reversed = textprof::segment(reversed_text + ".");
  CHECK(textprof::mtld(t).value ==
        doctest::Approx(textprof::mtld(reversed).value).epsilon(1e-12));
}

TEST_CASE("diversity depends only on the token-equality pattern") {
  // Renaming the vocabulary through any bijection preserves which tokens
  // repeat, so the score must not move at all.
  Rng rng(7);
  for (int round = 0; round < 40; ++round) {
    const int vocab = 2 + static_cast<int>(rng.bounded(15));
    const std::string body = random_text(rng, vocab, 10 + static_cast<int>(
                                                          rng.bounded(150)));
    auto original = textprof::segment(body);
    if (original.words.size() < 2) continue;

    std::map<std::string, std::string> renamed_as;
    std::string renamed_text;
    for (const auto& word : original.words) {
      auto [it, inserted] = renamed_as.try_emplace(
          word, "tok" + std::to_string(renamed_as.size()));
      if (!renamed_text.empty()) renamed_text += ' ';
      renamed_text += it->second;
    }
    auto renamed = textprof::segment(renamed_text + ".");
    REQUIRE(renamed.words.size() == original.words.size());

    auto r1 = textprof::mtld(original);
    auto r2 = textprof::mtld(renamed);
    CHECK(r1.degenerate == r2.degenerate);
    CHECK(r1.value == r2.value);
    // The doubled text also still matches the reference implementation.
    auto twice = textprof::segment(body + " " + body);
    auto ref = reference_mtld(twice.words);
    if (ref.has_value()) {
      CHECK(textprof::mtld(twice).value ==
            doctest::Approx(*ref).epsilon(1e-6));
    }
  }
}

TEST_CASE("corpus aggregation equals a per-record loop") {
  Rng rng(31);
  std::vector<std::string> corpus;
  for (int i = 0; i < 100; ++i) {
    corpus.push_back(random_text(rng, 2 + static_cast<int>(rng.bounded(25)),
                                 2 + static_cast<int>(rng.bounded(200))));
  }
  auto profile = textprof::profile_corpus(corpus);
  CHECK(profile.record_count == 100);

  // Brute-force loop over individual records.
  std::vector<double> tokens, fog, rixv, mtldv;
  std::int64_t fog_skip = 0, rix_skip = 0, mtld_skip = 0;
  for (const auto& text : corpus) {
    auto t = textprof::segment(text);
    tokens.push_back(static_cast<double>(t.words.size()));
    try {
      fog.push_back(textprof::gunning_fog(t));
    } catch (const UndefinedMetricError&) {
      ++fog_skip;
    }
    try {
      rixv.push_back(textprof::rix(t));
    } catch (const UndefinedMetricError&) {
      ++rix_skip;
    }
    try {
      auto r = textprof::mtld(t);
      if (r.degenerate) {
        ++mtld_skip;
      } else {
        mtldv.push_back(r.value);
      }
    } catch (const UndefinedMetricError&) {
      ++mtld_skip;
    }
  }
  auto check_metric = [&](const char* name, const std::vector<double>& values,
                          std::int64_t skipped) {
    const auto& agg = profile.metrics.at(name);
    CHECK(agg.count == static_cast<std::int64_t>(values.size()));
    CHECK(agg.skipped == skipped);
    double sum = 0.0, sq = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    for (double v : values) sq += v * v;
    const double variance = sq / static_cast<double>(values.size()) -
                            mean * mean;
    CHECK(agg.mean == doctest::Approx(mean).epsilon(1e-9));
    CHECK(agg.stddev ==
          doctest::Approx(std::sqrt(std::max(variance, 0.0))).epsilon(1e-6));
  };
  check_metric("token_count", tokens, 0);
  check_metric("gunning_fog", fog, fog_skip);
  check_metric("rix", rixv, rix_skip);
  check_metric("mtld", mtldv, mtld_skip);
}

TEST_CASE("corpus aggregation hand cases") {
  auto profile = textprof::profile_corpus(
      {repeat_word("cat", 10) + ".", repeat_word("cat", 30) + "."});
  CHECK(profile.metrics.at("token_count").mean ==
        doctest::Approx(20.0).epsilon(1e-12));

  // A constant corpus has zero spread, exactly.
  std::vector<std::string> constant(7, "The quick brown fox jumps again.");
  auto flat = textprof::profile_corpus(constant);
  for (const auto& [name, agg] : flat.metrics) {
    CAPTURE(name);
    CHECK(agg.stddev == 0.0);
  }
  CHECK(flat.metrics.at("token_count").mean ==
        doctest::Approx(6.0).epsilon(1e-12));

  CHECK_THROWS_AS(textprof::profile_corpus({}), steerkit::ValidationError);
}

TEST_CASE("parallel and serial corpus profiling agree exactly") {
  Rng rng(55);
  std::vector<std::string> corpus;
  for (int i = 0; i < 160; ++i) {
    corpus.push_back(random_text(rng, 2 + static_cast<int>(rng.bounded(20)),
                                 1 + static_cast<int>(rng.bounded(180))));
  }
  auto parallel = textprof::profile_corpus(corpus);
  auto serial = textprof::profile_corpus_serial(corpus);
  REQUIRE(parallel.metrics.size() == serial.metrics.size());
  for (const auto& [name, agg] : parallel.metrics) {
    const auto& ref = serial.metrics.at(name);
    CHECK(agg.mean == ref.mean);      // bit-identical by design
    CHECK(agg.stddev == ref.stddev);
    CHECK(agg.count == ref.count);
    CHECK(agg.skipped == ref.skipped);
  }
}
