#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "steerkit/curate.hpp"
#include "steerkit/errors.hpp"
#include "steerkit/rng.hpp"

using steerkit::Rng;
using steerkit::ValidationError;
namespace curate = steerkit::curate;
using curate::Candidate;
using curate::CuratedDataset;
using curate::Direction;
using curate::MetricSpec;
using curate::PolicyKind;
using curate::Prompt;
using curate::ScoredPrompt;
using curate::SelectionPolicy;

namespace {

Candidate make_candidate(std::string prompt, std::string source, int sample,
                         double value) {
  Candidate c;
  c.prompt_id = std::move(prompt);
  c.source_model = std::move(source);
  c.sample_index = sample;
  c.text = "candidate " + c.source_model + " " + std::to_string(sample);
  c.metric_value = value;
  return c;
}

MetricSpec custom_metric(Direction direction) {
  MetricSpec spec;
  spec.name = "custom";
  spec.direction = direction;
  return spec;
}

std::vector<Candidate> random_pool(Rng& rng, std::size_t size,
                                   std::uint64_t value_levels) {
  std::vector<Candidate> pool;
  pool.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    // Few distinct levels so ties occur in almost every pool.
    const double value = static_cast<double>(rng.bounded(value_levels));
    pool.push_back(make_candidate("p", "m", static_cast<int>(i), value));
  }
  return pool;
}

bool records_equal(const curate::CuratedRecord& a,
                   const curate::CuratedRecord& b) {
  return a.prompt_id == b.prompt_id && a.instruction == b.instruction &&
         a.input == b.input && a.output == b.output &&
         a.source_model == b.source_model && a.sample_index == b.sample_index &&
         a.metric_value == b.metric_value;
}

}  // namespace

TEST_CASE("selection returns the first extremum over many random pools") {
  Rng rng(20240811);
  SelectionPolicy best{PolicyKind::kBestOfK, 0};
  int pools_checked = 0;
  for (int iter = 0; iter < 1200; ++iter) {
    const std::size_t size = 1 + rng.bounded(12);
    auto pool = random_pool(rng, size, 4);
    const Direction direction =
        rng.bounded(2) == 0 ? Direction::kMaximize : Direction::kMinimize;
    const MetricSpec spec = custom_metric(direction);
    const std::size_t chosen = curate::select(pool, spec, best);

    std::vector<double> values;
    for (const auto& c : pool) values.push_back(*c.metric_value);
    // std::max_element / std::min_element return the first occurrence of
    // the extremum, which is exactly the documented tie-break.
    const auto it = direction == Direction::kMaximize
                        ? std::max_element(values.begin(), values.end())
                        : std::min_element(values.begin(), values.end());
    const auto expected =
        static_cast<std::size_t>(std::distance(values.begin(), it));
    REQUIRE(chosen == expected);
    ++pools_checked;
  }
  CHECK(pools_checked == 1200);
}

TEST_CASE("selection is invariant under positive affine rescaling") {
  Rng rng(77001);
  SelectionPolicy best{PolicyKind::kBestOfK, 0};
  // Scales and offsets chosen so that integer-valued metrics transform
  // exactly in floating point, keeping ties ties.
  const double scales[] = {0.5, 2.0, 3.25};
  const double offsets[] = {-5.0, 0.0, 7.5};
  for (int iter = 0; iter < 1000; ++iter) {
    const std::size_t size = 1 + rng.bounded(10);
    auto pool = random_pool(rng, size, 5);
    const Direction direction =
        rng.bounded(2) == 0 ? Direction::kMaximize : Direction::kMinimize;
    const MetricSpec spec = custom_metric(direction);
    const std::size_t base = curate::select(pool, spec, best);

    const double a = scales[iter % 3];
    const double b = offsets[(iter / 3) % 3];
    auto rescaled = pool;
    for (auto& c : rescaled) c.metric_value = a * (*c.metric_value) + b;
    CHECK(curate::select(rescaled, spec, best) == base);
  }
}

TEST_CASE("minimizing a metric equals maximizing its negation") {
  Rng rng(77002);
  SelectionPolicy best{PolicyKind::kBestOfK, 0};
  for (int iter = 0; iter < 1000; ++iter) {
    const std::size_t size = 1 + rng.bounded(10);
    auto pool = random_pool(rng, size, 6);
    const std::size_t via_min =
        curate::select(pool, custom_metric(Direction::kMinimize), best);
    auto negated = pool;
    for (auto& c : negated) c.metric_value = -*c.metric_value;
    const std::size_t via_max =
        curate::select(negated, custom_metric(Direction::kMaximize), best);
    CHECK(via_min == via_max);
  }
}

TEST_CASE("uniform selection is seed-reproducible, in range, and covers") {
  Rng rng(77003);
  const MetricSpec spec = custom_metric(Direction::kMaximize);
  std::set<std::size_t> seen;
  for (int iter = 0; iter < 500; ++iter) {
    auto pool = random_pool(rng, 5, 4);
    SelectionPolicy uniform{PolicyKind::kUniformRandom, rng.next_u64()};
    const std::size_t first = curate::select(pool, spec, uniform);
    const std::size_t second = curate::select(pool, spec, uniform);
    REQUIRE(first == second);
    REQUIRE(first < pool.size());
    seen.insert(first);
  }
  // 500 seeds over 5 slots: every index should come up.
  CHECK(seen.size() == 5);
}

TEST_CASE("selection rejects empty pools and missing values") {
  SelectionPolicy best{PolicyKind::kBestOfK, 0};
  const MetricSpec spec = custom_metric(Direction::kMaximize);
  std::vector<Candidate> empty;
  CHECK_THROWS_AS(curate::select(empty, spec, best), ValidationError);

  std::vector<Candidate> pool = {make_candidate("p", "m", 0, 1.0)};
  pool.push_back(make_candidate("p", "m", 1, 2.0));
  pool[1].metric_value.reset();
  CHECK_THROWS_AS(curate::select(pool, spec, best), ValidationError);

  // Uniform selection never looks at metric values.
  SelectionPolicy uniform{PolicyKind::kUniformRandom, 9};
  const std::size_t chosen = curate::select(pool, spec, uniform);
  CHECK(chosen < pool.size());
}

TEST_CASE("metric values are computed in place for textual metrics") {
  std::vector<Candidate> candidates = {
      make_candidate("p1", "m", 0, 0.0),
      make_candidate("p1", "m", 1, 0.0),
  };
  candidates[0].text = "one two three";
  candidates[0].metric_value.reset();
  candidates[1].text = "just one two three four five.";
  candidates[1].metric_value.reset();

  curate::ensure_metric_values(candidates,
                               MetricSpec::with_default_direction("token_count"));
  REQUIRE(candidates[0].metric_value.has_value());
  CHECK(*candidates[0].metric_value == 3.0);
  CHECK(*candidates[1].metric_value == 6.0);

  // Pre-existing values are left untouched.
  std::vector<Candidate> preset = {make_candidate("p1", "m", 0, 42.0)};
  curate::ensure_metric_values(preset,
                               MetricSpec::with_default_direction("token_count"));
  CHECK(*preset[0].metric_value == 42.0);
}

TEST_CASE("toxicity metric needs a scorer and uses it when given") {
  std::vector<Candidate> candidates = {make_candidate("p1", "m", 0, 0.0)};
  candidates[0].metric_value.reset();
  const MetricSpec spec = MetricSpec::with_default_direction("toxicity");
  CHECK(spec.direction == Direction::kMinimize);

  auto missing = candidates;
  CHECK_THROWS_AS(curate::ensure_metric_values(missing, spec), ValidationError);

  curate::ensure_metric_values(
      candidates, spec, [](const std::string& text) {
        return text.size() > 10 ? 0.75 : 0.25;
      });
  REQUIRE(candidates[0].metric_value.has_value());
  CHECK(*candidates[0].metric_value == 0.75);
}

TEST_CASE("custom metric without values cannot be computed") {
  std::vector<Candidate> candidates = {make_candidate("p1", "m", 0, 0.0)};
  candidates[0].metric_value.reset();
  CHECK_THROWS_WITH_AS(
      curate::ensure_metric_values(candidates, custom_metric(Direction::kMaximize)),
      doctest::Contains("custom"), ValidationError);
}

TEST_CASE("curation hand fixture picks the per-prompt maxima") {
  std::vector<Prompt> prompts = {{"p1", "ask one", std::nullopt},
                                 {"p2", "ask two", std::string("extra")}};
  std::vector<Candidate> candidates = {
      make_candidate("p1", "alpha", 0, 10.0),
      make_candidate("p1", "alpha", 1, 50.0),
      make_candidate("p2", "alpha", 0, 30.0),
      make_candidate("p2", "beta", 0, 20.0),
  };
  const SelectionPolicy best{PolicyKind::kBestOfK, 0};
  CuratedDataset dataset = curate::curate_dataset(
      prompts, candidates, custom_metric(Direction::kMaximize), best);

  REQUIRE(dataset.records.size() == 2);
  CHECK(dataset.records[0].prompt_id == "p1");
  CHECK(dataset.records[0].metric_value == 50.0);
  CHECK(dataset.records[0].sample_index == 1);
  CHECK(dataset.records[1].prompt_id == "p2");
  CHECK(dataset.records[1].metric_value == 30.0);
  CHECK(dataset.records[1].source_model == "alpha");
  CHECK(dataset.records[1].input == std::string("extra"));

  double mean = 0.0;
  for (const auto& r : dataset.records) mean += r.metric_value;
  mean /= static_cast<double>(dataset.records.size());
  CHECK(mean == 40.0);

  CHECK(dataset.candidate_count == 4);
  CHECK(dataset.pool_sources == std::vector<std::string>{"alpha", "beta"});
}

TEST_CASE("curation matches a brute-force per-prompt search at scale") {
  Rng rng(555001);
  std::vector<Prompt> prompts;
  std::vector<Candidate> candidates;
  std::map<std::string, std::pair<double, std::pair<std::string, int>>> oracle;
  const std::vector<std::string> sources = {"alpha", "beta", "gamma"};
  for (int p = 0; p < 60; ++p) {
    char id[16];
    std::snprintf(id, sizeof(id), "p%03d", p);
    prompts.push_back({id, "ask " + std::string(id), std::nullopt});
    const std::size_t pool_size = 1 + rng.bounded(8);
    double best_value = 0.0;
    std::pair<std::string, int> best_key;
    // Distinct values per pool so the winner is unique.
    std::vector<std::uint64_t> raw(pool_size);
    for (std::size_t i = 0; i < pool_size; ++i) raw[i] = i;
    rng.shuffle(raw);
    for (std::size_t i = 0; i < pool_size; ++i) {
      const auto& source = sources[rng.bounded(sources.size())];
      int sample = static_cast<int>(i);
      const double value = static_cast<double>(raw[i]) + 0.25;
      candidates.push_back(make_candidate(id, source, sample, value));
      if (i == 0 || value > best_value) {
        best_value = value;
        best_key = {source, sample};
      }
    }
    oracle[id] = {best_value, best_key};
  }

  const SelectionPolicy best{PolicyKind::kBestOfK, 0};
  CuratedDataset dataset = curate::curate_dataset(
      prompts, candidates, custom_metric(Direction::kMaximize), best);
  REQUIRE(dataset.records.size() == prompts.size());
  for (const auto& record : dataset.records) {
    const auto& [value, key] = oracle.at(record.prompt_id);
    CHECK(record.metric_value == value);
    CHECK(record.source_model == key.first);
    CHECK(record.sample_index == key.second);
  }

  // Records come back sorted by prompt id.
  for (std::size_t i = 1; i < dataset.records.size(); ++i) {
    CHECK(dataset.records[i - 1].prompt_id < dataset.records[i].prompt_id);
  }
}

TEST_CASE("tie-break ignores candidate insertion order") {
  std::vector<Prompt> prompts = {{"p1", "ask", std::nullopt}};
  // Equal values; the lexicographically smaller source label must win no
  // matter which order the candidates arrive in.
  std::vector<Candidate> forward = {
      make_candidate("p1", "alpha", 0, 5.0),
      make_candidate("p1", "beta", 0, 5.0),
  };
  std::vector<Candidate> reversed = {forward[1], forward[0]};
  const SelectionPolicy best{PolicyKind::kBestOfK, 0};
  const MetricSpec spec = custom_metric(Direction::kMaximize);

  auto a = curate::curate_dataset(prompts, forward, spec, best);
  auto b = curate::curate_dataset(prompts, reversed, spec, best);
  REQUIRE(a.records.size() == 1);
  CHECK(a.records[0].source_model == "alpha");
  CHECK(records_equal(a.records[0], b.records[0]));

  // Same label: the smaller sample index wins.
  std::vector<Candidate> samples = {
      make_candidate("p1", "alpha", 3, 5.0),
      make_candidate("p1", "alpha", 1, 5.0),
  };
  auto c = curate::curate_dataset(prompts, samples, spec, best);
  CHECK(c.records[0].sample_index == 1);
}

TEST_CASE("uniform curation derives draws from prompt ids") {
  Rng rng(555002);
  std::vector<Prompt> prompts;
  std::vector<Candidate> candidates;
  for (int p = 0; p < 40; ++p) {
    char id[16];
    std::snprintf(id, sizeof(id), "q%03d", p);
    prompts.push_back({id, "ask", std::nullopt});
    for (int s = 0; s < 6; ++s) {
      candidates.push_back(
          make_candidate(id, "m", s, static_cast<double>(rng.bounded(100))));
    }
  }
  const SelectionPolicy uniform{PolicyKind::kUniformRandom, 424242};
  const MetricSpec spec = custom_metric(Direction::kMaximize);

  auto first = curate::curate_dataset(prompts, candidates, spec, uniform);
  auto second = curate::curate_dataset(prompts, candidates, spec, uniform);
  REQUIRE(first.records.size() == second.records.size());
  for (std::size_t i = 0; i < first.records.size(); ++i) {
    CHECK(records_equal(first.records[i], second.records[i]));
  }

  // Insertion order of candidates must not change the draws either.
  auto shuffled = candidates;
  std::vector<std::uint64_t> order(shuffled.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng perm(99);
  perm.shuffle(order);
  std::vector<Candidate> reordered;
  for (auto i : order) reordered.push_back(shuffled[i]);
  auto third = curate::curate_dataset(prompts, reordered, spec, uniform);
  for (std::size_t i = 0; i < first.records.size(); ++i) {
    CHECK(records_equal(first.records[i], third.records[i]));
  }

  // A different seed must change at least one draw.
  const SelectionPolicy other{PolicyKind::kUniformRandom, 424243};
  auto fourth = curate::curate_dataset(prompts, candidates, spec, other);
  bool any_differ = false;
  for (std::size_t i = 0; i < first.records.size(); ++i) {
    if (!records_equal(first.records[i], fourth.records[i])) any_differ = true;
  }
  CHECK(any_differ);
}

TEST_CASE("parallel and serial curation agree bit for bit") {
  Rng rng(555003);
  std::vector<Prompt> prompts;
  std::vector<Candidate> candidates;
  for (int p = 0; p < 120; ++p) {
    char id[16];
    std::snprintf(id, sizeof(id), "r%04d", p);
    prompts.push_back({id, "ask", std::nullopt});
    const std::size_t pool_size = 1 + rng.bounded(5);
    for (std::size_t s = 0; s < pool_size; ++s) {
      candidates.push_back(make_candidate(id, "m", static_cast<int>(s),
                                          rng.next_double() * 100.0));
    }
  }
  for (const auto policy :
       {SelectionPolicy{PolicyKind::kBestOfK, 0},
        SelectionPolicy{PolicyKind::kUniformRandom, 7}}) {
    auto parallel = curate::curate_dataset(
        prompts, candidates, custom_metric(Direction::kMaximize), policy);
    auto serial = curate::curate_dataset_serial(
        prompts, candidates, custom_metric(Direction::kMaximize), policy);
    REQUIRE(parallel.records.size() == serial.records.size());
    for (std::size_t i = 0; i < parallel.records.size(); ++i) {
      CHECK(records_equal(parallel.records[i], serial.records[i]));
    }
  }
}

TEST_CASE("curation reports prompts without candidates") {
  std::vector<Prompt> prompts = {{"p1", "ask", std::nullopt},
                                 {"p2", "ask", std::nullopt}};
  std::vector<Candidate> candidates = {make_candidate("p1", "m", 0, 1.0)};
  CHECK_THROWS_WITH_AS(
      curate::curate_dataset(prompts, candidates,
                             custom_metric(Direction::kMaximize),
                             SelectionPolicy{PolicyKind::kBestOfK, 0}),
      doctest::Contains("p2"), ValidationError);
}

TEST_CASE("curation rejects duplicate prompts and candidates") {
  std::vector<Prompt> prompts = {{"p1", "ask", std::nullopt},
                                 {"p1", "ask again", std::nullopt}};
  std::vector<Candidate> candidates = {make_candidate("p1", "m", 0, 1.0)};
  CHECK_THROWS_WITH_AS(
      curate::curate_dataset(prompts, candidates,
                             custom_metric(Direction::kMaximize),
                             SelectionPolicy{PolicyKind::kBestOfK, 0}),
      doctest::Contains("duplicate prompt"), ValidationError);

  std::vector<Prompt> one_prompt = {{"p1", "ask", std::nullopt}};
  std::vector<Candidate> dupes = {make_candidate("p1", "m", 0, 1.0),
                                  make_candidate("p1", "m", 0, 2.0)};
  CHECK_THROWS_WITH_AS(
      curate::curate_dataset(one_prompt, dupes,
                             custom_metric(Direction::kMaximize),
                             SelectionPolicy{PolicyKind::kBestOfK, 0}),
      doctest::Contains("duplicate candidate"), ValidationError);
}

namespace {

/// Builds a synthetic scored-prompt corpus with exact tier counts:
/// `high` prompts at toxicity >= 0.8, `mid` in [0.5, 0.8) and `low`
/// below 0.5, shuffled together.
std::vector<ScoredPrompt> scored_corpus(int high, int mid, int low,
                                        std::uint64_t seed) {
  std::vector<ScoredPrompt> prompts;
  Rng rng(seed);
  auto add = [&](const char* tier, int count, double lo, double hi) {
    for (int i = 0; i < count; ++i) {
      ScoredPrompt p;
      char id[32];
      std::snprintf(id, sizeof(id), "%s-%06d", tier, i);
      p.id = id;
      p.text = "prompt " + p.id;
      p.toxicity = lo + (hi - lo) * rng.next_double();
      prompts.push_back(std::move(p));
    }
  };
  add("high", high, 0.8, 1.0);
  add("mid", mid, 0.5, 0.7999);
  add("low", low, 0.0, 0.4999);
  rng.shuffle(prompts);
  return prompts;
}

}  // namespace

TEST_CASE("mitigation split partitions by threshold with a capped neutral tail") {
  const auto prompts = scored_corpus(500, 1500, 3000, 31337);
  const auto split =
      curate::build_mitigation_split(prompts, /*test_size=*/300,
                                     /*toxic_threshold=*/0.5,
                                     /*test_threshold=*/0.8,
                                     /*neutral_cap=*/2000, /*seed=*/17);

  REQUIRE(split.test.size() == 300);
  for (const auto& p : split.test) CHECK(p.toxicity >= 0.8);

  // Every non-test prompt at or above the toxic threshold must be in
  // train; neutral prompts are capped.
  CHECK(split.train_toxic == 500 - 300 + 1500);
  CHECK(split.train_neutral == 2000);
  CHECK(split.train.size() == static_cast<std::size_t>(split.train_toxic +
                                                       split.train_neutral));

  std::set<std::string> test_ids;
  for (const auto& p : split.test) test_ids.insert(p.id);
  REQUIRE(test_ids.size() == split.test.size());

  std::set<std::string> train_ids;
  std::int64_t seen_toxic = 0;
  std::int64_t seen_neutral = 0;
  for (const auto& p : split.train) {
    REQUIRE(train_ids.insert(p.id).second);
    REQUIRE(test_ids.count(p.id) == 0);
    if (p.toxicity >= 0.5) {
      ++seen_toxic;
    } else {
      ++seen_neutral;
    }
  }
  CHECK(seen_toxic == split.train_toxic);
  CHECK(seen_neutral == split.train_neutral);

  // Membership oracle: every prompt >= 0.5 ends up in exactly one side.
  for (const auto& p : prompts) {
    if (p.toxicity >= 0.5) {
      CHECK((test_ids.count(p.id) + train_ids.count(p.id)) == 1);
    } else {
      CHECK(test_ids.count(p.id) == 0);
    }
  }
}

TEST_CASE("mitigation split is reproducible and seed-sensitive") {
  const auto prompts = scored_corpus(400, 800, 1200, 424242);
  auto ids = [](const curate::MitigationSplit& split) {
    std::vector<std::string> out;
    for (const auto& p : split.train) out.push_back(p.id);
    out.push_back("|");
    for (const auto& p : split.test) out.push_back(p.id);
    return out;
  };
  const auto a = curate::build_mitigation_split(prompts, 200, 0.5, 0.8, 900, 5);
  const auto b = curate::build_mitigation_split(prompts, 200, 0.5, 0.8, 900, 5);
  CHECK(ids(a) == ids(b));

  const auto c = curate::build_mitigation_split(prompts, 200, 0.5, 0.8, 900, 6);
  CHECK(ids(a) != ids(c));
}

TEST_CASE("mitigation split keeps every neutral prompt under a loose cap") {
  const auto prompts = scored_corpus(100, 100, 500, 1);
  const auto split = curate::build_mitigation_split(prompts, 50, 0.5, 0.8,
                                                    /*neutral_cap=*/10000, 3);
  CHECK(split.train_neutral == 500);
  CHECK(split.train_toxic == 150);
}

TEST_CASE("mitigation split reports the test-pool shortfall") {
  const auto prompts = scored_corpus(100, 200, 300, 2);
  CHECK_THROWS_WITH_AS(
      curate::build_mitigation_split(prompts, 150, 0.5, 0.8, 100, 3),
      doctest::Contains("short by 50"), ValidationError);
}

TEST_CASE("mitigation split validates its thresholds and sizes") {
  const auto prompts = scored_corpus(10, 10, 10, 4);
  CHECK_THROWS_AS(curate::build_mitigation_split(prompts, -1, 0.5, 0.8, 10, 3),
                  ValidationError);
  CHECK_THROWS_AS(curate::build_mitigation_split(prompts, 1, 1.5, 0.8, 10, 3),
                  ValidationError);
  CHECK_THROWS_AS(curate::build_mitigation_split(prompts, 1, 0.5, -0.1, 10, 3),
                  ValidationError);
  CHECK_THROWS_AS(curate::build_mitigation_split(prompts, 1, 0.5, 0.8, -5, 3),
                  ValidationError);
}
