#include <doctest.h>

#include <map>
#include <random>

#include "pal/errors.hpp"
#include "pal/voting.hpp"

using namespace pal::scoring;

namespace {

std::optional<Answer> num(double v) { return Answer::number(v); }

// Reference count over valid candidates, used to cross-check majority_vote.
// Ties break on each answer's first-occurrence index, low or high per rule.
std::optional<Answer> brute_force(const std::vector<std::optional<Answer>>& candidates,
                                  TieRule tie) {
  std::map<double, int> counts;
  std::map<double, std::size_t> first_seen;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!candidates[i]) continue;
    counts[candidates[i]->number_value]++;
    first_seen.try_emplace(candidates[i]->number_value, i);
  }
  if (counts.empty()) return std::nullopt;
  int best = 0;
  for (const auto& [_, n] : counts) best = std::max(best, n);
  std::optional<double> pick;
  std::size_t pick_first = 0;
  for (const auto& [v, n] : counts) {
    if (n != best) continue;
    std::size_t f = first_seen[v];
    bool prefer = !pick || (tie == TieRule::LowestSampleIndex ? f < pick_first
                                                              : f > pick_first);
    if (prefer) {
      pick = v;
      pick_first = f;
    }
  }
  return Answer::number(*pick);
}

}  // namespace

TEST_SUITE("voting") {

TEST_CASE("modal answer wins") {
  auto r = majority_vote({num(3), num(5), num(5), num(3), num(5)}, TaskKind::Math);
  REQUIRE(r.chosen.has_value());
  CHECK(r.chosen->number_value == 5);
  CHECK(r.valid_samples == 5);
  CHECK(r.invalid_samples == 0);
}

TEST_CASE("invalid samples are excluded but tallied") {
  auto r = majority_vote({std::nullopt, num(7), std::nullopt, num(7), num(9)},
                         TaskKind::Math);
  REQUIRE(r.chosen.has_value());
  CHECK(r.chosen->number_value == 7);
  CHECK(r.valid_samples == 3);
  CHECK(r.invalid_samples == 2);
}

TEST_CASE("no valid samples means no choice") {
  auto r = majority_vote(std::vector<std::optional<Answer>>{std::nullopt, std::nullopt},
                         TaskKind::Math);
  CHECK_FALSE(r.chosen.has_value());
  CHECK(r.invalid_samples == 2);
}

TEST_CASE("ties break to the earliest sample by default") {
  auto r = majority_vote({num(4), num(9), num(9), num(4)}, TaskKind::Math);
  REQUIRE(r.chosen.has_value());
  CHECK(r.chosen->number_value == 4);

  auto flipped = majority_vote({num(4), num(9), num(9), num(4)}, TaskKind::Math, {},
                               TieRule::HighestSampleIndex);
  REQUIRE(flipped.chosen.has_value());
  CHECK(flipped.chosen->number_value == 9);
}

TEST_CASE("tolerance merges nearly-equal numeric answers") {
  auto r = majority_vote({num(8.0), num(8.0 + 1e-9), num(3)}, TaskKind::Math);
  REQUIRE(r.chosen.has_value());
  CHECK(r.chosen->number_value == 8.0);
  CHECK(r.counts.size() == 2);
  CHECK(r.counts[0].second == 2);
}

TEST_CASE("randomized multisets agree with a reference count") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> size_d(1, 40);
  std::uniform_int_distribution<int> val_d(0, 4);
  std::uniform_int_distribution<int> invalid_d(0, 9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::optional<Answer>> cands;
    int n = size_d(rng);
    for (int i = 0; i < n; ++i) {
      if (invalid_d(rng) == 0) {
        cands.push_back(std::nullopt);
      } else {
        cands.push_back(num(val_d(rng)));
      }
    }
    for (TieRule tie : {TieRule::LowestSampleIndex, TieRule::HighestSampleIndex}) {
      auto got = majority_vote(cands, TaskKind::Math, {}, tie);
      auto want = brute_force(cands, tie);
      REQUIRE(got.chosen.has_value() == want.has_value());
      if (want) CHECK(got.chosen->number_value == want->number_value);
    }
  }
}

TEST_CASE("ordering stats use a sample standard deviation") {
  auto s = ordering_stats({0.7184, 0.7200, 0.7216}, 500);
  CHECK(s.mean == doctest::Approx(0.72).epsilon(1e-12));
  CHECK(s.stddev == doctest::Approx(0.0016).epsilon(1e-9));
  CHECK(s.n_items == 500);
  CHECK(s.per_ordering_rates.size() == 3);

  auto single = ordering_stats({0.85});
  CHECK(single.stddev == 0.0);
  CHECK_THROWS_AS(ordering_stats({}), pal::EmptyInput);
}

TEST_CASE("solve rate is the correct fraction") {
  CHECK(solve_rate({true, true, false, true}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(solve_rate({}), pal::EmptyInput);
}

TEST_CASE("percent formatting keeps one decimal") {
  CHECK(format_percent(0.72) == "72.0");
  CHECK(format_percent(0.8516) == "85.2");
}

}
