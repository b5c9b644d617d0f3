#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pal/answers.hpp"
#include "pal/executor.hpp"

namespace pal::scoring {

enum class TieRule { LowestSampleIndex, HighestSampleIndex };

struct VoteResult {
  std::optional<Answer> chosen;  // absent iff no valid sample
  std::vector<std::pair<Answer, int>> counts;  // first-occurrence order
  int valid_samples = 0;
  int invalid_samples = 0;
};

/// Majority vote over the outcomes of one item's samples. Non-ok and
/// unparseable outcomes are excluded from counting but tallied as
/// invalid_samples. Ties break to the answer whose earliest sample_index is
/// lowest (deterministic); TieRule::HighestSampleIndex flips that for
/// rescoring audits.
VoteResult majority_vote(const std::vector<runtime::ExecutionOutcome>& outcomes,
                         TaskKind task,
                         const MatchTolerance& tol = {},
                         TieRule tie_rule = TieRule::LowestSampleIndex);

/// Same vote over already-extracted candidates (text styles); nullopt marks
/// an invalid sample. Index in the vector stands in for sample_index.
VoteResult majority_vote(const std::vector<std::optional<Answer>>& candidates,
                         TaskKind task,
                         const MatchTolerance& tol = {},
                         TieRule tie_rule = TieRule::LowestSampleIndex);

/// Fraction of items scored correct. Throws EmptyInput on an empty list.
double solve_rate(const std::vector<bool>& item_scores);

struct SolveStats {
  double solve_rate = 0.0;  // mean of per_ordering_rates
  int n_items = 0;
  std::vector<double> per_ordering_rates;
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1) standard deviation; 0 for a single rate
};

/// Aggregate per-ordering solve rates. Throws EmptyInput when rates is empty.
SolveStats ordering_stats(const std::vector<double>& rates, int n_items = 0);

/// "72.0" style percent formatting used in reports (one decimal place).
std::string format_percent(double fraction);

}  // namespace pal::scoring
