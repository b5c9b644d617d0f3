#include "pal/voting.hpp"

#include <cmath>
#include <cstdio>

#include "pal/errors.hpp"

namespace pal::scoring {

namespace {

struct Group {
  Answer answer;
  int count = 0;
  std::size_t first_index = 0;
};

VoteResult vote_over(const std::vector<std::optional<Answer>>& normalized,
                     const MatchTolerance& tol, TieRule tie_rule) {
  VoteResult result;
  std::vector<Group> groups;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    if (!normalized[i]) {
      ++result.invalid_samples;
      continue;
    }
    ++result.valid_samples;
    bool merged = false;
    for (auto& g : groups) {
      if (answers_match(g.answer, *normalized[i], tol)) {
        ++g.count;
        merged = true;
        break;
      }
    }
    if (!merged) groups.push_back({*normalized[i], 1, i});
  }
  for (const auto& g : groups) result.counts.emplace_back(g.answer, g.count);
  if (groups.empty()) return result;

  const Group* best = &groups.front();
  for (const auto& g : groups) {
    if (g.count > best->count) {
      best = &g;
    } else if (g.count == best->count) {
      bool prefer = tie_rule == TieRule::LowestSampleIndex ? g.first_index < best->first_index
                                                           : g.first_index > best->first_index;
      if (prefer) best = &g;
    }
  }
  result.chosen = best->answer;
  return result;
}

}  // namespace

VoteResult majority_vote(const std::vector<runtime::ExecutionOutcome>& outcomes,
                         TaskKind task, const MatchTolerance& tol, TieRule tie_rule) {
  std::vector<std::optional<Answer>> normalized;
  normalized.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    if (o.status == runtime::ExecStatus::Ok && o.value) {
      normalized.push_back(normalize_answer(*o.value, task));
    } else {
      normalized.push_back(std::nullopt);
    }
  }
  return vote_over(normalized, tol, tie_rule);
}

VoteResult majority_vote(const std::vector<std::optional<Answer>>& candidates,
                         TaskKind task, const MatchTolerance& tol, TieRule tie_rule) {
  std::vector<std::optional<Answer>> normalized;
  normalized.reserve(candidates.size());
  for (const auto& c : candidates) {
    normalized.push_back(c ? normalize_answer(*c, task) : std::nullopt);
  }
  return vote_over(normalized, tol, tie_rule);
}

double solve_rate(const std::vector<bool>& item_scores) {
  if (item_scores.empty()) throw EmptyInput("solve_rate over zero items");
  std::size_t correct = 0;
  for (bool b : item_scores) correct += b ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(item_scores.size());
}

SolveStats ordering_stats(const std::vector<double>& rates, int n_items) {
  if (rates.empty()) throw EmptyInput("ordering_stats over zero orderings");
  SolveStats stats;
  stats.n_items = n_items;
  stats.per_ordering_rates = rates;
  double sum = 0.0;
  for (double r : rates) sum += r;
  stats.mean = sum / static_cast<double>(rates.size());
  if (rates.size() > 1) {
    double ss = 0.0;
    for (double r : rates) ss += (r - stats.mean) * (r - stats.mean);
    stats.stddev = std::sqrt(ss / static_cast<double>(rates.size() - 1));
  }
  stats.solve_rate = stats.mean;
  return stats;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", fraction * 100.0);
  return buf;
}

}  // namespace pal::scoring
