#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pal/answers.hpp"
#include "pal/backend.hpp"
#include "pal/dataset.hpp"
#include "pal/decode.hpp"
#include "pal/executor.hpp"
#include "pal/prompts.hpp"
#include "pal/trace.hpp"
#include "pal/voting.hpp"

namespace pal::runner {

struct RunConfig {
  static constexpr std::size_t kNoLimit = static_cast<std::size_t>(-1);

  std::string task = "gsm8k";                 // prompt-set directory name
  scoring::TaskKind task_kind = scoring::TaskKind::Math;
  std::filesystem::path dataset_file;
  data::DatasetFormat dataset_format = data::DatasetFormat::NativeJsonl;
  std::size_t limit = kNoLimit;               // 0 -> empty run, no backend calls

  prompts::PromptStyle style = prompts::PromptStyle::PAL;
  std::vector<std::uint64_t> ordering_seeds = {0};
  std::uint64_t anonymize_seed = 0;
  backend::DecodeParams decode = backend::DecodeParams::greedy();

  std::filesystem::path prompts_dir;          // holds <task>/manifest.json
  std::filesystem::path assets_dir;           // runtime + parsing assets
  runtime::ExecutionPolicy exec_policy;
  int workers = 4;

  std::filesystem::path output_dir;           // traces + report land here
  bool deterministic_traces = false;          // forced on for replay backends
  scoring::MatchTolerance tolerance;
  scoring::TieRule tie_rule = scoring::TieRule::LowestSampleIndex;
};

struct RunReport {
  std::string task;
  std::string style;
  std::size_t n_items = 0;
  int n_orderings = 0;
  scoring::SolveStats stats;
  // error taxonomy: sample status -> count, over every (seed, item) cell
  std::vector<std::pair<std::string, std::size_t>> status_counts;
  // per ordering, items_correct + items_incorrect + items_all_invalid == n_items
  std::size_t items_correct = 0;
  std::size_t items_incorrect = 0;
  std::size_t items_all_invalid = 0;
  std::size_t resumed_items = 0;  // cells taken from an existing trace file
  std::filesystem::path traces_file;
};

std::string to_json(const RunReport& report);
std::string format_report(const RunReport& report);

/// Runs style x dataset x ordering seeds against a backend, writing one
/// trace line per (seed, item) cell in canonical order regardless of worker
/// completion order. If output_dir already holds a trace file for this run,
/// its whole-line canonical prefix is kept and execution resumes after it,
/// so a killed run continues rather than restarts and the final file is
/// byte-identical to an uninterrupted one under a replay backend.
RunReport run_experiment(const RunConfig& config, backend::CompletionBackend& backend);

/// Two-stage least-to-most run: a reduce call decomposes each item, then a
/// single solve call (NL or PAL per config.style) answers with the scaffold.
/// Same trace and resume contract as run_experiment.
RunReport run_l2m(const RunConfig& config, backend::CompletionBackend& backend);

/// Re-scores an existing trace file without touching any backend: recomputes
/// votes and correctness under a (possibly different) tolerance and tie
/// rule. Throws MissingTraces when the file does not exist.
RunReport rescore(const std::filesystem::path& traces_file,
                  scoring::TaskKind task_kind,
                  const scoring::MatchTolerance& tolerance,
                  scoring::TieRule tie_rule);

}  // namespace pal::runner
