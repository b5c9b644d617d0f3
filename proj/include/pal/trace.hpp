#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pal/answers.hpp"
#include "pal/executor.hpp"
#include "pal/prompts.hpp"

namespace pal::runner {

/// One decoded sample's journey through the pipeline.
struct SampleTrace {
  int sample_index = 0;
  std::string completion_sha;      // sha256 of the raw completion text
  std::string completion_text;
  runtime::ExecStatus status = runtime::ExecStatus::Ok;
  std::optional<scoring::Answer> answer;
  std::string answer_display;
  bool correct = false;
  std::chrono::milliseconds exec_duration{0};
};

/// Everything recorded for one (ordering_seed, item) cell of a run. Trace
/// files hold one JSON line per cell in canonical (seed, item) order.
struct ItemTrace {
  std::uint64_t ordering_seed = 0;
  std::size_t item_index = 0;  // position in the dataset, not shuffled
  std::string item_id;
  std::string question;
  std::string gold_display;
  std::string prompt_sha;
  prompts::PromptStyle style = prompts::PromptStyle::PAL;
  std::vector<SampleTrace> samples;
  std::optional<scoring::Answer> chosen;
  std::string chosen_display;
  int valid_samples = 0;
  bool correct = false;
  std::chrono::milliseconds total_duration{0};
};

/// deterministic=true zeroes durations in the serialized form so replayed
/// runs are byte-identical; in-memory values are untouched.
std::string to_json_line(const ItemTrace& trace, bool deterministic);
ItemTrace item_trace_from_json_line(const std::string& line);  // throws FormatError

/// Reads a trace file, tolerating a torn final line (returns the whole
/// lines only). Throws FormatError on a malformed non-final line.
std::vector<ItemTrace> read_trace_file(const std::filesystem::path& file);

}  // namespace pal::runner
