#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pal/answers.hpp"

namespace pal::data {

/// One evaluation item, normalized across source formats.
struct DatasetRecord {
  std::string id;
  std::string question;
  scoring::Answer gold;
  std::string gold_raw;  // source-form answer, kept for audits
};

enum class DatasetFormat {
  NativeJsonl,    // {"id","question","answer"} per line
  Gsm8k,          // {"question","answer": "...\n#### N"}
  Svamp,          // [{"Body","Question","Answer",...}]
  Mawps,          // [{"sQuestion","lSolutions",...}]
  BbhJson,        // {"examples":[{"input","target"}]}
};

std::string to_string(DatasetFormat f);
std::optional<DatasetFormat> dataset_format_from_string(const std::string& name);

/// Guess from the filename/extension; NativeJsonl when nothing matches.
DatasetFormat detect_format(const std::filesystem::path& file);

/// Loads and normalizes a dataset file. Gold answers are normalized for the
/// task kind; records whose gold cannot be parsed raise FormatError (a bad
/// gold silently dropped would shift solve rates). limit 0 means all.
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& file,
                                        DatasetFormat format,
                                        scoring::TaskKind task,
                                        std::size_t limit = 0);

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& file,
                                        scoring::TaskKind task,
                                        std::size_t limit = 0);

/// Writes records in the native JSONL form (one sorted-key object per line).
void write_native_jsonl(const std::filesystem::path& file,
                        const std::vector<DatasetRecord>& records);

}  // namespace pal::data
