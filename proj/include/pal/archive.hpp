#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "pal/decode.hpp"

namespace pal::backend {

/// One recorded completion. digest keys the entry (prompt + canonical params
/// + sample index); prompt_sha is kept separately so archives can be audited
/// against prompt assets without storing full prompt text.
struct ArchiveEntry {
  std::string digest;
  std::string prompt_sha;
  std::string params;  // DecodeParams::canonical_string()
  int sample_index = 0;
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
};

std::string to_json_line(const ArchiveEntry& entry);
ArchiveEntry entry_from_json_line(const std::string& line);  // throws FormatError

/// In-memory index over a JSONL archive file. Duplicate digests keep the
/// last entry (a re-record overrides). Lookup is by digest only.
class ReplayArchive {
 public:
  ReplayArchive() = default;

  /// Throws BackendUnavailable when the file cannot be opened, FormatError
  /// on a malformed line (a trailing torn line is rejected too: archives are
  /// append-only whole lines).
  static ReplayArchive load(const std::filesystem::path& file);

  const ArchiveEntry* find(const std::string& digest) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, ArchiveEntry> entries_;
};

/// Append-only JSONL writer, one flushed line per entry so a killed process
/// loses at most the line being written. Thread-safe.
class ArchiveWriter {
 public:
  /// Opens for append, creating parent directories. Throws
  /// ArchiveWriteFailure when the file cannot be opened.
  explicit ArchiveWriter(const std::filesystem::path& file);

  void append(const ArchiveEntry& entry);  // throws ArchiveWriteFailure

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mutex_;
};

}  // namespace pal::backend
