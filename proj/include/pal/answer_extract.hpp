#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pal/answers.hpp"

namespace pal::scoring {

/// Pulls final answers out of free-text completions (the non-code styles).
/// Cue phrases are ordered regexes with one capture group; the first match
/// wins, searching the text back to front so the final restatement of an
/// answer beats intermediate ones. When no cue matches a math completion,
/// the last number in the text is used as a fallback.
class AnswerExtractor {
 public:
  /// Compiled-in cue set ("the answer is ...", "answer: ...", trailing
  /// "= N" lines).
  static AnswerExtractor builtin();

  /// Loads cue patterns from a JSON asset: {"patterns": ["regex", ...]}.
  /// Throws FormatError on malformed JSON or a regex that does not compile.
  static AnswerExtractor load(const std::filesystem::path& file);

  /// Raw captured span, untrimmed of units (normalization handles those).
  std::optional<std::string> extract_span(const std::string& completion_text) const;

  /// extract_span + normalize_answer for the task.
  std::optional<Answer> extract(const std::string& completion_text, TaskKind task) const;

 private:
  explicit AnswerExtractor(std::vector<std::string> patterns);

  struct CompiledPattern;
  std::vector<std::string> sources_;
  std::shared_ptr<const std::vector<CompiledPattern>> compiled_;
};

}  // namespace pal::scoring
