#pragma once

#include <optional>
#include <string>

namespace pal::scoring {

enum class AnswerKind { Number, Text, DateString };

enum class TaskKind { Math, ColoredObjects, Penguins, Date, ObjectCounting, RepeatCopy };

/// Which answer representation a task expects after normalization.
AnswerKind expected_kind(TaskKind task);

std::string to_string(TaskKind task);
std::optional<TaskKind> task_kind_from_string(const std::string& name);

/// A final answer. Exactly one payload is populated: number_value for
/// Number, text_value for Text and DateString.
struct Answer {
  AnswerKind kind = AnswerKind::Text;
  double number_value = 0.0;
  std::string text_value;

  static Answer number(double v) { return {AnswerKind::Number, v, {}}; }
  static Answer text(std::string v) { return {AnswerKind::Text, 0.0, std::move(v)}; }
  static Answer date(std::string v) { return {AnswerKind::DateString, 0.0, std::move(v)}; }

  bool operator==(const Answer&) const = default;
};

/// Render an answer for reports and trace files.
std::string to_display_string(const Answer& a);

/// Normalize a raw model/interpreter answer for the given task family.
/// Numbers tolerate currency symbols, thousands commas, trailing periods and
/// units; text is lowercased with whitespace collapsed and surrounding
/// punctuation stripped; dates canonicalize to MM/DD/YYYY. Idempotent.
/// Returns nullopt when the raw string cannot be parsed into the task's
/// expected kind (the sample counts as invalid downstream).
std::optional<Answer> normalize_answer(const std::string& raw, TaskKind task);

/// Same normalization applied to an already-typed answer (e.g. an executor
/// value or a dataset gold). A Number passed to a text task is stringified.
std::optional<Answer> normalize_answer(const Answer& raw, TaskKind task);

struct MatchTolerance {
  double abs_tol = 1e-6;
  double rel_tol = 1e-6;
};

/// True when two normalized answers agree. Numbers match iff
/// |a-b| <= max(abs_tol, rel_tol * max(|a|,|b|)); text and dates match iff
/// equal. Kind mismatch is false. Symmetric.
bool answers_match(const Answer& a, const Answer& b, const MatchTolerance& tol = {});

}  // namespace pal::scoring
