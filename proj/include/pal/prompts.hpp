#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pal/answers.hpp"
#include "pal/executor.hpp"

namespace pal::prompts {

enum class PromptStyle {
  Direct,
  CoT,
  PAL,
  PALNoComment,
  PALNoCommentNoVar,
  PALVarAnonymizedWithComments,
  SuccinctCode,
  SimulatedRuntime,
  L2MReduce,
  L2MSolve,
  L2MPALSolve,
};

std::string to_string(PromptStyle s);
std::optional<PromptStyle> style_from_string(const std::string& name);

/// Asset tag family a style draws its in-context examples from. The four
/// PAL ablation styles share the "pal" examples and differ only in the
/// transform applied at render time.
std::string style_family(PromptStyle s);

/// True for styles whose completions are programs routed through the
/// executor. Direct/CoT/SimulatedRuntime/L2MReduce/L2MSolve read answers
/// from the completion text instead.
bool is_code_style(PromptStyle s);

/// One in-context demonstration. reasoning holds the free-form NL trace for
/// CoT or the interleaved comment/code program for PAL-family styles.
/// final_answer is present for Direct, CoT and SimulatedRuntime; PAL prompts
/// carry no final answers.
struct FewShotExample {
  std::string id;
  std::string question;
  std::string reasoning;
  std::optional<std::string> final_answer;
  std::vector<std::string> style_tags;

  bool has_tag(const std::string& tag) const;
};

/// Render rules for one style within one task, loaded from the task's
/// manifest. Prompt text shapes live in these data fields, not in code.
struct StyleProfile {
  std::string question_prefix = "Q: ";   // e.g. "#Q: " for PAL math
  std::string answer_prefix = "A:";      // cue for text styles
  std::string separator = "\n\n";        // between example blocks
  std::vector<std::string> stop_sequences;
  runtime::AnswerConvention convention = runtime::AnswerConvention::AnswerVariable;
  std::optional<std::string> prelude_id;
};

struct AssembledPrompt {
  std::string text;
  PromptStyle style = PromptStyle::PAL;
  std::vector<std::string> stop_sequences;
  std::uint64_t ordering_seed = 0;
  std::vector<std::string> example_ids;  // permutation actually used
};

struct RenderOptions {
  std::uint64_t anonymize_seed = 0;  // pool permutation for the -var ablations
};

/// Canonical-order permutation of n elements under a seed. Seed 0 keeps
/// canonical order; other seeds shuffle with mt19937_64 Fisher-Yates.
/// Pure and bit-exact across platforms.
std::vector<std::size_t> ordering_permutation(std::size_t n, std::uint64_t seed);

/// Concatenates the styled example blocks (in seed order) and the rendered
/// test question with the style's answer cue. Pure function of its inputs.
/// Throws StyleMismatch when an example lacks a field the style needs and
/// EmptyTestQuestion on a blank question.
AssembledPrompt assemble_prompt(const std::vector<FewShotExample>& examples,
                                PromptStyle style,
                                const std::string& test_question,
                                std::uint64_t ordering_seed,
                                const StyleProfile& profile,
                                const RenderOptions& options = {});

// --- Least-to-Most ---

enum class L2MStage { Reduce, Solve };

struct SubAnswer {
  std::string subquestion;
  std::string answer;  // empty until solved
};

/// Renders the problem-reducing or problem-solving stage. The reduce stage
/// is an NL prompt ending with the decomposition cue; the solve stage
/// scaffolds the test item with its subquestions (PAL or NL per style).
/// Throws MissingDecomposition when solve is called without subquestions.
AssembledPrompt render_l2m_stage(L2MStage stage,
                                 PromptStyle solve_style,
                                 const std::vector<FewShotExample>& examples,
                                 const std::string& question,
                                 const std::vector<SubAnswer>& prior_subanswers,
                                 const StyleProfile& profile);

/// Extracts the final interrogative sentence of a word problem, used in the
/// reduce cue ('To answer the question "How old is Kody?" ...').
std::string extract_final_question(const std::string& question);

/// Parses the quoted subquestions out of a reduce-stage completion.
std::vector<std::string> parse_subquestions(const std::string& completion_text);

// --- Prompt assets ---

/// One directory per task: a manifest with canonical example ordering and
/// per-style render profiles, plus one JSON file per example.
struct TaskPromptSet {
  std::string task;
  scoring::TaskKind kind = scoring::TaskKind::Math;
  std::vector<FewShotExample> examples;  // canonical manifest order

  StyleProfile profile_for(PromptStyle style) const;
  std::vector<FewShotExample> examples_for(PromptStyle style) const;

  // raw per-family profiles from the manifest
  std::vector<std::pair<std::string, StyleProfile>> family_profiles;
};

TaskPromptSet load_prompt_set(const std::filesystem::path& task_dir);

// --- Ablation transforms ---

/// Removes comment-only lines and trailing line comments; code statements
/// are otherwise byte-identical. Pure text transform, idempotent; '#' inside
/// string literals is preserved.
std::string strip_comments(const std::string& program);

/// Renames each user-defined variable (assignment targets and loop
/// variables; never builtins, attributes, call names, keyword arguments or
/// the reserved `answer`) to a short opaque name from the pool a..z, aa..zz
/// in first-occurrence order. Seed 0 keeps pool order (a, b, c, ...); other
/// seeds permute the pool. The renaming is a bijection and preserves
/// execution semantics. Throws ParseFailure when the program cannot be
/// tokenized (e.g. an unterminated string literal).
std::string anonymize_variables(const std::string& program, std::uint64_t seed);

}  // namespace pal::prompts
