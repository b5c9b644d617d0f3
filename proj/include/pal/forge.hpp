#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pal/answers.hpp"
#include "pal/dataset.hpp"
#include "pal/executor.hpp"

namespace pal::forge {

/// Where a harder item's recomputed answer came from.
enum class Provenance {
  ProgramRecomputed,  // trusted original program re-run with the new value
  SampledProgram,     // fallback: freshly sampled program that passed the gate
  ManualPending,      // no trustworthy program; needs human review
  Manual,             // human-supplied answer (imported, never produced here)
};

std::string to_string(Provenance p);
std::optional<Provenance> provenance_from_string(const std::string& name);

/// One numeric token found in a question, in source order.
struct NumericToken {
  std::string text;       // as written, e.g. "2,000" or "8.5"
  double value = 0.0;
  std::size_t offset = 0; // byte offset into the question
  std::size_t length = 0;
};

std::vector<NumericToken> find_numeric_tokens(const std::string& question);

struct Substitution {
  std::size_t token_index = 0;  // into find_numeric_tokens order
  double original_value = 0.0;
  double new_value = 0.0;
};

/// How many question magnitudes one harder item replaces.
enum class SubstitutionMode { Single, Paired };

/// A harder variant of one source item.
struct HardRecord {
  std::string id;
  std::string question;           // with the substituted magnitudes
  std::string original_question;
  std::vector<Substitution> substitutions;
  std::optional<scoring::Answer> answer;  // absent while manual_pending
  Provenance provenance = Provenance::ManualPending;
  std::string program;            // the program that recomputed the answer
  std::string note;               // why manual review is needed, when it is
};

struct ForgeConfig {
  std::uint64_t seed = 0;
  std::int64_t min_value = 10;
  std::int64_t max_value = 9'999'999;
  SubstitutionMode mode = SubstitutionMode::Single;
  int fallback_samples = 100;
  double fallback_temperature = 0.7;
  /// Refuse (ManualPending) items whose program mentions a replaced value in
  /// more than one literal, instead of replacing every equal literal.
  bool strict_literals = false;
  runtime::ExecutionPolicy exec_policy;
};

struct SubstitutionResult {
  std::string question;
  std::vector<Substitution> substitutions;
};

/// Picks one numeric token (two distinct ones in Paired mode) uniformly at
/// random and replaces each with a fresh uniform integer in
/// [min_value, max_value] distinct from its original. Choices are a pure
/// function of the rng state. Throws NoNumberFound when the question has no
/// numeric token.
SubstitutionResult substitute_number(const std::string& question, std::mt19937_64& rng,
                                     const ForgeConfig& config);

/// Re-derives the gold answer for a substituted question from a trusted
/// solution program. Runs the program unmodified first and throws
/// TrustGateFailure unless it reproduces `gold`. Then rewrites every numeric
/// literal equal to each substitution's original value (strings and
/// comments untouched), re-executes, and returns the new answer. Throws
/// AmbiguousLiteral when a substitution matches no literal, and
/// ExecutionFailure when the rewritten program does not run to an answer.
scoring::Answer recompute_answer(const std::string& program,
                                 const std::vector<Substitution>& substitutions,
                                 const scoring::Answer& gold,
                                 const runtime::ProgramExecutor& executor,
                                 const runtime::ExecutionPolicy& policy);

/// Trust gate as a predicate: true iff the program, run unmodified,
/// reproduces the item's gold answer.
bool passes_trust_gate(const std::string& program,
                       const scoring::Answer& gold,
                       const runtime::ProgramExecutor& executor,
                       const runtime::ExecutionPolicy& policy);

/// Produces the harder variant of one item. program supplies the trusted
/// solution when available (empty -> straight to fallback). sampler, when
/// set, draws candidate programs for the fallback path; each candidate must
/// pass the trust gate before being used. Items that exhaust every path
/// come back ManualPending with a note, never dropped.
HardRecord forge_item(const data::DatasetRecord& item,
                      const std::string& program,
                      std::mt19937_64& rng,
                      const ForgeConfig& config,
                      const runtime::ProgramExecutor& executor,
                      const std::function<std::vector<std::string>(const data::DatasetRecord&, int)>& sampler = {});

/// forge_item over a whole dataset with a seed-keyed rng per item, so item
/// k's variant does not depend on how many items precede it.
std::vector<HardRecord> forge_dataset(const std::vector<data::DatasetRecord>& items,
                                      const std::vector<std::string>& programs,
                                      const ForgeConfig& config,
                                      const runtime::ProgramExecutor& executor,
                                      const std::function<std::vector<std::string>(const data::DatasetRecord&, int)>& sampler = {});

std::string to_json_line(const HardRecord& record);
HardRecord hard_record_from_json_line(const std::string& line);

}  // namespace pal::forge
