#include "pal/forge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "pal/errors.hpp"
#include "pytokens.hpp"

namespace pal::forge {

using nlohmann::json;
using scoring::Answer;

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::ProgramRecomputed: return "program_recomputed";
    case Provenance::SampledProgram: return "sampled_program";
    case Provenance::ManualPending: return "manual_pending";
    case Provenance::Manual: return "manual";
  }
  return "manual_pending";
}

std::optional<Provenance> provenance_from_string(const std::string& name) {
  if (name == "program_recomputed") return Provenance::ProgramRecomputed;
  if (name == "sampled_program") return Provenance::SampledProgram;
  if (name == "manual_pending") return Provenance::ManualPending;
  if (name == "manual") return Provenance::Manual;
  return std::nullopt;
}

namespace {

bool ascii_digit(char c) { return c >= '0' && c <= '9'; }

std::string format_value(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double parse_token_value(const std::string& text) {
  std::string digits;
  digits.reserve(text.size());
  for (char c : text) {
    if (c != ',') digits.push_back(c);
  }
  return std::stod(digits);
}

}  // namespace

std::vector<NumericToken> find_numeric_tokens(const std::string& question) {
  std::vector<NumericToken> out;
  std::size_t i = 0;
  const std::size_t n = question.size();
  while (i < n) {
    if (!ascii_digit(question[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    bool seen_dot = false;
    while (i < n) {
      char c = question[i];
      if (ascii_digit(c)) {
        ++i;
        continue;
      }
      if (c == ',' && i + 1 < n && ascii_digit(question[i + 1])) {
        ++i;
        continue;
      }
      if (c == '.' && !seen_dot && i + 1 < n && ascii_digit(question[i + 1])) {
        seen_dot = true;
        ++i;
        continue;
      }
      break;
    }
    NumericToken tok;
    tok.text = question.substr(begin, i - begin);
    tok.offset = begin;
    tok.length = i - begin;
    tok.value = parse_token_value(tok.text);
    out.push_back(std::move(tok));
  }
  return out;
}

SubstitutionResult substitute_number(const std::string& question, std::mt19937_64& rng,
                                     const ForgeConfig& config) {
  const auto tokens = find_numeric_tokens(question);
  if (tokens.empty()) throw NoNumberFound("question has no numeric token");

  std::vector<std::size_t> picks;
  picks.push_back((std::size_t)(rng() % tokens.size()));
  if (config.mode == SubstitutionMode::Paired && tokens.size() > 1) {
    std::size_t second = (std::size_t)(rng() % (tokens.size() - 1));
    if (second >= picks[0]) ++second;
    picks.push_back(second);
    std::sort(picks.begin(), picks.end());
  }

  const std::uint64_t range = (std::uint64_t)(config.max_value - config.min_value + 1);
  SubstitutionResult result;
  for (std::size_t pick : picks) {
    const NumericToken& tok = tokens[pick];
    double new_value = tok.value;
    for (int guard = 0; guard < 64 && new_value == tok.value; ++guard) {
      new_value = (double)(config.min_value + (std::int64_t)(rng() % range));
    }
    Substitution sub;
    sub.token_index = pick;
    sub.original_value = tok.value;
    sub.new_value = new_value;
    result.substitutions.push_back(sub);
  }

  // splice right to left so earlier offsets stay valid
  result.question = question;
  for (auto it = result.substitutions.rbegin(); it != result.substitutions.rend(); ++it) {
    const NumericToken& tok = tokens[it->token_index];
    result.question = result.question.substr(0, tok.offset) + format_value(it->new_value) +
                      result.question.substr(tok.offset + tok.length);
  }
  return result;
}

namespace {

/// Replaces every numeric literal equal to original_value; strings and
/// comments stay untouched. Returns the rewritten program and the count.
std::pair<std::string, int> replace_literals(const std::string& program, double original_value,
                                             double new_value) {
  const auto toks = detail::py_tokens(program);
  std::string out;
  out.reserve(program.size());
  int replaced = 0;
  for (const auto& t : toks) {
    std::string text = detail::tok_text(program, t);
    if (t.kind == detail::TokKind::Number) {
      double v = 0.0;
      bool parsed = true;
      try {
        v = std::stod(text);
      } catch (...) {
        parsed = false;
      }
      if (parsed && v == original_value) {
        out += format_value(new_value);
        ++replaced;
        continue;
      }
    }
    out += text;
  }
  return {std::move(out), replaced};
}

runtime::AnswerConvention infer_convention(const std::string& program) {
  if (program.find("def solution") != std::string::npos) {
    return runtime::AnswerConvention::ReturnedValue;
  }
  // an `answer = ...` assignment wins over scratch prints
  std::istringstream lines(program);
  std::string line;
  while (std::getline(lines, line)) {
    std::size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line.compare(b, 6, "answer") != 0) continue;
    std::size_t eq = line.find_first_not_of(" \t", b + 6);
    if (eq != std::string::npos && line[eq] == '=' &&
        (eq + 1 >= line.size() || line[eq + 1] != '=')) {
      return runtime::AnswerConvention::AnswerVariable;
    }
  }
  if (program.find("print(") != std::string::npos) {
    return runtime::AnswerConvention::PrintedValue;
  }
  return runtime::AnswerConvention::AnswerVariable;
}

std::optional<Answer> run_for_answer(const std::string& program,
                                     const runtime::ProgramExecutor& executor,
                                     const runtime::ExecutionPolicy& policy,
                                     std::string* error) {
  runtime::ProgramSource source;
  source.code = program;
  source.convention = infer_convention(program);
  auto outcome = executor.execute(source, policy);
  if (outcome.status != runtime::ExecStatus::Ok || !outcome.value) {
    if (error) {
      *error = to_string(outcome.status);
      if (!outcome.stderr_text.empty()) {
        *error += ": " + outcome.stderr_text.substr(0, 200);
      }
    }
    return std::nullopt;
  }
  return outcome.value;
}

bool matches_gold(const Answer& got, const Answer& gold) {
  auto a = scoring::normalize_answer(got, scoring::TaskKind::Math);
  auto b = scoring::normalize_answer(gold, scoring::TaskKind::Math);
  return a && b && scoring::answers_match(*a, *b);
}

}  // namespace

bool passes_trust_gate(const std::string& program, const Answer& gold,
                       const runtime::ProgramExecutor& executor,
                       const runtime::ExecutionPolicy& policy) {
  auto answer = run_for_answer(program, executor, policy, nullptr);
  return answer && matches_gold(*answer, gold);
}

Answer recompute_answer(const std::string& program,
                        const std::vector<Substitution>& substitutions, const Answer& gold,
                        const runtime::ProgramExecutor& executor,
                        const runtime::ExecutionPolicy& policy) {
  std::string error;
  auto original = run_for_answer(program, executor, policy, &error);
  if (!original) {
    throw TrustGateFailure("program does not execute on the original values: " + error);
  }
  if (!matches_gold(*original, gold)) {
    throw TrustGateFailure("program computes " + scoring::to_display_string(*original) +
                           " instead of the gold answer " + scoring::to_display_string(gold));
  }

  std::string rewritten = program;
  for (const auto& sub : substitutions) {
    auto [next, replaced] = replace_literals(rewritten, sub.original_value, sub.new_value);
    if (replaced == 0) {
      throw AmbiguousLiteral("program has no literal equal to " +
                             format_value(sub.original_value));
    }
    rewritten = std::move(next);
  }

  auto answer = run_for_answer(rewritten, executor, policy, &error);
  if (!answer) throw ExecutionFailure("rewritten program failed: " + error);
  // hand back the same shape the gate compared against: a printed "75" is
  // the number 75 to the dataset this feeds
  auto normalized = scoring::normalize_answer(*answer, scoring::TaskKind::Math);
  if (!normalized) {
    throw ExecutionFailure("rewritten program produced an unusable answer: " +
                           scoring::to_display_string(*answer));
  }
  return *normalized;
}

HardRecord forge_item(const data::DatasetRecord& item, const std::string& program,
                      std::mt19937_64& rng, const ForgeConfig& config,
                      const runtime::ProgramExecutor& executor,
                      const std::function<std::vector<std::string>(const data::DatasetRecord&,
                                                                   int)>& sampler) {
  HardRecord rec;
  rec.id = item.id;
  rec.original_question = item.question;
  rec.question = item.question;
  rec.provenance = Provenance::ManualPending;

  const auto tokens = find_numeric_tokens(item.question);
  if (tokens.empty()) {
    rec.note = "no numeric token to substitute";
    return rec;
  }

  SubstitutionResult sub = substitute_number(item.question, rng, config);
  rec.question = sub.question;
  rec.substitutions = sub.substitutions;

  for (const auto& s : sub.substitutions) {
    int value_occurrences = 0;
    for (const auto& t : tokens) {
      if (t.value == s.original_value) ++value_occurrences;
    }
    if (value_occurrences > 1) {
      rec.note = "value " + format_value(s.original_value) + " appears " +
                 std::to_string(value_occurrences) +
                 " times in the question; substitution is ambiguous";
      return rec;
    }
  }

  auto try_program = [&](const std::string& candidate, Provenance provenance) -> bool {
    if (candidate.empty()) return false;
    if (config.strict_literals) {
      for (const auto& s : sub.substitutions) {
        auto [_, count] = replace_literals(candidate, s.original_value, s.original_value);
        if (count > 1) {
          rec.note = "program mentions " + format_value(s.original_value) + " in " +
                     std::to_string(count) + " literals under strict matching";
          return false;
        }
      }
    }
    try {
      Answer answer =
          recompute_answer(candidate, sub.substitutions, item.gold, executor,
                           config.exec_policy);
      rec.answer = answer;
      rec.provenance = provenance;
      rec.program = candidate;
      rec.note.clear();
      return true;
    } catch (const Error& e) {
      rec.note = e.what();
      return false;
    }
  };

  if (try_program(program, Provenance::ProgramRecomputed)) return rec;

  if (sampler) {
    auto candidates = sampler(item, config.fallback_samples);
    for (const auto& candidate : candidates) {
      if (try_program(candidate, Provenance::SampledProgram)) return rec;
    }
  }

  if (rec.note.empty()) {
    rec.note = program.empty() ? "no trusted program available"
                               : "program failed the trust gate";
  }
  return rec;
}

std::vector<HardRecord> forge_dataset(
    const std::vector<data::DatasetRecord>& items, const std::vector<std::string>& programs,
    const ForgeConfig& config, const runtime::ProgramExecutor& executor,
    const std::function<std::vector<std::string>(const data::DatasetRecord&, int)>& sampler) {
  std::vector<HardRecord> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    // independent stream per item: adding or removing items elsewhere in the
    // file does not change item i's substitution
    std::mt19937_64 rng(config.seed ^ (0x9E3779B97F4A7C15ull * (i + 1)));
    const std::string& program = i < programs.size() ? programs[i] : std::string();
    out.push_back(forge_item(items[i], program, rng, config, executor, sampler));
  }
  return out;
}

std::string to_json_line(const HardRecord& record) {
  json subs = json::array();
  for (const auto& s : record.substitutions) {
    subs.push_back({{"token_index", s.token_index},
                    {"original_value", s.original_value},
                    {"new_value", s.new_value}});
  }
  json j;
  j["id"] = record.id;
  j["question"] = record.question;
  j["original_question"] = record.original_question;
  j["substitutions"] = std::move(subs);
  if (record.answer) {
    if (record.answer->kind == scoring::AnswerKind::Number) {
      double v = record.answer->number_value;
      if (v == (double)(long long)v) {
        j["answer"] = (long long)v;
      } else {
        j["answer"] = v;
      }
    } else {
      j["answer"] = record.answer->text_value;
    }
  } else {
    j["answer"] = nullptr;
  }
  j["provenance"] = to_string(record.provenance);
  j["program"] = record.program;
  j["note"] = record.note;
  return j.dump();
}

HardRecord hard_record_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad forge line: ") + e.what());
  }
  HardRecord rec;
  try {
    rec.id = j.at("id").get<std::string>();
    rec.question = j.at("question").get<std::string>();
    rec.original_question = j.value("original_question", "");
    if (j.contains("substitutions")) {
      for (const auto& s : j.at("substitutions")) {
        Substitution sub;
        sub.token_index = s.value("token_index", (std::size_t)0);
        sub.original_value = s.value("original_value", 0.0);
        sub.new_value = s.value("new_value", 0.0);
        rec.substitutions.push_back(sub);
      }
    }
    if (j.contains("answer") && !j.at("answer").is_null()) {
      const json& a = j.at("answer");
      rec.answer = a.is_number() ? Answer::number(a.get<double>())
                                 : Answer::text(a.get<std::string>());
    }
    auto p = provenance_from_string(j.value("provenance", "manual_pending"));
    if (!p) throw FormatError("bad provenance in forge line");
    rec.provenance = *p;
    rec.program = j.value("program", "");
    rec.note = j.value("note", "");
  } catch (const json::exception& e) {
    throw FormatError(std::string("forge line missing field: ") + e.what());
  }
  return rec;
}

}  // namespace pal::forge
