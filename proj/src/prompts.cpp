#include "pal/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "pal/errors.hpp"

namespace pal::prompts {

using nlohmann::json;

std::string to_string(PromptStyle s) {
  switch (s) {
    case PromptStyle::Direct: return "direct";
    case PromptStyle::CoT: return "cot";
    case PromptStyle::PAL: return "pal";
    case PromptStyle::PALNoComment: return "pal_no_comment";
    case PromptStyle::PALNoCommentNoVar: return "pal_no_comment_no_var";
    case PromptStyle::PALVarAnonymizedWithComments: return "pal_var_anonymized_with_comments";
    case PromptStyle::SuccinctCode: return "succinct_code";
    case PromptStyle::SimulatedRuntime: return "simulated_runtime";
    case PromptStyle::L2MReduce: return "l2m_reduce";
    case PromptStyle::L2MSolve: return "l2m_solve";
    case PromptStyle::L2MPALSolve: return "l2m_pal_solve";
  }
  return "pal";
}

std::optional<PromptStyle> style_from_string(const std::string& name) {
  static const std::vector<PromptStyle> all = {
      PromptStyle::Direct, PromptStyle::CoT, PromptStyle::PAL, PromptStyle::PALNoComment,
      PromptStyle::PALNoCommentNoVar, PromptStyle::PALVarAnonymizedWithComments,
      PromptStyle::SuccinctCode, PromptStyle::SimulatedRuntime, PromptStyle::L2MReduce,
      PromptStyle::L2MSolve, PromptStyle::L2MPALSolve};
  for (PromptStyle s : all) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string style_family(PromptStyle s) {
  switch (s) {
    case PromptStyle::PAL:
    case PromptStyle::PALNoComment:
    case PromptStyle::PALNoCommentNoVar:
    case PromptStyle::PALVarAnonymizedWithComments:
      return "pal";
    case PromptStyle::SuccinctCode: return "succinct_code";
    case PromptStyle::SimulatedRuntime: return "simulated_runtime";
    case PromptStyle::Direct: return "direct";
    case PromptStyle::CoT: return "cot";
    case PromptStyle::L2MReduce: return "l2m_reduce";
    case PromptStyle::L2MSolve: return "l2m_solve";
    case PromptStyle::L2MPALSolve: return "l2m_pal_solve";
  }
  return "pal";
}

bool is_code_style(PromptStyle s) {
  switch (s) {
    case PromptStyle::PAL:
    case PromptStyle::PALNoComment:
    case PromptStyle::PALNoCommentNoVar:
    case PromptStyle::PALVarAnonymizedWithComments:
    case PromptStyle::SuccinctCode:
    case PromptStyle::L2MPALSolve:
      return true;
    default:
      return false;
  }
}

bool FewShotExample::has_tag(const std::string& tag) const {
  return std::find(style_tags.begin(), style_tags.end(), tag) != style_tags.end();
}

std::vector<std::size_t> ordering_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  if (seed == 0 || n < 2) return perm;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = (std::size_t)(rng() % (i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace((unsigned char)c); });
}

std::string transformed_reasoning(const FewShotExample& ex, PromptStyle style,
                                  const RenderOptions& options) {
  switch (style) {
    case PromptStyle::PALNoComment:
      return strip_comments(ex.reasoning);
    case PromptStyle::PALNoCommentNoVar:
      return anonymize_variables(strip_comments(ex.reasoning), options.anonymize_seed);
    case PromptStyle::PALVarAnonymizedWithComments:
      return anonymize_variables(ex.reasoning, options.anonymize_seed);
    default:
      return ex.reasoning;
  }
}

std::string render_block(const FewShotExample& ex, PromptStyle style,
                         const StyleProfile& profile, const RenderOptions& options) {
  std::string body;
  if (style == PromptStyle::Direct) {
    if (!ex.final_answer || blank(*ex.final_answer)) {
      throw StyleMismatch("example '" + ex.id + "' has no final answer for a direct prompt");
    }
    body = *ex.final_answer;
  } else {
    if (blank(ex.reasoning)) {
      throw StyleMismatch("example '" + ex.id + "' has no reasoning for style " +
                          to_string(style));
    }
    body = transformed_reasoning(ex, style, options);
  }
  if (is_code_style(style) && ex.final_answer) {
    throw StyleMismatch("example '" + ex.id + "' carries a final answer into a code prompt");
  }
  std::string block = profile.question_prefix + ex.question + "\n";
  if (profile.answer_prefix.empty()) {
    block += body;
  } else {
    block += profile.answer_prefix + " " + body;
  }
  return block;
}

std::string render_tail(const std::string& question, const StyleProfile& profile) {
  std::string tail = profile.question_prefix + question + "\n";
  if (!profile.answer_prefix.empty()) tail += profile.answer_prefix;
  return tail;
}

}  // namespace

AssembledPrompt assemble_prompt(const std::vector<FewShotExample>& examples, PromptStyle style,
                                const std::string& test_question, std::uint64_t ordering_seed,
                                const StyleProfile& profile, const RenderOptions& options) {
  if (blank(test_question)) throw EmptyTestQuestion("test question is blank");

  auto perm = ordering_permutation(examples.size(), ordering_seed);
  AssembledPrompt out;
  out.style = style;
  out.ordering_seed = ordering_seed;
  out.stop_sequences = profile.stop_sequences;

  std::string text;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    const FewShotExample& ex = examples[perm[k]];
    out.example_ids.push_back(ex.id);
    text += render_block(ex, style, profile, options);
    text += profile.separator;
  }
  text += render_tail(test_question, profile);
  out.text = std::move(text);
  return out;
}

std::string extract_final_question(const std::string& question) {
  std::size_t last_q = question.rfind('?');
  if (last_q == std::string::npos) {
    std::string t = question;
    while (!t.empty() && std::isspace((unsigned char)t.back())) t.pop_back();
    return t;
  }
  std::size_t begin = 0;
  for (std::size_t i = last_q; i-- > 0;) {
    char c = question[i];
    if (c == '.' || c == '!' || c == '?' || c == '\n') {
      begin = i + 1;
      break;
    }
  }
  while (begin < last_q && std::isspace((unsigned char)question[begin])) ++begin;
  return question.substr(begin, last_q - begin + 1);
}

std::vector<std::string> parse_subquestions(const std::string& completion_text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < completion_text.size()) {
    std::size_t open = completion_text.find('"', i);
    if (open == std::string::npos) break;
    std::size_t close = completion_text.find('"', open + 1);
    if (close == std::string::npos) break;
    std::string span = completion_text.substr(open + 1, close - open - 1);
    std::size_t b = span.find_first_not_of(" \t\n");
    std::size_t e = span.find_last_not_of(" \t\n");
    if (b != std::string::npos) {
      span = span.substr(b, e - b + 1);
      if (!span.empty()) out.push_back(span);
    }
    i = close + 1;
  }
  return out;
}

AssembledPrompt render_l2m_stage(L2MStage stage, PromptStyle solve_style,
                                 const std::vector<FewShotExample>& examples,
                                 const std::string& question,
                                 const std::vector<SubAnswer>& prior_subanswers,
                                 const StyleProfile& profile) {
  if (blank(question)) throw EmptyTestQuestion("test question is blank");

  AssembledPrompt out;
  out.style = stage == L2MStage::Reduce ? PromptStyle::L2MReduce : solve_style;
  out.stop_sequences = profile.stop_sequences;

  std::string text;
  for (const FewShotExample& ex : examples) {
    out.example_ids.push_back(ex.id);
    if (blank(ex.reasoning)) {
      throw StyleMismatch("example '" + ex.id + "' has no reasoning for a least-to-most prompt");
    }
    std::string block = profile.question_prefix + ex.question + "\n";
    if (profile.answer_prefix.empty()) {
      block += ex.reasoning;
    } else {
      block += profile.answer_prefix + " " + ex.reasoning;
    }
    text += block;
    text += profile.separator;
  }

  if (stage == L2MStage::Reduce) {
    text += profile.question_prefix + question + "\n";
    std::string cue = "To answer the question \"" + extract_final_question(question) +
                      "\", we need to know:";
    if (profile.answer_prefix.empty()) {
      text += cue;
    } else {
      text += profile.answer_prefix + " " + cue;
    }
  } else {
    if (prior_subanswers.empty()) {
      throw MissingDecomposition("solve stage rendered without subquestions");
    }
    if (solve_style == PromptStyle::L2MPALSolve) {
      text += "# " + question + "\n\n";
      for (const SubAnswer& sub : prior_subanswers) {
        if (!sub.answer.empty()) continue;
        text += "# " + sub.subquestion + "\n";
        break;
      }
    } else {
      text += profile.question_prefix + question + "\n";
      for (const SubAnswer& sub : prior_subanswers) {
        if (!sub.answer.empty()) {
          text += "Q: " + sub.subquestion + "\nA: " + sub.answer + "\n";
        } else {
          text += "Q: " + sub.subquestion + "\nA:";
          break;
        }
      }
    }
  }
  out.text = std::move(text);
  return out;
}

namespace {

StyleProfile profile_from_json(const json& j) {
  StyleProfile p;
  if (j.contains("question_prefix")) p.question_prefix = j.at("question_prefix").get<std::string>();
  if (j.contains("answer_prefix")) p.answer_prefix = j.at("answer_prefix").get<std::string>();
  if (j.contains("separator")) p.separator = j.at("separator").get<std::string>();
  if (j.contains("stop")) {
    for (const auto& s : j.at("stop")) p.stop_sequences.push_back(s.get<std::string>());
  }
  if (j.contains("convention")) {
    auto c = runtime::convention_from_string(j.at("convention").get<std::string>());
    if (!c) throw FormatError("unknown answer convention: " + j.at("convention").dump());
    p.convention = *c;
  }
  if (j.contains("prelude") && !j.at("prelude").is_null()) {
    p.prelude_id = j.at("prelude").get<std::string>();
  }
  return p;
}

json load_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
  return j;
}

}  // namespace

StyleProfile TaskPromptSet::profile_for(PromptStyle style) const {
  const std::string family = style_family(style);
  for (const auto& [name, profile] : family_profiles) {
    if (name == family) return profile;
  }
  for (const auto& [name, profile] : family_profiles) {
    if (name == "default") return profile;
  }
  throw StyleMismatch("task '" + task + "' has no prompt profile for family '" + family + "'");
}

std::vector<FewShotExample> TaskPromptSet::examples_for(PromptStyle style) const {
  const std::string family = style_family(style);
  std::vector<FewShotExample> out;
  for (const auto& ex : examples) {
    if (ex.has_tag(family)) out.push_back(ex);
  }
  if (out.empty()) {
    throw StyleMismatch("task '" + task + "' has no examples tagged '" + family + "'");
  }
  return out;
}

TaskPromptSet load_prompt_set(const std::filesystem::path& task_dir) {
  const json manifest = load_json_file(task_dir / "manifest.json");
  TaskPromptSet set;
  set.task = manifest.value("task", task_dir.filename().string());
  if (manifest.contains("kind")) {
    auto k = scoring::task_kind_from_string(manifest.at("kind").get<std::string>());
    if (!k) throw FormatError("unknown task kind in " + (task_dir / "manifest.json").string());
    set.kind = *k;
  }
  if (manifest.contains("profiles")) {
    for (const auto& [name, body] : manifest.at("profiles").items()) {
      set.family_profiles.emplace_back(name, profile_from_json(body));
    }
  }
  for (const auto& fname : manifest.at("examples")) {
    const json j = load_json_file(task_dir / fname.get<std::string>());
    FewShotExample ex;
    ex.id = j.value("id", fname.get<std::string>());
    ex.question = j.at("question").get<std::string>();
    ex.reasoning = j.value("reasoning", "");
    if (j.contains("final_answer") && !j.at("final_answer").is_null()) {
      ex.final_answer = j.at("final_answer").get<std::string>();
    }
    if (j.contains("tags")) {
      for (const auto& t : j.at("tags")) ex.style_tags.push_back(t.get<std::string>());
    }
    set.examples.push_back(std::move(ex));
  }
  return set;
}

}  // namespace pal::prompts
