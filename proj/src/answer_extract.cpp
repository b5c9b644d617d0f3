#include "pal/answer_extract.hpp"

#include <fstream>
#include <regex>

#include <json.hpp>

#include "pal/errors.hpp"

namespace pal::scoring {

struct AnswerExtractor::CompiledPattern {
  std::regex re;
};

AnswerExtractor::AnswerExtractor(std::vector<std::string> patterns)
    : sources_(std::move(patterns)) {
  auto compiled = std::make_shared<std::vector<CompiledPattern>>();
  for (const auto& p : sources_) {
    try {
      compiled->push_back({std::regex(p, std::regex::icase)});
    } catch (const std::regex_error& e) {
      throw FormatError("bad answer pattern '" + p + "': " + e.what());
    }
  }
  compiled_ = std::move(compiled);
}

AnswerExtractor AnswerExtractor::builtin() {
  return AnswerExtractor({
      R"(the answer is[:\s]+([^\n\.]+))",
      R"(answer[:\s]+([^\n\.]+))",
      R"(=\s*([^=\n]+)\s*$)",
  });
}

AnswerExtractor AnswerExtractor::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
  std::vector<std::string> patterns;
  for (const auto& p : j.at("patterns")) patterns.push_back(p.get<std::string>());
  return AnswerExtractor(std::move(patterns));
}

std::optional<std::string> AnswerExtractor::extract_span(
    const std::string& completion_text) const {
  for (const auto& cp : *compiled_) {
    // keep the last match: a final restatement beats intermediate mentions
    std::optional<std::string> last;
    auto begin = std::sregex_iterator(completion_text.begin(), completion_text.end(), cp.re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      if (it->size() > 1) last = (*it)[1].str();
    }
    if (last) return last;
  }
  return std::nullopt;
}

std::optional<Answer> AnswerExtractor::extract(const std::string& completion_text,
                                               TaskKind task) const {
  if (auto span = extract_span(completion_text)) {
    if (auto a = normalize_answer(*span, task)) return a;
  }
  if (expected_kind(task) == AnswerKind::Number) {
    // fall back to the last number anywhere in the text
    std::optional<Answer> last;
    static const std::regex num(R"([-+]?\$?\d[\d,]*(?:\.\d+)?)");
    auto begin = std::sregex_iterator(completion_text.begin(), completion_text.end(), num);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      if (auto a = normalize_answer(it->str(), task)) last = a;
    }
    return last;
  }
  return std::nullopt;
}

}  // namespace pal::scoring
