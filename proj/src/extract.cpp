#include "pal/extract.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <sstream>

#include "pal/errors.hpp"

namespace pal::runtime {

namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace((unsigned char)c); });
}

/// Content of the first ``` fence, when the completion uses one.
std::optional<std::string> fenced_block(const std::string& text) {
  std::size_t open = text.find("```");
  if (open == std::string::npos) return std::nullopt;
  std::size_t body = text.find('\n', open);
  if (body == std::string::npos) return std::nullopt;
  ++body;
  std::size_t close = text.find("```", body);
  if (close == std::string::npos) return text.substr(body);
  return text.substr(body, close - body);
}

/// A completion that is pure prose (or only comments) is not a program.
/// Any non-comment line with assignment/call/subscript punctuation or a
/// statement keyword counts as code.
bool code_like(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    if (line[b] == '#') continue;
    if (line.find_first_of("=([") != std::string::npos) return true;
    static const char* keywords[] = {"def ",    "class ",  "for ",  "while ", "if ",
                                     "import ", "from ",   "return", "with ", "try:",
                                     "print"};
    for (const char* k : keywords) {
      if (line.compare(b, std::strlen(k), k) == 0) return true;
    }
  }
  return false;
}

/// Cuts the text at the start of a follow-on question block the model
/// hallucinated past the stop sequences.
std::string cut_next_question(const std::string& text) {
  static const char* markers[] = {"\nQ: ", "\n#Q: ", "\n# Q: "};
  std::size_t cut = std::string::npos;
  for (const char* m : markers) {
    std::size_t at = text.find(m);
    if (at != std::string::npos) cut = std::min(cut, at);
  }
  return cut == std::string::npos ? text : text.substr(0, cut);
}

}  // namespace

std::string extract_program(const std::string& completion_text, prompts::PromptStyle style) {
  (void)style;
  std::string text = completion_text;
  if (auto fenced = fenced_block(text)) text = *fenced;
  text = cut_next_question(text);

  // trim outer blank lines, keep inner layout byte-identical
  std::size_t begin = 0;
  while (begin < text.size() && (text[begin] == '\n' || text[begin] == '\r')) ++begin;
  std::size_t end = text.size();
  while (end > begin && std::isspace((unsigned char)text[end - 1])) --end;
  text = text.substr(begin, end - begin);

  if (blank(text) || !code_like(text)) {
    throw EmptyProgram("completion contains no executable code");
  }
  return text;
}

ProgramSource program_from_completion(const std::string& completion_text,
                                      prompts::PromptStyle style,
                                      const prompts::StyleProfile& profile) {
  ProgramSource source;
  source.code = extract_program(completion_text, style);
  source.task_prelude_id = profile.prelude_id;
  source.convention = profile.convention;
  return source;
}

}  // namespace pal::runtime
