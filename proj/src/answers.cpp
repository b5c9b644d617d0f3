#include "pal/answers.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace pal::scoring {

namespace {

bool ascii_digit(char c) { return c >= '0' && c <= '9'; }

/// Strips currency glyphs and thousands separators, leaving the numeric
/// skeleton intact.
std::string scrub_number_text(const std::string& raw) {
  std::string s;
  s.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (c == '$') continue;
    if (c == ',' && i > 0 && i + 1 < raw.size() && ascii_digit(raw[i - 1]) &&
        ascii_digit(raw[i + 1])) {
      continue;  // thousands separator
    }
    // UTF-8 currency marks seen in model output
    if ((unsigned char)c == 0xC2 && i + 1 < raw.size() && (unsigned char)raw[i + 1] == 0xA3) {
      ++i;  // pound sign
      continue;
    }
    if ((unsigned char)c == 0xE2 && i + 2 < raw.size() && (unsigned char)raw[i + 1] == 0x82 &&
        (unsigned char)raw[i + 2] == 0xAC) {
      i += 2;  // euro sign
      continue;
    }
    s.push_back(c);
  }
  return s;
}

std::optional<double> parse_first_number(const std::string& raw) {
  const std::string s = scrub_number_text(raw);
  for (std::size_t i = 0; i < s.size(); ++i) {
    bool starts = ascii_digit(s[i]) ||
                  (s[i] == '.' && i + 1 < s.size() && ascii_digit(s[i + 1]));
    if (!starts) continue;
    std::size_t begin = i;
    if (begin > 0 && (s[begin - 1] == '-' || s[begin - 1] == '+')) --begin;
    std::size_t end = i;
    bool seen_dot = false;
    while (end < s.size()) {
      char c = s[end];
      if (ascii_digit(c)) { ++end; continue; }
      if (c == '.' && !seen_dot) { seen_dot = true; ++end; continue; }
      break;
    }
    // optional exponent
    if (end < s.size() && (s[end] == 'e' || s[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < s.size() && (s[e] == '-' || s[e] == '+')) ++e;
      std::size_t digits = e;
      while (digits < s.size() && ascii_digit(s[digits])) ++digits;
      if (digits > e) end = digits;
    }
    std::string token = s.substr(begin, end - begin);
    if (!token.empty() && token.back() == '.') token.pop_back();
    try {
      std::size_t used = 0;
      double v = std::stod(token, &used);
      if (used == token.size()) return v;
    } catch (...) {
    }
  }
  return std::nullopt;
}

bool strippable_punct(char c) {
  switch (c) {
    case '.': case ',': case ':': case ';': case '!': case '?':
    case '"': case '\'': case '(': case ')': case '[': case ']':
    case '{': case '}': case '*': case '`':
      return true;
    default:
      return false;
  }
}

std::string normalize_text_value(const std::string& raw) {
  std::string collapsed;
  collapsed.reserve(raw.size());
  bool in_space = true;
  for (char c : raw) {
    if (std::isspace((unsigned char)c)) {
      if (!in_space) collapsed.push_back(' ');
      in_space = true;
    } else {
      collapsed.push_back((char)std::tolower((unsigned char)c));
      in_space = false;
    }
  }
  std::size_t begin = 0, end = collapsed.size();
  while (end > begin && (collapsed[end - 1] == ' ' || strippable_punct(collapsed[end - 1]))) --end;
  while (begin < end && (collapsed[begin] == ' ' || strippable_punct(collapsed[begin]))) ++begin;
  return collapsed.substr(begin, end - begin);
}

std::optional<Answer> parse_date_value(const std::string& raw) {
  std::string t = normalize_text_value(raw);
  int a = 0, b = 0, c = 0;
  char sep1 = 0, sep2 = 0;
  if (std::sscanf(t.c_str(), "%d%c%d%c%d", &a, &sep1, &b, &sep2, &c) != 5) return std::nullopt;
  int month = 0, day = 0, year = 0;
  if (sep1 == '/' && sep2 == '/') {
    month = a; day = b; year = c;
  } else if (sep1 == '-' && sep2 == '-' && a >= 1000) {
    year = a; month = b; day = c;  // ISO
  } else {
    return std::nullopt;
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || year < 1000 || year > 9999) {
    return std::nullopt;
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d/%02d/%04d", month, day, year);
  return Answer::date(buf);
}

std::string format_number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

}  // namespace

AnswerKind expected_kind(TaskKind task) {
  switch (task) {
    case TaskKind::Math:
    case TaskKind::ObjectCounting:
      return AnswerKind::Number;
    case TaskKind::Date:
      return AnswerKind::DateString;
    case TaskKind::ColoredObjects:
    case TaskKind::Penguins:
    case TaskKind::RepeatCopy:
      return AnswerKind::Text;
  }
  return AnswerKind::Text;
}

std::string to_string(TaskKind task) {
  switch (task) {
    case TaskKind::Math: return "math";
    case TaskKind::ColoredObjects: return "colored_objects";
    case TaskKind::Penguins: return "penguins";
    case TaskKind::Date: return "date";
    case TaskKind::ObjectCounting: return "object_counting";
    case TaskKind::RepeatCopy: return "repeat_copy";
  }
  return "math";
}

std::optional<TaskKind> task_kind_from_string(const std::string& name) {
  if (name == "math") return TaskKind::Math;
  if (name == "colored_objects") return TaskKind::ColoredObjects;
  if (name == "penguins") return TaskKind::Penguins;
  if (name == "date") return TaskKind::Date;
  if (name == "object_counting") return TaskKind::ObjectCounting;
  if (name == "repeat_copy") return TaskKind::RepeatCopy;
  return std::nullopt;
}

std::string to_display_string(const Answer& a) {
  if (a.kind == AnswerKind::Number) return format_number(a.number_value);
  return a.text_value;
}

std::optional<Answer> normalize_answer(const std::string& raw, TaskKind task) {
  switch (expected_kind(task)) {
    case AnswerKind::Number: {
      auto v = parse_first_number(raw);
      if (!v) return std::nullopt;
      return Answer::number(*v);
    }
    case AnswerKind::Text: {
      std::string t = normalize_text_value(raw);
      if (t.empty()) return std::nullopt;
      return Answer::text(std::move(t));
    }
    case AnswerKind::DateString:
      return parse_date_value(raw);
  }
  return std::nullopt;
}

std::optional<Answer> normalize_answer(const Answer& raw, TaskKind task) {
  if (raw.kind == AnswerKind::Number && expected_kind(task) == AnswerKind::Number) {
    return raw;
  }
  return normalize_answer(to_display_string(raw), task);
}

bool answers_match(const Answer& a, const Answer& b, const MatchTolerance& tol) {
  if (a.kind != b.kind) return false;
  if (a.kind == AnswerKind::Number) {
    double x = a.number_value, y = b.number_value;
    if (x == y) return true;
    double bound = std::max(tol.abs_tol, tol.rel_tol * std::max(std::fabs(x), std::fabs(y)));
    return std::fabs(x - y) <= bound;
  }
  return a.text_value == b.text_value;
}

}  // namespace pal::scoring
