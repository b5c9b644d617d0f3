#include "pytokens.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

#include "pal/errors.hpp"

namespace pal::detail {

namespace {

bool name_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
bool name_cont(char c) { return std::isalnum((unsigned char)c) || c == '_'; }

bool is_string_prefix(const std::string& s) {
  if (s.size() > 2) return false;
  for (char c : s) {
    char l = (char)std::tolower((unsigned char)c);
    if (l != 'r' && l != 'b' && l != 'u' && l != 'f') return false;
  }
  return !s.empty();
}

/// Consumes a quoted literal starting at src[i] (a quote char). Returns the
/// index one past the closing quote. Throws ParseFailure when unterminated.
std::size_t scan_string_body(const std::string& src, std::size_t i) {
  const char q = src[i];
  bool triple = i + 2 < src.size() && src[i + 1] == q && src[i + 2] == q;
  std::size_t j = i + (triple ? 3 : 1);
  while (j < src.size()) {
    char c = src[j];
    if (c == '\\') {
      j += 2;
      continue;
    }
    if (triple) {
      if (c == q && j + 2 < src.size() && src[j + 1] == q && src[j + 2] == q) {
        return j + 3;
      }
      ++j;
    } else {
      if (c == q) return j + 1;
      if (c == '\n') break;
      ++j;
    }
  }
  throw ParseFailure("unterminated string literal at byte " + std::to_string(i));
}

std::size_t scan_number(const std::string& src, std::size_t i) {
  std::size_t j = i;
  auto digits = [&](auto pred) {
    while (j < src.size() && (pred(src[j]) || src[j] == '_')) ++j;
  };
  if (src[j] == '0' && j + 1 < src.size() && (src[j + 1] == 'x' || src[j + 1] == 'X')) {
    j += 2;
    digits([](char c) { return std::isxdigit((unsigned char)c); });
    return j;
  }
  if (src[j] == '0' && j + 1 < src.size() &&
      (src[j + 1] == 'o' || src[j + 1] == 'O' || src[j + 1] == 'b' || src[j + 1] == 'B')) {
    j += 2;
    digits([](char c) { return std::isdigit((unsigned char)c); });
    return j;
  }
  digits([](char c) { return std::isdigit((unsigned char)c); });
  if (j < src.size() && src[j] == '.') {
    ++j;
    digits([](char c) { return std::isdigit((unsigned char)c); });
  }
  if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
    std::size_t e = j + 1;
    if (e < src.size() && (src[e] == '+' || src[e] == '-')) ++e;
    if (e < src.size() && std::isdigit((unsigned char)src[e])) {
      j = e;
      digits([](char c) { return std::isdigit((unsigned char)c); });
    }
  }
  if (j < src.size() && (src[j] == 'j' || src[j] == 'J')) ++j;
  return j;
}

const std::array<const char*, 17> kMultiOps = {
    "**=", "//=", ">>=", "<<=", "==", "!=", "<=", ">=", "+=", "-=",
    "*=",  "/=",  "%=",  "&=",  "|=", "^=", ":=",
};

}  // namespace

std::vector<Tok> py_tokens(const std::string& src) {
  std::vector<Tok> out;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    char c = src[i];
    if (c == '\n') {
      out.push_back({TokKind::Newline, i, i + 1});
      ++i;
      continue;
    }
    if (c == '\r') {
      std::size_t j = (i + 1 < n && src[i + 1] == '\n') ? i + 2 : i + 1;
      out.push_back({TokKind::Newline, i, j});
      i = j;
      continue;
    }
    if (c == ' ' || c == '\t') {
      std::size_t j = i;
      while (j < n && (src[j] == ' ' || src[j] == '\t')) ++j;
      out.push_back({TokKind::Space, i, j});
      i = j;
      continue;
    }
    if (c == '\\' && i + 1 < n && (src[i + 1] == '\n' || src[i + 1] == '\r')) {
      std::size_t j = i + ((i + 2 <= n && src[i + 1] == '\r' && i + 2 < n && src[i + 2] == '\n') ? 3 : 2);
      out.push_back({TokKind::Space, i, j});  // line continuation
      i = j;
      continue;
    }
    if (c == '#') {
      std::size_t j = i;
      while (j < n && src[j] != '\n') ++j;
      out.push_back({TokKind::Comment, i, j});
      i = j;
      continue;
    }
    if (c == '\'' || c == '"') {
      std::size_t j = scan_string_body(src, i);
      out.push_back({TokKind::String, i, j});
      i = j;
      continue;
    }
    if (name_start(c)) {
      std::size_t j = i;
      while (j < n && name_cont(src[j])) ++j;
      std::string word = src.substr(i, j - i);
      if (j < n && (src[j] == '\'' || src[j] == '"') && is_string_prefix(word)) {
        std::size_t k = scan_string_body(src, j);
        out.push_back({TokKind::String, i, k});
        i = k;
        continue;
      }
      out.push_back({TokKind::Name, i, j});
      i = j;
      continue;
    }
    if (std::isdigit((unsigned char)c) ||
        (c == '.' && i + 1 < n && std::isdigit((unsigned char)src[i + 1]))) {
      std::size_t j = scan_number(src, i);
      out.push_back({TokKind::Number, i, j});
      i = j;
      continue;
    }
    std::size_t op_len = 1;
    for (const char* op : kMultiOps) {
      std::size_t len = std::char_traits<char>::length(op);
      if (src.compare(i, len, op) == 0) {
        op_len = len;
        break;
      }
    }
    if (op_len == 1) {
      if (src.compare(i, 2, "**") == 0 || src.compare(i, 2, "//") == 0 ||
          src.compare(i, 2, ">>") == 0 || src.compare(i, 2, "<<") == 0 ||
          src.compare(i, 2, "->") == 0) {
        op_len = 2;
      }
    }
    out.push_back({TokKind::Op, i, i + op_len});
    i += op_len;
  }
  return out;
}

bool is_python_keyword(const std::string& name) {
  static const std::unordered_set<std::string> kw = {
      "False", "None", "True", "and", "as", "assert", "async", "await", "break",
      "class", "continue", "def", "del", "elif", "else", "except", "finally",
      "for", "from", "global", "if", "import", "in", "is", "lambda", "nonlocal",
      "not", "or", "pass", "raise", "return", "try", "while", "with", "yield",
      "match", "case"};
  return kw.count(name) > 0;
}

bool is_python_builtin(const std::string& name) {
  static const std::unordered_set<std::string> b = {
      "abs", "all", "any", "ascii", "bin", "bool", "bytearray", "bytes",
      "callable", "chr", "classmethod", "compile", "complex", "delattr", "dict",
      "dir", "divmod", "enumerate", "eval", "exec", "filter", "float", "format",
      "frozenset", "getattr", "globals", "hasattr", "hash", "hex", "id", "input",
      "int", "isinstance", "issubclass", "iter", "len", "list", "locals", "map",
      "max", "min", "next", "object", "oct", "open", "ord", "pow", "print",
      "property", "range", "repr", "reversed", "round", "set", "setattr",
      "slice", "sorted", "staticmethod", "str", "sum", "super", "tuple", "type",
      "vars", "zip", "__import__", "__name__", "Exception", "BaseException",
      "ValueError", "TypeError", "KeyError", "IndexError", "ZeroDivisionError",
      "ArithmeticError", "StopIteration", "RuntimeError", "NameError",
      "AttributeError", "NotImplementedError", "OverflowError", "MemoryError",
      "FloatingPointError", "AssertionError"};
  return b.count(name) > 0;
}

}  // namespace pal::detail
