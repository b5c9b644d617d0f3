#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pal::detail {

enum class TokKind { Name, Number, String, Comment, Op, Newline, Space };

struct Tok {
  TokKind kind;
  std::size_t begin = 0;
  std::size_t end = 0;  // half-open byte range into the source
};

/// Flat lexical scan of Python-ish source. Strings (including prefixes,
/// triple quotes and escapes) and comments come back as single tokens, so
/// callers can transform code without touching literal or comment bytes.
/// Throws ParseFailure on an unterminated string.
std::vector<Tok> py_tokens(const std::string& src);

inline std::string tok_text(const std::string& src, const Tok& t) {
  return src.substr(t.begin, t.end - t.begin);
}

bool is_python_keyword(const std::string& name);
bool is_python_builtin(const std::string& name);

}  // namespace pal::detail
