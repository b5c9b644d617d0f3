#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pal/errors.hpp"
#include "pal/prompts.hpp"
#include "pytokens.hpp"

namespace pal::prompts {

using detail::Tok;
using detail::TokKind;
using detail::tok_text;

std::string strip_comments(const std::string& program) {
  const auto tokens = detail::py_tokens(program);
  std::string out;
  out.reserve(program.size());

  std::size_t line_start = 0;  // token index
  for (std::size_t i = 0; i <= tokens.size(); ++i) {
    bool at_break = i == tokens.size() || tokens[i].kind == TokKind::Newline;
    if (!at_break) continue;

    std::vector<const Tok*> line;
    bool had_comment = false;
    for (std::size_t k = line_start; k < i; ++k) {
      if (tokens[k].kind == TokKind::Comment) {
        had_comment = true;
      } else {
        line.push_back(&tokens[k]);
      }
    }
    bool only_space = std::all_of(line.begin(), line.end(), [](const Tok* t) {
      return t->kind == TokKind::Space;
    });
    if (had_comment && only_space) {
      // comment-only line: drop it and its newline
      line_start = i + 1;
      continue;
    }
    if (had_comment) {
      while (!line.empty() && line.back()->kind == TokKind::Space) line.pop_back();
    }
    for (const Tok* t : line) out += tok_text(program, *t);
    if (i < tokens.size()) out += tok_text(program, tokens[i]);
    line_start = i + 1;
  }
  return out;
}

namespace {

bool is_name(const std::string& src, const Tok& t, const char* word) {
  return t.kind == TokKind::Name && src.compare(t.begin, t.end - t.begin, word) == 0;
}

bool protected_name(const std::string& name) {
  return detail::is_python_keyword(name) || detail::is_python_builtin(name) ||
         name == "answer" || name == "solution";
}

/// Indices of non-space, non-comment tokens.
std::vector<std::size_t> code_indices(const std::vector<Tok>& toks) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != TokKind::Space && toks[i].kind != TokKind::Comment) out.push_back(i);
  }
  return out;
}

bool plain_assign(const std::string& src, const Tok& t) {
  return t.kind == TokKind::Op && tok_text(src, t) == "=";
}

bool aug_assign(const std::string& src, const Tok& t) {
  if (t.kind != TokKind::Op) return false;
  std::string s = tok_text(src, t);
  return s.size() >= 2 && s.back() == '=' && s != "==" && s != "!=" && s != "<=" && s != ">=" &&
         s != ":=";
}

bool compound_keyword(const std::string& name) {
  return name == "if" || name == "elif" || name == "else" || name == "for" ||
         name == "while" || name == "with" || name == "try" || name == "except" ||
         name == "finally" || name == "def" || name == "class";
}

/// Collects every name that is written to somewhere in the program:
/// left-hand sides of (possibly chained or augmented) assignments at paren
/// depth 0 and loop targets of any `for ... in`, comprehensions included.
std::unordered_set<std::string> collect_targets(const std::string& src,
                                                const std::vector<Tok>& toks) {
  std::unordered_set<std::string> targets;
  const auto code = code_indices(toks);

  // for-loop targets
  for (std::size_t ci = 0; ci < code.size(); ++ci) {
    if (!is_name(src, toks[code[ci]], "for")) continue;
    for (std::size_t cj = ci + 1; cj < code.size(); ++cj) {
      const Tok& t = toks[code[cj]];
      if (is_name(src, t, "in")) break;
      if (t.kind == TokKind::Name) {
        std::string name = tok_text(src, t);
        if (!protected_name(name)) targets.insert(name);
      }
    }
  }

  // assignment statements: walk per statement segment at depth 0
  std::size_t seg_begin = 0;  // index into `code`
  int depth = 0;
  for (std::size_t ci = 0; ci <= code.size(); ++ci) {
    bool stmt_end = ci == code.size();
    if (!stmt_end) {
      const Tok& t = toks[code[ci]];
      std::string s = tok_text(src, t);
      if (t.kind == TokKind::Op) {
        if (s == "(" || s == "[" || s == "{") ++depth;
        else if (s == ")" || s == "]" || s == "}") --depth;
        else if (s == ";" && depth == 0) stmt_end = true;
      } else if (t.kind == TokKind::Newline && depth == 0) {
        stmt_end = true;
      }
    }
    if (!stmt_end) continue;

    // [seg_begin, ci) is one statement
    do {
      if (ci == seg_begin) break;
      std::size_t first = code[seg_begin];
      if (toks[first].kind == TokKind::Name) {
        std::string head = tok_text(src, toks[first]);
        if (head == "import" || head == "from") break;
      }

      // find the last plain '=' at depth 0 and any aug-assign
      int d = 0;
      std::ptrdiff_t last_eq = -1, first_eq = -1, aug = -1, last_colon = -1;
      for (std::size_t cj = seg_begin; cj < ci; ++cj) {
        const Tok& t = toks[code[cj]];
        std::string s = t.kind == TokKind::Op ? tok_text(src, t) : std::string();
        if (s == "(" || s == "[" || s == "{") ++d;
        else if (s == ")" || s == "]" || s == "}") --d;
        if (d != 0) continue;
        if (plain_assign(src, t)) {
          if (first_eq < 0) first_eq = (std::ptrdiff_t)cj;
          last_eq = (std::ptrdiff_t)cj;
        } else if (aug_assign(src, t) && aug < 0) {
          aug = (std::ptrdiff_t)cj;
        } else if (s == ":") {
          if (first_eq < 0 && aug < 0) last_colon = (std::ptrdiff_t)cj;
        }
      }
      std::ptrdiff_t stop = last_eq >= 0 ? last_eq : aug;
      if (stop < 0) break;

      std::size_t region_begin = seg_begin;
      if (toks[first].kind == TokKind::Name &&
          compound_keyword(tok_text(src, toks[first])) && last_colon >= 0) {
        region_begin = (std::size_t)last_colon + 1;
      }

      d = 0;
      for (std::size_t cj = region_begin; cj < (std::size_t)stop; ++cj) {
        const Tok& t = toks[code[cj]];
        std::string s = t.kind == TokKind::Op ? tok_text(src, t) : std::string();
        if (s == "(" || s == "[" || s == "{") { ++d; continue; }
        if (s == ")" || s == "]" || s == "}") { --d; continue; }
        if (d != 0 || t.kind != TokKind::Name) continue;
        std::string name = tok_text(src, t);
        if (protected_name(name)) continue;
        // skip attribute/subscript/call stores and attribute tails
        if (cj + 1 < (std::size_t)stop) {
          const Tok& nx = toks[code[cj + 1]];
          if (nx.kind == TokKind::Op) {
            std::string ns = tok_text(src, nx);
            if (ns == "." || ns == "[" || ns == "(") continue;
          }
        }
        if (cj > seg_begin) {
          const Tok& pv = toks[code[cj - 1]];
          if (pv.kind == TokKind::Op && tok_text(src, pv) == ".") continue;
        }
        targets.insert(name);
      }
    } while (false);
    seg_begin = ci + 1;
  }
  return targets;
}

std::vector<std::string> build_pool(const std::string& src, const std::vector<Tok>& toks,
                                    const std::unordered_set<std::string>& targets,
                                    std::uint64_t seed) {
  std::unordered_set<std::string> present;  // names that stay as-is
  for (const Tok& t : toks) {
    if (t.kind != TokKind::Name) continue;
    std::string name = tok_text(src, t);
    if (!targets.count(name)) present.insert(name);
  }
  std::vector<std::string> pool;
  pool.reserve(26 + 26 * 26);
  auto admit = [&](std::string name) {
    if (detail::is_python_keyword(name) || detail::is_python_builtin(name)) return;
    if (present.count(name)) return;
    pool.push_back(std::move(name));
  };
  for (char c = 'a'; c <= 'z'; ++c) admit(std::string(1, c));
  for (char c1 = 'a'; c1 <= 'z'; ++c1) {
    for (char c2 = 'a'; c2 <= 'z'; ++c2) admit({c1, c2});
  }
  if (seed != 0) {
    auto perm = ordering_permutation(pool.size(), seed);
    std::vector<std::string> shuffled(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) shuffled[i] = pool[perm[i]];
    pool = std::move(shuffled);
  }
  return pool;
}

}  // namespace

std::string anonymize_variables(const std::string& program, std::uint64_t seed) {
  const auto toks = detail::py_tokens(program);
  const auto targets = collect_targets(program, toks);
  const auto pool = build_pool(program, toks, targets, seed);
  const auto code = code_indices(toks);

  // map code-token index -> position among code tokens, for context checks
  std::unordered_map<std::size_t, std::size_t> code_pos;
  for (std::size_t ci = 0; ci < code.size(); ++ci) code_pos[code[ci]] = ci;

  std::unordered_map<std::string, std::string> mapping;
  std::size_t next_pool = 0;

  // def/class headers and import statements rename nothing
  std::vector<bool> frozen(toks.size(), false);
  {
    int params_depth = -1;  // paren depth where a def parameter list opened
    int depth = 0;
    bool in_import = false, after_defclass = false;
    for (std::size_t ci = 0; ci < code.size(); ++ci) {
      const Tok& t = toks[code[ci]];
      std::string s = tok_text(program, t);
      if (t.kind == TokKind::Newline && depth == 0) {
        in_import = false;
        after_defclass = false;
      }
      if (t.kind == TokKind::Op) {
        if (s == "(" || s == "[" || s == "{") {
          if (after_defclass && params_depth < 0 && s == "(") params_depth = depth;
          ++depth;
        } else if (s == ")" || s == "]" || s == "}") {
          --depth;
          if (params_depth >= 0 && depth == params_depth) params_depth = -1;
        }
      }
      if (t.kind == TokKind::Name && (s == "import" || s == "from")) in_import = true;
      if (t.kind == TokKind::Name && (s == "def" || s == "class")) after_defclass = true;
      if (in_import || params_depth >= 0) frozen[code[ci]] = true;
      if (after_defclass && t.kind == TokKind::Name && s != "def" && s != "class") {
        frozen[code[ci]] = true;  // the defined name itself
      }
    }
  }

  std::string out;
  out.reserve(program.size());
  int depth = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Tok& t = toks[i];
    std::string text = tok_text(program, t);
    if (t.kind == TokKind::Op) {
      if (text == "(" || text == "[" || text == "{") ++depth;
      else if (text == ")" || text == "]" || text == "}") --depth;
    }
    if (t.kind != TokKind::Name || frozen[i] || !targets.count(text)) {
      out += text;
      continue;
    }
    auto cp = code_pos.find(i);
    std::size_t ci = cp->second;
    // attribute tail: obj.name
    if (ci > 0) {
      const Tok& pv = toks[code[ci - 1]];
      if (pv.kind == TokKind::Op && tok_text(program, pv) == ".") {
        out += text;
        continue;
      }
    }
    // keyword argument: name= inside a call
    if (depth > 0 && ci + 1 < code.size() && ci > 0) {
      const Tok& nx = toks[code[ci + 1]];
      const Tok& pv = toks[code[ci - 1]];
      bool nx_eq = plain_assign(program, nx);
      std::string pvs = pv.kind == TokKind::Op ? tok_text(program, pv) : std::string();
      if (nx_eq && (pvs == "(" || pvs == ",")) {
        out += text;
        continue;
      }
    }
    auto it = mapping.find(text);
    if (it == mapping.end()) {
      if (next_pool >= pool.size()) throw ParseFailure("anonymization pool exhausted");
      it = mapping.emplace(text, pool[next_pool++]).first;
    }
    out += it->second;
  }
  return out;
}

}  // namespace pal::prompts
