#include <doctest.h>

#include <regex>
#include <string>

#include "pal/errors.hpp"
#include "pal/prompts.hpp"

using pal::prompts::anonymize_variables;
using pal::prompts::strip_comments;

TEST_SUITE("transforms") {

TEST_CASE("comment stripping removes comment lines and trailing comments") {
  const std::string program =
      "# setup\n"
      "a = 1  # one\n"
      "\n"
      "b = a + 1\n";
  CHECK(strip_comments(program) == "a = 1\n\nb = a + 1\n");
  CHECK(strip_comments(strip_comments(program)) == strip_comments(program));
}

TEST_CASE("hash marks inside strings survive stripping") {
  const std::string program = "s = 'a # b'\nt = \"# c\"  # gone\n";
  CHECK(strip_comments(program) == "s = 'a # b'\nt = \"# c\"\n");
}

TEST_CASE("anonymization renames assignments in first-occurrence order") {
  const std::string program =
      "money_initial = 23\n"
      "bagels = 5\n"
      "money_left = money_initial - bagels\n"
      "answer = money_left\n";
  CHECK(anonymize_variables(program, 0) ==
        "a = 23\n"
        "b = 5\n"
        "c = a - b\n"
        "answer = c\n");
}

TEST_CASE("anonymization leaves calls builtins and keywords alone") {
  const std::string program =
      "items = []\n"
      "for i, pair in enumerate(items):\n"
      "    print(len(pair), sep=' ')\n";
  const std::string out = anonymize_variables(program, 0);
  CHECK(out.find("enumerate(") != std::string::npos);
  CHECK(out.find("print(len(") != std::string::npos);
  CHECK(out.find("sep=' '") != std::string::npos);
  CHECK(out.find("items") == std::string::npos);
}

TEST_CASE("function definitions keep their names") {
  const std::string program =
      "def solution():\n"
      "    total = 5 + 4\n"
      "    return total\n";
  const std::string out = anonymize_variables(program, 0);
  CHECK(out.find("def solution():") != std::string::npos);
  CHECK(out.find("total") == std::string::npos);
}

TEST_CASE("seeds permute the name pool but keep the bijection") {
  const std::string program = "x = 1\ny = x + 1\nanswer = y\n";
  const std::string base = anonymize_variables(program, 0);
  CHECK(base == "a = 1\nb = a + 1\nanswer = b\n");
  const std::regex shape("([a-z]+) = 1\n([a-z]+) = \\1 \\+ 1\nanswer = \\2\n");
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const std::string out = anonymize_variables(program, seed);
    CHECK(out == anonymize_variables(program, seed));  // deterministic
    CHECK(std::regex_match(out, shape));
  }
}

TEST_CASE("strings and attribute access are untouched by renaming") {
  const std::string program =
      "label = 'money_initial'\n"
      "value = label.upper()\n"
      "answer = value\n";
  const std::string out = anonymize_variables(program, 0);
  CHECK(out.find("'money_initial'") != std::string::npos);
  CHECK(out.find(".upper()") != std::string::npos);
}

TEST_CASE("untokenizable programs are rejected") {
  CHECK_THROWS_AS(anonymize_variables("s = 'unterminated\n", 0), pal::ParseFailure);
}

}
