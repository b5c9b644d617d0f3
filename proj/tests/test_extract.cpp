#include <doctest.h>

#include "pal/errors.hpp"
#include "pal/extract.hpp"

using namespace pal::runtime;
using pal::prompts::PromptStyle;

TEST_SUITE("extract") {

TEST_CASE("plain completions pass through trimmed") {
  CHECK(extract_program("\nanswer = 2 + 2\n\n", PromptStyle::PAL) == "answer = 2 + 2");
}

TEST_CASE("fenced code is unwrapped") {
  CHECK(extract_program("Here you go:\n```python\nanswer = 6\n```\nenjoy",
                        PromptStyle::PAL) == "answer = 6");
  CHECK(extract_program("```\nanswer = 6", PromptStyle::PAL) == "answer = 6");
}

TEST_CASE("hallucinated next questions are cut") {
  const std::string text =
      "total = 5 + 4\nprint(total)\n\n#Q: And if he loses one?\ntotal = 8\n";
  CHECK(extract_program(text, PromptStyle::PAL) == "total = 5 + 4\nprint(total)");
  const std::string spaced =
      "answer = 9\n\n# Q: next one\nanswer = 10\n";
  CHECK(extract_program(spaced, PromptStyle::PAL) == "answer = 9");
  const std::string nl = "answer = 9\nQ: another question\n";
  CHECK(extract_program(nl, PromptStyle::PAL) == "answer = 9");
}

TEST_CASE("inner blank lines survive") {
  const std::string text = "a = 1\n\nb = a + 1\nanswer = b";
  CHECK(extract_program(text, PromptStyle::PAL) == text);
}

TEST_CASE("prose and empty completions are rejected") {
  CHECK_THROWS_AS(extract_program("", PromptStyle::PAL), pal::EmptyProgram);
  CHECK_THROWS_AS(extract_program("   \n\n  ", PromptStyle::PAL), pal::EmptyProgram);
  CHECK_THROWS_AS(extract_program("The train travels one hundred eighty kilometers "
                                  "in total.",
                                  PromptStyle::PAL),
                  pal::EmptyProgram);
  CHECK_THROWS_AS(extract_program("# only a comment\n# and another\n", PromptStyle::PAL),
                  pal::EmptyProgram);
}

TEST_CASE("completion wiring attaches prelude and convention") {
  pal::prompts::StyleProfile profile;
  profile.prelude_id = "date";
  profile.convention = AnswerConvention::PrintedValue;
  auto src = program_from_completion("print(1)\n", PromptStyle::PAL, profile);
  CHECK(src.code == "print(1)");
  CHECK(src.task_prelude_id == "date");
  CHECK(src.convention == AnswerConvention::PrintedValue);
}

}
