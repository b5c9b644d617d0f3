#include <doctest.h>

#include <chrono>

#include "pal/answers.hpp"
#include "pal/executor.hpp"

using namespace pal::runtime;
using pal::scoring::Answer;
using pal::scoring::AnswerKind;

namespace {

const ProgramExecutor& executor() {
  static ProgramExecutor exec([] {
    ProgramExecutor::Config cfg;
    cfg.assets_dir = PAL_ASSETS_DIR;
    return cfg;
  }());
  return exec;
}

ExecutionOutcome run(const std::string& code,
                     AnswerConvention convention = AnswerConvention::AnswerVariable,
                     std::optional<std::string> prelude = {}) {
  ProgramSource src;
  src.code = code;
  src.convention = convention;
  src.task_prelude_id = std::move(prelude);
  return executor().execute(src, ExecutionPolicy{});
}

}  // namespace

TEST_SUITE("executor") {

TEST_CASE("answer variable comes back typed") {
  auto out = run("answer = 5 + 4");
  CHECK(out.status == ExecStatus::Ok);
  REQUIRE(out.value.has_value());
  CHECK(out.value->kind == AnswerKind::Number);
  CHECK(out.value->number_value == 9);
  CHECK(out.value_repr == "9");
}

TEST_CASE("printed value takes the final line") {
  auto out = run("print('scratch')\nprint(42)", AnswerConvention::PrintedValue);
  CHECK(out.status == ExecStatus::Ok);
  REQUIRE(out.value.has_value());
  CHECK(out.value->text_value == "42");
  CHECK(out.stdout_text == "scratch\n42\n");
}

TEST_CASE("returned value calls solution()") {
  auto out = run("def solution():\n    return 5 + 2 + 2\n",
                 AnswerConvention::ReturnedValue);
  CHECK(out.status == ExecStatus::Ok);
  REQUIRE(out.value.has_value());
  CHECK(out.value->number_value == 9);
}

TEST_CASE("strings floats and bools keep their shapes") {
  auto text = run("answer = 'brown'");
  REQUIRE(text.value.has_value());
  CHECK(text.value->kind == AnswerKind::Text);
  CHECK(text.value->text_value == "brown");

  auto frac = run("answer = 32.0");
  REQUIRE(frac.value.has_value());
  CHECK(frac.value->kind == AnswerKind::Number);
  CHECK(frac.value->number_value == 32.0);

  auto truthy = run("answer = (2 > 1)");
  REQUIRE(truthy.value.has_value());
  CHECK(truthy.value->kind == AnswerKind::Text);
  CHECK(truthy.value->text_value == "True");

  auto inf = run("answer = float('inf')");
  CHECK(inf.status == ExecStatus::Ok);
  REQUIRE(inf.value.has_value());
  CHECK(inf.value->kind == AnswerKind::Text);
  CHECK(inf.value->text_value == "inf");
}

TEST_CASE("huge integers survive as text") {
  auto out = run("answer = 10**30");
  CHECK(out.status == ExecStatus::Ok);
  REQUIRE(out.value.has_value());
  CHECK(out.value->kind == AnswerKind::Text);
  CHECK(out.value->text_value == "1000000000000000000000000000000");
}

TEST_CASE("failure modes map to statuses") {
  CHECK(run("answer = ((").status == ExecStatus::SyntaxError);

  auto boom = run("answer = 1 / 0");
  CHECK(boom.status == ExecStatus::RuntimeError);
  CHECK(boom.value_repr.find("ZeroDivisionError") != std::string::npos);

  CHECK(run("x = 5").status == ExecStatus::NoAnswer);
  CHECK(run("print('nothing assigned')").status == ExecStatus::NoAnswer);
  CHECK(run("", AnswerConvention::PrintedValue).status == ExecStatus::NoAnswer);
}

TEST_CASE("system exit is contained") {
  auto out = run("import sys\nsys.exit(3)\nanswer = 1");
  CHECK(out.status == ExecStatus::RuntimeError);
}

TEST_CASE("timeout kills the interpreter at the policy limit") {
  ProgramSource src;
  src.code = "while True:\n    pass";
  ExecutionPolicy policy;
  policy.wall_timeout = std::chrono::milliseconds(1000);
  auto out = executor().execute(src, policy);
  CHECK(out.status == ExecStatus::Timeout);
  CHECK(out.duration >= std::chrono::milliseconds(1000));
}

TEST_CASE("date prelude brings relativedelta into scope") {
  auto out = run("today = datetime(2015, 1, 1) - relativedelta(hours=36)\n"
                 "answer = today.strftime('%m/%d/%Y')",
                 AnswerConvention::AnswerVariable, "date");
  CHECK(out.status == ExecStatus::Ok);
  REQUIRE(out.value.has_value());
  CHECK(out.value->text_value == "12/30/2014");
}

TEST_CASE("fresh interpreter per run") {
  auto first = run("leak = 99\nanswer = leak");
  CHECK(first.status == ExecStatus::Ok);
  auto second = run("answer = leak");
  CHECK(second.status == ExecStatus::RuntimeError);
  CHECK(second.value_repr.find("NameError") != std::string::npos);
}

}
