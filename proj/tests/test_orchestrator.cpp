#include <doctest.h>

#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pal/backend.hpp"
#include "pal/errors.hpp"
#include "pal/orchestrator.hpp"

using namespace pal::runner;
using pal::backend::Completion;
using pal::backend::DecodeParams;
using pal::backend::ReplayArchive;
using pal::backend::ReplayBackend;
using pal::scoring::Answer;
using pal::scoring::TaskKind;
using pal::scoring::TieRule;
namespace fs = std::filesystem;

namespace {

fs::path fixtures() { return fs::path(PAL_FIXTURES_DIR); }
fs::path assets() { return fs::path(PAL_ASSETS_DIR); }

fs::path fresh_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("pal_orch_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// A backend the run must never reach.
class ForbiddenBackend : public pal::backend::CompletionBackend {
 public:
  std::vector<Completion> complete(const std::string&, const DecodeParams&) override {
    FAIL("backend was called during an empty run");
    return {};
  }
  std::string id() const override { return "forbidden"; }
};

/// Replay plus a call counter, for resume accounting.
class CountingReplay : public pal::backend::CompletionBackend {
 public:
  explicit CountingReplay(ReplayArchive archive) : inner_(std::move(archive)) {}
  std::vector<Completion> complete(const std::string& prompt,
                                   const DecodeParams& params) override {
    calls.fetch_add(1);
    return inner_.complete(prompt, params);
  }
  std::string id() const override { return inner_.id(); }
  std::atomic<int> calls{0};

 private:
  ReplayBackend inner_;
};

RunConfig gsm20_config(const fs::path& out) {
  RunConfig config;
  config.task = "gsm8k";
  config.task_kind = TaskKind::Math;
  config.dataset_file = fixtures() / "datasets" / "gsm20.jsonl";
  config.style = pal::prompts::PromptStyle::PAL;
  config.ordering_seeds = {0, 1, 2};
  config.prompts_dir = assets() / "prompts";
  config.assets_dir = assets();
  config.workers = 4;
  config.output_dir = out;
  return config;
}

std::size_t status_count(const RunReport& report, const std::string& name) {
  for (const auto& [status, count] : report.status_counts) {
    if (status == name) return count;
  }
  return 0;
}

void check_gsm20_report(const RunReport& report) {
  CHECK(report.n_items == 20);
  CHECK(report.n_orderings == 3);
  CHECK(report.stats.mean == doctest::Approx(0.85).epsilon(1e-12));
  CHECK(report.stats.stddev == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(report.items_correct == 51);
  CHECK(report.items_incorrect == 3);
  CHECK(report.items_all_invalid == 6);
  CHECK(status_count(report, "ok") == 54);
  CHECK(status_count(report, "syntax_error") == 3);
  CHECK(status_count(report, "runtime_error") == 3);
}

}  // namespace

TEST_SUITE("orchestrator") {

TEST_CASE("limit zero runs nothing and still writes outputs") {
  auto out = fresh_dir("empty");
  auto config = gsm20_config(out);
  config.limit = 0;
  ForbiddenBackend backend;
  auto report = run_experiment(config, backend);
  CHECK(report.n_items == 0);
  CHECK(report.items_correct == 0);
  CHECK(report.status_counts.empty());
  CHECK(fs::exists(out / "traces.jsonl"));
  CHECK(fs::file_size(out / "traces.jsonl") == 0);
  CHECK(fs::exists(out / "report.json"));
  CHECK(read_trace_file(out / "traces.jsonl").empty());
  fs::remove_all(out);
}

TEST_CASE("config validation") {
  auto out = fresh_dir("badcfg");
  ForbiddenBackend backend;
  auto config = gsm20_config(out);
  config.ordering_seeds.clear();
  CHECK_THROWS_AS((void)run_experiment(config, backend), pal::ConfigError);

  auto l2m = gsm20_config(out);
  l2m.style = pal::prompts::PromptStyle::CoT;
  CHECK_THROWS_AS((void)run_l2m(l2m, backend), pal::ConfigError);

  auto multi = gsm20_config(out);
  multi.style = pal::prompts::PromptStyle::L2MPALSolve;
  multi.decode.temperature = 0.7;
  multi.decode.n_samples = 4;
  CHECK_THROWS_AS((void)run_l2m(multi, backend), pal::ConfigError);
  fs::remove_all(out);
}

TEST_CASE("replayed gsm20 run scores and orders deterministically") {
  auto archive = ReplayArchive::load(fixtures() / "archives" / "gsm20_pal.jsonl");
  auto out_a = fresh_dir("gsm20_a");
  ReplayBackend backend_a(archive);
  auto report_a = run_experiment(gsm20_config(out_a), backend_a);
  check_gsm20_report(report_a);
  CHECK(report_a.resumed_items == 0);

  auto traces = read_trace_file(out_a / "traces.jsonl");
  REQUIRE(traces.size() == 60);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    CHECK(traces[i].ordering_seed == i / 20);
    CHECK(traces[i].item_index == i % 20);
    REQUIRE(traces[i].samples.size() == 1);
    CHECK(traces[i].samples[0].exec_duration.count() == 0);  // replay -> deterministic
  }

  // the three planted failure modes, per ordering
  for (std::size_t base : {0u, 20u, 40u}) {
    const auto& library = traces[base + 17];
    CHECK(library.item_id == "library");
    CHECK(library.samples[0].status == pal::runtime::ExecStatus::Ok);
    CHECK(library.chosen_display == "184");
    CHECK(!library.correct);
    CHECK(library.valid_samples == 1);

    const auto& train = traces[base + 18];
    CHECK(train.item_id == "train");
    CHECK(train.samples[0].status == pal::runtime::ExecStatus::SyntaxError);
    CHECK(train.valid_samples == 0);

    const auto& bill = traces[base + 19];
    CHECK(bill.item_id == "bill");
    CHECK(bill.samples[0].status == pal::runtime::ExecStatus::RuntimeError);
    CHECK(bill.valid_samples == 0);

    const auto& muffins = traces[base + 0];
    CHECK(muffins.item_id == "muffins");
    CHECK(muffins.chosen_display == "25");
    CHECK(muffins.correct);
  }

  // same run, separate directory: byte-identical outputs
  auto out_b = fresh_dir("gsm20_b");
  ReplayBackend backend_b(archive);
  auto report_b = run_experiment(gsm20_config(out_b), backend_b);
  check_gsm20_report(report_b);
  CHECK(slurp(out_a / "traces.jsonl") == slurp(out_b / "traces.jsonl"));
  CHECK(slurp(out_a / "report.json") == slurp(out_b / "report.json"));

  // rescoring the trace file reproduces the run's tallies without a backend
  auto rescored = rescore(out_a / "traces.jsonl", TaskKind::Math, {}, TieRule::LowestSampleIndex);
  CHECK(rescored.task == "rescore");
  CHECK(rescored.n_items == 20);
  CHECK(rescored.n_orderings == 3);
  CHECK(rescored.items_correct == 51);
  CHECK(rescored.items_incorrect == 3);
  CHECK(rescored.items_all_invalid == 6);
  CHECK(rescored.stats.mean == doctest::Approx(0.85).epsilon(1e-12));

  fs::remove_all(out_a);
  fs::remove_all(out_b);
}

TEST_CASE("interrupted runs resume from the trace prefix") {
  auto archive = ReplayArchive::load(fixtures() / "archives" / "gsm20_pal.jsonl");

  auto out_full = fresh_dir("resume_full");
  ReplayBackend full_backend(archive);
  (void)run_experiment(gsm20_config(out_full), full_backend);
  const std::string full = slurp(out_full / "traces.jsonl");

  // simulate a kill after 23 whole lines
  std::size_t cut = 0;
  for (int lines = 0; lines < 23; ++lines) cut = full.find('\n', cut) + 1;
  auto out_resume = fresh_dir("resume_part");
  {
    std::ofstream partial(out_resume / "traces.jsonl", std::ios::binary);
    partial << full.substr(0, cut);
  }

  CountingReplay counting(archive);
  auto report = run_experiment(gsm20_config(out_resume), counting);
  CHECK(report.resumed_items == 23);
  CHECK(counting.calls.load() == 37);
  check_gsm20_report(report);
  CHECK(slurp(out_resume / "traces.jsonl") == full);

  // a finished run resumes to a no-op
  CountingReplay idle(archive);
  auto again = run_experiment(gsm20_config(out_resume), idle);
  CHECK(again.resumed_items == 60);
  CHECK(idle.calls.load() == 0);
  CHECK(slurp(out_resume / "traces.jsonl") == full);

  fs::remove_all(out_full);
  fs::remove_all(out_resume);
}

TEST_CASE("rescore applies the requested tie rule") {
  ItemTrace t;
  t.ordering_seed = 0;
  t.item_index = 0;
  t.item_id = "toy";
  t.gold_display = "4";
  t.style = pal::prompts::PromptStyle::PAL;
  for (int i = 0; i < 2; ++i) {
    SampleTrace s;
    s.sample_index = i;
    s.status = pal::runtime::ExecStatus::Ok;
    s.answer = Answer::number(i == 0 ? 4 : 9);
    s.answer_display = pal::scoring::to_display_string(*s.answer);
    t.samples.push_back(std::move(s));
  }
  auto dir = fresh_dir("tie");
  auto file = dir / "traces.jsonl";
  {
    std::ofstream out(file, std::ios::binary);
    out << to_json_line(t, true) << '\n';
  }

  auto low = rescore(file, TaskKind::Math, {}, TieRule::LowestSampleIndex);
  CHECK(low.items_correct == 1);
  CHECK(low.items_incorrect == 0);
  auto high = rescore(file, TaskKind::Math, {}, TieRule::HighestSampleIndex);
  CHECK(high.items_correct == 0);
  CHECK(high.items_incorrect == 1);

  CHECK_THROWS_AS((void)rescore(dir / "nope.jsonl", TaskKind::Math, {},
                                TieRule::LowestSampleIndex),
                  pal::MissingTraces);
  fs::remove_all(dir);
}

TEST_CASE("least-to-most replay solves kody in two stages") {
  auto archive = ReplayArchive::load(fixtures() / "archives" / "l2m_kody.jsonl");
  ReplayBackend backend(archive);

  RunConfig config;
  config.task = "math_l2m";
  config.task_kind = TaskKind::Math;
  config.dataset_file = fixtures() / "datasets" / "kody.jsonl";
  config.style = pal::prompts::PromptStyle::L2MPALSolve;
  config.ordering_seeds = {0};
  config.prompts_dir = assets() / "prompts";
  config.assets_dir = assets();
  config.workers = 1;
  config.output_dir = fresh_dir("kody");

  auto report = run_l2m(config, backend);
  CHECK(report.n_items == 1);
  CHECK(report.items_correct == 1);

  auto traces = read_trace_file(config.output_dir / "traces.jsonl");
  REQUIRE(traces.size() == 1);
  REQUIRE(traces[0].samples.size() == 2);
  CHECK(traces[0].samples[0].sample_index == 0);
  CHECK(traces[0].samples[0].status == pal::runtime::ExecStatus::Ok);
  CHECK(traces[0].samples[0].completion_text.find("How old was Kody") != std::string::npos);
  CHECK(traces[0].samples[1].sample_index == 1);
  CHECK(traces[0].samples[1].status == pal::runtime::ExecStatus::Ok);
  CHECK(traces[0].chosen_display == "32");
  CHECK(traces[0].correct);
  CHECK(traces[0].valid_samples == 1);

  // the rescore path ignores the reduce record when re-voting
  auto rescored = rescore(config.output_dir / "traces.jsonl", TaskKind::Math, {},
                          TieRule::LowestSampleIndex);
  CHECK(rescored.items_correct == 1);
  CHECK(rescored.items_all_invalid == 0);

  fs::remove_all(config.output_dir);
}

TEST_CASE("degenerate decomposition falls back to the final question") {
  // reduce emits no quoted subquestions; the solve stage must still run,
  // scaffolded on the question's final sentence
  class Scripted : public pal::backend::CompletionBackend {
   public:
    std::vector<Completion> complete(const std::string& prompt,
                                     const DecodeParams&) override {
      Completion c;
      c.sample_index = 0;
      if (prompt.ends_with("we need to know:")) {
        c.text = " nothing that can be listed here.";
      } else {
        c.text = "apples_start = 3\napples_given = 2\nanswer = apples_start + apples_given";
      }
      return {c};
    }
    std::string id() const override { return "scripted"; }
  };

  auto dir = fresh_dir("degenerate");
  auto dataset = dir / "toy.jsonl";
  {
    std::ofstream out(dataset, std::ios::binary);
    out << R"({"id": "apples", "question": "Alice has 3 apples. Bob gives her 2 more apples. How many apples does Alice have now?", "answer": 5})"
        << '\n';
  }

  RunConfig config;
  config.task = "math_l2m";
  config.task_kind = TaskKind::Math;
  config.dataset_file = dataset;
  config.style = pal::prompts::PromptStyle::L2MPALSolve;
  config.ordering_seeds = {0};
  config.prompts_dir = assets() / "prompts";
  config.assets_dir = assets();
  config.workers = 1;
  config.output_dir = dir / "out";
  config.deterministic_traces = true;

  Scripted backend;
  auto report = run_l2m(config, backend);
  CHECK(report.items_correct == 1);

  auto traces = read_trace_file(config.output_dir / "traces.jsonl");
  REQUIRE(traces.size() == 1);
  REQUIRE(traces[0].samples.size() == 2);
  CHECK(traces[0].samples[0].status == pal::runtime::ExecStatus::NoAnswer);
  CHECK(traces[0].samples[1].status == pal::runtime::ExecStatus::Ok);
  CHECK(traces[0].chosen_display == "5");
  CHECK(traces[0].correct);
  fs::remove_all(dir);
}

TEST_CASE("report rendering") {
  RunReport report;
  report.task = "gsm8k";
  report.style = "pal";
  report.n_items = 20;
  report.n_orderings = 3;
  report.stats.solve_rate = 0.85;
  report.stats.mean = 0.85;
  report.stats.stddev = 0.0;
  report.items_correct = 51;
  report.items_incorrect = 3;
  report.items_all_invalid = 6;
  report.status_counts = {{"ok", 54}, {"syntax_error", 3}};
  report.traces_file = "/tmp/traces.jsonl";

  auto text = format_report(report);
  CHECK(text.find("solve rate: 85.0%") != std::string::npos);
  CHECK(text.find("51 correct, 3 incorrect, 6 all-invalid") != std::string::npos);
  CHECK(text.find("ok 54, syntax_error 3") != std::string::npos);

  auto j = nlohmann::json::parse(to_json(report));
  CHECK(j["solve_rate_percent"] == "85.0");
  CHECK(j["sample_statuses"]["ok"] == 54);
  CHECK(j["n_items"] == 20);
}

}  // TEST_SUITE
