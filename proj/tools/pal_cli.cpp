// Command-line front end for the program-aided solving harness.
//
//   pal run     --dataset d.jsonl --backend replay --archive runs.jsonl -o out/
//   pal record  --dataset d.jsonl --archive new.jsonl -o out/
//   pal rescore --traces out/traces.jsonl --task-kind math
//   pal forge   --dataset d.jsonl --programs progs.json -o forged/
//   pal report  --traces out/traces.jsonl
//
// Every flag can also be given in a JSON config file (--config); values from
// the file win over flags, so a checked-in experiment config is authoritative
// no matter what the command line says. API keys come from the environment
// (--api-key-env names the variable), never from flags or config files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pal/backend.hpp"
#include "pal/dataset.hpp"
#include "pal/errors.hpp"
#include "pal/forge.hpp"
#include "pal/orchestrator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

#ifndef PAL_DEFAULT_ASSETS_DIR
#define PAL_DEFAULT_ASSETS_DIR "assets"
#endif

struct RunArgs {
  std::string task = "gsm8k";
  std::string task_kind = "math";
  std::string dataset;
  std::string format;  // empty -> detect from filename
  long long limit = -1;
  std::string style = "pal";
  std::vector<std::uint64_t> seeds = {0};
  std::uint64_t anonymize_seed = 0;
  double temperature = 0.0;
  double top_p = 1.0;
  int samples = 1;
  int max_tokens = 512;
  std::string prompts_dir = std::string(PAL_DEFAULT_ASSETS_DIR) + "/prompts";
  std::string assets_dir = PAL_DEFAULT_ASSETS_DIR;
  int workers = 4;
  std::string output = "out";
  bool deterministic = false;
  std::string tie_rule = "lowest";
  double abs_tol = 1e-6;
  double rel_tol = 1e-6;
  double timeout_s = 10.0;
  long long memory_mb = 256;
  std::string backend = "replay";  // replay | http
  std::string archive;             // replay source, or record sink
  std::string base_url = "http://localhost:8000";
  std::string model = "code-davinci-002";
  std::string api_key_env = "PAL_API_KEY";
  bool no_api_key = false;
  std::string config_file;
};

void add_run_flags(CLI::App* cmd, RunArgs& a, bool recording) {
  cmd->add_option("--task", a.task, "prompt-set directory name");
  cmd->add_option("--task-kind", a.task_kind,
                  "answer domain: math, colored_objects, penguins, date, "
                  "object_counting, repeat_copy");
  cmd->add_option("--dataset", a.dataset, "dataset file")->required();
  cmd->add_option("--format", a.format, "dataset format (default: detect from name)");
  cmd->add_option("--limit", a.limit, "item cap; 0 runs nothing, -1 runs everything");
  cmd->add_option("--style", a.style, "prompt style (pal, cot, direct, ...)");
  cmd->add_option("--seeds", a.seeds, "ordering seeds, one run per seed");
  cmd->add_option("--anonymize-seed", a.anonymize_seed, "name-pool seed for the -var styles");
  cmd->add_option("--temperature", a.temperature, "sampling temperature");
  cmd->add_option("--top-p", a.top_p, "nucleus mass");
  cmd->add_option("--samples", a.samples, "samples per item (majority vote when >1)");
  cmd->add_option("--max-tokens", a.max_tokens, "completion length cap");
  cmd->add_option("--prompts-dir", a.prompts_dir, "prompt asset root");
  cmd->add_option("--assets-dir", a.assets_dir, "runtime asset root");
  cmd->add_option("--workers", a.workers, "parallel items");
  cmd->add_option("-o,--output", a.output, "output directory for traces + report");
  cmd->add_flag("--deterministic", a.deterministic, "zero durations in traces");
  cmd->add_option("--tie-rule", a.tie_rule, "vote tie break: lowest or highest");
  cmd->add_option("--abs-tol", a.abs_tol, "absolute numeric tolerance");
  cmd->add_option("--rel-tol", a.rel_tol, "relative numeric tolerance");
  cmd->add_option("--timeout", a.timeout_s, "per-program wall timeout, seconds");
  cmd->add_option("--memory-mb", a.memory_mb, "per-program address-space cap");
  if (recording) {
    a.backend = "http";
    cmd->add_option("--archive", a.archive, "archive file to append completions to")
        ->required();
  } else {
    cmd->add_option("--backend", a.backend, "completion source: replay or http");
    cmd->add_option("--archive", a.archive, "replay archive (backend=replay)");
  }
  cmd->add_option("--base-url", a.base_url, "http backend base url");
  cmd->add_option("--model", a.model, "http backend model name");
  cmd->add_option("--api-key-env", a.api_key_env, "env var holding the api key");
  cmd->add_flag("--no-api-key", a.no_api_key, "talk to backends that need no key");
  cmd->add_option("--config", a.config_file, "JSON config; overrides flags");
}

// The config file is authoritative: any key present replaces the flag value.
void apply_config(RunArgs& a) {
  if (a.config_file.empty()) return;
  std::ifstream in(a.config_file);
  if (!in) throw pal::ConfigError("cannot open config " + a.config_file);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw pal::ConfigError(a.config_file + ": " + e.what());
  }
  auto str = [&](const char* k, std::string& out) { if (j.contains(k)) out = j.at(k).get<std::string>(); };
  str("task", a.task);
  str("task_kind", a.task_kind);
  str("dataset", a.dataset);
  str("format", a.format);
  if (j.contains("limit")) a.limit = j.at("limit").get<long long>();
  str("style", a.style);
  if (j.contains("seeds")) a.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("anonymize_seed")) a.anonymize_seed = j.at("anonymize_seed").get<std::uint64_t>();
  if (j.contains("temperature")) a.temperature = j.at("temperature").get<double>();
  if (j.contains("top_p")) a.top_p = j.at("top_p").get<double>();
  if (j.contains("samples")) a.samples = j.at("samples").get<int>();
  if (j.contains("max_tokens")) a.max_tokens = j.at("max_tokens").get<int>();
  str("prompts_dir", a.prompts_dir);
  str("assets_dir", a.assets_dir);
  if (j.contains("workers")) a.workers = j.at("workers").get<int>();
  str("output", a.output);
  if (j.contains("deterministic")) a.deterministic = j.at("deterministic").get<bool>();
  str("tie_rule", a.tie_rule);
  if (j.contains("abs_tol")) a.abs_tol = j.at("abs_tol").get<double>();
  if (j.contains("rel_tol")) a.rel_tol = j.at("rel_tol").get<double>();
  if (j.contains("timeout_s")) a.timeout_s = j.at("timeout_s").get<double>();
  if (j.contains("memory_mb")) a.memory_mb = j.at("memory_mb").get<long long>();
  str("backend", a.backend);
  str("archive", a.archive);
  str("base_url", a.base_url);
  str("model", a.model);
  str("api_key_env", a.api_key_env);
  if (j.contains("no_api_key")) a.no_api_key = j.at("no_api_key").get<bool>();
}

pal::scoring::TaskKind parse_task_kind(const std::string& name) {
  auto k = pal::scoring::task_kind_from_string(name);
  if (!k) throw pal::ConfigError("unknown task kind '" + name + "'");
  return *k;
}

pal::scoring::TieRule parse_tie_rule(const std::string& name) {
  if (name == "lowest") return pal::scoring::TieRule::LowestSampleIndex;
  if (name == "highest") return pal::scoring::TieRule::HighestSampleIndex;
  throw pal::ConfigError("tie rule must be 'lowest' or 'highest', got '" + name + "'");
}

pal::runner::RunConfig to_run_config(const RunArgs& a) {
  pal::runner::RunConfig cfg;
  cfg.task = a.task;
  cfg.task_kind = parse_task_kind(a.task_kind);
  cfg.dataset_file = a.dataset;
  if (a.format.empty()) {
    cfg.dataset_format = pal::data::detect_format(cfg.dataset_file);
  } else {
    auto f = pal::data::dataset_format_from_string(a.format);
    if (!f) throw pal::ConfigError("unknown dataset format '" + a.format + "'");
    cfg.dataset_format = *f;
  }
  cfg.limit = a.limit < 0 ? pal::runner::RunConfig::kNoLimit : (std::size_t)a.limit;
  auto style = pal::prompts::style_from_string(a.style);
  if (!style) throw pal::ConfigError("unknown prompt style '" + a.style + "'");
  cfg.style = *style;
  cfg.ordering_seeds = a.seeds;
  cfg.anonymize_seed = a.anonymize_seed;
  cfg.decode.temperature = a.temperature;
  cfg.decode.top_p = a.top_p;
  cfg.decode.n_samples = a.samples;
  cfg.decode.max_tokens = a.max_tokens;
  cfg.prompts_dir = a.prompts_dir;
  cfg.assets_dir = a.assets_dir;
  cfg.workers = a.workers;
  cfg.output_dir = a.output;
  cfg.deterministic_traces = a.deterministic;
  cfg.tolerance = {a.abs_tol, a.rel_tol};
  cfg.tie_rule = parse_tie_rule(a.tie_rule);
  cfg.exec_policy.wall_timeout =
      std::chrono::milliseconds((long long)(a.timeout_s * 1000.0));
  cfg.exec_policy.memory_cap_bytes = (std::uint64_t)a.memory_mb * 1024 * 1024;
  return cfg;
}

std::unique_ptr<pal::backend::CompletionBackend> make_backend(const RunArgs& a) {
  if (a.backend == "replay") {
    if (a.archive.empty()) {
      throw pal::ConfigError("backend=replay needs --archive");
    }
    return std::make_unique<pal::backend::ReplayBackend>(
        pal::backend::ReplayArchive::load(a.archive));
  }
  if (a.backend == "http") {
    pal::backend::HttpBackendConfig http;
    http.base_url = a.base_url;
    http.model = a.model;
    http.api_key_env = a.api_key_env;
    http.require_api_key = !a.no_api_key;
    return std::make_unique<pal::backend::HttpBackend>(http);
  }
  throw pal::ConfigError("unknown backend '" + a.backend + "'");
}

bool is_l2m(pal::prompts::PromptStyle s) {
  return s == pal::prompts::PromptStyle::L2MSolve ||
         s == pal::prompts::PromptStyle::L2MPALSolve;
}

int do_run(const RunArgs& args, bool record) {
  auto cfg = to_run_config(args);
  std::shared_ptr<pal::backend::CompletionBackend> backend = make_backend(args);
  if (record) {
    auto writer = std::make_shared<pal::backend::ArchiveWriter>(args.archive);
    backend = std::make_shared<pal::backend::RecordingBackend>(backend, writer);
  }
  auto report = is_l2m(cfg.style) ? pal::runner::run_l2m(cfg, *backend)
                                  : pal::runner::run_experiment(cfg, *backend);
  std::printf("%s\n", pal::runner::format_report(report).c_str());
  return 0;  // a completed run is success whatever the solve rate
}

int do_rescore(const std::string& traces, const std::string& kind, double abs_tol,
               double rel_tol, const std::string& tie, const std::string& output) {
  auto report = pal::runner::rescore(traces, parse_task_kind(kind), {abs_tol, rel_tol},
                                     parse_tie_rule(tie));
  std::printf("%s\n", pal::runner::format_report(report).c_str());
  if (!output.empty()) {
    fs::create_directories(fs::path(output).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(output).parent_path());
    std::ofstream out(output, std::ios::binary | std::ios::trunc);
    if (!out) throw pal::ConfigError("cannot write " + output);
    out << pal::runner::to_json(report) << '\n';
  }
  return 0;
}

int do_forge(const std::string& dataset, const std::string& programs_file,
             std::uint64_t seed, long long min_value, long long max_value,
             const std::string& mode, bool strict, const std::string& assets_dir,
             const std::string& output) {
  auto items = pal::data::load_dataset(dataset, pal::scoring::TaskKind::Math, 0);

  json programs_by_id;
  if (!programs_file.empty()) {
    std::ifstream in(programs_file);
    if (!in) throw pal::ConfigError("cannot open programs " + programs_file);
    in >> programs_by_id;
  }
  std::vector<std::string> programs;
  for (const auto& item : items) {
    programs.push_back(programs_by_id.value(item.id, ""));
  }

  pal::forge::ForgeConfig cfg;
  cfg.seed = seed;
  cfg.min_value = min_value;
  cfg.max_value = max_value;
  if (mode == "single") {
    cfg.mode = pal::forge::SubstitutionMode::Single;
  } else if (mode == "paired") {
    cfg.mode = pal::forge::SubstitutionMode::Paired;
  } else {
    throw pal::ConfigError("mode must be 'single' or 'paired', got '" + mode + "'");
  }
  cfg.strict_literals = strict;

  pal::runtime::ProgramExecutor::Config exec_cfg;
  exec_cfg.assets_dir = assets_dir;
  pal::runtime::ProgramExecutor executor(exec_cfg);

  auto records = pal::forge::forge_dataset(items, programs, cfg, executor);

  fs::create_directories(output);
  std::ofstream hard(fs::path(output) / "hard.jsonl", std::ios::binary | std::ios::trunc);
  std::ofstream queue(fs::path(output) / "manual_queue.jsonl",
                      std::ios::binary | std::ios::trunc);
  std::size_t pending = 0;
  for (const auto& rec : records) {
    hard << pal::forge::to_json_line(rec) << '\n';
    if (rec.provenance == pal::forge::Provenance::ManualPending) {
      queue << pal::forge::to_json_line(rec) << '\n';
      ++pending;
    }
  }
  std::printf("forged %zu items, %zu queued for manual review -> %s\n", records.size(),
              pending, output.c_str());
  return 0;
}

int do_report(const std::string& traces, const std::string& kind) {
  auto report = pal::runner::rescore(traces, parse_task_kind(kind), {},
                                     pal::scoring::TieRule::LowestSampleIndex);
  std::printf("%s\n", pal::runner::format_report(report).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"program-aided solving harness"};
  app.require_subcommand(1);

  RunArgs run_args;
  RunArgs record_args;
  auto* run_cmd = app.add_subcommand("run", "solve a dataset against a backend");
  add_run_flags(run_cmd, run_args, false);
  auto* record_cmd =
      app.add_subcommand("record", "run against http and archive every completion");
  add_run_flags(record_cmd, record_args, true);

  std::string traces, rescore_kind = "math", tie = "lowest", rescore_out;
  double abs_tol = 1e-6, rel_tol = 1e-6;
  auto* rescore_cmd = app.add_subcommand("rescore", "re-score an existing trace file");
  rescore_cmd->add_option("--traces", traces, "trace file from a run")->required();
  rescore_cmd->add_option("--task-kind", rescore_kind, "answer domain");
  rescore_cmd->add_option("--abs-tol", abs_tol, "absolute numeric tolerance");
  rescore_cmd->add_option("--rel-tol", rel_tol, "relative numeric tolerance");
  rescore_cmd->add_option("--tie-rule", tie, "vote tie break: lowest or highest");
  rescore_cmd->add_option("-o,--output", rescore_out, "write the report JSON here");

  std::string forge_dataset, forge_programs, forge_mode = "single";
  std::string forge_assets = PAL_DEFAULT_ASSETS_DIR, forge_out = "forged";
  std::uint64_t forge_seed = 0;
  long long forge_min = 10, forge_max = 9'999'999;
  bool forge_strict = false;
  auto* forge_cmd = app.add_subcommand("forge", "make numerically harder variants");
  forge_cmd->add_option("--dataset", forge_dataset, "source items")->required();
  forge_cmd->add_option("--programs", forge_programs,
                        "JSON map of item id -> trusted solution program");
  forge_cmd->add_option("--seed", forge_seed, "substitution seed");
  forge_cmd->add_option("--min", forge_min, "smallest substituted value");
  forge_cmd->add_option("--max", forge_max, "largest substituted value");
  forge_cmd->add_option("--mode", forge_mode, "single or paired");
  forge_cmd->add_flag("--strict-literals", forge_strict,
                      "refuse items whose program repeats a replaced value");
  forge_cmd->add_option("--assets-dir", forge_assets, "runtime asset root");
  forge_cmd->add_option("-o,--output", forge_out, "output directory");

  std::string report_traces, report_kind = "math";
  auto* report_cmd = app.add_subcommand("report", "summarize an existing trace file");
  report_cmd->add_option("--traces", report_traces, "trace file from a run")->required();
  report_cmd->add_option("--task-kind", report_kind, "answer domain");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      apply_config(run_args);
      return do_run(run_args, false);
    }
    if (record_cmd->parsed()) {
      apply_config(record_args);
      return do_run(record_args, true);
    }
    if (rescore_cmd->parsed()) {
      return do_rescore(traces, rescore_kind, abs_tol, rel_tol, tie, rescore_out);
    }
    if (forge_cmd->parsed()) {
      return do_forge(forge_dataset, forge_programs, forge_seed, forge_min, forge_max,
                      forge_mode, forge_strict, forge_assets, forge_out);
    }
    if (report_cmd->parsed()) {
      return do_report(report_traces, report_kind);
    }
  } catch (const pal::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
