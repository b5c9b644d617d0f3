#include "pal/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "pal/answer_extract.hpp"
#include "pal/digest.hpp"
#include "pal/errors.hpp"
#include "pal/extract.hpp"

namespace pal::runner {

using nlohmann::json;
using scoring::Answer;

namespace {

struct Cell {
  std::uint64_t seed = 0;
  std::size_t item = 0;
};

std::vector<Cell> make_cells(const std::vector<std::uint64_t>& seeds, std::size_t n_items) {
  std::vector<Cell> cells;
  cells.reserve(seeds.size() * n_items);
  for (std::uint64_t seed : seeds) {
    for (std::size_t i = 0; i < n_items; ++i) cells.push_back({seed, i});
  }
  return cells;
}

/// Longest prefix of `cells` already present, in order, in an existing trace
/// file. Anything after the first mismatch is discarded: a canonical-order
/// file is only trustworthy up to its first gap.
std::vector<ItemTrace> resumable_prefix(const std::filesystem::path& file,
                                        const std::vector<Cell>& cells) {
  std::error_code ec;
  if (!std::filesystem::exists(file, ec)) return {};
  std::vector<ItemTrace> existing;
  try {
    existing = read_trace_file(file);
  } catch (const Error&) {
    return {};
  }
  std::vector<ItemTrace> prefix;
  for (std::size_t i = 0; i < existing.size() && i < cells.size(); ++i) {
    if (existing[i].ordering_seed != cells[i].seed || existing[i].item_index != cells[i].item) {
      break;
    }
    prefix.push_back(std::move(existing[i]));
  }
  return prefix;
}

struct SampleResult {
  SampleTrace trace;
  std::optional<Answer> candidate;  // normalized by the vote later
};

class ReorderingTraceWriter {
 public:
  ReorderingTraceWriter(const std::filesystem::path& file, std::size_t total,
                        bool deterministic)
      : path_(file), total_(total), deterministic_(deterministic) {
    std::error_code ec;
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
  }

  /// Rewrites the file to exactly `prefix` and marks those cells done.
  void start(const std::vector<ItemTrace>& prefix) {
    out_.open(path_, std::ios::binary | std::ios::trunc);
    if (!out_) throw ConfigError("cannot write traces to " + path_.string());
    for (const auto& t : prefix) {
      out_ << to_json_line(t, deterministic_) << '\n';
      written_.push_back(t);
    }
    out_.flush();
    next_ = prefix.size();
  }

  void deliver(std::size_t pos, ItemTrace trace) {
    std::unique_lock<std::mutex> lock(mu_);
    ready_.emplace(pos, std::move(trace));
    drain(lock);
  }

  void fail(std::exception_ptr e) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!failure_) failure_ = e;
    cv_.notify_all();
  }

  /// Blocks until every cell is written or a worker failed.
  void wait() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return next_ >= total_ || failure_; });
    if (failure_) std::rethrow_exception(failure_);
  }

  const std::vector<ItemTrace>& written() const { return written_; }

 private:
  void drain(std::unique_lock<std::mutex>&) {
    while (true) {
      auto it = ready_.find(next_);
      if (it == ready_.end()) break;
      out_ << to_json_line(it->second, deterministic_) << '\n';
      out_.flush();
      written_.push_back(std::move(it->second));
      ready_.erase(it);
      ++next_;
    }
    if (next_ >= total_) cv_.notify_all();
  }

  std::filesystem::path path_;
  std::size_t total_;
  bool deterministic_;
  std::ofstream out_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::size_t, ItemTrace> ready_;
  std::vector<ItemTrace> written_;
  std::size_t next_ = 0;
  std::exception_ptr failure_;
};

scoring::SolveStats stats_from_traces(const std::vector<ItemTrace>& traces,
                                      const std::vector<std::uint64_t>& seeds,
                                      std::size_t n_items) {
  std::vector<double> rates;
  for (std::uint64_t seed : seeds) {
    std::vector<bool> scores;
    for (const auto& t : traces) {
      if (t.ordering_seed == seed) scores.push_back(t.correct);
    }
    rates.push_back(scoring::solve_rate(scores));
  }
  return scoring::ordering_stats(rates, (int)n_items);
}

/// Runs one pool of workers over the pending cells, delivering traces to the
/// writer in completion order; the writer restores canonical order.
void run_pool(std::size_t first_pending, std::size_t total, int workers,
              ReorderingTraceWriter& writer,
              const std::function<ItemTrace(std::size_t)>& process) {
  std::atomic<std::size_t> next{first_pending};
  std::atomic<bool> abort{false};
  auto work = [&] {
    while (!abort.load()) {
      std::size_t i = next.fetch_add(1);
      if (i >= total) break;
      try {
        writer.deliver(i, process(i));
      } catch (...) {
        abort.store(true);
        writer.fail(std::current_exception());
        break;
      }
    }
  };
  int n = std::max(1, workers);
  std::vector<std::thread> pool;
  pool.reserve((std::size_t)n);
  for (int i = 0; i < n; ++i) pool.emplace_back(work);
  struct Join {
    std::vector<std::thread>& pool;
    ~Join() {
      for (auto& t : pool) {
        if (t.joinable()) t.join();
      }
    }
  } join{pool};
  writer.wait();
}

scoring::AnswerExtractor make_extractor(const std::filesystem::path& assets_dir) {
  const auto patterns = assets_dir / "parsing" / "answer_patterns.json";
  std::error_code ec;
  if (std::filesystem::exists(patterns, ec)) return scoring::AnswerExtractor::load(patterns);
  return scoring::AnswerExtractor::builtin();
}

backend::DecodeParams effective_params(const backend::DecodeParams& base,
                                       const std::vector<std::string>& prompt_stops) {
  backend::DecodeParams params = base;
  if (params.stop_sequences.empty()) params.stop_sequences = prompt_stops;
  params.validate();
  return params;
}

SampleResult process_code_sample(const backend::Completion& completion,
                                 prompts::PromptStyle style,
                                 const prompts::StyleProfile& profile,
                                 const runtime::ProgramExecutor& executor,
                                 const runtime::ExecutionPolicy& policy,
                                 scoring::TaskKind task) {
  SampleResult r;
  r.trace.sample_index = completion.sample_index;
  r.trace.completion_sha = sha256_hex(completion.text);
  r.trace.completion_text = completion.text;
  runtime::ProgramSource source;
  try {
    source = runtime::program_from_completion(completion.text, style, profile);
  } catch (const EmptyProgram&) {
    r.trace.status = runtime::ExecStatus::SyntaxError;
    return r;
  }
  auto outcome = executor.execute(source, policy);
  r.trace.status = outcome.status;
  r.trace.exec_duration = outcome.duration;
  if (outcome.status == runtime::ExecStatus::Ok && outcome.value) {
    r.candidate = scoring::normalize_answer(*outcome.value, task);
    if (r.candidate) {
      r.trace.answer = r.candidate;
      r.trace.answer_display = scoring::to_display_string(*r.candidate);
    } else {
      r.trace.status = runtime::ExecStatus::NoAnswer;
    }
  }
  return r;
}

SampleResult process_text_sample(const backend::Completion& completion,
                                 const scoring::AnswerExtractor& extractor,
                                 scoring::TaskKind task) {
  SampleResult r;
  r.trace.sample_index = completion.sample_index;
  r.trace.completion_sha = sha256_hex(completion.text);
  r.trace.completion_text = completion.text;
  r.candidate = extractor.extract(completion.text, task);
  if (r.candidate) {
    r.trace.status = runtime::ExecStatus::Ok;
    r.trace.answer = r.candidate;
    r.trace.answer_display = scoring::to_display_string(*r.candidate);
  } else {
    r.trace.status = runtime::ExecStatus::NoAnswer;
  }
  return r;
}

void finish_item_trace(ItemTrace& trace, std::vector<SampleResult>& samples,
                       const Answer& gold, const RunConfig& config) {
  std::vector<std::optional<Answer>> candidates;
  for (auto& s : samples) {
    candidates.push_back(s.candidate);
  }
  auto vote = scoring::majority_vote(candidates, config.task_kind, config.tolerance,
                                     config.tie_rule);
  trace.valid_samples = vote.valid_samples;
  trace.chosen = vote.chosen;
  if (vote.chosen) trace.chosen_display = scoring::to_display_string(*vote.chosen);
  trace.correct = vote.chosen && scoring::answers_match(*vote.chosen, gold, config.tolerance);
  for (auto& s : samples) {
    s.trace.correct = s.candidate && scoring::answers_match(*s.candidate, gold,
                                                            config.tolerance);
    trace.samples.push_back(std::move(s.trace));
    trace.total_duration += trace.samples.back().exec_duration;
  }
}

void tally_traces(RunReport& report, const std::vector<ItemTrace>& traces) {
  std::map<std::string, std::size_t> statuses;
  for (const auto& t : traces) {
    for (const auto& s : t.samples) ++statuses[runtime::to_string(s.status)];
    if (t.correct) {
      ++report.items_correct;
    } else if (t.valid_samples > 0) {
      ++report.items_incorrect;
    } else {
      ++report.items_all_invalid;
    }
  }
  report.status_counts.assign(statuses.begin(), statuses.end());
}

RunReport report_from(const RunConfig& config, const std::vector<ItemTrace>& traces,
                      std::size_t n_items, std::size_t resumed,
                      const std::filesystem::path& traces_file) {
  RunReport report;
  report.task = config.task;
  report.style = prompts::to_string(config.style);
  report.n_items = n_items;
  report.n_orderings = (int)config.ordering_seeds.size();
  if (n_items > 0) report.stats = stats_from_traces(traces, config.ordering_seeds, n_items);
  tally_traces(report, traces);
  report.resumed_items = resumed;
  report.traces_file = traces_file;
  return report;
}

void write_report_file(const RunConfig& config, const RunReport& report) {
  std::ofstream out(config.output_dir / "report.json", std::ios::binary | std::ios::trunc);
  if (out) out << to_json(report) << '\n';
}

void check_common_config(const RunConfig& config, std::size_t n_items) {
  if (config.ordering_seeds.empty()) throw ConfigError("no ordering seeds given");
  if (n_items == 0) throw ConfigError("dataset is empty");
  if (config.output_dir.empty()) throw ConfigError("no output directory given");
}

/// limit 0 is an explicit "run nothing": an empty trace file and a zeroed
/// report, with the backend never touched.
std::optional<RunReport> empty_run(const RunConfig& config) {
  if (config.limit != 0) return std::nullopt;
  if (config.output_dir.empty()) throw ConfigError("no output directory given");
  const auto traces_file = config.output_dir / "traces.jsonl";
  ReorderingTraceWriter writer(traces_file, 0, true);
  writer.start({});
  RunReport report = report_from(config, {}, 0, 0, traces_file);
  write_report_file(config, report);
  return report;
}

std::size_t loader_limit(const RunConfig& config) {
  return config.limit == RunConfig::kNoLimit ? 0 : config.limit;  // 0 -> all, for the loader
}

}  // namespace

std::string to_json(const RunReport& report) {
  json j;
  j["task"] = report.task;
  j["style"] = report.style;
  j["n_items"] = report.n_items;
  j["n_orderings"] = report.n_orderings;
  j["rates"] = report.stats.per_ordering_rates;
  j["mean"] = report.stats.mean;
  j["stddev"] = report.stats.stddev;
  j["solve_rate_percent"] = scoring::format_percent(report.stats.solve_rate);
  json statuses = json::object();
  for (const auto& [name, count] : report.status_counts) statuses[name] = count;
  j["sample_statuses"] = statuses;
  j["items_correct"] = report.items_correct;
  j["items_incorrect"] = report.items_incorrect;
  j["items_all_invalid"] = report.items_all_invalid;
  return j.dump(2);
}

std::string format_report(const RunReport& report) {
  std::string out;
  out += "task:       " + report.task + "\n";
  out += "style:      " + report.style + "\n";
  out += "items:      " + std::to_string(report.n_items) + "\n";
  out += "orderings:  " + std::to_string(report.n_orderings) + "\n";
  out += "solve rate: " + scoring::format_percent(report.stats.solve_rate) + "%";
  if (report.n_orderings > 1) {
    out += " (stddev " + scoring::format_percent(report.stats.stddev) + ")";
  }
  out += "\n";
  out += "scored:     " + std::to_string(report.items_correct) + " correct, " +
         std::to_string(report.items_incorrect) + " incorrect, " +
         std::to_string(report.items_all_invalid) + " all-invalid\n";
  if (!report.status_counts.empty()) {
    out += "samples:    ";
    bool first = true;
    for (const auto& [name, count] : report.status_counts) {
      if (!first) out += ", ";
      out += name + " " + std::to_string(count);
      first = false;
    }
    out += "\n";
  }
  if (report.resumed_items > 0) {
    out += "resumed:    " + std::to_string(report.resumed_items) + " items from existing traces\n";
  }
  out += "traces:     " + report.traces_file.string() + "\n";
  return out;
}

RunReport run_experiment(const RunConfig& config, backend::CompletionBackend& backend) {
  if (auto empty = empty_run(config)) return *empty;
  const auto prompt_set = prompts::load_prompt_set(config.prompts_dir / config.task);
  const auto examples = prompt_set.examples_for(config.style);
  const auto profile = prompt_set.profile_for(config.style);
  const auto dataset = data::load_dataset(config.dataset_file, config.dataset_format,
                                          config.task_kind, loader_limit(config));
  check_common_config(config, dataset.size());

  const bool code_style = prompts::is_code_style(config.style);
  std::optional<runtime::ProgramExecutor> executor;
  if (code_style) {
    runtime::ProgramExecutor::Config ec;
    ec.assets_dir = config.assets_dir;
    ec.max_concurrent = config.workers;
    executor.emplace(std::move(ec));
  }
  const auto extractor = make_extractor(config.assets_dir.empty()
                                            ? std::filesystem::path(PAL_DEFAULT_ASSETS_DIR)
                                            : config.assets_dir);

  const auto cells = make_cells(config.ordering_seeds, dataset.size());
  const auto traces_file = config.output_dir / "traces.jsonl";
  const bool deterministic = config.deterministic_traces || backend.id() == "replay";

  auto prefix = resumable_prefix(traces_file, cells);
  const std::size_t resumed = prefix.size();

  ReorderingTraceWriter writer(traces_file, cells.size(), deterministic);
  writer.start(prefix);
  prefix.clear();

  prompts::RenderOptions render_options;
  render_options.anonymize_seed = config.anonymize_seed;

  auto process = [&](std::size_t pos) -> ItemTrace {
    const Cell& cell = cells[pos];
    const auto& item = dataset[cell.item];
    auto assembled = prompts::assemble_prompt(examples, config.style, item.question,
                                              cell.seed, profile, render_options);
    auto params = effective_params(config.decode, assembled.stop_sequences);
    auto completions = backend.complete(assembled.text, params);

    ItemTrace trace;
    trace.ordering_seed = cell.seed;
    trace.item_index = cell.item;
    trace.item_id = item.id;
    trace.question = item.question;
    trace.gold_display = scoring::to_display_string(item.gold);
    trace.prompt_sha = sha256_hex(assembled.text);
    trace.style = config.style;

    std::vector<SampleResult> samples;
    samples.reserve(completions.size());
    for (const auto& completion : completions) {
      if (code_style) {
        samples.push_back(process_code_sample(completion, config.style, profile, *executor,
                                              config.exec_policy, config.task_kind));
      } else {
        samples.push_back(process_text_sample(completion, extractor, config.task_kind));
      }
    }
    finish_item_trace(trace, samples, item.gold, config);
    return trace;
  };

  run_pool(resumed, cells.size(), config.workers, writer, process);

  RunReport report = report_from(config, writer.written(), dataset.size(), resumed, traces_file);
  write_report_file(config, report);
  return report;
}

RunReport run_l2m(const RunConfig& config, backend::CompletionBackend& backend) {
  if (config.style != prompts::PromptStyle::L2MSolve &&
      config.style != prompts::PromptStyle::L2MPALSolve) {
    throw ConfigError("least-to-most runs need a least-to-most solve style");
  }
  if (config.decode.n_samples != 1) {
    throw ConfigError("least-to-most runs are single-sample");
  }
  if (auto empty = empty_run(config)) return *empty;
  const auto prompt_set = prompts::load_prompt_set(config.prompts_dir / config.task);
  const auto reduce_examples = prompt_set.examples_for(prompts::PromptStyle::L2MReduce);
  const auto reduce_profile = prompt_set.profile_for(prompts::PromptStyle::L2MReduce);
  const auto solve_examples = prompt_set.examples_for(config.style);
  const auto solve_profile = prompt_set.profile_for(config.style);
  const auto dataset = data::load_dataset(config.dataset_file, config.dataset_format,
                                          config.task_kind, loader_limit(config));
  check_common_config(config, dataset.size());

  const bool code_style = prompts::is_code_style(config.style);
  std::optional<runtime::ProgramExecutor> executor;
  if (code_style) {
    runtime::ProgramExecutor::Config ec;
    ec.assets_dir = config.assets_dir;
    ec.max_concurrent = config.workers;
    executor.emplace(std::move(ec));
  }
  const auto extractor = make_extractor(config.assets_dir.empty()
                                            ? std::filesystem::path(PAL_DEFAULT_ASSETS_DIR)
                                            : config.assets_dir);

  const auto cells = make_cells(config.ordering_seeds, dataset.size());
  const auto traces_file = config.output_dir / "traces.jsonl";
  const bool deterministic = config.deterministic_traces || backend.id() == "replay";

  auto prefix = resumable_prefix(traces_file, cells);
  const std::size_t resumed = prefix.size();

  ReorderingTraceWriter writer(traces_file, cells.size(), deterministic);
  writer.start(prefix);
  prefix.clear();

  auto process = [&](std::size_t pos) -> ItemTrace {
    const Cell& cell = cells[pos];
    const auto& item = dataset[cell.item];

    ItemTrace trace;
    trace.ordering_seed = cell.seed;
    trace.item_index = cell.item;
    trace.item_id = item.id;
    trace.question = item.question;
    trace.gold_display = scoring::to_display_string(item.gold);
    trace.style = config.style;

    // stage 1: decompose
    auto reduce_prompt = prompts::render_l2m_stage(prompts::L2MStage::Reduce, config.style,
                                                   reduce_examples, item.question, {},
                                                   reduce_profile);
    auto reduce_params = effective_params(config.decode, reduce_prompt.stop_sequences);
    auto reduce_out = backend.complete(reduce_prompt.text, reduce_params);
    trace.prompt_sha = sha256_hex(reduce_prompt.text);

    SampleTrace reduce_trace;
    reduce_trace.sample_index = 0;
    reduce_trace.completion_sha = sha256_hex(reduce_out[0].text);
    reduce_trace.completion_text = reduce_out[0].text;
    reduce_trace.status = runtime::ExecStatus::Ok;

    auto subquestions = prompts::parse_subquestions(reduce_out[0].text);
    if (subquestions.empty()) {
      // degenerate decomposition: flag the reduce record and fall back to a
      // direct solve, scaffolded on the final question alone
      reduce_trace.status = runtime::ExecStatus::NoAnswer;
      subquestions.push_back(prompts::extract_final_question(item.question));
    }
    trace.samples.push_back(std::move(reduce_trace));

    // stage 2: solve with the decomposition scaffold
    std::vector<prompts::SubAnswer> scaffold;
    scaffold.reserve(subquestions.size());
    for (auto& s : subquestions) scaffold.push_back({std::move(s), ""});

    auto solve_prompt = prompts::render_l2m_stage(prompts::L2MStage::Solve, config.style,
                                                  solve_examples, item.question, scaffold,
                                                  solve_profile);
    auto solve_params = effective_params(config.decode, solve_prompt.stop_sequences);
    auto solve_out = backend.complete(solve_prompt.text, solve_params);

    std::vector<SampleResult> samples;
    if (code_style) {
      samples.push_back(process_code_sample(solve_out[0], config.style, solve_profile,
                                            *executor, config.exec_policy, config.task_kind));
    } else {
      samples.push_back(process_text_sample(solve_out[0], extractor, config.task_kind));
    }
    samples.back().trace.sample_index = 1;
    finish_item_trace(trace, samples, item.gold, config);
    return trace;
  };

  run_pool(resumed, cells.size(), config.workers, writer, process);

  RunReport report = report_from(config, writer.written(), dataset.size(), resumed, traces_file);
  write_report_file(config, report);
  return report;
}

RunReport rescore(const std::filesystem::path& traces_file, scoring::TaskKind task_kind,
                  const scoring::MatchTolerance& tolerance, scoring::TieRule tie_rule) {
  std::error_code ec;
  if (!std::filesystem::exists(traces_file, ec)) {
    throw MissingTraces("trace file not found: " + traces_file.string());
  }
  auto traces = read_trace_file(traces_file);
  if (traces.empty()) throw MissingTraces("trace file is empty: " + traces_file.string());

  std::vector<std::uint64_t> seeds;
  std::size_t max_item = 0;
  for (auto& t : traces) {
    if (std::find(seeds.begin(), seeds.end(), t.ordering_seed) == seeds.end()) {
      seeds.push_back(t.ordering_seed);
    }
    max_item = std::max(max_item, t.item_index);

    auto gold = scoring::normalize_answer(t.gold_display, task_kind);
    const bool l2m = t.style == prompts::PromptStyle::L2MSolve ||
                     t.style == prompts::PromptStyle::L2MPALSolve;
    std::vector<std::optional<Answer>> candidates;
    for (std::size_t k = 0; k < t.samples.size(); ++k) {
      // a least-to-most trace leads with the reduce record, which never votes
      if (l2m && k == 0) continue;
      candidates.push_back(t.samples[k].answer);
    }
    auto vote = scoring::majority_vote(candidates, task_kind, tolerance, tie_rule);
    t.chosen = vote.chosen;
    t.chosen_display = vote.chosen ? scoring::to_display_string(*vote.chosen) : "";
    t.valid_samples = vote.valid_samples;
    t.correct = gold && vote.chosen && scoring::answers_match(*vote.chosen, *gold, tolerance);
  }

  RunReport report;
  report.task = "rescore";
  report.style = traces.empty() ? "" : prompts::to_string(traces.front().style);
  report.n_items = max_item + 1;
  report.n_orderings = (int)seeds.size();
  report.stats = stats_from_traces(traces, seeds, max_item + 1);
  tally_traces(report, traces);
  report.traces_file = traces_file;
  return report;
}

}  // namespace pal::runner
