// Regenerates the replay archives under tests/fixtures/archives/ by driving
// the real run pipeline with a scripted stand-in for a live model, recording
// every completion, then replaying the archive to prove it is self-contained.
//
//   gen_fixtures [repo_root]
//
// Run from the repo root (or pass it) after changing prompt assets, the
// bundled datasets, or anything that shifts prompt bytes; commit the result.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pal/backend.hpp"
#include "pal/dataset.hpp"
#include "pal/errors.hpp"
#include "pal/orchestrator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Plays the model: resolves a prompt to a canned completion by suffix.
class ScriptedBackend : public pal::backend::CompletionBackend {
 public:
  void add(std::string suffix, std::string text) {
    scripts_.push_back({std::move(suffix), std::move(text)});
  }

  std::vector<pal::backend::Completion> complete(
      const std::string& prompt, const pal::backend::DecodeParams& params) override {
    params.validate();
    const std::string* text = nullptr;
    for (const auto& [suffix, body] : scripts_) {
      if (prompt.size() >= suffix.size() &&
          prompt.compare(prompt.size() - suffix.size(), suffix.size(), suffix) == 0) {
        text = &body;
        break;
      }
    }
    if (!text) {
      throw pal::ConfigError("scripted backend has no completion for prompt tail: ..." +
                             prompt.substr(prompt.size() > 160 ? prompt.size() - 160 : 0));
    }
    std::vector<pal::backend::Completion> out;
    for (int i = 0; i < params.n_samples; ++i) {
      out.push_back({*text, pal::backend::FinishReason::Stop, i, id()});
    }
    return out;
  }

  std::string id() const override { return "scripted"; }

 private:
  std::vector<std::pair<std::string, std::string>> scripts_;
};

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw pal::ConfigError("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_bytes(const fs::path& a, const fs::path& b) { return slurp(a) == slurp(b); }

pal::runner::RunConfig base_config(const fs::path& root, const fs::path& out_dir) {
  pal::runner::RunConfig cfg;
  cfg.prompts_dir = root / "assets" / "prompts";
  cfg.assets_dir = root / "assets";
  cfg.output_dir = out_dir;
  cfg.deterministic_traces = true;
  cfg.workers = 4;
  return cfg;
}

int check(bool ok, const std::string& what) {
  std::printf("%s %s\n", ok ? "ok  " : "FAIL", what.c_str());
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::current_path();
  const fs::path fixtures = root / "tests" / "fixtures";
  const fs::path archives = fixtures / "archives";
  const fs::path scratch = fs::temp_directory_path() / "pal_gen_fixtures";
  fs::remove_all(scratch);
  fs::create_directories(archives);

  int failures = 0;
  try {
    // --- gsm20 greedy PAL, three orderings ---
    const fs::path gsm_archive = archives / "gsm20_pal.jsonl";
    fs::remove(gsm_archive);

    auto items = pal::data::load_dataset(fixtures / "datasets" / "gsm20.jsonl",
                                         pal::data::DatasetFormat::NativeJsonl,
                                         pal::scoring::TaskKind::Math, 0);
    const json completions = json::parse(slurp(fixtures / "datasets" / "gsm20_completions.json"));

    auto scripted = std::make_shared<ScriptedBackend>();
    for (const auto& item : items) {
      scripted->add("#Q: " + item.question + "\n",
                    completions.at(item.id).get<std::string>());
    }
    auto writer = std::make_shared<pal::backend::ArchiveWriter>(gsm_archive);
    pal::backend::RecordingBackend recorder(scripted, writer);

    auto cfg = base_config(root, scratch / "gsm20_record");
    cfg.task = "gsm8k";
    cfg.task_kind = pal::scoring::TaskKind::Math;
    cfg.dataset_file = fixtures / "datasets" / "gsm20.jsonl";
    cfg.style = pal::prompts::PromptStyle::PAL;
    cfg.ordering_seeds = {0, 1, 2};

    auto report = pal::runner::run_experiment(cfg, recorder);
    std::printf("%s\n", pal::runner::format_report(report).c_str());
    failures += check(report.n_items == 20, "gsm20 record covers 20 items");

    // replay the archive into a second directory; byte-identical output
    // proves the archive carries every completion the run needs
    pal::backend::ReplayBackend replayer(pal::backend::ReplayArchive::load(gsm_archive));
    auto cfg2 = cfg;
    cfg2.output_dir = scratch / "gsm20_replay";
    pal::runner::run_experiment(cfg2, replayer);
    failures += check(same_bytes(cfg.output_dir / "traces.jsonl", cfg2.output_dir / "traces.jsonl"),
                      "gsm20 replay traces match recording");
    failures += check(same_bytes(cfg.output_dir / "report.json", cfg2.output_dir / "report.json"),
                      "gsm20 replay report matches recording");

    // --- kody least-to-most, PAL solve ---
    const fs::path l2m_archive = archives / "l2m_kody.jsonl";
    fs::remove(l2m_archive);

    const json l2m = json::parse(slurp(fixtures / "datasets" / "kody_completions.json"));
    auto l2m_scripted = std::make_shared<ScriptedBackend>();
    l2m_scripted->add("\", we need to know:", l2m.at("reduce").get<std::string>());
    l2m_scripted->add("# How old is Mohamed?\n", l2m.at("solve").get<std::string>());
    auto l2m_writer = std::make_shared<pal::backend::ArchiveWriter>(l2m_archive);
    pal::backend::RecordingBackend l2m_recorder(l2m_scripted, l2m_writer);

    auto kody = base_config(root, scratch / "kody_record");
    kody.task = "math_l2m";
    kody.task_kind = pal::scoring::TaskKind::Math;
    kody.dataset_file = fixtures / "datasets" / "kody.jsonl";
    kody.style = pal::prompts::PromptStyle::L2MPALSolve;
    kody.ordering_seeds = {0};

    auto kody_report = pal::runner::run_l2m(kody, l2m_recorder);
    std::printf("%s\n", pal::runner::format_report(kody_report).c_str());
    failures += check(kody_report.items_correct == 1, "kody least-to-most scores correct");

    pal::backend::ReplayBackend l2m_replay(pal::backend::ReplayArchive::load(l2m_archive));
    auto kody2 = kody;
    kody2.output_dir = scratch / "kody_replay";
    pal::runner::run_l2m(kody2, l2m_replay);
    failures += check(same_bytes(kody.output_dir / "traces.jsonl", kody2.output_dir / "traces.jsonl"),
                      "kody replay traces match recording");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gen_fixtures: %s\n", e.what());
    return 1;
  }

  if (failures == 0) {
    std::printf("archives written under %s\n", archives.string().c_str());
  }
  return failures == 0 ? 0 : 1;
}
