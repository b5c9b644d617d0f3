#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "pal/errors.hpp"
#include "pal/forge.hpp"

using namespace pal::forge;
using pal::scoring::Answer;
namespace fs = std::filesystem;

namespace {

const pal::runtime::ProgramExecutor& executor() {
  static pal::runtime::ProgramExecutor exec([] {
    pal::runtime::ProgramExecutor::Config cfg;
    cfg.assets_dir = PAL_ASSETS_DIR;
    return cfg;
  }());
  return exec;
}

const std::string kOlivia =
    "money_initial = 23\n"
    "bagels = 5\n"
    "bagel_cost = 3\n"
    "money_spent = bagels * bagel_cost\n"
    "money_left = money_initial - money_spent\n"
    "answer = money_left\n";

}  // namespace

TEST_SUITE("forge") {

TEST_CASE("numeric tokens are found with offsets and values") {
  auto tokens = find_numeric_tokens(
      "Olivia has $23. She bought five bagels for $3 each, walking 2,000 meters.");
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[0].text == "23");
  CHECK(tokens[0].value == 23);
  CHECK(tokens[0].offset == 12);
  CHECK(tokens[1].value == 3);
  CHECK(tokens[2].text == "2,000");
  CHECK(tokens[2].value == 2000);
  CHECK(find_numeric_tokens("five toys and two more").empty());
}

TEST_CASE("substitution is deterministic and in range") {
  ForgeConfig cfg;
  cfg.min_value = 10;
  cfg.max_value = 9'999'999;
  const std::string q = "Michael had 58 golf balls and lost 23.";

  std::mt19937_64 a(7), b(7);
  auto ra = substitute_number(q, a, cfg);
  auto rb = substitute_number(q, b, cfg);
  CHECK(ra.question == rb.question);
  REQUIRE(ra.substitutions.size() == 1);
  const auto& sub = ra.substitutions[0];
  CHECK(sub.new_value >= 10);
  CHECK(sub.new_value <= 9'999'999);
  CHECK(sub.new_value != sub.original_value);
  CHECK(ra.question != q);

  std::mt19937_64 c(7);
  ForgeConfig paired = cfg;
  paired.mode = SubstitutionMode::Paired;
  auto rp = substitute_number(q, c, paired);
  CHECK(rp.substitutions.size() == 2);
  CHECK(rp.substitutions[0].token_index != rp.substitutions[1].token_index);

  std::mt19937_64 d(7);
  CHECK_THROWS_AS(substitute_number("no digits at all", d, cfg), pal::NoNumberFound);
}

TEST_CASE("recomputation replaces every equal literal") {
  std::vector<Substitution> subs = {{0, 23, 15678}};
  auto answer = recompute_answer(kOlivia, subs, Answer::number(8), executor(), {});
  CHECK(answer == Answer::number(15663));
}

TEST_CASE("the trust gate rejects programs that miss the gold answer") {
  CHECK(passes_trust_gate(kOlivia, Answer::number(8), executor(), {}));
  CHECK_FALSE(passes_trust_gate(kOlivia, Answer::number(9), executor(), {}));
  CHECK_THROWS_AS(
      recompute_answer(kOlivia, {{0, 23, 100}}, Answer::number(9), executor(), {}),
      pal::TrustGateFailure);
}

TEST_CASE("substitutions that match no literal are refused") {
  CHECK_THROWS_AS(
      recompute_answer(kOlivia, {{0, 99, 100}}, Answer::number(8), executor(), {}),
      pal::AmbiguousLiteral);
}

TEST_CASE("literals inside strings and comments stay put") {
  const std::string program =
      "# started with 23 dollars\n"
      "note = 'spent 23'\n"
      "answer = 23 - 15\n";
  auto answer = recompute_answer(program, {{0, 23, 100}}, Answer::number(8), executor(), {});
  CHECK(answer == Answer::number(85));
}

TEST_CASE("printed-value programs pass the gate too") {
  const std::string program = "total = 48 + 36\nprint(total - 59)\n";
  CHECK(passes_trust_gate(program, Answer::number(25), executor(), {}));
  auto answer = recompute_answer(program, {{0, 59, 9}}, Answer::number(25), executor(), {});
  CHECK(answer == Answer::number(75));
}

TEST_CASE("items without numbers or programs land in the manual queue") {
  ForgeConfig cfg;
  pal::data::DatasetRecord wordy{"wordy", "Shawn has five toys and got two more.",
                                 Answer::number(7), "7"};
  std::mt19937_64 rng(1);
  auto rec = forge_item(wordy, kOlivia, rng, cfg, executor());
  CHECK(rec.provenance == Provenance::ManualPending);
  CHECK_FALSE(rec.answer.has_value());
  CHECK(rec.note == "no numeric token to substitute");

  pal::data::DatasetRecord numbered{"n", "A rope is 96 meters, cut into 8 pieces.",
                                    Answer::number(12), "12"};
  std::mt19937_64 rng2(1);
  auto no_program = forge_item(numbered, "", rng2, cfg, executor());
  CHECK(no_program.provenance == Provenance::ManualPending);
  CHECK(no_program.note == "no trusted program available");
}

TEST_CASE("the sampler is a fallback behind the trust gate") {
  ForgeConfig cfg;
  pal::data::DatasetRecord item{"rope", "A rope is 96 meters long, cut into 8 pieces.",
                                Answer::number(12), "12"};
  int asked_for = 0;
  auto sampler = [&](const pal::data::DatasetRecord&, int n) {
    asked_for = n;
    return std::vector<std::string>{
        "answer = 96 / 8 + 1\n",   // fails the gate
        "answer = 96 / 8\n",       // passes
    };
  };
  std::mt19937_64 rng(5);
  auto rec = forge_item(item, "", rng, cfg, executor(), sampler);
  CHECK(asked_for == cfg.fallback_samples);
  CHECK(rec.provenance == Provenance::SampledProgram);
  REQUIRE(rec.answer.has_value());
  CHECK(rec.program == "answer = 96 / 8\n");
}

TEST_CASE("dataset forging seeds each item independently") {
  ForgeConfig cfg;
  cfg.seed = 11;
  std::vector<pal::data::DatasetRecord> items = {
      {"a", "Nora saves $7 each week for 9 weeks.", Answer::number(63), "63"},
      {"b", "A tank holds 240 liters filled at 15 per minute.", Answer::number(16), "16"},
  };
  std::vector<std::string> programs = {"answer = 7 * 9\n", "answer = 240 / 15\n"};
  auto records = forge_dataset(items, programs, cfg, executor());
  REQUIRE(records.size() == 2);

  // item 1 alone, same seed: identical record
  std::mt19937_64 rng(cfg.seed ^ (0x9E3779B97F4A7C15ull * 2));
  auto alone = forge_item(items[1], programs[1], rng, cfg, executor());
  CHECK(alone.question == records[1].question);
  REQUIRE(alone.answer.has_value());
  REQUIRE(records[1].answer.has_value());
  CHECK(*alone.answer == *records[1].answer);
  CHECK(records[0].provenance == Provenance::ProgramRecomputed);
}

TEST_CASE("forge records round trip as json lines") {
  HardRecord rec;
  rec.id = "x";
  rec.question = "What is 100 + 1?";
  rec.original_question = "What is 2 + 1?";
  rec.substitutions = {{0, 2, 100}};
  rec.answer = Answer::number(101);
  rec.provenance = Provenance::ProgramRecomputed;
  rec.program = "answer = 100 + 1\n";

  auto back = hard_record_from_json_line(to_json_line(rec));
  CHECK(back.id == rec.id);
  CHECK(back.question == rec.question);
  CHECK(back.substitutions.size() == 1);
  CHECK(back.substitutions[0].new_value == 100);
  CHECK(back.answer == rec.answer);
  CHECK(back.provenance == rec.provenance);

  HardRecord pending;
  pending.id = "y";
  pending.question = "color?";
  pending.provenance = Provenance::ManualPending;
  pending.note = "no trusted program available";
  auto line = to_json_line(pending);
  CHECK(line.find("\"answer\":null") != std::string::npos);
  auto parsed = hard_record_from_json_line(line);
  CHECK_FALSE(parsed.answer.has_value());
  CHECK(parsed.note == pending.note);

  CHECK_THROWS_AS(hard_record_from_json_line("{broken"), pal::FormatError);
}

TEST_CASE("the bundled forge inputs produce the expected mix") {
  auto datasets = fs::path(PAL_FIXTURES_DIR) / "datasets";
  auto items = pal::data::load_dataset(datasets / "forge10.jsonl",
                                       pal::data::DatasetFormat::NativeJsonl,
                                       pal::scoring::TaskKind::Math, 0);
  REQUIRE(items.size() == 10);

  nlohmann::json programs_by_id;
  {
    std::ifstream in(datasets / "forge10_programs.json");
    REQUIRE(in);
    in >> programs_by_id;
  }
  std::vector<std::string> programs;
  for (const auto& item : items) {
    programs.push_back(programs_by_id.value(item.id, ""));
  }

  ForgeConfig cfg;
  cfg.seed = 2024;
  auto records = forge_dataset(items, programs, cfg, executor());
  REQUIRE(records.size() == 10);

  std::size_t recomputed = 0, pending = 0;
  for (const auto& rec : records) {
    if (rec.provenance == Provenance::ProgramRecomputed) {
      ++recomputed;
      CHECK(rec.answer.has_value());
      CHECK(rec.question != rec.original_question);
    } else {
      ++pending;
      CHECK_FALSE(rec.answer.has_value());
      CHECK_FALSE(rec.note.empty());
    }
  }
  CHECK(recomputed == 8);
  CHECK(pending == 2);  // the gate breaker and the digit-free question
}

}
