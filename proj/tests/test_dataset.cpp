#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pal/dataset.hpp"
#include "pal/errors.hpp"

using namespace pal::data;
using pal::scoring::Answer;
using pal::scoring::TaskKind;
namespace fs = std::filesystem;

namespace {

const fs::path kDatasets = fs::path(PAL_FIXTURES_DIR) / "datasets";

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("formats are detected from filenames") {
  CHECK(detect_format("gsm8k_test.jsonl") == DatasetFormat::Gsm8k);
  CHECK(detect_format("SVAMP.json") == DatasetFormat::Svamp);
  CHECK(detect_format("mawps_addsub.json") == DatasetFormat::Mawps);
  CHECK(detect_format("bbh_sample.json") == DatasetFormat::BbhJson);
  CHECK(detect_format("gsm20.jsonl") == DatasetFormat::NativeJsonl);
  CHECK(dataset_format_from_string("gsm8k") == DatasetFormat::Gsm8k);
  CHECK_FALSE(dataset_format_from_string("arff").has_value());
}

TEST_CASE("native jsonl loads ids questions and golds") {
  auto items = load_dataset(kDatasets / "gsm20.jsonl", DatasetFormat::NativeJsonl,
                            TaskKind::Math, 0);
  REQUIRE(items.size() == 20);
  CHECK(items[0].id == "muffins");
  CHECK(items[0].gold == Answer::number(25));
  CHECK(items[19].id == "bill");
  CHECK(items[19].gold == Answer::number(13));

  auto limited = load_dataset(kDatasets / "gsm20.jsonl", DatasetFormat::NativeJsonl,
                              TaskKind::Math, 5);
  CHECK(limited.size() == 5);
}

TEST_CASE("gsm8k answers parse past the rationale") {
  auto items = load_dataset(kDatasets / "gsm8k_sample.jsonl", DatasetFormat::Gsm8k,
                            TaskKind::Math, 0);
  REQUIRE(items.size() == 2);
  CHECK(items[0].gold == Answer::number(25));
  CHECK(items[1].gold == Answer::number(63));
  CHECK(items[0].gold_raw.find("####") != std::string::npos);
}

TEST_CASE("svamp merges body and question") {
  auto items = load_dataset(kDatasets / "svamp_sample.json", DatasetFormat::Svamp,
                            TaskKind::Math, 0);
  REQUIRE(items.size() == 2);
  CHECK(items[0].id == "chal-1");
  CHECK(items[0].question ==
        "A parking garage has 4 levels with 23 spaces on each level. 61 cars are "
        "parked. How many spaces are free?");
  CHECK(items[0].gold == Answer::number(31));
  CHECK(items[1].question == "Nora saves $7 each week. How much has she saved after 9 weeks?");
}

TEST_CASE("mawps takes the first listed solution") {
  auto items = load_dataset(kDatasets / "mawps_sample.json", DatasetFormat::Mawps,
                            TaskKind::Math, 0);
  REQUIRE(items.size() == 1);
  CHECK(items[0].id == "mawps/1");
  CHECK(items[0].gold == Answer::number(45));
}

TEST_CASE("bbh examples carry text targets") {
  auto items = load_dataset(kDatasets / "bbh_sample.json", DatasetFormat::BbhJson,
                            TaskKind::ColoredObjects, 0);
  REQUIRE(items.size() == 1);
  CHECK(items[0].gold == Answer::text("brown"));
  CHECK(items[0].question.find("stress ball") != std::string::npos);
}

TEST_CASE("an empty file is an empty dataset") {
  auto items = load_dataset(kDatasets / "empty.jsonl", DatasetFormat::NativeJsonl,
                            TaskKind::Math, 0);
  CHECK(items.empty());
}

TEST_CASE("malformed lines carry a file and line locus") {
  auto file = fs::temp_directory_path() / "pal_bad_dataset.jsonl";
  {
    std::ofstream out(file, std::ios::trunc);
    out << R"({"id": "ok", "question": "1 + 1?", "answer": 2})" << "\n";
    out << "{not json}\n";
  }
  try {
    load_dataset(file, DatasetFormat::NativeJsonl, TaskKind::Math, 0);
    FAIL("expected FormatError");
  } catch (const pal::FormatError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  CHECK_THROWS_AS(load_dataset(fs::path("/no/such/file.jsonl"),
                               DatasetFormat::NativeJsonl, TaskKind::Math, 0),
                  pal::FormatError);
}

TEST_CASE("unparseable golds are rejected") {
  auto file = fs::temp_directory_path() / "pal_bad_gold.jsonl";
  {
    std::ofstream out(file, std::ios::trunc);
    out << R"({"id": "x", "question": "color?", "answer": "forty-two"})" << "\n";
  }
  CHECK_THROWS_AS(load_dataset(file, DatasetFormat::NativeJsonl, TaskKind::Math, 0),
                  pal::FormatError);
}

TEST_CASE("native writes round trip") {
  auto file = fs::temp_directory_path() / "pal_roundtrip.jsonl";
  std::vector<DatasetRecord> records(2);
  records[0] = {"a", "What is 2 + 2?", Answer::number(4), "4"};
  records[1] = {"b", "What color?", Answer::text("brown"), "brown"};
  write_native_jsonl(file, records);

  auto math = load_dataset(file, DatasetFormat::NativeJsonl, TaskKind::Math, 1);
  REQUIRE(math.size() == 1);
  CHECK(math[0].gold == Answer::number(4));

  auto text = load_dataset(file, DatasetFormat::NativeJsonl, TaskKind::ColoredObjects, 0);
  CHECK(text[1].gold == Answer::text("brown"));
}

}
