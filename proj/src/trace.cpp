#include "pal/trace.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pal/errors.hpp"

namespace pal::runner {

using nlohmann::json;
using scoring::Answer;
using scoring::AnswerKind;

namespace {

json answer_to_json(const std::optional<Answer>& a) {
  if (!a) return nullptr;
  json j;
  switch (a->kind) {
    case AnswerKind::Number:
      j["kind"] = "number";
      j["value"] = a->number_value;
      break;
    case AnswerKind::Text:
      j["kind"] = "text";
      j["value"] = a->text_value;
      break;
    case AnswerKind::DateString:
      j["kind"] = "date";
      j["value"] = a->text_value;
      break;
  }
  return j;
}

std::optional<Answer> answer_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "number") return Answer::number(j.at("value").get<double>());
  if (kind == "text") return Answer::text(j.at("value").get<std::string>());
  if (kind == "date") return Answer::date(j.at("value").get<std::string>());
  throw FormatError("unknown answer kind '" + kind + "' in trace");
}

}  // namespace

std::string to_json_line(const ItemTrace& trace, bool deterministic) {
  json samples = json::array();
  for (const auto& s : trace.samples) {
    json js;
    js["sample_index"] = s.sample_index;
    js["completion_sha"] = s.completion_sha;
    js["completion_text"] = s.completion_text;
    js["status"] = runtime::to_string(s.status);
    js["answer"] = answer_to_json(s.answer);
    js["answer_display"] = s.answer_display;
    js["correct"] = s.correct;
    js["exec_ms"] = deterministic ? 0 : (long long)s.exec_duration.count();
    samples.push_back(std::move(js));
  }
  json j;
  j["ordering_seed"] = trace.ordering_seed;
  j["item_index"] = trace.item_index;
  j["item_id"] = trace.item_id;
  j["question"] = trace.question;
  j["gold"] = trace.gold_display;
  j["prompt_sha"] = trace.prompt_sha;
  j["style"] = prompts::to_string(trace.style);
  j["samples"] = std::move(samples);
  j["chosen"] = answer_to_json(trace.chosen);
  j["chosen_display"] = trace.chosen_display;
  j["valid_samples"] = trace.valid_samples;
  j["correct"] = trace.correct;
  j["total_ms"] = deterministic ? 0 : (long long)trace.total_duration.count();
  return j.dump();
}

ItemTrace item_trace_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad trace line: ") + e.what());
  }
  ItemTrace t;
  try {
    t.ordering_seed = j.at("ordering_seed").get<std::uint64_t>();
    t.item_index = j.at("item_index").get<std::size_t>();
    t.item_id = j.at("item_id").get<std::string>();
    t.question = j.at("question").get<std::string>();
    t.gold_display = j.at("gold").get<std::string>();
    t.prompt_sha = j.at("prompt_sha").get<std::string>();
    auto style = prompts::style_from_string(j.at("style").get<std::string>());
    if (!style) throw FormatError("unknown style in trace line");
    t.style = *style;
    for (const auto& js : j.at("samples")) {
      SampleTrace s;
      s.sample_index = js.at("sample_index").get<int>();
      s.completion_sha = js.at("completion_sha").get<std::string>();
      s.completion_text = js.at("completion_text").get<std::string>();
      auto status = runtime::exec_status_from_string(js.at("status").get<std::string>());
      if (!status) throw FormatError("unknown exec status in trace line");
      s.status = *status;
      s.answer = answer_from_json(js.at("answer"));
      s.answer_display = js.value("answer_display", "");
      s.correct = js.value("correct", false);
      s.exec_duration = std::chrono::milliseconds(js.value("exec_ms", (long long)0));
      t.samples.push_back(std::move(s));
    }
    t.chosen = answer_from_json(j.at("chosen"));
    t.chosen_display = j.value("chosen_display", "");
    t.valid_samples = j.value("valid_samples", 0);
    t.correct = j.value("correct", false);
    t.total_duration = std::chrono::milliseconds(j.value("total_ms", (long long)0));
  } catch (const json::exception& e) {
    throw FormatError(std::string("trace line missing field: ") + e.what());
  }
  return t;
}

std::vector<ItemTrace> read_trace_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw MissingTraces("cannot open trace file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();

  std::vector<ItemTrace> out;
  std::size_t begin = 0;
  while (begin < content.size()) {
    std::size_t end = content.find('\n', begin);
    const bool torn = end == std::string::npos;  // no terminator: partial write
    std::string line = content.substr(begin, torn ? std::string::npos : end - begin);
    if (!line.empty()) {
      try {
        out.push_back(item_trace_from_json_line(line));
      } catch (const FormatError&) {
        if (torn) break;  // half-written tail from a killed run; resume overwrites it
        throw;
      }
    }
    if (torn) break;
    begin = end + 1;
  }
  return out;
}

}  // namespace pal::runner
