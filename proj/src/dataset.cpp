#include "pal/dataset.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "pal/errors.hpp"

namespace pal::data {

using nlohmann::json;
using scoring::Answer;

std::string to_string(DatasetFormat f) {
  switch (f) {
    case DatasetFormat::NativeJsonl: return "native_jsonl";
    case DatasetFormat::Gsm8k: return "gsm8k";
    case DatasetFormat::Svamp: return "svamp";
    case DatasetFormat::Mawps: return "mawps";
    case DatasetFormat::BbhJson: return "bbh";
  }
  return "native_jsonl";
}

std::optional<DatasetFormat> dataset_format_from_string(const std::string& name) {
  if (name == "native_jsonl" || name == "native") return DatasetFormat::NativeJsonl;
  if (name == "gsm8k") return DatasetFormat::Gsm8k;
  if (name == "svamp") return DatasetFormat::Svamp;
  if (name == "mawps") return DatasetFormat::Mawps;
  if (name == "bbh") return DatasetFormat::BbhJson;
  return std::nullopt;
}

DatasetFormat detect_format(const std::filesystem::path& file) {
  std::string name = file.filename().string();
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return (char)std::tolower(c); });
  if (name.find("gsm8k") != std::string::npos && name.find(".jsonl") != std::string::npos) {
    return DatasetFormat::Gsm8k;
  }
  if (name.find("svamp") != std::string::npos) return DatasetFormat::Svamp;
  if (name.find("mawps") != std::string::npos) return DatasetFormat::Mawps;
  if (file.extension() == ".json") return DatasetFormat::BbhJson;
  return DatasetFormat::NativeJsonl;
}

namespace {

json parse_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot open dataset " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
  return j;
}

Answer require_gold(const std::string& raw, scoring::TaskKind task,
                    const std::string& where) {
  auto a = scoring::normalize_answer(raw, task);
  if (!a) throw FormatError(where + ": gold answer '" + raw + "' does not parse");
  return *a;
}

std::string gsm8k_final(const std::string& answer_text) {
  std::size_t at = answer_text.rfind("####");
  if (at == std::string::npos) return answer_text;
  return answer_text.substr(at + 4);
}

void load_jsonl(const std::filesystem::path& file, DatasetFormat format,
                scoring::TaskKind task, std::size_t limit,
                std::vector<DatasetRecord>& out) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot open dataset " + file.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (limit && out.size() >= limit) break;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    const std::string where = file.string() + ":" + std::to_string(lineno);
    DatasetRecord rec;
    if (format == DatasetFormat::Gsm8k) {
      rec.id = "gsm8k/" + std::to_string(out.size());
      rec.question = j.at("question").get<std::string>();
      rec.gold_raw = j.at("answer").get<std::string>();
      rec.gold = require_gold(gsm8k_final(rec.gold_raw), task, where);
    } else {
      rec.id = j.contains("id") ? j.at("id").get<std::string>()
                                : file.stem().string() + "/" + std::to_string(out.size());
      rec.question = j.at("question").get<std::string>();
      const json& a = j.at("answer");
      rec.gold_raw = a.is_string() ? a.get<std::string>() : a.dump();
      rec.gold = require_gold(rec.gold_raw, task, where);
    }
    out.push_back(std::move(rec));
  }
}

}  // namespace

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& file,
                                        DatasetFormat format, scoring::TaskKind task,
                                        std::size_t limit) {
  std::vector<DatasetRecord> out;
  switch (format) {
    case DatasetFormat::NativeJsonl:
    case DatasetFormat::Gsm8k:
      load_jsonl(file, format, task, limit, out);
      break;
    case DatasetFormat::Svamp: {
      const json arr = parse_file(file);
      for (const auto& j : arr) {
        if (limit && out.size() >= limit) break;
        DatasetRecord rec;
        rec.id = j.contains("ID") ? j.at("ID").get<std::string>()
                                  : "svamp/" + std::to_string(out.size());
        std::string body = j.value("Body", "");
        std::string question = j.value("Question", "");
        rec.question = body.empty() ? question : body + " " + question;
        const json& a = j.at("Answer");
        rec.gold_raw = a.is_string() ? a.get<std::string>() : a.dump();
        rec.gold = require_gold(rec.gold_raw, task, file.string());
        out.push_back(std::move(rec));
      }
      break;
    }
    case DatasetFormat::Mawps: {
      const json arr = parse_file(file);
      for (const auto& j : arr) {
        if (limit && out.size() >= limit) break;
        DatasetRecord rec;
        rec.id = j.contains("iIndex") ? "mawps/" + j.at("iIndex").dump()
                                      : "mawps/" + std::to_string(out.size());
        rec.question = j.at("sQuestion").get<std::string>();
        const json& sols = j.at("lSolutions");
        if (!sols.is_array() || sols.empty()) {
          throw FormatError(file.string() + ": record without solutions");
        }
        rec.gold_raw = sols[0].is_string() ? sols[0].get<std::string>() : sols[0].dump();
        rec.gold = require_gold(rec.gold_raw, task, file.string());
        out.push_back(std::move(rec));
      }
      break;
    }
    case DatasetFormat::BbhJson: {
      const json root = parse_file(file);
      for (const auto& j : root.at("examples")) {
        if (limit && out.size() >= limit) break;
        DatasetRecord rec;
        rec.id = file.stem().string() + "/" + std::to_string(out.size());
        rec.question = j.at("input").get<std::string>();
        const json& t = j.at("target");
        rec.gold_raw = t.is_string() ? t.get<std::string>() : t.dump();
        rec.gold = require_gold(rec.gold_raw, task, file.string());
        out.push_back(std::move(rec));
      }
      break;
    }
  }
  return out;
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& file,
                                        scoring::TaskKind task, std::size_t limit) {
  return load_dataset(file, detect_format(file), task, limit);
}

void write_native_jsonl(const std::filesystem::path& file,
                        const std::vector<DatasetRecord>& records) {
  std::error_code ec;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write dataset " + file.string());
  for (const auto& rec : records) {
    json j;
    j["id"] = rec.id;
    j["question"] = rec.question;
    if (rec.gold.kind == scoring::AnswerKind::Number) {
      double v = rec.gold.number_value;
      if (v == (double)(long long)v) {
        j["answer"] = (long long)v;
      } else {
        j["answer"] = v;
      }
    } else {
      j["answer"] = rec.gold.text_value;
    }
    out << j.dump() << '\n';
  }
  if (!out) throw FormatError("write failed: " + file.string());
}

}  // namespace pal::data
