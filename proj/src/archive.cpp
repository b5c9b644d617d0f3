#include "pal/archive.hpp"

#include <json.hpp>

#include "pal/errors.hpp"

namespace pal::backend {

using nlohmann::json;

std::string to_json_line(const ArchiveEntry& entry) {
  json j;
  j["digest"] = entry.digest;
  j["prompt_sha"] = entry.prompt_sha;
  j["params"] = entry.params;
  j["sample_index"] = entry.sample_index;
  j["text"] = entry.text;
  j["finish_reason"] = to_string(entry.finish_reason);
  return j.dump();
}

ArchiveEntry entry_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad archive line: ") + e.what());
  }
  ArchiveEntry e;
  try {
    e.digest = j.at("digest").get<std::string>();
    e.prompt_sha = j.at("prompt_sha").get<std::string>();
    e.params = j.at("params").get<std::string>();
    e.sample_index = j.at("sample_index").get<int>();
    e.text = j.at("text").get<std::string>();
    auto fr = finish_reason_from_string(j.at("finish_reason").get<std::string>());
    if (!fr) throw FormatError("bad finish_reason in archive line");
    e.finish_reason = *fr;
  } catch (const json::exception& ex) {
    throw FormatError(std::string("archive line missing field: ") + ex.what());
  }
  return e;
}

ReplayArchive ReplayArchive::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw BackendUnavailable("cannot open archive " + file.string());
  ReplayArchive archive;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ArchiveEntry e;
    try {
      e = entry_from_json_line(line);
    } catch (const FormatError& err) {
      throw FormatError(file.string() + ":" + std::to_string(lineno) + ": " + err.what());
    }
    archive.entries_[e.digest] = std::move(e);
  }
  return archive;
}

const ArchiveEntry* ReplayArchive::find(const std::string& digest) const {
  auto it = entries_.find(digest);
  return it == entries_.end() ? nullptr : &it->second;
}

ArchiveWriter::ArchiveWriter(const std::filesystem::path& file) : path_(file) {
  std::error_code ec;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
  out_.open(file, std::ios::binary | std::ios::app);
  if (!out_) throw ArchiveWriteFailure("cannot open archive for append: " + file.string());
}

void ArchiveWriter::append(const ArchiveEntry& entry) {
  std::lock_guard<std::mutex> lock(mutex_);
  out_ << to_json_line(entry) << '\n';
  out_.flush();
  if (!out_) throw ArchiveWriteFailure("write failed: " + path_.string());
}

}  // namespace pal::backend
