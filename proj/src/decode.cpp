#include "pal/decode.hpp"

#include <charconv>

#include <json.hpp>

#include "pal/digest.hpp"
#include "pal/errors.hpp"

namespace pal::backend {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

DecodeParams DecodeParams::greedy() {
  DecodeParams p;
  p.temperature = 0.0;
  p.top_p = 1.0;
  p.n_samples = 1;
  return p;
}

DecodeParams DecodeParams::self_consistency() {
  DecodeParams p;
  p.temperature = 0.7;
  p.top_p = 0.95;
  p.n_samples = 40;
  return p;
}

void DecodeParams::validate() const {
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (top_p <= 0.0 || top_p > 1.0) throw ConfigError("top_p must be in (0, 1]");
  if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
  if (temperature == 0.0 && n_samples != 1) {
    throw ConfigError("greedy decoding admits exactly one sample; got n_samples=" +
                      std::to_string(n_samples));
  }
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
}

std::string DecodeParams::canonical_string() const {
  nlohmann::json stops = nlohmann::json::array();
  for (const auto& s : stop_sequences) stops.push_back(s);
  std::string out = "t=" + shortest(temperature) + ";p=" + shortest(top_p) +
                    ";n=" + std::to_string(n_samples) + ";max=" + std::to_string(max_tokens) +
                    ";stop=" + stops.dump();
  return out;
}

std::string to_string(FinishReason r) {
  switch (r) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::Error: return "error";
  }
  return "error";
}

std::optional<FinishReason> finish_reason_from_string(const std::string& name) {
  if (name == "stop") return FinishReason::Stop;
  if (name == "length") return FinishReason::Length;
  if (name == "error") return FinishReason::Error;
  return std::nullopt;
}

std::string replay_digest(const std::string& prompt_text, const DecodeParams& params,
                          int sample_index) {
  std::string key = sha256_hex(prompt_text);
  key += '\n';
  key += params.canonical_string();
  key += '\n';
  key += std::to_string(sample_index);
  return sha256_hex(key);
}

}  // namespace pal::backend
