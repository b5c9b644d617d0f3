#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pal::backend {

/// Decoding parameters for one completion request.
struct DecodeParams {
  double temperature = 0.0;
  double top_p = 1.0;
  int n_samples = 1;
  int max_tokens = 512;
  std::vector<std::string> stop_sequences;

  /// Greedy preset: temperature 0, single sample.
  static DecodeParams greedy();

  /// Self-consistency preset: top_p 0.95, 40 samples, temperature 0.7.
  static DecodeParams self_consistency();

  /// Enforces invariants (temperature 0 implies n_samples 1, ranges).
  /// Throws ConfigError on violation.
  void validate() const;

  /// Canonical serialization used for replay digests. Field order and float
  /// formatting are fixed so identical params always produce identical keys.
  std::string canonical_string() const;

  bool operator==(const DecodeParams&) const = default;
};

enum class FinishReason { Stop, Length, Error };

std::string to_string(FinishReason r);
std::optional<FinishReason> finish_reason_from_string(const std::string& name);

struct Completion {
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
  int sample_index = 0;
  std::string backend_id;
};

/// Content-addressed key for record/replay: SHA-256 over the prompt text,
/// canonical decode params, and the sample index.
std::string replay_digest(const std::string& prompt_text, const DecodeParams& params,
                          int sample_index);

}  // namespace pal::backend
