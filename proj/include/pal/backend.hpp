#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include "pal/archive.hpp"
#include "pal/decode.hpp"

namespace pal::backend {

/// Produces n_samples completions for a prompt. Implementations must be
/// thread-safe: the orchestrator issues requests from a worker pool.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;

  /// Returns exactly params.n_samples completions with sample_index 0..n-1.
  /// params is validated before any work.
  virtual std::vector<Completion> complete(const std::string& prompt,
                                           const DecodeParams& params) = 0;

  /// Stable identifier echoed into traces ("replay", "http:<model>", ...).
  virtual std::string id() const = 0;
};

/// Serves completions from a recorded archive; no network. Throws ReplayMiss
/// (with the missing digest) when a requested sample was never recorded.
class ReplayBackend : public CompletionBackend {
 public:
  explicit ReplayBackend(ReplayArchive archive);

  std::vector<Completion> complete(const std::string& prompt,
                                   const DecodeParams& params) override;
  std::string id() const override { return "replay"; }

 private:
  ReplayArchive archive_;
};

/// Decorator that archives every completion produced by the inner backend.
class RecordingBackend : public CompletionBackend {
 public:
  RecordingBackend(std::shared_ptr<CompletionBackend> inner,
                   std::shared_ptr<ArchiveWriter> writer);

  std::vector<Completion> complete(const std::string& prompt,
                                   const DecodeParams& params) override;
  std::string id() const override;

 private:
  std::shared_ptr<CompletionBackend> inner_;
  std::shared_ptr<ArchiveWriter> writer_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{1'000};
  double multiplier = 2.0;
  double jitter = 0.25;  // +-25% uniform noise on each sleep
};

struct HttpBackendConfig {
  std::string base_url = "http://localhost:8000";
  std::string completions_path = "/v1/completions";
  std::string model = "code-davinci-002";
  std::string api_key_env = "PAL_API_KEY";
  bool require_api_key = true;
  std::chrono::milliseconds request_timeout{120'000};
  int max_in_flight = 4;
  RetryPolicy retry;
};

/// OpenAI-style completions client. Construction resolves the credential
/// (throws CredentialMissing before any network use when the env var is
/// required but unset). Retries timeouts, 429 and 5xx with jittered
/// exponential backoff; 4xx other than 429 fail fast. A counting semaphore
/// caps in-flight requests.
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  std::vector<Completion> complete(const std::string& prompt,
                                   const DecodeParams& params) override;
  std::string id() const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pal::backend
