#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "pal/backend.hpp"
#include "pal/errors.hpp"

namespace pal::backend {

using nlohmann::json;

namespace {

class Gate {
 public:
  explicit Gate(int slots) : slots_(slots) {}
  void acquire() {
    std::unique_lock<std::mutex> lock(m_);
    cv_.wait(lock, [&] { return slots_ > 0; });
    --slots_;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(m_);
      ++slots_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  int slots_;
};

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

struct HttpBackend::Impl {
  HttpBackendConfig config;
  std::string api_key;
  Gate gate;
  std::mutex rng_mutex;
  std::mt19937_64 rng{std::random_device{}()};

  explicit Impl(HttpBackendConfig cfg)
      : config(std::move(cfg)), gate(std::max(1, config.max_in_flight)) {}

  std::chrono::milliseconds backoff_for(int attempt) {
    double base = (double)config.retry.initial_backoff.count();
    for (int i = 0; i < attempt; ++i) base *= config.retry.multiplier;
    double jitter = 0.0;
    {
      std::lock_guard<std::mutex> lock(rng_mutex);
      std::uniform_real_distribution<double> d(-config.retry.jitter, config.retry.jitter);
      jitter = d(rng);
    }
    double total = base * (1.0 + jitter);
    if (total < 0) total = 0;
    return std::chrono::milliseconds((long long)total);
  }
};

HttpBackend::HttpBackend(HttpBackendConfig config) : impl_(new Impl(std::move(config))) {
  const auto& cfg = impl_->config;
  if (!cfg.api_key_env.empty()) {
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (key && *key) {
      impl_->api_key = key;
    } else if (cfg.require_api_key) {
      throw CredentialMissing("environment variable " + cfg.api_key_env +
                              " is not set; refusing to start a backend that would fail "
                              "mid-run");
    }
  }
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::id() const { return "http:" + impl_->config.model; }

std::vector<Completion> HttpBackend::complete(const std::string& prompt,
                                              const DecodeParams& params) {
  params.validate();
  const auto& cfg = impl_->config;

  json body;
  body["model"] = cfg.model;
  body["prompt"] = prompt;
  body["max_tokens"] = params.max_tokens;
  body["temperature"] = params.temperature;
  body["top_p"] = params.top_p;
  body["n"] = params.n_samples;
  if (!params.stop_sequences.empty()) body["stop"] = params.stop_sequences;
  const std::string payload = body.dump();

  impl_->gate.acquire();
  struct Release {
    Gate& g;
    ~Release() { g.release(); }
  } release{impl_->gate};

  std::string last_error;
  for (int attempt = 0; attempt < cfg.retry.max_attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(impl_->backoff_for(attempt - 1));

    httplib::Client client(cfg.base_url);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(
        cfg.request_timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(
        cfg.request_timeout));
    httplib::Headers headers;
    if (!impl_->api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + impl_->api_key);
    }

    auto res = client.Post(cfg.completions_path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (retryable_status(res->status)) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendUnavailable("completions endpoint returned status " +
                               std::to_string(res->status) + ": " + res->body);
    }

    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      last_error = std::string("bad response body: ") + e.what();
      continue;
    }
    if (!reply.contains("choices") || !reply["choices"].is_array() ||
        (int)reply["choices"].size() != params.n_samples) {
      throw BackendUnavailable("completions endpoint returned " +
                               std::to_string(reply.value("choices", json::array()).size()) +
                               " choices for n=" + std::to_string(params.n_samples));
    }

    std::vector<Completion> out((std::size_t)params.n_samples);
    for (const auto& choice : reply["choices"]) {
      int index = choice.value("index", -1);
      if (index < 0 || index >= params.n_samples) {
        throw BackendUnavailable("completions endpoint returned an out-of-range choice index");
      }
      Completion c;
      c.text = choice.value("text", "");
      std::string fr = choice.value("finish_reason", "stop");
      c.finish_reason = finish_reason_from_string(fr).value_or(FinishReason::Stop);
      c.sample_index = index;
      c.backend_id = id();
      out[(std::size_t)index] = std::move(c);
    }
    return out;
  }
  throw BackendUnavailable("completions request failed after " +
                           std::to_string(cfg.retry.max_attempts) + " attempts; last error: " +
                           last_error);
}

}  // namespace pal::backend
