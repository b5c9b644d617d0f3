#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "pal/answers.hpp"

namespace pal::runtime {

/// How a generated program designates its result.
enum class AnswerConvention { AnswerVariable, PrintedValue, ReturnedValue };

std::string to_string(AnswerConvention c);
std::optional<AnswerConvention> convention_from_string(const std::string& name);

struct ProgramSource {
  std::string code;
  std::optional<std::string> task_prelude_id;  // e.g. "date"
  AnswerConvention convention = AnswerConvention::AnswerVariable;
};

struct ExecutionPolicy {
  std::chrono::milliseconds wall_timeout{10'000};
  std::uint64_t memory_cap_bytes = 256ull * 1024 * 1024;
  bool network_allowed = false;  // always false; kept explicit in config echoes
  std::filesystem::path working_root;  // empty -> system temp dir
};

enum class ExecStatus { Ok, SyntaxError, RuntimeError, Timeout, NoAnswer, SandboxError };

std::string to_string(ExecStatus s);
std::optional<ExecStatus> exec_status_from_string(const std::string& name);

/// Result of running one generated program. status == Ok iff value is
/// present; Timeout implies duration >= the policy's wall_timeout.
struct ExecutionOutcome {
  ExecStatus status = ExecStatus::SandboxError;
  std::optional<scoring::Answer> value;
  std::string value_repr;  // interpreter repr of the raw value, when available
  std::string stdout_text;
  std::string stderr_text;
  std::chrono::milliseconds duration{0};
};

/// Runs generated programs in fresh interpreter subprocesses under resource
/// limits. execute() never throws: every failure maps into ExecStatus.
/// Thread-safe; a counting semaphore bounds concurrent interpreters.
class ProgramExecutor {
 public:
  struct Config {
    std::string interpreter = "python3";
    std::filesystem::path assets_dir;  // holds runtime/harness.py, preludes/
    int max_concurrent = 0;            // 0 -> hardware_concurrency
  };

  explicit ProgramExecutor(Config config);

  ExecutionOutcome execute(const ProgramSource& program, const ExecutionPolicy& policy) const;

  const Config& config() const { return config_; }

 private:
  Config config_;
  std::string harness_source_;
  std::shared_ptr<class ExecGate> gate_;
};

}  // namespace pal::runtime
