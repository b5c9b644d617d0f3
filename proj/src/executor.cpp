#include "pal/executor.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pal/errors.hpp"

namespace pal::runtime {

using nlohmann::json;

std::string to_string(AnswerConvention c) {
  switch (c) {
    case AnswerConvention::AnswerVariable: return "answer_variable";
    case AnswerConvention::PrintedValue: return "printed_value";
    case AnswerConvention::ReturnedValue: return "returned_value";
  }
  return "answer_variable";
}

std::optional<AnswerConvention> convention_from_string(const std::string& name) {
  if (name == "answer_variable") return AnswerConvention::AnswerVariable;
  if (name == "printed_value") return AnswerConvention::PrintedValue;
  if (name == "returned_value") return AnswerConvention::ReturnedValue;
  return std::nullopt;
}

std::string to_string(ExecStatus s) {
  switch (s) {
    case ExecStatus::Ok: return "ok";
    case ExecStatus::SyntaxError: return "syntax_error";
    case ExecStatus::RuntimeError: return "runtime_error";
    case ExecStatus::Timeout: return "timeout";
    case ExecStatus::NoAnswer: return "no_answer";
    case ExecStatus::SandboxError: return "sandbox_error";
  }
  return "sandbox_error";
}

std::optional<ExecStatus> exec_status_from_string(const std::string& name) {
  if (name == "ok") return ExecStatus::Ok;
  if (name == "syntax_error") return ExecStatus::SyntaxError;
  if (name == "runtime_error") return ExecStatus::RuntimeError;
  if (name == "timeout") return ExecStatus::Timeout;
  if (name == "no_answer") return ExecStatus::NoAnswer;
  if (name == "sandbox_error") return ExecStatus::SandboxError;
  return std::nullopt;
}

class ExecGate {
 public:
  explicit ExecGate(int slots) : slots_(slots) {}
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

namespace {

constexpr std::size_t kStdoutCap = 32ull * 1024 * 1024;
constexpr std::size_t kStderrCap = 256ull * 1024;

std::string random_sentinel() {
  static std::mutex m;
  static std::mt19937_64 rng(std::random_device{}() ^
                             (std::uint64_t)std::chrono::steady_clock::now()
                                 .time_since_epoch()
                                 .count());
  std::lock_guard<std::mutex> lock(m);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", (unsigned long long)rng(),
                (unsigned long long)rng());
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) throw ConfigError("cannot write " + p.string());
}

struct Pipe {
  int fds[2] = {-1, -1};
  bool open(bool cloexec = false) {
    if (::pipe(fds) != 0) return false;
    if (cloexec) {
      ::fcntl(fds[0], F_SETFD, FD_CLOEXEC);
      ::fcntl(fds[1], F_SETFD, FD_CLOEXEC);
    }
    return true;
  }
  void close_read() {
    if (fds[0] >= 0) ::close(fds[0]);
    fds[0] = -1;
  }
  void close_write() {
    if (fds[1] >= 0) ::close(fds[1]);
    fds[1] = -1;
  }
  ~Pipe() {
    close_read();
    close_write();
  }
};

scoring::Answer answer_from_payload(const json& value) {
  if (value.is_number_integer()) {
    return scoring::Answer::number((double)value.get<long long>());
  }
  if (value.is_number_float()) return scoring::Answer::number(value.get<double>());
  if (value.is_boolean()) return scoring::Answer::text(value.get<bool>() ? "True" : "False");
  if (value.is_string()) return scoring::Answer::text(value.get<std::string>());
  return scoring::Answer::text(value.dump());
}

}  // namespace

ProgramExecutor::ProgramExecutor(Config config) : config_(std::move(config)) {
  if (config_.assets_dir.empty()) config_.assets_dir = PAL_DEFAULT_ASSETS_DIR;
  const auto harness_path = config_.assets_dir / "runtime" / "harness.py";
  std::ifstream in(harness_path, std::ios::binary);
  if (!in) throw ConfigError("interpreter harness not found: " + harness_path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  harness_source_ = buf.str();
  int slots = config_.max_concurrent;
  if (slots <= 0) slots = (int)std::thread::hardware_concurrency();
  if (slots <= 0) slots = 4;
  gate_ = std::make_shared<ExecGate>(slots);
}

ExecutionOutcome ProgramExecutor::execute(const ProgramSource& program,
                                          const ExecutionPolicy& policy) const {
  ExecutionOutcome outcome;
  const auto started = std::chrono::steady_clock::now();
  auto finish = [&](ExecutionOutcome& o) -> ExecutionOutcome& {
    o.duration = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    return o;
  };

  gate_->acquire();
  struct Release {
    ExecGate& g;
    ~Release() { g.release(); }
  } release{*gate_};

  // assemble the program text: optional task prelude, then the model's code
  std::string code;
  if (program.task_prelude_id) {
    const auto prelude_path =
        config_.assets_dir / "preludes" / (*program.task_prelude_id + ".py");
    std::ifstream in(prelude_path, std::ios::binary);
    if (!in) {
      outcome.status = ExecStatus::SandboxError;
      outcome.stderr_text = "missing prelude: " + prelude_path.string();
      return finish(outcome);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    code = buf.str();
    if (!code.empty() && code.back() != '\n') code += '\n';
  }
  code += program.code;

  std::error_code ec;
  std::filesystem::path root = policy.working_root.empty()
                                   ? std::filesystem::temp_directory_path(ec)
                                   : policy.working_root;
  if (ec) root = "/tmp";
  std::filesystem::create_directories(root, ec);
  std::string tmpl = (root / "pal-exec-XXXXXX").string();
  std::vector<char> tmpl_buf(tmpl.begin(), tmpl.end());
  tmpl_buf.push_back('\0');
  if (!::mkdtemp(tmpl_buf.data())) {
    outcome.status = ExecStatus::SandboxError;
    outcome.stderr_text = std::string("mkdtemp: ") + std::strerror(errno);
    return finish(outcome);
  }
  const std::filesystem::path workdir(tmpl_buf.data());
  struct Cleanup {
    std::filesystem::path dir;
    ~Cleanup() {
      std::error_code e;
      std::filesystem::remove_all(dir, e);
    }
  } cleanup{workdir};

  const std::string sentinel = random_sentinel();
  try {
    write_file(workdir / "harness.py", harness_source_);
    write_file(workdir / "user_code.py", code);
  } catch (const Error& e) {
    outcome.status = ExecStatus::SandboxError;
    outcome.stderr_text = e.what();
    return finish(outcome);
  }

  Pipe out_pipe, err_pipe, exec_pipe;
  if (!out_pipe.open() || !err_pipe.open() || !exec_pipe.open(true)) {
    outcome.status = ExecStatus::SandboxError;
    outcome.stderr_text = std::string("pipe: ") + std::strerror(errno);
    return finish(outcome);
  }

  const pid_t pid = ::fork();
  if (pid < 0) {
    outcome.status = ExecStatus::SandboxError;
    outcome.stderr_text = std::string("fork: ") + std::strerror(errno);
    return finish(outcome);
  }

  if (pid == 0) {
    // child
    ::setpgid(0, 0);
    if (!policy.network_allowed) {
      (void)::unshare(CLONE_NEWNET);  // best effort; fine without privileges
    }
    if (policy.memory_cap_bytes > 0) {
      rlimit lim{};
      lim.rlim_cur = policy.memory_cap_bytes;
      lim.rlim_max = policy.memory_cap_bytes;
      ::setrlimit(RLIMIT_AS, &lim);
    }
    rlimit core{};
    ::setrlimit(RLIMIT_CORE, &core);

    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    ::dup2(out_pipe.fds[1], STDOUT_FILENO);
    ::dup2(err_pipe.fds[1], STDERR_FILENO);
    out_pipe.close_read();
    out_pipe.close_write();
    err_pipe.close_read();
    err_pipe.close_write();
    exec_pipe.close_read();

    if (::chdir(tmpl_buf.data()) != 0) {
      int err = errno;
      (void)!::write(exec_pipe.fds[1], &err, sizeof err);
      ::_exit(127);
    }

    const std::string convention = to_string(program.convention);
    std::vector<std::string> args = {config_.interpreter, "-I", "harness.py",
                                     "user_code.py",      sentinel, convention};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    ::execvp(argv[0], argv.data());
    int err = errno;
    (void)!::write(exec_pipe.fds[1], &err, sizeof err);
    ::_exit(127);
  }

  // parent
  ::setpgid(pid, pid);  // either side may win the race; both set the same pgid
  out_pipe.close_write();
  err_pipe.close_write();
  exec_pipe.close_write();

  std::string out_buf, err_buf;
  bool overlong = false;
  const auto deadline = started + policy.wall_timeout;
  bool timed_out = false;

  {
    pollfd fds[2] = {{out_pipe.fds[0], POLLIN, 0}, {err_pipe.fds[0], POLLIN, 0}};
    bool open_fds[2] = {true, true};
    char chunk[65536];
    while (open_fds[0] || open_fds[1]) {
      auto now = std::chrono::steady_clock::now();
      if (now >= deadline) {
        timed_out = true;
        break;
      }
      auto remain =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
      int wait_ms = (int)std::min<long long>(remain, 200);
      fds[0].fd = open_fds[0] ? out_pipe.fds[0] : -1;
      fds[1].fd = open_fds[1] ? err_pipe.fds[0] : -1;
      int rc = ::poll(fds, 2, wait_ms);
      if (rc < 0) {
        if (errno == EINTR) continue;
        break;
      }
      for (int i = 0; i < 2; ++i) {
        if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP))) continue;
        ssize_t n = ::read(fds[i].fd, chunk, sizeof chunk);
        if (n <= 0) {
          open_fds[i] = false;
          continue;
        }
        std::string& dst = i == 0 ? out_buf : err_buf;
        std::size_t cap = i == 0 ? kStdoutCap : kStderrCap;
        if (dst.size() < cap) {
          dst.append(chunk, (std::size_t)std::min<ssize_t>(n, (ssize_t)(cap - dst.size())));
        } else if (i == 0) {
          overlong = true;
        }
      }
    }
  }

  if (timed_out) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  ::kill(-pid, SIGKILL);  // reap any grandchildren the program spawned

  int exec_errno = 0;
  if (::read(exec_pipe.fds[0], &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
    outcome.status = ExecStatus::SandboxError;
    outcome.stderr_text =
        "cannot start interpreter '" + config_.interpreter + "': " + std::strerror(exec_errno);
    return finish(outcome);
  }

  outcome.stderr_text = err_buf;

  if (timed_out) {
    outcome.status = ExecStatus::Timeout;
    outcome.stdout_text = out_buf;
    finish(outcome);
    if (outcome.duration < policy.wall_timeout) outcome.duration = policy.wall_timeout;
    return outcome;
  }

  if (overlong) {
    outcome.status = ExecStatus::SandboxError;
    outcome.stderr_text += "\nstdout exceeded the capture cap";
    return finish(outcome);
  }

  // payload framing: \n <sentinel>:BEGIN\n <json>\n <sentinel>:END\n
  const std::string open_marker = sentinel + ":BEGIN\n";
  const std::string close_marker = sentinel + ":END";
  std::size_t open_at = out_buf.rfind(open_marker);
  std::size_t close_at = out_buf.rfind(close_marker);
  if (open_at == std::string::npos || close_at == std::string::npos || close_at <= open_at) {
    if (WIFEXITED(status) && WEXITSTATUS(status) == 0) {
      outcome.status = ExecStatus::SandboxError;
      outcome.stderr_text += "\nharness produced no result payload";
    } else {
      outcome.status = ExecStatus::RuntimeError;
      if (WIFSIGNALED(status)) {
        outcome.stderr_text +=
            "\ninterpreter killed by signal " + std::to_string(WTERMSIG(status));
      }
    }
    outcome.stdout_text = out_buf;
    return finish(outcome);
  }

  outcome.stdout_text = out_buf.substr(0, open_at);
  if (!outcome.stdout_text.empty() && outcome.stdout_text.back() == '\n') {
    outcome.stdout_text.pop_back();  // the framing newline the harness added
  }
  std::string payload_text =
      out_buf.substr(open_at + open_marker.size(), close_at - open_at - open_marker.size());

  json payload;
  try {
    payload = json::parse(payload_text);
  } catch (const json::exception&) {
    outcome.status = ExecStatus::SandboxError;
    outcome.stderr_text += "\nharness payload is not valid JSON";
    return finish(outcome);
  }

  const std::string st = payload.value("status", "sandbox_error");
  outcome.status = exec_status_from_string(st).value_or(ExecStatus::SandboxError);
  outcome.value_repr = payload.value("repr", "");
  if (outcome.status == ExecStatus::Ok) {
    if (payload.contains("value") && !payload["value"].is_null()) {
      outcome.value = answer_from_payload(payload["value"]);
    } else {
      outcome.status = ExecStatus::NoAnswer;
    }
  }
  return finish(outcome);
}

}  // namespace pal::runtime
