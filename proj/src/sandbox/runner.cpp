#include "heurgen/sandbox/runner.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <thread>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"
#include "heurgen/common/text.hpp"
#include "heurgen/problems/suite.hpp"

extern char** environ;

namespace heurgen::sandbox {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string_view to_string(Status status) {
  switch (status) {
    case Status::kOk: return "ok";
    case Status::kCompileError: return "compile_error";
    case Status::kRuntimeError: return "runtime_error";
    case Status::kConstraintViolation: return "constraint_violation";
    case Status::kTimeout: return "timeout";
    case Status::kProtocolError: return "protocol_error";
  }
  return "protocol_error";
}

std::string EvaluationReport::error_message() const {
  switch (status) {
    case Status::kOk: return {};
    case Status::kConstraintViolation: return fmt::format("constraint violation: {}", details);
    case Status::kTimeout: return fmt::format("timeout: {}", details);
    case Status::kProtocolError: return fmt::format("protocol error: {}\n{}", details, stderr_tail);
    default: return stderr_tail.empty() ? details : stderr_tail;
  }
}

nlohmann::json to_json(const EvaluationReport& report) {
  return {{"status", to_string(report.status)},
          {"objective", report.objective ? nlohmann::json(*report.objective) : nlohmann::json(nullptr)},
          {"solution", report.solution ? *report.solution : nlohmann::json(nullptr)},
          {"wall_ms", report.wall_ms},
          {"exit_code", report.exit_code},
          {"details", report.details},
          {"stderr_tail", report.stderr_tail},
          {"stdout_tail", report.stdout_tail}};
}

namespace {

/// Owns a mkdtemp workspace.
class Workspace {
 public:
  explicit Workspace(const fs::path& root) {
    std::string pattern = (root / "heurgen-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) {
      throw Error(ErrorCode::kSandboxSetupFailure,
                  fmt::format("mkdtemp under {}: {}", root.string(), std::strerror(errno)));
    }
    path_ = pattern;
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Fd& operator=(Fd&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read;
  Fd write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::kSandboxSetupFailure, fmt::format("pipe2: {}", std::strerror(errno)));
  }
  return {Fd(fds[0]), Fd(fds[1])};
}

std::vector<std::string> build_env(const SandboxConfig& config) {
  std::vector<std::string> env;
  for (const auto& name : config.env_allowlist) {
    if (const char* v = std::getenv(name.c_str())) env.push_back(name + "=" + v);
  }
  for (const auto& [k, v] : config.extra_env) env.push_back(k + "=" + v);
  return env;
}

std::vector<std::string> build_argv(const SandboxConfig& config, const fs::path& program_path) {
  std::vector<std::string> argv = config.wrapper;
  for (const auto& arg : config.interpreter_command) {
    std::string expanded = arg;
    auto pos = expanded.find("{program_path}");
    if (pos != std::string::npos) expanded.replace(pos, 14, program_path.string());
    argv.push_back(expanded);
  }
  if (argv.empty()) throw Error(ErrorCode::kSandboxSetupFailure, "empty interpreter command");
  return argv;
}

std::vector<char*> c_strings(std::vector<std::string>& items) {
  std::vector<char*> out;
  for (auto& s : items) out.push_back(s.data());
  out.push_back(nullptr);
  return out;
}

struct ProcessResult {
  std::string out;
  std::string err;
  int exit_code = 0;
  bool signaled = false;
  bool killed = false;
  std::int64_t wall_ms = 0;
};

ProcessResult execute(const std::vector<std::string>& argv_in, const std::vector<std::string>& env_in,
                      const fs::path& cwd, const std::string& input, double limit_s, const SandboxConfig& config) {
  auto argv_store = argv_in;
  auto env_store = env_in;
  auto argv = c_strings(argv_store);
  auto envp = c_strings(env_store);
  const std::string cwd_str = cwd.string();
  const rlim_t mem_bytes = static_cast<rlim_t>(config.memory_limit_mb) << 20;

  Pipe in = make_pipe();
  Pipe out = make_pipe();
  Pipe err = make_pipe();

  const auto start = Clock::now();
  pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::kSandboxSetupFailure, fmt::format("fork: {}", std::strerror(errno)));
  if (pid == 0) {
    // child: async-signal-safe calls only
    ::setpgid(0, 0);
    ::dup2(in.read.get(), STDIN_FILENO);
    ::dup2(out.write.get(), STDOUT_FILENO);
    ::dup2(err.write.get(), STDERR_FILENO);
    if (::chdir(cwd_str.c_str()) != 0) ::_exit(126);
    if (mem_bytes > 0) {
      struct rlimit lim {mem_bytes, mem_bytes};
      ::setrlimit(RLIMIT_AS, &lim);
    }
    ::execvpe(argv[0], argv.data(), envp.data());
    const char msg[] = "sandbox: exec failed\n";
    [[maybe_unused]] auto w = ::write(STDERR_FILENO, msg, sizeof(msg) - 1);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  in.read.reset();
  out.write.reset();
  err.write.reset();

  ::fcntl(in.write.get(), F_SETFL, O_NONBLOCK);
  ProcessResult result;
  std::size_t written = 0;
  if (input.empty()) in.write.reset();

  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(limit_s));
  bool out_open = true;
  bool err_open = true;
  bool exited = false;
  int status = 0;
  char buf[65536];

  auto capture = [&](std::string& sink, const char* data, std::size_t n) {
    if (sink.size() < config.max_capture_bytes) sink.append(data, std::min(n, config.max_capture_bytes - sink.size()));
  };

  Clock::time_point drain_deadline = deadline;
  while (true) {
    if (!exited) {
      pid_t r = ::waitpid(pid, &status, WNOHANG);
      if (r == pid) {
        exited = true;
        // background grandchildren may keep the pipes open
        drain_deadline = std::min(deadline, Clock::now() + std::chrono::milliseconds(500));
      }
    }
    if (exited && !out_open && !err_open) break;
    auto now = Clock::now();
    if (exited && now >= drain_deadline) break;
    if (now >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      if (!exited) {
        ::waitpid(pid, &status, 0);
        exited = true;
        result.killed = true;
      }
      break;
    }
    std::vector<pollfd> fds;
    if (in.write.get() >= 0) fds.push_back({in.write.get(), POLLOUT, 0});
    if (out_open) fds.push_back({out.read.get(), POLLIN, 0});
    if (err_open) fds.push_back({err.read.get(), POLLIN, 0});
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    int wait_ms = static_cast<int>(std::clamp<std::int64_t>(remaining, 1, exited ? 10 : 20));
    if (fds.empty()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(wait_ms));
      continue;
    }
    int ready = ::poll(fds.data(), fds.size(), wait_ms);
    if (ready < 0 && errno != EINTR) break;
    for (const auto& p : fds) {
      if (p.revents == 0) continue;
      if (p.fd == in.write.get()) {
        if (p.revents & (POLLERR | POLLHUP)) {
          in.write.reset();
          continue;
        }
        ssize_t n = ::write(p.fd, input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if (written >= input.size() || (n < 0 && errno != EAGAIN)) in.write.reset();
      } else {
        ssize_t n = ::read(p.fd, buf, sizeof(buf));
        bool is_out = p.fd == out.read.get();
        if (n > 0) {
          capture(is_out ? result.out : result.err, buf, static_cast<std::size_t>(n));
        } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
          (is_out ? out_open : err_open) = false;
        }
      }
    }
  }
  // orphaned grandchildren must not outlive the run
  ::kill(-pid, SIGKILL);
  result.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.signaled = true;
    result.exit_code = 128 + WTERMSIG(status);
  }
  return result;
}

std::optional<nlohmann::json> final_document(const std::string& out) {
  auto lines = text::split_lines(out);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    auto t = text::trim(*it);
    if (t.empty() || t.front() != '{') continue;
    auto doc = nlohmann::json::parse(t, nullptr, false);
    if (!doc.is_discarded() && doc.is_object() && doc.contains("solution")) return doc;
  }
  return std::nullopt;
}

bool has_compile_diagnostic(const std::string& err, const SandboxConfig& config) {
  return std::any_of(config.compile_diagnostics.begin(), config.compile_diagnostics.end(),
                     [&](const std::string& d) { return text::contains(err, d); });
}

}  // namespace

EvaluationReport run(const std::string& program, const problems::ProblemInstance& instance, double max_time_s,
                     const SandboxConfig& config) {
  if (program.empty()) throw Error(ErrorCode::kInvalidArgument, "empty program");
  Workspace ws(config.workspace_root);
  const fs::path program_path = ws.path() / "candidate.py";
  {
    std::ofstream f(program_path, std::ios::binary);
    f << program;
    if (!f) throw Error(ErrorCode::kSandboxSetupFailure, "cannot write candidate program");
  }
  const double limit_s = std::max(0.0, max_time_s) + config.grace_s;
  const std::string input = problems::to_json(instance).dump();
  auto proc = execute(build_argv(config, program_path), build_env(config), ws.path(), input, limit_s, config);

  EvaluationReport report;
  report.wall_ms = proc.wall_ms;
  report.exit_code = proc.exit_code;
  report.stdout_tail = text::tail(proc.out, config.tail_bytes);
  report.stderr_tail = text::tail(proc.err, config.tail_bytes);
  const auto limit_ms = static_cast<std::int64_t>(limit_s * 1000.0);

  if (proc.killed) {
    report.status = Status::kTimeout;
    report.details = fmt::format("killed after {} ms (limit {} s)", proc.wall_ms, limit_s);
    return report;
  }
  if (proc.exit_code != 0) {
    const bool silent = text::trim(proc.out).empty();
    report.status = silent && has_compile_diagnostic(proc.err, config) ? Status::kCompileError
                                                                        : Status::kRuntimeError;
    report.details = fmt::format("exit code {}", proc.exit_code);
    return report;
  }
  auto doc = final_document(proc.out);
  if (!doc) {
    report.status = Status::kProtocolError;
    report.details = "no final {\"solution\": ...} document on stdout";
    return report;
  }
  report.solution = doc->at("solution");
  auto check = problems::validate_payload(instance, *report.solution);
  if (!check.ok) {
    report.status = Status::kConstraintViolation;
    report.details = check.details;
    return report;
  }
  report.objective = problems::objective(
      instance, problems::solution_from_json(problems::kind_of(instance), *report.solution));
  if (report.wall_ms > limit_ms) {
    report.status = Status::kTimeout;
    report.details = fmt::format("finished after {} ms, limit {} s", proc.wall_ms, limit_s);
    return report;
  }
  report.status = Status::kOk;
  return report;
}

std::vector<EvaluationReport> run_batch(const std::string& program,
                                        const std::vector<problems::ProblemInstance>& instances,
                                        double max_time_s, const SandboxConfig& config, bool short_circuit) {
  if (instances.empty()) throw Error(ErrorCode::kInvalidArgument, "run_batch needs at least one instance");
  const std::size_t workers = static_cast<std::size_t>(std::max(1, config.workers));
  std::vector<EvaluationReport> reports;
  if (workers == 1) {
    for (const auto& inst : instances) {
      reports.push_back(run(program, inst, max_time_s, config));
      if (short_circuit && !reports.back().ok()) break;
    }
    return reports;
  }
  reports.resize(instances.size());
  std::vector<std::exception_ptr> errors(instances.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      try {
        reports[i] = run(program, instances[i], max_time_s, config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, instances.size()); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  if (short_circuit) {
    auto first_bad = std::find_if(reports.begin(), reports.end(), [](const auto& r) { return !r.ok(); });
    if (first_bad != reports.end()) reports.erase(first_bad + 1, reports.end());
  }
  return reports;
}

}  // namespace heurgen::sandbox
