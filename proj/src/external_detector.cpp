#include "ganeye/external_detector.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <optional>

#include "ganeye/error.hpp"
#include "ganeye/log.hpp"

namespace ganeye {
namespace {

class Subprocess {
 public:
  explicit Subprocess(const std::vector<std::string>& argv) {
    if (argv.empty()) throw SpawnError("detector command is empty");
    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (pipe2(in_pipe, O_CLOEXEC) != 0 || pipe2(out_pipe, O_CLOEXEC) != 0 || pipe2(err_pipe, O_CLOEXEC) != 0) {
      throw SpawnError(std::string("pipe: ") + std::strerror(errno));
    }
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    pid_ = fork();
    if (pid_ < 0) throw SpawnError(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      execvp(args[0], args.data());
      const int code = errno;
      [[maybe_unused]] auto n = write(err_pipe[1], &code, sizeof code);
      _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[1]);
    in_fd_ = in_pipe[1];
    out_fd_ = out_pipe[0];

    int code = 0;
    const auto n = read(err_pipe[0], &code, sizeof code);
    close(err_pipe[0]);
    if (n == static_cast<ssize_t>(sizeof code)) {
      waitpid(pid_, nullptr, 0);
      pid_ = -1;
      throw SpawnError("cannot execute " + argv[0] + ": " + std::strerror(code));
    }
  }

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  ~Subprocess() {
    close_input();
    if (out_fd_ >= 0) close(out_fd_);
    if (pid_ > 0) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
  }

  void write_line(const std::string& line) {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
      const auto n = write(in_fd_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("detector stopped accepting input: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  /// Next output line, or nullopt once `timeout` elapses without one.
  /// Throws when the detector closes its output.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
        std::string line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        return line;
      }
      if (eof_) throw ProtocolError("detector closed its output early");
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return std::nullopt;
      pollfd pfd{out_fd_, POLLIN, 0};
      const int rc = poll(&pfd, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("poll: ") + std::strerror(errno));
      }
      if (rc == 0) return std::nullopt;
      char chunk[4096];
      const auto n = read(out_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("read: ") + std::strerror(errno));
      }
      if (n == 0) {
        eof_ = true;
      } else {
        buffer_.append(chunk, static_cast<std::size_t>(n));
      }
    }
  }

  /// Everything the process writes after its input is closed.
  std::string drain() {
    char chunk[4096];
    for (;;) {
      const auto n = read(out_fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
    return std::exchange(buffer_, {});
  }

  void close_input() {
    if (in_fd_ >= 0) {
      close(in_fd_);
      in_fd_ = -1;
    }
  }

  int wait() {
    int status = 0;
    while (waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
    pid_ = -1;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  }

  void kill_now() {
    if (pid_ > 0) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

 private:
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  bool eof_ = false;
};

std::string excerpt(const std::string& s) { return s.size() > 200 ? s.substr(0, 200) + "..." : s; }

}  // namespace

ExternalDetection run_external_detector(const ExternalDetectorOptions& options,
                                        const std::vector<std::filesystem::path>& image_paths) {
  // A detector that dies mid-batch must surface as an error, not SIGPIPE.
  signal(SIGPIPE, SIG_IGN);
  ExternalDetection out;
  out.records.reserve(image_paths.size());
  std::optional<Subprocess> proc;
  proc.emplace(options.command);

  for (std::size_t i = 0; i < image_paths.size(); ++i) {
    const std::string path = std::filesystem::absolute(image_paths[i]).string();
    if (!proc) proc.emplace(options.command);
    proc->write_line(path);
    auto line = proc->read_line(options.timeout);
    if (!line) {
      out.warnings.push_back("detector timed out on " + path + "; recorded as no face");
      log::warn("{}", out.warnings.back());
      proc->kill_now();
      proc.reset();
      out.records.push_back({path, 1, 1, {}, kTimeoutDetectorTag});
      continue;
    }
    LandmarkRecord rec;
    try {
      rec = parse_landmark_record(*line, i + 1);
    } catch (const ParseError& e) {
      throw ProtocolError("detector output for input " + std::to_string(i + 1) + " (" + path +
                          ") is not a landmark record: \"" + excerpt(*line) + "\": " + e.what());
    }
    if (rec.image_id != path) {
      throw ProtocolError("detector answered for \"" + rec.image_id + "\" but input " + std::to_string(i + 1) +
                          " was \"" + path + "\"");
    }
    out.records.push_back(std::move(rec));
  }

  if (proc) {
    proc->close_input();
    const std::string extra = proc->drain();
    const int status = proc->wait();
    if (!is_blank(extra)) {
      throw ProtocolError("detector wrote output beyond the last input: \"" + excerpt(extra) + "\"");
    }
    if (status != 0) {
      throw ProtocolError("detector exited with status " + std::to_string(status));
    }
  }
  return out;
}

}  // namespace ganeye
