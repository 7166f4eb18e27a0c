#include "subprocess.hpp"

#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>

#include "mmeval/error.hpp"

namespace mm {

namespace {

struct Pipe {
  int fds[2] = {-1, -1};
  Pipe() {
    if (::pipe(fds) != 0) throw IoError("pipe() failed");
  }
  ~Pipe() {
    closeRead();
    closeWrite();
  }
  void closeRead() {
    if (fds[0] >= 0) ::close(fds[0]);
    fds[0] = -1;
  }
  void closeWrite() {
    if (fds[1] >= 0) ::close(fds[1]);
    fds[1] = -1;
  }
};

void ignoreSigpipeOnce() {
  static const bool done = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

}  // namespace

SubprocessResult runSubprocess(const std::vector<std::string>& argv, std::string_view input,
                               double timeoutSeconds) {
  if (argv.empty()) throw UsageError("subprocess command is empty");
  ignoreSigpipeOnce();

  Pipe toChild;
  Pipe fromChild;

  const pid_t pid = ::fork();
  if (pid < 0) throw IoError("fork() failed");

  if (pid == 0) {
    ::dup2(toChild.fds[0], STDIN_FILENO);
    ::dup2(fromChild.fds[1], STDOUT_FILENO);
    toChild.closeRead();
    toChild.closeWrite();
    fromChild.closeRead();
    fromChild.closeWrite();
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }

  toChild.closeRead();
  fromChild.closeWrite();

  // Feed the prompt; a child that exits early just truncates the write.
  std::size_t written = 0;
  while (written < input.size()) {
    const ssize_t n = ::write(toChild.fds[1], input.data() + written, input.size() - written);
    if (n <= 0) break;
    written += static_cast<std::size_t>(n);
  }
  toChild.closeWrite();

  SubprocessResult result;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(timeoutSeconds));
  char buf[4096];
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timedOut = true;
      ::kill(pid, SIGKILL);
      break;
    }
    const int waitMs = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
    struct pollfd pfd {
      fromChild.fds[0], POLLIN, 0
    };
    const int ready = ::poll(&pfd, 1, std::max(waitMs, 1));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (ready == 0) continue;  // re-check deadline
    const ssize_t n = ::read(fromChild.fds[0], buf, sizeof(buf));
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 0) break;  // EOF
    result.output.append(buf, static_cast<std::size_t>(n));
  }

  int status = 0;
  ::waitpid(pid, &status, 0);
  if (result.timedOut) {
    result.exitCode = -1;
  } else if (WIFEXITED(status)) {
    result.exitCode = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exitCode = 128 + WTERMSIG(status);
  }
  return result;
}

}  // namespace mm
