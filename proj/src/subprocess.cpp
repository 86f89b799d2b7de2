#include "pgnet/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>

#include "pgnet/util.hpp"

namespace pgnet {

ExecResult run_process(const std::string& command, const std::string& input) {
  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
    fail("exec: pipe() failed: ", std::strerror(errno));

  const pid_t pid = fork();
  if (pid < 0) fail("exec: fork() failed: ", std::strerror(errno));

  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0],
                   err_pipe[1]})
      close(fd);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);
  signal(SIGPIPE, SIG_IGN);

  ExecResult res;
  size_t written = 0;
  int in_fd = in_pipe[1], out_fd = out_pipe[0], err_fd = err_pipe[0];
  fcntl(in_fd, F_SETFL, O_NONBLOCK);

  while (out_fd >= 0 || err_fd >= 0 || in_fd >= 0) {
    struct pollfd fds[3];
    int n = 0;
    int ix_in = -1, ix_out = -1, ix_err = -1;
    if (in_fd >= 0) {
      fds[n] = {in_fd, POLLOUT, 0};
      ix_in = n++;
    }
    if (out_fd >= 0) {
      fds[n] = {out_fd, POLLIN, 0};
      ix_out = n++;
    }
    if (err_fd >= 0) {
      fds[n] = {err_fd, POLLIN, 0};
      ix_err = n++;
    }
    if (poll(fds, static_cast<nfds_t>(n), -1) < 0) {
      if (errno == EINTR) continue;
      fail("exec: poll() failed: ", std::strerror(errno));
    }

    if (ix_in >= 0 && (fds[ix_in].revents & (POLLOUT | POLLERR | POLLHUP))) {
      if (written < input.size() && !(fds[ix_in].revents & (POLLERR | POLLHUP))) {
        ssize_t w = write(in_fd, input.data() + written, input.size() - written);
        if (w > 0) written += static_cast<size_t>(w);
        else if (w < 0 && errno != EAGAIN && errno != EINTR) written = input.size();
      } else {
        written = input.size();
      }
      if (written >= input.size()) {
        close(in_fd);
        in_fd = -1;
      }
    }
    auto drain = [](int& fd, std::string& sink) {
      char buf[4096];
      ssize_t r = read(fd, buf, sizeof(buf));
      if (r > 0) {
        sink.append(buf, static_cast<size_t>(r));
      } else if (r == 0 || (r < 0 && errno != EAGAIN && errno != EINTR)) {
        close(fd);
        fd = -1;
      }
    };
    if (ix_out >= 0 && (fds[ix_out].revents & (POLLIN | POLLHUP | POLLERR)))
      drain(out_fd, res.out);
    if (ix_err >= 0 && (fds[ix_err].revents & (POLLIN | POLLHUP | POLLERR)))
      drain(err_fd, res.err);
  }

  int wstatus = 0;
  if (waitpid(pid, &wstatus, 0) < 0)
    fail("exec: waitpid() failed: ", std::strerror(errno));
  res.status = WIFEXITED(wstatus) ? WEXITSTATUS(wstatus) : 128 + WTERMSIG(wstatus);
  return res;
}

}  // namespace pgnet
