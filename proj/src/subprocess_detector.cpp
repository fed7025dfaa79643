#include <cerrno>
#include <csignal>
#include <cstring>
#include <iostream>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include "bbo/detectors.hpp"

namespace bbo {

namespace {

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left > 0 ? static_cast<int>(left) : 0;
}

// Returns false on timeout; errno-style failures surface as exceptions by the caller.
bool wait_ready(int fd, short events, Clock::time_point deadline) {
  for (;;) {
    pollfd p{fd, events, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) throw DetectorError(std::string("poll failed: ") + std::strerror(errno));
  }
}

}  // namespace

SubprocessDetector::SubprocessDetector(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {}

SubprocessDetector::~SubprocessDetector() { shutdown(false); }

void SubprocessDetector::spawn() {
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
    throw DetectorError(std::string("socketpair failed: ") + std::strerror(errno));
  const pid_t pid = ::fork();
  if (pid < 0) {
    const int err = errno;
    ::close(sv[0]);
    ::close(sv[1]);
    throw DetectorError(std::string("fork failed: ") + std::strerror(err));
  }
  if (pid == 0) {
    // dup2 clears close-on-exec on the new descriptors.
    ::dup2(sv[1], STDIN_FILENO);
    ::dup2(sv[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(sv[1]);
  fd_ = sv[0];
  pid_ = pid;
  ++spawns_;
}

void SubprocessDetector::shutdown(bool force) {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  if (pid_ <= 0) return;
  if (force) ::kill(pid_, SIGKILL);
  // Closing the socket is the polite stop signal; escalate after a grace period.
  const auto deadline = Clock::now() + std::chrono::seconds(2);
  for (;;) {
    const pid_t rc = ::waitpid(pid_, nullptr, WNOHANG);
    if (rc == pid_ || (rc < 0 && errno != EINTR)) break;
    if (Clock::now() >= deadline) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  pid_ = -1;
}

void SubprocessDetector::fail(const std::string& what, bool protocol) {
  std::cerr << "bbo: detector '" << command_ << "': " << what << "\n";
  shutdown(true);
  if (protocol) throw ProtocolError(what);
  throw DetectorError(what);
}

double SubprocessDetector::evaluate(const Image& image) {
  const std::string request = encode_request(image);
  if (pid_ <= 0) spawn();
  const auto deadline = Clock::now() + timeout_;

  std::size_t sent = 0;
  while (sent < request.size()) {
    if (!wait_ready(fd_, POLLOUT, deadline)) fail("timed out sending request");
    const ssize_t n = ::send(fd_, request.data() + sent, request.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      fail(std::string("send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }

  unsigned char reply[4];
  std::size_t got = 0;
  while (got < sizeof reply) {
    if (!wait_ready(fd_, POLLIN, deadline)) fail("timed out waiting for response");
    const ssize_t n = ::recv(fd_, reply + got, sizeof reply - got, 0);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      fail(std::string("recv failed: ") + std::strerror(errno));
    }
    if (n == 0) fail("detector closed the connection after " + std::to_string(got) + " response bytes");
    got += static_cast<std::size_t>(n);
  }

  try {
    return decode_response(reply);
  } catch (const ProtocolError& e) {
    fail(e.what(), true);
  }
}

}  // namespace bbo
