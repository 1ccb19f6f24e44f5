#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <sstream>
#include <thread>

#include "latentplan/error.hpp"
#include "latentplan/match.hpp"

namespace lp::eval {

using chess::Move;

UciProcessPlayer::UciProcessPlayer(std::string command, std::vector<std::string> options,
                                   int response_timeout_ms)
    : command_(std::move(command)),
      options_(std::move(options)),
      response_timeout_ms_(response_timeout_ms),
      name_(command_) {
  for (const auto& o : options_)
    if (o.find('=') == std::string::npos)
      throw Error(ErrorCode::kConfig, "engine option '" + o + "' is not Name=value");
  launch();
}

UciProcessPlayer::~UciProcessPlayer() { shutdown(); }

void UciProcessPlayer::launch() {
  int sv[2];
  // A socket pair lets send() use MSG_NOSIGNAL, so a dead child cannot
  // SIGPIPE us.
  if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
    throw Error(ErrorCode::kSetup, std::string("socketpair: ") + std::strerror(errno));
  pid_t pid = fork();
  if (pid < 0) {
    close(sv[0]);
    close(sv[1]);
    throw Error(ErrorCode::kSetup, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    dup2(sv[1], 0);
    dup2(sv[1], 1);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(sv[1]);
  pid_ = pid;
  fd_ = sv[0];
  buffer_.clear();
  try {
    send("uci");
    for (;;) {
      std::string line = read_line(response_timeout_ms_);
      if (line.rfind("id name ", 0) == 0) name_ = line.substr(8);
      if (line == "uciok") break;
    }
    for (const auto& o : options_) {
      auto eq = o.find('=');
      send("setoption name " + o.substr(0, eq) + " value " + o.substr(eq + 1));
    }
    send("isready");
    wait_for("readyok", response_timeout_ms_);
  } catch (const PlayerFailure& e) {
    shutdown();
    throw Error(ErrorCode::kSetup, "opponent '" + command_ + "' failed to start: " + e.what());
  }
}

void UciProcessPlayer::shutdown() {
  if (fd_ >= 0) {
    ::send(fd_, "quit\n", 5, MSG_NOSIGNAL);
    close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    for (int i = 0; i < 100; ++i) {
      if (waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

void UciProcessPlayer::send(const std::string& line) {
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw PlayerFailure("write failed: " + std::string(std::strerror(errno)));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string UciProcessPlayer::read_line(int timeout_ms) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw PlayerFailure("timed out");
    pollfd p{fd_, POLLIN, 0};
    int r = poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) throw PlayerFailure("poll failed");
    if (r == 0) continue;
    char chunk[4096];
    ssize_t n = recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw PlayerFailure("process exited");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string UciProcessPlayer::wait_for(const std::string& prefix, int timeout_ms) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    std::string line = read_line(static_cast<int>(std::max<long>(0, left.count())));
    if (line.rfind(prefix, 0) == 0) return line;
  }
}

void UciProcessPlayer::new_game() {
  if (fd_ < 0) {
    launch();
    return;
  }
  try {
    send("ucinewgame");
    send("isready");
    wait_for("readyok", response_timeout_ms_);
  } catch (const PlayerFailure&) {
    shutdown();
    launch();
  }
}

Move UciProcessPlayer::choose(const GameContext& ctx) {
  if (fd_ < 0) throw PlayerFailure("engine is not running");
  try {
    std::ostringstream pos;
    if (ctx.start == chess::Position::start()) pos << "position startpos";
    else pos << "position fen " << ctx.start.fen();
    if (!ctx.moves.empty()) {
      pos << " moves";
      for (Move m : ctx.moves) pos << ' ' << chess::to_uci(m);
    }
    send(pos.str());
    send("go movetime " + std::to_string(ctx.movetime_ms));
    std::string line = wait_for("bestmove", ctx.movetime_ms + response_timeout_ms_);
    std::istringstream in(line);
    std::string word, text;
    in >> word >> text;
    auto m = chess::parse_uci(ctx.position, text);
    if (!m) {
      // Report the move as given; the caller forfeits on illegality.
      if (text.size() >= 4 && text != "0000") {
        auto sq = [](char f, char r) -> int {
          if (f < 'a' || f > 'h' || r < '1' || r > '8') return -1;
          return (r - '1') * 8 + (f - 'a');
        };
        int from = sq(text[0], text[1]), to = sq(text[2], text[3]);
        if (from >= 0 && to >= 0)
          return Move{static_cast<chess::Square>(from), static_cast<chess::Square>(to)};
      }
      throw PlayerFailure("unparseable bestmove '" + text + "'");
    }
    return *m;
  } catch (const PlayerFailure&) {
    shutdown();
    throw;
  }
}

}  // namespace lp::eval
