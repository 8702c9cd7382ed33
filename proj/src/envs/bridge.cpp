#include "svsp/envs/bridge.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

#include "core/json_util.hpp"
#include "svsp/core/error.hpp"

extern char** environ;

namespace svsp {
namespace {

using detail::json;

constexpr std::size_t kMaxShown = 200;

std::string shown(const std::string& line) {
  return line.size() <= kMaxShown ? line : line.substr(0, kMaxShown) + "...";
}

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("bridge: write to environment process failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

Vector observation(const json& doc, std::size_t dim, const std::string& line) {
  if (!doc.contains("obs")) throw ProtocolError("bridge: response has no 'obs': " + shown(line));
  Vector obs;
  try {
    obs = detail::to_vector(doc["obs"], "obs");
  } catch (const InputError& e) {
    throw ProtocolError(std::string("bridge: ") + e.what() + ": " + shown(line));
  }
  if (obs.size() != dim)
    throw ProtocolError("bridge: observation has " + std::to_string(obs.size()) + " entries, spec says " +
                        std::to_string(dim) + ": " + shown(line));
  if (!all_finite(obs)) throw ProtocolError("bridge: non-finite observation: " + shown(line));
  return obs;
}

bool flag(const json& doc, const char* key, const std::string& line) {
  if (!doc.contains(key) || !doc[key].is_boolean())
    throw ProtocolError(std::string("bridge: response needs boolean '") + key + "': " + shown(line));
  return doc[key].get<bool>();
}

}  // namespace

BridgeEnv::BridgeEnv(const std::string& command) : command_(command) {
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2], out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw ProtocolError("bridge: pipe() failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw ProtocolError("bridge: pipe() failed");
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  const char* argv[] = {"/bin/sh", "-c", command_.c_str(), nullptr};
  const int rc = posix_spawn(&pid_, "/bin/sh", &actions, nullptr, const_cast<char* const*>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    pid_ = -1;
    throw ProtocolError("bridge: cannot start '" + command_ + "': " + std::strerror(rc));
  }
  to_child_ = in_pipe[1];
  from_child_ = ::fdopen(out_pipe[0], "r");
  if (!from_child_) {
    ::close(out_pipe[0]);
    close();
    throw ProtocolError("bridge: fdopen failed");
  }

  try {
    const std::string line = request(R"({"cmd":"spec"})", "spec");
    const auto doc = json::parse(line);
    spec_.state_dim = detail::to_count(detail::field(doc, "state_dim"), "state_dim");
    spec_.action_dim = detail::to_count(detail::field(doc, "action_dim"), "action_dim");
    spec_.action_low = detail::to_vector(detail::field(doc, "action_low"), "action_low");
    spec_.action_high = detail::to_vector(detail::field(doc, "action_high"), "action_high");
    spec_.max_steps = doc.contains("max_steps") ? detail::to_count(doc["max_steps"], "max_steps") : 1000;
    spec_.kind = "external";
    spec_.validate();
  } catch (const ProtocolError&) {
    close();
    throw;
  } catch (const std::exception& e) {
    close();
    throw ProtocolError(std::string("bridge: bad spec response from '") + command_ + "': " + e.what());
  }
}

BridgeEnv::~BridgeEnv() { close(); }

void BridgeEnv::close() {
  if (to_child_ >= 0) {
    try {
      write_all(to_child_, "{\"cmd\":\"close\"}\n");
    } catch (const ProtocolError&) {
      // child already gone
    }
    ::close(to_child_);
    to_child_ = -1;
  }
  if (from_child_) {
    std::fclose(from_child_);
    from_child_ = nullptr;
  }
  if (pid_ > 0) {
    int status = 0;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    while (::waitpid(pid_, &status, WNOHANG) == 0) {
      if (std::chrono::steady_clock::now() > deadline) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    pid_ = -1;
  }
  running_ = false;
}

std::string BridgeEnv::request(const std::string& line, const char* cmd) {
  if (to_child_ < 0 || !from_child_) throw ProtocolError("bridge: environment process is closed");
  write_all(to_child_, line + "\n");
  std::string reply;
  int ch;
  while ((ch = std::fgetc(from_child_)) != EOF && ch != '\n') reply.push_back(static_cast<char>(ch));
  if (ch == EOF && reply.empty())
    throw ProtocolError(std::string("bridge: environment process closed its output during '") + cmd + "'");
  if (!reply.empty() && reply.back() == '\r') reply.pop_back();
  const auto doc = json::parse(reply, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object())
    throw ProtocolError(std::string("bridge: malformed response to '") + cmd + "': " + shown(reply));
  if (doc.contains("error"))
    throw ProtocolError(std::string("bridge: environment reported an error for '") + cmd + "': " + shown(reply));
  return reply;
}

Vector BridgeEnv::reset(std::uint64_t seed) {
  running_ = false;
  json req;
  req["cmd"] = "reset";
  req["seed"] = seed;
  const std::string line = request(req.dump(), "reset");
  Vector obs = observation(json::parse(line), spec_.state_dim, line);
  t_ = 0;
  running_ = true;
  return obs;
}

StepResult BridgeEnv::step(std::span<const double> action) {
  if (!running_) throw ProtocolError("bridge: step requested without an active episode (reset first)");
  json req;
  req["cmd"] = "step";
  req["action"] = clamp_action(spec_, action);
  running_ = false;  // any failure below aborts the episode
  const std::string line = request(req.dump(), "step");
  const auto doc = json::parse(line);
  StepResult out;
  out.observation = observation(doc, spec_.state_dim, line);
  if (!doc.contains("reward") || !doc["reward"].is_number())
    throw ProtocolError("bridge: response needs numeric 'reward': " + shown(line));
  out.reward = doc["reward"].get<double>();
  if (!std::isfinite(out.reward)) throw ProtocolError("bridge: non-finite reward: " + shown(line));
  out.terminated = flag(doc, "terminated", line);
  ++t_;
  out.truncated = flag(doc, "truncated", line) || t_ >= spec_.max_steps;
  running_ = !out.done();
  return out;
}

}  // namespace svsp
