#pragma once

#include <sys/types.h>

#include <cstdio>
#include <string>

#include "svsp/envs/environment.hpp"

namespace svsp {

// Client for an environment served by a child process over newline-delimited
// JSON on its stdin/stdout. The command runs under /bin/sh -c.
class BridgeEnv final : public Environment {
 public:
  explicit BridgeEnv(const std::string& command);
  ~BridgeEnv() override;
  BridgeEnv(const BridgeEnv&) = delete;
  BridgeEnv& operator=(const BridgeEnv&) = delete;

  const EnvSpec& spec() const override { return spec_; }
  Vector reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  // Sends close and reaps the child. Called by the destructor.
  void close();

 private:
  std::string request(const std::string& line, const char* cmd);

  std::string command_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  std::FILE* from_child_ = nullptr;
  EnvSpec spec_;
  std::size_t t_ = 0;
  bool running_ = false;
};

}  // namespace svsp
