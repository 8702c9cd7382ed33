#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include "svsp/core/matrix.hpp"

namespace svsp {

struct EnvSpec {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  Vector action_low;
  Vector action_high;
  std::size_t max_steps = 200;
  std::string kind;  // "builtin:<name>" or "external"

  void validate() const;
};

struct StepResult {
  Vector observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;

  bool done() const { return terminated || truncated; }
};

// One stateful episode at a time. Not thread-safe; use one instance per thread.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual Vector reset(std::uint64_t seed) = 0;
  // Out-of-bound actions are clamped. Throws if no episode is running.
  virtual StepResult step(std::span<const double> action) = 0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

Vector clamp_action(const EnvSpec& spec, std::span<const double> action);

// `builtin:pointmass[:<dims>]`, `builtin:piecewise:<descriptor path>`, `bridge:<shell command>`.
EnvFactory parse_env_selector(const std::string& selector);

}  // namespace svsp
