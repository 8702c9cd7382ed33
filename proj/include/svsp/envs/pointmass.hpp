#pragma once

#include "svsp/envs/environment.hpp"

namespace svsp {

constexpr double kPointMassGain = 0.1;
constexpr std::size_t kPointMassSteps = 200;

// x' = clamp(x + 0.1·a) into [-1, 1] per dimension.
Vector point_mass_next(std::span<const double> state, std::span<const double> action);

// Point mass on [-1,1]^d, actions in [-1,1]^d, reward -‖x'‖².
class PointMassEnv final : public Environment {
 public:
  explicit PointMassEnv(std::size_t dims = 1, std::size_t max_steps = kPointMassSteps);

  const EnvSpec& spec() const override { return spec_; }
  Vector reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;

 private:
  EnvSpec spec_;
  Vector state_;
  std::size_t t_ = 0;
  bool running_ = false;
};

}  // namespace svsp
