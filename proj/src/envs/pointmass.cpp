#include "svsp/envs/pointmass.hpp"

#include <algorithm>

#include "svsp/core/error.hpp"
#include "svsp/core/random.hpp"

namespace svsp {

Vector point_mass_next(std::span<const double> state, std::span<const double> action) {
  Vector next(state.size());
  for (std::size_t j = 0; j < state.size(); ++j)
    next[j] = std::clamp(state[j] + kPointMassGain * action[j], -1.0, 1.0);
  return next;
}

PointMassEnv::PointMassEnv(std::size_t dims, std::size_t max_steps) {
  spec_.state_dim = dims;
  spec_.action_dim = dims;
  spec_.action_low.assign(dims, -1.0);
  spec_.action_high.assign(dims, 1.0);
  spec_.max_steps = max_steps;
  spec_.kind = "builtin:pointmass";
  spec_.validate();
}

Vector PointMassEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  state_.resize(spec_.state_dim);
  for (double& x : state_) x = rng.uniform(-1.0, 1.0);
  t_ = 0;
  running_ = true;
  return state_;
}

StepResult PointMassEnv::step(std::span<const double> action) {
  if (!running_) throw InputError("pointmass: step called before reset or after the episode ended");
  const Vector a = clamp_action(spec_, action);
  state_ = point_mass_next(state_, a);
  ++t_;
  StepResult out;
  out.observation = state_;
  out.reward = -dot(state_, state_);
  out.truncated = t_ >= spec_.max_steps;
  running_ = !out.done();
  return out;
}

}  // namespace svsp
