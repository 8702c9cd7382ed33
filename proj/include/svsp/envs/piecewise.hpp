#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "svsp/core/dataset.hpp"
#include "svsp/envs/environment.hpp"
#include "svsp/learners/subpolicy.hpp"
#include "svsp/learners/svm.hpp"
#include "svsp/nn/critic.hpp"

namespace svsp {

// Piecewise-linear teacher on [-1,1]^d. Gate k accepts region k; states
// no gate accepts belong to the last region, so the teacher is itself a
// gated chain.
struct PiecewiseTeacher {
  std::vector<SvmGate> gates;          // K - 1
  std::vector<LinearSubpolicy> maps;   // K
  std::uint64_t seed = 0;

  std::size_t regions() const { return maps.size(); }
  std::size_t state_dim() const { return maps.front().state_dim(); }
  std::size_t action_dim() const { return maps.front().action_dim(); }

  void validate() const;
  std::size_t region(std::span<const double> state) const;
  Vector action(std::span<const double> state) const;
};

// Samples K-1 halfspace gates (each taking ~90% of the probes the earlier
// gates left, the ~10% cap descends) and K affine maps with bounded, well-separated intercepts.
PiecewiseTeacher make_piecewise_teacher(std::size_t regions, std::size_t dims, std::uint64_t seed);

// Q(s,a) = 1 - ‖a - π*(s)‖², V(s) = Q(s, π*(s)) = 1.
class AnalyticCritic final : public nn::CriticOracle {
 public:
  explicit AnalyticCritic(std::shared_ptr<const PiecewiseTeacher> teacher);

  double q_value(std::span<const double> state, std::span<const double> action) const override;
  double state_value(std::span<const double> state, std::span<const double> fallback_action) const override;
  void check_dims(std::size_t state_dim, std::size_t action_dim) const override;

  const PiecewiseTeacher& teacher() const { return *teacher_; }

 private:
  std::shared_ptr<const PiecewiseTeacher> teacher_;
};

// Point-mass dynamics with reward r(s,a) = 1 - ‖a - π*(s)‖².
class PiecewiseEnv final : public Environment {
 public:
  explicit PiecewiseEnv(std::shared_ptr<const PiecewiseTeacher> teacher, std::size_t max_steps = 200);

  const EnvSpec& spec() const override { return spec_; }
  Vector reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;

 private:
  std::shared_ptr<const PiecewiseTeacher> teacher_;
  EnvSpec spec_;
  Vector state_;
  std::size_t t_ = 0;
  bool running_ = false;
};

struct PiecewiseInstance {
  std::shared_ptr<const PiecewiseTeacher> teacher;
  std::unique_ptr<Environment> env;
  std::shared_ptr<const AnalyticCritic> critic;
};

PiecewiseInstance make_piecewise_env(std::size_t regions, std::size_t dims, std::uint64_t seed);
PiecewiseInstance instantiate(std::shared_ptr<const PiecewiseTeacher> teacher);

// Teacher-labeled states visited by a uniformly random behavior policy:
// each row stores (x, π*(x)); episode e starts from a seed derived from (seed, e).
TransitionDataset synth_dataset(const PiecewiseTeacher& teacher, std::size_t episodes, std::uint64_t seed,
                                std::size_t steps = 200);

// Self-contained JSON descriptor ("kind": "piecewise") with every gate and map.
void save_piecewise(const PiecewiseTeacher& teacher, const std::filesystem::path& path);
PiecewiseTeacher load_piecewise(const std::filesystem::path& path);
bool is_piecewise_descriptor(const std::filesystem::path& path);

}  // namespace svsp
