// Serial reference vs OpenMP kernel timings. Thread count follows
// OMP_NUM_THREADS; results are identical either way.
#include <benchmark/benchmark.h>

#include "svsp/core/random.hpp"
#include "svsp/core/ridge.hpp"
#include "svsp/distill/distill.hpp"
#include "svsp/distill/labeling.hpp"
#include "svsp/envs/piecewise.hpp"
#include "svsp/eval/fidelity.hpp"
#include "svsp/eval/rollout.hpp"
#include "svsp/learners/subpolicy.hpp"

namespace {

using namespace svsp;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.flat()) v = rng.normal();
  return m;
}

struct Fixture {
  std::shared_ptr<const PiecewiseTeacher> teacher;
  TransitionDataset data;
  std::shared_ptr<const AnalyticCritic> critic;
  DistilledPolicy policy;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    auto teacher = std::make_shared<const PiecewiseTeacher>(make_piecewise_teacher(3, 4, 0));
    auto data = synth_dataset(*teacher, 250, 0);
    auto critic = std::make_shared<const AnalyticCritic>(teacher);
    DistillConfig cfg;
    cfg.value_threshold = 0.95;
    auto policy = distill(data, *critic, cfg);
    return Fixture{teacher, std::move(data), critic, std::move(policy)};
  }();
  return f;
}

void BM_GramSerial(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 9, 1);
  const Matrix y = random_matrix(x.rows(), 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(serial::gram(x, y));
}
void BM_GramParallel(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 9, 1);
  const Matrix y = random_matrix(x.rows(), 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(gram(x, y));
}
BENCHMARK(BM_GramSerial)->Arg(10000)->Arg(100000);
BENCHMARK(BM_GramParallel)->Arg(10000)->Arg(100000);

void BM_LabelSerial(benchmark::State& state) {
  const auto& f = fixture();
  const Matrix pred = predict_actions(f.policy.nodes[0].subpolicy, f.data.states);
  for (auto _ : state)
    benchmark::DoNotOptimize(serial::label_region(*f.critic, f.data.states, pred, f.data.actions, 0.95));
}
void BM_LabelParallel(benchmark::State& state) {
  const auto& f = fixture();
  const Matrix pred = predict_actions(f.policy.nodes[0].subpolicy, f.data.states);
  for (auto _ : state) benchmark::DoNotOptimize(label_region(*f.critic, f.data.states, pred, f.data.actions, 0.95));
}
BENCHMARK(BM_LabelSerial);
BENCHMARK(BM_LabelParallel);

void BM_FidelitySerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(serial::fidelity(f.policy, f.data));
}
void BM_FidelityParallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(fidelity(f.policy, f.data));
}
BENCHMARK(BM_FidelitySerial);
BENCHMARK(BM_FidelityParallel);

void BM_RolloutSerial(benchmark::State& state) {
  const auto& f = fixture();
  PiecewiseEnv env(f.teacher);
  for (auto _ : state) benchmark::DoNotOptimize(serial::rollout(env, f.policy, 32, 0));
}
void BM_RolloutParallel(benchmark::State& state) {
  const auto& f = fixture();
  const auto teacher = f.teacher;
  const EnvFactory make = [teacher] { return std::make_unique<PiecewiseEnv>(teacher); };
  for (auto _ : state) benchmark::DoNotOptimize(rollout(make, f.policy, 32, 0));
}
BENCHMARK(BM_RolloutSerial);
BENCHMARK(BM_RolloutParallel);

}  // namespace

BENCHMARK_MAIN();
