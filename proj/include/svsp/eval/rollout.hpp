#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "svsp/distill/policy.hpp"
#include "svsp/envs/environment.hpp"

namespace svsp {

struct EvalReport {
  std::size_t episodes = 0;  // requested
  std::uint64_t base_seed = 0;
  std::vector<double> episode_returns;  // undiscounted, completed episodes in index order
  std::vector<std::size_t> episode_steps;
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1); 0 for a single episode
  std::vector<std::size_t> node_usage;  // steps served per node
  std::size_t subpolicy_count = 0;
  bool valid = true;
  std::string error;  // first failure when !valid
};

// Episode e resets with base_seed + e. Episodes run in parallel on one
// environment per thread (`jobs` <= 0 keeps the current thread budget);
// results are identical to serial::rollout for deterministic environments.
// A failing episode stops the report at the failure: completed episodes
// before it are kept and the report is flagged invalid.
EvalReport rollout(const EnvFactory& make_env, const DistilledPolicy& policy, std::size_t episodes,
                   std::uint64_t base_seed, int jobs = 0);

namespace serial {
EvalReport rollout(Environment& env, const DistilledPolicy& policy, std::size_t episodes, std::uint64_t base_seed);
}  // namespace serial

void summarize(EvalReport& report);

void save_report(const EvalReport& report, const std::filesystem::path& path);
// Columns episode,seed,return,steps.
void save_episode_table(const EvalReport& report, const std::filesystem::path& path);

}  // namespace svsp
