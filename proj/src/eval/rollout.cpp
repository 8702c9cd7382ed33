#include "svsp/eval/rollout.hpp"

#include <cmath>
#include <fstream>
#include <memory>

#include "core/json_util.hpp"
#include "svsp/core/dataset.hpp"
#include "svsp/core/error.hpp"
#include "svsp/core/parallel.hpp"

namespace svsp {
namespace {

struct EpisodeResult {
  double total = 0.0;
  std::size_t steps = 0;
  std::vector<std::size_t> usage;
  bool ok = false;
  std::string error;
};

void check_dims(const EnvSpec& spec, const DistilledPolicy& policy) {
  if (spec.state_dim != policy.state_dim || spec.action_dim != policy.action_dim)
    throw InputError("policy is " + std::to_string(policy.state_dim) + "x" + std::to_string(policy.action_dim) +
                     " but the environment is " + std::to_string(spec.state_dim) + "x" +
                     std::to_string(spec.action_dim));
}

EpisodeResult run_episode(Environment& env, const DistilledPolicy& policy, std::uint64_t seed) {
  EpisodeResult r;
  r.usage.assign(policy.node_count(), 0);
  try {
    check_dims(env.spec(), policy);
    Vector obs = env.reset(seed);
    // Guards against environments that never signal the end.
    const std::size_t limit = env.spec().max_steps;
    while (r.steps < limit) {
      const Routed routed = route(policy, obs);
      ++r.usage[routed.node];
      StepResult s = env.step(routed.action);
      r.total += s.reward;
      ++r.steps;
      obs = std::move(s.observation);
      if (s.done()) break;
    }
    r.ok = true;
  } catch (const std::exception& e) {
    r.error = "episode seed " + std::to_string(seed) + ": " + e.what();
  }
  return r;
}

EvalReport assemble(const DistilledPolicy& policy, std::size_t episodes, std::uint64_t base_seed,
                    const std::vector<EpisodeResult>& results) {
  EvalReport report;
  report.episodes = episodes;
  report.base_seed = base_seed;
  report.subpolicy_count = policy.node_count();
  report.node_usage.assign(policy.node_count(), 0);
  for (const auto& r : results) {
    if (!r.ok) {
      report.valid = false;
      report.error = r.error;
      break;
    }
    report.episode_returns.push_back(r.total);
    report.episode_steps.push_back(r.steps);
    for (std::size_t k = 0; k < r.usage.size(); ++k) report.node_usage[k] += r.usage[k];
  }
  summarize(report);
  return report;
}

}  // namespace

void summarize(EvalReport& report) {
  const auto& x = report.episode_returns;
  const double n = static_cast<double>(x.size());
  report.mean = 0.0;
  report.std = 0.0;
  if (x.empty()) return;
  for (double v : x) report.mean += v;
  report.mean /= n;
  if (x.size() < 2) return;
  double ss = 0.0;
  for (double v : x) ss += (v - report.mean) * (v - report.mean);
  report.std = std::sqrt(ss / (n - 1.0));
}

EvalReport rollout(const EnvFactory& make_env, const DistilledPolicy& policy, std::size_t episodes,
                   std::uint64_t base_seed, int jobs) {
  policy.validate();
  ScopedThreads threads(jobs);
  std::vector<EpisodeResult> results(episodes);
  const auto n = static_cast<std::ptrdiff_t>(episodes);
#pragma omp parallel
  {
    std::unique_ptr<Environment> env;
    std::string env_error;
    try {
      env = make_env();
    } catch (const std::exception& e) {
      env_error = e.what();
    }
#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t e = 0; e < n; ++e) {
      const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(e);
      if (!env) {
        results[e].error = "episode seed " + std::to_string(seed) + ": cannot create environment: " + env_error;
        continue;
      }
      results[e] = run_episode(*env, policy, seed);
    }
  }
  return assemble(policy, episodes, base_seed, results);
}

namespace serial {

EvalReport rollout(Environment& env, const DistilledPolicy& policy, std::size_t episodes, std::uint64_t base_seed) {
  policy.validate();
  std::vector<EpisodeResult> results;
  for (std::size_t e = 0; e < episodes; ++e) {
    results.push_back(run_episode(env, policy, base_seed + e));
    if (!results.back().ok) break;
  }
  return assemble(policy, episodes, base_seed, results);
}

}  // namespace serial

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  detail::ordered_json doc;
  doc["valid"] = report.valid;
  if (!report.valid) doc["error"] = report.error;
  doc["episodes"] = report.episodes;
  doc["completed_episodes"] = report.episode_returns.size();
  doc["base_seed"] = report.base_seed;
  doc["mean_return"] = report.mean;
  doc["std_return"] = report.std;
  doc["subpolicy_count"] = report.subpolicy_count;
  doc["node_usage"] = report.node_usage;
  doc["episode_returns"] = report.episode_returns;
  detail::write_text(path, doc.dump(2) + "\n", "report");
}

void save_episode_table(const EvalReport& report, const std::filesystem::path& path) {
  std::string out = "episode,seed,return,steps\n";
  for (std::size_t e = 0; e < report.episode_returns.size(); ++e)
    out += std::to_string(e) + "," + std::to_string(report.base_seed + e) + "," +
           format_double(report.episode_returns[e]) + "," + std::to_string(report.episode_steps[e]) + "\n";
  detail::write_text(path, out, "episode table");
}

}  // namespace svsp
