#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

#include "svsp/distill/policy.hpp"
#include "svsp/nn/critic.hpp"

namespace svsp::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kInputError = 2, kNumericError = 3 };

// Everything a command can be configured with. Flags override values read
// from --config.
struct RunConfig {
  DistillConfig distill;
  std::filesystem::path data;
  std::filesystem::path manifest;
  std::filesystem::path critic;  // network weights or a piecewise descriptor
  std::filesystem::path critic2;
  std::filesystem::path actor;
  std::filesystem::path policy;
  std::filesystem::path out;
  std::string env;
  std::size_t episodes = 20;
  std::uint64_t base_seed = 0;
  std::size_t replicates = 20;
  int jobs = 0;
};

// A piecewise descriptor yields the analytic critic; anything else is read
// as network weight files.
std::shared_ptr<const nn::CriticOracle> load_critic(const RunConfig& config);

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace svsp::cli
