#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svsp/learners/subpolicy.hpp"
#include "svsp/learners/svm.hpp"
#include "svsp/nn/critic.hpp"

namespace svsp {

struct DistillConfig {
  double value_threshold = 1.0;
  int n_iteration = 10;
  std::size_t min_region_size = 32;
  double ridge_lambda = 1e-4;
  double svm_c = 1.0;
  int svm_epochs = 200;
  std::uint64_t seed = 0;
  nn::CriticMode critic_mode = nn::CriticMode::kQ1Only;
  SvmSolver svm_solver = SvmSolver::kSubgradient;

  void validate(std::size_t state_dim) const;
};

struct PartitionNode {
  std::size_t index = 0;
  LinearSubpolicy subpolicy;
  std::optional<SvmGate> gate;  // absent on the terminal node
  std::size_t train_size = 0;
  double positive_fraction = 0.0;
};

struct DistilledPolicy {
  std::vector<PartitionNode> nodes;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  Vector action_low;
  Vector action_high;
  DistillConfig config;

  std::size_t node_count() const { return nodes.size(); }
  // Checks ordering, terminal placement, and coefficient shapes.
  void validate() const;
};

struct Routed {
  Vector action;
  std::size_t node = 0;
};

// First node whose gate accepts s serves it; the terminal node takes the rest.
std::size_t route_node(const DistilledPolicy& policy, std::span<const double> state);
Routed route(const DistilledPolicy& policy, std::span<const double> state);

constexpr int kPolicyFormatVersion = 1;

std::string policy_to_json(const DistilledPolicy& policy);
DistilledPolicy policy_from_json(std::string_view text, const std::string& origin = "<memory>");
void save_policy(const DistilledPolicy& policy, const std::filesystem::path& path);
DistilledPolicy load_policy(const std::filesystem::path& path);

}  // namespace svsp
