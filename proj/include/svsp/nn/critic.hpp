#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "svsp/nn/mlp.hpp"

namespace svsp::nn {

enum class CriticMode { kQ1Only, kMinTwin };

CriticMode parse_critic_mode(std::string_view tag);
std::string_view to_string(CriticMode mode);

// Action-value oracle consulted when labeling regions. Implementations are
// immutable and must be safe to query concurrently.
class CriticOracle {
 public:
  virtual ~CriticOracle() = default;

  virtual double q_value(std::span<const double> state, std::span<const double> action) const = 0;

  // V(s). Uses the oracle's own actor when it has one, otherwise Q at
  // `fallback_action` (the recorded teacher action for s).
  virtual double state_value(std::span<const double> state, std::span<const double> fallback_action) const = 0;

  // Throws InputError when the oracle cannot take d_s-dim states and d_a-dim actions.
  virtual void check_dims(std::size_t state_dim, std::size_t action_dim) const = 0;
};

// Critic backed by exported networks: Q1, optional twin Q2, optional actor.
class NetworkCritic final : public CriticOracle {
 public:
  NetworkCritic(MlpNetwork q1, std::optional<MlpNetwork> q2 = std::nullopt,
                std::optional<MlpNetwork> actor = std::nullopt, CriticMode mode = CriticMode::kQ1Only);

  double q_value(std::span<const double> state, std::span<const double> action) const override;
  double state_value(std::span<const double> state, std::span<const double> fallback_action) const override;
  void check_dims(std::size_t state_dim, std::size_t action_dim) const override;

  CriticMode mode() const { return mode_; }
  bool has_actor() const { return actor_.has_value(); }

 private:
  MlpNetwork q1_;
  std::optional<MlpNetwork> q2_;
  std::optional<MlpNetwork> actor_;
  CriticMode mode_;
};

}  // namespace svsp::nn
