#include "svsp/nn/critic.hpp"

#include <algorithm>
#include <string>

#include "svsp/core/error.hpp"

namespace svsp::nn {

CriticMode parse_critic_mode(std::string_view tag) {
  if (tag == "q1" || tag == "q1_only") return CriticMode::kQ1Only;
  if (tag == "min" || tag == "min_twin") return CriticMode::kMinTwin;
  throw InputError("unknown critic mode '" + std::string(tag) + "' (expected q1_only or min_twin)");
}

std::string_view to_string(CriticMode mode) {
  return mode == CriticMode::kQ1Only ? "q1_only" : "min_twin";
}

NetworkCritic::NetworkCritic(MlpNetwork q1, std::optional<MlpNetwork> q2, std::optional<MlpNetwork> actor,
                             CriticMode mode)
    : q1_(std::move(q1)), q2_(std::move(q2)), actor_(std::move(actor)), mode_(mode) {
  if (q1_.input_kind() != InputKind::kStateAction) throw InputError("critic q1 must take state_action input");
  if (q2_) {
    if (q2_->input_kind() != InputKind::kStateAction) throw InputError("critic q2 must take state_action input");
    if (q2_->input_size() != q1_.input_size()) throw InputError("twin critics have different input sizes");
  }
  if (mode_ == CriticMode::kMinTwin && !q2_) throw InputError("min_twin mode requires a second critic");
  if (actor_) {
    if (actor_->input_kind() != InputKind::kState) throw InputError("actor must take state input");
    if (actor_->input_size() + actor_->output_size() != q1_.input_size())
      throw InputError("actor dimensions do not match the critic input size");
  }
}

double NetworkCritic::q_value(std::span<const double> state, std::span<const double> action) const {
  Vector input;
  input.reserve(state.size() + action.size());
  input.insert(input.end(), state.begin(), state.end());
  input.insert(input.end(), action.begin(), action.end());
  const double q1 = q1_.forward(input)[0];
  if (mode_ == CriticMode::kQ1Only) return q1;
  return std::min(q1, q2_->forward(input)[0]);
}

double NetworkCritic::state_value(std::span<const double> state, std::span<const double> fallback_action) const {
  if (actor_) {
    const Vector action = actor_->forward(state);
    return q_value(state, action);
  }
  if (fallback_action.empty()) throw InputError("state_value: no actor exported and no fallback action given");
  return q_value(state, fallback_action);
}

void NetworkCritic::check_dims(std::size_t state_dim, std::size_t action_dim) const {
  if (q1_.input_size() != state_dim + action_dim)
    throw InputError("critic expects " + std::to_string(q1_.input_size()) + " inputs, dataset provides " +
                     std::to_string(state_dim) + " state + " + std::to_string(action_dim) + " action");
  if (actor_ && (actor_->input_size() != state_dim || actor_->output_size() != action_dim))
    throw InputError("actor dimensions do not match the dataset");
}

}  // namespace svsp::nn
