#include "svsp/distill/policy.hpp"

#include <cmath>

#include "core/json_util.hpp"
#include "svsp/core/error.hpp"

namespace svsp {

using detail::field;
using detail::json;
using detail::ordered_json;

void DistillConfig::validate(std::size_t state_dim) const {
  if (!(value_threshold > 0.0) || !std::isfinite(value_threshold))
    throw InputError("config: value_threshold must be a positive finite number");
  if (n_iteration < 1) throw InputError("config: n_iteration must be >= 1");
  if (min_region_size < state_dim + 1)
    throw InputError("config: min_region_size " + std::to_string(min_region_size) + " is below state_dim + 1 = " +
                     std::to_string(state_dim + 1));
  if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda)) throw InputError("config: ridge_lambda must be >= 0");
  if (!(svm_c > 0.0) || !std::isfinite(svm_c)) throw InputError("config: svm_c must be positive");
  if (svm_epochs < 1) throw InputError("config: svm_epochs must be >= 1");
}

void DistilledPolicy::validate() const {
  if (nodes.empty()) throw InputError("policy has no nodes");
  if (state_dim == 0 || action_dim == 0) throw InputError("policy dimensions must be positive");
  if (action_low.size() != action_dim || action_high.size() != action_dim)
    throw InputError("policy bounds do not match action_dim");
  config.validate(state_dim);
  if (nodes.size() > static_cast<std::size_t>(std::max(config.n_iteration, 1)))
    throw InputError("policy has more nodes than n_iteration");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& node = nodes[i];
    const std::string tag = "node " + std::to_string(i);
    if (node.index != i) throw InputError(tag + ": index " + std::to_string(node.index) + " out of order");
    const bool terminal = i + 1 == nodes.size();
    if (terminal && node.gate) throw InputError("policy is missing its terminal node (last node has a gate)");
    if (!terminal && !node.gate) throw InputError(tag + ": only the last node may lack a gate");
    node.subpolicy.validate();
    if (node.subpolicy.state_dim() != state_dim || node.subpolicy.action_dim() != action_dim)
      throw InputError(tag + ": subpolicy shape does not match the policy");
    if (node.gate) {
      node.gate->validate();
      if (node.gate->dim() != state_dim) throw InputError(tag + ": gate dimension does not match state_dim");
    }
    if (!(node.positive_fraction >= 0.0 && node.positive_fraction <= 1.0))
      throw InputError(tag + ": positive_fraction outside [0, 1]");
  }
}

std::size_t route_node(const DistilledPolicy& policy, std::span<const double> state) {
  if (state.size() != policy.state_dim)
    throw InputError("route: state has " + std::to_string(state.size()) + " entries, policy expects " +
                     std::to_string(policy.state_dim));
  for (const auto& node : policy.nodes)
    if (!node.gate || node.gate->predict(state) == 1) return node.index;
  return policy.nodes.back().index;
}

Routed route(const DistilledPolicy& policy, std::span<const double> state) {
  const std::size_t node = route_node(policy, state);
  return {policy.nodes[node].subpolicy.predict(state), node};
}

std::string policy_to_json(const DistilledPolicy& policy) {
  ordered_json doc;
  doc["version"] = kPolicyFormatVersion;
  doc["state_dim"] = policy.state_dim;
  doc["action_dim"] = policy.action_dim;
  doc["bounds"] = {{"low", policy.action_low}, {"high", policy.action_high}};
  const auto& c = policy.config;
  ordered_json cfg;
  cfg["value_threshold"] = c.value_threshold;
  cfg["n_iteration"] = c.n_iteration;
  cfg["min_region_size"] = c.min_region_size;
  cfg["ridge_lambda"] = c.ridge_lambda;
  cfg["svm_c"] = c.svm_c;
  cfg["svm_epochs"] = c.svm_epochs;
  cfg["seed"] = c.seed;
  cfg["critic_mode"] = std::string(nn::to_string(c.critic_mode));
  cfg["svm_solver"] = std::string(to_string(c.svm_solver));
  doc["config"] = std::move(cfg);

  auto nodes = ordered_json::array();
  for (const auto& node : policy.nodes) {
    ordered_json jn;
    jn["index"] = node.index;
    if (node.gate) {
      jn["gate"] = {{"w", node.gate->weight},
                    {"b", node.gate->bias},
                    {"mean", node.gate->standardizer.mean},
                    {"scale", node.gate->standardizer.scale}};
    }
    jn["subpolicy"] = {{"W", detail::from_matrix(node.subpolicy.weight)}, {"b", node.subpolicy.bias}};
    jn["train_size"] = node.train_size;
    jn["positive_fraction"] = node.positive_fraction;
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump(2) + "\n";
}

DistilledPolicy policy_from_json(std::string_view text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(origin + ": " + e.what());
  }
  try {
    if (!doc.is_object()) throw InputError("policy document must be an object");
    const auto& version = field(doc, "version");
    if (!version.is_number_integer() || version.get<long long>() != kPolicyFormatVersion)
      throw InputError("unsupported policy version " + version.dump() + " (expected " +
                       std::to_string(kPolicyFormatVersion) + ")");
    DistilledPolicy p;
    p.state_dim = detail::to_count(field(doc, "state_dim"), "state_dim");
    p.action_dim = detail::to_count(field(doc, "action_dim"), "action_dim");
    const auto& bounds = field(doc, "bounds");
    p.action_low = detail::to_vector(field(bounds, "low"), "bounds.low");
    p.action_high = detail::to_vector(field(bounds, "high"), "bounds.high");

    const auto& jc = field(doc, "config");
    auto& c = p.config;
    c.value_threshold = detail::to_double(field(jc, "value_threshold"), "config.value_threshold");
    c.n_iteration = static_cast<int>(detail::to_count(field(jc, "n_iteration"), "config.n_iteration"));
    c.min_region_size = detail::to_count(field(jc, "min_region_size"), "config.min_region_size");
    c.ridge_lambda = detail::to_double(field(jc, "ridge_lambda"), "config.ridge_lambda");
    c.svm_c = detail::to_double(field(jc, "svm_c"), "config.svm_c");
    c.svm_epochs = static_cast<int>(detail::to_count(field(jc, "svm_epochs"), "config.svm_epochs"));
    c.seed = detail::to_count(field(jc, "seed"), "config.seed");
    c.critic_mode = nn::parse_critic_mode(field(jc, "critic_mode").get<std::string>());
    c.svm_solver = parse_svm_solver(field(jc, "svm_solver").get<std::string>());

    const auto& jnodes = field(doc, "nodes");
    if (!jnodes.is_array()) throw InputError("'nodes' must be an array");
    for (const auto& jn : jnodes) {
      PartitionNode node;
      node.index = detail::to_count(field(jn, "index"), "node index");
      const std::string tag = "node " + std::to_string(node.index);
      if (jn.contains("gate") && !jn["gate"].is_null()) {
        const auto& jg = jn["gate"];
        SvmGate g;
        g.weight = detail::to_vector(field(jg, "w"), tag + " gate.w");
        g.bias = detail::to_double(field(jg, "b"), tag + " gate.b");
        g.standardizer.mean = detail::to_vector(field(jg, "mean"), tag + " gate.mean");
        g.standardizer.scale = detail::to_vector(field(jg, "scale"), tag + " gate.scale");
        node.gate = std::move(g);
      }
      const auto& js = field(jn, "subpolicy");
      node.subpolicy.weight = detail::to_matrix(field(js, "W"), tag + " subpolicy.W");
      node.subpolicy.bias = detail::to_vector(field(js, "b"), tag + " subpolicy.b");
      node.subpolicy.action_low = p.action_low;
      node.subpolicy.action_high = p.action_high;
      node.train_size = detail::to_count(field(jn, "train_size"), tag + " train_size");
      node.positive_fraction = detail::to_double(field(jn, "positive_fraction"), tag + " positive_fraction");
      p.nodes.push_back(std::move(node));
    }
    p.validate();
    return p;
  } catch (const InputError& e) {
    throw InputError(origin + ": " + e.what());
  } catch (const NumericError& e) {
    throw InputError(origin + ": " + e.what());
  } catch (const json::exception& e) {
    throw InputError(origin + ": " + e.what());
  }
}

void save_policy(const DistilledPolicy& policy, const std::filesystem::path& path) {
  policy.validate();
  detail::write_text(path, policy_to_json(policy), "policy file");
}

DistilledPolicy load_policy(const std::filesystem::path& path) {
  return policy_from_json(detail::read_text(path, "policy file"), path.string());
}

}  // namespace svsp
