#include "svsp/distill/inspect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "svsp/core/dataset.hpp"
#include "svsp/core/error.hpp"

namespace svsp {
namespace {

std::string name_of(const std::vector<std::string>& names, char prefix, std::size_t i) {
  return i < names.size() ? names[i] : std::string(1, prefix) + std::to_string(i);
}

void coefficient_list(std::ostream& os, std::span<const double> coef, const std::vector<std::string>& names) {
  for (std::size_t i : rank_by_magnitude(coef)) os << "  " << name_of(names, 's', i) << '=' << format_double(coef[i]);
}

}  // namespace

std::vector<std::size_t> rank_by_magnitude(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(values[a]) > std::abs(values[b]); });
  return order;
}

std::size_t dominant_gate_feature(const SvmGate& gate) {
  if (gate.weight.empty()) throw InputError("gate has no coefficients");
  return rank_by_magnitude(gate.weight).front();
}

std::string inspect(const DistilledPolicy& policy, const std::vector<std::string>& feature_names,
                    const std::vector<std::string>& action_names) {
  if (!feature_names.empty() && feature_names.size() != policy.state_dim)
    throw InputError("inspect: feature name count does not match state_dim");
  if (!action_names.empty() && action_names.size() != policy.action_dim)
    throw InputError("inspect: action name count does not match action_dim");

  std::ostringstream os;
  os << "policy: " << policy.node_count() << (policy.node_count() == 1 ? " node" : " nodes") << ", state_dim "
     << policy.state_dim << ", action_dim " << policy.action_dim << ", value_threshold "
     << format_double(policy.config.value_threshold) << '\n';
  for (const auto& node : policy.nodes) {
    os << "\nnode " << node.index << (node.gate ? "" : " (terminal)") << '\n';
    os << "  train_size " << node.train_size << ", positive_fraction " << format_double(node.positive_fraction)
       << '\n';
    if (node.gate) {
      const auto& g = *node.gate;
      os << "  gate: serve here when w.z + b > 0, z = (s - mean) / scale\n";
      os << "    standardized: b=" << format_double(g.bias);
      coefficient_list(os, g.weight, feature_names);
      os << '\n';
      const Vector raw = g.raw_weight();
      os << "    raw units:    b=" << format_double(g.raw_bias());
      coefficient_list(os, raw, feature_names);
      os << '\n';
      os << "    dominant feature: " << name_of(feature_names, 's', dominant_gate_feature(g)) << '\n';
    }
    os << "  subpolicy (sorted by |coefficient|):\n";
    const auto& sp = node.subpolicy;
    for (std::size_t j = 0; j < sp.action_dim(); ++j) {
      os << "    " << name_of(action_names, 'a', j) << ": intercept=" << format_double(sp.bias[j]);
      coefficient_list(os, sp.weight.row(j), feature_names);
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace svsp
