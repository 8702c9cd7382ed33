#include "svsp/envs/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "svsp/core/error.hpp"
#include "svsp/envs/bridge.hpp"
#include "svsp/envs/piecewise.hpp"
#include "svsp/envs/pointmass.hpp"

namespace svsp {

void EnvSpec::validate() const {
  if (state_dim == 0 || action_dim == 0) throw InputError("env spec: dimensions must be positive");
  if (max_steps == 0) throw InputError("env spec: max_steps must be >= 1");
  if (action_low.size() != action_dim || action_high.size() != action_dim)
    throw InputError("env spec: action bounds must have action_dim entries");
  for (std::size_t j = 0; j < action_dim; ++j)
    if (!std::isfinite(action_low[j]) || !std::isfinite(action_high[j]) || action_low[j] > action_high[j])
      throw InputError("env spec: invalid bounds for action " + std::to_string(j));
}

Vector clamp_action(const EnvSpec& spec, std::span<const double> action) {
  if (action.size() != spec.action_dim)
    throw InputError("action has " + std::to_string(action.size()) + " entries, environment expects " +
                     std::to_string(spec.action_dim));
  Vector out(action.size());
  for (std::size_t j = 0; j < action.size(); ++j) {
    if (std::isnan(action[j])) throw NumericError("action component " + std::to_string(j) + " is NaN");
    out[j] = std::clamp(action[j], spec.action_low[j], spec.action_high[j]);
  }
  return out;
}

EnvFactory parse_env_selector(const std::string& selector) {
  const std::string builtin = "builtin:";
  const std::string bridge = "bridge:";
  if (selector.starts_with(bridge)) {
    const std::string command = selector.substr(bridge.size());
    if (command.empty()) throw InputError("env selector '" + selector + "': empty bridge command");
    return [command] { return std::make_unique<BridgeEnv>(command); };
  }
  if (selector.starts_with(builtin)) {
    const std::string rest = selector.substr(builtin.size());
    if (rest == "pointmass") return [] { return std::make_unique<PointMassEnv>(1); };
    if (rest.starts_with("pointmass:")) {
      const std::string digits = rest.substr(10);
      std::size_t dims = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dims);
      if (ec != std::errc() || ptr != digits.data() + digits.size() || dims == 0)
        throw InputError("env selector '" + selector + "': bad dimension count");
      return [dims] { return std::make_unique<PointMassEnv>(dims); };
    }
    if (rest.starts_with("piecewise:")) {
      auto teacher = std::make_shared<const PiecewiseTeacher>(load_piecewise(rest.substr(10)));
      return [teacher] { return std::make_unique<PiecewiseEnv>(teacher); };
    }
  }
  throw InputError("unknown env selector '" + selector +
                   "' (expected builtin:pointmass[:d], builtin:piecewise:<file>, or bridge:<command>)");
}

}  // namespace svsp
