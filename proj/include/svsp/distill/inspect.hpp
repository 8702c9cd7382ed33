#pragma once

#include <span>
#include <string>
#include <vector>

#include "svsp/distill/policy.hpp"

namespace svsp {

// Indices ordered by |value| descending; ties keep index order.
std::vector<std::size_t> rank_by_magnitude(std::span<const double> values);

// Feature with the largest standardized gate coefficient.
std::size_t dominant_gate_feature(const SvmGate& gate);

// Plain-text report of every node. Empty name lists fall back to s<i>/a<j>.
std::string inspect(const DistilledPolicy& policy, const std::vector<std::string>& feature_names = {},
                    const std::vector<std::string>& action_names = {});

}  // namespace svsp
