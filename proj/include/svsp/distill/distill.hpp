#pragma once

#include <vector>

#include "svsp/core/dataset.hpp"
#include "svsp/distill/labeling.hpp"
#include "svsp/distill/policy.hpp"

namespace svsp {

// What each iteration saw: dataset row indices of its region and their labels.
struct DistillTrace {
  std::vector<std::vector<std::size_t>> region_rows;
  std::vector<RegionLabels> labels;
  std::size_t non_finite = 0;
};

DistilledPolicy distill(const TransitionDataset& dataset, const nn::CriticOracle& critic, const DistillConfig& config);
DistilledPolicy distill_with_trace(const TransitionDataset& dataset, const nn::CriticOracle& critic,
                                   const DistillConfig& config, DistillTrace& trace);

}  // namespace svsp
