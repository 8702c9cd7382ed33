#pragma once

#include <vector>

#include "svsp/core/dataset.hpp"
#include "svsp/distill/policy.hpp"

namespace svsp {

// Mean squared action error ‖route(s) - a‖², overall and per serving node.
struct FidelityReport {
  double global_mse = 0.0;
  std::vector<double> node_mse;         // NaN for nodes that serve no row
  std::vector<std::size_t> node_rows;
};

// Chunked parallel reduction, independent of the thread count; may differ
// from serial::fidelity in the last bits.
FidelityReport fidelity(const DistilledPolicy& policy, const TransitionDataset& dataset);

namespace serial {
FidelityReport fidelity(const DistilledPolicy& policy, const TransitionDataset& dataset);
}  // namespace serial

}  // namespace svsp
