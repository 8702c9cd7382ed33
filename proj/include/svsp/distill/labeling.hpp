#pragma once

#include <cstddef>

#include "svsp/core/labels.hpp"
#include "svsp/core/matrix.hpp"
#include "svsp/nn/critic.hpp"

namespace svsp {

// Relative-advantage rule: 1 iff q - v >= (tau - 1)·|v|. Same as q/v >= tau
// when v > 0, and keeps its direction when v <= 0.
bool relative_advantage_label(double q, double v, double tau);

struct LabelOutcome {
  RegionLabels labels;
  std::size_t non_finite = 0;  // rows whose q or v was not finite; labeled 0
};

// Rows are independent; the parallel version is bit-identical to the serial one.
LabelOutcome label_region(const nn::CriticOracle& critic, const Matrix& states, const Matrix& subpolicy_actions,
                          const Matrix& dataset_actions, double tau);

namespace serial {
LabelOutcome label_region(const nn::CriticOracle& critic, const Matrix& states, const Matrix& subpolicy_actions,
                          const Matrix& dataset_actions, double tau);
}  // namespace serial

}  // namespace svsp
