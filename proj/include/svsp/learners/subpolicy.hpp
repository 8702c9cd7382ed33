#pragma once

#include <span>

#include "svsp/core/matrix.hpp"

namespace svsp {

// Affine state->action map clamped into the action box.
struct LinearSubpolicy {
  Matrix weight;  // d_a x d_s
  Vector bias;    // d_a
  Vector action_low;
  Vector action_high;

  std::size_t state_dim() const { return weight.cols(); }
  std::size_t action_dim() const { return weight.rows(); }

  void validate() const;
  Vector predict(std::span<const double> state) const;
  void predict_into(std::span<const double> state, std::span<double> out) const;
};

// Ridge fit with an unpenalized intercept; coefficients are exactly the
// solve_ridge output on [states | 1].
LinearSubpolicy fit_subpolicy(const Matrix& states, const Matrix& actions, double lambda,
                              const Vector& action_low, const Vector& action_high);

// Row-wise predictions for a whole region.
Matrix predict_actions(const LinearSubpolicy& policy, const Matrix& states);

namespace serial {
Matrix predict_actions(const LinearSubpolicy& policy, const Matrix& states);
}  // namespace serial

}  // namespace svsp
