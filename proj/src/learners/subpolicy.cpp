#include "svsp/learners/subpolicy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svsp/core/error.hpp"
#include "svsp/core/ridge.hpp"

namespace svsp {

void LinearSubpolicy::validate() const {
  if (weight.rows() == 0 || weight.cols() == 0) throw InputError("subpolicy: empty weight matrix");
  if (bias.size() != weight.rows()) throw InputError("subpolicy: bias length does not match action_dim");
  if (action_low.size() != weight.rows() || action_high.size() != weight.rows())
    throw InputError("subpolicy: bounds do not match action_dim");
  if (!all_finite(weight.flat()) || !all_finite(bias)) throw NumericError("subpolicy: non-finite coefficients");
  for (std::size_t j = 0; j < action_low.size(); ++j)
    if (!(action_low[j] <= action_high[j])) throw InputError("subpolicy: invalid bounds");
}

void LinearSubpolicy::predict_into(std::span<const double> state, std::span<double> out) const {
  if (state.size() != state_dim())
    throw InputError("subpolicy: state has " + std::to_string(state.size()) + " entries, expected " +
                     std::to_string(state_dim()));
  for (std::size_t j = 0; j < action_dim(); ++j)
    out[j] = std::clamp(dot(weight.row(j), state) + bias[j], action_low[j], action_high[j]);
}

Vector LinearSubpolicy::predict(std::span<const double> state) const {
  Vector out(action_dim());
  predict_into(state, out);
  return out;
}

LinearSubpolicy fit_subpolicy(const Matrix& states, const Matrix& actions, double lambda,
                              const Vector& action_low, const Vector& action_high) {
  if (states.rows() == 0) throw InputError("fit_subpolicy: no rows");
  if (states.rows() != actions.rows()) throw InputError("fit_subpolicy: row count mismatch");
  const std::size_t n = states.rows();
  const std::size_t ds = states.cols();
  const std::size_t da = actions.cols();

  Matrix design(n, ds + 1);
  for (std::size_t r = 0; r < n; ++r) {
    auto src = states.row(r);
    auto dst = design.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
    dst[ds] = 1.0;
  }
  const Matrix coef = solve_ridge(design, actions, lambda, /*last_column_unpenalized=*/true);

  LinearSubpolicy out{Matrix(da, ds), Vector(da), action_low, action_high};
  for (std::size_t j = 0; j < da; ++j) {
    for (std::size_t i = 0; i < ds; ++i) out.weight(j, i) = coef(i, j);
    out.bias[j] = coef(ds, j);
  }
  out.validate();
  return out;
}

Matrix predict_actions(const LinearSubpolicy& policy, const Matrix& states) {
  if (states.cols() != policy.state_dim()) throw InputError("predict_actions: state width mismatch");
  Matrix out(states.rows(), policy.action_dim());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(states.rows()); ++r)
    policy.predict_into(states.row(r), out.row(r));
  return out;
}

namespace serial {

Matrix predict_actions(const LinearSubpolicy& policy, const Matrix& states) {
  if (states.cols() != policy.state_dim()) throw InputError("predict_actions: state width mismatch");
  Matrix out(states.rows(), policy.action_dim());
  for (std::size_t r = 0; r < states.rows(); ++r) policy.predict_into(states.row(r), out.row(r));
  return out;
}

}  // namespace serial
}  // namespace svsp
