#include "svsp/distill/labeling.hpp"

#include <cmath>
#include <string>

#include "svsp/core/error.hpp"

namespace svsp {
namespace {

void check_inputs(const Matrix& states, const Matrix& subpolicy_actions, const Matrix& dataset_actions,
                  double tau) {
  if (states.rows() != subpolicy_actions.rows() || states.rows() != dataset_actions.rows())
    throw InputError("label_region: row counts differ (" + std::to_string(states.rows()) + ", " +
                     std::to_string(subpolicy_actions.rows()) + ", " + std::to_string(dataset_actions.rows()) + ")");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InputError("label_region: tau must be positive");
}

// 1 = label 1, 0 = label 0, 2 = non-finite critic output (label 0).
std::uint8_t label_row(const nn::CriticOracle& critic, const Matrix& states, const Matrix& subpolicy_actions,
                       const Matrix& dataset_actions, double tau, std::size_t r) {
  const double q = critic.q_value(states.row(r), subpolicy_actions.row(r));
  const double v = critic.state_value(states.row(r), dataset_actions.row(r));
  if (!std::isfinite(q) || !std::isfinite(v)) return 2;
  return relative_advantage_label(q, v, tau) ? 1 : 0;
}

LabelOutcome finish(std::vector<std::uint8_t> raw) {
  LabelOutcome out;
  for (auto& l : raw)
    if (l == 2) {
      l = 0;
      ++out.non_finite;
    }
  out.labels = RegionLabels(std::move(raw));
  return out;
}

}  // namespace

bool relative_advantage_label(double q, double v, double tau) { return q - v >= (tau - 1.0) * std::abs(v); }

LabelOutcome label_region(const nn::CriticOracle& critic, const Matrix& states, const Matrix& subpolicy_actions,
                          const Matrix& dataset_actions, double tau) {
  check_inputs(states, subpolicy_actions, dataset_actions, tau);
  const auto n = static_cast<std::ptrdiff_t>(states.rows());
  std::vector<std::uint8_t> raw(states.rows(), 0);
  // Exceptions may not cross the parallel region; keep the first by row order.
  std::ptrdiff_t failed_row = n;
  std::string failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    try {
      raw[r] = label_row(critic, states, subpolicy_actions, dataset_actions, tau, static_cast<std::size_t>(r));
    } catch (const std::exception& e) {
#pragma omp critical(svsp_label_failure)
      if (r < failed_row) {
        failed_row = r;
        failure = e.what();
      }
    }
  }
  if (failed_row < n) throw InputError("label_region: row " + std::to_string(failed_row) + ": " + failure);
  return finish(std::move(raw));
}

namespace serial {

LabelOutcome label_region(const nn::CriticOracle& critic, const Matrix& states, const Matrix& subpolicy_actions,
                          const Matrix& dataset_actions, double tau) {
  check_inputs(states, subpolicy_actions, dataset_actions, tau);
  std::vector<std::uint8_t> raw(states.rows(), 0);
  for (std::size_t r = 0; r < states.rows(); ++r) {
    try {
      raw[r] = label_row(critic, states, subpolicy_actions, dataset_actions, tau, r);
    } catch (const std::exception& e) {
      throw InputError("label_region: row " + std::to_string(r) + ": " + e.what());
    }
  }
  return finish(std::move(raw));
}

}  // namespace serial
}  // namespace svsp
