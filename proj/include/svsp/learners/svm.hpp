#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "svsp/core/labels.hpp"
#include "svsp/core/matrix.hpp"

namespace svsp {

// Per-feature affine map z = (s - mean) / scale.
struct Standardizer {
  Vector mean;
  Vector scale;  // strictly positive

  static Standardizer identity(std::size_t dim);
  // Population statistics; a zero-variance feature gets scale 1.
  static Standardizer fit(const Matrix& states);

  std::size_t dim() const { return mean.size(); }
  void validate() const;
  Vector apply(std::span<const double> state) const;
};

// Linear gate: 1 = serve at this node, 0 = descend.
struct SvmGate {
  Vector weight;  // in standardized units
  double bias = 0.0;
  Standardizer standardizer;

  std::size_t dim() const { return weight.size(); }
  void validate() const;
  double decision(std::span<const double> state) const;
  // Exactly-zero decision values resolve to 0.
  int predict(std::span<const double> state) const { return decision(state) > 0.0 ? 1 : 0; }

  // Hyperplane expressed on raw (unstandardized) state: w_raw·s + b_raw.
  Vector raw_weight() const;
  double raw_bias() const;
};

enum class SvmSolver {
  kDualCoordinate,  // dual coordinate descent over shuffled epochs
  kSubgradient,     // primal stochastic subgradient, Pegasos step schedule (default)
};

SvmSolver parse_svm_solver(std::string_view tag);
std::string_view to_string(SvmSolver solver);

struct SvmOptions {
  double c = 1.0;
  int epochs = 200;
  std::uint64_t seed = 0;
  SvmSolver solver = SvmSolver::kSubgradient;
};

// Soft-margin linear SVM on standardized features; labels {0,1} map to
// {-1,+1}. Requires both classes.
SvmGate fit_svm(const Matrix& states, const RegionLabels& labels, const SvmOptions& options = {});

// (1/2)‖w‖² + c·Σ hinge(y_i (w·z_i + b)) evaluated on already-standardized rows.
double svm_objective(const Matrix& standardized, const RegionLabels& labels, std::span<const double> weight,
                     double bias, double c);

}  // namespace svsp
