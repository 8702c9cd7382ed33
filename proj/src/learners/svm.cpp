#include "svsp/learners/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "svsp/core/error.hpp"
#include "svsp/core/random.hpp"

namespace svsp {
namespace {

// Constant feature appended for the dual solver so the bias is learned
// with the weights. Large enough that its implied penalty on b is small;
// the bias is then re-solved exactly anyway.
constexpr double kBiasFeature = 10.0;

double sign_of(bool positive) { return positive ? 1.0 : -1.0; }

// Given fixed scores w·z_i, the hinge sum is piecewise linear in b with
// breakpoints y_i - score_i. Returns the midpoint of the minimizing interval.
double optimal_bias(std::span<const double> scores, const RegionLabels& labels) {
  const std::size_t n = scores.size();
  std::vector<double> kink(n);
  for (std::size_t i = 0; i < n; ++i) kink[i] = sign_of(labels[i]) - scores[i];
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return kink[a] < kink[b] || (kink[a] == kink[b] && a < b);
  });

  double pos_total_sum = 0.0;
  double pos_total_count = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i]) {
      pos_total_sum += kink[i];
      pos_total_count += 1.0;
    }

  // f(b) = Σ_pos max(0, k_i - b) + Σ_neg max(0, b - k_i)
  std::vector<double> value(n);
  double neg_sum = 0.0, neg_count = 0.0, pos_sum = 0.0, pos_count = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    if (labels[i]) {
      pos_sum += kink[i];
      pos_count += 1.0;
    } else {
      neg_sum += kink[i];
      neg_count += 1.0;
    }
    const double b = kink[i];
    value[k] = (neg_count * b - neg_sum) + ((pos_total_sum - pos_sum) - (pos_total_count - pos_count) * b);
  }
  const double best = *std::min_element(value.begin(), value.end());
  const double slack = 1e-12 * std::max(1.0, std::abs(best));
  std::size_t lo = n, hi = 0;
  for (std::size_t k = 0; k < n; ++k)
    if (value[k] <= best + slack) {
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
  return 0.5 * (kink[order[lo]] + kink[order[hi]]);
}

Vector dual_coordinate_descent(const Matrix& z, const RegionLabels& labels, const SvmOptions& opt) {
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  Vector w(d + 1, 0.0);  // last entry multiplies kBiasFeature
  Vector alpha(n, 0.0);
  Vector diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = dot(z.row(i), z.row(i)) + kBiasFeature * kBiasFeature;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(opt.seed);

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    shuffle(order, rng);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (std::size_t i : order) {
      const double y = sign_of(labels[i]);
      auto zi = z.row(i);
      const double margin = y * (dot(std::span<const double>(w.data(), d), zi) + w[d] * kBiasFeature);
      const double g = margin - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) pg = std::min(g, 0.0);
      else if (alpha[i] == opt.c) pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      const double old = alpha[i];
      alpha[i] = std::clamp(old - g / diag[i], 0.0, opt.c);
      const double step = (alpha[i] - old) * y;
      for (std::size_t j = 0; j < d; ++j) w[j] += step * zi[j];
      w[d] += step * kBiasFeature;
    }
    if (pg_max - pg_min < 1e-9) break;
  }
  w[d] *= kBiasFeature;
  return w;
}

Vector pegasos(const Matrix& z, const RegionLabels& labels, const SvmOptions& opt) {
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  const double lambda = 1.0 / (static_cast<double>(n) * opt.c);
  const double radius = 1.0 / std::sqrt(lambda);
  Vector w(d, 0.0);
  double b = 0.0;
  Vector avg(d + 1, 0.0);
  std::size_t averaged = 0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(opt.seed);
  std::size_t t = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    shuffle(order, rng);
    const bool tail = epoch >= opt.epochs / 2;
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double y = sign_of(labels[i]);
      auto zi = z.row(i);
      const double margin = y * (dot(w, zi) + b);
      const double shrink = 1.0 - eta * lambda;
      for (double& wj : w) wj *= shrink;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j) w[j] += eta * y * zi[j];
        b += eta * y;
      }
      const double norm = std::sqrt(dot(w, w));
      if (norm > radius)
        for (double& wj : w) wj *= radius / norm;
      if (tail) {
        for (std::size_t j = 0; j < d; ++j) avg[j] += w[j];
        avg[d] += b;
        ++averaged;
      }
    }
  }
  if (averaged > 0)
    for (double& v : avg) v /= static_cast<double>(averaged);
  return avg;
}

}  // namespace

Standardizer Standardizer::identity(std::size_t dim) { return {Vector(dim, 0.0), Vector(dim, 1.0)}; }

Standardizer Standardizer::fit(const Matrix& states) {
  const std::size_t n = states.rows();
  const std::size_t d = states.cols();
  if (n == 0) throw InputError("standardizer: no rows");
  Standardizer s{Vector(d, 0.0), Vector(d, 0.0)};
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += states(r, j);
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = states(r, j) - s.mean[j];
      s.scale[j] += dev * dev;
    }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(s.scale[j] / static_cast<double>(n));
    s.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(s.mean[j])) ? sd : 1.0;
  }
  return s;
}

void Standardizer::validate() const {
  if (mean.size() != scale.size()) throw InputError("standardizer: mean/scale length mismatch");
  if (!all_finite(mean) || !all_finite(scale)) throw InputError("standardizer: non-finite entries");
  for (double s : scale)
    if (!(s > 0.0)) throw InputError("standardizer: scale must be strictly positive");
}

Vector Standardizer::apply(std::span<const double> state) const {
  if (state.size() != dim()) throw InputError("standardizer: state length mismatch");
  Vector z(dim());
  for (std::size_t j = 0; j < dim(); ++j) z[j] = (state[j] - mean[j]) / scale[j];
  return z;
}

void SvmGate::validate() const {
  standardizer.validate();
  if (weight.size() != standardizer.dim()) throw InputError("gate: weight length does not match standardizer");
  if (!all_finite(weight) || !std::isfinite(bias)) throw NumericError("gate: non-finite coefficients");
}

double SvmGate::decision(std::span<const double> state) const {
  if (state.size() != dim())
    throw InputError("gate: state has " + std::to_string(state.size()) + " entries, expected " +
                     std::to_string(dim()));
  double acc = bias;
  for (std::size_t j = 0; j < dim(); ++j)
    acc += weight[j] * ((state[j] - standardizer.mean[j]) / standardizer.scale[j]);
  return acc;
}

Vector SvmGate::raw_weight() const {
  Vector w(dim());
  for (std::size_t j = 0; j < dim(); ++j) w[j] = weight[j] / standardizer.scale[j];
  return w;
}

double SvmGate::raw_bias() const {
  double b = bias;
  for (std::size_t j = 0; j < dim(); ++j) b -= weight[j] * standardizer.mean[j] / standardizer.scale[j];
  return b;
}

SvmSolver parse_svm_solver(std::string_view tag) {
  if (tag == "dcd" || tag == "dual") return SvmSolver::kDualCoordinate;
  if (tag == "subgradient" || tag == "pegasos") return SvmSolver::kSubgradient;
  throw InputError("unknown svm solver '" + std::string(tag) + "' (expected dcd or subgradient)");
}

std::string_view to_string(SvmSolver solver) {
  return solver == SvmSolver::kDualCoordinate ? "dcd" : "subgradient";
}

SvmGate fit_svm(const Matrix& states, const RegionLabels& labels, const SvmOptions& options) {
  if (states.rows() != labels.size())
    throw InputError("fit_svm: " + std::to_string(states.rows()) + " rows but " + std::to_string(labels.size()) +
                     " labels");
  if (labels.positive_count() == 0 || labels.negative_count() == 0)
    throw InputError("fit_svm: both classes are required");
  if (!(options.c > 0.0) || !std::isfinite(options.c)) throw InputError("fit_svm: c must be positive");
  if (options.epochs < 1) throw InputError("fit_svm: epochs must be >= 1");

  SvmGate gate;
  gate.standardizer = Standardizer::fit(states);
  Matrix z(states.rows(), states.cols());
  for (std::size_t r = 0; r < states.rows(); ++r) {
    auto src = states.row(r);
    auto dst = z.row(r);
    for (std::size_t j = 0; j < states.cols(); ++j)
      dst[j] = (src[j] - gate.standardizer.mean[j]) / gate.standardizer.scale[j];
  }

  Vector w = options.solver == SvmSolver::kDualCoordinate ? dual_coordinate_descent(z, labels, options)
                                                          : pegasos(z, labels, options);
  w.pop_back();
  Vector scores(z.rows());
  for (std::size_t r = 0; r < z.rows(); ++r) scores[r] = dot(w, z.row(r));
  gate.weight = std::move(w);
  gate.bias = optimal_bias(scores, labels);
  gate.validate();
  return gate;
}

double svm_objective(const Matrix& standardized, const RegionLabels& labels, std::span<const double> weight,
                     double bias, double c) {
  double hinge = 0.0;
  for (std::size_t r = 0; r < standardized.rows(); ++r) {
    const double m = sign_of(labels[r]) * (dot(weight, standardized.row(r)) + bias);
    hinge += std::max(0.0, 1.0 - m);
  }
  return 0.5 * dot(weight, weight) + c * hinge;
}

}  // namespace svsp
