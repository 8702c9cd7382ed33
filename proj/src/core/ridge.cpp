#include "svsp/core/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svsp/core/error.hpp"

namespace svsp {
namespace {

constexpr std::size_t kGramChunk = 2048;

void accumulate(const Matrix& x, const Matrix& y, std::size_t begin, std::size_t end,
                Matrix& xtx, Matrix& xty) {
  const std::size_t p = x.cols();
  const std::size_t q = y.cols();
  for (std::size_t r = begin; r < end; ++r) {
    auto xr = x.row(r);
    auto yr = y.row(r);
    for (std::size_t i = 0; i < p; ++i) {
      const double xi = xr[i];
      for (std::size_t j = i; j < p; ++j) xtx(i, j) += xi * xr[j];
      for (std::size_t k = 0; k < q; ++k) xty(i, k) += xi * yr[k];
    }
  }
}

void mirror_upper(Matrix& a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i);
}

void check_shapes(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows())
    throw InputError("gram: X has " + std::to_string(x.rows()) + " rows, Y has " +
                     std::to_string(y.rows()));
}

}  // namespace

NormalEquations gram(const Matrix& x, const Matrix& y) {
  check_shapes(x, y);
  const std::size_t p = x.cols();
  const std::size_t q = y.cols();
  const std::size_t n = x.rows();
  const std::size_t chunks = (n + kGramChunk - 1) / kGramChunk;
  std::vector<NormalEquations> partial(chunks, NormalEquations{Matrix(p, p), Matrix(p, q)});

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kGramChunk;
    const std::size_t end = std::min(n, begin + kGramChunk);
    accumulate(x, y, begin, end, partial[c].xtx, partial[c].xty);
  }

  NormalEquations out{Matrix(p, p), Matrix(p, q)};
  for (const auto& part : partial) {
    for (std::size_t i = 0; i < p * p; ++i) out.xtx.flat()[i] += part.xtx.flat()[i];
    for (std::size_t i = 0; i < p * q; ++i) out.xty.flat()[i] += part.xty.flat()[i];
  }
  mirror_upper(out.xtx);
  return out;
}

namespace serial {

NormalEquations gram(const Matrix& x, const Matrix& y) {
  check_shapes(x, y);
  NormalEquations out{Matrix(x.cols(), x.cols()), Matrix(x.cols(), y.cols())};
  accumulate(x, y, 0, x.rows(), out.xtx, out.xty);
  mirror_upper(out.xtx);
  return out;
}

}  // namespace serial

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n) throw InputError("solve_spd: shape mismatch");

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
  const double tiny = 1e-12 * std::max(scale, 1e-300);

  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > tiny)) throw NumericError("normal equations are singular or not positive definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }

  Matrix z = b;
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = z(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * z(k, c);
      z(i, c) = s / l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = z(i, c);
      for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * z(k, c);
      z(i, c) = s / l(i, i);
    }
  }
  return z;
}

Matrix solve_ridge(const Matrix& x, const Matrix& y, double lambda, bool last_column_unpenalized) {
  if (x.rows() == 0) throw InputError("solve_ridge: no rows");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("solve_ridge: lambda must be >= 0");
  auto ne = gram(x, y);
  const std::size_t p = x.cols();
  const std::size_t penalized = last_column_unpenalized && p > 0 ? p - 1 : p;
  for (std::size_t i = 0; i < penalized; ++i) ne.xtx(i, i) += lambda;
  auto w = solve_spd(ne.xtx, ne.xty);
  if (!all_finite(w.flat())) throw NumericError("solve_ridge: non-finite coefficients");
  return w;
}

}  // namespace svsp
