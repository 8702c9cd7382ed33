#pragma once

#include "svsp/core/matrix.hpp"

namespace svsp {

struct NormalEquations {
  Matrix xtx;  // p x p
  Matrix xty;  // p x q
};

// XᵀX and XᵀY accumulated over fixed 2048-row chunks in parallel, then
// reduced in chunk order, so the result does not depend on the thread
// count. May differ from serial::gram in the last bits.
NormalEquations gram(const Matrix& x, const Matrix& y);

namespace serial {
// Single-pass reference accumulation.
NormalEquations gram(const Matrix& x, const Matrix& y);
}  // namespace serial

// Solves A·Z = B for symmetric positive-definite A by Cholesky.
// Throws NumericError when a pivot collapses.
Matrix solve_spd(const Matrix& a, const Matrix& b);

// argmin_W ‖XW − Y‖² + λ‖W‖². With `last_column_unpenalized` the final
// column of X is treated as the intercept and excluded from the penalty.
Matrix solve_ridge(const Matrix& x, const Matrix& y, double lambda,
                   bool last_column_unpenalized = false);

}  // namespace svsp
