#pragma once
// Small dense linear algebra for the regression fits. Systems here are
// tiny (k <= 8 or so) while n is large, so plain Gaussian elimination with
// partial pivoting is all we need. Singularity reports the offending
// column so callers can name collinear predictors.

#include <cstddef>
#include <vector>

namespace evalpulse::linalg {

// Row-major square matrix.
struct SquareMatrix {
  std::size_t k = 0;
  std::vector<double> v;

  explicit SquareMatrix(std::size_t n) : k(n), v(n * n, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return v[r * k + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * k + c]; }
};

// Solves a * x = b with partial pivoting. Returns false when a pivot is
// numerically zero; *bad_col then holds the column that collapsed.
bool solve(SquareMatrix a, std::vector<double> b, std::vector<double>& x,
           std::size_t* bad_col = nullptr);

// Inverse via Gauss-Jordan, same singularity contract as solve().
bool invert(const SquareMatrix& a, SquareMatrix& out,
            std::size_t* bad_col = nullptr);

}  // namespace evalpulse::linalg
