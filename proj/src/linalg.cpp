#include "evalpulse/linalg.hpp"

#include <cmath>
#include <cstddef>

namespace evalpulse::linalg {

namespace {

// A pivot is treated as zero when it is tiny relative to the matrix scale.
double singular_threshold(const SquareMatrix& a) {
  double mx = 0.0;
  for (double v : a.v) mx = std::max(mx, std::fabs(v));
  return mx > 0.0 ? mx * 1e-12 : 1e-300;
}

}  // namespace

bool solve(SquareMatrix a, std::vector<double> b, std::vector<double>& x,
           std::size_t* bad_col) {
  const std::size_t k = a.k;
  const double tol = singular_threshold(a);

  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::fabs(a.at(r, col)) > std::fabs(a.at(pivot, col))) pivot = r;
    }
    if (std::fabs(a.at(pivot, col)) <= tol) {
      if (bad_col) *bad_col = col;
      return false;
    }
    if (pivot != col) {
      for (std::size_t c = 0; c < k; ++c) std::swap(a.at(col, c), a.at(pivot, c));
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < k; ++r) {
      double f = a.at(r, col) / a.at(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c < k; ++c) a.at(r, c) -= f * a.at(col, c);
      b[r] -= f * b[col];
    }
  }

  x.assign(k, 0.0);
  for (std::size_t ri = k; ri-- > 0;) {
    double s = b[ri];
    for (std::size_t c = ri + 1; c < k; ++c) s -= a.at(ri, c) * x[c];
    x[ri] = s / a.at(ri, ri);
  }
  return true;
}

bool invert(const SquareMatrix& a, SquareMatrix& out, std::size_t* bad_col) {
  const std::size_t k = a.k;
  const double tol = singular_threshold(a);

  SquareMatrix w = a;
  out = SquareMatrix(k);
  for (std::size_t i = 0; i < k; ++i) out.at(i, i) = 1.0;

  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::fabs(w.at(r, col)) > std::fabs(w.at(pivot, col))) pivot = r;
    }
    if (std::fabs(w.at(pivot, col)) <= tol) {
      if (bad_col) *bad_col = col;
      return false;
    }
    if (pivot != col) {
      for (std::size_t c = 0; c < k; ++c) {
        std::swap(w.at(col, c), w.at(pivot, c));
        std::swap(out.at(col, c), out.at(pivot, c));
      }
    }
    double inv_p = 1.0 / w.at(col, col);
    for (std::size_t c = 0; c < k; ++c) {
      w.at(col, c) *= inv_p;
      out.at(col, c) *= inv_p;
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      double f = w.at(r, col);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < k; ++c) {
        w.at(r, c) -= f * w.at(col, c);
        out.at(r, c) -= f * out.at(col, c);
      }
    }
  }
  return true;
}

}  // namespace evalpulse::linalg
