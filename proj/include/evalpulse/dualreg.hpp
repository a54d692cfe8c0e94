#pragma once
// Piecewise log-log regression of dislikes on likes: an OLS baseline, a
// single-knot hinge fit, GCV and k-fold comparison between them, and
// per-item regime classification against the fitted knot.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "evalpulse/dataset.hpp"

namespace evalpulse::dualreg {

// Log-log scatter of items with likes >= 1 and dislikes >= 1.
struct LogLogPoints {
  std::vector<double> x;  // ln likes
  std::vector<double> y;  // ln dislikes
  std::vector<std::string> ids;

  std::size_t size() const { return x.size(); }
};

LogLogPoints to_loglog(const data::EvaluationDataset& ds);

struct OlsFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rss = 0.0;
  double r2 = 0.0;
  double gcv = 0.0;
  std::size_t n = 0;

  double predict(double x) const { return intercept + slope * x; }
};

OlsFit fit_ols(const LogLogPoints& pts);

// y = intercept + alpha1 * max(0, x - knot) + alpha2 * max(0, knot - x).
// The intercept is therefore the fitted value at the knot itself.
struct DualRegimeFit {
  double intercept = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double knot = 0.0;     // ln of the crossover likes count
  double lc = 0.0;       // exp(knot)
  double d_at_lc = 0.0;  // fitted ln dislikes at the knot (= intercept)
  double lambda = 0.0;   // local-regime exponent, -alpha2
  double gamma = 0.0;    // global-regime exponent, alpha1
  double rss = 0.0;
  double r2 = 0.0;
  double gcv = 0.0;
  std::size_t n = 0;

  double predict(double x) const {
    double up = x > knot ? x - knot : 0.0;
    double dn = x < knot ? knot - x : 0.0;
    return intercept + alpha1 * up + alpha2 * dn;
  }
};

// Exhaustive scan over distinct x as knot candidates; each side of a
// candidate must hold at least max(10, ceil(frac * n)) points strictly.
// Ties on RSS resolve to the smaller knot.
DualRegimeFit fit_single_knot(const LogLogPoints& pts,
                              double min_segment_frac = 0.05);

// Generalized cross-validation score: rss / (n * (1 - enp/n)^2). The OLS
// line costs 2 effective parameters, the hinge fit 5 (three coefficients
// plus a penalty of 2 for the selected knot).
double gcv(double rss, std::size_t n, double enp);

enum class CvModel { ols, single_knot };

// Mean held-out MSE over k shuffled folds; the shuffle is seeded so the
// split is reproducible.
double kfold_cv_error(const LogLogPoints& pts, CvModel model, int k = 10,
                      std::uint64_t seed = 0,
                      double min_segment_frac = 0.05);

// Global iff ln likes > knot and ln dislikes > the fitted value at the
// knot; boundary cases stay local. Requires both counts >= 1.
data::Regime classify_regime(const data::Item& item, const DualRegimeFit& fit);

struct Histogram2D {
  std::vector<double> x_edges;       // bins+1
  std::vector<double> y_edges;       // bins+1
  std::vector<std::size_t> counts;   // row-major, x index major
  int bins = 0;
};

// Equal-width 2-D histogram in log-log space.
Histogram2D hist2d_loglog(const LogLogPoints& pts, int bins = 50);

}  // namespace evalpulse::dualreg
