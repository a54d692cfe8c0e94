// Unit tests for the log-log view, OLS baseline, single-knot hinge fit,
// GCV, k-fold cross-validation, regime labeling and the 2-D histogram.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "evalpulse/dualreg.hpp"
#include "evalpulse/rng.hpp"
#include "evalpulse/synthgen.hpp"

namespace dr = evalpulse::dualreg;
namespace dt = evalpulse::data;
namespace sg = evalpulse::synthgen;
using evalpulse::rng::SplitMix64;

namespace {

dr::LogLogPoints hinge_points(double knot, double intercept, double alpha1,
                              double alpha2, std::size_t each_side,
                              double step) {
  dr::LogLogPoints pts;
  const std::size_t n = 2 * each_side + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double x =
        knot + (static_cast<double>(i) - static_cast<double>(each_side)) * step;
    const double up = x > knot ? x - knot : 0.0;
    const double dn = x < knot ? knot - x : 0.0;
    pts.x.push_back(x);
    pts.y.push_back(intercept + alpha1 * up + alpha2 * dn);
    pts.ids.push_back("p" + std::to_string(i));
  }
  return pts;
}

}  // namespace

TEST_CASE("log-log view maps counts and keeps ids") {
  dt::EvaluationDataset ds;
  dt::Item a;
  a.id = "one";
  a.likes = 10;
  a.dislikes = 100;
  dt::Item b;
  b.id = "two";
  b.likes = 1;
  b.dislikes = 7;
  ds.items = {a, b};

  const dr::LogLogPoints pts = dr::to_loglog(ds);
  REQUIRE(pts.size() == 2);
  CHECK(pts.x[0] == doctest::Approx(std::log(10.0)));
  CHECK(pts.y[0] == doctest::Approx(std::log(100.0)));
  CHECK(pts.x[1] == 0.0);
  CHECK(pts.y[1] == doctest::Approx(std::log(7.0)));
  CHECK(pts.ids[0] == "one");
  CHECK(pts.ids[1] == "two");
}

TEST_CASE("log-log view rejects zero counts") {
  dt::EvaluationDataset ds;
  dt::Item a;
  a.id = "bad";
  a.likes = 5;
  a.dislikes = 0;
  ds.items = {a};
  CHECK_THROWS_WITH(dr::to_loglog(ds),
                    "item 'bad' has a zero count; run the vote filter before "
                    "the log-log view");
}

TEST_CASE("ols reproduces an exact line") {
  dr::LogLogPoints pts;
  for (double x : {0.0, 1.0, 2.0, 3.0, 4.0}) {
    pts.x.push_back(x);
    pts.y.push_back(1.0 + 2.0 * x);
    pts.ids.push_back("i");
  }
  const dr::OlsFit fit = dr::fit_ols(pts);
  CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.rss <= 1e-20);
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.n == 5);
  CHECK(fit.predict(10.0) == doctest::Approx(21.0));
}

TEST_CASE("ols validates its input") {
  dr::LogLogPoints two;
  two.x = {0.0, 1.0};
  two.y = {0.0, 1.0};
  two.ids = {"a", "b"};
  CHECK_THROWS_WITH(dr::fit_ols(two), "need at least 3 points");

  dr::LogLogPoints flat;
  flat.x = {2.0, 2.0, 2.0};
  flat.y = {0.0, 1.0, 2.0};
  flat.ids = {"a", "b", "c"};
  CHECK_THROWS_WITH(dr::fit_ols(flat), "x has no spread, slope is undefined");
}

TEST_CASE("ols recovers a noisy slope") {
  SplitMix64 gen(7, "test_ols_noise");
  dr::LogLogPoints pts;
  for (int i = 0; i < 10000; ++i) {
    const double x = gen.uniform(0.0, 10.0);
    pts.x.push_back(x);
    pts.y.push_back(0.3 + 0.7 * x + gen.normal(0.0, 0.2));
    pts.ids.push_back("i");
  }
  const dr::OlsFit fit = dr::fit_ols(pts);
  CHECK(std::fabs(fit.slope - 0.7) <= 0.02);
  CHECK(std::fabs(fit.intercept - 0.3) <= 0.02);
  CHECK(fit.r2 > 0.9);
}

TEST_CASE("hinge fit recovers a noiseless kink exactly") {
  const double knot = std::log(131.0);
  const dr::LogLogPoints pts = hinge_points(knot, 2.0, 0.93, -0.29, 100, 0.04);
  const dr::DualRegimeFit fit = dr::fit_single_knot(pts);
  CHECK(fit.knot == doctest::Approx(knot).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fit.alpha1 == doctest::Approx(0.93).epsilon(1e-9));
  CHECK(fit.alpha2 == doctest::Approx(-0.29).epsilon(1e-9));
  CHECK(fit.lambda == doctest::Approx(0.29).epsilon(1e-9));
  CHECK(fit.gamma == doctest::Approx(0.93).epsilon(1e-9));
  CHECK(fit.lc == doctest::Approx(131.0).epsilon(1e-9));
  CHECK(fit.d_at_lc == fit.intercept);
  CHECK(fit.rss <= 1e-9);
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.predict(knot + 1.0) == doctest::Approx(2.93).epsilon(1e-9));
  CHECK(fit.predict(knot - 1.0) == doctest::Approx(1.71).epsilon(1e-9));
}

TEST_CASE("hinge fit on a pure line ties toward the smallest knot") {
  dr::LogLogPoints pts;
  for (int i = 0; i < 200; ++i) {
    const double x = 0.05 * i;
    pts.x.push_back(x);
    pts.y.push_back(0.5 * x);
    pts.ids.push_back("i");
  }
  const dr::DualRegimeFit fit = dr::fit_single_knot(pts);
  // Any knot reproduces the line with alpha1 = -alpha2 = slope; ties on rss
  // resolve to the smallest admissible candidate (ten points strictly below).
  CHECK(fit.alpha1 == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(fit.alpha2 == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(fit.rss <= 1e-12);
  CHECK(fit.knot == doctest::Approx(0.05 * 10).epsilon(1e-12));
}

TEST_CASE("hinge fit validates segments and sizes") {
  dr::LogLogPoints small = hinge_points(0.0, 0.0, 1.0, -1.0, 4, 0.1);
  REQUIRE(small.size() == 9);
  CHECK_THROWS_AS(dr::fit_single_knot(small), std::runtime_error);

  dr::LogLogPoints two;
  two.x = {0.0, 1.0};
  two.y = {0.0, 1.0};
  two.ids = {"a", "b"};
  CHECK_THROWS_WITH(dr::fit_single_knot(two), "need at least 3 points");

  dr::LogLogPoints fine = hinge_points(0.0, 0.0, 1.0, -1.0, 50, 0.1);
  CHECK_THROWS_WITH(dr::fit_single_knot(fine, 0.5),
                    "min_segment_frac must be in [0, 0.5)");
  CHECK_THROWS_WITH(dr::fit_single_knot(fine, -0.1),
                    "min_segment_frac must be in [0, 0.5)");
}

TEST_CASE("gcv matches its formula and penalizes extra parameters") {
  CHECK(dr::gcv(10.0, 100, 5.0) ==
        doctest::Approx(10.0 / (100.0 * 0.95 * 0.95)).epsilon(1e-12));
  CHECK(dr::gcv(0.0, 50, 2.0) == 0.0);
  CHECK(dr::gcv(7.0, 1000, 5.0) > dr::gcv(7.0, 1000, 2.0));
  CHECK_THROWS_WITH(dr::gcv(5.0, 4, 4.0), "gcv needs n > enp");
}

TEST_CASE("cross-validation is near zero on noiseless data and reproducible") {
  dr::LogLogPoints pts;
  for (int i = 0; i < 100; ++i) {
    const double x = 0.1 * i;
    pts.x.push_back(x);
    pts.y.push_back(2.0 - 0.4 * x);
    pts.ids.push_back("i");
  }
  const double a = dr::kfold_cv_error(pts, dr::CvModel::ols, 10, 5);
  const double b = dr::kfold_cv_error(pts, dr::CvModel::ols, 10, 5);
  CHECK(a <= 1e-12);
  CHECK(a == b);
}

TEST_CASE("cross-validation prefers the hinge on kinked data") {
  sg::DualRegimeParams params;
  params.knot = std::log(131.0);
  params.lambda = 0.29;
  params.gamma = 0.93;
  params.intercept = 3.5;
  params.noise_sd = 0.5;
  params.like_mu = 5.492;
  params.like_sigma = 2.28;
  const dt::EvaluationDataset ds = sg::gen_dual_regime(5000, params, 17);
  const dr::LogLogPoints pts = dr::to_loglog(ds);
  const double cv_knot = dr::kfold_cv_error(pts, dr::CvModel::single_knot);
  const double cv_ols = dr::kfold_cv_error(pts, dr::CvModel::ols);
  CHECK(cv_knot < cv_ols);
}

TEST_CASE("cross-validation validates the fold count") {
  dr::LogLogPoints pts;
  for (int i = 0; i < 15; ++i) {
    pts.x.push_back(0.3 * i);
    pts.y.push_back(1.0 + 0.2 * i);
    pts.ids.push_back("i");
  }
  CHECK_THROWS_WITH(dr::kfold_cv_error(pts, dr::CvModel::ols, 1),
                    "k must be >= 2");
  CHECK_THROWS_WITH(dr::kfold_cv_error(pts, dr::CvModel::ols, 10),
                    "too few points for the requested folds");
}

TEST_CASE("regime labels follow the knot and the fitted level") {
  dr::DualRegimeFit fit;
  fit.knot = std::log(100.0);
  fit.intercept = std::log(50.0);
  fit.d_at_lc = fit.intercept;

  dt::Item it;
  it.id = "x";
  it.likes = 200;
  it.dislikes = 51;
  CHECK(dr::classify_regime(it, fit) == dt::Regime::global);
  it.dislikes = 49;
  CHECK(dr::classify_regime(it, fit) == dt::Regime::local);
  it.likes = 100;  // exactly at the knot stays local
  it.dislikes = 500;
  CHECK(dr::classify_regime(it, fit) == dt::Regime::local);
  it.likes = 50;
  CHECK(dr::classify_regime(it, fit) == dt::Regime::local);

  it.likes = 0;
  CHECK_THROWS_WITH(dr::classify_regime(it, fit),
                    "regime needs likes >= 1 and dislikes >= 1");
}

TEST_CASE("2-d histogram counts every point inside its grid") {
  dr::LogLogPoints pts;
  SplitMix64 gen(9, "test_hist2d");
  for (int i = 0; i < 100000; ++i) {
    pts.x.push_back(gen.uniform(0.0, 8.0));
    pts.y.push_back(gen.uniform(0.0, 6.0));
    pts.ids.push_back("i");
  }
  const dr::Histogram2D h = dr::hist2d_loglog(pts, 50);
  REQUIRE(h.bins == 50);
  REQUIRE(h.x_edges.size() == 51);
  REQUIRE(h.y_edges.size() == 51);
  std::size_t total = 0;
  for (std::size_t c : h.counts) total += c;
  CHECK(total == pts.size());
  double xmin = pts.x[0], xmax = pts.x[0], ymax = pts.y[0];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    xmin = std::min(xmin, pts.x[i]);
    xmax = std::max(xmax, pts.x[i]);
    ymax = std::max(ymax, pts.y[i]);
  }
  CHECK(h.x_edges.front() <= xmin);
  CHECK(h.x_edges.back() >= xmax);
  CHECK(h.y_edges.back() >= ymax);
}

TEST_CASE("2-d histogram places corner points in corner cells") {
  dr::LogLogPoints pts;
  pts.x = {0.0, 1.0, 1.0};
  pts.y = {0.0, 1.0, 0.0};
  pts.ids = {"a", "b", "c"};
  const dr::Histogram2D h = dr::hist2d_loglog(pts, 2);
  REQUIRE(h.counts.size() == 4);
  CHECK(h.counts[0 * 2 + 0] == 1);  // (0,0)
  CHECK(h.counts[1 * 2 + 1] == 1);  // (1,1) clamped into the top cell
  CHECK(h.counts[1 * 2 + 0] == 1);  // (1,0)
}

TEST_CASE("2-d histogram handles a single point and bad input") {
  dr::LogLogPoints one;
  one.x = {2.0};
  one.y = {3.0};
  one.ids = {"a"};
  const dr::Histogram2D h = dr::hist2d_loglog(one, 5);
  std::size_t total = 0;
  for (std::size_t c : h.counts) total += c;
  CHECK(total == 1);
  CHECK(h.x_edges.back() > h.x_edges.front());

  CHECK_THROWS_WITH(dr::hist2d_loglog(dr::LogLogPoints{}, 5),
                    "no points to bin");
  CHECK_THROWS_WITH(dr::hist2d_loglog(one, 0), "bins must be >= 1");
}
