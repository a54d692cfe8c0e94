#include "evalpulse/dualreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "evalpulse/linalg.hpp"
#include "evalpulse/rng.hpp"

namespace evalpulse::dualreg {

namespace {

constexpr double kOlsEnp = 2.0;
constexpr double kHingeEnp = 5.0;  // 3 coefficients + 2 per selected knot

struct SortedXY {
  std::vector<double> x;  // ascending
  std::vector<double> y;  // matched order
};

SortedXY sort_points(const LogLogPoints& pts) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pts.x[a] < pts.x[b];
  });
  SortedXY s;
  s.x.reserve(pts.size());
  s.y.reserve(pts.size());
  for (std::size_t i : order) {
    s.x.push_back(pts.x[i]);
    s.y.push_back(pts.y[i]);
  }
  return s;
}

double mean_of(const std::vector<double>& v) {
  long double s = 0.0L;
  for (double t : v) s += t;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

}  // namespace

LogLogPoints to_loglog(const data::EvaluationDataset& ds) {
  LogLogPoints pts;
  for (const data::Item& item : ds.items) {
    if (item.likes < 1 || item.dislikes < 1)
      throw std::invalid_argument(
          "item '" + item.id +
          "' has a zero count; run the vote filter before the log-log view");
    pts.x.push_back(std::log(static_cast<double>(item.likes)));
    pts.y.push_back(std::log(static_cast<double>(item.dislikes)));
    pts.ids.push_back(item.id);
  }
  return pts;
}

OlsFit fit_ols(const LogLogPoints& pts) {
  const std::size_t n = pts.size();
  if (n < 3) throw std::invalid_argument("need at least 3 points");

  const double mx = mean_of(pts.x);
  const double my = mean_of(pts.y);
  long double sxx = 0.0L, sxy = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double dx = pts.x[i] - mx;
    sxx += dx * dx;
    sxy += dx * (pts.y[i] - my);
  }
  if (sxx <= 0.0L)
    throw std::runtime_error("x has no spread, slope is undefined");

  OlsFit fit;
  fit.n = n;
  fit.slope = static_cast<double>(sxy / sxx);
  fit.intercept = my - fit.slope * mx;

  long double rss = 0.0L, tss = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    double r = pts.y[i] - fit.predict(pts.x[i]);
    double d = pts.y[i] - my;
    rss += static_cast<long double>(r) * r;
    tss += static_cast<long double>(d) * d;
  }
  fit.rss = static_cast<double>(rss);
  fit.r2 = tss > 0.0L ? static_cast<double>(1.0L - rss / tss) : 0.0;
  fit.gcv = gcv(fit.rss, n, kOlsEnp);
  return fit;
}

DualRegimeFit fit_single_knot(const LogLogPoints& pts, double min_segment_frac) {
  const std::size_t n = pts.size();
  if (n < 3) throw std::invalid_argument("need at least 3 points");
  if (min_segment_frac < 0.0 || min_segment_frac >= 0.5)
    throw std::invalid_argument("min_segment_frac must be in [0, 0.5)");

  const SortedXY s = sort_points(pts);
  const std::size_t min_side = std::max<std::size_t>(
      10, static_cast<std::size_t>(
              std::ceil(min_segment_frac * static_cast<double>(n))));

  // Prefix sums over the sorted points let each candidate knot be scored
  // in O(1). The two hinge columns have disjoint support, so their cross
  // moment is exactly zero and the normal equations stay 3x3.
  std::vector<long double> px(n + 1, 0.0L), pxx(n + 1, 0.0L), py(n + 1, 0.0L),
      pxy(n + 1, 0.0L);
  long double syy = 0.0L, sy = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    px[i + 1] = px[i] + s.x[i];
    pxx[i + 1] = pxx[i] + static_cast<long double>(s.x[i]) * s.x[i];
    py[i + 1] = py[i] + s.y[i];
    pxy[i + 1] = pxy[i] + static_cast<long double>(s.x[i]) * s.y[i];
    sy += s.y[i];
    syy += static_cast<long double>(s.y[i]) * s.y[i];
  }
  const long double tx = px[n], txx = pxx[n], ty = py[n], txy = pxy[n];

  double best_rss = std::numeric_limits<double>::infinity();
  double best_knot = 0.0;
  std::vector<double> best_beta;

  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && s.x[j] == s.x[i]) ++j;  // [i, j) share one distinct value
    const double c = s.x[i];
    const std::size_t below = i;       // strictly below the candidate
    const std::size_t above = n - j;   // strictly above
    i = j;
    if (below < min_side || above < min_side) continue;

    // Hinge moments from the prefix sums; u covers x > c, v covers x < c.
    const long double cnt_u = static_cast<long double>(above);
    const long double su = (tx - px[j]) - c * cnt_u;
    const long double suu =
        (txx - pxx[j]) - 2.0L * c * (tx - px[j]) + c * c * cnt_u;
    const long double suy = (txy - pxy[j]) - c * (ty - py[j]);
    const long double cnt_v = static_cast<long double>(below);
    const long double sv = c * cnt_v - px[below];
    const long double svv = c * c * cnt_v - 2.0L * c * px[below] + pxx[below];
    const long double svy = c * py[below] - pxy[below];

    linalg::SquareMatrix xtx(3);
    xtx.at(0, 0) = static_cast<double>(n);
    xtx.at(0, 1) = xtx.at(1, 0) = static_cast<double>(su);
    xtx.at(0, 2) = xtx.at(2, 0) = static_cast<double>(sv);
    xtx.at(1, 1) = static_cast<double>(suu);
    xtx.at(2, 2) = static_cast<double>(svv);
    std::vector<double> xty = {static_cast<double>(sy),
                               static_cast<double>(suy),
                               static_cast<double>(svy)};
    std::vector<double> beta;
    if (!linalg::solve(xtx, xty, beta)) continue;

    // rss = y'y - 2 b'X'y + b'X'X b, using the same moments.
    long double quad =
        beta[0] * (beta[0] * n + 2.0L * (beta[1] * su + beta[2] * sv)) +
        beta[1] * beta[1] * suu + beta[2] * beta[2] * svv;
    long double dot = beta[0] * sy + beta[1] * suy + beta[2] * svy;
    double rss = static_cast<double>(syy - 2.0L * dot + quad);

    // Strict improvement only, so RSS ties keep the smaller knot.
    const double tie_eps = 1e-9 * (1.0 + std::fabs(best_rss));
    if (std::isfinite(best_rss) ? rss < best_rss - tie_eps : rss < best_rss) {
      best_rss = rss;
      best_knot = c;
      best_beta = beta;
    }
  }

  if (best_beta.empty())
    throw std::runtime_error(
        "no admissible knot: every candidate leaves fewer than " +
        std::to_string(min_side) + " points on one side");

  DualRegimeFit fit;
  fit.n = n;
  fit.knot = best_knot;
  fit.lc = std::exp(best_knot);
  fit.intercept = best_beta[0];
  fit.alpha1 = best_beta[1];
  fit.alpha2 = best_beta[2];
  fit.d_at_lc = fit.intercept;
  fit.lambda = -fit.alpha2;
  fit.gamma = fit.alpha1;

  // The scan's algebraic RSS can lose digits to cancellation; score the
  // winner with a direct residual pass.
  const double my = mean_of(pts.y);
  long double rss = 0.0L, tss = 0.0L;
  for (std::size_t t = 0; t < n; ++t) {
    double r = pts.y[t] - fit.predict(pts.x[t]);
    double d = pts.y[t] - my;
    rss += static_cast<long double>(r) * r;
    tss += static_cast<long double>(d) * d;
  }
  fit.rss = static_cast<double>(rss);
  fit.r2 = tss > 0.0L ? static_cast<double>(1.0L - rss / tss) : 0.0;
  fit.gcv = gcv(fit.rss, n, kHingeEnp);
  return fit;
}

double gcv(double rss, std::size_t n, double enp) {
  const double nn = static_cast<double>(n);
  if (!(nn > enp)) throw std::invalid_argument("gcv needs n > enp");
  const double f = 1.0 - enp / nn;
  return rss / (nn * f * f);
}

double kfold_cv_error(const LogLogPoints& pts, CvModel model, int k,
                      std::uint64_t seed, double min_segment_frac) {
  const std::size_t n = pts.size();
  if (k < 2) throw std::invalid_argument("k must be >= 2");
  if (n < static_cast<std::size_t>(2 * k))
    throw std::invalid_argument("too few points for the requested folds");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng::SplitMix64 gen(seed, "kfold_cv_error");
  gen.shuffle(perm);

  // Contiguous chunks of the shuffled order; sizes differ by at most one.
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);

  double total = 0.0;
  std::size_t start = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    const std::size_t end = start + len;

    LogLogPoints train;
    train.x.reserve(n - len);
    train.y.reserve(n - len);
    for (std::size_t t = 0; t < n; ++t) {
      if (t >= start && t < end) continue;
      train.x.push_back(pts.x[perm[t]]);
      train.y.push_back(pts.y[perm[t]]);
    }

    long double se = 0.0L;
    if (model == CvModel::ols) {
      OlsFit fit = fit_ols(train);
      for (std::size_t t = start; t < end; ++t) {
        double r = pts.y[perm[t]] - fit.predict(pts.x[perm[t]]);
        se += static_cast<long double>(r) * r;
      }
    } else {
      DualRegimeFit fit = fit_single_knot(train, min_segment_frac);
      for (std::size_t t = start; t < end; ++t) {
        double r = pts.y[perm[t]] - fit.predict(pts.x[perm[t]]);
        se += static_cast<long double>(r) * r;
      }
    }
    total += static_cast<double>(se / static_cast<long double>(len));
    start = end;
  }
  return total / static_cast<double>(k);
}

data::Regime classify_regime(const data::Item& item, const DualRegimeFit& fit) {
  if (item.likes < 1 || item.dislikes < 1)
    throw std::invalid_argument("regime needs likes >= 1 and dislikes >= 1");
  const double lx = std::log(static_cast<double>(item.likes));
  const double ly = std::log(static_cast<double>(item.dislikes));
  if (lx > fit.knot && ly > fit.d_at_lc) return data::Regime::global;
  return data::Regime::local;
}

Histogram2D hist2d_loglog(const LogLogPoints& pts, int bins) {
  if (pts.size() == 0) throw std::invalid_argument("no points to bin");
  if (bins < 1) throw std::invalid_argument("bins must be >= 1");

  const auto [xmn, xmx] = std::minmax_element(pts.x.begin(), pts.x.end());
  const auto [ymn, ymx] = std::minmax_element(pts.y.begin(), pts.y.end());
  double x_lo = *xmn, x_hi = *xmx, y_lo = *ymn, y_hi = *ymx;
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;  // degenerate spread still bins
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;

  Histogram2D h;
  h.bins = bins;
  const std::size_t b = static_cast<std::size_t>(bins);
  h.x_edges.resize(b + 1);
  h.y_edges.resize(b + 1);
  for (std::size_t i = 0; i <= b; ++i) {
    double f = static_cast<double>(i) / static_cast<double>(bins);
    h.x_edges[i] = x_lo + f * (x_hi - x_lo);
    h.y_edges[i] = y_lo + f * (y_hi - y_lo);
  }
  h.counts.assign(b * b, 0);

  const double xw = (x_hi - x_lo) / static_cast<double>(bins);
  const double yw = (y_hi - y_lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::size_t ix = std::min(
        b - 1, static_cast<std::size_t>(std::max(0.0, (pts.x[i] - x_lo) / xw)));
    std::size_t iy = std::min(
        b - 1, static_cast<std::size_t>(std::max(0.0, (pts.y[i] - y_lo) / yw)));
    ++h.counts[ix * b + iy];
  }
  return h;
}

}  // namespace evalpulse::dualreg
