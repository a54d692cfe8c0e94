#include "evalpulse/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <gsl/gsl_cdf.h>

#include "evalpulse/linalg.hpp"

namespace evalpulse::inference {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && v[order[j]] == v[order[i]]) ++j;
    // 1-based ranks; a tie block shares its average rank.
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  long double ma = 0.0L, mb = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<long double>(n);
  mb /= static_cast<long double>(n);
  long double saa = 0.0L, sbb = 0.0L, sab = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0L || sbb <= 0.0L) return kNan;
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

// Two-sided p for Spearman rho via the t approximation on n-2 df.
double spearman_p(double rho, std::size_t n) {
  const double df = static_cast<double>(n) - 2.0;
  const double one_minus = 1.0 - rho * rho;
  if (one_minus < 1e-15) return 0.0;
  double t = std::fabs(rho) * std::sqrt(df / one_minus);
  return 2.0 * gsl_cdf_tdist_Q(t, df);
}

// Design matrix row access with an implicit leading intercept.
double design_at(const Design& d, std::size_t row, std::size_t col) {
  return col == 0 ? 1.0 : d.cols[col - 1][row];
}

std::string column_name(const Design& d, std::size_t col) {
  return col == 0 ? std::string("(Intercept)") : d.names[col - 1];
}

void validate_design(const Design& d, std::size_t ny) {
  if (d.names.size() != d.cols.size())
    throw std::invalid_argument("design names and columns disagree");
  for (const auto& c : d.cols) {
    if (c.size() != ny)
      throw std::invalid_argument("design columns must match y in length");
  }
  for (const auto& c : d.cols)
    for (double v : c)
      if (!std::isfinite(v))
        throw std::invalid_argument("design values must be finite");
}

}  // namespace

CorrelationMatrix spearman_matrix(
    const std::vector<std::string>& names,
    const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size())
    throw std::invalid_argument("names and columns disagree");
  if (columns.empty()) throw std::invalid_argument("no columns");
  const std::size_t n = columns.front().size();
  for (const auto& c : columns)
    if (c.size() != n)
      throw std::invalid_argument("columns must have equal length");
  if (n < 3) throw std::invalid_argument("need at least 3 rows");

  const std::size_t k = names.size();
  CorrelationMatrix m;
  m.names = names;
  m.n = n;
  m.rho.assign(k * k, kNan);
  m.p.assign(k * k, kNan);
  m.constant.resize(k);

  std::vector<std::vector<double>> ranks(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto [mn, mx] = std::minmax_element(columns[i].begin(), columns[i].end());
    m.constant[i] = (*mn == *mx);
    if (!m.constant[i]) ranks[i] = average_ranks(columns[i]);
  }

  for (std::size_t i = 0; i < k; ++i) {
    m.rho[i * k + i] = 1.0;
    m.p[i * k + i] = 0.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      if (m.constant[i] || m.constant[j]) continue;
      double rho = pearson(ranks[i], ranks[j]);
      double p = std::isnan(rho) ? kNan : spearman_p(rho, n);
      m.rho[i * k + j] = m.rho[j * k + i] = rho;
      m.p[i * k + j] = m.p[j * k + i] = p;
    }
  }
  return m;
}

RegressionResult fit_logistic(const Design& design, const std::vector<int>& y) {
  const std::size_t n = y.size();
  validate_design(design, n);
  const std::size_t k = design.cols.size() + 1;
  if (n <= k)
    throw std::invalid_argument("need more observations than parameters");

  std::size_t ones = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw std::invalid_argument("labels must be 0 or 1");
    if (v == 1) ++ones;
  }
  if (ones == 0 || ones == n)
    throw std::runtime_error("labels are single-class, model is undefined");

  // IRLS from beta = 0; each round solves X'WX delta-step in one go via
  // the weighted normal equations.
  std::vector<double> beta(k, 0.0);
  double prev_dev = std::numeric_limits<double>::infinity();
  const int max_rounds = 100;
  for (int round = 0; round < max_rounds; ++round) {
    linalg::SquareMatrix info(k);
    std::vector<double> score(k, 0.0);
    long double dev = 0.0L;

    for (std::size_t i = 0; i < n; ++i) {
      double eta = 0.0;
      for (std::size_t c = 0; c < k; ++c) eta += beta[c] * design_at(design, i, c);
      double mu = 1.0 / (1.0 + std::exp(-eta));
      mu = std::clamp(mu, 1e-12, 1.0 - 1e-12);
      double w = mu * (1.0 - mu);
      double resid = static_cast<double>(y[i]) - mu;
      for (std::size_t a = 0; a < k; ++a) {
        double xa = design_at(design, i, a);
        score[a] += xa * resid;
        for (std::size_t b = a; b < k; ++b)
          info.at(a, b) += w * xa * design_at(design, i, b);
      }
      dev += y[i] == 1 ? -2.0L * std::log(mu) : -2.0L * std::log(1.0 - mu);
    }
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < a; ++b) info.at(a, b) = info.at(b, a);

    std::size_t bad = 0;
    std::vector<double> delta;
    if (!linalg::solve(info, score, delta, &bad))
      throw std::runtime_error("design is collinear at column '" +
                               column_name(design, bad) + "'");
    for (std::size_t c = 0; c < k; ++c) beta[c] += delta[c];

    for (double b : beta) {
      if (std::fabs(b) > 15.0)
        throw std::runtime_error(
            "separation detected: a coefficient diverged past 15");
    }

    double d = static_cast<double>(dev);
    if (std::fabs(prev_dev - d) < 1e-8) break;
    prev_dev = d;
  }
  // Hitting the round limit is a valid stop: the fit is simply taken as is.

  // Fisher information at the final coefficients gives the Wald errors.
  linalg::SquareMatrix info(k);
  long double ll = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    double eta = 0.0;
    for (std::size_t c = 0; c < k; ++c) eta += beta[c] * design_at(design, i, c);
    double mu = 1.0 / (1.0 + std::exp(-eta));
    mu = std::clamp(mu, 1e-12, 1.0 - 1e-12);
    double w = mu * (1.0 - mu);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a; b < k; ++b)
        info.at(a, b) += w * design_at(design, i, a) * design_at(design, i, b);
    ll += y[i] == 1 ? std::log(mu) : std::log(1.0 - mu);
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < a; ++b) info.at(a, b) = info.at(b, a);

  linalg::SquareMatrix cov(k);
  std::size_t bad = 0;
  if (!linalg::invert(info, cov, &bad))
    throw std::runtime_error("design is collinear at column '" +
                             column_name(design, bad) + "'");

  RegressionResult res;
  res.kind = ModelKind::logistic;
  res.n = n;
  res.loglik_full = static_cast<double>(ll);

  // Intercept-only null: mu is the class share.
  const double p1 = static_cast<double>(ones) / static_cast<double>(n);
  res.loglik_null = static_cast<double>(ones) * std::log(p1) +
                    static_cast<double>(n - ones) * std::log(1.0 - p1);
  res.df = k - 1;
  auto [chi2, chi2_p] =
      likelihood_ratio_test(res.loglik_full, res.loglik_null, res.df);
  res.chi2 = chi2;
  res.chi2_p = chi2_p;

  for (std::size_t c = 0; c < k; ++c) {
    Term t;
    t.name = column_name(design, c);
    t.estimate = beta[c];
    t.std_error = std::sqrt(cov.at(c, c));
    t.statistic = t.estimate / t.std_error;
    t.p = 2.0 * gsl_cdf_ugaussian_Q(std::fabs(t.statistic));
    res.terms.push_back(std::move(t));
  }
  return res;
}

RegressionResult fit_linear(const Design& design, const std::vector<double>& y) {
  const std::size_t n = y.size();
  validate_design(design, n);
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("y must be finite");
  const std::size_t k = design.cols.size() + 1;
  if (n <= k)
    throw std::invalid_argument("need more observations than parameters");

  linalg::SquareMatrix xtx(k);
  std::vector<double> xty(k, 0.0);
  {
    std::vector<std::vector<long double>> acc(k,
                                              std::vector<long double>(k, 0.0L));
    std::vector<long double> accy(k, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < k; ++a) {
        double xa = design_at(design, i, a);
        accy[a] += static_cast<long double>(xa) * y[i];
        for (std::size_t b = a; b < k; ++b)
          acc[a][b] += static_cast<long double>(xa) * design_at(design, i, b);
      }
    }
    for (std::size_t a = 0; a < k; ++a) {
      xty[a] = static_cast<double>(accy[a]);
      for (std::size_t b = a; b < k; ++b)
        xtx.at(a, b) = xtx.at(b, a) = static_cast<double>(acc[a][b]);
    }
  }

  std::size_t bad = 0;
  std::vector<double> beta;
  if (!linalg::solve(xtx, xty, beta, &bad))
    throw std::runtime_error("design is rank deficient: column '" +
                             column_name(design, bad) + "' is collinear");

  long double rss = 0.0L, tss = 0.0L;
  long double my = 0.0L;
  for (double v : y) my += v;
  my /= static_cast<long double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double fitv = 0.0;
    for (std::size_t c = 0; c < k; ++c) fitv += beta[c] * design_at(design, i, c);
    long double r = y[i] - fitv;
    long double d = y[i] - my;
    rss += r * r;
    tss += d * d;
  }

  linalg::SquareMatrix cov(k);
  if (!linalg::invert(xtx, cov, &bad))
    throw std::runtime_error("design is rank deficient: column '" +
                             column_name(design, bad) + "' is collinear");

  const double df_resid = static_cast<double>(n - k);
  const double s2 = static_cast<double>(rss) / df_resid;

  RegressionResult res;
  res.kind = ModelKind::linear;
  res.n = n;
  for (std::size_t c = 0; c < k; ++c) {
    Term t;
    t.name = column_name(design, c);
    t.estimate = beta[c];
    t.std_error = std::sqrt(s2 * cov.at(c, c));
    if (t.std_error > 0.0) {
      t.statistic = t.estimate / t.std_error;
      t.p = 2.0 * gsl_cdf_tdist_Q(std::fabs(t.statistic), df_resid);
    } else {
      t.statistic = 0.0;
      t.p = 1.0;
    }
    res.terms.push_back(std::move(t));
  }

  // Gaussian profile likelihoods; a perfect fit is floored so the ratio
  // stays finite.
  const double nn = static_cast<double>(n);
  const double rss_full = std::max(static_cast<double>(rss), 1e-290);
  const double rss_null = std::max(static_cast<double>(tss), 1e-290);
  auto profile_ll = [nn](double r) {
    return -0.5 * nn * (std::log(2.0 * 3.14159265358979323846 * r / nn) + 1.0);
  };
  res.loglik_full = profile_ll(rss_full);
  res.loglik_null = profile_ll(rss_null);
  res.df = k - 1;
  res.chi2 = nn * std::log(rss_null / rss_full);
  res.chi2_p = res.df == 0
                   ? 1.0
                   : gsl_cdf_chisq_Q(res.chi2, static_cast<double>(res.df));
  return res;
}

std::pair<double, double> likelihood_ratio_test(double loglik_full,
                                                double loglik_null,
                                                std::size_t df) {
  double chi2 = 2.0 * (loglik_full - loglik_null);
  if (chi2 < 0.0) chi2 = 0.0;  // numerically tied models
  if (df == 0) return {chi2, 1.0};
  return {chi2, gsl_cdf_chisq_Q(chi2, static_cast<double>(df))};
}

std::pair<std::vector<double>, std::vector<double>> standardize_logcounts(
    const std::vector<long long>& likes, const std::vector<long long>& dislikes) {
  if (likes.size() != dislikes.size())
    throw std::invalid_argument("likes and dislikes must have equal length");
  const std::size_t n = likes.size();
  if (n < 2) throw std::invalid_argument("need at least 2 items");

  auto zscore = [n](const std::vector<long long>& counts, const char* what) {
    std::vector<double> logs(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (counts[i] < 1)
        throw std::invalid_argument(std::string(what) + " must be >= 1");
      logs[i] = std::log(static_cast<double>(counts[i]));
    }
    long double mean = 0.0L;
    for (double v : logs) mean += v;
    mean /= static_cast<long double>(n);
    long double ss = 0.0L;
    for (double v : logs) {
      long double d = v - mean;
      ss += d * d;
    }
    double sd = std::sqrt(static_cast<double>(ss / static_cast<long double>(n - 1)));
    if (!(sd > 0.0))
      throw std::runtime_error(std::string(what) +
                               " has zero spread, z-scores are undefined");
    for (double& v : logs) v = (v - static_cast<double>(mean)) / sd;
    return logs;
  };
  return {zscore(likes, "likes"), zscore(dislikes, "dislikes")};
}

double polarization(double z_l, double z_d) {
  if (z_l > 0.0 && z_d > 0.0) return std::sqrt(z_l * z_d);
  return 0.0;
}

}  // namespace evalpulse::inference
