#include "evalpulse/distfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <gsl/gsl_cdf.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_sf_gamma.h>

namespace evalpulse::distfit {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// GSL must report through status codes, not abort().
const int kGslHandlerOff = [] {
  gsl_set_error_handler_off();
  return 0;
}();

// Neumaier-compensated sum; fixed accumulation order keeps log-likelihoods
// bit-identical across runs.
struct CompensatedSum {
  double s = 0.0;
  double c = 0.0;

  void add(double x) {
    double t = s + x;
    if (std::fabs(s) >= std::fabs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }

  double value() const { return s + c; }
};

double normal_upper_tail(double z) { return gsl_cdf_ugaussian_Q(z); }

// ln Gamma(s, z), upper incomplete, via GSL; -inf when the value is not
// representable (treated as an infeasible region by the optimizer).
double log_upper_gamma(double s, double z) {
  gsl_sf_result res;
  int status = gsl_sf_gamma_inc_e(s, z, &res);
  if (status != 0 || !(res.val > 0.0) || !std::isfinite(res.val)) return kNegInf;
  return std::log(res.val);
}

struct TplStats {
  double n = 0.0;
  double sum_log = 0.0;  // sum of ln x
  double sum = 0.0;      // sum of x
  double xmin = 1.0;
};

// Conditional TPL log-likelihood from sufficient statistics:
// l = n*[(1-a) ln rate - ln Gamma(1-a, rate*xmin)] - a*sum_log - rate*sum.
double tpl_loglik(double alpha, double rate, const TplStats& st) {
  if (!(rate > 0.0)) return kNegInf;
  double lg = log_upper_gamma(1.0 - alpha, rate * st.xmin);
  if (!std::isfinite(lg)) return kNegInf;
  return st.n * ((1.0 - alpha) * std::log(rate) - lg) -
         alpha * st.sum_log - rate * st.sum;
}

double tpl_negloglik(const gsl_vector* v, void* params) {
  const auto* st = static_cast<const TplStats*>(params);
  double alpha = gsl_vector_get(v, 0);
  double lrate = gsl_vector_get(v, 1);
  if (alpha < -5.0 || alpha > 30.0 || lrate < -28.0 || lrate > 14.0)
    return 1e12;
  double ll = tpl_loglik(alpha, std::exp(lrate), *st);
  if (!std::isfinite(ll)) return 1e12;
  return -ll;
}

void validate_samples(std::span<const double> samples, double xmin,
                      bool need_positive) {
  if (samples.size() < 3)
    throw std::invalid_argument("need at least 3 samples");
  for (double x : samples) {
    if (!std::isfinite(x))
      throw std::invalid_argument("samples must be finite");
    if (x < xmin)
      throw std::invalid_argument("sample below xmin");
    if (need_positive && x <= 0.0)
      throw std::invalid_argument("samples must be positive for this family");
  }
}

// Per-point conditional log-densities with the normalization constant
// hoisted out of the loop.
std::vector<double> log_densities(const DistFit& f,
                                  std::span<const double> samples) {
  std::vector<double> out(samples.size());
  const double c = f.log_norm();
  switch (f.family) {
    case Family::power_law:
      for (std::size_t i = 0; i < samples.size(); ++i)
        out[i] = c - f.alpha * std::log(samples[i]);
      break;
    case Family::lognormal:
      for (std::size_t i = 0; i < samples.size(); ++i) {
        double lx = std::log(samples[i]);
        double zz = (lx - f.mu) / f.sigma;
        out[i] = c - lx - 0.5 * zz * zz;
      }
      break;
    case Family::truncated_power_law:
      for (std::size_t i = 0; i < samples.size(); ++i)
        out[i] = c - f.alpha * std::log(samples[i]) - f.rate * samples[i];
      break;
    case Family::exponential:
      for (std::size_t i = 0; i < samples.size(); ++i)
        out[i] = c - f.rate * samples[i];
      break;
  }
  return out;
}

double summed_loglik(const DistFit& f, std::span<const double> samples) {
  CompensatedSum acc;
  for (double lp : log_densities(f, samples)) acc.add(lp);
  return acc.value();
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::power_law: return "power_law";
    case Family::lognormal: return "lognormal";
    case Family::truncated_power_law: return "truncated_power_law";
    case Family::exponential: return "exponential";
  }
  return "unknown";
}

std::size_t family_param_count(Family f) {
  switch (f) {
    case Family::power_law: return 1;
    case Family::lognormal: return 2;
    case Family::truncated_power_law: return 2;
    case Family::exponential: return 1;
  }
  return 0;
}

double DistFit::log_norm() const {
  switch (family) {
    case Family::power_law:
      return std::log(alpha - 1.0) + (alpha - 1.0) * std::log(xmin);
    case Family::lognormal: {
      double tail = 1.0;
      if (xmin > 0.0)
        tail = normal_upper_tail((std::log(xmin) - mu) / sigma);
      return -std::log(sigma) - 0.5 * std::log(2.0 * kPi) - std::log(tail);
    }
    case Family::truncated_power_law:
      return (1.0 - alpha) * std::log(rate) -
             log_upper_gamma(1.0 - alpha, rate * xmin);
    case Family::exponential:
      return std::log(rate) + rate * xmin;
  }
  return kNegInf;
}

double DistFit::log_density(double x) const {
  switch (family) {
    case Family::power_law:
      return log_norm() - alpha * std::log(x);
    case Family::lognormal: {
      double lx = std::log(x);
      double zz = (lx - mu) / sigma;
      return log_norm() - lx - 0.5 * zz * zz;
    }
    case Family::truncated_power_law:
      return log_norm() - alpha * std::log(x) - rate * x;
    case Family::exponential:
      return log_norm() - rate * x;
  }
  return kNegInf;
}

double DistFit::cdf(double x) const {
  if (x <= xmin) return 0.0;
  switch (family) {
    case Family::power_law:
      return 1.0 - std::pow(x / xmin, 1.0 - alpha);
    case Family::lognormal: {
      double hi = normal_upper_tail((std::log(x) - mu) / sigma);
      double tail = xmin > 0.0
                        ? normal_upper_tail((std::log(xmin) - mu) / sigma)
                        : 1.0;
      return 1.0 - hi / tail;
    }
    case Family::truncated_power_law: {
      double lg_x = log_upper_gamma(1.0 - alpha, rate * x);
      double lg_min = log_upper_gamma(1.0 - alpha, rate * xmin);
      if (!std::isfinite(lg_x)) return 1.0;
      return 1.0 - std::exp(lg_x - lg_min);
    }
    case Family::exponential:
      return 1.0 - std::exp(-rate * (x - xmin));
  }
  return 0.0;
}

DistFit fit_distribution(std::span<const double> samples, Family family,
                         double xmin) {
  const bool power_family =
      family == Family::power_law || family == Family::truncated_power_law;
  if (power_family && !(xmin > 0.0))
    throw std::invalid_argument("xmin must be positive for power-law families");
  validate_samples(samples, xmin,
                   power_family || family == Family::lognormal);

  const double n = static_cast<double>(samples.size());
  DistFit fit;
  fit.family = family;
  fit.xmin = xmin;
  fit.n = samples.size();

  CompensatedSum sum_log, sum;
  for (double x : samples) {
    sum.add(x);
    if (family != Family::exponential) sum_log.add(std::log(x));
  }

  switch (family) {
    case Family::power_law: {
      double denom = sum_log.value() - n * std::log(xmin);
      if (denom <= 0.0)
        throw std::runtime_error(
            "degenerate sample: all values at xmin, power-law exponent diverges");
      fit.alpha = 1.0 + n / denom;
      break;
    }
    case Family::lognormal: {
      fit.mu = sum_log.value() / n;
      CompensatedSum ss;
      for (double x : samples) {
        double d = std::log(x) - fit.mu;
        ss.add(d * d);
      }
      fit.sigma = std::sqrt(ss.value() / n);
      if (!(fit.sigma > 1e-12))
        throw std::runtime_error(
            "degenerate sample: zero variance of ln x, lognormal sigma is 0");
      break;
    }
    case Family::exponential: {
      double mean_excess = sum.value() / n - xmin;
      if (mean_excess <= 0.0)
        throw std::runtime_error(
            "degenerate sample: zero mean excess over xmin, rate diverges");
      fit.rate = 1.0 / mean_excess;
      break;
    }
    case Family::truncated_power_law: {
      TplStats st{n, sum_log.value(), sum.value(), xmin};

      // Start from the pure power-law exponent and the mean-based rate.
      double denom = st.sum_log - n * std::log(xmin);
      double alpha0 = denom > 0.0 ? 1.0 + n / denom : 2.0;
      double rate0 = n / st.sum;

      gsl_vector* x0 = gsl_vector_alloc(2);
      gsl_vector* step = gsl_vector_alloc(2);
      gsl_vector_set(x0, 0, alpha0);
      gsl_vector_set(x0, 1, std::log(rate0));
      gsl_vector_set(step, 0, 0.5);
      gsl_vector_set(step, 1, 0.5);

      gsl_multimin_function func;
      func.n = 2;
      func.f = &tpl_negloglik;
      func.params = &st;

      gsl_multimin_fminimizer* mn = gsl_multimin_fminimizer_alloc(
          gsl_multimin_fminimizer_nmsimplex2, 2);
      gsl_multimin_fminimizer_set(mn, &func, x0, step);

      int status = GSL_CONTINUE;
      std::size_t iter = 0;
      const std::size_t max_iter = 5000;
      double size = 0.0;
      while (status == GSL_CONTINUE && iter < max_iter) {
        ++iter;
        if (gsl_multimin_fminimizer_iterate(mn) != 0) break;
        size = gsl_multimin_fminimizer_size(mn);
        status = gsl_multimin_test_size(size, 1e-6);
      }
      double best_alpha = gsl_vector_get(mn->x, 0);
      double best_rate = std::exp(gsl_vector_get(mn->x, 1));
      double best_neg = mn->fval;
      gsl_multimin_fminimizer_free(mn);
      gsl_vector_free(x0);
      gsl_vector_free(step);

      if (status != GSL_SUCCESS || best_neg >= 1e12)
        throw std::runtime_error(
            "truncated power-law fit did not converge after " +
            std::to_string(iter) + " iterations (simplex size " +
            std::to_string(size) + ", alpha " + std::to_string(best_alpha) +
            ", rate " + std::to_string(best_rate) + ")");

      fit.alpha = best_alpha;
      fit.rate = best_rate;
      break;
    }
  }

  fit.loglik = summed_loglik(fit, samples);
  return fit;
}

LLRResult compare_fits(const DistFit& a, const DistFit& b,
                       std::span<const double> samples) {
  if (a.n != samples.size() || b.n != samples.size())
    throw std::invalid_argument("fits were not computed on these samples");
  if (a.xmin != b.xmin)
    throw std::invalid_argument("fits disagree on xmin");

  const std::vector<double> la = log_densities(a, samples);
  const std::vector<double> lb = log_densities(b, samples);
  const double n = static_cast<double>(samples.size());

  CompensatedSum rsum;
  for (std::size_t i = 0; i < la.size(); ++i) rsum.add(la[i] - lb[i]);
  const double r = rsum.value();
  const double mean = r / n;

  CompensatedSum vsum;
  for (std::size_t i = 0; i < la.size(); ++i) {
    double d = (la[i] - lb[i]) - mean;
    vsum.add(d * d);
  }
  const double sd = std::sqrt(vsum.value() / n);

  LLRResult res;
  res.r = r;
  res.first = a.family;
  res.second = b.family;
  if (sd < 1e-12) {
    // The two densities agree pointwise; only an exactly zero ratio is
    // "no evidence", anything else is a systematic offset.
    res.p = std::fabs(r) < 1e-9 ? 1.0 : 0.0;
  } else {
    double z = r / (sd * std::sqrt(n));
    res.p = 2.0 * normal_upper_tail(std::fabs(z));
  }
  return res;
}

double ks_distance(const DistFit& fit, std::span<const double> samples) {
  if (fit.n != samples.size())
    throw std::invalid_argument("fit was not computed on these samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    double f = fit.cdf(sorted[i]);
    double hi = (static_cast<double>(i) + 1.0) / n - f;
    double lo = f - static_cast<double>(i) / n;
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

DistFitReport best_fit(std::span<const double> samples, double xmin) {
  DistFitReport rep;
  for (Family fam : {Family::power_law, Family::lognormal,
                     Family::truncated_power_law, Family::exponential}) {
    if (fam == Family::truncated_power_law) {
      try {
        rep.fits.push_back(fit_distribution(samples, fam, xmin));
      } catch (const std::runtime_error& e) {
        rep.tpl_failure = e.what();
      }
    } else {
      rep.fits.push_back(fit_distribution(samples, fam, xmin));
    }
  }
  if (rep.fits.empty()) throw std::runtime_error("no family could be fitted");

  const std::size_t m = rep.fits.size();
  // wins[i][j] is true when family i beats family j at p < 0.05.
  std::vector<std::vector<bool>> beats(m, std::vector<bool>(m, false));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      LLRResult llr = compare_fits(rep.fits[i], rep.fits[j], samples);
      rep.comparisons.push_back(llr);
      if (llr.p < 0.05) {
        if (llr.r > 0.0) beats[i][j] = true;
        if (llr.r < 0.0) beats[j][i] = true;
      }
    }
  }

  std::size_t pick = m;
  for (std::size_t i = 0; i < m && pick == m; ++i) {
    bool all = true;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i && !beats[i][j]) all = false;
    }
    if (all) {
      pick = i;
      rep.significant_winner = true;
    }
  }

  if (pick == m) {
    // No outright winner. Among families no rival beats, prefer the most
    // parsimonious, then the higher likelihood; a two-parameter family
    // that cannot significantly improve on a one-parameter rival does not
    // get picked on in-sample likelihood alone.
    for (std::size_t i = 0; i < m; ++i) {
      bool beaten = false;
      for (std::size_t j = 0; j < m; ++j)
        if (beats[j][i]) beaten = true;
      if (beaten) continue;
      if (pick == m) {
        pick = i;
        continue;
      }
      std::size_t pi = family_param_count(rep.fits[i].family);
      std::size_t pp = family_param_count(rep.fits[pick].family);
      if (pi < pp || (pi == pp && rep.fits[i].loglik > rep.fits[pick].loglik))
        pick = i;
    }
  }
  if (pick == m) {
    // Every family is beaten by some rival; fall back to raw likelihood.
    pick = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (rep.fits[i].loglik > rep.fits[pick].loglik) pick = i;
  }

  rep.best = rep.fits[pick].family;
  rep.ks = ks_distance(rep.fits[pick], samples);
  return rep;
}

Histogram1D exponential_binned_pdf(std::span<const double> samples,
                                   int bins_per_decade) {
  if (samples.empty())
    throw std::invalid_argument("samples must be non-empty");
  if (bins_per_decade < 1)
    throw std::invalid_argument("bins_per_decade must be >= 1");
  for (double x : samples)
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument("samples must be positive and finite");

  const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
  const double mn = *mn_it, mx = *mx_it;
  const double bpd = static_cast<double>(bins_per_decade);

  auto edge = [&](long long k) {
    return std::pow(10.0, static_cast<double>(k) / bpd);
  };

  // Largest edge <= min; the epsilon absorbs log10 rounding at exact powers.
  long long k_lo =
      static_cast<long long>(std::floor(bpd * std::log10(mn) + 1e-9));
  while (edge(k_lo) > mn) --k_lo;
  while (edge(k_lo + 1) <= mn) ++k_lo;

  // Smallest edge strictly above max.
  long long k_hi =
      static_cast<long long>(std::floor(bpd * std::log10(mx) + 1e-9)) + 1;
  while (edge(k_hi) <= mx) ++k_hi;
  while (k_hi - 1 > k_lo && edge(k_hi - 1) > mx) --k_hi;

  const std::size_t bins = static_cast<std::size_t>(k_hi - k_lo);
  Histogram1D h;
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b)
    h.edges[b] = edge(k_lo + static_cast<long long>(b));
  h.centers.resize(bins);
  h.counts.assign(bins, 0);
  for (std::size_t b = 0; b < bins; ++b)
    h.centers[b] = std::sqrt(h.edges[b] * h.edges[b + 1]);

  for (double x : samples) {
    auto it = std::upper_bound(h.edges.begin(), h.edges.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - h.edges.begin()) - 1;
    if (idx >= bins) idx = bins - 1;
    ++h.counts[idx];
  }

  const double n = static_cast<double>(samples.size());
  h.densities.resize(bins);
  for (std::size_t b = 0; b < bins; ++b)
    h.densities[b] = static_cast<double>(h.counts[b]) /
                     (n * (h.edges[b + 1] - h.edges[b]));
  return h;
}

}  // namespace evalpulse::distfit
