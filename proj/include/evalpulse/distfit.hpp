#pragma once
// Maximum-likelihood fits of four heavy-tail candidate families on
// [xmin, inf), pairwise log-likelihood-ratio model selection and
// Kolmogorov-Smirnov goodness of fit. All densities are conditioned on
// x >= xmin so the families compete on a common support.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evalpulse::distfit {

enum class Family { power_law, lognormal, truncated_power_law, exponential };

std::string family_name(Family f);
std::size_t family_param_count(Family f);

struct DistFit {
  Family family = Family::lognormal;
  double mu = 0.0;     // lognormal location
  double sigma = 0.0;  // lognormal scale
  double alpha = 0.0;  // power-law / truncated power-law exponent
  double rate = 0.0;   // exponential rate or truncated power-law cutoff
  double xmin = 1.0;
  double loglik = 0.0;
  std::size_t n = 0;

  // Additive normalization constant of the conditional log-density.
  double log_norm() const;
  // Conditional log-density at x (x >= xmin assumed).
  double log_density(double x) const;
  // Conditional CDF on [xmin, inf).
  double cdf(double x) const;
};

// Fits one family by closed-form MLE, or Nelder-Mead for the truncated
// power law. Throws std::invalid_argument on bad inputs (empty sample,
// values below xmin, nonpositive xmin for the power-law families) and
// std::runtime_error on degenerate data or optimizer non-convergence.
DistFit fit_distribution(std::span<const double> samples, Family family,
                         double xmin = 1.0);

struct LLRResult {
  double r = 0.0;  // summed log-likelihood difference; positive favors first
  double p = 1.0;  // two-sided normal p for the paired difference
  Family first;
  Family second;
};

// Paired log-likelihood-ratio test. Both fits must come from exactly these
// samples with the same xmin.
LLRResult compare_fits(const DistFit& a, const DistFit& b,
                       std::span<const double> samples);

// KS distance between the fitted conditional CDF and the empirical CDF.
double ks_distance(const DistFit& fit, std::span<const double> samples);

struct DistFitReport {
  std::vector<DistFit> fits;           // families that fitted cleanly
  std::vector<LLRResult> comparisons;  // every pair among fitted families
  Family best;
  double ks = 0.0;                     // KS distance of the winner
  bool significant_winner = false;     // best won every pairwise test at p<.05
  std::optional<std::string> tpl_failure;  // message when that fit failed
};

// Fits all four families, runs the pairwise tests and picks a winner. A
// family that beats every rival at p < 0.05 wins outright; otherwise the
// most parsimonious family that no rival beats significantly is reported
// with significant_winner = false.
DistFitReport best_fit(std::span<const double> samples, double xmin = 1.0);

struct Histogram1D {
  std::vector<double> edges;    // bins+1 edges at powers of 10^(k/bpd)
  std::vector<double> centers;  // geometric bin centers
  std::vector<double> densities;
  std::vector<std::size_t> counts;
};

// Exponentially binned empirical pdf: density = count / (n * bin_width).
// Samples must be positive.
Histogram1D exponential_binned_pdf(std::span<const double> samples,
                                   int bins_per_decade = 10);

}  // namespace evalpulse::distfit
