#pragma once
// Statistical screening and modeling: Spearman correlation matrices,
// logistic and linear regression with Wald and likelihood-ratio tests,
// standardization of log counts and the polarization index.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace evalpulse::inference {

struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<double> rho;      // k*k row-major; NaN where undefined
  std::vector<double> p;        // same layout
  std::vector<bool> constant;   // per-variable degeneracy flag
  std::size_t n = 0;            // rows used (after listwise deletion)

  std::size_t k() const { return names.size(); }
  double rho_at(std::size_t i, std::size_t j) const { return rho[i * k() + j]; }
  double p_at(std::size_t i, std::size_t j) const { return p[i * k() + j]; }
};

// Spearman rho with average ranks for ties; p from the t approximation.
// Columns must be equal-length with n >= 3; callers do listwise deletion.
// Constant columns are flagged and their cells left undefined, with a unit
// diagonal kept.
CorrelationMatrix spearman_matrix(
    const std::vector<std::string>& names,
    const std::vector<std::vector<double>>& columns);

// Predictor columns, no intercept; one is prepended by the fits.
struct Design {
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;

  std::size_t n() const { return cols.empty() ? 0 : cols.front().size(); }
};

struct Term {
  std::string name;  // "(Intercept)" or the predictor name
  double estimate = 0.0;
  double std_error = 0.0;
  double statistic = 0.0;  // Wald z (logistic) or t (linear)
  double p = 0.0;
};

enum class ModelKind { logistic, linear };

struct RegressionResult {
  ModelKind kind = ModelKind::linear;
  std::vector<Term> terms;  // intercept first, then design order
  std::size_t n = 0;
  double loglik_full = 0.0;
  double loglik_null = 0.0;  // intercept-only
  double chi2 = 0.0;         // likelihood-ratio statistic vs the null
  std::size_t df = 0;
  double chi2_p = 1.0;
};

// Logistic regression by iteratively reweighted least squares from a zero
// start; stops when the deviance changes by < 1e-8 or after 100 rounds.
// Throws when y is single-class, n <= parameters, the design is collinear,
// or a coefficient runs past +-15 (separation).
RegressionResult fit_logistic(const Design& design, const std::vector<int>& y);

// Ordinary least squares with t statistics; the chi2 fields carry the
// Gaussian profile-likelihood ratio test against the intercept-only model.
// Throws on rank deficiency, naming the collinear column.
RegressionResult fit_linear(const Design& design, const std::vector<double>& y);

// Returns {chi2, p} for 2*(loglik_full - loglik_null) on df degrees of
// freedom; df = 0 gives p = 1.
std::pair<double, double> likelihood_ratio_test(double loglik_full,
                                                double loglik_null,
                                                std::size_t df);

// Z-scores of ln(likes) and ln(dislikes), sample (n-1) standard deviation.
// All counts must be >= 1 and both columns must have positive spread.
std::pair<std::vector<double>, std::vector<double>> standardize_logcounts(
    const std::vector<long long>& likes,
    const std::vector<long long>& dislikes);

// sqrt(z_l * z_d) when both z-scores are positive, else 0.
double polarization(double z_l, double z_d);

}  // namespace evalpulse::inference
