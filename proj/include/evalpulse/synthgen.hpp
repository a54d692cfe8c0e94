#pragma once
// Seeded synthetic-data generators. These produce the ground-truth
// datasets the analysis stages are validated against, plus decorators
// that attach deterministic texts and timestamps so generated data can
// flow through the full pipeline.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "evalpulse/dataset.hpp"
#include "evalpulse/inference.hpp"

namespace evalpulse::synthgen {

// Continuous exp(Normal(mu, sigma)) draws, in generation order.
std::vector<double> gen_lognormal_samples(std::size_t n, double mu,
                                          double sigma, std::uint64_t seed);

// Same draws rounded up to integer counts >= 1.
std::vector<long long> gen_lognormal_counts(std::size_t n, double mu,
                                            double sigma, std::uint64_t seed);

// Multiplicative growth: every item starts at 1 and takes `steps` i.i.d.
// lognormal shocks exp(Normal(0, shock_sd)); results round up to >= 1.
std::vector<long long> gibrat_growth(std::size_t n, int steps,
                                     double shock_sd, std::uint64_t seed);

struct DualRegimeParams {
  double knot = 0.0;       // ln of the crossover likes count
  double lambda = 0.0;     // slope below the knot
  double gamma = 0.0;      // slope above the knot
  double intercept = 0.0;  // ln dislikes at ln likes = 0
  double noise_sd = 0.0;
  double like_mu = 0.0;    // lognormal likes marginal
  double like_sigma = 1.0;
};

// Items whose log counts follow a hinge relation: ln D = intercept +
// lambda * min(ln L, knot) + gamma * max(0, ln L - knot) + noise. The
// relation is evaluated on the continuous ln L draw, then both counts are
// rounded up to >= 1.
data::EvaluationDataset gen_dual_regime(std::size_t n,
                                        const DualRegimeParams& params,
                                        std::uint64_t seed);

struct EmotionEffectData {
  inference::Design design;     // uniform [0,1] predictors x1..xk
  std::vector<double> y;        // linear response, or 0/1 labels
  std::vector<int> labels;      // filled for the logistic kind
};

// Planted-coefficient regression data. coefs holds the intercept first.
// Logistic draws Bernoulli labels through the inverse logit; linear adds
// Gaussian noise with sd noise_sd.
EmotionEffectData gen_emotion_effect(std::size_t n, inference::ModelKind kind,
                                     const std::vector<double>& coefs,
                                     double noise_sd, std::uint64_t seed);

// Deterministic English-looking texts built from a small vocabulary that
// overlaps the bundled lexicons. Every text starts with a stopword so the
// language filter keeps it.
void attach_texts(data::EvaluationDataset& ds, std::uint64_t seed);

// created_at between 400 and 699 days before as_of, so the default age
// filter keeps every item.
void attach_timestamps(data::EvaluationDataset& ds, std::int64_t as_of,
                       std::uint64_t seed);

}  // namespace evalpulse::synthgen
