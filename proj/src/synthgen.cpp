#include "evalpulse/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "evalpulse/rng.hpp"

namespace evalpulse::synthgen {

namespace {

// exp() results are rounded up to integer counts of at least 1; the clamp
// also keeps pathological parameter choices inside long long range.
long long ceil_count(double v) {
  if (!(v > 0.0)) return 1;
  double c = std::ceil(v);
  if (c < 1.0) return 1;
  if (c > 4e18) return static_cast<long long>(4e18);
  return static_cast<long long>(c);
}

std::string item_id(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "item-%07zu", i);
  return buf;
}

}  // namespace

std::vector<double> gen_lognormal_samples(std::size_t n, double mu,
                                          double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  rng::SplitMix64 gen(seed, "gen_lognormal_counts");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(gen.normal(mu, sigma));
  return out;
}

std::vector<long long> gen_lognormal_counts(std::size_t n, double mu,
                                            double sigma, std::uint64_t seed) {
  std::vector<double> samples = gen_lognormal_samples(n, mu, sigma, seed);
  std::vector<long long> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = ceil_count(samples[i]);
  return out;
}

std::vector<long long> gibrat_growth(std::size_t n, int steps, double shock_sd,
                                     std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (shock_sd <= 0.0) throw std::invalid_argument("shock_sd must be positive");
  rng::SplitMix64 gen(seed, "gibrat_growth");
  std::vector<long long> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Multiplicative shocks accumulate additively in log space.
    double w = 0.0;
    for (int s = 0; s < steps; ++s) w += gen.normal(0.0, shock_sd);
    out[i] = ceil_count(std::exp(w));
  }
  return out;
}

data::EvaluationDataset gen_dual_regime(std::size_t n,
                                        const DualRegimeParams& params,
                                        std::uint64_t seed) {
  if (params.like_sigma <= 0.0)
    throw std::invalid_argument("like_sigma must be positive");
  if (params.noise_sd < 0.0)
    throw std::invalid_argument("noise_sd must be >= 0");

  rng::SplitMix64 gen(seed, "gen_dual_regime");
  data::EvaluationDataset ds;
  ds.source_label = "synthetic";
  ds.items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // The hinge relation is evaluated on the continuous log draw; rounding
    // to counts happens only afterwards.
    double lnl = gen.normal(params.like_mu, params.like_sigma);
    double hinge = params.intercept +
                   params.lambda * std::min(lnl, params.knot) +
                   params.gamma * std::max(0.0, lnl - params.knot);
    double lnd = hinge + gen.normal(0.0, params.noise_sd);

    data::Item item;
    item.id = item_id(i);
    item.likes = ceil_count(std::exp(lnl));
    item.dislikes = ceil_count(std::exp(lnd));
    ds.items.push_back(std::move(item));
  }
  return ds;
}

EmotionEffectData gen_emotion_effect(std::size_t n, inference::ModelKind kind,
                                     const std::vector<double>& coefs,
                                     double noise_sd, std::uint64_t seed) {
  if (coefs.empty())
    throw std::invalid_argument("coefs must hold at least the intercept");
  if (kind == inference::ModelKind::linear && noise_sd < 0.0)
    throw std::invalid_argument("noise_sd must be >= 0");

  const std::size_t k = coefs.size() - 1;
  rng::SplitMix64 gen(seed, "gen_emotion_effect");

  EmotionEffectData out;
  out.design.names.reserve(k);
  out.design.cols.assign(k, {});
  for (std::size_t c = 0; c < k; ++c) {
    out.design.names.push_back("x" + std::to_string(c + 1));
    out.design.cols[c].reserve(n);
  }
  out.y.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    double eta = coefs[0];
    for (std::size_t c = 0; c < k; ++c) {
      double x = gen.uniform01();
      out.design.cols[c].push_back(x);
      eta += coefs[c + 1] * x;
    }
    if (kind == inference::ModelKind::logistic) {
      double p = 1.0 / (1.0 + std::exp(-eta));
      int label = gen.uniform01() < p ? 1 : 0;
      out.labels.push_back(label);
      out.y.push_back(static_cast<double>(label));
    } else {
      out.y.push_back(eta + gen.normal(0.0, noise_sd));
    }
  }
  return out;
}

namespace {

// Vocabulary mirrors the bundled demo lexicons, so generated texts score
// under them end to end.
const char* const kOpeners[] = {"the", "this", "my", "it", "and", "a"};
const char* const kGlue[] = {"the",  "this", "my", "is",   "was", "of",
                             "and",  "it",   "a",  "that", "on",  "in"};
const char* const kNeutral[] = {"video",  "picture", "story",  "update",
                                "song",   "game",    "news",   "photo",
                                "recipe", "review",  "idea",   "weather",
                                "house",  "coffee",  "movie",  "music"};
const char* const kPositive[] = {"love",    "great", "good",      "happy",
                                 "awesome", "amazing", "nice",    "fun",
                                 "best",    "beautiful", "sweet", "cool"};
const char* const kNegative[] = {"hate",   "bad",      "awful",  "terrible",
                                 "boring", "sad",      "worst",  "angry",
                                 "stupid", "horrible", "ugly",   "annoying"};
const char* const kBooster[] = {"very",    "really",     "so",
                                "extremely", "totally", "absolutely"};
const char* const kNegator[] = {"not", "never", "no", "hardly", "barely"};

template <std::size_t N>
const char* pick(rng::SplitMix64& gen, const char* const (&words)[N]) {
  return words[gen.bounded(N)];
}

}  // namespace

void attach_texts(data::EvaluationDataset& ds, std::uint64_t seed) {
  rng::SplitMix64 gen(seed, "attach_texts");
  for (data::Item& item : ds.items) {
    std::string text = pick(gen, kOpeners);
    const std::size_t words = 2 + gen.bounded(6);  // 3..8 words total
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t roll = gen.bounded(100);
      const char* word;
      if (roll < 30) word = pick(gen, kGlue);
      else if (roll < 55) word = pick(gen, kNeutral);
      else if (roll < 70) word = pick(gen, kPositive);
      else if (roll < 85) word = pick(gen, kNegative);
      else if (roll < 92) word = pick(gen, kBooster);
      else word = pick(gen, kNegator);
      text += ' ';
      text += word;
    }
    std::uint64_t bang = gen.bounded(100);
    if (bang < 15) text += bang < 5 ? "!!" : "!";
    item.text = std::move(text);
  }
}

void attach_timestamps(data::EvaluationDataset& ds, std::int64_t as_of,
                       std::uint64_t seed) {
  rng::SplitMix64 gen(seed, "attach_timestamps");
  for (data::Item& item : ds.items) {
    std::int64_t days = 400 + static_cast<std::int64_t>(gen.bounded(300));
    item.created_at = as_of - days * 86400;
  }
  ds.as_of = as_of;
}

}  // namespace evalpulse::synthgen
