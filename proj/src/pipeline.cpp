#include "evalpulse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "evalpulse/distfit.hpp"
#include "evalpulse/dualreg.hpp"
#include "evalpulse/inference.hpp"
#include "evalpulse/sentiment.hpp"

namespace evalpulse::pipeline {

namespace {

// Non-finite values are not representable in JSON; emit null instead.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json skipped_section(const std::string& reason) {
  Json j;
  j["skipped"] = true;
  j["reason"] = reason;
  return j;
}

// Runs pipeline stages, records their status and remembers failures.
struct StageTracker {
  Json stages = Json::array();
  bool success = true;

  template <typename F>
  bool run(const std::string& name, F&& body) {
    Json entry;
    entry["name"] = name;
    try {
      body();
      entry["status"] = "ok";
      stages.push_back(std::move(entry));
      return true;
    } catch (const std::exception& e) {
      entry["status"] = "failed";
      entry["reason"] = e.what();
      stages.push_back(std::move(entry));
      success = false;
      return false;
    }
  }

  void skip(const std::string& name, const std::string& reason) {
    Json entry;
    entry["name"] = name;
    entry["status"] = "skipped";
    entry["reason"] = reason;
    stages.push_back(std::move(entry));
  }
};

void validate_config(const RunConfig& cfg, bool need_lexicons) {
  if (cfg.input_path.empty())
    throw std::invalid_argument("input path must be set");
  if (cfg.as_of == 0)
    throw std::invalid_argument("as_of must be set to the crawl timestamp");
  if (need_lexicons && !cfg.skip_emotions &&
      (cfg.vad_lexicon_path.empty() || cfg.pn_lexicon_path.empty()))
    throw std::invalid_argument(
        "emotion scoring needs both lexicons (or pass skip_emotions)");
  if (cfg.min_age_days < 0)
    throw std::invalid_argument("min_age_days must be >= 0");
  if (cfg.cv_folds < 2) throw std::invalid_argument("cv_folds must be >= 2");
  if (cfg.bins_per_decade < 1)
    throw std::invalid_argument("bins_per_decade must be >= 1");
  if (cfg.hist2d_bins < 1)
    throw std::invalid_argument("hist2d_bins must be >= 1");
  if (cfg.stopword_threshold < 0.0 || cfg.stopword_threshold > 1.0)
    throw std::invalid_argument("stopword_threshold must be in [0,1]");
  if (cfg.min_segment_frac < 0.0 || cfg.min_segment_frac >= 0.5)
    throw std::invalid_argument("min_segment_frac must be in [0, 0.5)");
}

// The tracked filter stage, shared by the full run and the single-stage
// commands. Returns true when the stage ran cleanly.
bool filter_stage(const RunConfig& cfg, const data::EvaluationDataset& raw,
                  StageTracker& tracker, data::EvaluationDataset& filtered,
                  Json& filter_json) {
  return tracker.run("filter", [&] {
    data::FilterOptions opts;
    opts.min_age_days = cfg.min_age_days;
    opts.min_likes = cfg.min_likes;
    opts.min_dislikes = cfg.min_dislikes;
    if (!cfg.assume_english) {
      double threshold = cfg.stopword_threshold;
      opts.language_check = [threshold](const std::string& text) {
        return sentiment::detect_english(
            text, sentiment::default_english_stopwords(), threshold);
      };
    }
    auto [ds, rep] = data::filter_items(raw, opts);
    filtered = std::move(ds);
    filter_json["n_crawled"] = rep.n_crawled;
    filter_json["n_year"] = rep.n_year;
    filter_json["n_ld"] = rep.n_ld;
    filter_json["total_likes"] = rep.total_likes;
    filter_json["total_dislikes"] = rep.total_dislikes;
    filter_json["high_removal_warning"] = rep.high_removal_warning;
  });
}

Json fit_to_json(const distfit::DistFit& f) {
  Json j;
  switch (f.family) {
    case distfit::Family::power_law:
      j["alpha"] = num(f.alpha);
      break;
    case distfit::Family::lognormal:
      j["mu"] = num(f.mu);
      j["sigma"] = num(f.sigma);
      break;
    case distfit::Family::truncated_power_law:
      j["alpha"] = num(f.alpha);
      j["rate"] = num(f.rate);
      break;
    case distfit::Family::exponential:
      j["rate"] = num(f.rate);
      break;
  }
  j["loglik"] = num(f.loglik);
  return j;
}

Json distfit_section(const std::vector<double>& samples, double xmin,
                     int bins_per_decade) {
  distfit::DistFitReport rep = distfit::best_fit(samples, xmin);

  Json j;
  j["n"] = samples.size();
  j["xmin"] = num(xmin);
  Json fits;
  for (const auto& f : rep.fits)
    fits[distfit::family_name(f.family)] = fit_to_json(f);
  j["fits"] = std::move(fits);

  Json comps = Json::array();
  for (const auto& c : rep.comparisons) {
    Json e;
    e["first"] = distfit::family_name(c.first);
    e["second"] = distfit::family_name(c.second);
    e["r"] = num(c.r);
    e["p"] = num(c.p);
    comps.push_back(std::move(e));
  }
  j["comparisons"] = std::move(comps);
  j["best"] = distfit::family_name(rep.best);
  j["significant_winner"] = rep.significant_winner;
  j["ks"] = num(rep.ks);
  if (rep.tpl_failure) j["tpl_failure"] = *rep.tpl_failure;

  distfit::Histogram1D h =
      distfit::exponential_binned_pdf(samples, bins_per_decade);
  Json hist;
  hist["edges"] = h.edges;
  hist["centers"] = h.centers;
  hist["densities"] = Json::array();
  for (double d : h.densities) hist["densities"].push_back(num(d));
  hist["counts"] = h.counts;
  j["histogram"] = std::move(hist);
  return j;
}

// Fits both models, compares them and labels item regimes in place.
Json dualreg_section(const RunConfig& cfg, data::EvaluationDataset& filtered,
                     dualreg::DualRegimeFit& dual_fit) {
  dualreg::LogLogPoints pts = dualreg::to_loglog(filtered);
  dualreg::OlsFit ols = dualreg::fit_ols(pts);
  dual_fit = dualreg::fit_single_knot(pts, cfg.min_segment_frac);
  double cv_ols =
      dualreg::kfold_cv_error(pts, dualreg::CvModel::ols, cfg.cv_folds,
                              cfg.seed, cfg.min_segment_frac);
  double cv_dual =
      dualreg::kfold_cv_error(pts, dualreg::CvModel::single_knot, cfg.cv_folds,
                              cfg.seed, cfg.min_segment_frac);
  bool confirmed = dual_fit.gcv < ols.gcv && dual_fit.r2 > ols.r2;

  std::size_t n_local = 0, n_global = 0;
  for (data::Item& item : filtered.items) {
    item.regime = dualreg::classify_regime(item, dual_fit);
    if (*item.regime == data::Regime::global)
      ++n_global;
    else
      ++n_local;
  }

  Json j;
  j["n"] = pts.size();
  const auto [xmn, xmx] = std::minmax_element(pts.x.begin(), pts.x.end());
  const auto [ymn, ymx] = std::minmax_element(pts.y.begin(), pts.y.end());
  j["x_range"] = Json::array({num(*xmn), num(*xmx)});
  j["y_range"] = Json::array({num(*ymn), num(*ymx)});

  Json oj;
  oj["intercept"] = num(ols.intercept);
  oj["slope"] = num(ols.slope);
  oj["rss"] = num(ols.rss);
  oj["r2"] = num(ols.r2);
  oj["gcv"] = num(ols.gcv);
  oj["cv_error"] = num(cv_ols);
  j["ols"] = std::move(oj);

  Json dj;
  dj["intercept"] = num(dual_fit.intercept);
  dj["alpha1"] = num(dual_fit.alpha1);
  dj["alpha2"] = num(dual_fit.alpha2);
  dj["knot"] = num(dual_fit.knot);
  dj["lc"] = num(dual_fit.lc);
  dj["d_at_lc"] = num(dual_fit.d_at_lc);
  dj["lambda"] = num(dual_fit.lambda);
  dj["gamma"] = num(dual_fit.gamma);
  dj["rss"] = num(dual_fit.rss);
  dj["r2"] = num(dual_fit.r2);
  dj["gcv"] = num(dual_fit.gcv);
  dj["cv_error"] = num(cv_dual);
  j["dual"] = std::move(dj);

  j["dual_regime_confirmed"] = confirmed;
  Json rc;
  rc["local"] = n_local;
  rc["global"] = n_global;
  j["regime_counts"] = std::move(rc);

  dualreg::Histogram2D h2 = dualreg::hist2d_loglog(pts, cfg.hist2d_bins);
  Json hj;
  hj["bins"] = h2.bins;
  hj["x_edges"] = h2.x_edges;
  hj["y_edges"] = h2.y_edges;
  hj["counts"] = h2.counts;
  j["hist2d"] = std::move(hj);
  return j;
}

Json regression_to_json(const std::string& formula,
                        const inference::RegressionResult& r) {
  Json j;
  j["formula"] = formula;
  j["kind"] = r.kind == inference::ModelKind::logistic ? "logistic" : "linear";
  j["n"] = r.n;
  Json terms = Json::array();
  for (const auto& t : r.terms) {
    Json e;
    e["name"] = t.name;
    e["estimate"] = num(t.estimate);
    e["std_error"] = num(t.std_error);
    e["statistic"] = num(t.statistic);
    e["p"] = num(t.p);
    terms.push_back(std::move(e));
  }
  j["terms"] = std::move(terms);
  j["loglik_full"] = num(r.loglik_full);
  j["loglik_null"] = num(r.loglik_null);
  j["chi2"] = num(r.chi2);
  j["df"] = r.df;
  j["chi2_p"] = num(r.chi2_p);
  return j;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  double h = q * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Json metadata_json(const RunConfig& cfg, const std::string& source,
                   Json stages) {
  Json meta;
  meta["tool"] = "evalpulse";
  meta["version"] = kToolVersion;
  meta["source"] = source;
  meta["as_of"] = data::format_iso8601(cfg.as_of);
  meta["seed"] = cfg.seed;
  meta["config"] = config_to_json(cfg);
  meta["stages"] = std::move(stages);
  return meta;
}

}  // namespace

Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["input"] = cfg.input_path;
  j["format"] = cfg.format == data::InputFormat::jsonl ? "jsonl" : "csv";
  j["as_of"] = data::format_iso8601(cfg.as_of);
  j["vad_lexicon"] = cfg.vad_lexicon_path;
  j["pn_lexicon"] = cfg.pn_lexicon_path;
  j["negators"] = cfg.negators_path;
  j["boosters"] = cfg.boosters_path;
  j["assume_english"] = cfg.assume_english;
  j["skip_emotions"] = cfg.skip_emotions;
  j["min_age_days"] = cfg.min_age_days;
  j["min_likes"] = cfg.min_likes;
  j["min_dislikes"] = cfg.min_dislikes;
  j["stopword_threshold"] = cfg.stopword_threshold;
  j["min_segment_frac"] = cfg.min_segment_frac;
  j["cv_folds"] = cfg.cv_folds;
  j["bins_per_decade"] = cfg.bins_per_decade;
  j["hist2d_bins"] = cfg.hist2d_bins;
  j["xmin"] = cfg.xmin;
  j["seed"] = cfg.seed;
  return j;
}

ReportDocument run_pipeline(const RunConfig& cfg) {
  validate_config(cfg, true);

  // Lexicons and input are loaded before any report exists; failures here
  // are configuration errors, not stage failures.
  sentiment::VadLexicon vad;
  sentiment::PnLexicon pn;
  if (!cfg.skip_emotions) {
    vad = sentiment::VadLexicon::load(cfg.vad_lexicon_path);
    pn = sentiment::PnLexicon::load(cfg.pn_lexicon_path, cfg.negators_path,
                                    cfg.boosters_path);
  }

  data::EvaluationDataset raw =
      data::load_dataset(cfg.input_path, cfg.format, cfg.as_of);
  if (!cfg.source_label.empty()) raw.source_label = cfg.source_label;

  StageTracker tracker;
  Json filter_json, distfit_json, dualreg_json, corr_json, regr_json, pol_json;

  data::EvaluationDataset filtered;
  bool filtered_ok = filter_stage(cfg, raw, tracker, filtered, filter_json);

  // Sentiment scoring.
  bool sentiment_ok = false;
  if (cfg.skip_emotions) {
    tracker.skip("sentiment", "disabled by configuration");
  } else if (!filtered_ok) {
    tracker.skip("sentiment", "filter stage failed");
  } else {
    sentiment_ok = tracker.run("sentiment", [&] {
      if (filtered.items.empty())
        throw std::runtime_error("no items survived filtering");
      for (data::Item& item : filtered.items)
        item.emotions = sentiment::score_item(item.text, &vad, &pn);
    });
  }

  // Distribution fits, one per vote column.
  auto run_distfit = [&](const char* stage, auto getter) {
    Json out;
    bool ok = false;
    if (!filtered_ok) {
      tracker.skip(stage, "filter stage failed");
    } else {
      ok = tracker.run(stage, [&] {
        if (filtered.items.empty())
          throw std::runtime_error("no items survived filtering");
        std::vector<double> samples;
        samples.reserve(filtered.items.size());
        for (const data::Item& it : filtered.items)
          samples.push_back(static_cast<double>(getter(it)));
        out = distfit_section(samples, cfg.xmin, cfg.bins_per_decade);
      });
    }
    return std::pair<bool, Json>(ok, std::move(out));
  };
  auto [likes_ok, likes_json] =
      run_distfit("distfit_likes", [](const data::Item& it) { return it.likes; });
  auto [dislikes_ok, dislikes_json] = run_distfit(
      "distfit_dislikes", [](const data::Item& it) { return it.dislikes; });
  if (likes_ok || dislikes_ok) {
    distfit_json["likes"] = likes_ok
                                ? std::move(likes_json)
                                : skipped_section("distribution fit failed");
    distfit_json["dislikes"] = dislikes_ok
                                   ? std::move(dislikes_json)
                                   : skipped_section("distribution fit failed");
  }

  // Dual-regime fit and regime labels.
  bool dualreg_ok = false;
  dualreg::DualRegimeFit dual_fit;
  if (!filtered_ok) {
    tracker.skip("dualreg", "filter stage failed");
  } else {
    dualreg_ok = tracker.run("dualreg", [&] {
      dualreg_json = dualreg_section(cfg, filtered, dual_fit);
    });
  }

  // Correlation screen over the emotion dimensions.
  if (cfg.skip_emotions) {
    tracker.skip("correlations", "disabled by configuration");
  } else if (!sentiment_ok) {
    tracker.skip("correlations", "sentiment stage did not run");
  } else {
    tracker.run("correlations", [&] {
      const std::vector<std::string> names = {"V", "A", "D", "P", "N"};
      std::vector<std::vector<double>> cols(5);
      for (const data::Item& item : filtered.items) {
        const data::EmotionScores& e = *item.emotions;
        if (!e.v || !e.a || !e.d || !e.p || !e.n) continue;
        cols[0].push_back(*e.v);
        cols[1].push_back(*e.a);
        cols[2].push_back(*e.d);
        cols[3].push_back(*e.p);
        cols[4].push_back(*e.n);
      }
      if (cols[0].size() < 3)
        throw std::runtime_error(
            "fewer than 3 items carry complete emotion scores");
      inference::CorrelationMatrix m = inference::spearman_matrix(names, cols);

      corr_json["n"] = m.n;
      corr_json["names"] = m.names;
      Json cj;
      for (std::size_t i = 0; i < names.size(); ++i)
        cj[names[i]] = static_cast<bool>(m.constant[i]);
      corr_json["constant"] = std::move(cj);
      Json rho = Json::array(), pv = Json::array();
      for (std::size_t i = 0; i < names.size(); ++i) {
        Json r_row = Json::array(), p_row = Json::array();
        for (std::size_t jj = 0; jj < names.size(); ++jj) {
          r_row.push_back(num(m.rho_at(i, jj)));
          p_row.push_back(num(m.p_at(i, jj)));
        }
        rho.push_back(std::move(r_row));
        pv.push_back(std::move(p_row));
      }
      corr_json["rho"] = std::move(rho);
      corr_json["p"] = std::move(pv);
    });
  }

  // Polarization index per item (two regressions depend on it).
  bool polar_ok = false;
  std::vector<double> pol_values;
  if (!filtered_ok) {
    tracker.skip("polarization", "filter stage failed");
  } else {
    polar_ok = tracker.run("polarization", [&] {
      if (filtered.items.empty())
        throw std::runtime_error("no items survived filtering");
      std::vector<long long> likes, dislikes;
      likes.reserve(filtered.items.size());
      dislikes.reserve(filtered.items.size());
      for (const data::Item& item : filtered.items) {
        likes.push_back(item.likes);
        dislikes.push_back(item.dislikes);
      }
      auto [zl, zd] = inference::standardize_logcounts(likes, dislikes);
      pol_values.resize(zl.size());
      std::size_t zeros = 0;
      long double mean = 0.0L;
      for (std::size_t i = 0; i < zl.size(); ++i) {
        pol_values[i] = inference::polarization(zl[i], zd[i]);
        if (pol_values[i] == 0.0) ++zeros;
        mean += pol_values[i];
      }
      mean /= static_cast<long double>(pol_values.size());

      std::vector<double> sorted = pol_values;
      std::sort(sorted.begin(), sorted.end());
      pol_json["n"] = pol_values.size();
      pol_json["mean"] = num(static_cast<double>(mean));
      pol_json["fraction_zero"] = num(static_cast<double>(zeros) /
                                      static_cast<double>(pol_values.size()));
      Json qj;
      qj["q25"] = num(quantile_sorted(sorted, 0.25));
      qj["q50"] = num(quantile_sorted(sorted, 0.50));
      qj["q75"] = num(quantile_sorted(sorted, 0.75));
      qj["q90"] = num(quantile_sorted(sorted, 0.90));
      pol_json["quantiles"] = std::move(qj);
      pol_json["max"] = num(sorted.back());
    });
  }

  // Regressions of regime membership and polarization on the emotions.
  if (cfg.skip_emotions) {
    tracker.skip("regressions", "disabled by configuration");
  } else if (!sentiment_ok) {
    tracker.skip("regressions", "sentiment stage did not run");
  } else {
    tracker.run("regressions", [&] {
      std::string first_error;
      auto note = [&](const char* key, const std::string& formula,
                      auto&& build) {
        try {
          regr_json[key] = build();
        } catch (const std::exception& e) {
          regr_json[key] = skipped_section(e.what());
          if (first_error.empty()) first_error = formula + ": " + e.what();
        }
      };

      auto va_design = [&](std::vector<std::size_t>& rows) {
        inference::Design d;
        d.names = {"V", "A"};
        d.cols.assign(2, {});
        for (std::size_t i = 0; i < filtered.items.size(); ++i) {
          const data::EmotionScores& e = *filtered.items[i].emotions;
          if (!e.v || !e.a) continue;
          d.cols[0].push_back(*e.v);
          d.cols[1].push_back(*e.a);
          rows.push_back(i);
        }
        return d;
      };
      auto pn_design = [&](std::vector<std::size_t>& rows) {
        inference::Design d;
        d.names = {"P", "N"};
        d.cols.assign(2, {});
        for (std::size_t i = 0; i < filtered.items.size(); ++i) {
          const data::EmotionScores& e = *filtered.items[i].emotions;
          if (!e.p || !e.n) continue;
          d.cols[0].push_back(*e.p);
          d.cols[1].push_back(*e.n);
          rows.push_back(i);
        }
        return d;
      };

      auto regime_labels = [&](const std::vector<std::size_t>& rows) {
        if (!dualreg_ok)
          throw std::runtime_error("dual-regime fit unavailable");
        std::vector<int> y;
        y.reserve(rows.size());
        for (std::size_t i : rows)
          y.push_back(filtered.items[i].regime == data::Regime::global ? 1 : 0);
        return y;
      };
      auto pol_response = [&](const std::vector<std::size_t>& rows) {
        if (!polar_ok)
          throw std::runtime_error("polarization values unavailable");
        std::vector<double> y;
        y.reserve(rows.size());
        for (std::size_t i : rows) y.push_back(pol_values[i]);
        return y;
      };

      note("g_on_va", "logit(G) ~ V + A", [&] {
        std::vector<std::size_t> rows;
        inference::Design d = va_design(rows);
        return regression_to_json(
            "logit(G) ~ V + A",
            inference::fit_logistic(d, regime_labels(rows)));
      });
      note("g_on_pn", "logit(G) ~ P + N", [&] {
        std::vector<std::size_t> rows;
        inference::Design d = pn_design(rows);
        return regression_to_json(
            "logit(G) ~ P + N",
            inference::fit_logistic(d, regime_labels(rows)));
      });
      note("pol_on_va", "Pol ~ V + A", [&] {
        std::vector<std::size_t> rows;
        inference::Design d = va_design(rows);
        return regression_to_json("Pol ~ V + A",
                                  inference::fit_linear(d, pol_response(rows)));
      });
      note("pol_on_pn", "Pol ~ P + N", [&] {
        std::vector<std::size_t> rows;
        inference::Design d = pn_design(rows);
        return regression_to_json("Pol ~ P + N",
                                  inference::fit_linear(d, pol_response(rows)));
      });

      if (!first_error.empty())
        throw std::runtime_error("model failed, " + first_error);
    });
  }

  ReportDocument out;
  out.doc["schema"] = kReportSchema;
  out.doc["metadata"] = metadata_json(
      cfg, cfg.source_label.empty() ? raw.source_label : cfg.source_label,
      tracker.stages);
  out.doc["filter_report"] =
      filtered_ok ? std::move(filter_json) : skipped_section("filter failed");
  out.doc["distfit"] = distfit_json.is_null()
                           ? skipped_section("distribution fits did not run")
                           : std::move(distfit_json);
  out.doc["dualreg"] = dualreg_ok
                           ? std::move(dualreg_json)
                           : skipped_section("dual-regime fit did not run");
  out.doc["correlations"] = corr_json.is_null()
                                ? skipped_section("correlation screen did not run")
                                : std::move(corr_json);
  out.doc["regressions"] = regr_json.is_null()
                               ? skipped_section("regressions did not run")
                               : std::move(regr_json);
  out.doc["polarization"] = polar_ok ? std::move(pol_json)
                                     : skipped_section("polarization did not run");
  out.success = tracker.success;
  return out;
}

ReportDocument run_distfit_only(const RunConfig& cfg) {
  validate_config(cfg, false);
  data::EvaluationDataset raw =
      data::load_dataset(cfg.input_path, cfg.format, cfg.as_of);
  if (!cfg.source_label.empty()) raw.source_label = cfg.source_label;

  StageTracker tracker;
  Json filter_json, distfit_json;
  data::EvaluationDataset filtered;
  bool filtered_ok = filter_stage(cfg, raw, tracker, filtered, filter_json);

  for (const char* side : {"likes", "dislikes"}) {
    std::string stage = std::string("distfit_") + side;
    if (!filtered_ok) {
      tracker.skip(stage, "filter stage failed");
      continue;
    }
    bool is_likes = std::string(side) == "likes";
    bool ok = tracker.run(stage, [&] {
      if (filtered.items.empty())
        throw std::runtime_error("no items survived filtering");
      std::vector<double> samples;
      samples.reserve(filtered.items.size());
      for (const data::Item& it : filtered.items)
        samples.push_back(
            static_cast<double>(is_likes ? it.likes : it.dislikes));
      distfit_json[side] =
          distfit_section(samples, cfg.xmin, cfg.bins_per_decade);
    });
    if (!ok && filtered_ok)
      distfit_json[side] = skipped_section("distribution fit failed");
  }

  ReportDocument out;
  out.doc["schema"] = kReportSchema;
  out.doc["metadata"] = metadata_json(cfg, raw.source_label, tracker.stages);
  out.doc["filter_report"] =
      filtered_ok ? std::move(filter_json) : skipped_section("filter failed");
  out.doc["distfit"] = distfit_json.is_null()
                           ? skipped_section("distribution fits did not run")
                           : std::move(distfit_json);
  out.success = tracker.success;
  return out;
}

ReportDocument run_dualreg_only(const RunConfig& cfg) {
  validate_config(cfg, false);
  data::EvaluationDataset raw =
      data::load_dataset(cfg.input_path, cfg.format, cfg.as_of);
  if (!cfg.source_label.empty()) raw.source_label = cfg.source_label;

  StageTracker tracker;
  Json filter_json, dualreg_json;
  data::EvaluationDataset filtered;
  bool filtered_ok = filter_stage(cfg, raw, tracker, filtered, filter_json);

  bool dualreg_ok = false;
  if (!filtered_ok) {
    tracker.skip("dualreg", "filter stage failed");
  } else {
    dualreg_ok = tracker.run("dualreg", [&] {
      dualreg::DualRegimeFit dual_fit;
      dualreg_json = dualreg_section(cfg, filtered, dual_fit);
    });
  }

  ReportDocument out;
  out.doc["schema"] = kReportSchema;
  out.doc["metadata"] = metadata_json(cfg, raw.source_label, tracker.stages);
  out.doc["filter_report"] =
      filtered_ok ? std::move(filter_json) : skipped_section("filter failed");
  out.doc["dualreg"] = dualreg_ok
                           ? std::move(dualreg_json)
                           : skipped_section("dual-regime fit did not run");
  out.success = tracker.success;
  return out;
}

namespace {

void write_text_file(const std::filesystem::path& path,
                     const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << body;
  out.close();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::vector<std::string> emit_plot_data(const ReportDocument& report,
                                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::vector<std::string> written;
  Json manifest_skipped = Json::array();
  auto skip = [&](const std::string& name, const std::string& reason) {
    Json e;
    e["file"] = name;
    e["reason"] = reason;
    manifest_skipped.push_back(std::move(e));
  };

  const Json& doc = report.doc;

  // Binned pdfs with the fitted lognormal evaluated at the bin centers.
  for (const char* side : {"likes", "dislikes"}) {
    std::string fname = std::string("pdf_") + side + ".tsv";
    if (!doc.contains("distfit") || doc["distfit"].contains("skipped") ||
        !doc["distfit"].contains(side) ||
        doc["distfit"][side].contains("skipped")) {
      skip(fname, "distribution section missing from the report");
      continue;
    }
    const Json& sec = doc["distfit"][side];
    if (!sec["fits"].contains("lognormal")) {
      skip(fname, "no lognormal fit in the report");
      continue;
    }
    distfit::DistFit ln_fit;
    ln_fit.family = distfit::Family::lognormal;
    ln_fit.mu = sec["fits"]["lognormal"]["mu"].get<double>();
    ln_fit.sigma = sec["fits"]["lognormal"]["sigma"].get<double>();
    ln_fit.xmin = sec["xmin"].get<double>();

    std::string body = "# center\tdensity\tlognormal_pdf\n";
    const Json& hist = sec["histogram"];
    for (std::size_t i = 0; i < hist["centers"].size(); ++i) {
      double c = hist["centers"][i].get<double>();
      double d = hist["densities"][i].is_null()
                     ? 0.0
                     : hist["densities"][i].get<double>();
      body += fmt(c) + std::string("\t") + fmt(d) + "\t" +
              fmt(std::exp(ln_fit.log_density(c))) + "\n";
    }
    write_text_file(fs::path(out_dir) / fname, body);
    written.push_back(fname);
  }

  // 2-D histogram; one row of counts per x bin.
  {
    const char* fname = "hist2d.tsv";
    if (!doc.contains("dualreg") || doc["dualreg"].contains("skipped")) {
      skip(fname, "dual-regime section missing from the report");
    } else {
      const Json& h = doc["dualreg"]["hist2d"];
      const std::size_t bins = h["bins"].get<std::size_t>();
      std::string body = "# x_edges:";
      for (const auto& e : h["x_edges"]) body += "\t" + std::string(fmt(e.get<double>()));
      body += "\n# y_edges:";
      for (const auto& e : h["y_edges"]) body += "\t" + std::string(fmt(e.get<double>()));
      body += "\n";
      for (std::size_t ix = 0; ix < bins; ++ix) {
        for (std::size_t iy = 0; iy < bins; ++iy) {
          if (iy) body += "\t";
          body += std::to_string(h["counts"][ix * bins + iy].get<long long>());
        }
        body += "\n";
      }
      write_text_file(fs::path(out_dir) / fname, body);
      written.push_back(fname);
    }
  }

  // Fitted segments plus the two threshold lines.
  {
    const char* fname = "regime_lines.tsv";
    if (!doc.contains("dualreg") || doc["dualreg"].contains("skipped")) {
      skip(fname, "dual-regime section missing from the report");
    } else {
      const Json& d = doc["dualreg"]["dual"];
      double knot = d["knot"].get<double>();
      double intercept = d["intercept"].get<double>();
      double a1 = d["alpha1"].get<double>();
      double a2 = d["alpha2"].get<double>();
      double x_lo = doc["dualreg"]["x_range"][0].get<double>();
      double x_hi = doc["dualreg"]["x_range"][1].get<double>();
      double y_lo = doc["dualreg"]["y_range"][0].get<double>();
      double y_hi = doc["dualreg"]["y_range"][1].get<double>();
      auto predict = [&](double x) {
        return intercept + a1 * std::max(0.0, x - knot) +
               a2 * std::max(0.0, knot - x);
      };
      std::string body = "# kind\tx0\ty0\tx1\ty1\n";
      body += std::string("local\t") + fmt(x_lo) + "\t" + fmt(predict(x_lo)) +
              "\t" + fmt(knot) + "\t" + fmt(intercept) + "\n";
      body += std::string("global\t") + fmt(knot) + "\t" + fmt(intercept) +
              "\t" + fmt(x_hi) + "\t" + fmt(predict(x_hi)) + "\n";
      body += std::string("lc_threshold\t") + fmt(knot) + "\t" + fmt(y_lo) +
              "\t" + fmt(knot) + "\t" + fmt(y_hi) + "\n";
      body += std::string("d_threshold\t") + fmt(x_lo) + "\t" + fmt(intercept) +
              "\t" + fmt(x_hi) + "\t" + fmt(intercept) + "\n";
      write_text_file(fs::path(out_dir) / fname, body);
      written.push_back(fname);
    }
  }

  Json manifest;
  manifest["written"] = written;
  manifest["skipped"] = std::move(manifest_skipped);
  write_json_atomic(manifest, (fs::path(out_dir) / "manifest.json").string());
  written.push_back("manifest.json");
  return written;
}

void write_json_atomic(const Json& doc, const std::string& path) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";

  write_text_file(tmp, doc.dump(2) + "\n");
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move report into place at '" + path +
                             "': " + ec.message());
  }
}

}  // namespace evalpulse::pipeline
