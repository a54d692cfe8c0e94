// Command-line front end: full pipeline runs, single-stage fits, per-item
// emotion scoring, synthetic dataset generation and report comparison.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "evalpulse/dataset.hpp"
#include "evalpulse/pipeline.hpp"
#include "evalpulse/sentiment.hpp"
#include "evalpulse/synthgen.hpp"

namespace {

using evalpulse::pipeline::Json;

std::int64_t parse_as_of(const std::string& s) {
  auto t = evalpulse::data::parse_iso8601(s);
  if (!t)
    throw std::invalid_argument("invalid --as-of timestamp '" + s +
                                "', expected ISO-8601");
  return *t;
}

evalpulse::data::InputFormat parse_format(const std::string& s) {
  if (s == "jsonl") return evalpulse::data::InputFormat::jsonl;
  if (s == "csv") return evalpulse::data::InputFormat::csv;
  throw std::invalid_argument("unknown --format '" + s +
                              "', expected jsonl or csv");
}

// Options shared by the commands that run the load + filter front half.
struct CommonOpts {
  std::string input;
  std::string format = "jsonl";
  std::string as_of;
  std::string source;
  std::string out;
  bool assume_english = false;
  long long min_age_days = 365;
  long long min_likes = 1;
  long long min_dislikes = 1;
  double stopword_threshold = 0.10;
  double xmin = 1.0;
  std::uint64_t seed = 0;
};

void add_common_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--input", o.input, "input dataset file");
  cmd->add_option("--format", o.format, "input format: jsonl or csv");
  cmd->add_option("--as-of", o.as_of, "crawl timestamp (ISO-8601)");
  cmd->add_option("--source", o.source, "source label for the report");
  cmd->add_option("--out", o.out, "output report path");
  cmd->add_flag("--assume-english", o.assume_english,
                "skip the stopword language filter");
  cmd->add_option("--min-age-days", o.min_age_days,
                  "minimum item age in days");
  cmd->add_option("--min-likes", o.min_likes, "minimum likes to keep an item");
  cmd->add_option("--min-dislikes", o.min_dislikes,
                  "minimum dislikes to keep an item");
  cmd->add_option("--stopword-threshold", o.stopword_threshold,
                  "stopword share that counts as English");
  cmd->add_option("--xmin", o.xmin, "lower support bound for the fits");
  cmd->add_option("--seed", o.seed, "seed for cross-validation splits");
}

void fill_common(const CommonOpts& o, evalpulse::pipeline::RunConfig& cfg) {
  if (o.input.empty()) throw std::invalid_argument("--input is required");
  if (o.as_of.empty()) throw std::invalid_argument("--as-of is required");
  if (o.out.empty()) throw std::invalid_argument("--out is required");
  cfg.input_path = o.input;
  cfg.format = parse_format(o.format);
  cfg.as_of = parse_as_of(o.as_of);
  cfg.source_label = o.source;
  cfg.assume_english = o.assume_english;
  cfg.min_age_days = o.min_age_days;
  cfg.min_likes = o.min_likes;
  cfg.min_dislikes = o.min_dislikes;
  cfg.stopword_threshold = o.stopword_threshold;
  cfg.xmin = o.xmin;
  cfg.seed = o.seed;
}

// EVALPULSE_CONFIG points at a JSON object whose keys mirror the long
// option names; explicit flags override it.
nlohmann::json load_env_config() {
  const char* path = std::getenv("EVALPULSE_CONFIG");
  if (!path || !*path) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error(
        std::string("cannot open config file '") + path +
        "' named by EVALPULSE_CONFIG");
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("malformed config file '") + path +
                             "': " + e.what());
  }
  if (!cfg.is_object())
    throw std::runtime_error(std::string("config file '") + path +
                             "' must hold a JSON object");
  return cfg;
}

template <typename T>
void config_default(const nlohmann::json& cfg, const char* key, T& var) {
  if (!cfg.contains(key)) return;
  try {
    cfg.at(key).get_to(var);
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error(std::string("config key '") + key +
                             "' has the wrong type");
  }
}

void apply_common_config(const nlohmann::json& cfg, CommonOpts& o) {
  config_default(cfg, "input", o.input);
  config_default(cfg, "format", o.format);
  config_default(cfg, "as_of", o.as_of);
  config_default(cfg, "source", o.source);
  config_default(cfg, "out", o.out);
  config_default(cfg, "assume_english", o.assume_english);
  config_default(cfg, "min_age_days", o.min_age_days);
  config_default(cfg, "min_likes", o.min_likes);
  config_default(cfg, "min_dislikes", o.min_dislikes);
  config_default(cfg, "stopword_threshold", o.stopword_threshold);
  config_default(cfg, "xmin", o.xmin);
  config_default(cfg, "seed", o.seed);
}

Json opt_num(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

int run_main(int argc, char** argv) {
  CLI::App app{"evalpulse: evaluation-count analysis toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", evalpulse::pipeline::kToolVersion);

  nlohmann::json env_cfg = load_env_config();

  // analyze: the full pipeline.
  auto* analyze = app.add_subcommand("analyze", "run the full pipeline");
  CommonOpts an;
  std::string an_vad, an_pn, an_negators, an_boosters, an_plots;
  bool an_skip_emotions = false;
  double an_min_segment_frac = 0.05;
  int an_cv_folds = 10, an_bpd = 10, an_hist2d = 50;
  apply_common_config(env_cfg, an);
  config_default(env_cfg, "vad_lexicon", an_vad);
  config_default(env_cfg, "pn_lexicon", an_pn);
  config_default(env_cfg, "negators", an_negators);
  config_default(env_cfg, "boosters", an_boosters);
  config_default(env_cfg, "plots", an_plots);
  config_default(env_cfg, "skip_emotions", an_skip_emotions);
  config_default(env_cfg, "min_segment_frac", an_min_segment_frac);
  config_default(env_cfg, "cv_folds", an_cv_folds);
  config_default(env_cfg, "bins_per_decade", an_bpd);
  config_default(env_cfg, "hist2d_bins", an_hist2d);
  add_common_options(analyze, an);
  analyze->add_option("--vad-lexicon", an_vad, "affective-norm lexicon (TSV)");
  analyze->add_option("--pn-lexicon", an_pn, "signed strength lexicon (TSV)");
  analyze->add_option("--negators", an_negators, "negator word list");
  analyze->add_option("--boosters", an_boosters, "booster increments (TSV)");
  analyze->add_flag("--skip-emotions", an_skip_emotions,
                    "run without the sentiment stages");
  analyze->add_option("--min-segment-frac", an_min_segment_frac,
                      "minimum share of points on each side of the knot");
  analyze->add_option("--cv-folds", an_cv_folds, "cross-validation folds");
  analyze->add_option("--bins-per-decade", an_bpd,
                      "histogram bins per decade");
  analyze->add_option("--hist2d-bins", an_hist2d, "2-D histogram bins");
  analyze->add_option("--plots", an_plots, "directory for plot-data files");

  // distfit / dualreg: single-stage runs.
  auto* distfit_cmd =
      app.add_subcommand("distfit", "fit the heavy-tail families only");
  CommonOpts df;
  int df_bpd = 10;
  apply_common_config(env_cfg, df);
  config_default(env_cfg, "bins_per_decade", df_bpd);
  add_common_options(distfit_cmd, df);
  distfit_cmd->add_option("--bins-per-decade", df_bpd,
                          "histogram bins per decade");

  auto* dualreg_cmd =
      app.add_subcommand("dualreg", "fit the piecewise relation only");
  CommonOpts dr;
  double dr_min_segment_frac = 0.05;
  int dr_cv_folds = 10, dr_hist2d = 50;
  apply_common_config(env_cfg, dr);
  config_default(env_cfg, "min_segment_frac", dr_min_segment_frac);
  config_default(env_cfg, "cv_folds", dr_cv_folds);
  config_default(env_cfg, "hist2d_bins", dr_hist2d);
  add_common_options(dualreg_cmd, dr);
  dualreg_cmd->add_option("--min-segment-frac", dr_min_segment_frac,
                          "minimum share of points on each side of the knot");
  dualreg_cmd->add_option("--cv-folds", dr_cv_folds,
                          "cross-validation folds");
  dualreg_cmd->add_option("--hist2d-bins", dr_hist2d, "2-D histogram bins");

  // emotions: per-item scores as JSONL.
  auto* emotions =
      app.add_subcommand("emotions", "score every item's text (JSONL out)");
  std::string em_input, em_format = "jsonl", em_out;
  std::string em_vad, em_pn, em_negators, em_boosters;
  emotions->add_option("--input", em_input, "input dataset file");
  emotions->add_option("--format", em_format, "input format: jsonl or csv");
  emotions->add_option("--out", em_out, "output JSONL path");
  emotions->add_option("--vad-lexicon", em_vad, "affective-norm lexicon (TSV)");
  emotions->add_option("--pn-lexicon", em_pn, "signed strength lexicon (TSV)");
  emotions->add_option("--negators", em_negators, "negator word list");
  emotions->add_option("--boosters", em_boosters, "booster increments (TSV)");

  // synth: seeded dataset generators.
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string sy_kind = "dual-regime", sy_out, sy_truth, sy_as_of;
  std::uint64_t sy_seed = 0;
  std::size_t sy_n = 10000;
  double sy_lc = 131.0, sy_lambda = 0.29, sy_gamma = 0.93, sy_intercept = 0.5;
  double sy_noise = 0.5, sy_like_mu = 5.49, sy_like_sigma = 2.28;
  double sy_mu = 5.49, sy_sigma = 2.28, sy_shock_sd = 0.2;
  int sy_steps = 100;
  synth->add_option("--kind", sy_kind,
                    "dual-regime, lognormal or gibrat");
  synth->add_option("--n", sy_n, "items to generate");
  synth->add_option("--seed", sy_seed, "generator seed");
  synth->add_option("--out", sy_out, "output dataset path (JSONL)");
  synth->add_option("--truth", sy_truth,
                    "sidecar with the planted parameters");
  synth->add_option("--as-of", sy_as_of, "crawl timestamp for the items");
  synth->add_option("--lc", sy_lc, "crossover likes count");
  synth->add_option("--lambda", sy_lambda, "slope below the crossover");
  synth->add_option("--gamma", sy_gamma, "slope above the crossover");
  synth->add_option("--intercept", sy_intercept,
                    "ln dislikes at ln likes = 0");
  synth->add_option("--noise-sd", sy_noise, "log-space noise");
  synth->add_option("--like-mu", sy_like_mu, "likes marginal, log mean");
  synth->add_option("--like-sigma", sy_like_sigma, "likes marginal, log sd");
  synth->add_option("--mu", sy_mu, "lognormal kind: log mean");
  synth->add_option("--sigma", sy_sigma, "lognormal kind: log sd");
  synth->add_option("--steps", sy_steps, "gibrat kind: growth steps");
  synth->add_option("--shock-sd", sy_shock_sd, "gibrat kind: shock log sd");

  // compare: distill several reports into one table.
  auto* compare = app.add_subcommand("compare", "summarize several reports");
  std::vector<std::string> cp_reports;
  std::string cp_out;
  compare->add_option("--reports", cp_reports, "report files to compare")
      ->expected(-1);
  compare->add_option("--out", cp_out, "output comparison path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (analyze->parsed()) {
      evalpulse::pipeline::RunConfig cfg;
      fill_common(an, cfg);
      cfg.vad_lexicon_path = an_vad;
      cfg.pn_lexicon_path = an_pn;
      cfg.negators_path = an_negators;
      cfg.boosters_path = an_boosters;
      cfg.skip_emotions = an_skip_emotions;
      cfg.min_segment_frac = an_min_segment_frac;
      cfg.cv_folds = an_cv_folds;
      cfg.bins_per_decade = an_bpd;
      cfg.hist2d_bins = an_hist2d;

      evalpulse::pipeline::ReportDocument rep =
          evalpulse::pipeline::run_pipeline(cfg);
      evalpulse::pipeline::write_json_atomic(rep.doc, an.out);
      if (!an_plots.empty()) evalpulse::pipeline::emit_plot_data(rep, an_plots);
      std::cout << "report written to " << an.out << "\n";
      return rep.success ? 0 : 1;
    }

    if (distfit_cmd->parsed()) {
      evalpulse::pipeline::RunConfig cfg;
      fill_common(df, cfg);
      cfg.skip_emotions = true;
      cfg.bins_per_decade = df_bpd;
      evalpulse::pipeline::ReportDocument rep =
          evalpulse::pipeline::run_distfit_only(cfg);
      evalpulse::pipeline::write_json_atomic(rep.doc, df.out);
      std::cout << "report written to " << df.out << "\n";
      return rep.success ? 0 : 1;
    }

    if (dualreg_cmd->parsed()) {
      evalpulse::pipeline::RunConfig cfg;
      fill_common(dr, cfg);
      cfg.skip_emotions = true;
      cfg.min_segment_frac = dr_min_segment_frac;
      cfg.cv_folds = dr_cv_folds;
      cfg.hist2d_bins = dr_hist2d;
      evalpulse::pipeline::ReportDocument rep =
          evalpulse::pipeline::run_dualreg_only(cfg);
      evalpulse::pipeline::write_json_atomic(rep.doc, dr.out);
      std::cout << "report written to " << dr.out << "\n";
      return rep.success ? 0 : 1;
    }

    if (emotions->parsed()) {
      if (em_input.empty()) throw std::invalid_argument("--input is required");
      if (em_out.empty()) throw std::invalid_argument("--out is required");
      if (em_vad.empty() && em_pn.empty())
        throw std::invalid_argument("at least one lexicon is required");

      std::optional<evalpulse::sentiment::VadLexicon> vad;
      std::optional<evalpulse::sentiment::PnLexicon> pn;
      if (!em_vad.empty())
        vad = evalpulse::sentiment::VadLexicon::load(em_vad);
      if (!em_pn.empty())
        pn = evalpulse::sentiment::PnLexicon::load(em_pn, em_negators,
                                                   em_boosters);

      evalpulse::data::EvaluationDataset ds = evalpulse::data::load_dataset(
          em_input, parse_format(em_format), 0);

      std::ofstream out(em_out, std::ios::binary | std::ios::trunc);
      if (!out)
        throw std::runtime_error("cannot write '" + em_out + "'");
      for (const evalpulse::data::Item& item : ds.items) {
        evalpulse::data::EmotionScores e = evalpulse::sentiment::score_item(
            item.text, vad ? &*vad : nullptr, pn ? &*pn : nullptr);
        Json line;
        line["id"] = item.id;
        line["v"] = opt_num(e.v);
        line["a"] = opt_num(e.a);
        line["d"] = opt_num(e.d);
        line["p"] = opt_num(e.p);
        line["n"] = opt_num(e.n);
        line["raw_p"] = e.raw_p ? Json(*e.raw_p) : Json(nullptr);
        line["raw_n"] = e.raw_n ? Json(*e.raw_n) : Json(nullptr);
        out << line.dump() << "\n";
      }
      out.close();
      if (!out) throw std::runtime_error("write failed for '" + em_out + "'");
      std::cout << "scores written to " << em_out << "\n";
      return 0;
    }

    if (synth->parsed()) {
      if (sy_out.empty()) throw std::invalid_argument("--out is required");
      if (sy_as_of.empty()) throw std::invalid_argument("--as-of is required");
      const std::int64_t as_of = parse_as_of(sy_as_of);
      if (sy_truth.empty()) sy_truth = sy_out + ".truth.json";

      evalpulse::data::EvaluationDataset ds;
      Json truth;
      truth["schema"] = 1;
      truth["kind"] = sy_kind;
      truth["n"] = sy_n;
      truth["seed"] = sy_seed;
      truth["as_of"] = evalpulse::data::format_iso8601(as_of);

      if (sy_kind == "dual-regime") {
        evalpulse::synthgen::DualRegimeParams params;
        params.knot = std::log(sy_lc);
        params.lambda = sy_lambda;
        params.gamma = sy_gamma;
        params.intercept = sy_intercept;
        params.noise_sd = sy_noise;
        params.like_mu = sy_like_mu;
        params.like_sigma = sy_like_sigma;
        ds = evalpulse::synthgen::gen_dual_regime(sy_n, params, sy_seed);
        Json pj;
        pj["lc"] = sy_lc;
        pj["knot"] = params.knot;
        pj["lambda"] = params.lambda;
        pj["gamma"] = params.gamma;
        pj["intercept"] = params.intercept;
        pj["d_at_lc"] = params.intercept + params.lambda * params.knot;
        pj["noise_sd"] = params.noise_sd;
        pj["like_mu"] = params.like_mu;
        pj["like_sigma"] = params.like_sigma;
        truth["params"] = std::move(pj);
      } else if (sy_kind == "lognormal" || sy_kind == "gibrat") {
        std::vector<long long> likes, dislikes;
        Json pj;
        if (sy_kind == "lognormal") {
          likes = evalpulse::synthgen::gen_lognormal_counts(sy_n, sy_mu,
                                                            sy_sigma, sy_seed);
          dislikes = evalpulse::synthgen::gen_lognormal_counts(
              sy_n, sy_mu, sy_sigma, sy_seed + 1);
          pj["mu"] = sy_mu;
          pj["sigma"] = sy_sigma;
        } else {
          likes = evalpulse::synthgen::gibrat_growth(sy_n, sy_steps,
                                                     sy_shock_sd, sy_seed);
          dislikes = evalpulse::synthgen::gibrat_growth(
              sy_n, sy_steps, sy_shock_sd, sy_seed + 1);
          pj["steps"] = sy_steps;
          pj["shock_sd"] = sy_shock_sd;
        }
        pj["dislikes_seed"] = sy_seed + 1;
        truth["params"] = std::move(pj);
        ds.items.resize(sy_n);
        for (std::size_t i = 0; i < sy_n; ++i) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "item-%07zu", i);
          ds.items[i].id = buf;
          ds.items[i].likes = likes[i];
          ds.items[i].dislikes = dislikes[i];
        }
      } else {
        throw std::invalid_argument("unknown --kind '" + sy_kind + "'");
      }

      evalpulse::synthgen::attach_texts(ds, sy_seed);
      evalpulse::synthgen::attach_timestamps(ds, as_of, sy_seed);

      std::ofstream out(sy_out, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write '" + sy_out + "'");
      for (const evalpulse::data::Item& item : ds.items) {
        Json line;
        line["id"] = item.id;
        line["text"] = item.text;
        line["likes"] = item.likes;
        line["dislikes"] = item.dislikes;
        line["created_at"] = evalpulse::data::format_iso8601(*item.created_at);
        out << line.dump() << "\n";
      }
      out.close();
      if (!out) throw std::runtime_error("write failed for '" + sy_out + "'");

      evalpulse::pipeline::write_json_atomic(truth, sy_truth);
      std::cout << "dataset written to " << sy_out << " (truth: " << sy_truth
                << ")\n";
      return 0;
    }

    if (compare->parsed()) {
      if (cp_reports.size() < 2)
        throw std::invalid_argument("--reports needs at least two files");
      if (cp_out.empty()) throw std::invalid_argument("--out is required");

      auto dig = [](const Json& j,
                    std::initializer_list<const char*> path) -> Json {
        const Json* cur = &j;
        for (const char* key : path) {
          if (!cur->is_object() || !cur->contains(key)) return nullptr;
          cur = &(*cur)[key];
        }
        return *cur;
      };

      Json rows = Json::array();
      for (const std::string& path : cp_reports) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open report '" + path + "'");
        Json rep;
        try {
          in >> rep;
        } catch (const nlohmann::json::parse_error& e) {
          throw std::runtime_error("malformed report '" + path +
                                   "': " + e.what());
        }
        Json row;
        Json label = dig(rep, {"metadata", "source"});
        row["label"] = label.is_null() ? Json(path) : label;
        row["file"] = path;
        row["n_ld"] = dig(rep, {"filter_report", "n_ld"});
        row["best_likes"] = dig(rep, {"distfit", "likes", "best"});
        row["best_dislikes"] = dig(rep, {"distfit", "dislikes", "best"});
        row["likes_mu"] = dig(rep, {"distfit", "likes", "fits", "lognormal", "mu"});
        row["likes_sigma"] =
            dig(rep, {"distfit", "likes", "fits", "lognormal", "sigma"});
        row["dual_regime_confirmed"] =
            dig(rep, {"dualreg", "dual_regime_confirmed"});
        row["lc"] = dig(rep, {"dualreg", "dual", "lc"});
        row["lambda"] = dig(rep, {"dualreg", "dual", "lambda"});
        row["gamma"] = dig(rep, {"dualreg", "dual", "gamma"});
        row["ols_r2"] = dig(rep, {"dualreg", "ols", "r2"});
        row["dual_r2"] = dig(rep, {"dualreg", "dual", "r2"});
        row["pol_mean"] = dig(rep, {"polarization", "mean"});
        rows.push_back(std::move(row));
      }

      Json out;
      out["schema"] = 1;
      out["kind"] = "comparison";
      out["rows"] = std::move(rows);
      evalpulse::pipeline::write_json_atomic(out, cp_out);
      std::cout << "comparison written to " << cp_out << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int main(int argc, char** argv) {
  // Configuration problems surface before the subcommand dispatch; catch
  // them here so a bad EVALPULSE_CONFIG exits like any other usage error.
  try {
    return run_main(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
