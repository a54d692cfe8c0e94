#pragma once
// Batch orchestration: ingest -> filter -> sentiment -> distribution fits
// -> dual-regime fit -> correlations -> regressions -> polarization, all
// folded into one JSON report with per-stage status. Key order and float
// formatting are fixed so identical inputs give byte-identical reports.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "evalpulse/dataset.hpp"

namespace evalpulse::pipeline {

using Json = nlohmann::ordered_json;

struct RunConfig {
  std::string input_path;
  data::InputFormat format = data::InputFormat::jsonl;
  std::int64_t as_of = 0;
  std::string source_label;

  std::string vad_lexicon_path;
  std::string pn_lexicon_path;
  std::string negators_path;
  std::string boosters_path;

  bool assume_english = false;  // skip the language filter
  bool skip_emotions = false;   // no sentiment, correlations or regressions

  long long min_age_days = 365;
  long long min_likes = 1;
  long long min_dislikes = 1;
  double stopword_threshold = 0.10;
  double min_segment_frac = 0.05;
  int cv_folds = 10;
  int bins_per_decade = 10;
  int hist2d_bins = 50;
  double xmin = 1.0;
  std::uint64_t seed = 0;
};

struct ReportDocument {
  Json doc;
  bool success = true;  // every enabled stage ran cleanly
};

// Runs the full pipeline. Unreadable input or invalid configuration throw;
// failures in later stages are recorded in the report (and flip success)
// while independent stages still run.
ReportDocument run_pipeline(const RunConfig& cfg);

// Narrower documents for the single-stage commands: load + filter plus
// just the distribution fits (or just the dual-regime fit).
ReportDocument run_distfit_only(const RunConfig& cfg);
ReportDocument run_dualreg_only(const RunConfig& cfg);

// Writes plot-ready TSV files (binned pdfs with the fitted lognormal
// curve, the 2-D histogram, the fitted regime lines) plus manifest.json
// into out_dir. Sections missing from the report are noted as skipped in
// the manifest. Returns the file names written.
std::vector<std::string> emit_plot_data(const ReportDocument& report,
                                        const std::string& out_dir);

// Serializes with a trailing newline and writes atomically (temp file in
// the target directory, then rename).
void write_json_atomic(const Json& doc, const std::string& path);

Json config_to_json(const RunConfig& cfg);

inline constexpr int kReportSchema = 1;
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace evalpulse::pipeline
