#pragma once
// Data model for evaluated items: loading from JSONL/CSV, timestamp
// handling and the staged filter (language, age, minimum votes).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace evalpulse::data {

enum class Regime { local, global };

// Per-item emotion scores. v/a/d are lexicon means rescaled to [0,1] and
// absent when no token matched. raw_p is in [1,5], raw_n in [-5,-1]; p/n
// are their [0,1] rescalings.
struct EmotionScores {
  std::optional<double> v;
  std::optional<double> a;
  std::optional<double> d;
  std::optional<double> p;
  std::optional<double> n;
  std::optional<int> raw_p;
  std::optional<int> raw_n;
};

struct Item {
  std::string id;
  std::string text;
  long long likes = 0;
  long long dislikes = 0;
  std::optional<std::int64_t> created_at;  // unix seconds
  std::optional<EmotionScores> emotions;
  std::optional<Regime> regime;
};

enum class FilterState { raw, language_and_age_filtered, vote_filtered };

struct EvaluationDataset {
  std::vector<Item> items;
  std::string source_label;
  std::int64_t as_of = 0;  // unix seconds; reference point for the age filter
  FilterState filter_state = FilterState::raw;
};

// Survivor counts after each filter stage, plus vote totals over survivors.
struct FilterReport {
  std::size_t n_crawled = 0;
  std::size_t n_year = 0;  // passed language and age
  std::size_t n_ld = 0;    // additionally passed the vote minimums
  long long total_likes = 0;
  long long total_dislikes = 0;
  bool high_removal_warning = false;  // more than 99% of items removed
};

enum class InputFormat { jsonl, csv };

// Parses "YYYY-MM-DD" or "YYYY-MM-DDThh:mm:ss" with optional "Z" or
// "+hh:mm"/"-hh:mm" offset. Returns unix seconds, or nullopt when malformed.
std::optional<std::int64_t> parse_iso8601(std::string_view s);

// Renders unix seconds as "YYYY-MM-DDThh:mm:ssZ".
std::string format_iso8601(std::int64_t t);

// Loads and validates one input file. Throws std::runtime_error with the
// 1-based line number on malformed records, negative counts, duplicate ids
// or unreadable files.
EvaluationDataset load_dataset(const std::string& path, InputFormat format,
                               std::int64_t as_of);

struct FilterOptions {
  long long min_age_days = 365;
  long long min_likes = 1;
  long long min_dislikes = 1;
  // Empty predicate accepts every text.
  std::function<bool(const std::string&)> language_check;
};

// Applies language, age and vote filters in that order. Items without a
// created_at fail the age stage. Idempotent on its own output.
std::pair<EvaluationDataset, FilterReport> filter_items(
    const EvaluationDataset& ds, const FilterOptions& opts = {});

}  // namespace evalpulse::data
