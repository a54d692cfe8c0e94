#include "evalpulse/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace evalpulse::data {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// civil-days algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = yr + (m <= 2);
}

bool is_leap(std::int64_t y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
  static const unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lengths[m - 1];
}

bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len,
                     int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::optional<std::int64_t> parse_iso8601(std::string_view s) {
  int y, mo, d;
  if (!parse_fixed_int(s, 0, 4, y)) return std::nullopt;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!parse_fixed_int(s, 5, 2, mo) || !parse_fixed_int(s, 8, 2, d))
    return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 ||
      static_cast<unsigned>(d) > days_in_month(y, static_cast<unsigned>(mo)))
    return std::nullopt;

  int hh = 0, mi = 0, ss = 0;
  std::size_t rest = 10;
  if (s.size() > 10) {
    if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
    if (!parse_fixed_int(s, 11, 2, hh)) return std::nullopt;
    if (s.size() < 19 || s[13] != ':' || s[16] != ':') return std::nullopt;
    if (!parse_fixed_int(s, 14, 2, mi) || !parse_fixed_int(s, 17, 2, ss))
      return std::nullopt;
    if (hh > 23 || mi > 59 || ss > 60) return std::nullopt;
    rest = 19;
  }

  std::int64_t offset = 0;
  if (rest < s.size()) {
    std::string_view tail = s.substr(rest);
    if (tail == "Z") {
      // UTC marker, nothing to add
    } else if ((tail[0] == '+' || tail[0] == '-') && tail.size() == 6 &&
               tail[3] == ':') {
      int oh, om;
      if (!parse_fixed_int(tail, 1, 2, oh) || !parse_fixed_int(tail, 4, 2, om))
        return std::nullopt;
      if (oh > 23 || om > 59) return std::nullopt;
      offset = static_cast<std::int64_t>(oh) * 3600 + om * 60;
      if (tail[0] == '+') offset = -offset;  // east of UTC is earlier in UTC
    } else {
      return std::nullopt;
    }
  }

  std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo),
                                      static_cast<unsigned>(d));
  return days * kSecondsPerDay + hh * 3600 + mi * 60 + ss + offset;
}

std::string format_iso8601(std::int64_t t) {
  std::int64_t days = t / kSecondsPerDay;
  std::int64_t sec = t % kSecondsPerDay;
  if (sec < 0) {
    sec += kSecondsPerDay;
    days -= 1;
  }
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), m, d,
                static_cast<long long>(sec / 3600),
                static_cast<long long>((sec / 60) % 60),
                static_cast<long long>(sec % 60));
  return buf;
}

namespace {

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

long long require_count(const nlohmann::json& v, const char* field,
                        std::size_t line) {
  if (!v.is_number_integer() && !v.is_number_unsigned())
    fail_line(line, std::string("field '") + field + "' must be an integer");
  long long c = v.get<long long>();
  if (c < 0)
    throw std::runtime_error(std::string("negative count at line ") +
                             std::to_string(line) + " (field '" + field + "')");
  return c;
}

std::string source_label_from_path(const std::string& path) {
  std::size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  std::size_t dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  return base;
}

void load_jsonl(std::istream& in, EvaluationDataset& ds) {
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank) continue;

    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail_line(lineno, std::string("malformed JSON (") + e.what() + ")");
    }
    if (!rec.is_object()) fail_line(lineno, "record is not a JSON object");

    for (const char* field : {"id", "text", "likes", "dislikes"}) {
      if (!rec.contains(field))
        fail_line(lineno, std::string("missing field '") + field + "'");
    }
    if (!rec["id"].is_string()) fail_line(lineno, "field 'id' must be a string");
    if (!rec["text"].is_string())
      fail_line(lineno, "field 'text' must be a string");

    Item item;
    item.id = rec["id"].get<std::string>();
    item.text = rec["text"].get<std::string>();
    item.likes = require_count(rec["likes"], "likes", lineno);
    item.dislikes = require_count(rec["dislikes"], "dislikes", lineno);

    if (rec.contains("created_at") && !rec["created_at"].is_null()) {
      if (!rec["created_at"].is_string())
        fail_line(lineno, "field 'created_at' must be an ISO-8601 string");
      auto ts = parse_iso8601(rec["created_at"].get<std::string>());
      if (!ts)
        fail_line(lineno, "invalid created_at '" +
                              rec["created_at"].get<std::string>() + "'");
      item.created_at = *ts;
    }

    if (!seen.insert(item.id).second)
      fail_line(lineno, "duplicate id '" + item.id + "'");
    ds.items.push_back(std::move(item));
  }
}

// RFC 4180 field splitter; handles quoted fields with embedded commas,
// quotes and newlines. Returns false at end of input.
bool next_csv_record(std::istream& in, std::vector<std::string>& fields,
                     std::size_t& lineno, std::size_t& start_line) {
  fields.clear();
  int c = in.peek();
  if (c == EOF) return false;
  ++lineno;
  start_line = lineno;

  std::string field;
  bool in_quotes = false;
  bool any = false;
  while ((c = in.get()) != EOF) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++lineno;
        field.push_back(static_cast<char>(c));
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      break;
    } else if (c == '\n') {
      break;
    } else {
      field.push_back(static_cast<char>(c));
    }
  }
  if (!any) return false;
  if (in_quotes)
    fail_line(start_line, "unterminated quoted field");
  fields.push_back(std::move(field));
  return true;
}

long long parse_count_field(const std::string& s, const char* field,
                            std::size_t line) {
  long long v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    fail_line(line, std::string("field '") + field + "' must be an integer, got '" +
                        s + "'");
  if (v < 0)
    throw std::runtime_error(std::string("negative count at line ") +
                             std::to_string(line) + " (field '" + field + "')");
  return v;
}

void load_csv(std::istream& in, EvaluationDataset& ds) {
  std::vector<std::string> fields;
  std::size_t lineno = 0, start_line = 0;
  if (!next_csv_record(in, fields, lineno, start_line))
    throw std::runtime_error("empty CSV input, header row required");

  long id_col = -1, text_col = -1, likes_col = -1, dislikes_col = -1,
       created_col = -1;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string& h = fields[i];
    if (h == "id") id_col = static_cast<long>(i);
    else if (h == "text") text_col = static_cast<long>(i);
    else if (h == "likes") likes_col = static_cast<long>(i);
    else if (h == "dislikes") dislikes_col = static_cast<long>(i);
    else if (h == "created_at") created_col = static_cast<long>(i);
  }
  for (auto [col, name] : {std::pair{id_col, "id"}, {text_col, "text"},
                           {likes_col, "likes"}, {dislikes_col, "dislikes"}}) {
    if (col < 0)
      throw std::runtime_error(std::string("CSV header is missing column '") +
                               name + "'");
  }
  const std::size_t ncols = fields.size();

  std::unordered_set<std::string> seen;
  while (next_csv_record(in, fields, lineno, start_line)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing newline
    if (fields.size() != ncols)
      fail_line(start_line, "expected " + std::to_string(ncols) +
                                " fields, got " + std::to_string(fields.size()));

    Item item;
    item.id = fields[static_cast<std::size_t>(id_col)];
    item.text = fields[static_cast<std::size_t>(text_col)];
    item.likes = parse_count_field(fields[static_cast<std::size_t>(likes_col)],
                                   "likes", start_line);
    item.dislikes = parse_count_field(
        fields[static_cast<std::size_t>(dislikes_col)], "dislikes", start_line);
    if (created_col >= 0) {
      const std::string& raw = fields[static_cast<std::size_t>(created_col)];
      if (!raw.empty()) {
        auto ts = parse_iso8601(raw);
        if (!ts) fail_line(start_line, "invalid created_at '" + raw + "'");
        item.created_at = *ts;
      }
    }

    if (!seen.insert(item.id).second)
      fail_line(start_line, "duplicate id '" + item.id + "'");
    ds.items.push_back(std::move(item));
  }
}

}  // namespace

EvaluationDataset load_dataset(const std::string& path, InputFormat format,
                               std::int64_t as_of) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file '" + path + "'");

  EvaluationDataset ds;
  ds.source_label = source_label_from_path(path);
  ds.as_of = as_of;
  ds.filter_state = FilterState::raw;

  if (format == InputFormat::jsonl)
    load_jsonl(in, ds);
  else
    load_csv(in, ds);
  return ds;
}

std::pair<EvaluationDataset, FilterReport> filter_items(
    const EvaluationDataset& ds, const FilterOptions& opts) {
  if (opts.min_age_days < 0)
    throw std::invalid_argument("min_age_days must be >= 0");

  FilterReport rep;
  rep.n_crawled = ds.items.size();

  EvaluationDataset out;
  out.source_label = ds.source_label;
  out.as_of = ds.as_of;
  out.filter_state = FilterState::vote_filtered;

  const std::int64_t cutoff = ds.as_of - opts.min_age_days * kSecondsPerDay;
  for (const Item& item : ds.items) {
    if (opts.language_check && !opts.language_check(item.text)) continue;
    if (!item.created_at || *item.created_at > cutoff) continue;
    ++rep.n_year;
    if (item.likes < opts.min_likes || item.dislikes < opts.min_dislikes)
      continue;
    ++rep.n_ld;
    rep.total_likes += item.likes;
    rep.total_dislikes += item.dislikes;
    out.items.push_back(item);
  }

  rep.high_removal_warning =
      rep.n_crawled > 0 &&
      static_cast<double>(rep.n_ld) < 0.01 * static_cast<double>(rep.n_crawled);
  return {std::move(out), rep};
}

}  // namespace evalpulse::data
