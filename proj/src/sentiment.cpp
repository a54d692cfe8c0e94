#include "evalpulse/sentiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace evalpulse::sentiment {

namespace {

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

bool is_ascii_letter(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Apostrophes stay inside a word only when flanked by word bytes.
bool is_intra_word_apostrophe(std::string_view s, std::size_t i) {
  if (s[i] != '\'') return false;
  if (i == 0 || i + 1 >= s.size()) return false;
  return is_word_byte(static_cast<unsigned char>(s[i - 1])) &&
         is_word_byte(static_cast<unsigned char>(s[i + 1]));
}

void flush_word(std::string& raw, std::vector<Token>& out) {
  if (raw.empty()) return;
  // Collapse runs of 3+ identical ASCII letters to one letter; the token
  // keeps a flag so scoring can award the emphasis.
  Token tok;
  bool elongated = false;
  std::size_t i = 0;
  while (i < raw.size()) {
    std::size_t j = i + 1;
    while (j < raw.size() && raw[j] == raw[i]) ++j;
    std::size_t run = j - i;
    if (run >= 3 && is_ascii_letter(static_cast<unsigned char>(raw[i]))) {
      tok.text.push_back(raw[i]);
      elongated = true;
    } else {
      tok.text.append(raw, i, run);
    }
    i = j;
  }
  tok.elongated = elongated;
  out.push_back(std::move(tok));
  raw.clear();
}

void flush_punct(std::string& raw, std::vector<Token>& out) {
  if (raw.empty()) return;
  Token tok;
  tok.text = raw;
  tok.punct = true;
  out.push_back(std::move(tok));
  raw.clear();
}

int clamp_strength(int s) { return std::clamp(s, -5, 5); }

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (char& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

[[noreturn]] void fail_lexicon(const std::string& path, std::size_t line,
                               const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::string word, punct;
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c) || is_intra_word_apostrophe(text, i)) {
      flush_punct(punct, out);
      word.push_back(c < 0x80
                         ? static_cast<char>(std::tolower(c))
                         : static_cast<char>(c));
    } else if (std::isspace(c)) {
      flush_word(word, out);
      flush_punct(punct, out);
    } else {
      flush_word(word, out);
      punct.push_back(static_cast<char>(c));
    }
  }
  flush_word(word, out);
  flush_punct(punct, out);
  return out;
}

VadLexicon VadLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file '" + path + "'");

  VadLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  bool scale_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hd(line.substr(1));
      std::string key;
      hd >> key;
      if (key == "scale") {
        if (!(hd >> lex.scale_min >> lex.scale_max) ||
            lex.scale_max <= lex.scale_min)
          fail_lexicon(path, lineno, "malformed scale header");
        scale_seen = true;
      }
      continue;
    }
    auto fields = split_tabs(line);
    if (fields.size() != 4)
      fail_lexicon(path, lineno, "expected term<TAB>v<TAB>a<TAB>d");
    std::array<double, 3> vad{};
    for (int k = 0; k < 3; ++k) {
      try {
        vad[static_cast<std::size_t>(k)] = std::stod(fields[static_cast<std::size_t>(k) + 1]);
      } catch (const std::exception&) {
        fail_lexicon(path, lineno, "non-numeric value '" +
                                       fields[static_cast<std::size_t>(k) + 1] + "'");
      }
    }
    lex.entries[lower(trim(fields[0]))] = vad;
  }
  (void)scale_seen;  // default 1..9 scale applies when no header
  if (lex.entries.empty())
    throw std::runtime_error("lexicon file '" + path + "' has no entries");
  return lex;
}

PnLexicon PnLexicon::load(const std::string& path,
                          const std::string& negators_path,
                          const std::string& boosters_path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file '" + path + "'");

  PnLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2)
      fail_lexicon(path, lineno, "expected term<TAB>strength");
    int s = 0;
    try {
      s = std::stoi(fields[1]);
    } catch (const std::exception&) {
      fail_lexicon(path, lineno, "non-integer strength '" + fields[1] + "'");
    }
    if (std::abs(s) < 2 || std::abs(s) > 5)
      fail_lexicon(path, lineno,
                   "strength must be in [-5,-2] or [2,5], got " + fields[1]);
    lex.entries[lower(trim(fields[0]))] = s;
  }
  if (lex.entries.empty())
    throw std::runtime_error("lexicon file '" + path + "' has no entries");

  if (!negators_path.empty()) {
    std::ifstream neg(negators_path);
    if (!neg)
      throw std::runtime_error("cannot open negator file '" + negators_path + "'");
    while (std::getline(neg, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string t = lower(trim(line));
      if (!t.empty() && t[0] != '#') lex.negators.insert(t);
    }
  }
  if (!boosters_path.empty()) {
    std::ifstream bst(boosters_path);
    if (!bst)
      throw std::runtime_error("cannot open booster file '" + boosters_path + "'");
    lineno = 0;
    while (std::getline(bst, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      auto fields = split_tabs(line);
      if (fields.size() != 2)
        fail_lexicon(boosters_path, lineno, "expected term<TAB>increment");
      int inc = 0;
      try {
        inc = std::stoi(fields[1]);
      } catch (const std::exception&) {
        fail_lexicon(boosters_path, lineno,
                     "non-integer increment '" + fields[1] + "'");
      }
      if (inc < 1)
        fail_lexicon(boosters_path, lineno, "increment must be >= 1");
      lex.boosters[lower(trim(fields[0]))] = inc;
    }
  }
  return lex;
}

VadScores score_vad(std::string_view text, const VadLexicon& lex) {
  double sum_v = 0.0, sum_a = 0.0, sum_d = 0.0;
  std::size_t hits = 0;
  for (const Token& tok : tokenize(text)) {
    if (tok.punct) continue;
    auto it = lex.entries.find(tok.text);
    if (it == lex.entries.end()) continue;
    sum_v += it->second[0];
    sum_a += it->second[1];
    sum_d += it->second[2];
    ++hits;
  }
  if (hits == 0) return {};

  const double span = lex.scale_max - lex.scale_min;
  auto rescale = [&](double sum) {
    double mean = sum / static_cast<double>(hits);
    return (mean - lex.scale_min) / span;
  };
  return {rescale(sum_v), rescale(sum_a), rescale(sum_d)};
}

PnScores score_pn(std::string_view text, const PnLexicon& lex) {
  const std::vector<Token> tokens = tokenize(text);

  // Adjusted strengths of matched sentiment tokens, in text order.
  std::vector<int> adjusted;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& tok = tokens[i];
    if (tok.punct) continue;
    auto it = lex.entries.find(tok.text);
    if (it == lex.entries.end()) continue;

    int s = it->second;
    const Token* prev = i > 0 ? &tokens[i - 1] : nullptr;
    if (prev && !prev->punct) {
      if (lex.negators.count(prev->text)) s = s > 0 ? 1 : -1;
      auto b = lex.boosters.find(prev->text);
      if (b != lex.boosters.end())
        s = clamp_strength(s + (s > 0 ? b->second : -b->second));
    }
    if (tok.elongated) s = clamp_strength(s + (s > 0 ? 1 : -1));
    adjusted.push_back(s);
  }

  // A trailing exclamation run intensifies the strongest token of each
  // polarity; tokens flattened by negation carry no polarity to amplify.
  bool trailing_bang = !tokens.empty() && tokens.back().punct &&
                       tokens.back().text.find('!') != std::string::npos;
  if (trailing_bang) {
    int best_p = 0, best_n = 0;
    std::size_t pi = adjusted.size(), ni = adjusted.size();
    for (std::size_t i = 0; i < adjusted.size(); ++i) {
      if (adjusted[i] >= 2 && adjusted[i] > best_p) {
        best_p = adjusted[i];
        pi = i;
      }
      if (adjusted[i] <= -2 && adjusted[i] < best_n) {
        best_n = adjusted[i];
        ni = i;
      }
    }
    if (pi < adjusted.size()) adjusted[pi] = clamp_strength(adjusted[pi] + 1);
    if (ni < adjusted.size()) adjusted[ni] = clamp_strength(adjusted[ni] - 1);
  }

  PnScores out;
  for (int s : adjusted) {
    if (s > 0) out.raw_p = std::max(out.raw_p, s);
    if (s < 0) out.raw_n = std::min(out.raw_n, s);
  }
  return out;
}

std::pair<double, double> normalize_emotions(int raw_p, int raw_n) {
  if (raw_p < 1 || raw_p > 5)
    throw std::invalid_argument("raw_p must be in [1,5]");
  if (raw_n > -1 || raw_n < -5)
    throw std::invalid_argument("raw_n must be in [-5,-1]");
  return {(raw_p - 1) / 4.0, (-raw_n - 1) / 4.0};
}

const std::unordered_set<std::string>& default_english_stopwords() {
  static const std::unordered_set<std::string> words = {
      "i",       "me",      "my",      "myself",  "we",      "our",
      "ours",    "you",     "your",    "yours",   "he",      "him",
      "his",     "she",     "her",     "hers",    "it",      "its",
      "they",    "them",    "their",   "theirs",  "what",    "which",
      "who",     "whom",    "this",    "that",    "these",   "those",
      "am",      "is",      "are",     "was",     "were",    "be",
      "been",    "being",   "have",    "has",     "had",     "having",
      "do",      "does",    "did",     "doing",   "a",       "an",
      "the",     "and",     "but",     "if",      "or",      "because",
      "as",      "until",   "while",   "of",      "at",      "by",
      "for",     "with",    "about",   "against", "between", "into",
      "through", "during",  "before",  "after",   "above",   "below",
      "to",      "from",    "up",      "down",    "in",      "out",
      "on",      "off",     "over",    "under",   "again",   "further",
      "then",    "once",    "here",    "there",   "when",    "where",
      "why",     "how",     "all",     "any",     "both",    "each",
      "few",     "more",    "most",    "other",   "some",    "such",
      "no",      "nor",     "not",     "only",    "own",     "same",
      "so",      "than",    "too",     "very",    "can",     "will",
      "just",    "should",  "now",     "would",   "could",   "don't",
      "isn't",   "aren't",  "wasn't",  "weren't", "it's",    "i'm",
      "you're",  "they're", "can't",   "won't",   "didn't",  "doesn't",
  };
  return words;
}

bool detect_english(std::string_view text,
                    const std::unordered_set<std::string>& stopwords,
                    double threshold) {
  const std::vector<Token> tokens = tokenize(text);
  if (tokens.size() < 3) return true;
  std::size_t hits = 0;
  for (const Token& tok : tokens) {
    if (!tok.punct && stopwords.count(tok.text)) ++hits;
  }
  return static_cast<double>(hits) >=
         threshold * static_cast<double>(tokens.size());
}

data::EmotionScores score_item(std::string_view text, const VadLexicon* vad,
                               const PnLexicon* pn) {
  data::EmotionScores e;
  if (vad) {
    VadScores vs = score_vad(text, *vad);
    e.v = vs.v;
    e.a = vs.a;
    e.d = vs.d;
  }
  if (pn) {
    PnScores ps = score_pn(text, *pn);
    e.raw_p = ps.raw_p;
    e.raw_n = ps.raw_n;
    auto [p, n] = normalize_emotions(ps.raw_p, ps.raw_n);
    e.p = p;
    e.n = n;
  }
  return e;
}

}  // namespace evalpulse::sentiment
