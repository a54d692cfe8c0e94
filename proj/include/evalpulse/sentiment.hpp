#pragma once
// Lexicon sentiment scoring: affective-norm (valence/arousal/dominance)
// averages, a rule-based positive/negative strength classifier and the
// stopword-ratio English heuristic.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "evalpulse/dataset.hpp"

namespace evalpulse::sentiment {

struct Token {
  std::string text;
  bool elongated = false;  // had a run of 3+ repeated letters
  bool punct = false;      // punctuation run, e.g. "!!" or "?!"
};

// Lowercases, splits on non-alphanumeric boundaries (intra-word apostrophes
// kept), collapses letter runs of length >= 3 to a single letter and flags
// the token, and emits punctuation runs as marker tokens. Bytes >= 0x80 are
// treated as word characters and passed through untouched.
std::vector<Token> tokenize(std::string_view text);

// Affective norms, one row per term. Raw values live on [scale_min,
// scale_max] as declared by the file header.
struct VadLexicon {
  std::unordered_map<std::string, std::array<double, 3>> entries;
  double scale_min = 1.0;
  double scale_max = 9.0;

  // TSV "term<TAB>v<TAB>a<TAB>d", optional "#scale <min> <max>" header.
  static VadLexicon load(const std::string& path);
};

// Signed strength lexicon plus the modifier word lists.
struct PnLexicon {
  std::unordered_map<std::string, int> entries;    // +-2..+-5
  std::unordered_set<std::string> negators;        // one term per line
  std::unordered_map<std::string, int> boosters;   // term -> increment

  // strengths: TSV "term<TAB>strength". Modifier paths may be empty.
  static PnLexicon load(const std::string& path,
                        const std::string& negators_path = {},
                        const std::string& boosters_path = {});
};

struct VadScores {
  std::optional<double> v;
  std::optional<double> a;
  std::optional<double> d;
};

// Mean raw norm over matched tokens, rescaled to [0,1]. Absent when no
// token matched.
VadScores score_vad(std::string_view text, const VadLexicon& lex);

struct PnScores {
  int raw_p = 1;   // strongest positive, [1,5]
  int raw_n = -1;  // strongest negative, [-5,-1]
};

// Applies, in order: negation (preceding negator flattens strength to +-1),
// boosting (preceding booster adds its increment toward the sign, clamped
// to +-5), elongation (+1 magnitude), and a trailing exclamation run (+1
// magnitude to the strongest token of each polarity).
PnScores score_pn(std::string_view text, const PnLexicon& lex);

// Rescales raw strengths to [0,1]: p = (raw_p - 1)/4, n = (|raw_n| - 1)/4.
std::pair<double, double> normalize_emotions(int raw_p, int raw_n);

const std::unordered_set<std::string>& default_english_stopwords();

// True when the stopword share of all tokens reaches the threshold, or the
// text has fewer than 3 tokens (too short to judge).
bool detect_english(
    std::string_view text,
    const std::unordered_set<std::string>& stopwords = default_english_stopwords(),
    double threshold = 0.10);

// Full per-item scores; either lexicon may be null to skip that half.
data::EmotionScores score_item(std::string_view text, const VadLexicon* vad,
                               const PnLexicon* pn);

}  // namespace evalpulse::sentiment
