// Unit tests for tokenization, the affective-norm and rule-based scorers,
// score normalization, the English heuristic and lexicon file loading.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "evalpulse/sentiment.hpp"

namespace sn = evalpulse::sentiment;
namespace fs = std::filesystem;

namespace {

sn::PnLexicon small_pn() {
  sn::PnLexicon lex;
  lex.entries = {{"good", 3}, {"bad", -3}, {"great", 4},
                 {"awful", -4}, {"awesome", 5}};
  lex.negators = {"not"};
  lex.boosters = {{"very", 1}, {"extremely", 2}};
  return lex;
}

sn::VadLexicon small_vad() {
  sn::VadLexicon lex;
  lex.scale_min = 1.0;
  lex.scale_max = 9.0;
  lex.entries = {{"love", {9.0, 5.0, 6.0}},
                 {"hate", {1.0, 7.0, 4.0}},
                 {"table", {5.0, 1.0, 9.0}}};
  return lex;
}

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name, const std::string& content) {
    path = fs::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::remove(path.string().c_str()); }
};

}  // namespace

TEST_CASE("tokenizer lowercases, keeps apostrophes and splits punctuation") {
  const auto toks = sn::tokenize("Don't PANIC!!");
  REQUIRE(toks.size() == 3);
  CHECK(toks[0].text == "don't");
  CHECK_FALSE(toks[0].punct);
  CHECK(toks[1].text == "panic");
  CHECK(toks[2].text == "!!");
  CHECK(toks[2].punct);
}

TEST_CASE("tokenizer collapses elongations and flags them") {
  const auto toks = sn::tokenize("sooooo good");
  REQUIRE(toks.size() == 2);
  CHECK(toks[0].text == "so");
  CHECK(toks[0].elongated);
  CHECK(toks[1].text == "good");
  CHECK_FALSE(toks[1].elongated);
}

TEST_CASE("tokenizer handles empty, numeric and non-ascii input") {
  CHECK(sn::tokenize("").empty());

  const auto nums = sn::tokenize("top 10 list");
  REQUIRE(nums.size() == 3);
  CHECK(nums[1].text == "10");

  // Bytes above 0x7f count as word characters and pass through untouched.
  const auto uml = sn::tokenize("sch\xc3\xb6n day");
  REQUIRE(uml.size() == 2);
  CHECK(uml[0].text == "sch\xc3\xb6n");

  const auto mixed = sn::tokenize("wow?! nice...");
  REQUIRE(mixed.size() == 4);
  CHECK(mixed[1].text == "?!");
  CHECK(mixed[1].punct);
  CHECK(mixed[3].text == "...");
}

TEST_CASE("affective scoring averages matches and rescales to unit range") {
  const sn::VadLexicon lex = small_vad();
  const sn::VadScores top = sn::score_vad("love", lex);
  REQUIRE(top.v.has_value());
  CHECK(*top.v == doctest::Approx(1.0));
  CHECK(*top.a == doctest::Approx(0.5));

  const sn::VadScores mid = sn::score_vad("love hate", lex);
  CHECK(*mid.v == doctest::Approx(0.5));

  const sn::VadScores none = sn::score_vad("nothing matches here", lex);
  CHECK_FALSE(none.v.has_value());
  CHECK_FALSE(none.a.has_value());
  CHECK_FALSE(none.d.has_value());
}

TEST_CASE("affective scoring ignores token order") {
  const sn::VadLexicon lex = small_vad();
  const sn::VadScores a = sn::score_vad("love table hate", lex);
  const sn::VadScores b = sn::score_vad("hate love table", lex);
  CHECK(*a.v == *b.v);
  CHECK(*a.a == *b.a);
  CHECK(*a.d == *b.d);
}

TEST_CASE("rule scorer applies defaults and single hits") {
  const sn::PnLexicon lex = small_pn();
  const sn::PnScores s = sn::score_pn("good", lex);
  CHECK(s.raw_p == 3);
  CHECK(s.raw_n == -1);
  const sn::PnScores neutral = sn::score_pn("the weather is here", lex);
  CHECK(neutral.raw_p == 1);
  CHECK(neutral.raw_n == -1);
}

TEST_CASE("negation neutralizes the following sentiment token") {
  const sn::PnLexicon lex = small_pn();
  const sn::PnScores s = sn::score_pn("not good", lex);
  CHECK(s.raw_p == 1);
  CHECK(s.raw_n == -1);
  // A negator before an unmatched token changes nothing.
  const sn::PnScores t = sn::score_pn("not the good", lex);
  CHECK(t.raw_p == 3);
}

TEST_CASE("boosters add toward the polarity and clamp at five") {
  const sn::PnLexicon lex = small_pn();
  CHECK(sn::score_pn("very good", lex).raw_p == 4);
  CHECK(sn::score_pn("extremely good", lex).raw_p == 5);
  CHECK(sn::score_pn("very awesome", lex).raw_p == 5);
  CHECK(sn::score_pn("very bad", lex).raw_n == -4);
}

TEST_CASE("elongation adds one magnitude") {
  // Letter runs collapse to a single letter, so the stretched token must
  // still collapse onto a lexicon term: "goodddd" -> "good".
  const sn::PnLexicon lex = small_pn();
  CHECK(sn::score_pn("goodddd", lex).raw_p == 4);
  CHECK(sn::score_pn("baaaad", lex).raw_n == -4);
}

TEST_CASE("a trailing exclamation run boosts the strongest of each polarity") {
  const sn::PnLexicon lex = small_pn();
  const sn::PnScores both = sn::score_pn("good bad!", lex);
  CHECK(both.raw_p == 4);
  CHECK(both.raw_n == -4);

  const sn::PnScores stacked = sn::score_pn("very bad!!", lex);
  CHECK(stacked.raw_n == -5);
  CHECK(stacked.raw_p == 1);

  // A neutralized token is not a sentiment carrier anymore, so the run
  // finds nothing to amplify.
  const sn::PnScores negated = sn::score_pn("not good!", lex);
  CHECK(negated.raw_p == 1);
  CHECK(negated.raw_n == -1);
}

TEST_CASE("raising a lexicon strength never weakens the score") {
  sn::PnLexicon lex = small_pn();
  const sn::PnScores before = sn::score_pn("very good and a bit bad", lex);
  lex.entries["good"] = 4;
  const sn::PnScores after = sn::score_pn("very good and a bit bad", lex);
  CHECK(after.raw_p >= before.raw_p);
  CHECK(after.raw_n == before.raw_n);
}

TEST_CASE("normalization maps raw strengths onto the unit interval") {
  CHECK(sn::normalize_emotions(3, -1) == std::pair{0.5, 0.0});
  CHECK(sn::normalize_emotions(1, -5) == std::pair{0.0, 1.0});
  CHECK(sn::normalize_emotions(1, -1) == std::pair{0.0, 0.0});
  CHECK(sn::normalize_emotions(5, -3) == std::pair{1.0, 0.5});
  CHECK_THROWS_WITH(sn::normalize_emotions(0, -1), "raw_p must be in [1,5]");
  CHECK_THROWS_WITH(sn::normalize_emotions(6, -1), "raw_p must be in [1,5]");
  CHECK_THROWS_WITH(sn::normalize_emotions(2, 2), "raw_n must be in [-5,-1]");
  CHECK_THROWS_WITH(sn::normalize_emotions(2, -6), "raw_n must be in [-5,-1]");
}

TEST_CASE("english heuristic keys on the stopword share") {
  CHECK(sn::detect_english("the cat is on the mat"));
  CHECK_FALSE(sn::detect_english("der hund ist hier"));
  CHECK(sn::detect_english("lol"));        // under three tokens passes
  CHECK(sn::detect_english("wow nice"));   // two tokens, short-text pass
  CHECK(sn::detect_english(""));
  // Punctuation runs count as tokens, so "wow nice!" has three tokens and
  // zero stopword hits.
  CHECK_FALSE(sn::detect_english("wow nice!"));
  const auto& stop = sn::default_english_stopwords();
  CHECK(stop.count("the") == 1);
  CHECK(stop.count("don't") == 1);
}

TEST_CASE("item scoring assembles both scorer outputs") {
  const sn::VadLexicon vad = small_vad();
  const sn::PnLexicon pn = small_pn();
  const auto scores = sn::score_item("love this, very good", &vad, &pn);
  REQUIRE(scores.v.has_value());
  CHECK(*scores.v == doctest::Approx(1.0));
  REQUIRE(scores.raw_p.has_value());
  CHECK(*scores.raw_p == 4);
  CHECK(*scores.p == doctest::Approx(0.75));
  CHECK(*scores.n == doctest::Approx(0.0));

  const auto vad_only = sn::score_item("love", &vad, nullptr);
  CHECK(vad_only.v.has_value());
  CHECK_FALSE(vad_only.raw_p.has_value());

  const auto pn_only = sn::score_item("love", nullptr, &pn);
  CHECK_FALSE(pn_only.v.has_value());
  CHECK(pn_only.raw_p.has_value());
}

TEST_CASE("affective lexicon files parse with a scale header") {
  TempFile f("evalpulse_vad_ok.tsv",
             "#scale 1 9\nlove\t9\t5\t6\nhate\t1\t7\t4\n");
  const sn::VadLexicon lex = sn::VadLexicon::load(f.path.string());
  CHECK(lex.scale_min == 1.0);
  CHECK(lex.scale_max == 9.0);
  CHECK(lex.entries.size() == 2);
  CHECK(lex.entries.at("love")[0] == 9.0);
}

TEST_CASE("affective lexicon files reject malformed rows") {
  TempFile f("evalpulse_vad_bad.tsv", "#scale 1 9\nlove\t9\t5\n");
  CHECK_THROWS_AS(sn::VadLexicon::load(f.path.string()), std::runtime_error);

  TempFile empty("evalpulse_vad_empty.tsv", "#scale 1 9\n");
  CHECK_THROWS_AS(sn::VadLexicon::load(empty.path.string()),
                  std::runtime_error);

  CHECK_THROWS_AS(sn::VadLexicon::load("/nonexistent/vad.tsv"),
                  std::runtime_error);
}

TEST_CASE("strength lexicon files parse with modifier companions") {
  TempFile pn("evalpulse_pn_ok.tsv", "good\t3\nbad\t-3\n");
  TempFile neg("evalpulse_neg_ok.txt", "# comment\nnot\nnever\n");
  TempFile boo("evalpulse_boost_ok.tsv", "very\t1\nextremely\t2\n");
  const sn::PnLexicon lex = sn::PnLexicon::load(
      pn.path.string(), neg.path.string(), boo.path.string());
  CHECK(lex.entries.at("good") == 3);
  CHECK(lex.entries.at("bad") == -3);
  CHECK(lex.negators.count("never") == 1);
  CHECK(lex.boosters.at("extremely") == 2);

  const sn::PnLexicon bare = sn::PnLexicon::load(pn.path.string());
  CHECK(bare.negators.empty());
  CHECK(bare.boosters.empty());
}

TEST_CASE("strength lexicon files reject out-of-range strengths") {
  TempFile weak("evalpulse_pn_weak.tsv", "good\t1\n");
  CHECK_THROWS_AS(sn::PnLexicon::load(weak.path.string()),
                  std::runtime_error);
  TempFile wild("evalpulse_pn_wild.tsv", "good\t7\n");
  CHECK_THROWS_AS(sn::PnLexicon::load(wild.path.string()),
                  std::runtime_error);
  TempFile zero_boost("evalpulse_pn_zb.tsv", "good\t3\n");
  TempFile bad_boost("evalpulse_boost_zero.tsv", "very\t0\n");
  CHECK_THROWS_AS(
      sn::PnLexicon::load(zero_boost.path.string(), "", bad_boost.path.string()),
      std::runtime_error);
}
