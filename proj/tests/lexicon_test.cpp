#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <random>

#include "support.hpp"
#include "weatkit/lexicon.hpp"

using namespace weatkit;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

oracle::Mat seeded_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return testsupport::random_rows(n, d, rng);
}

LexiconConfig parse_config(const char* text) {
  return LexiconConfig::from_json(nlohmann::json::parse(text));
}

const char* kGoodConfig = R"({
  "classes": [
    {"name": "gender",
     "subclasses": [
       {"name": "male", "words": ["he", "him", "man"]},
       {"name": "female", "words": ["she", "her", "woman"]}
     ]},
    {"name": "religion",
     "subclasses": [
       {"name": "islam", "words": ["imam", "mosque"]},
       {"name": "christianity", "words": ["priest", "church"]},
       {"name": "atheism", "words": ["atheist", "secular"]}
     ]}
  ],
  "attribute_sets": [
    {"name": "career", "words": ["office", "salary", "business"]},
    {"name": "family", "words": ["home", "parents", "children"]},
    {"name": "pleasant", "words": ["joy", "love"]},
    {"name": "unpleasant", "words": ["agony", "war"]}
  ],
  "weat_tests": [
    {"class": "gender", "x": "male", "y": "female",
     "a": "career", "b": "family"},
    {"class": "religion", "x": "islam", "y": "christianity",
     "a": "pleasant", "b": "unpleasant"}
  ]
})";

}  // namespace

TEST_CASE("a well-formed configuration parses and validates") {
  LexiconConfig cfg = parse_config(kGoodConfig);
  REQUIRE(cfg.classes.size() == 2);
  REQUIRE(cfg.attribute_sets.size() == 4);
  REQUIRE(cfg.weat_tests.size() == 2);
  CHECK(cfg.classes[1].subclasses.size() == 3);
  REQUIRE_NOTHROW(cfg.validate());
  REQUIRE(cfg.find_class("religion") != nullptr);
  CHECK(cfg.find_class("nope") == nullptr);
  REQUIRE(cfg.find_attribute("career") != nullptr);
  REQUIRE(cfg.classes[0].find_subclass("male") != nullptr);
}

TEST_CASE("loading from a file works and bad JSON is a parse error") {
  TempDir tmp;
  auto p = tmp.file("lex.json");
  write_file(p, kGoodConfig);
  REQUIRE_NOTHROW(LexiconConfig::from_json_file(p));
  write_file(p, "{not json");
  REQUIRE_THROWS_AS(LexiconConfig::from_json_file(p), ParseError);
  REQUIRE_THROWS_AS(LexiconConfig::from_json_file(tmp.file("missing.json")),
                    IoError);
}

TEST_CASE("validation reports every violation at once") {
  const char* broken = R"({
    "classes": [
      {"name": "gender",
       "subclasses": [
         {"name": "male", "words": ["he", "she"]},
         {"name": "female", "words": ["she", "her"]}
       ]},
      {"name": "gender",
       "subclasses": [{"name": "only", "words": ["w"]}]},
      {"name": "empty", "subclasses": []}
    ],
    "attribute_sets": [
      {"name": "career", "words": []},
      {"name": "career", "words": ["office", "office"]}
    ],
    "weat_tests": [
      {"class": "ghost", "x": "a", "y": "b", "a": "career", "b": "career"},
      {"class": "gender", "x": "male", "y": "male",
       "a": "career", "b": "nope"}
    ]
  })";
  LexiconConfig cfg = parse_config(broken);
  try {
    cfg.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& ex) {
    const auto& v = ex.violations();
    auto has = [&](const std::string& needle) {
      for (const auto& line : v)
        if (line.find(needle) != std::string::npos) return true;
      return false;
    };
    CHECK(v.size() >= 8);
    CHECK(has("duplicate class"));          // gender twice
    CHECK(has("at least 2 subclasses"));    // "only", "empty"
    CHECK(has("disjoint"));                 // "she" in male and female
    CHECK(has("duplicate attribute"));      // career twice
    CHECK(has("empty"));                    // career with no words
    CHECK(has("test #1"));                  // undefined class, a == b
    CHECK(has("test #2"));                  // x == y, undefined attribute
    std::string joined = ex.what();
    CHECK(joined.find("validation failed") != std::string::npos);
  }
}

TEST_CASE("resolution drops out-of-vocabulary words with warnings") {
  LexiconConfig cfg = parse_config(kGoodConfig);
  Embedding e = testsupport::make_embedding(
      {"he", "him", "man", "she", "her", "woman", "office", "salary", "home",
       "parents", "imam", "mosque", "priest", "church", "atheist", "secular",
       "joy", "love", "agony", "war"},
      seeded_rows(20, 3, 2));
  // "business" and "children" are missing from the vocabulary
  ResolvedLexicon lex = resolve_lexicon(cfg, e, false);
  REQUIRE(lex.tests.size() == 2);
  const WordSet* career = nullptr;
  for (const auto& s : lex.attribute_sets)
    if (s.name == "career") career = &s;
  REQUIRE(career != nullptr);
  CHECK(career->words == std::vector<std::string>{"office", "salary"});
  CHECK_FALSE(lex.warnings.empty());
  bool mentions_business = false;
  for (const auto& w : lex.warnings)
    if (w.find("business") != std::string::npos) mentions_business = true;
  CHECK(mentions_business);
}

TEST_CASE("tests whose sets collapse are skipped, not run half-empty") {
  LexiconConfig cfg = parse_config(kGoodConfig);
  // vocabulary missing every pleasant word: the religion test must be skipped
  Embedding e = testsupport::make_embedding(
      {"he", "him", "man", "she", "her", "woman", "office", "salary",
       "business", "home", "parents", "children", "imam", "mosque", "priest",
       "church", "agony", "war"},
      seeded_rows(18, 3, 3));
  ResolvedLexicon lex = resolve_lexicon(cfg, e, false);
  REQUIRE(lex.tests.size() == 1);
  CHECK(lex.tests[0].class_name == "gender");
  bool mentions_skip = false;
  for (const auto& w : lex.warnings)
    if (w.find("skip") != std::string::npos) mentions_skip = true;
  CHECK(mentions_skip);
}

TEST_CASE("a declared pair that collapses to one word skips the test") {
  LexiconConfig cfg = parse_config(kGoodConfig);
  // only one pleasant word resolves; two were declared
  Embedding e = testsupport::make_embedding(
      {"he", "him", "man", "she", "her", "woman", "office", "salary",
       "business", "home", "parents", "children", "imam", "mosque", "priest",
       "church", "joy", "agony", "war"},
      seeded_rows(19, 3, 4));
  ResolvedLexicon lex = resolve_lexicon(cfg, e, false);
  REQUIRE(lex.tests.size() == 1);
  CHECK(lex.tests[0].class_name == "gender");
}

TEST_CASE("strict resolution aborts listing all missing words") {
  LexiconConfig cfg = parse_config(kGoodConfig);
  Embedding e = testsupport::make_embedding(
      {"he", "him", "man", "she", "her", "woman", "office", "salary", "home",
       "parents", "imam", "mosque", "priest", "church", "atheist", "secular",
       "joy", "love", "agony", "war"},
      seeded_rows(20, 3, 5));
  try {
    resolve_lexicon(cfg, e, true);
    FAIL("expected ValidationError");
  } catch (const ValidationError& ex) {
    std::string msg = ex.what();
    CHECK(msg.find("business") != std::string::npos);
    CHECK(msg.find("children") != std::string::npos);
  }
}

TEST_CASE("resolution validates the configuration first") {
  LexiconConfig cfg = parse_config(kGoodConfig);
  cfg.weat_tests[0].x = "ghost";
  Embedding e = testsupport::make_embedding({"a", "b"}, {{1, 0}, {0, 1}});
  REQUIRE_THROWS_AS(resolve_lexicon(cfg, e, false), ValidationError);
}
