// lexicon.hpp : protected-class lexicon configuration (single JSON document)
//
// Schema:
//   {
//     "classes": [
//       {"name": "gender",
//        "subclasses": [{"name": "male", "words": ["he", ...]}, ...]}
//     ],
//     "attribute_sets": [{"name": "pleasant", "words": [...]}, ...],
//     "weat_tests": [
//       {"class": "gender", "x": "male", "y": "female",
//        "a": "pleasant", "b": "unpleasant"}
//     ]
//   }
#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "embedding.hpp"
#include "errors.hpp"
#include "weat.hpp"

namespace weatkit {

struct ClassSpec {
  std::string name;
  std::vector<WordSet> subclasses;

  const WordSet* find_subclass(const std::string& n) const {
    for (const auto& s : subclasses)
      if (s.name == n) return &s;
    return nullptr;
  }
};

struct WeatTestRef {
  std::string class_name, x, y, a, b;
};

struct LexiconConfig {
  std::vector<ClassSpec> classes;
  std::vector<WordSet> attribute_sets;
  std::vector<WeatTestRef> weat_tests;

  const ClassSpec* find_class(const std::string& n) const {
    for (const auto& c : classes)
      if (c.name == n) return &c;
    return nullptr;
  }
  const WordSet* find_attribute(const std::string& n) const {
    for (const auto& a : attribute_sets)
      if (a.name == n) return &a;
    return nullptr;
  }

  // Structural validation. Collects every violation before throwing.
  void validate() const {
    std::vector<std::string> v;
    std::set<std::string> class_names;
    for (const auto& c : classes) {
      if (c.name.empty()) v.push_back("class with empty name");
      if (!class_names.insert(c.name).second)
        v.push_back("duplicate class name '" + c.name + "'");
      if (c.subclasses.size() < 2)
        v.push_back("class '" + c.name + "' needs at least 2 subclasses, has " +
                    std::to_string(c.subclasses.size()));
      std::set<std::string> sub_names;
      std::map<std::string, std::string> word_owner;
      for (const auto& s : c.subclasses) {
        if (s.name.empty())
          v.push_back("class '" + c.name + "' has a subclass with empty name");
        if (!sub_names.insert(s.name).second)
          v.push_back("class '" + c.name + "': duplicate subclass name '" +
                      s.name + "'");
        if (s.words.empty())
          v.push_back("subclass '" + c.name + "/" + s.name +
                      "' has an empty word list");
        std::set<std::string> in_set;
        for (const auto& w : s.words) {
          if (w.empty()) {
            v.push_back("subclass '" + c.name + "/" + s.name +
                        "' contains an empty word");
            continue;
          }
          if (!in_set.insert(w).second)
            v.push_back("subclass '" + c.name + "/" + s.name +
                        "' lists word '" + w + "' more than once");
          auto [it, fresh] = word_owner.emplace(w, s.name);
          if (!fresh && it->second != s.name)
            v.push_back("class '" + c.name + "': word '" + w +
                        "' appears in subclasses '" + it->second + "' and '" +
                        s.name + "' (definitional sets must be disjoint)");
        }
      }
    }
    std::set<std::string> attr_names;
    for (const auto& a : attribute_sets) {
      if (a.name.empty()) v.push_back("attribute set with empty name");
      if (!attr_names.insert(a.name).second)
        v.push_back("duplicate attribute set name '" + a.name + "'");
      if (a.words.empty())
        v.push_back("attribute set '" + a.name + "' has an empty word list");
      std::set<std::string> in_set;
      for (const auto& w : a.words) {
        if (w.empty())
          v.push_back("attribute set '" + a.name + "' contains an empty word");
        else if (!in_set.insert(w).second)
          v.push_back("attribute set '" + a.name + "' lists word '" + w +
                      "' more than once");
      }
    }
    std::size_t ti = 0;
    for (const auto& t : weat_tests) {
      std::string label = "test #" + std::to_string(ti + 1);
      const ClassSpec* c = find_class(t.class_name);
      if (!c) {
        v.push_back(label + " references undefined class '" + t.class_name +
                    "'");
      } else {
        if (!c->find_subclass(t.x))
          v.push_back(label + " references undefined subclass '" + t.x +
                      "' in class '" + t.class_name + "'");
        if (!c->find_subclass(t.y))
          v.push_back(label + " references undefined subclass '" + t.y +
                      "' in class '" + t.class_name + "'");
      }
      if (t.x == t.y)
        v.push_back(label + " uses the same subclass '" + t.x +
                    "' for both targets");
      if (!find_attribute(t.a))
        v.push_back(label + " references undefined attribute set '" + t.a +
                    "'");
      if (!find_attribute(t.b))
        v.push_back(label + " references undefined attribute set '" + t.b +
                    "'");
      if (t.a == t.b)
        v.push_back(label + " uses the same attribute set '" + t.a +
                    "' on both sides");
      ++ti;
    }
    if (!v.empty()) throw ValidationError(std::move(v));
  }

  static LexiconConfig from_json(const nlohmann::json& j) {
    LexiconConfig cfg;
    try {
      if (j.contains("classes"))
        for (const auto& jc : j.at("classes")) {
          ClassSpec c;
          c.name = jc.value("name", "");
          if (jc.contains("subclasses"))
            for (const auto& js : jc.at("subclasses")) {
              WordSet s;
              s.name = js.value("name", "");
              for (const auto& w : js.value("words", nlohmann::json::array()))
                s.words.push_back(w.get<std::string>());
              c.subclasses.push_back(std::move(s));
            }
          cfg.classes.push_back(std::move(c));
        }
      if (j.contains("attribute_sets"))
        for (const auto& ja : j.at("attribute_sets")) {
          WordSet a;
          a.name = ja.value("name", "");
          for (const auto& w : ja.value("words", nlohmann::json::array()))
            a.words.push_back(w.get<std::string>());
          cfg.attribute_sets.push_back(std::move(a));
        }
      if (j.contains("weat_tests"))
        for (const auto& jt : j.at("weat_tests")) {
          WeatTestRef t;
          t.class_name = jt.value("class", "");
          t.x = jt.value("x", "");
          t.y = jt.value("y", "");
          t.a = jt.value("a", "");
          t.b = jt.value("b", "");
          cfg.weat_tests.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("lexicon JSON: ") + e.what());
    }
    return cfg;
  }

  static LexiconConfig from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon file: " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("lexicon '" + path.string() + "': " + e.what());
    }
    return from_json(j);
  }
};

// Lexicon with every word list restricted to the embedding vocabulary.
struct ResolvedLexicon {
  std::vector<ClassSpec> classes;
  std::vector<WordSet> attribute_sets;
  std::vector<WeatTest> tests;  // runnable tests only
  Warnings warnings;
};

// Drops out-of-vocabulary words with warnings; in strict mode every missing
// token is a violation instead. A test is skipped (with a warning) when a
// referenced set resolves to nothing, or shrinks below 2 words from a larger
// declaration. Declared single-word sets that resolve fully are kept.
inline ResolvedLexicon resolve_lexicon(const LexiconConfig& cfg,
                                       const Embedding& e,
                                       bool strict = false) {
  cfg.validate();
  ResolvedLexicon out;
  std::vector<std::string> missing;

  auto resolve_set = [&](const WordSet& s, const std::string& where) {
    WordSet r;
    r.name = s.name;
    for (const auto& w : s.words) {
      if (e.contains(w)) {
        r.words.push_back(w);
      } else if (strict) {
        missing.push_back(where + ": word '" + w + "' not in vocabulary");
      } else {
        warn(&out.warnings,
             where + ": dropped out-of-vocabulary word '" + w + "'");
      }
    }
    return r;
  };

  for (const auto& c : cfg.classes) {
    ClassSpec rc;
    rc.name = c.name;
    for (const auto& s : c.subclasses)
      rc.subclasses.push_back(resolve_set(s, "subclass '" + c.name + "/" +
                                                 s.name + "'"));
    out.classes.push_back(std::move(rc));
  }
  for (const auto& a : cfg.attribute_sets)
    out.attribute_sets.push_back(
        resolve_set(a, "attribute set '" + a.name + "'"));

  if (!missing.empty()) throw ValidationError(std::move(missing));

  auto resolved_class = [&](const std::string& n) -> const ClassSpec* {
    for (const auto& c : out.classes)
      if (c.name == n) return &c;
    return nullptr;
  };
  auto resolved_attr = [&](const std::string& n) -> const WordSet* {
    for (const auto& a : out.attribute_sets)
      if (a.name == n) return &a;
    return nullptr;
  };

  std::size_t ti = 0;
  for (const auto& tr : cfg.weat_tests) {
    ++ti;
    const ClassSpec* c = resolved_class(tr.class_name);
    const ClassSpec* c_orig = cfg.find_class(tr.class_name);
    const WordSet* x = c->find_subclass(tr.x);
    const WordSet* y = c->find_subclass(tr.y);
    const WordSet* a = resolved_attr(tr.a);
    const WordSet* b = resolved_attr(tr.b);
    const WordSet* x_orig = c_orig->find_subclass(tr.x);
    const WordSet* y_orig = c_orig->find_subclass(tr.y);
    const WordSet* a_orig = cfg.find_attribute(tr.a);
    const WordSet* b_orig = cfg.find_attribute(tr.b);

    auto usable = [&](const WordSet* r, const WordSet* orig) {
      if (r->words.empty()) return false;
      if (orig->words.size() >= 2 && r->words.size() < 2) return false;
      return true;
    };
    if (!usable(x, x_orig) || !usable(y, y_orig) || !usable(a, a_orig) ||
        !usable(b, b_orig)) {
      warn(&out.warnings, "test #" + std::to_string(ti) + " ('" + tr.x +
                              "' vs '" + tr.y +
                              "'): skipped, a word set lost too many words "
                              "to vocabulary resolution");
      continue;
    }
    WeatTest t;
    t.class_name = tr.class_name;
    t.x = *x;
    t.y = *y;
    t.a = *a;
    t.b = *b;
    out.tests.push_back(std::move(t));
  }
  return out;
}

}  // namespace weatkit
