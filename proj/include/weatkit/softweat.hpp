// softweat.hpp : gradual debiasing: translate each biased subclass (plus
// expanded neighborhood) toward a nullspace vector of its attribute
// principal-component matrix
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "embedding.hpp"
#include "errors.hpp"
#include "lexicon.hpp"
#include "numkit.hpp"
#include "weat.hpp"

namespace weatkit {

struct SoftWeatParams {
  double lambda = 0.5;  // level of removal, in [0, 1]
  int neighbors_k = 20;
  std::size_t max_rank = 50000;  // frequency proxy for expansion
  double selection_threshold = 0.6;
  bool normalize_output = true;
  // explicit subclass -> attribute set names; keys are "class/subclass"
  // (bare subclass names accepted when unambiguous)
  std::optional<std::map<std::string, std::vector<std::string>>> manual_pairs;
  bool sequential = false;      // re-plan after each subclass is applied
  bool extended_mean = false;   // take m over the extended set instead of S_c
  std::uint64_t seed = 42;
};

struct TranslationPlan {
  std::string class_name;
  std::string subclass;
  std::vector<std::string> extended;  // all words this plan moves
  std::vector<std::string> attribute_names;
  Eigen::MatrixXd attribute_matrix;  // rows: attribute-set first PCs
  Eigen::VectorXd null_vector;       // chosen n
  Eigen::VectorXd mean;              // m
  Eigen::VectorXd psi;               // translation actually applied
  double lambda = 0.0;
};

namespace detail {

// exponent of the lowest set bit of x's significand (x = odd * 2^result)
inline int low_bit_exponent(double x) {
  int e;
  double f = std::frexp(std::abs(x), &e);
  auto mant = static_cast<std::uint64_t>(std::ldexp(f, 53));
  return e - 53 + std::countr_zero(mant);
}

}  // namespace detail

// Rounds each translation coordinate onto the power-of-two grid spanned by
// the data it will be added to, whenever every affected value fits a common
// grid with room to spare. Additions and difference vectors then incur no
// rounding at all. Data without such a grid (ordinary full-precision
// embeddings) is left untouched.
inline Eigen::VectorXd snap_translation(const Eigen::VectorXd& psi,
                                        const Eigen::MatrixXd& rows) {
  Eigen::VectorXd t = psi;
  for (Eigen::Index j = 0; j < psi.size(); ++j) {
    int min_low = std::numeric_limits<int>::max();
    int max_high = std::numeric_limits<int>::min();
    bool any = false;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      double x = rows(i, j);
      if (x == 0.0 || !std::isfinite(x)) continue;
      any = true;
      min_low = std::min(min_low, detail::low_bit_exponent(x));
      max_high = std::max(max_high, std::ilogb(x));
    }
    if (!any) continue;
    if (psi(j) != 0.0 && std::isfinite(psi(j)))
      max_high = std::max(max_high, std::ilogb(psi(j)));
    if (max_high - min_low > 50) continue;
    double g = std::ldexp(1.0, min_low);
    t(j) = std::nearbyint(psi(j) / g) * g;
  }
  return t;
}

namespace detail {

// w + psi for every listed word, realized as the homogeneous translation
// product with the final coordinate dropped.
inline void translate_words(Embedding& e, const std::vector<std::string>& words,
                            const Eigen::VectorXd& psi) {
  if (psi.isZero(0.0)) return;
  Eigen::Index d = e.dim();
  Eigen::MatrixXd hom = Eigen::MatrixXd::Identity(d + 1, d + 1);
  hom.block(0, d, d, 1) = psi;
  Eigen::VectorXd aug(d + 1);
  auto& m = e.mutable_vectors();
  for (const auto& w : words) {
    Eigen::Index i = e.index_of(w);
    aug.head(d) = m.row(i).transpose();
    aug(d) = 1.0;
    Eigen::VectorXd moved = hom * aug;
    m.row(i) = moved.head(d).transpose();
  }
}

}  // namespace detail

// Qualified key used for subclass maps throughout this module.
inline std::string subclass_key(const std::string& cls, const std::string& sub) {
  return cls + "/" + sub;
}

// From a bias report: which attribute sets should each subclass move away
// from. Tests whose mean |d| exceeds the threshold contribute; the sign of
// the mean d decides which side moves away from which attribute set.
inline std::map<std::string, std::vector<std::string>> select_attribute_sets(
    const BiasReport& report, double threshold, Warnings* warnings = nullptr) {
  struct Agg {
    std::vector<double> ds;
    const WeatTestRun* run = nullptr;
  };
  std::map<std::string, Agg> groups;  // keyed by full test identity
  std::vector<std::string> order;
  for (const auto& r : report.runs) {
    if (!r.result.d) continue;
    std::string key = r.test.class_name + "\x1f" + r.test.x.name + "\x1f" +
                      r.test.y.name + "\x1f" + r.test.a.name + "\x1f" +
                      r.test.b.name;
    auto [it, fresh] = groups.emplace(key, Agg{});
    if (fresh) order.push_back(key);
    it->second.ds.push_back(*r.result.d);
    it->second.run = &r;
  }
  std::map<std::string, std::vector<std::string>> out;
  auto add = [&](const std::string& key, const std::string& attr) {
    auto& list = out[key];
    if (std::find(list.begin(), list.end(), attr) == list.end())
      list.push_back(attr);
  };
  for (const auto& key : order) {
    const Agg& g = groups.at(key);
    double mean_abs = 0.0, mean_signed = 0.0;
    for (double d : g.ds) {
      mean_abs += std::abs(d);
      mean_signed += d;
    }
    mean_abs /= static_cast<double>(g.ds.size());
    mean_signed /= static_cast<double>(g.ds.size());
    if (!(mean_abs > threshold)) continue;
    const WeatTest& t = g.run->test;
    std::string kx = subclass_key(t.class_name, t.x.name);
    std::string ky = subclass_key(t.class_name, t.y.name);
    if (mean_signed > 0.0) {
      add(kx, t.a.name);
      add(ky, t.b.name);
    } else if (mean_signed < 0.0) {
      add(kx, t.b.name);
      add(ky, t.a.name);
    } else {
      warn(warnings, "test '" + t.x.name + "' vs '" + t.y.name +
                         "': strong but direction-ambiguous bias (mean d = "
                         "0); not selected");
    }
  }
  return out;
}

// Union of s with each word's k nearest neighbors of rank below max_rank,
// never crossing into another subclass's definitional words.
inline WordSet expand_target_set(
    const Embedding& e, const WordSet& s, int k,
    std::optional<std::size_t> max_rank = std::nullopt,
    const std::set<std::string>& other_definitional = {}) {
  WordSet out;
  out.name = s.name;
  std::set<std::string> have;
  for (const auto& w : s.words)
    if (have.insert(w).second) out.words.push_back(w);
  if (k <= 0) return out;
  for (const auto& w : s.words) {
    auto ns = nearest_neighbors(e, w, static_cast<std::size_t>(k), max_rank);
    for (const auto& nb : ns) {
      if (other_definitional.count(nb.word)) continue;
      if (have.insert(nb.word).second) out.words.push_back(nb.word);
    }
  }
  return out;
}

// Builds one subclass's translation: assemble A from attribute first PCs,
// enumerate nullspace candidates (basis vectors and negations), score each
// by tentatively translating and measuring mean |d| over the tests touching
// this subclass, keep the argmin.
inline TranslationPlan build_plan(
    const Embedding& e, const std::string& class_name, const WordSet& subclass,
    const std::vector<const WordSet*>& attribute_sets,
    const std::vector<WeatTest>& tests, double lambda,
    const SoftWeatParams& params,
    const std::vector<std::string>* extended = nullptr,
    Warnings* warnings = nullptr) {
  if (attribute_sets.empty())
    throw Error("build_plan: no attribute sets for subclass '" +
                subclass.name + "'");
  if (subclass.words.empty())
    throw Error("build_plan: subclass '" + subclass.name +
                "' has no resolved words");

  TranslationPlan plan;
  plan.class_name = class_name;
  plan.subclass = subclass.name;
  plan.lambda = lambda;
  plan.extended = extended ? *extended : subclass.words;

  std::vector<Eigen::VectorXd> pcs;
  for (const WordSet* a : attribute_sets) {
    if (a->words.size() < 2) {
      warn(warnings, "attribute set '" + a->name +
                         "' has fewer than 2 resolved words; skipped in the "
                         "attribute matrix");
      continue;
    }
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(a->words.size()), e.dim());
    for (std::size_t i = 0; i < a->words.size(); ++i)
      rows.row(static_cast<Eigen::Index>(i)) =
          e.vector_of(a->words[i]).transpose();
    try {
      pcs.push_back(top_principal_component(rows));
      plan.attribute_names.push_back(a->name);
    } catch (const DegenerateInputError&) {
      warn(warnings, "attribute set '" + a->name +
                         "' is degenerate; skipped in the attribute matrix");
    }
  }
  if (pcs.empty())
    throw Error("build_plan: subclass '" + subclass.name +
                "': every selected attribute set was unusable");
  if (static_cast<Eigen::Index>(pcs.size()) >= e.dim())
    throw Error("build_plan: " + std::to_string(pcs.size()) +
                " attribute sets leave no nullspace in " +
                std::to_string(e.dim()) +
                " dimensions; select fewer attribute sets");

  plan.attribute_matrix.resize(static_cast<Eigen::Index>(pcs.size()), e.dim());
  for (std::size_t i = 0; i < pcs.size(); ++i)
    plan.attribute_matrix.row(static_cast<Eigen::Index>(i)) = pcs[i].transpose();

  Basis null_basis = nullspace_basis(plan.attribute_matrix);
  if (null_basis.dimension() == 0)
    throw Error("build_plan: attribute matrix has no nullspace; select "
                "fewer attribute sets");

  // m over the original subclass words (or the extended set behind a flag)
  const std::vector<std::string>& mean_words =
      params.extended_mean ? plan.extended : subclass.words;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(e.dim());
  for (const auto& w : mean_words) m += e.vector_of(w);
  m /= static_cast<double>(mean_words.size());
  plan.mean = m;

  Eigen::MatrixXd ext_rows(static_cast<Eigen::Index>(plan.extended.size()),
                           e.dim());
  for (std::size_t i = 0; i < plan.extended.size(); ++i)
    ext_rows.row(static_cast<Eigen::Index>(i)) =
        e.vector_of(plan.extended[i]).transpose();

  std::vector<WeatTest> touching;
  for (const auto& t : tests)
    if (t.class_name == class_name &&
        (t.x.name == subclass.name || t.y.name == subclass.name))
      touching.push_back(t);
  const std::vector<WeatTest>& scored = touching.empty() ? tests : touching;

  double best_score = std::numeric_limits<double>::infinity();
  bool have_best = false;
  Embedding work;
  for (const auto& base : null_basis.vectors) {
    for (int sign = 0; sign < 2; ++sign) {
      Eigen::VectorXd n = sign == 0 ? base : Eigen::VectorXd(-base);
      Eigen::VectorXd psi = snap_translation(lambda * (n - m), ext_rows);
      work = e;
      detail::translate_words(work, plan.extended, psi);
      double sum = 0.0;
      std::size_t cnt = 0;
      for (const auto& t : scored) {
        auto d = effect_size(work, t);
        if (d) {
          sum += std::abs(*d);
          ++cnt;
        }
      }
      double score =
          cnt ? sum / static_cast<double>(cnt)
              : std::numeric_limits<double>::infinity();
      if (!have_best || score < best_score) {
        best_score = score;
        plan.null_vector = n;
        plan.psi = psi;
        have_best = true;
      }
    }
  }
  return plan;
}

inline Embedding apply_plan(const Embedding& e, const TranslationPlan& plan) {
  Embedding out = e;
  detail::translate_words(out, plan.extended, plan.psi);
  return out;
}

struct SoftWeatOutcome {
  Embedding embedding;
  BiasReport before, after;
  std::vector<TranslationPlan> plans;
  Warnings warnings;
};

namespace detail {

// manual_pairs keys may be "class/subclass" or a bare subclass name.
inline std::map<std::string, std::vector<std::string>> canonical_selection(
    const std::map<std::string, std::vector<std::string>>& manual,
    const std::vector<ClassSpec>& classes) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [key, attrs] : manual) {
    std::string qualified;
    if (key.find('/') != std::string::npos) {
      qualified = key;
      auto cls = key.substr(0, key.find('/'));
      auto sub = key.substr(key.find('/') + 1);
      bool found = false;
      for (const auto& c : classes)
        if (c.name == cls && c.find_subclass(sub)) found = true;
      if (!found)
        throw ValidationError({"manual pair references unknown subclass '" +
                               key + "'"});
    } else {
      std::vector<std::string> hits;
      for (const auto& c : classes)
        if (c.find_subclass(key)) hits.push_back(subclass_key(c.name, key));
      if (hits.empty())
        throw ValidationError({"manual pair references unknown subclass '" +
                               key + "'"});
      if (hits.size() > 1)
        throw ValidationError({"manual pair subclass '" + key +
                               "' is ambiguous; qualify it as "
                               "class/subclass"});
      qualified = hits[0];
    }
    out[qualified] = attrs;
  }
  return out;
}

}  // namespace detail

// Full pipeline: measure, select, expand, plan, translate, optionally
// normalize, measure again.
inline SoftWeatOutcome softweat(const Embedding& e,
                                const ResolvedLexicon& lexicon,
                                const SoftWeatParams& params,
                                const ReportOptions& report = {}) {
  if (!(params.lambda >= 0.0 && params.lambda <= 1.0))
    throw Error("lambda must lie in [0, 1]");
  if (params.neighbors_k < 0) throw Error("neighbors_k must be >= 0");

  SoftWeatOutcome out;
  out.warnings = lexicon.warnings;

  ReportOptions before_opts = report;
  before_opts.seed = derive_seed(params.seed, "softweat/report/before");
  out.before = make_report(e, lexicon.tests, before_opts);
  for (const auto& w : out.before.warnings) out.warnings.push_back(w);

  std::map<std::string, std::vector<std::string>> selection;
  if (params.manual_pairs)
    selection =
        detail::canonical_selection(*params.manual_pairs, lexicon.classes);
  else
    selection = select_attribute_sets(out.before, params.selection_threshold,
                                      &out.warnings);

  if (selection.empty()) {
    warn(&out.warnings,
         "no subclass exceeded the selection threshold and no manual pairs "
         "were given; embedding returned unchanged");
    out.embedding = e;
    out.after = out.before;
    return out;
  }

  // deterministic processing order: lexicon declaration order
  struct Entry {
    const ClassSpec* cls;
    const WordSet* sub;
    const std::vector<std::string>* attrs;
  };
  std::vector<Entry> entries;
  std::set<std::string> all_definitional;
  for (const auto& c : lexicon.classes)
    for (const auto& s : c.subclasses) {
      for (const auto& w : s.words) all_definitional.insert(w);
      auto it = selection.find(subclass_key(c.name, s.name));
      if (it != selection.end()) entries.push_back({&c, &s, &it->second});
    }
  if (entries.size() != selection.size())
    throw ValidationError(
        {"manual pairs reference subclasses outside the lexicon"});

  // expansion, excluding every other subclass's definitional words
  std::vector<std::vector<std::string>> extended(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::set<std::string> others = all_definitional;
    for (const auto& w : entries[i].sub->words) others.erase(w);
    std::optional<std::size_t> mr;
    if (params.max_rank > 0) mr = params.max_rank;
    WordSet ext = expand_target_set(e, *entries[i].sub, params.neighbors_k,
                                    mr, others);
    extended[i] = ext.words;
  }

  // a word grabbed by several neighborhoods moves with the nearest
  // subclass only (cosine to the subclass mean of its original words)
  {
    std::map<std::string, std::vector<std::size_t>> owner;
    for (std::size_t i = 0; i < entries.size(); ++i)
      for (const auto& w : extended[i]) owner[w].push_back(i);
    std::vector<Eigen::VectorXd> sub_mean(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(e.dim());
      for (const auto& w : entries[i].sub->words) m += e.vector_of(w);
      sub_mean[i] = m / static_cast<double>(entries[i].sub->words.size());
    }
    for (auto& [w, owners] : owner) {
      if (owners.size() < 2) continue;
      Eigen::VectorXd wv = e.vector_of(w);
      std::size_t best = owners[0];
      double best_cos = -2.0;
      for (std::size_t i : owners) {
        double c = cosine(wv, sub_mean[i]);
        if (c > best_cos) {
          best_cos = c;
          best = i;
        }
      }
      for (std::size_t i : owners) {
        if (i == best) continue;
        auto& list = extended[i];
        list.erase(std::remove(list.begin(), list.end(), w), list.end());
      }
      warn(&out.warnings, "word '" + w +
                              "' fell in several expanded neighborhoods; "
                              "assigned to subclass '" +
                              entries[best].sub->name + "'");
    }
  }

  auto attr_ptrs = [&](const std::vector<std::string>& names) {
    std::vector<const WordSet*> ptrs;
    for (const auto& n : names) {
      const WordSet* a = nullptr;
      for (const auto& cand : lexicon.attribute_sets)
        if (cand.name == n) a = &cand;
      if (!a)
        throw ValidationError({"selection references unknown attribute set '" +
                               n + "'"});
      ptrs.push_back(a);
    }
    return ptrs;
  };

  Embedding work = e;
  if (params.sequential) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      TranslationPlan plan = build_plan(
          work, entries[i].cls->name, *entries[i].sub,
          attr_ptrs(*entries[i].attrs), lexicon.tests, params.lambda, params,
          &extended[i], &out.warnings);
      work = apply_plan(work, plan);
      out.plans.push_back(std::move(plan));
    }
  } else {
    // plans built against the original embedding, applied jointly;
    // disjoint word lists make the application order irrelevant
    for (std::size_t i = 0; i < entries.size(); ++i)
      out.plans.push_back(build_plan(
          e, entries[i].cls->name, *entries[i].sub, attr_ptrs(*entries[i].attrs),
          lexicon.tests, params.lambda, params, &extended[i], &out.warnings));
    for (const auto& plan : out.plans)
      detail::translate_words(work, plan.extended, plan.psi);
  }

  if (params.normalize_output) normalize_rows(work);
  out.embedding = std::move(work);

  ReportOptions after_opts = report;
  after_opts.seed = derive_seed(params.seed, "softweat/report/after");
  out.after = make_report(out.embedding, lexicon.tests, after_opts);
  return out;
}

}  // namespace weatkit
