// hardweat.hpp : complete joint debiasing: neutralize the vocabulary
// against a weighted centroid direction, then re-embed definitional words
// on equidistant circles
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "embedding.hpp"
#include "errors.hpp"
#include "lexicon.hpp"
#include "numkit.hpp"
#include "weat.hpp"

namespace weatkit {

enum class PlaneSelection { center_only, center_and_attributes };

struct HardWeatParams {
  double angle_threshold_deg = 45.0;  // guard distance, (0, 90)
  int max_iterations = 50;
  double radius_ratio_min = 10.0;  // r_s >= ratio * r_c
  std::uint64_t seed = 42;
  PlaneSelection plane = PlaneSelection::center_and_attributes;
  std::optional<WordSet> neutral_words;  // default scope: all non-definitional
};

namespace detail {

inline double unit_u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace detail

// Top principal component of the per-subclass mean-shifted definitional
// words of one class.
inline Eigen::VectorXd class_definitional_vector(const Embedding& e,
                                                 const ClassSpec& c) {
  std::vector<Eigen::VectorXd> rows;
  for (const auto& sub : c.subclasses) {
    if (sub.words.empty())
      throw DegenerateInputError("class '" + c.name + "': subclass '" +
                                 sub.name + "' has no resolvable words");
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(e.dim());
    for (const auto& w : sub.words) mu += e.vector_of(w);
    mu /= static_cast<double>(sub.words.size());
    for (const auto& w : sub.words) rows.push_back(e.vector_of(w) - mu);
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), e.dim());
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  try {
    return top_principal_component(m);
  } catch (const DegenerateInputError& ex) {
    throw DegenerateInputError("class '" + c.name + "': " + ex.what());
  }
}

// Bias-level-weighted average of class definitional vectors.
inline Eigen::VectorXd centroid(
    const std::map<std::string, Eigen::VectorXd>& def_vectors,
    const std::map<std::string, double>& delta) {
  double total = 0.0;
  Eigen::VectorXd omega;
  for (const auto& [cls, def] : def_vectors) {
    auto it = delta.find(cls);
    double w = it == delta.end() ? 0.0 : it->second;
    if (omega.size() == 0) omega = Eigen::VectorXd::Zero(def.size());
    omega += w * def;
    total += w;
  }
  if (omega.size() == 0) throw Error("centroid: no class definitional vectors");
  if (total == 0.0)
    throw Error("centroid: all bias levels are zero, nothing to debias");
  omega /= total;
  if (omega.norm() <= 1e-10)
    throw Error(
        "centroid: class definitional vectors cancel out; supply a manual "
        "centroid or debias the classes separately");
  return omega;
}

// Replaces every neutral word by its rejection from omega. Words parallel
// to omega cannot be neutralized by rejection; they are reported and given
// a tiny deterministic orthogonal component instead.
inline Embedding neutralize(const Embedding& e, const WordSet& neutral,
                            const Eigen::VectorXd& omega,
                            Warnings* warnings = nullptr) {
  if (omega.norm() == 0.0) throw Error("neutralize: zero direction");
  Embedding out = e;
  auto& m = out.mutable_vectors();
  std::optional<Eigen::VectorXd> fallback_dir;
  for (const auto& w : neutral.words) {
    Eigen::Index i = out.index_of(w);
    Eigen::VectorXd row = m.row(i).transpose();
    Eigen::VectorXd rej = reject(row, omega);
    double scale = row.norm();
    if (rej.norm() <= 1e-12 * std::max(scale, 1e-300)) {
      if (!fallback_dir)
        fallback_dir = orthonormal_pair_perpendicular_to(omega).first;
      rej = (scale > 0.0 ? 1e-6 * scale : 1e-6) * (*fallback_dir);
      warn(warnings, "neutralize: word '" + w +
                         "' is parallel to the bias centroid; replaced by a "
                         "tiny orthogonal vector");
    }
    m.row(i) = rej.transpose();
  }
  return out;
}

struct EquidistanceGeometry {
  Eigen::VectorXd o_c;  // circle system center: reject(def_c, omega)
  Eigen::VectorXd v1, v2;
  double r_c = 0.0;
  double r_s = 0.0;
  std::vector<Eigen::VectorXd> centers;  // one per subclass
};

namespace detail {

inline void draw_radii(const HardWeatParams& p, const std::string& cls,
                       int attempt, double& r_c, double& r_s) {
  std::mt19937_64 rng(derive_seed(
      p.seed, "hardweat/radii/" + cls + "/" + std::to_string(attempt)));
  r_c = 0.01 + unit_u01(rng) * 0.09;
  r_s = p.radius_ratio_min * r_c * (1.0 + unit_u01(rng));
}

}  // namespace detail

// Geometry shared by one class's re-embedding: the circle of subclass
// centers and the plane both circles live in.
inline EquidistanceGeometry plan_equidistance(
    const ClassSpec& c, const Eigen::VectorXd& omega,
    const Eigen::VectorXd& def_c,
    const std::optional<Eigen::MatrixXd>& plane_candidates, double r_c,
    double r_s, Warnings* warnings = nullptr) {
  if (omega.size() < 3)
    throw Error("equidistancing needs dimension >= 3, got " +
                std::to_string(omega.size()));
  if (c.subclasses.size() < 2)
    throw Error("class '" + c.name + "' needs at least 2 subclasses");
  std::size_t m = c.subclasses.front().words.size();
  for (const auto& s : c.subclasses)
    if (s.words.size() != m || m == 0)
      throw ValidationError({"class '" + c.name +
                             "': definitional sets must have equal, nonzero "
                             "size for equidistancing"});

  EquidistanceGeometry g;
  g.o_c = reject(def_c, omega);
  g.r_c = r_c;
  g.r_s = r_s;
  Eigen::VectorXd axis = g.o_c;
  if (axis.norm() <= 1e-10) {
    warn(warnings, "class '" + c.name +
                       "': definitional vector is parallel to the centroid; "
                       "centering its circle at the origin");
    g.o_c = Eigen::VectorXd::Zero(omega.size());
    axis = omega;
  }
  auto [v1, v2] = orthonormal_pair_perpendicular_to(axis, plane_candidates);
  g.v1 = v1;
  g.v2 = v2;
  g.centers =
      circle_points(g.o_c, g.r_c, g.v1, g.v2, c.subclasses.size(), 0.0);
  return g;
}

// Writes one class's definitional words onto their circles.
inline void apply_equidistance(Embedding& e, const ClassSpec& c,
                               const EquidistanceGeometry& g) {
  auto& m = e.mutable_vectors();
  for (std::size_t si = 0; si < c.subclasses.size(); ++si) {
    const auto& sub = c.subclasses[si];
    auto pts = circle_points(g.centers[si], g.r_s, g.v1, g.v2,
                             sub.words.size(), 0.0);
    for (std::size_t wi = 0; wi < sub.words.size(); ++wi)
      m.row(e.index_of(sub.words[wi])) = pts[wi].transpose();
  }
}

// One-class re-embedding, drawing radii from the seed stream. def_c
// defaults to the class definitional vector of `e` as given; pass the
// vector computed on the pre-mutation embedding when running the pipeline.
inline Embedding equidistance_class(
    const Embedding& e, const ClassSpec& c, const Eigen::VectorXd& omega,
    const HardWeatParams& params,
    const std::optional<Eigen::VectorXd>& def_c = std::nullopt,
    const std::optional<Eigen::MatrixXd>& plane_candidates = std::nullopt,
    int attempt = 0, Warnings* warnings = nullptr) {
  double r_c, r_s;
  detail::draw_radii(params, c.name, attempt, r_c, r_s);
  Eigen::VectorXd def =
      def_c ? *def_c : class_definitional_vector(e, c);
  EquidistanceGeometry g =
      plan_equidistance(c, omega, def, plane_candidates, r_c, r_s, warnings);
  Embedding out = e;
  apply_equidistance(out, c, g);
  return out;
}

struct HardWeatOutcome {
  Embedding embedding;
  BiasReport before, after;
  int iterations = 0;
  bool guard_satisfied = false;
  Eigen::VectorXd omega;
  Warnings warnings;
};

namespace detail {

// Largest cosine between any definitional row and any neutral row.
inline double max_def_neutral_cosine(const Embedding& e,
                                     const std::vector<Eigen::Index>& def_idx,
                                     const std::vector<Eigen::Index>& neu_idx) {
  const auto& m = e.vectors();
  double worst = -2.0;
  for (Eigen::Index di : def_idx) {
    Eigen::VectorXd dv = m.row(di).transpose();
    double dn = dv.norm();
    if (dn == 0.0) continue;
    Eigen::VectorXd prod = m * (dv / dn);
    for (Eigen::Index ni : neu_idx) {
      double nn = m.row(ni).norm();
      if (nn == 0.0) continue;
      double c = prod(ni) / nn;
      if (c > worst) worst = c;
    }
  }
  return worst;
}

}  // namespace detail

// Full pipeline: bias levels on the input embedding, definitional vectors,
// weighted centroid, neutralize + normalize, then per-class equidistancing
// with the neutral-word angle guard, and a final normalize.
inline HardWeatOutcome hardweat(const Embedding& e,
                                const ResolvedLexicon& lexicon,
                                const HardWeatParams& params,
                                const ReportOptions& report = {}) {
  if (!(params.angle_threshold_deg > 0.0 && params.angle_threshold_deg < 90.0))
    throw Error("angle threshold must lie strictly between 0 and 90 degrees");
  if (params.max_iterations < 1)
    throw Error("max_iterations must be at least 1");
  if (!(params.radius_ratio_min > 1.0))
    throw Error("radius_ratio_min must exceed 1");
  if (e.dim() < 3) throw Error("hardweat needs dimension >= 3");

  // validation before any compute: resolved definitional sets must be
  // usable for equidistancing
  {
    std::vector<std::string> violations;
    for (const auto& c : lexicon.classes) {
      std::size_t sz = c.subclasses.empty() ? 0 : c.subclasses[0].words.size();
      for (const auto& s : c.subclasses) {
        if (s.words.empty())
          violations.push_back("subclass '" + c.name + "/" + s.name +
                               "' resolved to no words");
        else if (s.words.size() != sz)
          violations.push_back(
              "class '" + c.name +
              "': resolved definitional sets differ in size (" +
              std::to_string(sz) + " vs " + std::to_string(s.words.size()) +
              " in '" + s.name + "')");
      }
    }
    if (!violations.empty()) throw ValidationError(std::move(violations));
  }

  HardWeatOutcome out;
  out.warnings = lexicon.warnings;

  // definitional index set; also catches words claimed by several classes
  std::set<std::string> def_words;
  std::vector<Eigen::Index> def_idx;
  for (const auto& c : lexicon.classes)
    for (const auto& s : c.subclasses)
      for (const auto& w : s.words) {
        if (!def_words.insert(w).second)
          warn(&out.warnings, "word '" + w +
                                  "' is definitional in more than one class; "
                                  "its final position follows the last class "
                                  "processed");
        else
          def_idx.push_back(e.index_of(w));
      }

  ReportOptions before_opts = report;
  before_opts.seed = derive_seed(params.seed, "hardweat/report/before");
  out.before = make_report(e, lexicon.tests, before_opts);
  for (const auto& w : out.before.warnings) out.warnings.push_back(w);

  std::map<std::string, Eigen::VectorXd> defs;
  for (const auto& c : lexicon.classes)
    defs[c.name] = class_definitional_vector(e, c);
  out.omega = centroid(defs, out.before.bias);

  // neutral scope
  WordSet neutral;
  neutral.name = "neutral";
  if (params.neutral_words) {
    for (const auto& w : params.neutral_words->words) {
      if (!e.contains(w)) {
        warn(&out.warnings,
             "neutral list: dropped out-of-vocabulary word '" + w + "'");
        continue;
      }
      if (def_words.count(w)) {
        warn(&out.warnings, "neutral list: word '" + w +
                                "' is definitional and was excluded");
        continue;
      }
      neutral.words.push_back(w);
    }
  } else {
    for (std::size_t i = 0; i < e.size(); ++i)
      if (!def_words.count(e.words()[i])) neutral.words.push_back(e.words()[i]);
    if (neutral.words.size() + def_words.size() != e.size())
      throw Error("internal: neutral and definitional sets fail to "
                  "partition the vocabulary");
  }
  if (neutral.words.empty())
    throw Error("neutral set is empty: every vocabulary word is definitional");

  std::vector<Eigen::Index> neu_idx;
  neu_idx.reserve(neutral.words.size());
  for (const auto& w : neutral.words) neu_idx.push_back(e.index_of(w));

  Embedding base = neutralize(e, neutral, out.omega, &out.warnings);
  normalize_rows(base);

  // plane candidates: attribute-set principal components of the
  // neutralized embedding
  std::optional<Eigen::MatrixXd> candidates;
  if (params.plane == PlaneSelection::center_and_attributes &&
      !lexicon.attribute_sets.empty()) {
    std::vector<Eigen::VectorXd> pcs;
    for (const auto& a : lexicon.attribute_sets) {
      if (a.words.size() < 2) {
        warn(&out.warnings, "attribute set '" + a.name +
                                "' has fewer than 2 resolved words; not used "
                                "for plane selection");
        continue;
      }
      Eigen::MatrixXd rows(static_cast<Eigen::Index>(a.words.size()),
                           base.dim());
      for (std::size_t i = 0; i < a.words.size(); ++i)
        rows.row(static_cast<Eigen::Index>(i)) =
            base.vector_of(a.words[i]).transpose();
      try {
        pcs.push_back(top_principal_component(rows));
      } catch (const DegenerateInputError&) {
        warn(&out.warnings, "attribute set '" + a.name +
                                "' is degenerate; not used for plane "
                                "selection");
      }
    }
    if (!pcs.empty()) {
      Eigen::MatrixXd m(static_cast<Eigen::Index>(pcs.size()), base.dim());
      for (std::size_t i = 0; i < pcs.size(); ++i)
        m.row(static_cast<Eigen::Index>(i)) = pcs[i].transpose();
      candidates = std::move(m);
    }
  }

  const double cos_guard =
      std::cos(params.angle_threshold_deg * 0.017453292519943295);
  double best_cos = 2.0;
  Embedding best;
  int used = 0;
  bool satisfied = false;

  for (int attempt = 0; attempt < params.max_iterations; ++attempt) {
    Embedding trial = base;
    Warnings attempt_warnings;
    for (const auto& c : lexicon.classes) {
      double r_c, r_s;
      detail::draw_radii(params, c.name, attempt, r_c, r_s);
      EquidistanceGeometry g = plan_equidistance(
          c, out.omega, defs[c.name], candidates, r_c, r_s, &attempt_warnings);
      apply_equidistance(trial, c, g);
    }
    normalize_rows(trial);
    double worst = detail::max_def_neutral_cosine(trial, def_idx, neu_idx);
    used = attempt + 1;
    if (worst < best_cos) {
      best_cos = worst;
      best = std::move(trial);
      for (auto& w : attempt_warnings) out.warnings.push_back(std::move(w));
    }
    if (best_cos <= cos_guard) {
      satisfied = true;
      break;
    }
  }

  if (!satisfied)
    warn(&out.warnings,
         "angle guard not satisfied after " + std::to_string(used) +
             " attempts; returning the attempt with the largest "
             "neutral-to-definitional angle");

  out.embedding = std::move(best);
  out.iterations = used;
  out.guard_satisfied = satisfied;

  ReportOptions after_opts = report;
  after_opts.seed = derive_seed(params.seed, "hardweat/report/after");
  out.after = make_report(out.embedding, lexicon.tests, after_opts);
  return out;
}

}  // namespace weatkit
