// weat.hpp : word-embedding association tests, permutation p-values,
// per-class bias levels
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "embedding.hpp"
#include "errors.hpp"
#include "numkit.hpp"

namespace weatkit {

struct WeatTest {
  std::string class_name;
  WordSet x, y, a, b;
};

struct WeatResult {
  double s = 0.0;
  std::optional<double> d;  // empty when the effect size is degenerate
  double p = 1.0;
  std::uint64_t n_permutations = 0;
  bool exact = false;
};

namespace detail {

inline double mean_cosine(const Embedding& e, Eigen::Index w,
                          const std::vector<Eigen::Index>& set) {
  double sum = 0.0;
  for (Eigen::Index i : set) sum += cosine_rows(e.vectors(), w, i);
  return sum / static_cast<double>(set.size());
}

inline std::vector<Eigen::Index> resolve_indices(const Embedding& e,
                                                 const WordSet& s) {
  std::vector<Eigen::Index> out;
  out.reserve(s.words.size());
  for (const auto& w : s.words) out.push_back(e.index_of(w));
  return out;
}

// Deterministic Fisher-Yates; avoids stdlib distribution differences.
inline void shuffle_indices(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::uint64_t bound = i;
    std::uint64_t x;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                          std::numeric_limits<std::uint64_t>::max() % bound;
    do {
      x = rng();
    } while (x >= limit);
    std::swap(v[i - 1], v[x % bound]);
  }
}

inline std::optional<std::uint64_t> binomial_capped(std::uint64_t n,
                                                    std::uint64_t k,
                                                    std::uint64_t cap) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i is always integral at this point
    std::uint64_t num = n - k + i;
    if (r > (std::numeric_limits<std::uint64_t>::max() / num))
      return std::nullopt;  // overflow: certainly above any practical cap
    r = r * num / i;
    if (r > cap) return std::nullopt;
  }
  return r;
}

}  // namespace detail

// h(w, A, B): how much more similar w is to A than to B, in [-2, 2].
inline double association(const Embedding& e, const std::string& w,
                          const WordSet& a, const WordSet& b) {
  if (a.words.empty() || b.words.empty())
    throw Error("association: attribute sets must be non-empty");
  Eigen::Index wi = e.index_of(w);
  double ma = detail::mean_cosine(e, wi, detail::resolve_indices(e, a));
  double mb = detail::mean_cosine(e, wi, detail::resolve_indices(e, b));
  return ma - mb;
}

// Test statistic: sum of associations over X minus sum over Y.
inline double statistic(const Embedding& e, const WeatTest& t) {
  if (t.x.words.empty() || t.y.words.empty())
    throw Error("statistic: target sets must be non-empty");
  double sx = 0.0, sy = 0.0;
  for (const auto& w : t.x.words) sx += association(e, w, t.a, t.b);
  for (const auto& w : t.y.words) sy += association(e, w, t.a, t.b);
  return sx - sy;
}

// Effect size: difference of mean associations over the population standard
// deviation of associations across X union Y. Returns nullopt when that
// deviation vanishes (e.g. all association values identical).
inline std::optional<double> effect_size(const Embedding& e,
                                         const WeatTest& t) {
  if (t.x.words.empty() || t.y.words.empty())
    throw Error("effect size: target sets must be non-empty");
  std::vector<double> hx, hy;
  hx.reserve(t.x.words.size());
  hy.reserve(t.y.words.size());
  for (const auto& w : t.x.words) hx.push_back(association(e, w, t.a, t.b));
  for (const auto& w : t.y.words) hy.push_back(association(e, w, t.a, t.b));
  double sx = 0.0, sy = 0.0;
  for (double h : hx) sx += h;
  for (double h : hy) sy += h;
  double nx = static_cast<double>(hx.size());
  double ny = static_cast<double>(hy.size());
  double pooled_mean = (sx + sy) / (nx + ny);
  double ssx = 0.0, ssy = 0.0;
  for (double h : hx) ssx += (h - pooled_mean) * (h - pooled_mean);
  for (double h : hy) ssy += (h - pooled_mean) * (h - pooled_mean);
  double var = (ssx + ssy) / (nx + ny);
  double sd = std::sqrt(var);
  if (!(sd > 1e-12)) return std::nullopt;
  return (sx / nx - sy / ny) / sd;
}

struct PValue {
  double p = 1.0;
  bool exact = false;
  std::uint64_t n_permutations = 0;
};

// One-sided permutation test over equal-size repartitions of X union Y.
// All partitions are enumerated when there are at most n_samples of them;
// otherwise n_samples draws are used, the identity partition included, so
// p is never zero. Requires |X| == |Y|.
inline PValue p_value(const Embedding& e, const WeatTest& t,
                      std::uint64_t n_samples = 10000,
                      std::uint64_t seed = 42) {
  if (t.x.words.size() != t.y.words.size())
    throw Error("p-value: target sets must have equal size");
  if (t.x.words.empty()) throw Error("p-value: target sets must be non-empty");
  if (n_samples == 0) throw Error("p-value: n_samples must be positive");

  const std::size_t m = t.x.words.size();
  const std::size_t pool_n = 2 * m;
  std::vector<double> h;
  h.reserve(pool_n);
  for (const auto& w : t.x.words) h.push_back(association(e, w, t.a, t.b));
  for (const auto& w : t.y.words) h.push_back(association(e, w, t.a, t.b));

  double sx_obs = 0.0, sy_obs = 0.0;
  for (std::size_t i = 0; i < m; ++i) sx_obs += h[i];
  for (std::size_t i = m; i < pool_n; ++i) sy_obs += h[i];
  const double s_obs = sx_obs - sy_obs;
  const double total = sx_obs + sy_obs;

  auto count_partitions = detail::binomial_capped(pool_n, m, n_samples);

  PValue out;
  if (count_partitions && *count_partitions <= n_samples) {
    // exhaustive: walk combinations in lexicographic order
    std::vector<std::size_t> sel(m);
    for (std::size_t i = 0; i < m; ++i) sel[i] = i;
    std::uint64_t ge = 0, n_parts = 0;
    while (true) {
      // both sides summed in ascending index order, so the identity
      // partition reproduces s_obs bit for bit and p stays positive
      double s_in = 0.0, s_out = 0.0;
      std::size_t sp = 0;
      for (std::size_t i = 0; i < pool_n; ++i) {
        if (sp < m && sel[sp] == i) {
          s_in += h[i];
          ++sp;
        } else {
          s_out += h[i];
        }
      }
      double s_prime = s_in - s_out;
      if (s_prime >= s_obs) ++ge;
      ++n_parts;
      // next combination
      std::size_t i = m;
      while (i > 0) {
        --i;
        if (sel[i] != i + pool_n - m) {
          ++sel[i];
          for (std::size_t j = i + 1; j < m; ++j) sel[j] = sel[j - 1] + 1;
          break;
        }
        if (i == 0) {
          i = m + 1;  // signal: done
          break;
        }
      }
      if (i == m + 1) break;
    }
    out.p = static_cast<double>(ge) / static_cast<double>(n_parts);
    out.exact = true;
    out.n_permutations = n_parts;
  } else {
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(pool_n);
    for (std::size_t i = 0; i < pool_n; ++i) idx[i] = i;
    std::uint64_t ge = 1;  // the identity partition
    for (std::uint64_t k = 1; k < n_samples; ++k) {
      detail::shuffle_indices(idx, rng);
      double s_in = 0.0;
      for (std::size_t i = 0; i < m; ++i) s_in += h[idx[i]];
      double s_prime = s_in - (total - s_in);
      if (s_prime >= s_obs) ++ge;
    }
    out.p = static_cast<double>(ge) / static_cast<double>(n_samples);
    out.exact = false;
    out.n_permutations = n_samples;
  }
  return out;
}

struct RunOptions {
  std::uint64_t n_samples = 10000;
  std::uint64_t seed = 42;
  bool strict = false;
};

struct RunOutcome {
  WeatTest used;  // after any trimming
  WeatResult result;
  Warnings warnings;
};

// Runs one test end to end. Unequal target sets are trimmed to the smaller
// size (keeping earlier words) with a warning, or rejected in strict mode.
inline RunOutcome run_test(const Embedding& e, const WeatTest& t,
                           const RunOptions& opts = {}) {
  RunOutcome out;
  out.used = t;
  if (t.x.words.size() != t.y.words.size()) {
    if (opts.strict)
      throw ValidationError({"test '" + t.x.name + "' vs '" + t.y.name +
                             "': target sets differ in size (" +
                             std::to_string(t.x.words.size()) + " vs " +
                             std::to_string(t.y.words.size()) +
                             ") under strict mode"});
    std::size_t n = std::min(t.x.words.size(), t.y.words.size());
    out.used.x.words.resize(n);
    out.used.y.words.resize(n);
    warn(&out.warnings, "test '" + t.x.name + "' vs '" + t.y.name +
                            "': target sets trimmed to " + std::to_string(n) +
                            " words each");
  }
  out.result.s = statistic(e, out.used);
  out.result.d = effect_size(e, out.used);
  PValue pv = p_value(e, out.used, opts.n_samples, opts.seed);
  out.result.p = pv.p;
  out.result.exact = pv.exact;
  out.result.n_permutations = pv.n_permutations;
  return out;
}

struct WeatTestRun {
  WeatTest test;
  WeatResult result;
};

/// Per-class bias level: tests are grouped by unordered target pair; the
// mean |d| (or signed d) is taken within each pair, then averaged over
// pairs. Degenerate tests are excluded with a warning.
inline std::map<std::string, double> bias_levels(
    const std::vector<WeatTestRun>& runs, bool absolute = true,
    Warnings* warnings = nullptr) {
  using PairKey = std::pair<std::string, std::string>;
  std::map<std::string, std::map<PairKey, std::vector<double>>> by_class;
  for (const auto& r : runs) {
    if (!r.result.d) {
      warn(warnings, "bias level: excluded degenerate test '" +
                         r.test.x.name + "' vs '" + r.test.y.name +
                         "' (class '" + r.test.class_name + "')");
      continue;
    }
    PairKey key = std::minmax(r.test.x.name, r.test.y.name);
    double d = *r.result.d;
    by_class[r.test.class_name][key].push_back(absolute ? std::abs(d) : d);
  }
  std::map<std::string, double> out;
  for (auto& [cls, pairs] : by_class) {
    double sum = 0.0;
    std::size_t n = 0;
    for (auto& [key, ds] : pairs) {
      std::sort(ds.begin(), ds.end());
      double s = 0.0;
      for (double d : ds) s += d;
      sum += s / static_cast<double>(ds.size());
      ++n;
    }
    if (n > 0) out[cls] = sum / static_cast<double>(n);
  }
  return out;
}

struct BiasReport {
  std::vector<WeatTestRun> runs;
  std::map<std::string, double> bias;
  Warnings warnings;
};

struct ReportOptions {
  std::uint64_t n_samples = 10000;
  std::uint64_t seed = 42;
  bool strict = false;
  bool absolute = true;
};

inline BiasReport make_report(const Embedding& e,
                              const std::vector<WeatTest>& tests,
                              const ReportOptions& opts = {}) {
  BiasReport rep;
  std::size_t i = 0;
  for (const auto& t : tests) {
    RunOptions ro;
    ro.n_samples = opts.n_samples;
    ro.strict = opts.strict;
    ro.seed = derive_seed(opts.seed, "weat/" + std::to_string(i) + "/" +
                                         t.class_name + "/" + t.x.name + "|" +
                                         t.y.name + "|" + t.a.name + "|" +
                                         t.b.name);
    RunOutcome o = run_test(e, t, ro);
    rep.runs.push_back({o.used, o.result});
    for (auto& w : o.warnings) rep.warnings.push_back(std::move(w));
    ++i;
  }
  rep.bias = bias_levels(rep.runs, opts.absolute, &rep.warnings);
  return rep;
}

}  // namespace weatkit
