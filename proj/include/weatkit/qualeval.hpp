// qualeval.hpp : embedding quality checks: Spearman rank correlation on
// word-pair similarity datasets and 3CosAdd analogy accuracy
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "embedding.hpp"
#include "errors.hpp"

namespace weatkit {

struct SimilarityPair {
  std::string w1, w2;
  double score = 0.0;
};

struct SimilarityDataset {
  std::string name;
  std::vector<SimilarityPair> pairs;

  // Lines "word1<sep>word2<sep>score"; the separator (tab, comma or
  // whitespace) is detected from the first data line. '#' lines are
  // comments.
  static SimilarityDataset load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open similarity dataset: " + path.string());
    SimilarityDataset ds;
    ds.name = path.stem().string();
    std::string line;
    std::size_t line_no = 0;
    char sep = 0;  // 0 = undecided, 'w' = any whitespace
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      if (sep == 0) {
        if (line.find('\t') != std::string::npos)
          sep = '\t';
        else if (line.find(',') != std::string::npos)
          sep = ',';
        else
          sep = 'w';
      }
      std::vector<std::string> tok;
      if (sep == 'w') {
        std::size_t i = 0;
        while (i < line.size()) {
          while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
          std::size_t st = i;
          while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
          if (i > st) tok.push_back(line.substr(st, i - st));
        }
      } else {
        std::size_t start = 0;
        while (start <= line.size()) {
          std::size_t end = line.find(sep, start);
          if (end == std::string::npos) end = line.size();
          std::string t = line.substr(start, end - start);
          // trim
          std::size_t b = t.find_first_not_of(" \t");
          std::size_t e2 = t.find_last_not_of(" \t");
          tok.push_back(b == std::string::npos ? "" : t.substr(b, e2 - b + 1));
          if (end == line.size()) break;
          start = end + 1;
        }
      }
      if (tok.size() != 3)
        throw ParseError(path.string() + " line " + std::to_string(line_no) +
                         ": expected 'word1 word2 score'");
      double sc;
      if (!detail::parse_double(tok[2], sc) || !std::isfinite(sc))
        throw ParseError(path.string() + " line " + std::to_string(line_no) +
                         ": cannot parse score '" + tok[2] + "'");
      ds.pairs.push_back({tok[0], tok[1], sc});
    }
    if (ds.pairs.size() < 2)
      throw ParseError(path.string() + ": needs at least 2 pairs");
    return ds;
  }
};

struct AnalogyQuestion {
  std::string a, b, c, expected;
};

struct AnalogySection {
  std::string name;
  std::vector<AnalogyQuestion> questions;
};

struct AnalogyDataset {
  std::string name;
  std::vector<AnalogySection> sections;

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& s : sections) n += s.questions.size();
    return n;
  }

  // Standard format: lines of four words; ": name" opens a section.
  static AnalogyDataset load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open analogy dataset: " + path.string());
    AnalogyDataset ds;
    ds.name = path.stem().string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line[0] == ':') {
        std::string name = line.substr(1);
        std::size_t b = name.find_first_not_of(" \t");
        ds.sections.push_back(
            {b == std::string::npos ? "" : name.substr(b), {}});
        continue;
      }
      std::vector<std::string> tok;
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t st = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > st) tok.push_back(line.substr(st, i - st));
      }
      if (tok.empty()) continue;
      if (tok.size() != 4)
        throw ParseError(path.string() + " line " + std::to_string(line_no) +
                         ": expected four words");
      for (std::size_t p = 0; p < 4; ++p)
        for (std::size_t q = p + 1; q < 4; ++q)
          if (tok[p] == tok[q])
            throw ParseError(path.string() + " line " +
                             std::to_string(line_no) +
                             ": question words must be distinct");
      if (ds.sections.empty()) ds.sections.push_back({"default", {}});
      ds.sections.back().questions.push_back(
          {tok[0], tok[1], tok[2], tok[3]});
    }
    if (ds.size() == 0)
      throw ParseError(path.string() + ": no analogy questions");
    return ds;
  }
};

namespace detail {

// average ranks (1-based midranks) of the values
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& a,
                      const std::vector<double>& b) {
  double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (double x : a) ma += x;
  for (double x : b) mb += x;
  ma /= n;
  mb /= n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  if (da == 0.0 || db == 0.0)
    throw DegenerateInputError(
        "correlation undefined: a score column is constant");
  return num / std::sqrt(da * db);
}

}  // namespace detail

struct SpearmanResult {
  double rho = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

// Spearman rank correlation between human scores and cosine similarity,
// over the pairs with both words in the vocabulary. Average-rank ties.
inline SpearmanResult spearman_similarity(const Embedding& e,
                                          const SimilarityDataset& ds) {
  std::vector<double> human, cos;
  SpearmanResult res;
  for (const auto& p : ds.pairs) {
    auto i = e.find(p.w1);
    auto j = e.find(p.w2);
    if (!i || !j) {
      ++res.skipped;
      continue;
    }
    human.push_back(p.score);
    cos.push_back(cosine_rows(e.vectors(), *i, *j));
  }
  res.used = human.size();
  if (res.used < 2)
    throw Error("similarity dataset '" + ds.name +
                "': fewer than 2 pairs are covered by the vocabulary");
  auto ra = detail::average_ranks(human);
  auto rb = detail::average_ranks(cos);
  res.rho = detail::pearson(ra, rb);
  return res;
}

struct SectionAccuracy {
  std::string name;
  double accuracy = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

struct AnalogyResult {
  double accuracy = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
  std::vector<SectionAccuracy> sections;
};

// 3CosAdd: predict argmax cos(w, b - a + c) over unit-normalized vectors,
// excluding the three question words, optionally restricted to words of
// rank below max_rank. A question counts only when all four words resolve.
inline AnalogyResult analogy_accuracy(
    const Embedding& e, const AnalogyDataset& ds,
    std::optional<std::size_t> max_rank = std::nullopt) {
  Eigen::MatrixXd unit = e.vectors();
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    double n = unit.row(i).norm();
    if (n > 0.0) unit.row(i) /= n;
  }
  AnalogyResult res;
  std::size_t correct_total = 0;
  for (const auto& sec : ds.sections) {
    SectionAccuracy sa;
    sa.name = sec.name;
    std::size_t correct = 0;
    for (const auto& q : sec.questions) {
      auto ia = e.find(q.a), ib = e.find(q.b), ic = e.find(q.c),
           ie = e.find(q.expected);
      if (!ia || !ib || !ic || !ie) {
        ++sa.skipped;
        continue;
      }
      Eigen::VectorXd query =
          (unit.row(*ib) - unit.row(*ia) + unit.row(*ic)).transpose();
      Eigen::VectorXd scores = unit * query;
      Eigen::Index best = -1;
      double best_score = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (i == *ia || i == *ib || i == *ic) continue;
        if (max_rank && e.rank_of(i) >= *max_rank) continue;
        if (scores(i) > best_score) {
          best_score = scores(i);
          best = i;
        }
      }
      ++sa.used;
      if (best == *ie) ++correct;
    }
    if (sa.used > 0)
      sa.accuracy =
          static_cast<double>(correct) / static_cast<double>(sa.used);
    res.used += sa.used;
    res.skipped += sa.skipped;
    correct_total += correct;
    res.sections.push_back(std::move(sa));
  }
  if (res.used == 0)
    throw Error("analogy dataset '" + ds.name +
                "': no question is fully covered by the vocabulary");
  res.accuracy =
      static_cast<double>(correct_total) / static_cast<double>(res.used);
  return res;
}

}  // namespace weatkit
