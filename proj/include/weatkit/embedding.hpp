// embedding.hpp : word embedding container, text I/O, cosine geometry
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace weatkit {

enum class EmbeddingFormat { plain, header };

namespace detail {

inline bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c >> 5) == 0x6) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c >> 4) == 0xE) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c >> 3) == 0x1E) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      unsigned char cc = static_cast<unsigned char>(s[i + k]);
      if ((cc >> 6) != 0x2) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // reject overlong forms, surrogates and out-of-range code points
    static const std::uint32_t min_cp[4] = {0, 0x80, 0x800, 0x10000};
    if (cp < min_cp[extra]) return false;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// shortest round-trip decimal form of a double
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

}  // namespace detail

// A named list of distinct tokens.
struct WordSet {
  std::string name;
  std::vector<std::string> words;

  static WordSet of(std::string name, std::vector<std::string> words) {
    WordSet s;
    s.name = std::move(name);
    std::unordered_map<std::string, bool> seen;
    for (auto& w : words)
      if (!seen.count(w)) {
        seen.emplace(w, true);
        s.words.push_back(std::move(w));
      }
    return s;
  }

  bool contains(const std::string& w) const {
    return std::find(words.begin(), words.end(), w) != words.end();
  }
  std::size_t size() const { return words.size(); }
};

struct LoadStats {
  std::size_t duplicates = 0;
  std::size_t skipped_invalid_utf8 = 0;
  Warnings messages;
};

class Embedding {
 public:
  Embedding() = default;

  Embedding(std::vector<std::string> words, Eigen::MatrixXd vectors)
      : words_(std::move(words)), vectors_(std::move(vectors)) {
    if (static_cast<Eigen::Index>(words_.size()) != vectors_.rows())
      throw Error("embedding: word count does not match vector row count");
    if (vectors_.rows() > 0 && vectors_.cols() < 2)
      throw Error("embedding: dimension must be at least 2");
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (!index_.emplace(words_[i], static_cast<Eigen::Index>(i)).second)
        throw Error("embedding: duplicate word '" + words_[i] + "'");
    }
    ranks_.resize(words_.size());
    for (std::size_t i = 0; i < ranks_.size(); ++i) ranks_[i] = i;
  }

  std::size_t size() const { return words_.size(); }
  Eigen::Index dim() const { return vectors_.cols(); }

  const std::vector<std::string>& words() const { return words_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }
  Eigen::MatrixXd& mutable_vectors() { return vectors_; }

  const std::string& word_at(Eigen::Index i) const {
    return words_[static_cast<std::size_t>(i)];
  }

  // Rank is a frequency proxy: file order unless overridden from counts.
  std::size_t rank_of(Eigen::Index i) const {
    return ranks_[static_cast<std::size_t>(i)];
  }

  void set_lowercase_fallback(bool on) { lowercase_fallback_ = on; }
  bool lowercase_fallback() const { return lowercase_fallback_; }

  std::optional<Eigen::Index> find(std::string_view w) const {
    auto it = index_.find(std::string(w));
    if (it != index_.end()) return it->second;
    if (lowercase_fallback_) {
      auto low = detail::to_lower(w);
      it = index_.find(low);
      if (it != index_.end()) return it->second;
    }
    return std::nullopt;
  }

  bool contains(std::string_view w) const { return find(w).has_value(); }

  Eigen::Index index_of(const std::string& w) const {
    auto i = find(w);
    if (!i) throw LookupError("unknown word: '" + w + "'");
    return *i;
  }

  Eigen::VectorXd vector_of(const std::string& w) const {
    return vectors_.row(index_of(w)).transpose();
  }

  // Override ranks from (token, count) pairs: higher count = lower rank.
  // Words without a count keep their relative file order after all counted
  // words. Counted tokens absent from the vocabulary are ignored.
  void set_frequency_ranks(
      const std::vector<std::pair<std::string, std::uint64_t>>& counts) {
    std::vector<std::uint64_t> count_of(words_.size(), 0);
    std::vector<char> counted(words_.size(), 0);
    for (const auto& [tok, cnt] : counts) {
      auto it = index_.find(tok);
      if (it == index_.end()) continue;
      count_of[static_cast<std::size_t>(it->second)] = cnt;
      counted[static_cast<std::size_t>(it->second)] = 1;
    }
    std::vector<std::size_t> order(words_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       if (counted[a] != counted[b]) return counted[a] > counted[b];
                       return count_of[a] > count_of[b];
                     });
    for (std::size_t r = 0; r < order.size(); ++r) ranks_[order[r]] = r;
  }

 private:
  std::vector<std::string> words_;
  Eigen::MatrixXd vectors_;
  std::unordered_map<std::string, Eigen::Index> index_;
  std::vector<std::size_t> ranks_;
  bool lowercase_fallback_ = false;
};

namespace detail {

struct ParsedRow {
  std::string word;
  std::vector<double> values;
};

// Splits one embedding line. Returns false for blank lines.
inline bool parse_embedding_line(const std::string& raw, std::size_t line_no,
                                 ParsedRow& row) {
  std::string_view line(raw);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  row.word.clear();
  row.values.clear();
  std::size_t pos = 0;
  auto next_token = [&](std::string_view& tok) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) return false;
    std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    tok = line.substr(start, pos - start);
    return true;
  };
  std::string_view tok;
  if (!next_token(tok)) return false;
  row.word.assign(tok);
  while (next_token(tok)) {
    double v;
    if (!parse_double(tok, v))
      throw ParseError("line " + std::to_string(line_no) +
                       ": cannot parse coordinate '" + std::string(tok) + "'");
    row.values.push_back(v);
  }
  return true;
}

}  // namespace detail

// Reads a whitespace-separated text embedding. In header format the first
// line must be "<vocab_size> <dim>". Duplicate tokens keep the first
// occurrence; tokens that are not valid UTF-8 are skipped. Both are counted
// in stats. Dimension mismatches and all-zero rows are hard errors.
inline Embedding load_embedding(const std::filesystem::path& path,
                                EmbeddingFormat format = EmbeddingFormat::plain,
                                LoadStats* stats = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file: " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::size_t declared_v = 0;
  Eigen::Index declared_d = -1;

  if (format == EmbeddingFormat::header) {
    if (!std::getline(in, line))
      throw ParseError("line 1: missing header line");
    ++line_no;
    detail::ParsedRow hdr;
    std::uint64_t v = 0, d = 0;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv(line);
    std::size_t sp = sv.find(' ');
    bool ok = sp != std::string_view::npos;
    if (ok) {
      auto r1 = std::from_chars(sv.data(), sv.data() + sp, v);
      auto r2 = std::from_chars(sv.data() + sp + 1, sv.data() + sv.size(), d);
      ok = r1.ec == std::errc() && r2.ec == std::errc() &&
           r2.ptr == sv.data() + sv.size();
    }
    if (!ok)
      throw ParseError("line 1: header must be '<vocab_size> <dim>', got '" +
                       line + "'");
    if (d < 2) throw ParseError("line 1: dimension must be at least 2");
    declared_v = v;
    declared_d = static_cast<Eigen::Index>(d);
  }

  std::vector<std::string> words;
  std::vector<std::vector<double>> rows;
  std::unordered_map<std::string, bool> seen;
  LoadStats local;
  LoadStats& st = stats ? *stats : local;
  Eigen::Index dim = declared_d;
  std::size_t data_lines = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (format == EmbeddingFormat::header && data_lines == declared_v) {
      detail::ParsedRow probe;
      if (detail::parse_embedding_line(line, line_no, probe))
        throw ParseError("line " + std::to_string(line_no) +
                         ": more data lines than declared in header");
      continue;
    }
    detail::ParsedRow row;
    if (!detail::parse_embedding_line(line, line_no, row)) continue;
    ++data_lines;
    if (row.values.empty() || row.values.size() < 2)
      throw ParseError("line " + std::to_string(line_no) +
                       ": row has fewer than 2 coordinates");
    Eigen::Index d = static_cast<Eigen::Index>(row.values.size());
    if (dim < 0) dim = d;
    if (d != dim)
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(dim) + " coordinates, found " +
                       std::to_string(d));
    bool all_zero = true;
    for (double v : row.values)
      if (v != 0.0) {
        all_zero = false;
        break;
      }
    if (all_zero)
      throw ParseError("line " + std::to_string(line_no) +
                       ": all-zero vector for token '" + row.word + "'");
    if (!detail::is_valid_utf8(row.word)) {
      ++st.skipped_invalid_utf8;
      continue;
    }
    if (seen.count(row.word)) {
      ++st.duplicates;
      continue;
    }
    seen.emplace(row.word, true);
    words.push_back(std::move(row.word));
    rows.push_back(std::move(row.values));
  }

  if (format == EmbeddingFormat::header && data_lines < declared_v)
    throw ParseError("header declares " + std::to_string(declared_v) +
                     " rows but file contains " + std::to_string(data_lines));
  if (words.empty()) throw ParseError("embedding file has no usable rows");

  if (st.duplicates > 0)
    st.messages.push_back("skipped " + std::to_string(st.duplicates) +
                          " duplicate token(s), first occurrence kept");
  if (st.skipped_invalid_utf8 > 0)
    st.messages.push_back("skipped " + std::to_string(st.skipped_invalid_utf8) +
                          " token(s) that were not valid UTF-8");

  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      m(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];

  return Embedding(std::move(words), std::move(m));
}

// Writes coordinates in shortest round-trip decimal form, so save followed
// by load reproduces the matrix exactly.
inline void save_embedding(const Embedding& e, const std::filesystem::path& path,
                           EmbeddingFormat format = EmbeddingFormat::plain) {
  if (e.size() == 0) throw Error("cannot save an empty embedding");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  if (format == EmbeddingFormat::header)
    out << e.size() << ' ' << e.dim() << '\n';
  std::string buf;
  for (std::size_t i = 0; i < e.size(); ++i) {
    buf = e.words()[i];
    for (Eigen::Index j = 0; j < e.dim(); ++j) {
      buf += ' ';
      buf += detail::format_double(e.vectors()(static_cast<Eigen::Index>(i), j));
    }
    buf += '\n';
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// Loads "token<whitespace>count" lines for rank overrides.
inline std::vector<std::pair<std::string, std::uint64_t>> load_frequency_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open frequency file: " + path.string());
  std::vector<std::pair<std::string, std::uint64_t>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t sp = line.find_last_of(" \t");
    if (sp == std::string::npos)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 'token count'");
    std::uint64_t cnt = 0;
    auto r = std::from_chars(line.data() + sp + 1, line.data() + line.size(), cnt);
    if (r.ec != std::errc() || r.ptr != line.data() + line.size())
      throw ParseError("line " + std::to_string(line_no) +
                       ": cannot parse count '" + line.substr(sp + 1) + "'");
    std::size_t end = sp;
    while (end > 0 && (line[end - 1] == ' ' || line[end - 1] == '\t')) --end;
    out.emplace_back(line.substr(0, end), cnt);
  }
  return out;
}

inline double cosine_rows(const Eigen::MatrixXd& m, Eigen::Index i,
                          Eigen::Index j) {
  double na = m.row(i).norm();
  double nb = m.row(j).norm();
  if (na == 0.0 || nb == 0.0)
    throw DegenerateInputError("cosine of a zero vector is undefined");
  double c = m.row(i).dot(m.row(j)) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

inline double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0)
    throw DegenerateInputError("cosine of a zero vector is undefined");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

inline double cosine(const Embedding& e, const std::string& w1,
                     const std::string& w2) {
  return cosine_rows(e.vectors(), e.index_of(w1), e.index_of(w2));
}

// Scales every row to unit length in place.
inline void normalize_rows(Embedding& e) {
  auto& m = e.mutable_vectors();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double n = m.row(i).norm();
    if (n > 0.0) m.row(i) /= n;
  }
}

inline Embedding normalize_all(const Embedding& e) {
  Embedding out = e;
  normalize_rows(out);
  return out;
}

struct Neighbor {
  std::string word;
  double cosine;
};

// k nearest by cosine, descending; ties broken by lower rank. The query
// word is never returned. With max_rank set, only words whose rank is
// strictly below it are candidates.
inline std::vector<Neighbor> nearest_neighbors(
    const Embedding& e, const std::string& word, std::size_t k,
    std::optional<std::size_t> max_rank = std::nullopt) {
  Eigen::Index self = e.index_of(word);
  if (k == 0) return {};
  struct Cand {
    double cos;
    std::size_t rank;
    Eigen::Index idx;
  };
  std::vector<Cand> cands;
  cands.reserve(e.size());
  const auto& m = e.vectors();
  double self_norm = m.row(self).norm();
  if (self_norm == 0.0)
    throw DegenerateInputError("query word has a zero vector");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i == self) continue;
    std::size_t r = e.rank_of(i);
    if (max_rank && r >= *max_rank) continue;
    double n = m.row(i).norm();
    if (n == 0.0) continue;
    double c = std::clamp(m.row(i).dot(m.row(self)) / (n * self_norm), -1.0, 1.0);
    cands.push_back({c, r, i});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.cos != b.cos) return a.cos > b.cos;
    return a.rank < b.rank;
  });
  if (cands.size() > k) cands.resize(k);
  std::vector<Neighbor> out;
  out.reserve(cands.size());
  for (const auto& c : cands) out.push_back({e.word_at(c.idx), c.cos});
  return out;
}

}  // namespace weatkit
