// support.hpp : shared helpers for the test suite
#pragma once

#include <unistd.h>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "weatkit/embedding.hpp"

namespace testsupport {

inline weatkit::Embedding make_embedding(std::vector<std::string> words,
                                         const oracle::Mat& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return weatkit::Embedding(std::move(words), std::move(m));
}

inline oracle::ToyEmbedding to_toy(const weatkit::Embedding& e) {
  oracle::ToyEmbedding t;
  t.words = e.words();
  t.vectors.resize(e.size(), oracle::Vec(static_cast<std::size_t>(e.dim())));
  for (std::size_t i = 0; i < e.size(); ++i)
    for (Eigen::Index j = 0; j < e.dim(); ++j)
      t.vectors[i][static_cast<std::size_t>(j)] =
          e.vectors()(static_cast<Eigen::Index>(i), j);
  return t;
}

// unique per-process scratch directory, removed on destruction
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("weatkit_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path file(const std::string& name) const {
    return path / name;
  }
};

inline void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

inline double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

// random toy embedding with entries in (-1, 1)
inline oracle::Mat random_rows(std::size_t n, std::size_t d,
                               std::mt19937_64& rng) {
  oracle::Mat rows(n, oracle::Vec(d));
  for (auto& r : rows)
    for (auto& x : r) x = 2.0 * u01(rng) - 1.0;
  return rows;
}

inline std::vector<std::string> gen_words(std::size_t n,
                                          const std::string& prefix = "w") {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace testsupport
