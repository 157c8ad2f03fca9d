// numkit.hpp : small linear-algebra kernels used by the debiasing transforms
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace weatkit {

// First principal component of the rows of `data` (population covariance).
// Deterministic sign: the first coordinate with magnitude above 1e-12 is
// made positive.
inline Eigen::VectorXd top_principal_component(const Eigen::MatrixXd& data) {
  if (data.rows() < 2)
    throw DegenerateInputError(
        "principal component needs at least 2 rows, got " +
        std::to_string(data.rows()));
  Eigen::RowVectorXd mean = data.colwise().mean();
  Eigen::MatrixXd centered = data.rowwise() - mean;
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(data.rows());
  double scale = data.squaredNorm() / static_cast<double>(data.rows());
  if (cov.trace() <= 1e-24 * std::max(scale, 1e-300))
    throw DegenerateInputError(
        "principal component undefined: rows carry no variance");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw Error("eigendecomposition failed");
  Eigen::VectorXd pc = es.eigenvectors().col(data.cols() - 1);
  for (Eigen::Index i = 0; i < pc.size(); ++i) {
    if (std::abs(pc(i)) > 1e-12) {
      if (pc(i) < 0.0) pc = -pc;
      break;
    }
  }
  return pc;
}

struct Basis {
  std::vector<Eigen::VectorXd> vectors;
  std::size_t dimension() const { return vectors.size(); }
};

// Orthonormal basis of the right nullspace of A (n x d, n < d). Singular
// directions with sigma <= tol * sigma_max count as null. For the zero
// matrix every direction is null.
inline Basis nullspace_basis(const Eigen::MatrixXd& A, double tol = 1e-8) {
  Eigen::Index n = A.rows();
  Eigen::Index d = A.cols();
  if (n == 0 || d == 0) throw Error("nullspace of an empty matrix");
  if (n >= d)
    throw Error("nullspace basis requires fewer rows than columns (got " +
                std::to_string(n) + "x" + std::to_string(d) + ")");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv(0) : 0.0;
  double cut = tol * smax;
  Basis out;
  for (Eigen::Index i = 0; i < d; ++i) {
    bool null_dir = i >= sv.size() || sv(i) <= cut;
    if (null_dir) out.vectors.push_back(svd.matrixV().col(i));
  }
  return out;
}

// Component of w orthogonal to u.
inline Eigen::VectorXd reject(const Eigen::VectorXd& w,
                              const Eigen::VectorXd& u) {
  double nu2 = u.squaredNorm();
  if (nu2 == 0.0) throw Error("cannot reject from the zero vector");
  return w - (w.dot(u) / nu2) * u;
}

// n points evenly spaced on the circle of radius r around o in the plane
// spanned by the orthonormal pair (v1, v2). Point i sits at angle
// 2*pi*i/n + phase for i = 1..n.
inline std::vector<Eigen::VectorXd> circle_points(const Eigen::VectorXd& o,
                                                  double r,
                                                  const Eigen::VectorXd& v1,
                                                  const Eigen::VectorXd& v2,
                                                  std::size_t n,
                                                  double phase = 0.0) {
  if (n == 0) throw Error("circle_points: need at least one point");
  if (r < 0.0) throw Error("circle_points: negative radius");
  if (std::abs(v1.norm() - 1.0) > 1e-8 || std::abs(v2.norm() - 1.0) > 1e-8 ||
      std::abs(v1.dot(v2)) > 1e-8)
    throw Error("circle_points: (v1, v2) must be an orthonormal pair");
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(n);
  const double two_pi = 6.283185307179586476925286766559;
  for (std::size_t i = 1; i <= n; ++i) {
    double th = two_pi * static_cast<double>(i) / static_cast<double>(n) + phase;
    pts.push_back(o + r * std::cos(th) * v1 + r * std::sin(th) * v2);
  }
  return pts;
}

// An orthonormal pair perpendicular to u, and to as many of the candidate
// row directions as dimensionality allows. Falls back to ignoring the
// candidates when they leave fewer than two free directions.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd>
orthonormal_pair_perpendicular_to(
    const Eigen::VectorXd& u,
    const std::optional<Eigen::MatrixXd>& candidates = std::nullopt) {
  Eigen::Index d = u.size();
  if (d < 3)
    throw Error("orthonormal pair needs dimension >= 3, got " +
                std::to_string(d));
  double un = u.norm();
  if (un == 0.0) throw Error("orthonormal pair: direction is the zero vector");

  auto from_rows = [&](const Eigen::MatrixXd& rows)
      -> std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> {
    if (rows.rows() >= d) return std::nullopt;
    Basis b = nullspace_basis(rows);
    if (b.dimension() < 2) return std::nullopt;
    return std::make_pair(b.vectors[0], b.vectors[1]);
  };

  if (candidates && candidates->rows() > 0) {
    std::vector<Eigen::VectorXd> rows;
    rows.push_back(u / un);
    for (Eigen::Index i = 0; i < candidates->rows(); ++i) {
      Eigen::VectorXd r = candidates->row(i).transpose();
      double rn = r.norm();
      if (rn > 0.0) rows.push_back(r / rn);
    }
    Eigen::MatrixXd stacked(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
      stacked.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    if (auto pair = from_rows(stacked)) return *pair;
  }

  Eigen::MatrixXd single = (u / un).transpose();
  auto pair = from_rows(single);
  if (!pair) throw Error("orthonormal pair: no perpendicular plane found");
  return *pair;
}

// Stable stream splitting: one master seed plus a label yields an
// independent engine seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = seed ^ h;
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace weatkit
