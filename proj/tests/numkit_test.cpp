#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "support.hpp"
#include "weatkit/numkit.hpp"

using namespace weatkit;

namespace {

Eigen::MatrixXd to_matrix(const oracle::Mat& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.size()),
                      static_cast<Eigen::Index>(m[0].size()));
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return out;
}

}  // namespace

TEST_CASE("top principal component matches an independent eigensolver") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 6; ++rep) {
    auto rows = testsupport::random_rows(8 + rep, 5, rng);
    Eigen::VectorXd got = top_principal_component(to_matrix(rows));
    auto want = oracle::top_pc(rows);
    REQUIRE(static_cast<std::size_t>(got.size()) == want.size());
    double dot = 0;
    for (Eigen::Index j = 0; j < got.size(); ++j)
      dot += got(j) * want[static_cast<std::size_t>(j)];
    CHECK(std::abs(dot) == Catch::Approx(1.0).margin(1e-9));
    CHECK(got.norm() == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("top principal component on a dominant-axis example") {
  Eigen::MatrixXd m(4, 3);
  m << 10, 0.1, 0, -10, -0.1, 0, 9, 0, 0.1, -9, 0, -0.1;
  Eigen::VectorXd pc = top_principal_component(m);
  CHECK(std::abs(pc(0)) > 0.99);
  // sign rule: first coordinate above the threshold is positive
  CHECK(pc(0) > 0);
}

TEST_CASE("top principal component is translation invariant") {
  std::mt19937_64 rng(17);
  auto rows = testsupport::random_rows(9, 4, rng);
  Eigen::MatrixXd m = to_matrix(rows);
  Eigen::MatrixXd shifted = m;
  shifted.rowwise() += Eigen::RowVector4d(100, -50, 3, 0.5);
  Eigen::VectorXd a = top_principal_component(m);
  Eigen::VectorXd b = top_principal_component(shifted);
  CHECK(std::abs(a.dot(b)) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("degenerate inputs to the principal component are rejected") {
  SECTION("fewer than two rows") {
    Eigen::MatrixXd one(1, 3);
    one << 1, 2, 3;
    REQUIRE_THROWS_AS(top_principal_component(one), DegenerateInputError);
  }
  SECTION("identical rows have zero variance") {
    Eigen::MatrixXd same(3, 3);
    same << 2, 2, 2, 2, 2, 2, 2, 2, 2;
    REQUIRE_THROWS_AS(top_principal_component(same), DegenerateInputError);
  }
}

TEST_CASE("nullspace of a rank-1 row span") {
  Eigen::MatrixXd a(1, 3);
  a << 1, 0, 0;
  Basis b = nullspace_basis(a);
  REQUIRE(b.dimension() == 2);
  for (const auto& v : b.vectors) {
    CHECK(std::abs(v(0)) <= 1e-10);
    CHECK(v.norm() == Catch::Approx(1.0).margin(1e-12));
  }
  CHECK(std::abs(b.vectors[0].dot(b.vectors[1])) <= 1e-10);
}

TEST_CASE("nullspace of a zero matrix is the full space") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2, 4);
  Basis b = nullspace_basis(z);
  REQUIRE(b.dimension() == 4);
}

TEST_CASE("nullspace vectors annihilate the input rows") {
  std::mt19937_64 rng(29);
  auto rows = testsupport::random_rows(3, 7, rng);
  Eigen::MatrixXd a = to_matrix(rows);
  Basis b = nullspace_basis(a);
  REQUIRE(b.dimension() == 4);
  for (const auto& v : b.vectors) {
    CHECK((a * v).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(v.norm() == Catch::Approx(1.0).margin(1e-12));
  }
  // pairwise orthogonality
  for (std::size_t i = 0; i < b.vectors.size(); ++i)
    for (std::size_t j = i + 1; j < b.vectors.size(); ++j)
      CHECK(std::abs(b.vectors[i].dot(b.vectors[j])) <= 1e-10);
}

TEST_CASE("nullspace requires strictly fewer rows than columns") {
  Eigen::MatrixXd square = Eigen::MatrixXd::Identity(3, 3);
  REQUIRE_THROWS_AS(nullspace_basis(square), Error);
}

TEST_CASE("rejection removes the component along the axis") {
  Eigen::VectorXd w(3), u(3);
  w << 1, 2, 3;
  u << 0, 0, 2;
  Eigen::VectorXd r = reject(w, u);
  CHECK(r(0) == 1.0);
  CHECK(r(1) == 2.0);
  CHECK(r(2) == 0.0);
  // idempotence
  Eigen::VectorXd rr = reject(r, u);
  CHECK((rr - r).cwiseAbs().maxCoeff() == 0.0);
  // zero axis is an error
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  REQUIRE_THROWS_AS(reject(w, zero), Error);
}

TEST_CASE("rejection leaves an orthogonal residual") {
  std::mt19937_64 rng(31);
  auto rows = testsupport::random_rows(2, 6, rng);
  Eigen::MatrixXd m = to_matrix(rows);
  Eigen::VectorXd w = m.row(0), u = m.row(1);
  Eigen::VectorXd r = reject(w, u);
  CHECK(std::abs(r.dot(u)) <= 1e-12 * w.norm() * u.norm());
}

TEST_CASE("circle points land on the circle with the expected symmetry") {
  Eigen::VectorXd o(3), v1(3), v2(3);
  o << 5, 0, 0;
  v1 << 0, 1, 0;
  v2 << 0, 0, 1;

  SECTION("two points are antipodal through the center") {
    auto pts = circle_points(o, 2.0, v1, v2, 2, 0.0);
    REQUIRE(pts.size() == 2);
    Eigen::VectorXd mid = 0.5 * (pts[0] + pts[1]);
    CHECK((mid - o).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((pts[0] - pts[1]).norm() == Catch::Approx(4.0).margin(1e-12));
  }
  SECTION("mean of n points is the center and spacing is uniform") {
    auto pts = circle_points(o, 1.5, v1, v2, 5, 0.25);
    REQUIRE(pts.size() == 5);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
    for (const auto& p : pts) {
      mean += p / 5.0;
      CHECK((p - o).norm() == Catch::Approx(1.5).margin(1e-12));
    }
    CHECK((mean - o).cwiseAbs().maxCoeff() <= 1e-12);
    double chord = (pts[0] - pts[1]).norm();
    for (std::size_t i = 1; i + 1 < pts.size(); ++i)
      CHECK((pts[i] - pts[i + 1]).norm() == Catch::Approx(chord).margin(1e-9));
  }
  SECTION("non-orthonormal plane vectors are rejected") {
    Eigen::VectorXd bad = v1 * 2.0;
    REQUIRE_THROWS_AS(circle_points(o, 1.0, bad, v2, 3, 0.0), Error);
    Eigen::VectorXd skew(3);
    skew << 0, 0.8, 0.6;
    REQUIRE_THROWS_AS(circle_points(o, 1.0, v1, (v1 + skew).normalized(), 3, 0.0),
                      Error);
  }
}

TEST_CASE("orthonormal plane perpendicular to an axis") {
  Eigen::VectorXd u(4);
  u << 1, 1, 0, 0;
  auto [v1, v2] = orthonormal_pair_perpendicular_to(u);
  CHECK(std::abs(v1.dot(u)) <= 1e-10);
  CHECK(std::abs(v2.dot(u)) <= 1e-10);
  CHECK(std::abs(v1.dot(v2)) <= 1e-10);
  CHECK(v1.norm() == Catch::Approx(1.0).margin(1e-12));
  CHECK(v2.norm() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("plane selection can avoid extra directions") {
  Eigen::VectorXd u(5);
  u << 1, 0, 0, 0, 0;
  Eigen::MatrixXd avoid(2, 5);
  avoid << 0, 1, 0, 0, 0, 0, 0, 1, 0, 0;
  auto [v1, v2] = orthonormal_pair_perpendicular_to(u, avoid);
  Eigen::VectorXd c1 = avoid.row(0), c2 = avoid.row(1);
  for (const auto& dir : {u, c1, c2}) {
    CHECK(std::abs(v1.dot(dir)) <= 1e-10);
    CHECK(std::abs(v2.dot(dir)) <= 1e-10);
  }
}

TEST_CASE("plane selection falls back when candidates fill the space") {
  Eigen::VectorXd u(3);
  u << 0, 0, 1;
  Eigen::MatrixXd avoid(2, 3);
  avoid << 1, 0, 0, 0, 1, 0;
  // avoiding everything leaves no plane, so only u itself is honored
  auto [v1, v2] = orthonormal_pair_perpendicular_to(u, avoid);
  CHECK(std::abs(v1.dot(u)) <= 1e-10);
  CHECK(std::abs(v2.dot(u)) <= 1e-10);
  CHECK(std::abs(v1.dot(v2)) <= 1e-10);
}

TEST_CASE("a plane needs at least three dimensions") {
  Eigen::VectorXd u(2);
  u << 1, 0;
  REQUIRE_THROWS_AS(orthonormal_pair_perpendicular_to(u), Error);
}

TEST_CASE("seed derivation separates streams and stays stable") {
  auto a = derive_seed(42, "alpha");
  auto b = derive_seed(42, "beta");
  auto a2 = derive_seed(42, "alpha");
  CHECK(a == a2);
  CHECK(a != b);
  CHECK(derive_seed(43, "alpha") != a);
}
