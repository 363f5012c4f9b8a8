#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lcm/errors.hpp"
#include "lcm/linalg.hpp"
#include "lcm/rng.hpp"
#include "oracles/oracles.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace lcm;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
  return a;
}

}  // namespace

TEST_CASE("spectral_norm: closed forms") {
  CHECK_THAT(spectral_norm(Matrix::Identity(2, 2)), WithinRel(1.0, 1e-12));
  Matrix a(2, 2);
  a << 3, 0, 4, 0;
  CHECK_THAT(spectral_norm(a), WithinRel(5.0, 1e-12));
  CHECK(spectral_norm(Matrix::Zero(4, 3)) == 0.0);
}

TEST_CASE("spectral_norm: start vector orthogonal to the top direction") {
  // Gram matrix [[1,-1],[-1,1]] annihilates the all-ones start.
  Matrix a(1, 2);
  a << 1, -1;
  CHECK_THAT(spectral_norm(a), WithinRel(std::sqrt(2.0), 1e-12));
  Matrix b(3, 2);
  b << 1, -1, 2, -2, -1, 1;
  CHECK_THAT(spectral_norm(b), WithinRel(std::sqrt(12.0), 1e-12));
}

TEST_CASE("spectral_norm: matches the Jacobi Gram oracle") {
  const Matrix a = random_matrix(7, 4, 2024);
  CHECK_THAT(spectral_norm(a), WithinRel(oracle::singular_values(a)[0], 1e-8));
}

TEST_CASE("spectral_norm: rejects bad input") {
  Matrix a = Matrix::Ones(2, 2);
  a(0, 1) = std::nan("");
  CHECK_THROWS_AS(spectral_norm(a), InputError);
  CHECK_THROWS_AS(spectral_norm(Matrix::Ones(2, 2), 0.0), ParameterError);
}

TEST_CASE("spectral_norm: invariances on random matrices") {
  Rng rng(5);
  for (int t = 0; t < 40; ++t) {
    const int rows = 2 + static_cast<int>(rng.below(30));
    const int cols = 2 + static_cast<int>(rng.below(30));
    const Matrix a = random_matrix(rows, cols, rng.next());
    const double s = spectral_norm(a);
    CHECK_THAT(spectral_norm(a.transpose()), WithinRel(s, 1e-9));
    const double c = rng.uniform(-3.0, 3.0);
    CHECK_THAT(spectral_norm(c * a), WithinRel(std::abs(c) * s, 1e-9));
    const int sr = 1 + static_cast<int>(rng.below(rows));
    const int sc = 1 + static_cast<int>(rng.below(cols));
    CHECK(spectral_norm(a.topLeftCorner(sr, sc)) <= s * (1 + 1e-12));
  }
}

TEST_CASE("top_k_svd") {
  SECTION("diagonal padded to 5 x 3") {
    Matrix a = Matrix::Zero(5, 3);
    a(0, 0) = 3;
    a(1, 1) = 2;
    a(2, 2) = 1;
    SvdResult svd = top_k_svd(a, 2);
    CHECK_THAT(svd.singular_values(0), WithinAbs(3.0, 1e-12));
    CHECK_THAT(svd.singular_values(1), WithinAbs(2.0, 1e-12));
  }
  SECTION("rank one u v^T") {
    Vector u(4), v(3);
    u << 2, 0, 0, 0;  // |u| = 2
    v << 0, 3, 0;     // |v| = 3
    SvdResult svd = top_k_svd(u * v.transpose(), 1);
    CHECK_THAT(svd.singular_values(0), WithinRel(6.0, 1e-12));
  }
  SECTION("full reconstruction of a seeded 20 x 8 matrix") {
    const Matrix a = random_matrix(20, 8, 31);
    SvdResult svd = top_k_svd(a, 8);
    const Matrix rebuilt = svd.left_vectors * svd.singular_values.asDiagonal() *
                           svd.right_vectors.transpose();
    CHECK((a - rebuilt).norm() <= 1e-8 * a.norm());
  }
  SECTION("wide matrices and per-triple residuals") {
    for (auto [rows, cols] : {std::pair{6, 15}, std::pair{15, 6}, std::pair{9, 9}}) {
      const Matrix a = random_matrix(rows, cols, 100 + rows);
      const int k = std::min(rows, cols) - 1;
      SvdResult svd = top_k_svd(a, k);
      const Matrix gram_u = svd.left_vectors.transpose() * svd.left_vectors;
      CHECK((gram_u - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() <= 1e-8);
      for (int i = 0; i < k; ++i) {
        const double res = (a * svd.right_vectors.col(i) -
                            svd.singular_values(i) * svd.left_vectors.col(i)).norm();
        CHECK(res <= 1e-6 * svd.singular_values(0));
        if (i > 0) CHECK(svd.singular_values(i) <= svd.singular_values(i - 1));
      }
    }
  }
  SECTION("zero matrix yields zeros and an orthonormal basis") {
    SvdResult svd = top_k_svd(Matrix::Zero(5, 3), 3);
    CHECK(svd.singular_values.cwiseAbs().maxCoeff() == 0.0);
    const Matrix g = svd.left_vectors.transpose() * svd.left_vectors;
    CHECK((g - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SECTION("rank-deficient matrix completes left vectors") {
    Matrix a = Matrix::Zero(6, 4);
    a.col(0).setOnes();
    a.col(1).setOnes();
    SvdResult svd = top_k_svd(a, 3);
    CHECK_THAT(svd.singular_values(0), WithinRel(std::sqrt(12.0), 1e-12));
    const Matrix g = svd.left_vectors.transpose() * svd.left_vectors;
    CHECK((g - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SECTION("k out of range") {
    CHECK_THROWS_AS(top_k_svd(Matrix::Ones(4, 3), 0), ParameterError);
    CHECK_THROWS_AS(top_k_svd(Matrix::Ones(4, 3), 4), ParameterError);
  }
}

TEST_CASE("singular_values_above") {
  CHECK(singular_values_above(Matrix::Zero(4, 3), 0.1) == 0);
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 10, 5, 1;
  CHECK(singular_values_above(d, 4.0) == 2);
  CHECK(singular_values_above(d, 5.0) == 1);  // strictly greater
  CHECK_THROWS_AS(singular_values_above(d, -1.0), ParameterError);

  SECTION("noiseless rank-K expectation has exactly K values above 2.01(sqrt J + sqrt N)") {
    auto inst = generate_instance(200, 60, 3, GenConfig{0.1, 5, 17});
    const Matrix e = expected_response(inst.params);
    const double thr = 2.01 * (std::sqrt(60.0) + std::sqrt(200.0));
    std::vector<double> oracle_sv = oracle::singular_values(e);
    const int oracle_count =
        static_cast<int>(std::count_if(oracle_sv.begin(), oracle_sv.end(),
                                       [&](double s) { return s > thr; }));
    CHECK(oracle_count == 3);
    CHECK(singular_values_above(e, thr) == oracle_count);
  }
  SECTION("agrees with top_k_svd on shared thresholds") {
    const Matrix a = random_matrix(12, 7, 3);
    SvdResult svd = top_k_svd(a, 7);
    for (int i = 0; i + 1 < 7; ++i) {
      const double thr = 0.5 * (svd.singular_values(i) + svd.singular_values(i + 1));
      CHECK(singular_values_above(a, thr) == i + 1);
    }
  }
}

TEST_CASE("kmeans") {
  SECTION("two perfectly separated groups") {
    Matrix pts(10, 2);
    for (int i = 0; i < 5; ++i) pts.row(i) << 0, 0;
    for (int i = 5; i < 10; ++i) pts.row(i) << 10, 10;
    KmeansResult km = kmeans(pts, 2, 1);
    CHECK(km.inertia == 0.0);
    for (int i = 1; i < 5; ++i) CHECK(km.labels[i] == km.labels[0]);
    for (int i = 6; i < 10; ++i) CHECK(km.labels[i] == km.labels[5]);
    CHECK(km.labels[0] != km.labels[5]);
  }
  SECTION("k = 1 gives the mean") {
    const Matrix pts = random_matrix(30, 3, 9);
    KmeansResult km = kmeans(pts, 1, 2);
    CHECK((km.centroids.row(0) - pts.colwise().mean()).norm() <= 1e-12);
    for (int l : km.labels) CHECK(l == 0);
  }
  SECTION("k = N saturates") {
    const Matrix pts = random_matrix(8, 2, 10);
    KmeansResult km = kmeans(pts, 8, 3);
    CHECK(km.inertia == 0.0);
    Labels sorted = km.labels;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 8; ++i) CHECK(sorted[i] == i);
  }
  SECTION("inertia matches recomputation and clusters are non-empty") {
    Rng rng(44);
    for (int t = 0; t < 20; ++t) {
      const int n = 5 + static_cast<int>(rng.below(60));
      const int k = 1 + static_cast<int>(rng.below(std::min(n, 7)));
      const Matrix pts = random_matrix(n, 3, rng.next());
      KmeansResult km = kmeans(pts, k, rng.next());
      CHECK_THAT(km.inertia,
                 WithinRel(kmeans_inertia(pts, km.labels, km.centroids), 1e-9));
      std::vector<int> sizes(k, 0);
      for (int l : km.labels) {
        REQUIRE(l >= 0);
        REQUIRE(l < k);
        ++sizes[l];
      }
      for (int s : sizes) CHECK(s > 0);
    }
  }
  SECTION("duplicate points still yield non-empty clusters") {
    Matrix pts = Matrix::Zero(6, 2);
    pts.row(5) << 1, 1;
    KmeansResult km = kmeans(pts, 4, 5);
    std::vector<int> sizes(4, 0);
    for (int l : km.labels) ++sizes[l];
    for (int s : sizes) CHECK(s > 0);
  }
  SECTION("deterministic given the seed") {
    const Matrix pts = random_matrix(40, 2, 12);
    KmeansResult a = kmeans(pts, 4, 77), b = kmeans(pts, 4, 77);
    CHECK(a.labels == b.labels);
    CHECK(a.inertia == b.inertia);
  }
  SECTION("more clusters than points") {
    CHECK_THROWS_AS(kmeans(Matrix::Ones(2, 2), 3, 1), ParameterError);
  }
}
