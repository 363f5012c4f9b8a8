#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "lcm/errors.hpp"
#include "lcm/rng.hpp"
#include "lcm/sc_lcm.hpp"
#include "oracles/oracles.hpp"

using Catch::Matchers::WithinAbs;
using namespace lcm;

namespace {

ResponseMatrix constant_responses(int n, int j, int value, int m) {
  return ResponseMatrix(IntMatrix::Constant(n, j, value), m);
}

// Class-wise means recomputed directly from the data.
Matrix class_means(const ResponseMatrix& r, const Labels& labels, int k) {
  Matrix means = Matrix::Zero(r.n_items(), k);
  std::vector<int> counts(k, 0);
  for (int i = 0; i < r.n_subjects(); ++i) {
    ++counts[labels[i]];
    for (int j = 0; j < r.n_items(); ++j) means(j, labels[i]) += r(i, j);
  }
  for (int c = 0; c < k; ++c) means.col(c) /= counts[c];
  return means;
}

Labels random_labels(int n, int k, Rng& rng) {
  Labels l(n);
  for (int i = 0; i < n; ++i) l[i] = i < k ? i : static_cast<int>(rng.below(k));
  return l;
}

}  // namespace

TEST_CASE("fit_sc_lcm: a single class averages every column") {
  auto r = constant_responses(6, 4, 3, 5);
  FittedModel fit = fit_sc_lcm(r, 1, 1);
  CHECK(fit.memberships_hat == Labels(6, 0));
  CHECK((fit.theta_hat.array() - 3.0).abs().maxCoeff() <= 1e-15);
  CHECK((fit.v_hat.array() - 1.2).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("fit_sc_lcm: noiseless two-class data is recovered exactly") {
  // theta column values 1 and 4, ten subjects each
  IntMatrix x(20, 4);
  Labels truth(20);
  for (int i = 0; i < 20; ++i) {
    truth[i] = i % 2;
    x.row(i).setConstant(truth[i] == 0 ? 1 : 4);
  }
  ResponseMatrix r(x, 5);
  FittedModel fit = fit_sc_lcm(r, 2, 3);
  CHECK(clustering_error(fit.memberships_hat, truth, 2) == 0.0);
  CHECK((fit.r_hat - r.as_real()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("fit_sc_lcm: recovers well-separated simulated classes") {
  int perfect = 0;
  for (int rep = 0; rep < 100; ++rep) {
    auto inst = generate_instance(500, 60, 3, GenConfig{0.1, 5, derive_seed(9, {std::uint64_t(rep)})});
    FittedModel fit = fit_sc_lcm(inst.responses, 3, rep);
    perfect += clustering_error(fit.memberships_hat, inst.params.memberships(), 3) == 0.0;
  }
  CHECK(perfect >= 95);
}

TEST_CASE("fit_sc_lcm: estimates are class means of the returned labels") {
  Rng rng(71);
  for (int t = 0; t < 15; ++t) {
    const int k = 1 + static_cast<int>(rng.below(5));
    auto inst = generate_instance(60 + static_cast<int>(rng.below(80)), 12, 3,
                                  GenConfig{0.2, 1 + static_cast<int>(rng.below(6)), rng.next()});
    FittedModel fit = fit_sc_lcm(inst.responses, k, rng.next());
    const Matrix expect = class_means(inst.responses, fit.memberships_hat, k);
    CHECK((fit.theta_hat - expect).cwiseAbs().maxCoeff() <= 1e-12);
    for (int i = 0; i < inst.responses.n_subjects(); ++i)
      for (int j = 0; j < 12; ++j) {
        REQUIRE(fit.r_hat(i, j) == fit.theta_hat(j, fit.memberships_hat[i]));
        const double m = fit.max_category;
        REQUIRE(fit.v_hat(i, j) == Catch::Approx(fit.r_hat(i, j) * (1 - fit.r_hat(i, j) / m)).margin(1e-15));
      }
  }
}

TEST_CASE("fit_sc_lcm: determinism and saturation") {
  auto inst = generate_instance(40, 10, 2, GenConfig{0.2, 5, 4});
  FittedModel a = fit_sc_lcm(inst.responses, 3, 8), b = fit_sc_lcm(inst.responses, 3, 8);
  CHECK(a.memberships_hat == b.memberships_hat);
  CHECK(a.theta_hat == b.theta_hat);

  // one subject per class reproduces the data
  auto small = generate_instance(6, 9, 2, GenConfig{0.2, 5, 5});
  FittedModel full = fit_sc_lcm(small.responses, 6, 1);
  CHECK((full.r_hat - small.responses.as_real()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("fit_sc_lcm: rejects invalid candidates") {
  auto r = constant_responses(5, 4, 1, 2);
  CHECK_THROWS_AS(fit_sc_lcm(r, 0, 1), ParameterError);
  CHECK_THROWS_AS(fit_sc_lcm(r, 6, 1), ParameterError);
  CHECK_THROWS_AS(fit_from_labels(r, Labels{0, 1, 0, 1}, 2), InputError);
  CHECK_THROWS_AS(fit_from_labels(r, Labels{0, 0, 0, 0, 0}, 2), InputError);
}

TEST_CASE("clustering_error: examples") {
  const Labels truth{0, 0, 1, 1, 2, 2};
  CHECK(clustering_error(truth, truth, 3) == 0.0);
  CHECK(clustering_error(Labels{2, 2, 0, 0, 1, 1}, truth, 3) == 0.0);

  // ten subjects, one moved from class 0 (size 5) to class 1 (size 5)
  const Labels t10{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  const Labels h10{0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  CHECK(oracle::clustering_error(h10, t10, 2) == Catch::Approx(0.2));
  CHECK(clustering_error(h10, t10, 2) == Catch::Approx(0.2));

  CHECK_THROWS_AS(clustering_error(Labels{0, 1}, Labels{0, 1, 1}, 2), InputError);
  CHECK_THROWS_AS(clustering_error(Labels{0, 0}, Labels{0, 1}, 3), InputError);
}

TEST_CASE("clustering_error: matches the brute-force oracle and ignores relabeling") {
  Rng rng(13);
  for (int t = 0; t < 200; ++t) {
    const int k = 1 + static_cast<int>(rng.below(6));
    const int n = k + static_cast<int>(rng.below(30));
    const Labels truth = random_labels(n, k, rng);
    Labels hat = truth;
    for (int i = 0; i < n; ++i)
      if (rng.bernoulli(0.3)) hat[i] = static_cast<int>(rng.below(k));
    const double e = clustering_error(hat, truth, k);
    REQUIRE(e == Catch::Approx(oracle::clustering_error(hat, truth, k)).margin(1e-15));
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(rng.next()));
    Labels relabeled = hat;
    for (int& l : relabeled) l = perm[l];
    REQUIRE(clustering_error(relabeled, truth, k) == e);
  }
}

TEST_CASE("clustering_error: bottleneck assignment agrees with exhaustive search") {
  Rng rng(17);
  for (int t = 0; t < 60; ++t) {
    const int k = 2 + static_cast<int>(rng.below(7));  // up to 8
    const int n = k + static_cast<int>(rng.below(50));
    const Labels truth = random_labels(n, k, rng);
    Labels hat = truth;
    for (int i = 0; i < n; ++i)
      if (rng.bernoulli(0.25)) hat[i] = static_cast<int>(rng.below(k));
    REQUIRE(clustering_error_bottleneck(hat, truth, k) ==
            Catch::Approx(clustering_error(hat, truth, k)).margin(1e-15));
  }
  // K above the exhaustive limit: a relabeled copy is still exact
  const int k = 12;
  Labels truth(48);
  for (int i = 0; i < 48; ++i) truth[i] = i % k;
  Labels hat = truth;
  for (int& l : hat) l = (l + 5) % k;
  CHECK(clustering_error(hat, truth, k) == 0.0);
  hat[0] = (hat[0] + 1) % k;
  CHECK(clustering_error(hat, truth, k) == Catch::Approx(0.25));
}
