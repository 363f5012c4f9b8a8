#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lcm/errors.hpp"
#include "lcm/model.hpp"
#include "lcm/rng.hpp"

using Catch::Matchers::WithinAbs;
using namespace lcm;

TEST_CASE("rng: derive_seed is a pure function of its path") {
  CHECK(derive_seed(42, {1, 2}) == derive_seed(42, {1, 2}));
  CHECK(derive_seed(42, {1, 2}) != derive_seed(42, {2, 1}));
  CHECK(derive_seed(42, {1}) != derive_seed(43, {1}));
  Rng a(9), b(9);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("rng: bounded integers are uniform (10^6-draw frequency oracle)") {
  Rng rng(123);
  std::vector<int> counts(3, 0);
  const int draws = 1'000'000;
  for (int i = 0; i < draws; ++i) ++counts[rng.below(3)];
  // sd of a proportion at n = 1e6 is ~4.7e-4; 0.003 is > 6 sd.
  for (int c : counts) CHECK_THAT(c / double(draws), WithinAbs(1.0 / 3.0, 0.003));
}

TEST_CASE("generate_memberships") {
  SECTION("single class forces every label") {
    for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
      auto draw = generate_memberships(4, 1, seed);
      CHECK(draw.labels == Labels{0, 0, 0, 0});
      CHECK(draw.resamples == 0);
    }
  }
  SECTION("equal class proportions at N = 3000, K = 3") {
    auto draw = generate_memberships(3000, 3, 7);
    std::vector<int> sizes(3, 0);
    for (int l : draw.labels) ++sizes[l];
    for (int s : sizes) CHECK_THAT(s / 3000.0, WithinAbs(1.0 / 3.0, 0.05));
  }
  SECTION("pigeonhole violation") {
    CHECK_THROWS_AS(generate_memberships(2, 3, 1), ParameterError);
    CHECK_THROWS_WITH(generate_memberships(2, 3, 1),
                      Catch::Matchers::ContainsSubstring("n_subjects < n_classes"));
  }
  SECTION("tight case N = K resamples until every class is hit") {
    int total_resamples = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto draw = generate_memberships(4, 4, seed);
      Labels sorted = draw.labels;
      std::sort(sorted.begin(), sorted.end());
      CHECK(sorted == Labels{0, 1, 2, 3});
      total_resamples += draw.resamples;
    }
    // P(all 4 classes in 4 draws) = 4!/4^4 ~ 0.094, so resampling must occur.
    CHECK(total_resamples > 0);
  }
}

TEST_CASE("generate_theta") {
  SECTION("delta = 0.5 collapses the interval to M/2") {
    Matrix theta = generate_theta(2, 2, GenConfig{0.5, 5, 3});
    CHECK((theta.array() == 2.5).all());
  }
  SECTION("J = 60, K = 4, delta = 0.2 stays in [1, 4] with mean near 2.5") {
    Matrix theta = generate_theta(60, 4, GenConfig{0.2, 5, 11});
    CHECK(theta.minCoeff() >= 1.0);
    CHECK(theta.maxCoeff() <= 4.0);
    CHECK_THAT(theta.mean(), WithinAbs(2.5, 0.1));
  }
  SECTION("moments match Uniform[0.5, 4.5]") {
    Matrix theta = generate_theta(1000, 1, GenConfig{0.1, 5, 5});
    CHECK(theta.minCoeff() >= 0.5);
    CHECK(theta.maxCoeff() <= 4.5);
    // Uniform oracle: mean 2.5, variance (4.5 - 0.5)^2 / 12 = 4/3. The sample
    // mean has sd sqrt(4/3 / 1000) ~ 0.0365; allow 3 sd.
    CHECK_THAT(theta.mean(), WithinAbs(2.5, 3 * std::sqrt(4.0 / 3.0 / 1000)));
    const double var = (theta.array() - theta.mean()).square().sum() / 999.0;
    CHECK_THAT(var, WithinAbs(4.0 / 3.0, 0.12));
  }
  SECTION("delta outside (0, 0.5] is rejected") {
    for (double d : {0.0, -0.1, 0.51, 1.0}) {
      CHECK_THROWS_AS(generate_theta(3, 2, GenConfig{d, 5, 1}), ParameterError);
    }
  }
  SECTION("bounds hold exactly for random deltas") {
    Rng rng(77);
    for (int t = 0; t < 50; ++t) {
      const double delta = 0.01 + 0.49 * rng.uniform();
      const int m = 1 + static_cast<int>(rng.below(9));
      Matrix theta = generate_theta(20, 5, GenConfig{delta, m, rng.next()});
      CHECK((theta.array() / m >= delta).all());
      CHECK((theta.array() / m <= 1.0 - delta).all());
    }
  }
}

TEST_CASE("LcmParams validation") {
  Matrix theta(1, 2);
  theta << 1.0, 4.0;
  CHECK_NOTHROW(LcmParams({0, 1}, theta, 5));
  CHECK_THROWS_AS(LcmParams({0, 0}, theta, 5), ParameterError);  // class 1 empty
  CHECK_THROWS_AS(LcmParams({0, 2}, theta, 5), ParameterError);  // label range
  Matrix bad = theta;
  bad(0, 1) = 5.5;
  CHECK_THROWS_AS(LcmParams({0, 1}, bad, 5), ParameterError);

  LcmParams p({1, 0, 1}, theta, 5);
  const Matrix z = p.classification_matrix();
  CHECK((z.rowwise().sum().array() == 1.0).all());
  Matrix ztz = z.transpose() * z;
  CHECK(ztz(0, 0) == 1.0);
  CHECK(ztz(1, 1) == 2.0);
  CHECK(ztz(0, 1) == 0.0);
}

TEST_CASE("expected_response") {
  SECTION("one class repeats Theta in every row") {
    Matrix theta(2, 1);
    theta << 2.0, 3.0;
    Matrix e = expected_response(LcmParams({0, 0, 0}, theta, 5));
    for (int i = 0; i < 3; ++i) {
      CHECK(e(i, 0) == 2.0);
      CHECK(e(i, 1) == 3.0);
    }
  }
  SECTION("direct indexing") {
    Matrix theta(1, 2);
    theta << 1.0, 4.0;
    Matrix e = expected_response(LcmParams({0, 1}, theta, 5));
    CHECK(e(0, 0) == 1.0);
    CHECK(e(1, 0) == 4.0);
  }
  SECTION("equals the dense product Z Theta^T") {
    auto draw = generate_memberships(6, 3, 4);
    Matrix theta = generate_theta(5, 3, GenConfig{0.1, 5, 8});
    LcmParams p(draw.labels, theta, 5);
    const Matrix z = p.classification_matrix();
    Matrix brute = Matrix::Zero(6, 5);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 5; ++j)
        for (int k = 0; k < 3; ++k) brute(i, j) += z(i, k) * theta(j, k);
    CHECK((expected_response(p) - brute).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("sample_responses") {
  SECTION("degenerate binomials") {
    Matrix theta(2, 1);
    theta << 0.0, 5.0;
    LcmParams p(Labels(50, 0), theta, 5);
    ResponseMatrix r = sample_responses(p, 3);
    CHECK((r.data().col(0).array() == 0).all());
    CHECK((r.data().col(1).array() == 5).all());
  }
  SECTION("binomial moments at E = 2.5, M = 5") {
    Matrix theta(1, 1);
    theta << 2.5;
    LcmParams p(Labels(100000, 0), theta, 5);
    Matrix x = sample_responses(p, 19).as_real();
    const double mean = x.mean();
    const double var = (x.array() - mean).square().sum() / (x.size() - 1);
    CHECK_THAT(mean, WithinAbs(2.5, 0.02));
    CHECK_THAT(var, WithinAbs(1.25, 0.03));  // E (1 - E/M)
  }
  SECTION("Monte Carlo mean converges to the expected response") {
    auto inst = generate_instance(600, 60, 3, GenConfig{0.2, 5, 21});
    const Matrix expected = expected_response(inst.params);
    const int reps = 200;
    Matrix sum = Matrix::Zero(600, 60);
    for (int r = 0; r < reps; ++r) {
      sum += sample_responses(inst.params, derive_seed(5, {std::uint64_t(r)})).as_real();
    }
    const Matrix mean = sum / reps;
    // Entrywise: the mean of 200 draws has sd <= sqrt(1.25 / 200) ~ 0.079, so
    // over 36000 entries the max deviation sits near 4.3 sd. Check 5.5 sd in
    // max norm and 3 sd for 99% of entries.
    const double sd = std::sqrt(1.25 / reps);
    const Matrix dev = (mean - expected).cwiseAbs();
    CHECK(dev.maxCoeff() <= 5.5 * sd);
    CHECK((dev.array() > 3.0 * sd).count() <= dev.size() / 100);
    // Class-level means (averaged over subjects too) are within 0.1.
    for (int k = 0; k < 3; ++k) {
      Vector class_mean = Vector::Zero(60);
      int count = 0;
      for (int i = 0; i < 600; ++i) {
        if (inst.params.memberships()[i] != k) continue;
        class_mean += mean.row(i).transpose();
        ++count;
      }
      class_mean /= count;
      CHECK((class_mean - inst.params.item_params().col(k)).cwiseAbs().maxCoeff() <= 0.1);
    }
  }
  SECTION("same seed, same matrix") {
    auto a = generate_instance(50, 10, 2, GenConfig{0.2, 5, 8});
    auto b = generate_instance(50, 10, 2, GenConfig{0.2, 5, 8});
    CHECK(a.responses == b.responses);
    CHECK(a.params.memberships() == b.params.memberships());
    auto c = generate_instance(50, 10, 2, GenConfig{0.2, 5, 9});
    CHECK_FALSE(a.responses == c.responses);
  }
}

TEST_CASE("ResponseMatrix rejects out-of-range entries") {
  IntMatrix d(1, 2);
  d << 0, 6;
  CHECK_THROWS_AS(ResponseMatrix(d, 5), InputError);
  d << -1, 0;
  CHECK_THROWS_AS(ResponseMatrix(d, 5), InputError);
}
