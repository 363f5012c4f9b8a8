#include "lcm/model.hpp"

#include <algorithm>
#include <string>

#include "lcm/errors.hpp"
#include "lcm/rng.hpp"

namespace lcm {

ResponseMatrix::ResponseMatrix(IntMatrix data, int max_category)
    : data_(std::move(data)), max_category_(max_category) {
  if (max_category_ < 1) {
    throw InputError("max_category must be >= 1, got " +
                     std::to_string(max_category_));
  }
  for (Eigen::Index j = 0; j < data_.cols(); ++j) {
    for (Eigen::Index i = 0; i < data_.rows(); ++i) {
      const int v = data_(i, j);
      if (v < 0 || v > max_category_) {
        throw InputError("response (" + std::to_string(i + 1) + ", " +
                         std::to_string(j + 1) + ") = " + std::to_string(v) +
                         " outside {0,...," + std::to_string(max_category_) +
                         "}");
      }
    }
  }
}

LcmParams::LcmParams(Labels memberships, Matrix item_params, int max_category)
    : memberships_(std::move(memberships)),
      item_params_(std::move(item_params)),
      max_category_(max_category) {
  if (max_category_ < 1) throw ParameterError("max_category must be >= 1");
  if (memberships_.empty() || item_params_.rows() == 0 ||
      item_params_.cols() == 0) {
    throw ParameterError("LcmParams requires N, J, K >= 1");
  }
  const int k = n_classes();
  std::vector<int> sizes(k, 0);
  for (int label : memberships_) {
    if (label < 0 || label >= k) {
      throw ParameterError("class label " + std::to_string(label) +
                           " outside [0, " + std::to_string(k) + ")");
    }
    ++sizes[label];
  }
  for (int c = 0; c < k; ++c) {
    if (sizes[c] == 0) {
      throw ParameterError("class " + std::to_string(c) + " is empty");
    }
  }
  if (!item_params_.allFinite() || item_params_.minCoeff() < 0.0 ||
      item_params_.maxCoeff() > max_category_) {
    throw ParameterError("item parameters must lie in [0, M]");
  }
}

Matrix LcmParams::classification_matrix() const {
  Matrix z = Matrix::Zero(n_subjects(), n_classes());
  for (int i = 0; i < n_subjects(); ++i) z(i, memberships_[i]) = 1.0;
  return z;
}

std::vector<int> LcmParams::class_sizes() const {
  std::vector<int> sizes(n_classes(), 0);
  for (int label : memberships_) ++sizes[label];
  return sizes;
}

MembershipDraw generate_memberships(int n_subjects, int n_classes,
                                    std::uint64_t seed) {
  if (n_classes < 1) throw ParameterError("n_classes must be >= 1");
  if (n_subjects < n_classes) throw ParameterError("n_subjects < n_classes");

  Rng rng(seed);
  MembershipDraw draw;
  draw.labels.resize(n_subjects);
  std::vector<int> sizes(n_classes);
  for (int attempt = 0; attempt < kMaxMembershipAttempts; ++attempt) {
    std::fill(sizes.begin(), sizes.end(), 0);
    for (int& label : draw.labels) {
      label = static_cast<int>(rng.below(static_cast<std::size_t>(n_classes)));
      ++sizes[label];
    }
    if (std::find(sizes.begin(), sizes.end(), 0) == sizes.end()) {
      draw.resamples = attempt;
      return draw;
    }
  }
  throw NumericError("degenerate assignment: a class stayed empty after " +
                     std::to_string(kMaxMembershipAttempts) + " draws");
}

Matrix generate_theta(int n_items, int n_classes, const GenConfig& cfg) {
  if (!(cfg.delta > 0.0 && cfg.delta <= 0.5)) {
    throw ParameterError("delta must lie in (0, 0.5], got " +
                         std::to_string(cfg.delta));
  }
  if (n_items < 1 || n_classes < 1) {
    throw ParameterError("n_items and n_classes must be >= 1");
  }
  const double m = cfg.max_category;
  const double lo = cfg.delta * m;
  const double hi = (1.0 - cfg.delta) * m;
  Rng rng(cfg.seed);
  Matrix theta(n_items, n_classes);
  // Column-major fill: item index varies fastest within a class.
  for (int k = 0; k < n_classes; ++k) {
    for (int j = 0; j < n_items; ++j) theta(j, k) = rng.uniform(lo, hi);
  }
  return theta;
}

Matrix expected_response(const LcmParams& params) {
  const auto& labels = params.memberships();
  const Matrix& theta = params.item_params();
  Matrix expected(params.n_subjects(), params.n_items());
  for (int i = 0; i < params.n_subjects(); ++i) {
    expected.row(i) = theta.col(labels[i]).transpose();
  }
  return expected;
}

Matrix response_variance(const Matrix& expected, int max_category) {
  const double m = max_category;
  return expected.array() * (1.0 - expected.array() / m);
}

ResponseMatrix sample_responses(const LcmParams& params, std::uint64_t seed) {
  const Matrix expected = expected_response(params);
  const int m = params.max_category();
  Rng rng(seed);
  IntMatrix data(expected.rows(), expected.cols());
  // Row-major traversal so subject i's draws are contiguous in the stream.
  for (Eigen::Index i = 0; i < expected.rows(); ++i) {
    for (Eigen::Index j = 0; j < expected.cols(); ++j) {
      const double p = expected(i, j) / m;
      int successes = 0;
      for (int t = 0; t < m; ++t) successes += rng.bernoulli(p) ? 1 : 0;
      data(i, j) = successes;
    }
  }
  return ResponseMatrix(std::move(data), m);
}

SyntheticInstance generate_instance(int n_subjects, int n_items, int n_classes,
                                    const GenConfig& cfg) {
  MembershipDraw draw = generate_memberships(
      n_subjects, n_classes, derive_seed(cfg.seed, {1}));
  GenConfig theta_cfg = cfg;
  theta_cfg.seed = derive_seed(cfg.seed, {2});
  Matrix theta = generate_theta(n_items, n_classes, theta_cfg);
  LcmParams params(std::move(draw.labels), std::move(theta), cfg.max_category);
  ResponseMatrix responses =
      sample_responses(params, derive_seed(cfg.seed, {3}));
  return SyntheticInstance{std::move(params), std::move(responses),
                           draw.resamples};
}

}  // namespace lcm
