#ifndef LCM_MODEL_HPP
#define LCM_MODEL_HPP

// Latent class model for ordinal responses: domain types and the seeded
// synthetic-data generator.
//
// Class labels are 0-based in memory ({0, ..., K-1}); files written by the
// CLI use 1-based labels.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace lcm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
using Labels = std::vector<int>;

/// Observed N x J matrix with entries in {0, ..., M}.
class ResponseMatrix {
 public:
  ResponseMatrix() = default;
  /// Throws InputError if any entry lies outside {0, ..., max_category}.
  ResponseMatrix(IntMatrix data, int max_category);

  const IntMatrix& data() const { return data_; }
  int max_category() const { return max_category_; }
  int n_subjects() const { return static_cast<int>(data_.rows()); }
  int n_items() const { return static_cast<int>(data_.cols()); }
  int operator()(int i, int j) const { return data_(i, j); }

  Matrix as_real() const { return data_.cast<double>(); }

  friend bool operator==(const ResponseMatrix& a, const ResponseMatrix& b) {
    return a.max_category_ == b.max_category_ &&
           a.data_.rows() == b.data_.rows() &&
           a.data_.cols() == b.data_.cols() && a.data_ == b.data_;
  }

 private:
  IntMatrix data_;
  int max_category_ = 1;
};

/// Ground-truth model: memberships l(i) and the J x K item parameter matrix.
class LcmParams {
 public:
  /// Validates: labels in [0, K), every class non-empty, 0 <= theta <= M.
  LcmParams(Labels memberships, Matrix item_params, int max_category);

  int n_subjects() const { return static_cast<int>(memberships_.size()); }
  int n_items() const { return static_cast<int>(item_params_.rows()); }
  int n_classes() const { return static_cast<int>(item_params_.cols()); }
  int max_category() const { return max_category_; }
  const Labels& memberships() const { return memberships_; }
  const Matrix& item_params() const { return item_params_; }

  /// Dense one-hot N x K classification matrix Z.
  Matrix classification_matrix() const;
  /// N_k for each class.
  std::vector<int> class_sizes() const;

 private:
  Labels memberships_;
  Matrix item_params_;
  int max_category_;
};

struct GenConfig {
  double delta = 0.2;
  int max_category = 5;
  std::uint64_t seed = 42;
};

struct MembershipDraw {
  Labels labels;
  int resamples = 0;  // whole-vector redraws caused by an empty class
};

inline constexpr int kMaxMembershipAttempts = 1000;

/// i.i.d. uniform labels on {0, ..., K-1}, redrawn as a whole while any class
/// is empty. Throws ParameterError if N < K, NumericError after
/// kMaxMembershipAttempts failed draws ("degenerate assignment").
MembershipDraw generate_memberships(int n_subjects, int n_classes,
                                    std::uint64_t seed);

/// J x K matrix with i.i.d. Uniform[delta*M, (1-delta)*M] entries.
Matrix generate_theta(int n_items, int n_classes, const GenConfig& cfg);

/// Expected response matrix Z * Theta^T, i.e. E(i,j) = Theta(j, l(i)).
Matrix expected_response(const LcmParams& params);

/// Entrywise variance E(1 - E/M) of the binomial responses.
Matrix response_variance(const Matrix& expected, int max_category);

/// R(i,j) ~ Binomial(M, E(i,j)/M), drawn as a sum of M Bernoulli trials.
ResponseMatrix sample_responses(const LcmParams& params, std::uint64_t seed);

struct SyntheticInstance {
  LcmParams params;
  ResponseMatrix responses;
  int membership_resamples = 0;
};

/// Full simulation pipeline: memberships, Theta, responses. Each step uses
/// its own stream derived from cfg.seed.
SyntheticInstance generate_instance(int n_subjects, int n_items, int n_classes,
                                    const GenConfig& cfg);

}  // namespace lcm

#endif  // LCM_MODEL_HPP
