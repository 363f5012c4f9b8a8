#ifndef LCM_SC_LCM_HPP
#define LCM_SC_LCM_HPP

// Spectral clustering estimator for latent class models: k-means on the rows
// of the top-K0 left singular vectors of R, followed by class-wise means for
// the item parameters.

#include <cstdint>

#include "lcm/linalg.hpp"
#include "lcm/model.hpp"

namespace lcm {

struct FittedModel {
  int k_candidate = 0;
  int max_category = 1;
  Labels memberships_hat;  // 0-based, length N
  Matrix theta_hat;        // J x K0, class-wise column means
  Matrix r_hat;            // N x J, r_hat(i,j) = theta_hat(j, l(i))
  Matrix v_hat;            // N x J, r_hat * (1 - r_hat / M)
};

/// SC-LCM fit at a fixed candidate K0. K0 = 1 skips the SVD.
/// Throws ParameterError unless 1 <= K0 <= min(N, J).
FittedModel fit_sc_lcm(const ResponseMatrix& r, int k_candidate,
                       std::uint64_t seed, const KmeansOptions& opts = {});

/// Same as fit_sc_lcm but reuses a precomputed top-k SVD of R with
/// k >= k_candidate. Gives results identical to fit_sc_lcm.
FittedModel fit_sc_lcm(const ResponseMatrix& r, const SvdResult& basis,
                       int k_candidate, std::uint64_t seed,
                       const KmeansOptions& opts = {});

/// Builds theta_hat, r_hat, v_hat from a given partition. Every label must
/// lie in [0, k_candidate) and every class must be non-empty.
FittedModel fit_from_labels(const ResponseMatrix& r, const Labels& labels,
                            int k_candidate);

/// Permutation-minimized worst-class misassignment:
///   min_pi max_k (|C_k \ C^_pi(k)| + |C^_pi(k) \ C_k|) / N_k.
/// Exhaustive over permutations for K <= 8; bottleneck assignment (exact,
/// via threshold search and bipartite matching) above that.
double clustering_error(const Labels& labels_hat, const Labels& labels_true,
                        int n_classes);

inline constexpr int kExhaustivePermutationLimit = 8;

/// Bottleneck-assignment route of clustering_error, exposed for tests.
double clustering_error_bottleneck(const Labels& labels_hat,
                                   const Labels& labels_true, int n_classes);

}  // namespace lcm

#endif  // LCM_SC_LCM_HPP
