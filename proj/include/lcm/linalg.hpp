#ifndef LCM_LINALG_HPP
#define LCM_LINALG_HPP

// Dense spectral primitives and k-means. All routines work through the
// smaller of the two Gram matrices (A^T A or A A^T), which is cheap for the
// tall response matrices handled here.

#include <cstdint>
#include <vector>

#include "lcm/model.hpp"

namespace lcm {

struct SvdResult {
  Matrix left_vectors;   // N x k, orthonormal columns
  Vector singular_values;  // length k, non-increasing, >= 0
  Matrix right_vectors;  // J x k, orthonormal columns
};

/// Largest singular value. Lanczos iteration on the smaller Gram matrix from a
/// normalized all-ones start (a seeded perturbed start if the result is not
/// plausible); falls back to a full symmetric eigendecomposition if the Ritz
/// residual has not met `tol` (relative) after `max_iter` steps. Throws
/// InputError on non-finite entries.
double spectral_norm(const Matrix& a, double tol = 1e-12, int max_iter = 120);

/// Top-k singular triples. Singular values below 1e-12 * sigma_1 are treated
/// as zero; their left vectors are completed by Gram-Schmidt, so for a zero
/// matrix the vectors are an arbitrary orthonormal set.
SvdResult top_k_svd(const Matrix& a, int k);

/// Full singular spectrum (min(N, J) values, non-increasing).
Vector singular_values(const Matrix& a);

/// Number of singular values strictly greater than `threshold`.
int singular_values_above(const Matrix& a, double threshold);

struct KmeansOptions {
  int n_restarts = 10;
  int max_iter = 100;
};

struct KmeansResult {
  Labels labels;      // 0-based, every cluster non-empty
  Matrix centroids;   // k x d
  double inertia = 0.0;
  int n_iter = 0;     // Lloyd iterations of the winning restart
};

/// Best-inertia Lloyd's algorithm over several k-means++ restarts. Ties on
/// inertia go to the lowest restart index. A cluster that empties during
/// Lloyd is reseeded with the point farthest from its centroid.
KmeansResult kmeans(const Matrix& points, int k, std::uint64_t seed,
                    const KmeansOptions& opts = {});

/// Sum of squared distances from each point to its labelled centroid.
double kmeans_inertia(const Matrix& points, const Labels& labels,
                      const Matrix& centroids);

}  // namespace lcm

#endif  // LCM_LINALG_HPP
