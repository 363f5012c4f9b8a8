#include "lcm/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "lcm/errors.hpp"
#include "lcm/rng.hpp"

namespace lcm {
namespace {

constexpr double kSingularFloor = 1e-12;

void require_finite(const Matrix& a) {
  if (!a.allFinite()) throw InputError("matrix contains non-finite entries");
}

// The smaller of A^T A and A A^T.
Matrix small_gram(const Matrix& a) {
  if (a.cols() <= a.rows()) {
    Matrix g(a.cols(), a.cols());
    g.setZero();
    g.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
    return g.selfadjointView<Eigen::Lower>();
  }
  Matrix g(a.rows(), a.rows());
  g.setZero();
  g.selfadjointView<Eigen::Lower>().rankUpdate(a);
  return g.selfadjointView<Eigen::Lower>();
}

double top_eigenvalue_dense(const Matrix& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(g, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("symmetric eigendecomposition failed");
  }
  return std::max(0.0, solver.eigenvalues()(g.rows() - 1));
}

// Lanczos with full reorthogonalization for the largest eigenvalue of a PSD
// matrix. Stops when the Ritz residual beta_j |s_j| <= tol * theta. Returns a
// negative value when the iteration did not converge.
template <class Op>
double lanczos_top_eigenvalue(const Op& apply, Eigen::Index n, Vector start,
                              double tol, int max_iter) {
  const int steps = static_cast<int>(std::min<Eigen::Index>(n, max_iter));
  Matrix q(n, steps);
  std::vector<double> alpha, beta;
  q.col(0) = start.normalized();
  Vector w(n);
  for (int j = 0; j < steps; ++j) {
    w = apply(q.col(j));
    alpha.push_back(q.col(j).dot(w));
    for (int pass = 0; pass < 2; ++pass) {
      w.noalias() -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
    }
    const double b = w.norm();

    Matrix t = Matrix::Zero(j + 1, j + 1);
    for (int i = 0; i <= j; ++i) {
      t(i, i) = alpha[i];
      if (i > 0) t(i, i - 1) = t(i - 1, i) = beta[i - 1];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> ritz(t);
    const double theta = ritz.eigenvalues()(j);
    const double residual = b * std::abs(ritz.eigenvectors()(j, j));
    if (theta <= 0.0) return 0.0;
    // b == 0: the Krylov space is invariant and theta is exact within it.
    if (residual <= tol * theta || b <= 1e-300) return theta;
    if (j + 1 < steps) {
      beta.push_back(b);
      q.col(j + 1) = w / b;
    }
  }
  return -1.0;
}

}  // namespace

double spectral_norm(const Matrix& a, double tol, int max_iter) {
  require_finite(a);
  if (!(tol > 0.0)) throw ParameterError("spectral_norm: tol must be > 0");
  if (max_iter < 1) throw ParameterError("spectral_norm: max_iter must be >= 1");
  if (a.size() == 0) return 0.0;
  // Gram operator on the smaller side, applied without forming the product.
  const bool tall = a.cols() <= a.rows();
  const Eigen::Index n = tall ? a.cols() : a.rows();
  const Vector diag = tall ? Vector(a.colwise().squaredNorm().transpose())
                           : Vector(a.rowwise().squaredNorm());
  const double max_diag = diag.maxCoeff();
  if (max_diag == 0.0) return 0.0;
  Vector tmp(tall ? a.rows() : a.cols());
  auto apply = [&](const auto& v) -> Vector {
    if (tall) {
      tmp.noalias() = a * v;
      return a.transpose() * tmp;
    }
    tmp.noalias() = a.transpose() * v;
    return a * tmp;
  };

  // The top eigenvalue of a PSD matrix is at least its largest diagonal
  // entry; falling short means the start vector missed the top eigenspace.
  auto plausible = [&](double lambda) {
    return lambda >= 0.0 && lambda >= max_diag * (1.0 - 1e-12);
  };
  double lambda = lanczos_top_eigenvalue(apply, n, Vector::Ones(n), tol, max_iter);
  if (!plausible(lambda)) {
    Rng rng(derive_seed(0x5eed, {static_cast<std::uint64_t>(n)}));
    Vector start(n);
    for (Eigen::Index i = 0; i < n; ++i) start(i) = 1.0 + rng.uniform(-0.5, 0.5);
    lambda = lanczos_top_eigenvalue(apply, n, start, tol, max_iter);
  }
  if (!plausible(lambda)) lambda = top_eigenvalue_dense(small_gram(a));
  if (!std::isfinite(lambda)) throw NumericError("spectral_norm did not converge");
  return std::sqrt(std::max(lambda, 0.0));
}

Vector singular_values(const Matrix& a) {
  require_finite(a);
  if (a.size() == 0) return Vector();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(small_gram(a),
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("symmetric eigendecomposition failed");
  }
  const Vector& ev = solver.eigenvalues();  // ascending
  Vector out(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    out(i) = std::sqrt(std::max(0.0, ev(ev.size() - 1 - i)));
  }
  return out;
}

int singular_values_above(const Matrix& a, double threshold) {
  if (!(threshold >= 0.0)) {
    throw ParameterError("singular_values_above: threshold must be >= 0");
  }
  const Vector s = singular_values(a);
  return static_cast<int>((s.array() > threshold).count());
}

namespace {

// Completes the columns of `basis` flagged in `missing` with unit vectors
// orthogonal to every other column.
void complete_orthonormal(Matrix& basis, const std::vector<bool>& missing) {
  const Eigen::Index n = basis.rows();
  Eigen::Index candidate = 0;
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    if (!missing[c]) continue;
    for (;; ++candidate) {
      if (candidate >= n) throw NumericError("orthonormal completion failed");
      Vector v = Vector::Unit(n, candidate);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index o = 0; o < basis.cols(); ++o) {
          if (o == c || (missing[o] && o > c)) continue;
          v -= basis.col(o).dot(v) * basis.col(o);
        }
      }
      const double norm = v.norm();
      if (norm > 0.5) {
        basis.col(c) = v / norm;
        ++candidate;
        break;
      }
    }
  }
}

}  // namespace

SvdResult top_k_svd(const Matrix& a, int k) {
  require_finite(a);
  const Eigen::Index rank_cap = std::min(a.rows(), a.cols());
  if (k < 1 || k > rank_cap) {
    throw ParameterError("top_k_svd: k=" + std::to_string(k) +
                         " outside [1, " + std::to_string(rank_cap) + "]");
  }
  const bool tall = a.cols() <= a.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(small_gram(a));
  if (solver.info() != Eigen::Success) {
    throw NumericError("symmetric eigendecomposition failed");
  }
  const Eigen::Index n = solver.eigenvalues().size();

  SvdResult out;
  out.singular_values.resize(k);
  Matrix small_vectors(n, k);
  for (int i = 0; i < k; ++i) {
    out.singular_values(i) =
        std::sqrt(std::max(0.0, solver.eigenvalues()(n - 1 - i)));
    small_vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  // Sign convention: largest-magnitude entry of each small-side vector is
  // positive.
  for (int i = 0; i < k; ++i) {
    Eigen::Index idx;
    small_vectors.col(i).cwiseAbs().maxCoeff(&idx);
    if (small_vectors(idx, i) < 0) small_vectors.col(i) *= -1.0;
  }

  const double sigma1 = out.singular_values(0);
  Matrix other = tall ? Matrix(a * small_vectors)
                      : Matrix(a.transpose() * small_vectors);
  std::vector<bool> missing(k, false);
  for (int i = 0; i < k; ++i) {
    const double s = out.singular_values(i);
    if (sigma1 == 0.0 || s <= kSingularFloor * sigma1) {
      missing[i] = true;
      other.col(i).setZero();
    } else {
      other.col(i) /= s;
    }
  }
  if (std::find(missing.begin(), missing.end(), true) != missing.end()) {
    complete_orthonormal(other, missing);
  }
  if (tall) {
    out.right_vectors = std::move(small_vectors);
    out.left_vectors = std::move(other);
  } else {
    out.left_vectors = std::move(small_vectors);
    out.right_vectors = std::move(other);
  }
  return out;
}

double kmeans_inertia(const Matrix& points, const Labels& labels,
                      const Matrix& centroids) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += (points.row(i) - centroids.row(labels[i])).squaredNorm();
  }
  return total;
}

namespace {

struct LloydRun {
  Labels labels;
  Matrix centroids;
  double inertia;
  int n_iter;
};

Matrix kmeanspp_init(const Matrix& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Matrix centroids(k, points.cols());
  centroids.row(0) = points.row(static_cast<Eigen::Index>(rng.below(n)));
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d2(i) = (points.row(i) - centroids.row(0)).squaredNorm();
  }
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cum = 0.0;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        cum += d2(i);
        if (cum > target) {
          chosen = i;
          break;
        }
      }
      while (d2(chosen) == 0.0 && chosen > 0) --chosen;
    } else {
      chosen = static_cast<Eigen::Index>(rng.below(n));
    }
    centroids.row(c) = points.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2(i) = std::min(d2(i), (points.row(i) - centroids.row(c)).squaredNorm());
    }
  }
  return centroids;
}

void assign(const Matrix& points, const Matrix& centroids, Labels& labels) {
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        best_c = static_cast<int>(c);
      }
    }
    labels[i] = best_c;
  }
}

// Moves the point farthest from its centroid (among clusters with more than
// one member) into each empty cluster.
void reseed_empty(const Matrix& points, Labels& labels, Matrix& centroids) {
  const int k = static_cast<int>(centroids.rows());
  std::vector<int> sizes(k, 0);
  for (int l : labels) ++sizes[l];
  for (int c = 0; c < k; ++c) {
    if (sizes[c] > 0) continue;
    double worst = -1.0;
    Eigen::Index worst_i = -1;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      if (sizes[labels[i]] < 2) continue;
      const double d = (points.row(i) - centroids.row(labels[i])).squaredNorm();
      if (d > worst) {
        worst = d;
        worst_i = i;
      }
    }
    assert(worst_i >= 0);
    --sizes[labels[worst_i]];
    labels[worst_i] = c;
    sizes[c] = 1;
    centroids.row(c) = points.row(worst_i);
  }
}

void update_centroids(const Matrix& points, const Labels& labels,
                      Matrix& centroids) {
  std::vector<int> sizes(centroids.rows(), 0);
  centroids.setZero();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    centroids.row(labels[i]) += points.row(i);
    ++sizes[labels[i]];
  }
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    if (sizes[c] > 0) centroids.row(c) /= sizes[c];
  }
}

LloydRun lloyd(const Matrix& points, int k, Rng& rng, int max_iter) {
  LloydRun run;
  run.centroids = kmeanspp_init(points, k, rng);
  run.labels.assign(points.rows(), 0);
  assign(points, run.centroids, run.labels);
  run.n_iter = 0;
#ifndef NDEBUG
  double previous = std::numeric_limits<double>::infinity();
#endif
  Labels next(run.labels.size());
  for (int it = 1; it <= max_iter; ++it) {
    reseed_empty(points, run.labels, run.centroids);
    update_centroids(points, run.labels, run.centroids);
#ifndef NDEBUG
    const double current = kmeans_inertia(points, run.labels, run.centroids);
    assert(current <= previous * (1.0 + 1e-12) + 1e-300);
    previous = current;
#endif
    assign(points, run.centroids, next);
    run.n_iter = it;
    if (next == run.labels) break;
    run.labels.swap(next);
  }
  reseed_empty(points, run.labels, run.centroids);
  update_centroids(points, run.labels, run.centroids);
  run.inertia = kmeans_inertia(points, run.labels, run.centroids);
  return run;
}

}  // namespace

KmeansResult kmeans(const Matrix& points, int k, std::uint64_t seed,
                    const KmeansOptions& opts) {
  require_finite(points);
  if (k < 1) throw ParameterError("kmeans: k must be >= 1");
  if (points.rows() < k) throw ParameterError("kmeans: fewer points than clusters");
  if (opts.n_restarts < 1 || opts.max_iter < 1) {
    throw ParameterError("kmeans: n_restarts and max_iter must be >= 1");
  }

  LloydRun best;
  bool have_best = false;
  for (int r = 0; r < opts.n_restarts; ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    LloydRun run = lloyd(points, k, rng, opts.max_iter);
    if (!have_best || run.inertia < best.inertia) {
      best = std::move(run);
      have_best = true;
    }
  }
  return KmeansResult{std::move(best.labels), std::move(best.centroids),
                      best.inertia, best.n_iter};
}

}  // namespace lcm
