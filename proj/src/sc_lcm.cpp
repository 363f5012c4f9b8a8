#include "lcm/sc_lcm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lcm/errors.hpp"

namespace lcm {
namespace {

void check_candidate(const ResponseMatrix& r, int k_candidate) {
  const int cap = std::min(r.n_subjects(), r.n_items());
  if (k_candidate < 1 || k_candidate > cap) {
    throw ParameterError("k_candidate=" + std::to_string(k_candidate) +
                         " outside [1, min(N, J)=" + std::to_string(cap) + "]");
  }
}

}  // namespace

FittedModel fit_from_labels(const ResponseMatrix& r, const Labels& labels,
                            int k_candidate) {
  const int n = r.n_subjects();
  const int j_items = r.n_items();
  if (static_cast<int>(labels.size()) != n) {
    throw ParameterError("label vector length does not match N");
  }
  std::vector<int> sizes(k_candidate, 0);
  for (int l : labels) {
    if (l < 0 || l >= k_candidate) throw ParameterError("label out of range");
    ++sizes[l];
  }
  if (std::find(sizes.begin(), sizes.end(), 0) != sizes.end()) {
    throw ParameterError("fit_from_labels: empty class");
  }

  FittedModel fit;
  fit.k_candidate = k_candidate;
  fit.max_category = r.max_category();
  fit.memberships_hat = labels;

  // theta_hat = R^T Z (Z^T Z)^{-1}: integer column sums per class, then one
  // division, so each entry is the exact class mean.
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> sums =
      Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(
          j_items, k_candidate);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < j_items; ++j) sums(j, labels[i]) += r(i, j);
  }
  fit.theta_hat.resize(j_items, k_candidate);
  for (int k = 0; k < k_candidate; ++k) {
    for (int j = 0; j < j_items; ++j) {
      fit.theta_hat(j, k) = static_cast<double>(sums(j, k)) / sizes[k];
    }
  }

  const double m = r.max_category();
  fit.r_hat.resize(n, j_items);
  fit.v_hat.resize(n, j_items);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < j_items; ++j) {
      const double e = fit.theta_hat(j, labels[i]);
      fit.r_hat(i, j) = e;
      fit.v_hat(i, j) = e * (1.0 - e / m);
    }
  }
  return fit;
}

FittedModel fit_sc_lcm(const ResponseMatrix& r, const SvdResult& basis,
                       int k_candidate, std::uint64_t seed,
                       const KmeansOptions& opts) {
  check_candidate(r, k_candidate);
  if (k_candidate == 1) {
    return fit_from_labels(r, Labels(r.n_subjects(), 0), 1);
  }
  if (basis.left_vectors.cols() < k_candidate ||
      basis.left_vectors.rows() != r.n_subjects()) {
    throw ParameterError("spectral basis too small for k_candidate");
  }
  const Matrix embedding = basis.left_vectors.leftCols(k_candidate);
  KmeansResult km = kmeans(embedding, k_candidate, seed, opts);
  return fit_from_labels(r, km.labels, k_candidate);
}

FittedModel fit_sc_lcm(const ResponseMatrix& r, int k_candidate,
                       std::uint64_t seed, const KmeansOptions& opts) {
  check_candidate(r, k_candidate);
  if (k_candidate == 1) {
    return fit_from_labels(r, Labels(r.n_subjects(), 0), 1);
  }
  return fit_sc_lcm(r, top_k_svd(r.as_real(), k_candidate), k_candidate, seed,
                    opts);
}

namespace {

struct ErrorCosts {
  std::vector<double> cost;  // cost[k * K + l]: true class k matched to l
  int k = 0;
  double at(int true_k, int hat_l) const { return cost[true_k * k + hat_l]; }
};

ErrorCosts error_costs(const Labels& labels_hat, const Labels& labels_true,
                       int n_classes) {
  if (labels_hat.size() != labels_true.size()) {
    throw ParameterError("clustering_error: label vectors differ in length");
  }
  if (n_classes < 1) throw ParameterError("clustering_error: K must be >= 1");
  const int k = n_classes;
  std::vector<long> overlap(static_cast<std::size_t>(k) * k, 0);
  std::vector<long> true_size(k, 0), hat_size(k, 0);
  for (std::size_t i = 0; i < labels_true.size(); ++i) {
    const int t = labels_true[i];
    const int h = labels_hat[i];
    if (t < 0 || t >= k || h < 0 || h >= k) {
      throw ParameterError("clustering_error: label outside [0, K)");
    }
    ++overlap[t * k + h];
    ++true_size[t];
    ++hat_size[h];
  }
  ErrorCosts costs;
  costs.k = k;
  costs.cost.resize(static_cast<std::size_t>(k) * k);
  for (int t = 0; t < k; ++t) {
    if (true_size[t] == 0) {
      throw ParameterError("clustering_error: true class " +
                           std::to_string(t) + " is empty");
    }
    for (int h = 0; h < k; ++h) {
      const long both = overlap[t * k + h];
      costs.cost[t * k + h] =
          static_cast<double>((true_size[t] - both) + (hat_size[h] - both)) /
          static_cast<double>(true_size[t]);
    }
  }
  return costs;
}

double exhaustive(const ErrorCosts& c) {
  std::vector<int> perm(c.k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (int t = 0; t < c.k; ++t) worst = std::max(worst, c.at(t, perm[t]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Kuhn's augmenting-path matching restricted to edges with cost <= limit.
bool perfect_matching(const ErrorCosts& c, double limit) {
  std::vector<int> match_hat(c.k, -1);
  std::vector<char> seen;
  auto augment = [&](auto&& self, int t) -> bool {
    for (int h = 0; h < c.k; ++h) {
      if (c.at(t, h) > limit || seen[h]) continue;
      seen[h] = 1;
      if (match_hat[h] < 0 || self(self, match_hat[h])) {
        match_hat[h] = t;
        return true;
      }
    }
    return false;
  };
  for (int t = 0; t < c.k; ++t) {
    seen.assign(c.k, 0);
    if (!augment(augment, t)) return false;
  }
  return true;
}

double bottleneck(const ErrorCosts& c) {
  std::vector<double> levels = c.cost;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::size_t lo = 0, hi = levels.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (perfect_matching(c, levels[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return levels[lo];
}

}  // namespace

double clustering_error(const Labels& labels_hat, const Labels& labels_true,
                        int n_classes) {
  const ErrorCosts costs = error_costs(labels_hat, labels_true, n_classes);
  if (n_classes <= kExhaustivePermutationLimit) return exhaustive(costs);
  return bottleneck(costs);
}

double clustering_error_bottleneck(const Labels& labels_hat,
                                   const Labels& labels_true, int n_classes) {
  return bottleneck(error_costs(labels_hat, labels_true, n_classes));
}

}  // namespace lcm
