#ifndef LCM_GOF_HPP
#define LCM_GOF_HPP

// Goodness-of-fit statistics for the number of latent classes and the
// sequential selection rules built on them.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcm/linalg.hpp"
#include "lcm/model.hpp"
#include "lcm/sc_lcm.hpp"

namespace lcm {

enum class Method { kGof, kRgof, kSpec };
enum class StopReason { kThresholdMet, kRatioMet, kExhaustedKmax };

std::string to_string(Method m);
std::string to_string(StopReason r);
/// Parses "gof" | "rgof" | "spec"; throws InputError otherwise.
Method parse_method(const std::string& name);

struct CandidateRecord {
  int k0 = 0;
  double sigma1 = 0.0;
  double t_stat = 0.0;
  std::optional<double> ratio;  // absent for k0 = 1; +inf when t_stat == 0
};

struct GofTrace {
  std::vector<CandidateRecord> candidates;
  int k_hat = 0;
  StopReason stop_reason = StopReason::kExhaustedKmax;
  int k_max = 0;
  double tau = 0.0;
  double gamma = 0.0;
};

struct SelectConfig {
  std::optional<int> k_max;  // default: floor(sqrt(N / log(N + J)))
  double tau_exponent = 0.2;  // tau_N = N^(-tau_exponent)
  double gamma_multiplier = 1.0;  // gamma_N = multiplier * log(N)
  std::uint64_t seed = 42;
  Method method = Method::kGof;
  KmeansOptions kmeans;
};

/// floor(sqrt(N / log(N + J))), clamped to [1, min(N, J) - 1].
int default_k_max(int n_subjects, int n_items);
double tau_threshold(int n_subjects, double tau_exponent);
double gamma_threshold(int n_subjects, double gamma_multiplier);
/// 1 + sqrt(J / N).
double centering_term(int n_subjects, int n_items);
/// 2.01 (sqrt(J) + sqrt(N)).
double spec_threshold(int n_subjects, int n_items);

/// (R - E) / sqrt(N V) with the true expectation. Throws DomainError when any
/// V(i,j) is zero.
Matrix ideal_residual(const ResponseMatrix& r, const LcmParams& params);

/// (R - R^) / sqrt(N V^) where V^ > 0, exactly 0 elsewhere.
Matrix practical_residual(const ResponseMatrix& r, const FittedModel& fit);

/// sigma_1 of the practical residual and T = sigma_1 - (1 + sqrt(J/N)).
/// Throws NumericError if T exceeds the deterministic bound sqrt(M J).
CandidateRecord evaluate_fit(const ResponseMatrix& r, const FittedModel& fit);

double t_statistic(const ResponseMatrix& r, const FittedModel& fit);

/// |t_prev / t_curr|, +inf when t_curr == 0.
double ratio_statistic(double t_prev, double t_curr);

/// Lazily evaluates T_{K0} for one dataset, caching fits per K0. The SVD of
/// R is computed once at k_max and shared by every candidate; candidate K0
/// clusters with seed derive_seed(cfg.seed, {K0}).
class CandidateEvaluator {
 public:
  CandidateEvaluator(const ResponseMatrix& r, std::uint64_t seed, int k_max,
                     KmeansOptions kmeans = {});

  const CandidateRecord& record(int k0);
  int k_max() const { return k_max_; }
  const ResponseMatrix& responses() const { return r_; }

 private:
  const ResponseMatrix& r_;
  std::uint64_t seed_;
  int k_max_;
  KmeansOptions kmeans_;
  std::optional<SvdResult> basis_;
  std::map<int, CandidateRecord> cache_;
};

/// Resolves the effective k_max for a dataset.
int resolve_k_max(const ResponseMatrix& r, const SelectConfig& cfg);

/// Stops at the first K0 with T < tau_N; K_max if none.
GofTrace select_gof(const ResponseMatrix& r, const SelectConfig& cfg);
GofTrace select_gof(CandidateEvaluator& eval, const SelectConfig& cfg);

/// Stops at K0 = 1 if T_1 < tau_N, else at the first K0 >= 2 with
/// r_{K0} > gamma_N; K_max if none.
GofTrace select_rgof(const ResponseMatrix& r, const SelectConfig& cfg);
GofTrace select_rgof(CandidateEvaluator& eval, const SelectConfig& cfg);

/// Every candidate 1..K_max regardless of stopping; stop fields reflect the
/// rgof rule.
GofTrace trace_all(const ResponseMatrix& r, const SelectConfig& cfg);

/// Count of singular values of R above 2.01 (sqrt(J) + sqrt(N)). May be 0.
int select_spec(const ResponseMatrix& r);

}  // namespace lcm

#endif  // LCM_GOF_HPP
