#include "lcm/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lcm/errors.hpp"
#include "lcm/rng.hpp"

namespace lcm {

std::string to_string(Method m) {
  switch (m) {
    case Method::kGof: return "gof";
    case Method::kRgof: return "rgof";
    case Method::kSpec: return "spec";
  }
  return "unknown";
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::kThresholdMet: return "threshold_met";
    case StopReason::kRatioMet: return "ratio_met";
    case StopReason::kExhaustedKmax: return "exhausted_kmax";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "gof") return Method::kGof;
  if (name == "rgof") return Method::kRgof;
  if (name == "spec") return Method::kSpec;
  throw InputError("unknown method '" + name + "' (expected gof|rgof|spec)");
}

int default_k_max(int n_subjects, int n_items) {
  const double raw = std::floor(
      std::sqrt(n_subjects / std::log(static_cast<double>(n_subjects + n_items))));
  const int cap = std::min(n_subjects, n_items) - 1;
  return std::max(1, std::min(static_cast<int>(raw), cap));
}

double tau_threshold(int n_subjects, double tau_exponent) {
  return std::pow(static_cast<double>(n_subjects), -tau_exponent);
}

double gamma_threshold(int n_subjects, double gamma_multiplier) {
  return gamma_multiplier * std::log(static_cast<double>(n_subjects));
}

double centering_term(int n_subjects, int n_items) {
  return 1.0 + std::sqrt(static_cast<double>(n_items) / n_subjects);
}

double spec_threshold(int n_subjects, int n_items) {
  return 2.01 * (std::sqrt(static_cast<double>(n_items)) +
                 std::sqrt(static_cast<double>(n_subjects)));
}

Matrix ideal_residual(const ResponseMatrix& r, const LcmParams& params) {
  if (params.n_subjects() != r.n_subjects() || params.n_items() != r.n_items()) {
    throw ParameterError("ideal_residual: dimension mismatch");
  }
  const Matrix expected = expected_response(params);
  const Matrix variance = response_variance(expected, params.max_category());
  if ((variance.array() <= 0.0).any()) {
    throw DomainError("ideal residual undefined at boundary (zero variance)");
  }
  const double n = r.n_subjects();
  return (r.as_real() - expected).array() / (n * variance.array()).sqrt();
}

Matrix practical_residual(const ResponseMatrix& r, const FittedModel& fit) {
  if (fit.r_hat.rows() != r.n_subjects() || fit.r_hat.cols() != r.n_items()) {
    throw ParameterError("practical_residual: fit dimensions do not match R");
  }
  const double n = r.n_subjects();
  Matrix out(r.n_subjects(), r.n_items());
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const double v = fit.v_hat(i, j);
      out(i, j) = v > 0.0 ? (r(i, j) - fit.r_hat(i, j)) / std::sqrt(n * v) : 0.0;
    }
  }
  return out;
}

CandidateRecord evaluate_fit(const ResponseMatrix& r, const FittedModel& fit) {
  CandidateRecord rec;
  rec.k0 = fit.k_candidate;
  rec.sigma1 = spectral_norm(practical_residual(r, fit));
  rec.t_stat = rec.sigma1 - centering_term(r.n_subjects(), r.n_items());
  const double bound =
      std::sqrt(static_cast<double>(r.max_category()) * r.n_items());
  if (!(rec.t_stat <= bound + 1e-9)) {
    throw NumericError("T_" + std::to_string(rec.k0) + " = " +
                       std::to_string(rec.t_stat) +
                       " violates the bound sqrt(M J) = " + std::to_string(bound));
  }
  return rec;
}

double t_statistic(const ResponseMatrix& r, const FittedModel& fit) {
  return evaluate_fit(r, fit).t_stat;
}

double ratio_statistic(double t_prev, double t_curr) {
  if (t_curr == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(t_prev / t_curr);
}

CandidateEvaluator::CandidateEvaluator(const ResponseMatrix& r,
                                       std::uint64_t seed, int k_max,
                                       KmeansOptions kmeans)
    : r_(r), seed_(seed), k_max_(k_max), kmeans_(kmeans) {
  const int cap = std::min(r.n_subjects(), r.n_items());
  if (k_max < 1 || k_max > cap) {
    throw ParameterError("k_max=" + std::to_string(k_max) + " outside [1, " +
                         std::to_string(cap) + "]");
  }
}

const CandidateRecord& CandidateEvaluator::record(int k0) {
  if (k0 < 1 || k0 > k_max_) throw ParameterError("candidate outside [1, k_max]");
  if (auto it = cache_.find(k0); it != cache_.end()) return it->second;
  const std::uint64_t fit_seed =
      derive_seed(seed_, {static_cast<std::uint64_t>(k0)});
  FittedModel fit;
  if (k0 == 1) {
    fit = fit_sc_lcm(r_, 1, fit_seed, kmeans_);
  } else {
    if (!basis_) basis_ = top_k_svd(r_.as_real(), k_max_);
    fit = fit_sc_lcm(r_, *basis_, k0, fit_seed, kmeans_);
  }
  CandidateRecord rec = evaluate_fit(r_, fit);
  if (k0 >= 2) rec.ratio = ratio_statistic(record(k0 - 1).t_stat, rec.t_stat);
  return cache_.emplace(k0, rec).first->second;
}

int resolve_k_max(const ResponseMatrix& r, const SelectConfig& cfg) {
  if (r.n_subjects() < 2 || r.n_items() < 2) {
    throw ParameterError("selection requires N >= 2 and J >= 2");
  }
  if (cfg.tau_exponent <= 0.0 || cfg.gamma_multiplier <= 0.0) {
    throw ParameterError("tau_exponent and gamma_multiplier must be > 0");
  }
  if (cfg.k_max) {
    const int cap = std::min(r.n_subjects(), r.n_items());
    if (*cfg.k_max < 1 || *cfg.k_max > cap) {
      throw ParameterError("k_max must lie in [1, min(N, J)]");
    }
    return *cfg.k_max;
  }
  return default_k_max(r.n_subjects(), r.n_items());
}

namespace {

GofTrace make_trace(const CandidateEvaluator& eval, const SelectConfig& cfg) {
  GofTrace trace;
  const int n = eval.responses().n_subjects();
  trace.k_max = eval.k_max();
  trace.tau = tau_threshold(n, cfg.tau_exponent);
  trace.gamma = gamma_threshold(n, cfg.gamma_multiplier);
  return trace;
}

}  // namespace

GofTrace select_gof(CandidateEvaluator& eval, const SelectConfig& cfg) {
  GofTrace trace = make_trace(eval, cfg);
  trace.k_hat = trace.k_max;
  trace.stop_reason = StopReason::kExhaustedKmax;
  for (int k0 = 1; k0 <= trace.k_max; ++k0) {
    const CandidateRecord& rec = eval.record(k0);
    trace.candidates.push_back(rec);
    if (rec.t_stat < trace.tau) {
      trace.k_hat = k0;
      trace.stop_reason = StopReason::kThresholdMet;
      break;
    }
  }
  return trace;
}

GofTrace select_rgof(CandidateEvaluator& eval, const SelectConfig& cfg) {
  GofTrace trace = make_trace(eval, cfg);
  trace.k_hat = trace.k_max;
  trace.stop_reason = StopReason::kExhaustedKmax;
  const CandidateRecord& first = eval.record(1);
  trace.candidates.push_back(first);
  if (first.t_stat < trace.tau) {
    trace.k_hat = 1;
    trace.stop_reason = StopReason::kThresholdMet;
    return trace;
  }
  for (int k0 = 2; k0 <= trace.k_max; ++k0) {
    const CandidateRecord& rec = eval.record(k0);
    trace.candidates.push_back(rec);
    if (*rec.ratio > trace.gamma) {
      trace.k_hat = k0;
      trace.stop_reason = StopReason::kRatioMet;
      break;
    }
  }
  return trace;
}

GofTrace select_gof(const ResponseMatrix& r, const SelectConfig& cfg) {
  CandidateEvaluator eval(r, cfg.seed, resolve_k_max(r, cfg), cfg.kmeans);
  return select_gof(eval, cfg);
}

GofTrace select_rgof(const ResponseMatrix& r, const SelectConfig& cfg) {
  CandidateEvaluator eval(r, cfg.seed, resolve_k_max(r, cfg), cfg.kmeans);
  return select_rgof(eval, cfg);
}

GofTrace trace_all(const ResponseMatrix& r, const SelectConfig& cfg) {
  CandidateEvaluator eval(r, cfg.seed, resolve_k_max(r, cfg), cfg.kmeans);
  GofTrace trace = select_rgof(eval, cfg);
  trace.candidates.clear();
  for (int k0 = 1; k0 <= eval.k_max(); ++k0) {
    trace.candidates.push_back(eval.record(k0));
  }
  return trace;
}

int select_spec(const ResponseMatrix& r) {
  return singular_values_above(r.as_real(),
                               spec_threshold(r.n_subjects(), r.n_items()));
}

}  // namespace lcm
