#include "lcm/errors.hpp"
#include "lcm/harness.hpp"

namespace lcm {

ExperimentConfig experiment_preset(const std::string& name, bool quick) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.reps = quick ? 50 : 200;
  cfg.methods = {Method::kGof, Method::kRgof};
  if (name == "exp1") {
    // Null vs underfit behaviour of T and r, K = 4.
    for (int n : {200, 400, 600, 800, 1000}) cfg.grid.push_back({n, 60, 4, 0.2, 5});
    cfg.profile_k0 = 4;
  } else if (name == "exp2") {
    // Stopping proportions.
    for (int k : {2, 3, 4, 5, 6}) cfg.grid.push_back({1000, 60, k, 0.2, 5});
  } else if (name == "exp3") {
    // Accuracy against the singular-value-count baseline.
    cfg.methods = {Method::kGof, Method::kRgof, Method::kSpec};
    for (int k : {1, 2, 3, 4}) {
      for (int n : {200, 600}) {
        for (int j : {60, 100}) {
          for (double d : {0.1, 0.2, 0.3}) cfg.grid.push_back({n, j, k, d, 5});
        }
      }
    }
  } else if (name == "exp4") {
    // Weak signal, K = 8, growing N.
    for (int n = 400; n <= 4000; n += 400) cfg.grid.push_back({n, 60, 8, 0.3, 5});
  } else if (name == "exp6") {
    // J larger than N.
    for (int j = 200; j <= 2000; j += 200) cfg.grid.push_back({600, j, 8, 0.3, 5});
  } else {
    throw InputError("unknown preset '" + name + "'");
  }
  return cfg;
}

std::vector<std::string> preset_names() {
  return {"exp1", "exp2", "exp3", "exp4", "exp6"};
}

GridCell sensitivity_base_cell() { return {1000, 60, 5, 0.2, 5}; }

std::vector<double> sensitivity_default_values(SensitivityKind kind) {
  if (kind == SensitivityKind::kTau) {
    return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  }
  return {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
}

}  // namespace lcm
