// lcmk: estimate the number of latent classes in ordinal response data.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lcm/csv_io.hpp"
#include "lcm/errors.hpp"
#include "lcm/gof.hpp"
#include "lcm/harness.hpp"
#include "lcm/model.hpp"
#include "lcm/sc_lcm.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct Globals {
  std::uint64_t seed = 42;
  std::string out = ".";
  int threads = 0;
  std::optional<int> max_category;
};

lcm::ResponseMatrix load_input(const std::string& path, const Globals& g) {
  lcm::LoadedResponses loaded = lcm::load_response_csv(path, g.max_category);
  if (loaded.had_header) std::cerr << "note: skipped header row in " << path << '\n';
  if (loaded.max_category_inferred) {
    std::cerr << "note: max category inferred as M="
              << loaded.matrix.max_category() << " from the data\n";
  }
  return std::move(loaded.matrix);
}

void print_trace(const lcm::GofTrace& trace) {
  std::cout << "k0,sigma1,t_stat,ratio\n";
  for (const auto& c : trace.candidates) {
    std::cout << c.k0 << ',' << lcm::format_double(c.sigma1) << ','
              << lcm::format_double(c.t_stat) << ',';
    if (c.ratio) std::cout << lcm::format_double(*c.ratio);
    std::cout << '\n';
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lcm::InputError("cannot open '" + path.string() + "' for writing");
  out << text << '\n';
}

void print_experiment(const lcm::ExperimentResult& result) {
  std::cout << "cell,N,J,K,delta,method,accuracy,std_error\n";
  for (const auto& cell : result.cells) {
    const auto& c = cell.cell;
    if (cell.error) {
      std::cout << cell.cell_index << ',' << c.n_subjects << ',' << c.n_items
                << ',' << c.n_classes << ',' << c.delta << ",skipped: "
                << *cell.error << '\n';
      continue;
    }
    for (const auto& m : cell.methods) {
      std::cout << cell.cell_index << ',' << c.n_subjects << ',' << c.n_items
                << ',' << c.n_classes << ',' << c.delta << ','
                << lcm::to_string(m.method) << ',' << m.accuracy << ','
                << m.std_error << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lcmk: number-of-classes selection for ordinal latent class models"};
  app.require_subcommand(1);

  Globals g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = auto)")
      ->capture_default_str();
  app.add_option("--m", g.max_category, "Maximum response category M");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic response matrix");
  int sim_n = 200, sim_j = 60, sim_k = 3;
  double sim_delta = 0.2;
  sim->add_option("--n", sim_n, "Subjects N")->capture_default_str();
  sim->add_option("--j", sim_j, "Items J")->capture_default_str();
  sim->add_option("--k", sim_k, "Classes K")->capture_default_str();
  sim->add_option("--delta", sim_delta, "Signal strength delta")->capture_default_str();

  // fit
  auto* fit = app.add_subcommand("fit", "SC-LCM fit at a fixed number of classes");
  std::string fit_input;
  int fit_k = 2;
  fit->add_option("input", fit_input, "Response CSV")->required();
  fit->add_option("--k", fit_k, "Candidate number of classes")->capture_default_str();

  // select / curves share selection options
  std::string sel_input, sel_method = "rgof";
  double tau_exponent = 0.2, gamma_multiplier = 1.0;
  std::optional<int> k_max;
  auto add_select_opts = [&](CLI::App* sub) {
    sub->add_option("input", sel_input, "Response CSV")->required();
    sub->add_option("--tau-exponent", tau_exponent, "tau_N = N^-eps")
        ->capture_default_str();
    sub->add_option("--gamma-multiplier", gamma_multiplier, "gamma_N = a log N")
        ->capture_default_str();
    sub->add_option("--k-max", k_max, "Largest candidate (default floor(sqrt(N/log(N+J))))");
  };
  auto* sel = app.add_subcommand("select", "Estimate the number of classes");
  add_select_opts(sel);
  sel->add_option("--method", sel_method, "gof | rgof | spec")
      ->check(CLI::IsMember({"gof", "rgof", "spec"}))
      ->capture_default_str();
  auto* curves = app.add_subcommand("curves", "Emit T and r for every candidate");
  add_select_opts(curves);

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a Monte Carlo preset or config file");
  std::string exp_target;
  bool quick = false;
  std::optional<int> reps;
  exp->add_option("target", exp_target, "exp1|exp2|exp3|exp4|exp5|exp6 or config.json")
      ->required();
  exp->add_flag("--quick", quick, "50 replications instead of 200");
  exp->add_option("--reps", reps, "Override replication count");

  // sensitivity
  auto* sens = app.add_subcommand("sensitivity", "Threshold sensitivity table");
  std::string sens_kind = "tau";
  std::vector<double> sens_values;
  lcm::GridCell sens_cell = lcm::sensitivity_base_cell();
  int sens_reps = 50;
  sens->add_option("--kind", sens_kind, "tau | gamma")
      ->check(CLI::IsMember({"tau", "gamma"}))
      ->capture_default_str();
  sens->add_option("--values", sens_values, "Exponents (tau) or multipliers (gamma)")
      ->delimiter(',');
  sens->add_option("--n", sens_cell.n_subjects)->capture_default_str();
  sens->add_option("--j", sens_cell.n_items)->capture_default_str();
  sens->add_option("--k", sens_cell.n_classes)->capture_default_str();
  sens->add_option("--delta", sens_cell.delta)->capture_default_str();
  sens->add_option("--reps", sens_reps)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  auto select_cfg = [&] {
    lcm::SelectConfig cfg;
    cfg.seed = g.seed;
    cfg.tau_exponent = tau_exponent;
    cfg.gamma_multiplier = gamma_multiplier;
    cfg.k_max = k_max;
    return cfg;
  };

  try {
    const fs::path out_dir(g.out);
    fs::create_directories(out_dir);

    if (*sim) {
      lcm::GenConfig gen{sim_delta, g.max_category.value_or(5), g.seed};
      lcm::SyntheticInstance inst = lcm::generate_instance(sim_n, sim_j, sim_k, gen);
      lcm::write_response_csv(out_dir / "responses.csv", inst.responses);
      lcm::write_labels_csv(out_dir / "memberships.csv", inst.params.memberships());
      lcm::write_matrix_csv(out_dir / "theta.csv", inst.params.item_params());
      std::cout << "wrote " << (out_dir / "responses.csv").string() << " (N=" << sim_n
                << ", J=" << sim_j << ", K=" << sim_k << ")\n";
    } else if (*fit) {
      lcm::ResponseMatrix r = load_input(fit_input, g);
      lcm::FittedModel model = lcm::fit_sc_lcm(r, fit_k, g.seed);
      lcm::write_labels_csv(out_dir / "labels.csv", model.memberships_hat);
      lcm::write_matrix_csv(out_dir / "theta_hat.csv", model.theta_hat);
      std::cout << "T_" << fit_k << " = "
                << lcm::format_double(lcm::t_statistic(r, model)) << '\n';
    } else if (*sel) {
      lcm::ResponseMatrix r = load_input(sel_input, g);
      const lcm::Method method = lcm::parse_method(sel_method);
      if (method == lcm::Method::kSpec) {
        const int k = lcm::select_spec(r);
        std::cout << "k_hat=" << k << '\n';
        if (k == 0) std::cerr << "warning: no singular value exceeds the threshold\n";
      } else {
        lcm::SelectConfig cfg = select_cfg();
        cfg.method = method;
        lcm::GofTrace trace = method == lcm::Method::kGof ? lcm::select_gof(r, cfg)
                                                          : lcm::select_rgof(r, cfg);
        print_trace(trace);
        std::cout << "k_hat=" << trace.k_hat
                  << " stop_reason=" << lcm::to_string(trace.stop_reason) << '\n';
        if (trace.stop_reason == lcm::StopReason::kExhaustedKmax) {
          std::cerr << "warning: no candidate met the stopping rule; reporting k_max\n";
        }
        write_text(out_dir / "trace.json", lcm::trace_to_json(trace));
      }
    } else if (*curves) {
      lcm::ResponseMatrix r = load_input(sel_input, g);
      lcm::GofTrace trace = lcm::emit_statistic_curves(r, select_cfg(), out_dir / "curves");
      print_trace(trace);
    } else if (*exp) {
      if (exp_target == "exp5") {
        for (auto kind : {lcm::SensitivityKind::kTau, lcm::SensitivityKind::kGamma}) {
          auto table = lcm::run_threshold_sensitivity(
              kind, lcm::sensitivity_default_values(kind), lcm::sensitivity_base_cell(),
              reps.value_or(quick ? 50 : 200), g.seed, g.threads);
          const fs::path path = out_dir / ("exp5_" + lcm::to_string(kind) + ".csv");
          lcm::write_sensitivity(table, path);
          std::cout << "wrote " << path.string() << '\n';
        }
        return 0;
      }
      lcm::ExperimentConfig cfg;
      if (fs::exists(exp_target) && fs::is_regular_file(exp_target)) {
        cfg = lcm::load_experiment_config(exp_target);
      } else {
        cfg = lcm::experiment_preset(exp_target, quick);
        cfg.master_seed = g.seed;
      }
      if (reps) cfg.reps = *reps;
      lcm::ExperimentResult result = lcm::run_experiment(cfg, g.threads);
      lcm::write_experiment(result, out_dir);
      print_experiment(result);
    } else if (*sens) {
      const auto kind = lcm::parse_sensitivity_kind(sens_kind);
      if (sens_values.empty()) sens_values = lcm::sensitivity_default_values(kind);
      auto table = lcm::run_threshold_sensitivity(kind, sens_values, sens_cell,
                                                  sens_reps, g.seed, g.threads);
      const fs::path path = out_dir / ("sensitivity_" + sens_kind + ".csv");
      lcm::write_sensitivity(table, path);
      std::cout << (kind == lcm::SensitivityKind::kTau ? "epsilon" : "a")
                << ",accuracy,std_error\n";
      for (const auto& row : table.rows) {
        std::cout << row.value << ',' << row.accuracy << ',' << row.std_error << '\n';
      }
    }
  } catch (const lcm::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const lcm::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
