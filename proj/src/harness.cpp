#include "lcm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lcm/csv_io.hpp"
#include "lcm/errors.hpp"
#include "lcm/rng.hpp"

namespace lcm {

using nlohmann::json;

namespace {

// Runs fn(0..count-1) over a bounded pool. fn must not throw.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn) {
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  if (workers <= 1) {
    work();
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
}

std::optional<std::string> infeasible(const GridCell& c) {
  if (!(c.delta > 0.0 && c.delta <= 0.5)) return "delta outside (0, 0.5]";
  if (c.max_category < 1) return "max_category < 1";
  if (c.n_classes < 1) return "n_classes < 1";
  if (c.n_subjects < 2 || c.n_items < 2) return "need N >= 2 and J >= 2";
  if (c.n_classes > c.n_subjects) return "n_classes > n_subjects";
  return std::nullopt;
}

SelectConfig base_select_config(const ExperimentConfig& cfg) {
  SelectConfig sc;
  if (cfg.overrides.tau_exponent) sc.tau_exponent = *cfg.overrides.tau_exponent;
  if (cfg.overrides.gamma_multiplier) {
    sc.gamma_multiplier = *cfg.overrides.gamma_multiplier;
  }
  sc.k_max = cfg.overrides.k_max;
  return sc;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - since)
      .count();
}

ReplicationRecord run_replication(const ExperimentConfig& cfg,
                                  const GridCell& cell, int cell_index,
                                  int rep) {
  ReplicationRecord rec;
  rec.replication = rep;
  rec.seed = derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(cell_index),
                                           static_cast<std::uint64_t>(rep)});
  GenConfig gen{cell.delta, cell.max_category, derive_seed(rec.seed, {0})};
  SyntheticInstance inst =
      generate_instance(cell.n_subjects, cell.n_items, cell.n_classes, gen);
  rec.membership_resamples = inst.membership_resamples;
  const ResponseMatrix& r = inst.responses;

  SelectConfig sc = base_select_config(cfg);
  sc.seed = derive_seed(rec.seed, {1});
  for (Method m : cfg.methods) {
    MethodOutcome out;
    out.method = m;
    const auto start = std::chrono::steady_clock::now();
    if (m == Method::kSpec) {
      out.k_hat = select_spec(r);
    } else {
      sc.method = m;
      out.trace = m == Method::kGof ? select_gof(r, sc) : select_rgof(r, sc);
      out.k_hat = out.trace->k_hat;
    }
    out.runtime_ms = elapsed_ms(start);
    rec.outcomes.push_back(std::move(out));
  }
  if (cfg.profile_k0) {
    const int depth =
        std::min(*cfg.profile_k0, std::min(r.n_subjects(), r.n_items()));
    CandidateEvaluator eval(r, sc.seed, depth, sc.kmeans);
    for (int k0 = 1; k0 <= depth; ++k0) rec.profile.push_back(eval.record(k0));
  }
  return rec;
}

json candidate_json(const CandidateRecord& c) {
  json j;
  j["k0"] = c.k0;
  j["sigma1"] = c.sigma1;
  j["t_stat"] = c.t_stat;
  // JSON has no infinity; +inf ratios are written as the string "inf".
  if (!c.ratio) {
    j["ratio"] = nullptr;
  } else if (std::isinf(*c.ratio)) {
    j["ratio"] = "inf";
  } else {
    j["ratio"] = *c.ratio;
  }
  return j;
}

json trace_json(const GofTrace& t) {
  json j;
  j["k_hat"] = t.k_hat;
  j["stop_reason"] = to_string(t.stop_reason);
  j["k_max"] = t.k_max;
  j["tau"] = t.tau;
  j["gamma"] = t.gamma;
  j["candidates"] = json::array();
  for (const auto& c : t.candidates) j["candidates"].push_back(candidate_json(c));
  return j;
}

json cell_json(const GridCell& c) {
  return json{{"n_subjects", c.n_subjects},
              {"n_items", c.n_items},
              {"n_classes", c.n_classes},
              {"delta", c.delta},
              {"max_category", c.max_category}};
}

json summary_json(const std::vector<StatSummary>& rows) {
  json arr = json::array();
  for (const auto& s : rows) {
    arr.push_back({{"k0", s.k0},
                   {"t_mean", s.t_mean},
                   {"t_sd", s.t_sd},
                   {"t_count", s.t_count},
                   {"r_mean", s.r_mean},
                   {"r_sd", s.r_sd},
                   {"r_count", s.r_count},
                   {"r_infinite", s.r_infinite}});
  }
  return arr;
}

json config_json(const ExperimentConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["grid"] = json::array();
  for (const auto& c : cfg.grid) j["grid"].push_back(cell_json(c));
  j["reps"] = cfg.reps;
  j["master_seed"] = cfg.master_seed;
  j["methods"] = json::array();
  for (Method m : cfg.methods) j["methods"].push_back(to_string(m));
  json ov = json::object();
  if (cfg.overrides.tau_exponent) ov["tau_exponent"] = *cfg.overrides.tau_exponent;
  if (cfg.overrides.gamma_multiplier) {
    ov["gamma_multiplier"] = *cfg.overrides.gamma_multiplier;
  }
  if (cfg.overrides.k_max) ov["k_max"] = *cfg.overrides.k_max;
  j["overrides"] = ov;
  if (cfg.profile_k0) j["profile_k0"] = *cfg.profile_k0;
  return j;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw InputError(where + ": expected a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw InputError(where + ": unknown key '" + key + "'");
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (cfg.reps < 1) throw InputError("reps must be >= 1");
  if (cfg.grid.empty()) throw InputError("experiment grid is empty");
  if (cfg.methods.empty()) throw InputError("no methods requested");
  for (const auto& c : cfg.grid) {
    if (!(c.delta > 0.0 && c.delta <= 0.5)) {
      throw InputError("grid delta " + std::to_string(c.delta) +
                       " outside (0, 0.5]");
    }
  }
  if (cfg.profile_k0 && *cfg.profile_k0 < 1) {
    throw InputError("profile_k0 must be >= 1");
  }
  const auto& ov = cfg.overrides;
  if ((ov.tau_exponent && *ov.tau_exponent <= 0.0) ||
      (ov.gamma_multiplier && *ov.gamma_multiplier <= 0.0) ||
      (ov.k_max && *ov.k_max < 1)) {
    throw InputError("overrides must be positive");
  }
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"name", "grid", "reps", "master_seed", "methods", "overrides",
                  "profile_k0"},
                 "config");
  ExperimentConfig cfg;
  try {
    if (j.contains("name")) cfg.name = j.at("name").get<std::string>();
    if (j.contains("reps")) cfg.reps = j.at("reps").get<int>();
    if (j.contains("master_seed")) {
      cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    }
    if (j.contains("profile_k0")) cfg.profile_k0 = j.at("profile_k0").get<int>();
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j.at("methods")) {
        cfg.methods.push_back(parse_method(m.get<std::string>()));
      }
    }
    if (j.contains("grid")) {
      for (const auto& g : j.at("grid")) {
        reject_unknown(g,
                       {"n_subjects", "n_items", "n_classes", "delta",
                        "max_category"},
                       "grid cell");
        GridCell c;
        c.n_subjects = g.at("n_subjects").get<int>();
        c.n_items = g.at("n_items").get<int>();
        c.n_classes = g.at("n_classes").get<int>();
        c.delta = g.at("delta").get<double>();
        if (g.contains("max_category")) c.max_category = g.at("max_category").get<int>();
        cfg.grid.push_back(c);
      }
    }
    if (j.contains("overrides")) {
      const json& ov = j.at("overrides");
      reject_unknown(ov, {"tau_exponent", "gamma_multiplier", "k_max"},
                     "overrides");
      if (ov.contains("tau_exponent")) {
        cfg.overrides.tau_exponent = ov.at("tau_exponent").get<double>();
      }
      if (ov.contains("gamma_multiplier")) {
        cfg.overrides.gamma_multiplier = ov.at("gamma_multiplier").get<double>();
      }
      if (ov.contains("k_max")) cfg.overrides.k_max = ov.at("k_max").get<int>();
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

double accuracy_std_error(double accuracy, int reps) {
  return std::sqrt(accuracy * (1.0 - accuracy) / reps);
}

std::vector<StatSummary> summarize_candidates(
    const std::vector<std::vector<CandidateRecord>>& traces) {
  std::map<int, std::vector<double>> t_values, r_values;
  std::map<int, int> r_inf;
  for (const auto& trace : traces) {
    for (const auto& c : trace) {
      t_values[c.k0].push_back(c.t_stat);
      if (c.ratio) {
        if (std::isinf(*c.ratio)) {
          ++r_inf[c.k0];
        } else {
          r_values[c.k0].push_back(*c.ratio);
        }
      }
    }
  }
  auto mean_sd = [](const std::vector<double>& v) {
    if (v.empty()) return std::pair{0.0, 0.0};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
    return std::pair{mean, sd};
  };
  std::vector<StatSummary> out;
  for (const auto& [k0, ts] : t_values) {
    StatSummary s;
    s.k0 = k0;
    std::tie(s.t_mean, s.t_sd) = mean_sd(ts);
    s.t_count = static_cast<int>(ts.size());
    if (auto it = r_values.find(k0); it != r_values.end()) {
      std::tie(s.r_mean, s.r_sd) = mean_sd(it->second);
      s.r_count = static_cast<int>(it->second.size());
    }
    s.r_infinite = r_inf[k0];
    out.push_back(s);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
  validate(cfg);
  ExperimentResult result;
  result.config = cfg;

  struct Task {
    int cell;
    int rep;
  };
  std::vector<Task> tasks;
  result.cells.resize(cfg.grid.size());
  for (std::size_t c = 0; c < cfg.grid.size(); ++c) {
    CellResult& cell = result.cells[c];
    cell.cell_index = static_cast<int>(c);
    cell.cell = cfg.grid[c];
    cell.error = infeasible(cfg.grid[c]);
    if (cell.error) continue;
    cell.replications.resize(cfg.reps);
    for (int r = 0; r < cfg.reps; ++r) tasks.push_back({static_cast<int>(c), r});
  }

  std::vector<std::optional<std::string>> failures(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t t) {
    const Task& task = tasks[t];
    try {
      result.cells[task.cell].replications[task.rep] =
          run_replication(cfg, cfg.grid[task.cell], task.cell, task.rep);
    } catch (const std::exception& e) {
      failures[t] = "replication " + std::to_string(task.rep) + ": " + e.what();
    }
  });
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    CellResult& cell = result.cells[tasks[t].cell];
    if (failures[t] && !cell.error) cell.error = failures[t];
  }

  for (CellResult& cell : result.cells) {
    if (cell.error) {
      cell.replications.clear();
      continue;
    }
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      MethodCellResult mr;
      mr.method = cfg.methods[mi];
      int correct = 0;
      double runtime = 0.0;
      std::vector<std::vector<CandidateRecord>> traces;
      for (const auto& rep : cell.replications) {
        const MethodOutcome& out = rep.outcomes[mi];
        correct += out.k_hat == cell.cell.n_classes ? 1 : 0;
        runtime += out.runtime_ms;
        ++mr.stop_distribution[out.k_hat];
        if (out.trace) traces.push_back(out.trace->candidates);
      }
      mr.accuracy = static_cast<double>(correct) / cfg.reps;
      mr.std_error = accuracy_std_error(mr.accuracy, cfg.reps);
      mr.mean_runtime_ms = runtime / cfg.reps;
      mr.stat_summaries = summarize_candidates(traces);
      cell.methods.push_back(std::move(mr));
    }
    if (cfg.profile_k0) {
      std::vector<std::vector<CandidateRecord>> profiles;
      for (const auto& rep : cell.replications) profiles.push_back(rep.profile);
      cell.profile = summarize_candidates(profiles);
    }
  }
  return result;
}

void write_experiment(const ExperimentResult& result,
                      const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string& name = result.config.name;
  const int reps = result.config.reps;

  {
    std::ofstream out = open_out(out_dir / (name + "_accuracy.csv"));
    out << "cell,n_subjects,n_items,n_classes,delta,max_category,method,reps,"
           "accuracy,std_error,error\n";
    for (const auto& cell : result.cells) {
      const auto& c = cell.cell;
      auto prefix = [&] {
        std::ostringstream p;
        p << cell.cell_index << ',' << c.n_subjects << ',' << c.n_items << ','
          << c.n_classes << ',' << format_double(c.delta) << ','
          << c.max_category << ',';
        return p.str();
      };
      if (cell.error) {
        for (Method m : result.config.methods) {
          out << prefix() << to_string(m) << ',' << reps << ",,,\""
              << *cell.error << "\"\n";
        }
        continue;
      }
      for (const auto& m : cell.methods) {
        out << prefix() << to_string(m.method) << ',' << reps << ','
            << format_double(m.accuracy) << ',' << format_double(m.std_error)
            << ",\n";
      }
    }
  }
  {
    std::ofstream out = open_out(out_dir / (name + "_stops.csv"));
    out << "cell,method,k_hat,count,proportion\n";
    for (const auto& cell : result.cells) {
      for (const auto& m : cell.methods) {
        for (const auto& [k, count] : m.stop_distribution) {
          out << cell.cell_index << ',' << to_string(m.method) << ',' << k << ','
              << count << ',' << format_double(static_cast<double>(count) / reps)
              << '\n';
        }
      }
    }
  }
  {
    std::ofstream out = open_out(out_dir / (name + "_stats.csv"));
    out << "cell,source,k0,t_mean,t_sd,t_count,r_mean,r_sd,r_count,r_infinite\n";
    auto rows = [&](int cell, const std::string& source,
                    const std::vector<StatSummary>& stats) {
      for (const auto& s : stats) {
        out << cell << ',' << source << ',' << s.k0 << ','
            << format_double(s.t_mean) << ',' << format_double(s.t_sd) << ','
            << s.t_count << ',' << format_double(s.r_mean) << ','
            << format_double(s.r_sd) << ',' << s.r_count << ',' << s.r_infinite
            << '\n';
      }
    };
    for (const auto& cell : result.cells) {
      for (const auto& m : cell.methods) {
        rows(cell.cell_index, to_string(m.method), m.stat_summaries);
      }
      rows(cell.cell_index, "profile", cell.profile);
    }
  }
  {
    std::ofstream out = open_out(out_dir / (name + "_timing.csv"));
    out << "cell,method,mean_runtime_ms\n";
    for (const auto& cell : result.cells) {
      for (const auto& m : cell.methods) {
        out << cell.cell_index << ',' << to_string(m.method) << ','
            << format_double(m.mean_runtime_ms) << '\n';
      }
    }
  }
  {
    json j;
    j["config"] = config_json(result.config);
    j["cells"] = json::array();
    for (const auto& cell : result.cells) {
      json jc;
      jc["cell_index"] = cell.cell_index;
      jc["cell"] = cell_json(cell.cell);
      jc["error"] = cell.error ? json(*cell.error) : json(nullptr);
      jc["methods"] = json::array();
      for (const auto& m : cell.methods) {
        json jm;
        jm["method"] = to_string(m.method);
        jm["accuracy"] = m.accuracy;
        jm["std_error"] = m.std_error;
        jm["stat_summaries"] = summary_json(m.stat_summaries);
        json stops = json::object();
        for (const auto& [k, count] : m.stop_distribution) {
          stops[std::to_string(k)] = count;
        }
        jm["stop_distribution"] = stops;
        jc["methods"].push_back(jm);
      }
      jc["profile"] = summary_json(cell.profile);
      jc["replications"] = json::array();
      for (const auto& rep : cell.replications) {
        json jr;
        jr["replication"] = rep.replication;
        jr["seed"] = rep.seed;
        jr["membership_resamples"] = rep.membership_resamples;
        jr["outcomes"] = json::array();
        for (const auto& o : rep.outcomes) {
          json jo;
          jo["method"] = to_string(o.method);
          jo["k_hat"] = o.k_hat;
          if (o.trace) jo["trace"] = trace_json(*o.trace);
          jr["outcomes"].push_back(jo);
        }
        if (!rep.profile.empty()) {
          jr["profile"] = json::array();
          for (const auto& c : rep.profile) jr["profile"].push_back(candidate_json(c));
        }
        jc["replications"].push_back(jr);
      }
      j["cells"].push_back(jc);
    }
    std::ofstream out = open_out(out_dir / (name + ".json"));
    out << j.dump(1) << '\n';
  }
}

SensitivityKind parse_sensitivity_kind(const std::string& name) {
  if (name == "tau") return SensitivityKind::kTau;
  if (name == "gamma") return SensitivityKind::kGamma;
  throw InputError("unknown sensitivity kind '" + name + "' (expected tau|gamma)");
}

std::string to_string(SensitivityKind kind) {
  return kind == SensitivityKind::kTau ? "tau" : "gamma";
}

SensitivityTable run_threshold_sensitivity(SensitivityKind kind,
                                           const std::vector<double>& values,
                                           const GridCell& base_cell, int reps,
                                           std::uint64_t master_seed,
                                           int threads) {
  if (values.empty()) throw InputError("sensitivity: no values given");
  if (reps < 1) throw InputError("sensitivity: reps must be >= 1");
  for (double v : values) {
    if (!(v > 0.0)) throw InputError("sensitivity values must be > 0");
  }
  if (auto why = infeasible(base_cell)) throw InputError("sensitivity cell: " + *why);

  std::vector<std::vector<int>> k_hats(reps);
  std::vector<std::optional<std::string>> failures(reps);
  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t rep) {
    try {
      const std::uint64_t seed =
          derive_seed(master_seed, {0, static_cast<std::uint64_t>(rep)});
      GenConfig gen{base_cell.delta, base_cell.max_category, derive_seed(seed, {0})};
      SyntheticInstance inst = generate_instance(
          base_cell.n_subjects, base_cell.n_items, base_cell.n_classes, gen);
      SelectConfig sc;
      sc.seed = derive_seed(seed, {1});
      CandidateEvaluator eval(inst.responses, sc.seed,
                              resolve_k_max(inst.responses, sc), sc.kmeans);
      for (double v : values) {
        if (kind == SensitivityKind::kTau) {
          sc.tau_exponent = v;
          k_hats[rep].push_back(select_gof(eval, sc).k_hat);
        } else {
          sc.gamma_multiplier = v;
          k_hats[rep].push_back(select_rgof(eval, sc).k_hat);
        }
      }
    } catch (const std::exception& e) {
      failures[rep] = e.what();
    }
  });
  for (const auto& f : failures) {
    if (f) throw NumericError("sensitivity replication failed: " + *f);
  }

  SensitivityTable table;
  table.kind = kind;
  table.cell = base_cell;
  table.reps = reps;
  table.master_seed = master_seed;
  for (std::size_t v = 0; v < values.size(); ++v) {
    int correct = 0;
    for (const auto& row : k_hats) correct += row[v] == base_cell.n_classes ? 1 : 0;
    SensitivityRow r;
    r.value = values[v];
    r.accuracy = static_cast<double>(correct) / reps;
    r.std_error = accuracy_std_error(r.accuracy, reps);
    table.rows.push_back(r);
  }
  return table;
}

void write_sensitivity(const SensitivityTable& table,
                       const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out = open_out(path);
  out << (table.kind == SensitivityKind::kTau ? "epsilon" : "a")
      << ",accuracy,std_error,reps\n";
  for (const auto& r : table.rows) {
    out << format_double(r.value) << ',' << format_double(r.accuracy) << ','
        << format_double(r.std_error) << ',' << table.reps << '\n';
  }
}

std::string trace_to_json(const GofTrace& trace) { return trace_json(trace).dump(1); }

GofTrace emit_statistic_curves(const ResponseMatrix& r, const SelectConfig& cfg,
                               const std::filesystem::path& out_stem) {
  GofTrace trace = trace_all(r, cfg);
  if (out_stem.has_parent_path()) {
    std::filesystem::create_directories(out_stem.parent_path());
  }
  std::filesystem::path csv_path = out_stem;
  csv_path += ".csv";
  std::filesystem::path json_path = out_stem;
  json_path += ".json";
  {
    std::ofstream out = open_out(csv_path);
    out << "k0,sigma1,t_stat,ratio\n";
    for (const auto& c : trace.candidates) {
      out << c.k0 << ',' << format_double(c.sigma1) << ','
          << format_double(c.t_stat) << ',';
      if (c.ratio) out << format_double(*c.ratio);
      out << '\n';
    }
  }
  {
    std::ofstream out = open_out(json_path);
    out << trace_to_json(trace) << '\n';
  }
  return trace;
}

}  // namespace lcm
