// Copyright 2026 The tcnqs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "tcnqs/analysis.hpp"
#include "tcnqs/ed_oracle.hpp"
#include "tcnqs/observables.hpp"
#include "tcnqs/selfcheck.hpp"
#include "tcnqs/training.hpp"

namespace {

using namespace tcnqs;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

int cmd_train(const std::string& config_path, const std::string& resume_path,
              std::uint64_t seed, bool seed_set, const std::string& out_dir,
              int max_iters) {
  RunRecord record;
  if (!resume_path.empty()) {
    record = resume_training(resume_path, max_iters);
  } else {
    RunConfig config = RunConfig::from_file(config_path);
    if (seed_set) {
      config.master_seed = seed;
      config.ansatz.seed = seed;
    }
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (max_iters > 0) config.optimizer.max_iterations = max_iters;
    config.validate();
    record = run_training(config);
  }

  if (record.aborted) {
    std::cerr << "training aborted: " << record.abort_reason << "\n"
              << "last good checkpoint: " << record.final_checkpoint << "\n";
    return kExitNumerical;
  }
  const auto& rep = record.final_report;
  std::cout << "final energy " << rep.energy << " +- " << rep.energy_stderr
            << " (density " << rep.density << ", acceptance " << rep.acceptance
            << ")\n";
  if (rep.has_exact_energy) {
    std::cout << "exact-summation variational energy "
              << rep.exact_variational_energy << "\n";
  }
  std::cout << "checkpoint: " << record.final_checkpoint << "\n"
            << "wall time " << record.wall_seconds << " s\n";
  return kExitOk;
}

int cmd_ed(const std::string& config_path, const std::string& method_name,
           const std::string& cache_dir) {
  const RunConfig config = RunConfig::from_file(config_path);
  const LatticeGeometry geom = build_lattice(config.L);
  const EdMethod method =
      method_name == "dense" ? EdMethod::dense : EdMethod::iterative;
  const ExactState state = exact_ground_state(geom, config.h, method, cache_dir);
  std::cout << "L=" << config.L << " h=(" << config.h.hx << "," << config.h.hy
            << "," << config.h.hz << ")\n"
            << "E0 = " << state.energy << "\n"
            << "density = " << energy_density(state.energy, geom) << "\n"
            << "residual = " << state.residual << "\n";
  return kExitOk;
}

struct SweepSpec {
  std::string component = "hz";
  std::vector<double> values;
  std::string mode = "ed";
};

SweepSpec sweep_spec_from(const ConfigFile& file) {
  SweepSpec spec;
  spec.component = file.get_string("sweep", "component", spec.component);
  spec.mode = file.get_string("sweep", "mode", spec.mode);
  spec.values = file.get_double_list("sweep", "values", {});
  if (spec.values.empty()) {
    const double start = file.get_double("sweep", "start", 0.0);
    const double stop = file.get_double("sweep", "stop", 0.0);
    const double step = file.get_double("sweep", "step", 0.0);
    if (step <= 0.0 || stop < start) {
      throw std::invalid_argument(
          "sweep needs either values or start/stop/step");
    }
    for (double v = start; v <= stop + 1e-12; v += step) spec.values.push_back(v);
  }
  if (spec.component != "hx" && spec.component != "hy" &&
      spec.component != "hz") {
    throw std::invalid_argument("sweep.component must be hx, hy or hz");
  }
  if (spec.mode != "ed" && spec.mode != "train") {
    throw std::invalid_argument("sweep.mode must be ed or train");
  }
  return spec;
}

void set_component(FieldParameters& h, const std::string& component, double v) {
  if (component == "hx") h.hx = v;
  else if (component == "hy") h.hy = v;
  else h.hz = v;
}

std::string bffm_label(int perimeter, LatticeKind kind) {
  return std::string(kind == LatticeKind::primal ? "bffm_z" : "bffm_x") + "_p" +
         std::to_string(perimeter);
}

int cmd_sweep(const std::string& config_path) {
  const ConfigFile file = ConfigFile::parse_file(config_path);
  RunConfig base = RunConfig::from_file(config_path);
  const SweepSpec spec = sweep_spec_from(file);
  std::filesystem::create_directories(base.out_dir);

  // one table per observable identifier
  std::map<std::string, SweepTable> tables;
  auto table_for = [&](const std::string& name) -> SweepTable& {
    auto& t = tables[name];
    t.observable = name;
    t.L = base.L;
    return t;
  };

  const LatticeGeometry geom = build_lattice(base.L);
  for (const double value : spec.values) {
    RunConfig point = base;
    set_component(point.h, spec.component, value);
    if (spec.mode == "ed") {
      const std::string cache =
          (std::filesystem::path(base.out_dir) / "ed_cache").string();
      const ExactState state =
          exact_ground_state(geom, point.h, EdMethod::iterative, cache);
      table_for("energy_density")
          .points.push_back({value, energy_density(state.energy, geom), 0.0, 0.0});
      for (const auto& [perimeter, kind] : base.observables.bffm) {
        table_for(bffm_label(perimeter, kind))
            .points.push_back(
                {value, exact_bffm(state, geom, perimeter, kind), 0.0, 0.0});
      }
      if (base.observables.renyi) {
        table_for("renyi2").points.push_back(
            {value, exact_renyi2(state, geom, central_plaquette_edges(geom)),
             0.0, 0.0});
      }
    } else {
      point.ansatz.complex_params =
          point.ansatz.complex_params || point.h.hy != 0.0;
      std::ostringstream dir;
      dir << base.out_dir << "/point_" << spec.component << value;
      point.out_dir = dir.str();
      point.validate();
      const RunRecord record = run_training(point);
      if (record.aborted) {
        std::cerr << "sweep point " << value
                  << " aborted: " << record.abort_reason << "\n";
        return kExitNumerical;
      }
      const auto& rep = record.final_report;
      table_for("energy_density")
          .points.push_back({value, rep.density,
                             rep.energy_stderr / double(geom.n_edges + 1),
                             0.0});
      for (const auto& entry : rep.observables) {
        const std::string obs = entry.at("observable").get<std::string>();
        if (!entry.contains("value")) continue;
        std::string name = obs;
        if (entry.contains("perimeter")) {
          name += "_p" + std::to_string(entry.at("perimeter").get<int>());
        }
        table_for(name).points.push_back(
            {value, entry.at("value").get<double>(),
             entry.value("error", 0.0), 0.0});
      }
    }
    std::cout << "sweep " << spec.component << " = " << value << " done\n";
  }

  std::vector<SweepTable> all;
  all.reserve(tables.size());
  for (auto& [name, table] : tables) all.push_back(table);
  const std::string csv_path =
      (std::filesystem::path(base.out_dir) /
       ("sweep_" + spec.component + "_L" + std::to_string(base.L) + ".csv"))
          .string();
  write_sweep_csv(csv_path, all);
  std::cout << "wrote " << csv_path << "\n";
  return kExitOk;
}

int cmd_analyze(const std::vector<std::string>& csv_paths) {
  std::map<std::string, std::vector<SizePeak>> peaks_by_observable;
  for (const auto& path : csv_paths) {
    for (const auto& table : read_sweep_csv(path)) {
      try {
        const PeakEstimate peak = peak_from_sweep(table);
        std::cout << table.observable << " L=" << table.L << ": h_peak = "
                  << peak.location << " +- " << peak.uncertainty << "\n";
        peaks_by_observable[table.observable].push_back(
            {table.L, peak.location,
             std::max(peak.uncertainty, 1e-12)});
      } catch (const std::exception& e) {
        std::cout << table.observable << " L=" << table.L
                  << ": no peak (" << e.what() << ")\n";
      }
    }
  }
  for (const auto& [obs, peaks] : peaks_by_observable) {
    std::set<int> sizes;
    for (const auto& p : peaks) sizes.insert(p.L);
    if (sizes.size() < 3) {
      std::cout << obs << ": extrapolation skipped (needs >= 3 sizes, have "
                << sizes.size() << ")\n";
      continue;
    }
    const ExtrapolationFit fit = power_law_extrapolate(peaks);
    std::cout << obs << ": h_crit = " << fit.h_crit << " +- "
              << fit.h_crit_uncertainty() << "  (b = " << fit.b
              << ", x = " << fit.x << ")\n";
  }
  return kExitOk;
}

int cmd_check() {
  bool all_ok = true;
  for (const auto& result : run_selfchecks()) {
    std::cout << (result.passed ? "[PASS] " : "[FAIL] ") << result.name << ": "
              << result.detail << "\n";
    all_ok = all_ok && result.passed;
  }
  return all_ok ? kExitOk : kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "variational Monte Carlo for the mixed-field toric code with "
      "approximately-symmetric neural network states"};
  app.require_subcommand(1);

  std::string config_path, resume_path, out_dir, cache_dir = "ed_cache";
  std::string method = "iterative";
  std::uint64_t seed = 0;
  int max_iters = -1;
  std::vector<std::string> csv_paths;

  auto* train = app.add_subcommand("train", "run a training loop");
  auto* train_cfg = train->add_option("--config", config_path, "config file");
  auto* train_resume =
      train->add_option("--resume", resume_path, "checkpoint to resume from");
  auto* train_seed = train->add_option("--seed", seed, "master seed override");
  train->add_option("--out", out_dir, "output directory override");
  train->add_option("--max-iters", max_iters, "iteration count override");
  train_cfg->excludes(train_resume);

  auto* ed = app.add_subcommand("ed", "exact ground state (oracle run + cache)");
  ed->add_option("--config", config_path, "config file")->required();
  ed->add_option("--method", method, "dense or iterative")
      ->check(CLI::IsMember({"dense", "iterative"}));
  ed->add_option("--cache", cache_dir, "cache directory");

  auto* sweep = app.add_subcommand("sweep", "field sweep emitting CSV tables");
  sweep->add_option("--config", config_path, "config file")->required();

  auto* analyze =
      app.add_subcommand("analyze", "derivative peaks and extrapolation");
  analyze->add_option("csv", csv_paths, "sweep CSV files")->required();

  app.add_subcommand("check", "run the built-in invariant suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("train")) {
      if (config_path.empty() && resume_path.empty()) {
        std::cerr << "train: need --config or --resume\n";
        return kExitUsage;
      }
      return cmd_train(config_path, resume_path, seed, !train_seed->empty(),
                       out_dir, max_iters);
    }
    if (app.got_subcommand("ed")) return cmd_ed(config_path, method, cache_dir);
    if (app.got_subcommand("sweep")) return cmd_sweep(config_path);
    if (app.got_subcommand("analyze")) return cmd_analyze(csv_paths);
    if (app.got_subcommand("check")) return cmd_check();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
