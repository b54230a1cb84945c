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

#include "tcnqs/training.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include "tcnqs/ansatz.hpp"
#include "tcnqs/kernels.hpp"
#include "tcnqs/observables.hpp"
#include "tcnqs/optimizer.hpp"
#include "tcnqs/rng.hpp"
#include "tcnqs/sampler.hpp"

namespace tcnqs {

namespace {

struct Phase {
  FieldParameters h;
  int begin = 0;  // global iteration range [begin, end)
  int end = 0;
  std::vector<bool> freeze;
};

nlohmann::json iteration_json(const IterationRecord& r) {
  nlohmann::json j{{"record", "iteration"},
                   {"iteration", r.iteration},
                   {"time", r.training_time},
                   {"energy", r.energy},
                   {"energy_imag", r.energy_imag},
                   {"energy_stderr", r.energy_stderr},
                   {"density", r.density},
                   {"tau", r.tau},
                   {"rhat", r.rhat},
                   {"acceptance", r.acceptance},
                   {"force_norm", r.force_norm},
                   {"sv_largest", r.sv_largest},
                   {"sv_smallest", r.sv_smallest},
                   {"numerical_events", r.numerical_events}};
  if (r.has_invariance) {
    j["eps_tilde"] = r.eps_tilde;
    j["eps_stderr"] = r.eps_stderr;
  }
  return j;
}

class RunLog {
 public:
  RunLog(const std::string& dir, bool append)
      : out_((std::filesystem::path(dir) / "run_log.jsonl").string(),
             append ? std::ios::app : std::ios::trunc) {}
  void line(const nlohmann::json& j) {
    out_ << j.dump() << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

template <class Scalar>
typename Ansatz<Scalar>::Vector narrow_parameters(const Eigen::VectorXcd& p) {
  if constexpr (std::is_same_v<Scalar, std::complex<double>>) {
    return p;
  } else {
    return p.real();
  }
}

template <class Scalar>
Eigen::VectorXcd widen_parameters(const typename Ansatz<Scalar>::Vector& p) {
  if constexpr (std::is_same_v<Scalar, std::complex<double>>) {
    return p;
  } else {
    return p.template cast<std::complex<double>>();
  }
}

std::vector<Phase> build_phases(const RunConfig& config,
                                const std::vector<bool>& nib_mask,
                                const std::vector<bool>& ib_mask) {
  std::vector<Phase> phases;
  if (config.schedule == ScheduleKind::standard) {
    phases.push_back({config.h, 0, config.optimizer.max_iterations,
                      config.optimizer.freeze});
  } else {
    // step 1 trains the invariant block only; step 2 flips the roles
    phases.push_back({config.step1_h, 0, config.step1_iterations, nib_mask});
    phases.push_back({config.step2_h, config.step1_iterations,
                      config.step1_iterations + config.step2_iterations,
                      ib_mask});
  }
  return phases;
}

template <class Scalar>
RunRecord run_training_impl(const RunConfig& config,
                            std::optional<Eigen::VectorXcd> initial,
                            int start_iteration) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate();
  const LatticeGeometry geom = build_lattice(config.L);
  config.ansatz.validate(geom);

  std::filesystem::create_directories(config.out_dir);
  RunLog log(config.out_dir, start_iteration > 0);

  auto net = make_ansatz<Scalar>(geom, config.ansatz);
  if (initial.has_value()) {
    net->set_parameters(narrow_parameters<Scalar>(*initial));
  }
  const AnsatzLogPsi<Scalar> psi(*net);

  std::vector<bool> nib_mask, ib_mask;
  if (config.ansatz.kind != AnsatzKind::rbm) {
    nib_mask = net->partition_mask(ParamBlock::nib);
    ib_mask = net->partition_mask(ParamBlock::ib);
  }
  const std::vector<Phase> phases = build_phases(config, nib_mask, ib_mask);
  const int total_iterations = phases.back().end;

  RunRecord record;
  record.config = config;
  if (start_iteration == 0) {
    nlohmann::json head = config.echo();
    head["record"] = "config";
    log.line(head);
  }

  auto write_ckpt = [&](const std::string& name, int iteration,
                        const Eigen::VectorXcd& params) {
    const std::string path =
        (std::filesystem::path(config.out_dir) / name).string();
    Checkpoint ckpt;
    ckpt.config = config;
    ckpt.iteration = iteration;
    ckpt.parameters = params;
    write_checkpoint(path, ckpt);
    return path;
  };

  Eigen::VectorXcd last_good = widen_parameters<Scalar>(net->parameters());
  int last_good_iteration = start_iteration;
  int consecutive_bad = 0;
  std::vector<double> energy_history;
  double last_energy_stderr = 0.0;

  int it = start_iteration;
  for (const Phase& phase : phases) {
    if (it >= phase.end) continue;
    bool phase_stopped = false;
    for (; it < phase.end && !phase_stopped; ++it) {
      SamplerConfig scfg = config.sampler;
      scfg.seed = stream_seed(config.master_seed, 0x5a17, std::uint64_t(it));
      const SampleBatch batch = run_chains(psi, geom, scfg);
      const auto eval = evaluate_batch(*net, geom, phase.h, batch);
      const auto q = estimate_sr_quantities<Scalar>(
          eval.gradients, eval.local_energies, phase.freeze, batch.n_chains);

      IterationRecord rec;
      rec.iteration = it + 1;
      rec.training_time = config.optimizer.learning_rate * rec.iteration;
      rec.energy = q.energy.real();
      rec.energy_imag = q.energy.imag();
      rec.energy_stderr = q.energy_stderr;
      rec.density = energy_density(q.energy, geom);
      rec.tau = q.tau;
      rec.acceptance = batch.mean_acceptance();
      rec.numerical_events = batch.numerical_events + eval.numerical_events;
      if (batch.n_chains >= 2 && batch.samples_per_chain >= 4) {
        std::vector<double> series(std::size_t(batch.size()));
        for (long i = 0; i < batch.size(); ++i) {
          series[i] = eval.local_energies[i].real();
        }
        rec.rhat = diagnostics(batch, series).rhat;
      }

      const bool good = std::isfinite(rec.energy) && std::isfinite(rec.density);
      if (good) {
        consecutive_bad = 0;
        const auto update = sr_update(q, config.optimizer);
        rec.force_norm = q.force.norm();
        rec.sv_largest = update.sv_largest;
        rec.sv_smallest = update.sv_smallest_retained;
        net->set_parameters(net->parameters() + update.delta);
        last_good = widen_parameters<Scalar>(net->parameters());
        last_good_iteration = it + 1;
        energy_history.push_back(rec.energy);
        last_energy_stderr = rec.energy_stderr;
      } else {
        ++consecutive_bad;
      }

      if (config.observables.invariance_cadence > 0 &&
          (it + 1) % config.observables.invariance_cadence == 0) {
        const auto eps =
            invariance_error(psi, geom, WeightedEnsemble::from_batch(batch));
        rec.has_invariance = true;
        rec.eps_tilde = eps.mean.real();
        rec.eps_stderr = eps.std_error;
      }

      record.iterations.push_back(rec);
      log.line(iteration_json(rec));

      if ((it + 1) % config.checkpoint_interval == 0) {
        write_ckpt("checkpoint_" + std::to_string(it + 1) + ".ckpt", it + 1,
                   widen_parameters<Scalar>(net->parameters()));
      }

      if (consecutive_bad >= 3) {
        record.aborted = true;
        record.abort_reason =
            "non-finite energy for 3 consecutive iterations at iteration " +
            std::to_string(it + 1);
        record.final_checkpoint =
            write_ckpt("checkpoint_abort.ckpt", last_good_iteration, last_good);
        record.final_parameters = last_good;
        log.line({{"record", "abort"},
                  {"reason", record.abort_reason},
                  {"last_good_iteration", last_good_iteration}});
        const auto t1 = std::chrono::steady_clock::now();
        record.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
        return record;
      }

      // trailing-window stopping rule: quit the phase once the mean energy
      // stopped improving by more than its own statistical error
      const int w = config.early_stop_window;
      if (w > 0 && int(energy_history.size()) >= 2 * w) {
        const auto& eh = energy_history;
        double prev = 0.0, curr = 0.0;
        for (int k = 0; k < w; ++k) {
          prev += eh[eh.size() - 2 * w + k];
          curr += eh[eh.size() - w + k];
        }
        prev /= w;
        curr /= w;
        if (prev - curr < last_energy_stderr) phase_stopped = true;
      }
    }
    if (phase_stopped) it = phase.end;  // skip the rest of the phase
  }

  // final high-statistics pass at the last phase's fields
  const FieldParameters final_h = phases.back().h;
  {
    SamplerConfig scfg = config.sampler;
    scfg.samples_per_chain =
        config.sampler.samples_per_chain *
        std::max(1, config.observables.final_sample_factor);
    scfg.seed = stream_seed(config.master_seed, 0xf17a1e, 0);
    const SampleBatch batch = run_chains(psi, geom, scfg);
    const auto eval = evaluate_batch(*net, geom, final_h, batch);

    FinalReport& rep = record.final_report;
    std::complex<double> mean = 0.0;
    for (long i = 0; i < batch.size(); ++i) mean += eval.local_energies[i];
    mean /= double(batch.size());
    rep.energy = mean.real();
    {
      std::vector<double> series(std::size_t(batch.size()));
      for (long i = 0; i < batch.size(); ++i) {
        series[i] = eval.local_energies[i].real();
      }
      rep.energy_stderr = tau_corrected_stderr(series, batch.n_chains);
    }
    rep.density = energy_density(mean, geom);
    rep.acceptance = batch.mean_acceptance();

    const WeightedEnsemble ens = WeightedEnsemble::from_batch(batch);
    nlohmann::json obs = nlohmann::json::array();
    for (const auto& [perimeter, kind] : config.observables.bffm) {
      nlohmann::json entry{{"observable", kind == LatticeKind::primal
                                              ? "bffm_z"
                                              : "bffm_x"},
                           {"perimeter", perimeter}};
      try {
        const BffmResult r = bffm(psi, geom, perimeter, kind, ens);
        entry["value"] = r.value;
        entry["error"] = r.error;
        entry["numerator"] = r.numerator.mean.real();
        entry["denominator"] = r.denominator.mean.real();
      } catch (const std::exception& e) {
        entry["error_message"] = e.what();
      }
      obs.push_back(entry);
    }
    if (config.observables.renyi) {
      SamplerConfig rcfg = scfg;
      rcfg.seed = stream_seed(config.master_seed, 0xf17a1e, 1);
      const SampleBatch replica = run_chains(psi, geom, rcfg);
      Region region{central_plaquette_edges(geom)};
      nlohmann::json entry{{"observable", "renyi2"}};
      try {
        const Renyi2Result r =
            renyi2_swap(psi, geom, region, ens,
                        WeightedEnsemble::from_batch(replica));
        entry["value"] = r.s2;
        entry["error"] = r.error;
        entry["pairs"] = r.pairs;
      } catch (const std::exception& e) {
        entry["error_message"] = e.what();
      }
      obs.push_back(entry);
    }
    {
      const auto eps = invariance_error(psi, geom, ens);
      obs.push_back({{"observable", "invariance_error"},
                     {"value", eps.mean.real()},
                     {"error", eps.std_error}});
    }
    rep.observables = obs;

    if (config.final_exact_energy_auto && geom.n_edges <= 20) {
      const ExhaustiveEnsemble exact = enumerate_ensemble(psi, geom);
      std::complex<double> acc = 0.0;
      for (long i = 0; i < exact.weights.size(); ++i) {
        acc += exact.weights[i] *
               local_energy(geom, final_h, psi, exact.view().configuration(i));
      }
      rep.has_exact_energy = true;
      rep.exact_variational_energy = acc.real();
    }

    nlohmann::json fj{{"record", "final"},
                      {"energy", rep.energy},
                      {"energy_stderr", rep.energy_stderr},
                      {"density", rep.density},
                      {"acceptance", rep.acceptance},
                      {"observables", rep.observables}};
    if (rep.has_exact_energy) {
      fj["exact_variational_energy"] = rep.exact_variational_energy;
    }
    log.line(fj);
  }

  record.final_parameters = widen_parameters<Scalar>(net->parameters());
  record.final_checkpoint = write_ckpt("checkpoint_final.ckpt", total_iterations,
                                       record.final_parameters);
  const auto t1 = std::chrono::steady_clock::now();
  record.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  log.line({{"record", "done"},
            {"iterations", total_iterations},
            {"wall_seconds", record.wall_seconds}});
  return record;
}

}  // namespace

RunRecord run_training(const RunConfig& config) {
  if (config.ansatz.complex_params) {
    return run_training_impl<std::complex<double>>(config, std::nullopt, 0);
  }
  return run_training_impl<double>(config, std::nullopt, 0);
}

RunRecord resume_training(const std::string& checkpoint_path,
                          int max_iterations_override) {
  const Checkpoint ckpt = read_checkpoint(checkpoint_path);
  RunConfig config = ckpt.config;
  if (max_iterations_override > 0) {
    if (config.schedule != ScheduleKind::standard) {
      throw std::invalid_argument(
          "max-iterations override only applies to the standard schedule");
    }
    config.optimizer.max_iterations = max_iterations_override;
  }
  if (config.ansatz.complex_params) {
    return run_training_impl<std::complex<double>>(config, ckpt.parameters,
                                                   ckpt.iteration);
  }
  return run_training_impl<double>(config, ckpt.parameters, ckpt.iteration);
}

}  // namespace tcnqs
