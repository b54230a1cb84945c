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

#ifndef TCNQS_TRAINING_HPP
#define TCNQS_TRAINING_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "tcnqs/checkpoint.hpp"
#include "tcnqs/config_file.hpp"

namespace tcnqs {

struct IterationRecord {
  int iteration = 0;        // 1-based
  double training_time = 0; // learning rate times iteration number
  double energy = 0.0;
  double energy_imag = 0.0;
  double energy_stderr = 0.0;
  double density = 0.0;
  double tau = 0.0;
  double rhat = 0.0;
  double acceptance = 0.0;
  double force_norm = 0.0;
  double sv_largest = 0.0;
  double sv_smallest = 0.0;
  long numerical_events = 0;
  bool has_invariance = false;
  double eps_tilde = 0.0;
  double eps_stderr = 0.0;
};

struct FinalReport {
  double energy = 0.0;
  double energy_stderr = 0.0;
  double density = 0.0;
  double acceptance = 0.0;
  bool has_exact_energy = false;
  double exact_variational_energy = 0.0;  // exhaustive-summation energy
  nlohmann::json observables;             // bffm / renyi / invariance entries
};

struct RunRecord {
  RunConfig config;
  std::vector<IterationRecord> iterations;
  FinalReport final_report;
  Eigen::VectorXcd final_parameters;
  std::string final_checkpoint;
  bool aborted = false;
  std::string abort_reason;
  double wall_seconds = 0.0;
};

// Full training run: per iteration sample -> gradients and local energies ->
// SR quantities -> update, with cadenced observables, checkpoints, and a
// high-statistics final pass.  Deterministic for a given master seed (per
// declared fixed reduction order).  Writes run_log.jsonl and checkpoints
// under config.out_dir.
RunRecord run_training(const RunConfig& config);

// Continues a checkpointed run; reproduces the same iteration records an
// uninterrupted run would have produced, since every iteration derives its
// random streams from (master seed, iteration).
RunRecord resume_training(const std::string& checkpoint_path,
                          int max_iterations_override = -1);

}  // namespace tcnqs

#endif  // TCNQS_TRAINING_HPP
