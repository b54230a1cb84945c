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

#ifndef TCNQS_SAMPLER_HPP
#define TCNQS_SAMPLER_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "tcnqs/exec.hpp"
#include "tcnqs/hamiltonian.hpp"
#include "tcnqs/lattice.hpp"
#include "tcnqs/rng.hpp"

namespace tcnqs {

struct SamplerConfig {
  int n_chains = 256;
  int n_burn_in = 8;        // retained samples discarded per chain
  int n_subsample = 16;     // proposals between retained samples
  int samples_per_chain = 8;
  std::uint64_t seed = 0;

  long total_samples() const { return long(n_chains) * samples_per_chain; }
  void validate() const;
};

// Metropolis-Hastings samples of |psi|^2 with chain provenance.
struct SampleBatch {
  int n_chains = 0;
  int samples_per_chain = 0;
  int n_edges = 0;
  std::vector<std::int8_t> configs;  // [chain][sample][edge]
  std::vector<std::complex<double>> log_amps;  // [chain][sample]
  std::vector<double> acceptance;              // per chain
  long numerical_events = 0;

  long size() const { return long(n_chains) * samples_per_chain; }
  const std::int8_t* config(long flat_index) const {
    return configs.data() + flat_index * n_edges;
  }
  SpinConfiguration configuration(long flat_index) const {
    const std::int8_t* p = config(flat_index);
    return SpinConfiguration(p, p + n_edges);
  }
  double mean_acceptance() const;
};

struct ProposalMove {
  bool vertex_move = false;
  int index = 0;  // vertex index or edge index
};

// Vertex-or-spin update rule: with probability N_v'/N (N_v' interior
// vertices) flip the 4 edges around a uniform interior vertex, otherwise
// flip one uniform edge.  Symmetric: q(s'|s) = q(s|s').
ProposalMove propose_move(const LatticeGeometry& geom, Rng& rng);

// Contract form of the proposal: returns the proposed configuration.
std::pair<SpinConfiguration, ProposalMove> propose(const LatticeGeometry& geom,
                                                   const SpinConfiguration& s,
                                                   Rng& rng);

// One Metropolis step in place; accepts with min(1, exp(2 Re dlog psi)).
// log_amp carries log psi(s) across steps.  A NaN/+inf candidate amplitude
// is rejected and counted in numerical_events; -inf (zero amplitude) is an
// ordinary rejection.
bool metropolis_step(const LogAmplitude& psi, const LatticeGeometry& geom,
                     SpinConfiguration& s, std::complex<double>& log_amp,
                     Rng& rng, long& numerical_events);

// Runs config.n_chains independent chains from uniform random starts; each
// retained sample is separated by n_subsample proposals and the first
// n_burn_in retained samples are discarded.  Deterministic for a given
// (seed, config, psi); chains parallelize with read-only access to psi.
SampleBatch run_chains(const LogAmplitude& psi, const LatticeGeometry& geom,
                       const SamplerConfig& config,
                       ExecMode mode = kDefaultExec);

struct ChainDiagnostics {
  double tau = 0.0;   // integrated autocorrelation time, sum_{t>=1} rho(t)
  double rhat = 1.0;  // split-Rhat over half chains
  double mean_acceptance = 0.0;
  bool degenerate = false;  // zero-variance series
};

// Diagnostics of a per-sample scalar series aligned with the batch layout
// [chain][sample].  Needs >= 2 chains and >= 4 retained samples per chain.
ChainDiagnostics diagnostics(const SampleBatch& batch,
                             const std::vector<double>& series);

// tau on one or more equal-length chains; adaptive (Sokal) windowing.
double integrated_autocorrelation_time(const std::vector<double>& series,
                                       int n_chains);

// Standard error of the mean of an MC series, inflated by 1 + 2*tau.
double tau_corrected_stderr(const std::vector<double>& series, int n_chains);

}  // namespace tcnqs

#endif  // TCNQS_SAMPLER_HPP
