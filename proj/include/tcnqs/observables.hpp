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

#ifndef TCNQS_OBSERVABLES_HPP
#define TCNQS_OBSERVABLES_HPP

#include <Eigen/Core>
#include <complex>
#include <stdexcept>
#include <vector>

#include "tcnqs/exec.hpp"
#include "tcnqs/hamiltonian.hpp"
#include "tcnqs/lattice.hpp"
#include "tcnqs/sampler.hpp"

namespace tcnqs {

struct ObservableEstimate {
  std::complex<double> mean;
  double std_error = 0.0;  // tau-corrected, over both components
  double tau = 0.0;
  long n_samples = 0;

  // Hermitian diagnostics report the real part once the imaginary part is
  // statistically consistent with zero.
  bool imaginary_consistent_with_zero() const {
    return std::abs(mean.imag()) < 3.0 * std_error || std_error == 0.0;
  }
};

// Edge subset used for entropy estimates.
struct Region {
  std::vector<int> edges;
};

// Non-owning view of weighted configurations: either an MC batch (uniform
// weights with chain structure) or an exhaustive enumeration weighted by
// |psi|^2.  The same estimator formulas run over both, which is what the
// oracle-equivalence tests exercise.
struct WeightedEnsemble {
  const std::int8_t* configs = nullptr;
  long count = 0;
  int n_edges = 0;
  const double* weights = nullptr;  // null = uniform
  int n_chains = 1;
  bool exhaustive = false;

  static WeightedEnsemble from_batch(const SampleBatch& batch);
  SpinConfiguration configuration(long i) const {
    const std::int8_t* p = configs + i * n_edges;
    return SpinConfiguration(p, p + n_edges);
  }
  double weight(long i) const {
    return weights != nullptr ? weights[i] : 1.0 / double(count);
  }
};

// Owning exhaustive enumeration of every configuration, weighted by
// |psi_s|^2 (normalized).  Feasible for small N only.
struct ExhaustiveEnsemble {
  std::vector<std::int8_t> configs;
  Eigen::VectorXd weights;
  int n_edges = 0;
  WeightedEnsemble view() const;
};

ExhaustiveEnsemble enumerate_ensemble(const LogAmplitude& psi,
                                      const LatticeGeometry& geom);

class UndefinedRatioError : public std::runtime_error {
 public:
  UndefinedRatioError(const std::string& what, ObservableEstimate num,
                      ObservableEstimate den)
      : std::runtime_error(what), numerator(num), denominator(den) {}
  ObservableEstimate numerator;
  ObservableEstimate denominator;
};

class UndefinedEntropyError : public std::runtime_error {
 public:
  UndefinedEntropyError(const std::string& what, double mean, double se)
      : std::runtime_error(what), swap_mean(mean), swap_stderr(se) {}
  double swap_mean;
  double swap_stderr;
};

// Re(E) per stabilizer; the lattice has n_edges + 1 of them.
double energy_density(std::complex<double> energy, const LatticeGeometry& geom);

// <prod_j P_j> with the per-sample estimator phase(s) * psi(s^flips)/psi(s);
// Z contributes s_j to the phase, X a flip, Y a flip and phase i*s_j.
ObservableEstimate pauli_string_expectation(const LogAmplitude& psi,
                                            const LatticeGeometry& geom,
                                            const PauliString& string,
                                            const WeightedEnsemble& ensemble,
                                            ExecMode mode = kDefaultExec);

// Several strings on the same ensemble, sharing the psi(s) evaluations.
std::vector<ObservableEstimate> pauli_strings_expectation(
    const LogAmplitude& psi, const LatticeGeometry& geom,
    const std::vector<PauliString>& strings, const WeightedEnsemble& ensemble,
    ExecMode mode = kDefaultExec);

struct BffmResult {
  double value = 0.0;  // O = <open string> / sqrt(<closed loop>)
  double error = 0.0;  // first-order propagation through the ratio
  ObservableEstimate numerator;
  ObservableEstimate denominator;
};

// String order parameter; numerator and denominator share the batch.  Throws
// UndefinedRatioError when the closed-loop estimate is consistent with zero.
BffmResult bffm(const LogAmplitude& psi, const LatticeGeometry& geom,
                int perimeter, LatticeKind kind,
                const WeightedEnsemble& ensemble, ExecMode mode = kDefaultExec);

struct Renyi2Result {
  double s2 = 0.0;
  double error = 0.0;  // jackknife over replica pairs
  double swap_mean = 0.0;
  double swap_stderr = 0.0;
  long pairs = 0;
};

// SWAP-operator estimate of S2 on two independent batches of equal size,
// paired by index (all pairs when both ensembles are exhaustive).  Throws
// UndefinedEntropyError when the SWAP mean is not positive.
Renyi2Result renyi2_swap(const LogAmplitude& psi, const LatticeGeometry& geom,
                         const Region& region, const WeightedEnsemble& replica_a,
                         const WeightedEnsemble& replica_b,
                         ExecMode mode = kDefaultExec);

// epsilon-tilde: mean over samples and vertex-flip generators of
// |log psi(A_v s) - log psi(s)|.
ObservableEstimate invariance_error(const LogAmplitude& psi,
                                    const LatticeGeometry& geom,
                                    const WeightedEnsemble& ensemble,
                                    ExecMode mode = kDefaultExec);

}  // namespace tcnqs

#endif  // TCNQS_OBSERVABLES_HPP
