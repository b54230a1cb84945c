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

#ifndef TCNQS_ED_ORACLE_HPP
#define TCNQS_ED_ORACLE_HPP

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <string>

#include "tcnqs/exec.hpp"
#include "tcnqs/hamiltonian.hpp"
#include "tcnqs/lattice.hpp"

namespace tcnqs {

// Basis convention: basis index bit i is set when s_i == -1, so the all-up
// configuration is index 0.
std::uint64_t config_index(const SpinConfiguration& s);
SpinConfiguration index_config(std::uint64_t index, int n_edges);

enum class EdMethod { dense, iterative };

// Exact ground state of the mixed-field toric code on a small lattice; the
// ground-truth oracle for the Monte Carlo machinery.
struct ExactState {
  int L = 0;
  FieldParameters h;
  double energy = 0.0;
  double residual = 0.0;  // ||H psi - E0 psi||
  Eigen::VectorXcd amplitudes;  // unit norm; largest entry made real positive
};

// Dense: full matrix eigensolve (N <= 14).  Iterative: Lanczos with full
// reorthogonalization within a bounded basis plus restarts (N <= 24).  When
// cache_dir is non-empty, results are written to and read back from disk
// keyed by (L, h, method).
ExactState exact_ground_state(const LatticeGeometry& geom,
                              const FieldParameters& h, EdMethod method,
                              const std::string& cache_dir = "");

// Matrix assembled column-by-column from connected_configurations.
Eigen::MatrixXcd dense_hamiltonian(const LatticeGeometry& geom,
                                   const FieldParameters& h);

// y = H x by row gathers; parallelizes over rows.
void apply_hamiltonian(const LatticeGeometry& geom, const FieldParameters& h,
                       const std::complex<double>* x, std::complex<double>* y,
                       ExecMode mode = kDefaultExec);

// <psi| P |psi> by direct vector contraction.
std::complex<double> exact_pauli_expectation(const ExactState& state,
                                             const PauliString& string);

// Open-string over closed-loop ratio O = <prod_{C~}> / sqrt(<prod_C>).
double exact_bffm(const ExactState& state, const LatticeGeometry& geom,
                  int perimeter, LatticeKind kind);

// Renyi-2 entropy of the reduced state on the given edge subset.
double exact_renyi2(const ExactState& state, const LatticeGeometry& geom,
                    const std::vector<int>& region_edges);

// LogAmplitude view over an exact state (non-owning).
class ExactLogPsi final : public LogAmplitude {
 public:
  explicit ExactLogPsi(const ExactState& state) : state_(&state) {}
  std::complex<double> log_amplitude(const SpinConfiguration& s) const override;

 private:
  const ExactState* state_;
};

}  // namespace tcnqs

#endif  // TCNQS_ED_ORACLE_HPP
