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

#ifndef TCNQS_HAMILTONIAN_HPP
#define TCNQS_HAMILTONIAN_HPP

#include <complex>
#include <functional>
#include <vector>

#include "tcnqs/lattice.hpp"

namespace tcnqs {

// Mixed-field couplings, in units of the stabilizer coupling (fixed to 1):
//   H = -sum_v A_v - sum_p B_p - sum_i (hx X_i + hy Y_i + hz Z_i)
struct FieldParameters {
  double hx = 0.0;
  double hy = 0.0;
  double hz = 0.0;

  bool sign_problem() const { return hy != 0.0; }
};

// One nonzero column entry <s'|H|s>, with s' given as the set of edges that
// differ from s.  The flip set is empty (diagonal), a single edge, or the
// incident-edge set of a vertex.
struct ConnectedElement {
  std::vector<int> flips;
  std::complex<double> amplitude;
};

enum class Pauli : char { X = 'X', Y = 'Y', Z = 'Z' };

// Product of single-edge Pauli operators, e.g. a Z string along a loop.
using PauliString = std::vector<std::pair<int, Pauli>>;

// Log-amplitude callback used by samplers, estimators and local energies.
class LogAmplitude {
 public:
  virtual ~LogAmplitude() = default;
  virtual std::complex<double> log_amplitude(const SpinConfiguration& s) const = 0;
};

// Adapts a callable to the LogAmplitude interface.
class LogAmplitudeFn final : public LogAmplitude {
 public:
  using Fn = std::function<std::complex<double>(const SpinConfiguration&)>;
  explicit LogAmplitudeFn(Fn fn) : fn_(std::move(fn)) {}
  std::complex<double> log_amplitude(const SpinConfiguration& s) const override {
    return fn_(s);
  }

 private:
  Fn fn_;
};

// All nonzero <s'|H|s> for the column s.  The diagonal element comes first;
// vertex elements have amplitude -1; single-flip elements have amplitude
// -hx - i*hy*s_i (omitted when both couplings vanish).  Basis convention
// Z|s> = s|s>, <-s_i|Y_i|s_i> = i*s_i.
std::vector<ConnectedElement> connected_configurations(
    const LatticeGeometry& geom, const FieldParameters& h,
    const SpinConfiguration& s);

// E_loc(s) = sum_{s'} <s|H|s'> psi(s')/psi(s), evaluated through log-amplitude
// ratios.  Throws std::domain_error naming the configuration when a connected
// amplitude is non-finite.
std::complex<double> local_energy(const LatticeGeometry& geom,
                                  const FieldParameters& h,
                                  const LogAmplitude& psi,
                                  const SpinConfiguration& s);

// Same, reusing a precomputed log psi(s) to avoid one network call.
std::complex<double> local_energy(const LatticeGeometry& geom,
                                  const FieldParameters& h,
                                  const LogAmplitude& psi,
                                  const SpinConfiguration& s,
                                  std::complex<double> log_psi_s);

}  // namespace tcnqs

#endif  // TCNQS_HAMILTONIAN_HPP
