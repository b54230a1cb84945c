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

#ifndef TCNQS_SELFCHECK_HPP
#define TCNQS_SELFCHECK_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "tcnqs/ansatz.hpp"
#include "tcnqs/optimizer.hpp"

namespace tcnqs {

// Central finite differences of log psi with respect to every parameter; for
// complex parameters this is the conjugate-free Wirtinger derivative
// (d/dRe - i d/dIm)/2.  Only touches log_amplitude, never the analytic
// backward pass, so it serves as that pass's oracle.
template <class Scalar>
Eigen::VectorXcd finite_difference_log_gradient(Ansatz<Scalar>& net,
                                                const SpinConfiguration& s,
                                                double step = 1e-6);

// Largest relative mismatch between analytic and finite-difference gradients
// over `trials` random (parameters, configuration) pairs; components with
// magnitude below `floor` are skipped.
template <class Scalar>
double max_gradient_rel_error(Ansatz<Scalar>& net, const LatticeGeometry& geom,
                              std::uint64_t seed, int trials,
                              double floor = 1e-8);

// S and F assembled from full-Hilbert-space contractions with the dense
// Hamiltonian: the linear-algebra route the sampling estimators must match.
template <class Scalar>
SRQuantities<Scalar> dense_sr_oracle(Ansatz<Scalar>& net,
                                     const LatticeGeometry& geom,
                                     const FieldParameters& h);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// The `check` suite: gradient oracle, exact-invariance property, sampler
// total-variation distance, and estimator/linear-algebra equivalence.
std::vector<CheckResult> run_selfchecks();

}  // namespace tcnqs

#endif  // TCNQS_SELFCHECK_HPP
