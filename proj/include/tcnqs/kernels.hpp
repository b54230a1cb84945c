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

#ifndef TCNQS_KERNELS_HPP
#define TCNQS_KERNELS_HPP

#include <Eigen/Core>
#include <complex>

#include "tcnqs/ansatz.hpp"
#include "tcnqs/exec.hpp"
#include "tcnqs/hamiltonian.hpp"
#include "tcnqs/sampler.hpp"

namespace tcnqs {

// Per-sample network derivatives and local energies for a whole batch.
// gradients is (P, n) column-major: column i is the log-gradient of sample i.
// Thrown domain errors inside a sample are converted to NaN local energies
// and counted, so the training loop can apply its abort rule.
template <class Scalar>
struct BatchEval {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gradients;
  Eigen::VectorXcd local_energies;
  long numerical_events = 0;
};

template <class Scalar>
BatchEval<Scalar> evaluate_batch(const Ansatz<Scalar>& net,
                                 const LatticeGeometry& geom,
                                 const FieldParameters& h,
                                 const SampleBatch& batch,
                                 ExecMode mode = kDefaultExec);

// Hermitian Gram matrix of centered gradient series: out(k, l) =
// sum_i conj(oc(i, k)) * oc(i, l).  oc is (n, P) column-major so each
// parameter series is contiguous.  Parallelizes over output entries; every
// entry is a fixed-order dot product, so serial and parallel agree bitwise.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> centered_gram(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& oc,
    ExecMode mode = kDefaultExec);

}  // namespace tcnqs

#endif  // TCNQS_KERNELS_HPP
