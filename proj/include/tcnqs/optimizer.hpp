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

#ifndef TCNQS_OPTIMIZER_HPP
#define TCNQS_OPTIMIZER_HPP

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "tcnqs/exec.hpp"

namespace tcnqs {

// Stochastic reconfiguration step: solve (S + d*1) dtheta = -gamma F by SVD
// pseudoinverse with a relative singular-value cutoff.
struct SRConfig {
  double learning_rate = 7e-3;
  double diag_shift = 5e-5;
  double svd_cutoff = 1e-10;
  int max_iterations = 1000;
  std::vector<bool> freeze;  // optional; true = parameter stays fixed

  void validate() const;
};

// S = <O^dag O> - <O>^dag <O> and F = <O^dag E_loc> - <O>^dag <E_loc>,
// restricted to unfrozen parameters.  In real-parameter mode S is real
// symmetric and F takes the real part of the energy covariance.
template <class Scalar>
struct SRQuantities {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> S;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> force;
  std::vector<Eigen::Index> free_indices;  // positions in the full vector
  Eigen::Index n_params = 0;               // full parameter count
  std::complex<double> energy;
  double energy_stderr = 0.0;
  double tau = 0.0;
  long n_samples = 0;
};

// Uniform-weight estimate over an MC batch; the standard error of the energy
// is tau-corrected using the chain structure.
template <class Scalar>
SRQuantities<Scalar> estimate_sr_quantities(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& log_gradients,
    const Eigen::VectorXcd& local_energies, const std::vector<bool>& freeze,
    int n_chains, ExecMode mode = kDefaultExec);

// Weighted estimate over an exhaustive enumeration (weights sum to 1); the
// standard error is zero by construction.
template <class Scalar>
SRQuantities<Scalar> estimate_sr_quantities_weighted(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& log_gradients,
    const Eigen::VectorXcd& local_energies, const Eigen::VectorXd& weights,
    const std::vector<bool>& freeze, ExecMode mode = kDefaultExec);

template <class Scalar>
struct SRUpdate {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> delta;  // full length, frozen = 0
  double sv_largest = 0.0;
  double sv_smallest_retained = 0.0;
  Eigen::Index rank = 0;
};

template <class Scalar>
SRUpdate<Scalar> sr_update(const SRQuantities<Scalar>& q, const SRConfig& config);

}  // namespace tcnqs

#endif  // TCNQS_OPTIMIZER_HPP
