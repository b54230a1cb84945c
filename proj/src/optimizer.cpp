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

#include "tcnqs/optimizer.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tcnqs/kernels.hpp"
#include "tcnqs/sampler.hpp"

namespace tcnqs {

void SRConfig::validate() const {
  if (learning_rate <= 0.0) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (diag_shift < 0.0) {
    throw std::invalid_argument("diagonal shift must be non-negative");
  }
  if (svd_cutoff < 0.0 || svd_cutoff >= 1.0) {
    throw std::invalid_argument("svd cutoff must lie in [0, 1)");
  }
  if (max_iterations < 1) {
    throw std::invalid_argument("max iterations must be positive");
  }
}

namespace {

template <class T>
inline constexpr bool is_complex_v = false;
template <class T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

std::vector<Eigen::Index> free_index_list(const std::vector<bool>& freeze,
                                          Eigen::Index n_params) {
  std::vector<Eigen::Index> free;
  if (freeze.empty()) {
    free.resize(n_params);
    for (Eigen::Index i = 0; i < n_params; ++i) free[i] = i;
    return free;
  }
  if (Eigen::Index(freeze.size()) != n_params) {
    throw std::invalid_argument("freeze mask length does not match parameters");
  }
  for (Eigen::Index i = 0; i < n_params; ++i) {
    if (!freeze[i]) free.push_back(i);
  }
  return free;
}

// Shared core: weights must sum to 1.  log_gradients is (P, n) column-major
// with one sample per column.
template <class Scalar>
SRQuantities<Scalar> estimate_core(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& log_gradients,
    const Eigen::VectorXcd& local_energies, const Eigen::VectorXd& weights,
    const std::vector<bool>& freeze, ExecMode mode) {
  const Eigen::Index n = log_gradients.cols();
  const Eigen::Index n_params = log_gradients.rows();
  if (n == 0) {
    throw std::invalid_argument("estimate_sr_quantities: empty batch");
  }
  if (local_energies.size() != n || weights.size() != n) {
    throw std::invalid_argument("gradients, energies and weights misaligned");
  }

  SRQuantities<Scalar> q;
  q.n_params = n_params;
  q.free_indices = free_index_list(freeze, n_params);
  q.n_samples = n;
  const Eigen::Index p = Eigen::Index(q.free_indices.size());

  q.energy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) q.energy += weights[i] * local_energies[i];

  // Centered, sqrt-weighted series per free parameter, samples contiguous.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> oc(n, p);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const Eigen::Index row = q.free_indices[k];
    Scalar m{};
    for (Eigen::Index i = 0; i < n; ++i) {
      m += weights[i] * log_gradients(row, i);
    }
    mean[k] = m;
    for (Eigen::Index i = 0; i < n; ++i) {
      oc(i, k) = std::sqrt(weights[i]) * (log_gradients(row, i) - m);
    }
  }
  q.S = centered_gram(oc, mode);

  // F_k = sum_i w_i conj(O_ik - <O_k>) (E_i - <E>); the real-parameter mode
  // keeps the real part.
  q.force.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const Eigen::Index row = q.free_indices[k];
    std::complex<double> acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> ec = local_energies[i] - q.energy;
      if constexpr (is_complex_v<Scalar>) {
        acc += weights[i] * std::conj(log_gradients(row, i) - mean[k]) * ec;
      } else {
        acc += weights[i] * (log_gradients(row, i) - mean[k]) * ec;
      }
    }
    if constexpr (is_complex_v<Scalar>) {
      q.force[k] = acc;
    } else {
      q.force[k] = acc.real();
    }
  }
  return q;
}

}  // namespace

template <class Scalar>
SRQuantities<Scalar> estimate_sr_quantities(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& log_gradients,
    const Eigen::VectorXcd& local_energies, const std::vector<bool>& freeze,
    int n_chains, ExecMode mode) {
  const Eigen::Index n = log_gradients.cols();
  if (n == 0) {
    throw std::invalid_argument("estimate_sr_quantities: empty batch");
  }
  const Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, 1.0 / double(n));
  auto q = estimate_core(log_gradients, local_energies, weights, freeze, mode);
  std::vector<double> series(n);
  for (Eigen::Index i = 0; i < n; ++i) series[i] = local_energies[i].real();
  if (n_chains >= 1 && n % n_chains == 0 && n / n_chains >= 2) {
    q.tau = integrated_autocorrelation_time(series, n_chains);
    q.energy_stderr = tau_corrected_stderr(series, n_chains);
  }
  return q;
}

template <class Scalar>
SRQuantities<Scalar> estimate_sr_quantities_weighted(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& log_gradients,
    const Eigen::VectorXcd& local_energies, const Eigen::VectorXd& weights,
    const std::vector<bool>& freeze, ExecMode mode) {
  return estimate_core(log_gradients, local_energies, weights, freeze, mode);
}

template <class Scalar>
SRUpdate<Scalar> sr_update(const SRQuantities<Scalar>& q, const SRConfig& config) {
  config.validate();
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index p = q.S.rows();

  SRUpdate<Scalar> out;
  out.delta = Vector::Zero(q.n_params);
  if (p == 0) return out;

  Matrix shifted = q.S;
  shifted.diagonal().array() += Scalar(config.diag_shift);

  Eigen::BDCSVD<Matrix> svd(shifted, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    std::ostringstream os;
    os << "sr_update: SVD failed; singular values span ["
       << svd.singularValues().minCoeff() << ", "
       << svd.singularValues().maxCoeff() << "]";
    throw std::runtime_error(os.str());
  }
  const auto& sv = svd.singularValues();
  out.sv_largest = sv.size() > 0 ? sv[0] : 0.0;
  const double cut = config.svd_cutoff * out.sv_largest;

  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cut && sv[i] > 0.0) {
      inv[i] = 1.0 / sv[i];
      out.sv_smallest_retained = sv[i];  // singular values are sorted
      ++out.rank;
    }
  }

  const Vector projected = svd.matrixU().adjoint() * q.force;
  Vector scaled(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    scaled[i] = projected[i] * Scalar(inv[i]);
  }
  const Vector delta_free = -config.learning_rate * (svd.matrixV() * scaled);

  for (std::size_t k = 0; k < q.free_indices.size(); ++k) {
    out.delta[q.free_indices[k]] = delta_free[Eigen::Index(k)];
  }
  return out;
}

template struct SRQuantities<double>;
template struct SRQuantities<std::complex<double>>;
template struct SRUpdate<double>;
template struct SRUpdate<std::complex<double>>;

template SRQuantities<double> estimate_sr_quantities<double>(
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>&,
    const Eigen::VectorXcd&, const std::vector<bool>&, int, ExecMode);
template SRQuantities<std::complex<double>>
estimate_sr_quantities<std::complex<double>>(
    const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>&,
    const Eigen::VectorXcd&, const std::vector<bool>&, int, ExecMode);

template SRQuantities<double> estimate_sr_quantities_weighted<double>(
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>&,
    const Eigen::VectorXcd&, const Eigen::VectorXd&, const std::vector<bool>&,
    ExecMode);
template SRQuantities<std::complex<double>>
estimate_sr_quantities_weighted<std::complex<double>>(
    const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>&,
    const Eigen::VectorXcd&, const Eigen::VectorXd&, const std::vector<bool>&,
    ExecMode);

template SRUpdate<double> sr_update<double>(const SRQuantities<double>&,
                                            const SRConfig&);
template SRUpdate<std::complex<double>> sr_update<std::complex<double>>(
    const SRQuantities<std::complex<double>>&, const SRConfig&);

}  // namespace tcnqs
