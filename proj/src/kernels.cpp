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

#include "tcnqs/kernels.hpp"

#include <cmath>
#include <limits>

namespace tcnqs {

namespace {

template <class T>
inline constexpr bool is_complex_v = false;
template <class T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

template <class T>
T scalar_conj(const T& x) {
  if constexpr (is_complex_v<T>) {
    return std::conj(x);
  } else {
    return x;
  }
}

template <class Scalar>
void eval_one(const Ansatz<Scalar>& net, const LatticeGeometry& geom,
              const FieldParameters& h, const SampleBatch& batch, long i,
              BatchEval<Scalar>& out, const LogAmplitude& psi) {
  const SpinConfiguration s = batch.configuration(i);
  const std::complex<double> log_psi =
      net.log_amp_and_gradient(s, out.gradients.col(i).data());
  try {
    out.local_energies[i] = local_energy(geom, h, psi, s, log_psi);
  } catch (const std::domain_error&) {
    out.local_energies[i] = std::numeric_limits<double>::quiet_NaN();
#pragma omp atomic
    ++out.numerical_events;
  }
}

}  // namespace

template <class Scalar>
BatchEval<Scalar> evaluate_batch(const Ansatz<Scalar>& net,
                                 const LatticeGeometry& geom,
                                 const FieldParameters& h,
                                 const SampleBatch& batch, ExecMode mode) {
  const long n = batch.size();
  BatchEval<Scalar> out;
  out.gradients.resize(net.parameter_count(), n);
  out.local_energies.resize(n);
  const AnsatzLogPsi<Scalar> psi(net);

  if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < n; ++i) {
      eval_one(net, geom, h, batch, i, out, psi);
    }
  } else {
    for (long i = 0; i < n; ++i) {
      eval_one(net, geom, h, batch, i, out, psi);
    }
  }
  return out;
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> centered_gram(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& oc,
    ExecMode mode) {
  const Eigen::Index n = oc.rows();
  const Eigen::Index p = oc.cols();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram(p, p);

  auto fill_column = [&](Eigen::Index l) {
    const Scalar* cl = oc.col(l).data();
    for (Eigen::Index k = 0; k <= l; ++k) {
      const Scalar* ck = oc.col(k).data();
      Scalar acc{};
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += scalar_conj(ck[i]) * cl[i];
      }
      gram(k, l) = acc;
      gram(l, k) = scalar_conj(acc);
    }
  };

  if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (Eigen::Index l = 0; l < p; ++l) {
      fill_column(l);
    }
  } else {
    for (Eigen::Index l = 0; l < p; ++l) {
      fill_column(l);
    }
  }
  return gram;
}

template struct BatchEval<double>;
template struct BatchEval<std::complex<double>>;

template BatchEval<double> evaluate_batch<double>(const Ansatz<double>&,
                                                  const LatticeGeometry&,
                                                  const FieldParameters&,
                                                  const SampleBatch&, ExecMode);
template BatchEval<std::complex<double>> evaluate_batch<std::complex<double>>(
    const Ansatz<std::complex<double>>&, const LatticeGeometry&,
    const FieldParameters&, const SampleBatch&, ExecMode);

template Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>
centered_gram<double>(
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>&, ExecMode);
template Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>
centered_gram<std::complex<double>>(
    const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>&,
    ExecMode);

}  // namespace tcnqs
