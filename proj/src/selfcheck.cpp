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

#include "tcnqs/selfcheck.hpp"

#include <cmath>
#include <sstream>

#include "tcnqs/ed_oracle.hpp"
#include "tcnqs/observables.hpp"
#include "tcnqs/rng.hpp"
#include "tcnqs/sampler.hpp"

namespace tcnqs {

namespace {

template <class T>
inline constexpr bool is_complex_v = false;
template <class T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

SpinConfiguration random_configuration(int n_edges, Rng& rng) {
  SpinConfiguration s(n_edges);
  for (auto& v : s) v = rng.spin();
  return s;
}

}  // namespace

template <class Scalar>
Eigen::VectorXcd finite_difference_log_gradient(Ansatz<Scalar>& net,
                                                const SpinConfiguration& s,
                                                double step) {
  using Vector = typename Ansatz<Scalar>::Vector;
  const Vector saved = net.parameters();
  Eigen::VectorXcd fd(saved.size());
  Vector work = saved;

  auto eval_at = [&](Eigen::Index k, Scalar delta) {
    work[k] = saved[k] + delta;
    net.set_parameters(work);
    const std::complex<double> v = net.log_amplitude(s);
    work[k] = saved[k];
    return v;
  };

  for (Eigen::Index k = 0; k < saved.size(); ++k) {
    if constexpr (is_complex_v<Scalar>) {
      const std::complex<double> dre =
          (eval_at(k, Scalar(step, 0)) - eval_at(k, Scalar(-step, 0))) /
          (2.0 * step);
      const std::complex<double> dim =
          (eval_at(k, Scalar(0, step)) - eval_at(k, Scalar(0, -step))) /
          (2.0 * step);
      fd[k] = 0.5 * (dre - std::complex<double>(0, 1) * dim);
    } else {
      fd[k] = (eval_at(k, step) - eval_at(k, -step)) / (2.0 * step);
    }
  }
  net.set_parameters(saved);
  return fd;
}

template <class Scalar>
double max_gradient_rel_error(Ansatz<Scalar>& net, const LatticeGeometry& geom,
                              std::uint64_t seed, int trials, double floor) {
  using Vector = typename Ansatz<Scalar>::Vector;
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    // random parameter perturbation keeps the test away from the symmetric
    // initialization point
    Vector p = net.parameters();
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      if constexpr (is_complex_v<Scalar>) {
        p[k] += Scalar(0.1 * rng.normal(), 0.1 * rng.normal());
      } else {
        p[k] += 0.1 * rng.normal();
      }
    }
    net.set_parameters(p);
    const SpinConfiguration s = random_configuration(geom.n_edges, rng);

    Vector analytic(net.parameter_count());
    net.log_gradient(s, analytic.data());
    const Eigen::VectorXcd fd = finite_difference_log_gradient(net, s);
    for (Eigen::Index k = 0; k < fd.size(); ++k) {
      const std::complex<double> a = analytic[k];
      if (std::abs(a) <= floor) continue;
      worst = std::max(worst, std::abs(fd[k] - a) / std::abs(a));
    }
  }
  return worst;
}

template <class Scalar>
SRQuantities<Scalar> dense_sr_oracle(Ansatz<Scalar>& net,
                                     const LatticeGeometry& geom,
                                     const FieldParameters& h) {
  const Eigen::Index dim = Eigen::Index(1) << geom.n_edges;
  const Eigen::Index p = net.parameter_count();

  Eigen::VectorXcd psi(dim);
  Eigen::MatrixXcd dpsi(dim, p);  // column k holds O_k(s) psi_s
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grad(p);
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    const SpinConfiguration s = index_config(std::uint64_t(idx), geom.n_edges);
    const std::complex<double> lp = net.log_amp_and_gradient(s, grad.data());
    psi[idx] = std::exp(lp);
    for (Eigen::Index k = 0; k < p; ++k) {
      dpsi(idx, k) = std::complex<double>(grad[k]) * psi[idx];
    }
  }
  const Eigen::MatrixXcd ham = dense_hamiltonian(geom, h);
  const Eigen::VectorXcd hpsi = ham * psi;
  const double n2 = psi.squaredNorm();

  const Eigen::VectorXcd overlap = dpsi.adjoint() * psi;   // <d_k psi | psi>
  const Eigen::MatrixXcd gram = dpsi.adjoint() * dpsi;     // <d_k psi | d_l psi>
  const Eigen::VectorXcd fvec = dpsi.adjoint() * hpsi;     // <d_k psi | H psi>
  const std::complex<double> e = psi.dot(hpsi) / n2;

  SRQuantities<Scalar> q;
  q.n_params = p;
  q.free_indices.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) q.free_indices[k] = k;
  q.energy = e;
  q.n_samples = dim;
  Eigen::MatrixXcd s_full =
      gram / n2 - (overlap / n2) * (overlap.adjoint() / n2);
  Eigen::VectorXcd f_full = fvec / n2 - (overlap / n2) * e;
  if constexpr (is_complex_v<Scalar>) {
    q.S = s_full;
    q.force = f_full;
  } else {
    q.S = s_full.real();
    q.force = f_full.real();
  }
  return q;
}

namespace {

AnsatzConfig small_config(AnsatzKind kind, bool complex_params,
                          std::uint64_t seed) {
  AnsatzConfig cfg;
  cfg.kind = kind;
  cfg.complex_params = complex_params;
  cfg.nib_channels = {1, 2};
  cfg.nib_kernel = 3;
  cfg.ib_channels = {2, 2};
  cfg.ib_kernel = 3;
  cfg.rbm_alpha = 1.0;
  cfg.seed = seed;
  return cfg;
}

CheckResult check_gradients() {
  CheckResult out{"gradient-oracle", true, ""};
  const LatticeGeometry geom = build_lattice(2);
  double worst = 0.0;
  for (AnsatzKind kind : {AnsatzKind::combo, AnsatzKind::rpp, AnsatzKind::rbm}) {
    {
      auto net = make_ansatz<double>(geom, small_config(kind, false, 7));
      worst = std::max(worst, max_gradient_rel_error(*net, geom, 11, 10));
    }
    {
      auto net = make_ansatz<std::complex<double>>(geom,
                                                   small_config(kind, true, 7));
      worst = std::max(worst, max_gradient_rel_error(*net, geom, 13, 10));
    }
  }
  std::ostringstream os;
  os << "max relative error " << worst << " (tolerance 1e-6)";
  out.detail = os.str();
  out.passed = worst < 1e-6;
  return out;
}

CheckResult check_invariance() {
  CheckResult out{"exact-symmetry", true, ""};
  double worst = 0.0;
  {
    const LatticeGeometry geom = build_lattice(2);
    auto net = make_ansatz<double>(geom, small_config(AnsatzKind::combo, false, 3));
    for (std::uint64_t idx = 0; idx < 16; ++idx) {
      const SpinConfiguration s = index_config(idx, geom.n_edges);
      const auto base = net->log_amplitude(s);
      for (int v = 0; v < geom.n_vertices; ++v) {
        const auto flipped = net->log_amplitude(apply_vertex_flip(geom, s, v));
        worst = std::max(worst, std::abs(flipped - base));
      }
    }
  }
  {
    const LatticeGeometry geom = build_lattice(4);
    auto net = make_ansatz<double>(geom, small_config(AnsatzKind::combo, false, 3));
    Rng rng(17);
    for (int t = 0; t < 1000; ++t) {
      const SpinConfiguration s = random_configuration(geom.n_edges, rng);
      const int v = int(rng.uniform_below(geom.n_vertices));
      const auto base = net->log_amplitude(s);
      const auto flipped = net->log_amplitude(apply_vertex_flip(geom, s, v));
      worst = std::max(worst, std::abs(flipped - base));
    }
  }
  std::ostringstream os;
  os << "max |log psi(A_v s) - log psi(s)| = " << worst
     << " at identity NIB (must be exactly 0)";
  out.detail = os.str();
  out.passed = worst == 0.0;
  return out;
}

CheckResult check_sampler_tv() {
  CheckResult out{"sampler-total-variation", true, ""};
  const LatticeGeometry geom = build_lattice(2);
  const ExactState state =
      exact_ground_state(geom, {0.2, 0.0, 0.2}, EdMethod::dense);
  const ExactLogPsi psi(state);

  SamplerConfig cfg;
  cfg.n_chains = 16;
  cfg.n_burn_in = 64;
  cfg.n_subsample = 4;
  cfg.samples_per_chain = 12500;
  cfg.seed = 99;
  const SampleBatch batch = run_chains(psi, geom, cfg);

  std::vector<double> freq(16, 0.0);
  for (long i = 0; i < batch.size(); ++i) {
    freq[config_index(batch.configuration(i))] += 1.0;
  }
  double tv = 0.0;
  for (int idx = 0; idx < 16; ++idx) {
    const double exact = std::norm(state.amplitudes[idx]);
    tv += 0.5 * std::abs(freq[idx] / double(batch.size()) - exact);
  }
  std::ostringstream os;
  os << "TV distance " << tv << " over " << batch.size()
     << " samples (tolerance 0.02)";
  out.detail = os.str();
  out.passed = tv < 0.02;
  return out;
}

CheckResult check_oracle_equivalence() {
  CheckResult out{"estimator-oracle-equivalence", true, ""};
  const LatticeGeometry geom = build_lattice(2);
  const FieldParameters h{0.2, 0.0, 0.2};
  const ExactState state = exact_ground_state(geom, h, EdMethod::dense);
  const ExactLogPsi psi(state);
  const ExhaustiveEnsemble ens = enumerate_ensemble(psi, geom);
  double worst = 0.0;

  // energy: weighted local energies against the eigenvalue
  {
    std::complex<double> acc = 0.0;
    for (long i = 0; i < ens.weights.size(); ++i) {
      acc += ens.weights[i] * local_energy(geom, h, psi, ens.view().configuration(i));
    }
    worst = std::max(worst, std::abs(acc - state.energy));
  }
  // a Pauli string
  {
    const PauliString zstr{{0, Pauli::Z}, {1, Pauli::Z}};
    const auto est = pauli_string_expectation(psi, geom, zstr, ens.view());
    const auto exact = exact_pauli_expectation(state, zstr);
    worst = std::max(worst, std::abs(est.mean - exact));
  }
  // string order parameter at the smallest loop
  {
    const auto mc = bffm(psi, geom, 4, LatticeKind::primal, ens.view());
    const double exact = exact_bffm(state, geom, 4, LatticeKind::primal);
    worst = std::max(worst, std::abs(mc.value - exact));
  }
  // Renyi-2 on one edge
  {
    const Region region{{0}};
    const auto mc = renyi2_swap(psi, geom, region, ens.view(), ens.view());
    const double exact = exact_renyi2(state, geom, region.edges);
    worst = std::max(worst, std::abs(mc.s2 - exact));
  }
  // S and F for a small network
  {
    auto net = make_ansatz<double>(geom, small_config(AnsatzKind::combo, false, 5));
    Rng rng(23);
    Eigen::VectorXd p = net->parameters();
    for (Eigen::Index k = 0; k < p.size(); ++k) p[k] += 0.1 * rng.normal();
    net->set_parameters(p);
    const AnsatzLogPsi<double> npsi(*net);
    const ExhaustiveEnsemble nens = enumerate_ensemble(npsi, geom);

    Eigen::MatrixXd grads(net->parameter_count(), nens.weights.size());
    Eigen::VectorXcd eloc(nens.weights.size());
    for (long i = 0; i < nens.weights.size(); ++i) {
      const SpinConfiguration s = nens.view().configuration(i);
      net->log_amp_and_gradient(s, grads.col(i).data());
      eloc[i] = local_energy(geom, h, npsi, s);
    }
    const auto est =
        estimate_sr_quantities_weighted<double>(grads, eloc, nens.weights, {});
    const auto oracle = dense_sr_oracle(*net, geom, h);
    worst = std::max(worst, (est.S - oracle.S).cwiseAbs().maxCoeff());
    worst = std::max(worst, (est.force - oracle.force).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(est.energy - oracle.energy));
  }

  std::ostringstream os;
  os << "max deviation " << worst << " (tolerance 1e-10)";
  out.detail = os.str();
  out.passed = worst < 1e-10;
  return out;
}

}  // namespace

std::vector<CheckResult> run_selfchecks() {
  return {check_gradients(), check_invariance(), check_sampler_tv(),
          check_oracle_equivalence()};
}

template Eigen::VectorXcd finite_difference_log_gradient<double>(
    Ansatz<double>&, const SpinConfiguration&, double);
template Eigen::VectorXcd finite_difference_log_gradient<std::complex<double>>(
    Ansatz<std::complex<double>>&, const SpinConfiguration&, double);
template double max_gradient_rel_error<double>(Ansatz<double>&,
                                               const LatticeGeometry&,
                                               std::uint64_t, int, double);
template double max_gradient_rel_error<std::complex<double>>(
    Ansatz<std::complex<double>>&, const LatticeGeometry&, std::uint64_t, int,
    double);
template SRQuantities<double> dense_sr_oracle<double>(Ansatz<double>&,
                                                      const LatticeGeometry&,
                                                      const FieldParameters&);
template SRQuantities<std::complex<double>>
dense_sr_oracle<std::complex<double>>(Ansatz<std::complex<double>>&,
                                      const LatticeGeometry&,
                                      const FieldParameters&);

}  // namespace tcnqs
