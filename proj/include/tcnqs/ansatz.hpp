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

#ifndef TCNQS_ANSATZ_HPP
#define TCNQS_ANSATZ_HPP

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "tcnqs/hamiltonian.hpp"
#include "tcnqs/lattice.hpp"

namespace tcnqs {

enum class AnsatzKind { combo, rpp, rbm };
enum class ParamBlock { nib, ib };

const char* ansatz_kind_name(AnsatzKind kind);
AnsatzKind ansatz_kind_from_name(const std::string& name);

// Network hyperparameters.  The non-invariant block (NIB) convolves the edge
// lattice; the invariant block (IB) convolves the plaquette grid after the
// plaquette-product nonlinearity.  The IB kernel is clamped to the largest
// useful size 2(L-1)-1 for small lattices.
struct AnsatzConfig {
  AnsatzKind kind = AnsatzKind::combo;
  bool complex_params = false;
  std::vector<int> nib_channels = {1, 2, 4};
  int nib_kernel = 3;
  std::vector<int> ib_channels = {4, 4, 4};
  int ib_kernel = 15;
  double rbm_alpha = 1.0;  // hidden units per visible unit
  std::uint64_t seed = 1;

  int effective_ib_kernel(int L) const;
  // Throws std::invalid_argument on bad channel lists, even kernels, or a
  // NIB kernel larger than the lattice allows.
  void validate(const LatticeGeometry& geom) const;
};

// Log-amplitude network over spin configurations, with analytic parameter
// derivatives.  Scalar is double (sign-free mode) or std::complex<double>.
// For complex parameters the gradient is the Wirtinger derivative with
// respect to the conjugate-free coordinate; the optimizer uses the same
// convention throughout.
//
// Parameters are immutable during an evaluation pass; concurrent readers are
// safe, mutation happens only between optimizer steps.
template <class Scalar>
class Ansatz {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  virtual ~Ansatz() = default;

  virtual AnsatzKind kind() const = 0;
  virtual const AnsatzConfig& config() const = 0;
  virtual Eigen::Index parameter_count() const = 0;
  virtual const Vector& parameters() const = 0;
  virtual void set_parameters(const Vector& p) = 0;

  virtual std::complex<double> log_amplitude(const SpinConfiguration& s) const = 0;
  // Writes parameter_count() gradient entries and returns log psi(s).
  virtual std::complex<double> log_amp_and_gradient(const SpinConfiguration& s,
                                                    Scalar* grad) const = 0;
  // Boolean mask selecting the requested block; NIB and IB partition the
  // vector.  The RBM is a single IB block and rejects ParamBlock::nib.
  virtual std::vector<bool> partition_mask(ParamBlock block) const = 0;

  void log_gradient(const SpinConfiguration& s, Scalar* grad) const {
    log_amp_and_gradient(s, grad);
  }
};

// psi_s = Omega(sigma(chi(s))): translation-equivariant edge convolutions
// with the normalized sigmoid, the plaquette-product map, then plaquette
// convolutions with ELU between hidden layers, summed to log psi.  The NIB
// starts as the identity, so the network is exactly vertex-flip invariant at
// initialization.
template <class Scalar>
class ComboNet final : public Ansatz<Scalar> {
 public:
  using Vector = typename Ansatz<Scalar>::Vector;

  ComboNet(const LatticeGeometry& geom, const AnsatzConfig& config);
  ~ComboNet() override;

  AnsatzKind kind() const override { return AnsatzKind::combo; }
  const AnsatzConfig& config() const override { return config_; }
  Eigen::Index parameter_count() const override { return params_.size(); }
  const Vector& parameters() const override { return params_; }
  void set_parameters(const Vector& p) override;
  std::complex<double> log_amplitude(const SpinConfiguration& s) const override;
  std::complex<double> log_amp_and_gradient(const SpinConfiguration& s,
                                            Scalar* grad) const override;
  std::vector<bool> partition_mask(ParamBlock block) const override;

  // NIB output grid [copy][orientation][row][col], for inspection/testing.
  std::vector<Scalar> nib_features(const SpinConfiguration& s) const;

 private:
  struct Impl;
  AnsatzConfig config_;
  Vector params_;
  std::unique_ptr<Impl> impl_;
};

// Residual-pathway variant: an invariant path (plaquette products of the raw
// input, then a plaquette convolution) plus a non-invariant edge-to-plaquette
// skip connection, summed and post-processed by the invariant stack.  All
// layers initialize from the same Gaussian as the IB.
template <class Scalar>
class RppNet final : public Ansatz<Scalar> {
 public:
  using Vector = typename Ansatz<Scalar>::Vector;

  RppNet(const LatticeGeometry& geom, const AnsatzConfig& config);
  ~RppNet() override;

  AnsatzKind kind() const override { return AnsatzKind::rpp; }
  const AnsatzConfig& config() const override { return config_; }
  Eigen::Index parameter_count() const override { return params_.size(); }
  const Vector& parameters() const override { return params_; }
  void set_parameters(const Vector& p) override;
  std::complex<double> log_amplitude(const SpinConfiguration& s) const override;
  std::complex<double> log_amp_and_gradient(const SpinConfiguration& s,
                                            Scalar* grad) const override;
  std::vector<bool> partition_mask(ParamBlock block) const override;

 private:
  struct Impl;
  AnsatzConfig config_;
  Vector params_;
  std::unique_ptr<Impl> impl_;
};

// Unsymmetrized restricted Boltzmann machine baseline:
//   log psi = sum_j a_j s_j + sum_i log cosh(b_i + sum_j W_ij s_j)
template <class Scalar>
class RbmNet final : public Ansatz<Scalar> {
 public:
  using Vector = typename Ansatz<Scalar>::Vector;

  RbmNet(const LatticeGeometry& geom, const AnsatzConfig& config);

  AnsatzKind kind() const override { return AnsatzKind::rbm; }
  const AnsatzConfig& config() const override { return config_; }
  Eigen::Index parameter_count() const override { return params_.size(); }
  const Vector& parameters() const override { return params_; }
  void set_parameters(const Vector& p) override;
  std::complex<double> log_amplitude(const SpinConfiguration& s) const override;
  std::complex<double> log_amp_and_gradient(const SpinConfiguration& s,
                                            Scalar* grad) const override;
  std::vector<bool> partition_mask(ParamBlock block) const override;

 private:
  AnsatzConfig config_;
  int n_visible_;
  int n_hidden_;
  Vector params_;
};

template <class Scalar>
std::unique_ptr<Ansatz<Scalar>> make_ansatz(const LatticeGeometry& geom,
                                            const AnsatzConfig& config);

// LogAmplitude view over a network (non-owning).
template <class Scalar>
class AnsatzLogPsi final : public LogAmplitude {
 public:
  explicit AnsatzLogPsi(const Ansatz<Scalar>& net) : net_(&net) {}
  std::complex<double> log_amplitude(const SpinConfiguration& s) const override {
    return net_->log_amplitude(s);
  }

 private:
  const Ansatz<Scalar>* net_;
};

}  // namespace tcnqs

#endif  // TCNQS_ANSATZ_HPP
