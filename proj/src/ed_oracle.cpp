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

#include "tcnqs/ed_oracle.hpp"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "tcnqs/rng.hpp"

namespace tcnqs {

std::uint64_t config_index(const SpinConfiguration& s) {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0) idx |= (std::uint64_t{1} << i);
  }
  return idx;
}

SpinConfiguration index_config(std::uint64_t index, int n_edges) {
  SpinConfiguration s(n_edges);
  for (int i = 0; i < n_edges; ++i) {
    s[i] = (index >> i) & 1 ? std::int8_t{-1} : std::int8_t{1};
  }
  return s;
}

namespace {

// Precomputed bit masks for the row-gather matvec.  Row amplitudes follow
// <s|H|s'>: diagonal from plaquette products and the Z field, -1 per vertex
// star, and -hx + i*hy*s_e per single edge flip.
struct HamiltonianAction {
  int n_edges = 0;
  double hx = 0, hy = 0, hz = 0;
  std::vector<std::uint64_t> plaquette_masks;
  std::vector<std::uint64_t> vertex_masks;

  HamiltonianAction(const LatticeGeometry& geom, const FieldParameters& h)
      : n_edges(geom.n_edges), hx(h.hx), hy(h.hy), hz(h.hz) {
    for (const auto& p : geom.plaquette_edges) {
      std::uint64_t m = 0;
      for (int e : p) m |= std::uint64_t{1} << e;
      plaquette_masks.push_back(m);
    }
    for (const auto& v : geom.vertex_edges) {
      std::uint64_t m = 0;
      for (int e : v) m |= std::uint64_t{1} << e;
      vertex_masks.push_back(m);
    }
  }

  double diagonal(std::uint64_t idx) const {
    double d = 0.0;
    for (std::uint64_t m : plaquette_masks) {
      d -= (std::popcount(idx & m) & 1) ? -1.0 : 1.0;
    }
    if (hz != 0.0) {
      d -= hz * double(n_edges - 2 * std::popcount(idx));
    }
    return d;
  }

  template <class S>
  S row_dot(std::uint64_t idx, const S* x) const {
    S acc = S(diagonal(idx)) * x[idx];
    for (std::uint64_t m : vertex_masks) acc -= x[idx ^ m];
    if (hx != 0.0 || hy != 0.0) {
      for (int e = 0; e < n_edges; ++e) {
        const double se = (idx >> e) & 1 ? -1.0 : 1.0;
        const std::uint64_t tgt = idx ^ (std::uint64_t{1} << e);
        if constexpr (std::is_same_v<S, std::complex<double>>) {
          acc += S(-hx, hy * se) * x[tgt];
        } else {
          acc += S(-hx) * x[tgt];
        }
      }
    }
    return acc;
  }
};

template <class S>
void apply_action(const HamiltonianAction& act, const S* x, S* y,
                  std::uint64_t dim, ExecMode mode) {
  if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < std::int64_t(dim); ++i) {
      y[i] = act.row_dot(std::uint64_t(i), x);
    }
  } else {
    for (std::uint64_t i = 0; i < dim; ++i) {
      y[i] = act.row_dot(i, x);
    }
  }
}

template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
struct LanczosOutcome {
  double eigenvalue = 0.0;
  VecX<S> vector;
  int matvecs = 0;
};

// Ground-state Lanczos with full reorthogonalization against the stored
// basis; restarts from the current Ritz vector once the basis hits the
// memory cap.
template <class S>
LanczosOutcome<S> lanczos_ground(const HamiltonianAction& act, std::uint64_t dim,
                                 double tol, std::uint64_t seed) {
  const std::uint64_t mem_budget = std::uint64_t{3} << 30;  // bytes of basis
  const int cap = int(std::min<std::uint64_t>(
      std::max<std::uint64_t>(mem_budget / (dim * sizeof(S)), 8), 400));
  const int max_basis = int(std::min<std::uint64_t>(cap, dim));

  VecX<S> v = VecX<S>::Zero(dim);
  Rng rng(seed);
  for (std::uint64_t i = 0; i < dim; ++i) {
    if constexpr (std::is_same_v<S, std::complex<double>>) {
      v[i] = S(rng.uniform() - 0.5, rng.uniform() - 0.5);
    } else {
      v[i] = rng.uniform() - 0.5;
    }
  }
  v.normalize();

  LanczosOutcome<S> out;
  std::vector<VecX<S>> basis;
  Eigen::VectorXd alpha, beta;
  VecX<S> w(dim);

  for (int cycle = 0; cycle < 60; ++cycle) {
    basis.clear();
    basis.push_back(v);
    alpha.resize(0);
    beta.resize(0);
    double theta = 0.0;
    Eigen::VectorXd ritz_coeff;

    for (int j = 0; j < max_basis; ++j) {
      apply_action(act, basis[j].data(), w.data(), dim, kDefaultExec);
      ++out.matvecs;
      double a = std::real(basis[j].dot(w));
      alpha.conservativeResize(j + 1);
      alpha[j] = a;
      w -= a * basis[j];
      if (j > 0) w -= double(beta[j - 1]) * basis[j - 1];
      // two-pass reorthogonalization keeps the basis orthonormal
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& u : basis) w -= u.dot(w) * u;
      }
      const double b = w.norm();

      const bool last_slot = (j + 1 == max_basis) || (std::uint64_t(j + 1) == dim);
      const bool check = last_slot || b < 1e-13 || j < 64 || (j % 8 == 0);
      double resid_est = std::numeric_limits<double>::max();
      if (check) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(alpha, beta, Eigen::ComputeEigenvectors);
        int min_ix = 0;
        es.eigenvalues().minCoeff(&min_ix);
        theta = es.eigenvalues()[min_ix];
        ritz_coeff = es.eigenvectors().col(min_ix);
        resid_est = b * std::abs(ritz_coeff[j]);
      }
      if (resid_est < tol * std::max(1.0, std::abs(theta)) || b < 1e-13 ||
          last_slot) {
        break;
      }
      beta.conservativeResize(j + 1);
      beta[j] = b;
      basis.push_back(w / b);
    }

    VecX<S> ritz = VecX<S>::Zero(dim);
    for (int i = 0; i < ritz_coeff.size(); ++i) {
      ritz += ritz_coeff[i] * basis[i];
    }
    ritz.normalize();
    apply_action(act, ritz.data(), w.data(), dim, kDefaultExec);
    ++out.matvecs;
    const double resid = (w - theta * ritz).norm();
    out.eigenvalue = theta;
    out.vector = ritz;
    if (resid < tol * std::max(1.0, std::abs(theta))) return out;
    v = ritz;
  }
  return out;
}

std::string cache_file_name(const LatticeGeometry& geom,
                            const FieldParameters& h, EdMethod method) {
  std::ostringstream os;
  os.precision(17);
  os << "ed_L" << geom.side << "_hx" << h.hx << "_hy" << h.hy << "_hz" << h.hz
     << (method == EdMethod::dense ? "_dense" : "_iterative") << ".bin";
  return os.str();
}

bool load_cached(const std::string& path, const LatticeGeometry& geom,
                 const FieldParameters& h, ExactState& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::uint64_t header_len = 0;
  char magic[6] = {};
  in.read(magic, 6);
  if (std::string(magic, 6) != "TCED1\n") return false;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  std::string header(header_len, ' ');
  in.read(header.data(), std::streamsize(header_len));
  if (!in) return false;
  auto j = nlohmann::json::parse(header, nullptr, false);
  if (j.is_discarded()) return false;
  if (j.value("L", -1) != geom.side || j.value("hx", 1e99) != h.hx ||
      j.value("hy", 1e99) != h.hy || j.value("hz", 1e99) != h.hz) {
    return false;
  }
  out.L = geom.side;
  out.h = h;
  out.energy = j.value("energy", 0.0);
  out.residual = j.value("residual", 0.0);
  const std::uint64_t dim = std::uint64_t{1} << geom.n_edges;
  out.amplitudes.resize(Eigen::Index(dim));
  in.read(reinterpret_cast<char*>(out.amplitudes.data()),
          std::streamsize(dim * sizeof(std::complex<double>)));
  return bool(in);
}

void store_cached(const std::string& path, const ExactState& state,
                  EdMethod method) {
  nlohmann::json j{{"L", state.L},
                   {"hx", state.h.hx},
                   {"hy", state.h.hy},
                   {"hz", state.h.hz},
                   {"method", method == EdMethod::dense ? "dense" : "iterative"},
                   {"energy", state.energy},
                   {"residual", state.residual}};
  const std::string header = j.dump();
  std::ofstream outf(path, std::ios::binary);
  outf.write("TCED1\n", 6);
  const std::uint64_t header_len = header.size();
  outf.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  outf.write(header.data(), std::streamsize(header_len));
  outf.write(reinterpret_cast<const char*>(state.amplitudes.data()),
             std::streamsize(std::size_t(state.amplitudes.size()) *
                             sizeof(std::complex<double>)));
}

void fix_global_phase(Eigen::VectorXcd& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const std::complex<double> a = v[imax];
  if (std::abs(a) > 0) v *= std::conj(a) / std::abs(a);
}

}  // namespace

Eigen::MatrixXcd dense_hamiltonian(const LatticeGeometry& geom,
                                   const FieldParameters& h) {
  if (geom.n_edges > 14) {
    throw std::runtime_error("dense_hamiltonian: limited to N <= 14 edges, got " +
                             std::to_string(geom.n_edges));
  }
  const std::uint64_t dim = std::uint64_t{1} << geom.n_edges;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(Eigen::Index(dim), Eigen::Index(dim));
  for (std::uint64_t col = 0; col < dim; ++col) {
    const SpinConfiguration s = index_config(col, geom.n_edges);
    for (const auto& el : connected_configurations(geom, h, s)) {
      std::uint64_t row = col;
      for (int e : el.flips) row ^= std::uint64_t{1} << e;
      m(Eigen::Index(row), Eigen::Index(col)) += el.amplitude;
    }
  }
  return m;
}

void apply_hamiltonian(const LatticeGeometry& geom, const FieldParameters& h,
                       const std::complex<double>* x, std::complex<double>* y,
                       ExecMode mode) {
  const HamiltonianAction act(geom, h);
  apply_action(act, x, y, std::uint64_t{1} << geom.n_edges, mode);
}

ExactState exact_ground_state(const LatticeGeometry& geom,
                              const FieldParameters& h, EdMethod method,
                              const std::string& cache_dir) {
  std::string path;
  ExactState state;
  if (!cache_dir.empty()) {
    std::filesystem::create_directories(cache_dir);
    path = (std::filesystem::path(cache_dir) / cache_file_name(geom, h, method))
               .string();
    if (load_cached(path, geom, h, state)) return state;
  }

  state.L = geom.side;
  state.h = h;
  const std::uint64_t dim = std::uint64_t{1} << geom.n_edges;

  if (method == EdMethod::dense) {
    if (geom.n_edges > 14) {
      throw std::runtime_error(
          "exact_ground_state: dense method limited to N <= 14 edges, got " +
          std::to_string(geom.n_edges));
    }
    const Eigen::MatrixXcd m = dense_hamiltonian(geom, h);
    if (h.hy == 0.0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.real());
      state.energy = es.eigenvalues()[0];
      state.amplitudes = es.eigenvectors().col(0).cast<std::complex<double>>();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
      state.energy = es.eigenvalues()[0];
      state.amplitudes = es.eigenvectors().col(0);
    }
  } else {
    if (geom.n_edges > 24) {
      throw std::runtime_error(
          "exact_ground_state: iterative method limited to N <= 24 edges, got " +
          std::to_string(geom.n_edges));
    }
    const HamiltonianAction act(geom, h);
    const std::uint64_t seed = stream_seed(0x1a2b3c4d, std::uint64_t(geom.side),
                                           std::uint64_t(geom.n_edges));
    if (h.hy == 0.0) {
      auto res = lanczos_ground<double>(act, dim, 1e-12, seed);
      state.energy = res.eigenvalue;
      state.amplitudes = res.vector.cast<std::complex<double>>();
    } else {
      auto res = lanczos_ground<std::complex<double>>(act, dim, 1e-12, seed);
      state.energy = res.eigenvalue;
      state.amplitudes = res.vector;
    }
  }

  fix_global_phase(state.amplitudes);
  state.amplitudes.normalize();

  Eigen::VectorXcd hpsi(state.amplitudes.size());
  apply_hamiltonian(geom, h, state.amplitudes.data(), hpsi.data());
  state.residual = (hpsi - state.energy * state.amplitudes).norm();

  if (!path.empty()) store_cached(path, state, method);
  return state;
}

std::complex<double> exact_pauli_expectation(const ExactState& state,
                                             const PauliString& string) {
  const Eigen::Index dim = state.amplitudes.size();
  std::uint64_t mask = 0;
  for (const auto& [edge, op] : string) {
    if (edge < 0 || edge >= 63 || (Eigen::Index(1) << edge) >= dim) {
      throw std::invalid_argument("exact_pauli_expectation: edge out of range");
    }
    if (op != Pauli::Z) mask |= std::uint64_t{1} << edge;
  }
  std::complex<double> acc = 0.0;
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    std::complex<double> phase = 1.0;
    for (const auto& [edge, op] : string) {
      const double se = (std::uint64_t(idx) >> edge) & 1 ? -1.0 : 1.0;
      if (op == Pauli::Z) {
        phase *= se;
      } else if (op == Pauli::Y) {
        phase *= std::complex<double>(0.0, se);
      }
    }
    const Eigen::Index tgt = Eigen::Index(std::uint64_t(idx) ^ mask);
    acc += std::conj(state.amplitudes[tgt]) * phase * state.amplitudes[idx];
  }
  return acc;
}

double exact_bffm(const ExactState& state, const LatticeGeometry& geom,
                  int perimeter, LatticeKind kind) {
  const StringSupport sup = string_support(geom, perimeter, kind);
  const Pauli op = (kind == LatticeKind::primal) ? Pauli::Z : Pauli::X;
  PauliString closed, half;
  for (int e : sup.closed_loop) closed.push_back({e, op});
  for (int e : sup.half_string) half.push_back({e, op});
  const double num = std::real(exact_pauli_expectation(state, half));
  const double den = std::real(exact_pauli_expectation(state, closed));
  return num / std::sqrt(den);
}

double exact_renyi2(const ExactState& state, const LatticeGeometry& geom,
                    const std::vector<int>& region_edges) {
  if (region_edges.empty() ||
      int(region_edges.size()) >= geom.n_edges) {
    throw std::invalid_argument(
        "exact_renyi2: region must be a non-empty proper subset");
  }
  const int na = int(region_edges.size());
  const int nb = geom.n_edges - na;
  std::vector<int> rest;
  {
    std::vector<bool> in_region(geom.n_edges, false);
    for (int e : region_edges) {
      if (e < 0 || e >= geom.n_edges || in_region[e]) {
        throw std::invalid_argument("exact_renyi2: bad region edge list");
      }
      in_region[e] = true;
    }
    for (int e = 0; e < geom.n_edges; ++e) {
      if (!in_region[e]) rest.push_back(e);
    }
  }
  // Psi(a, b) reshapes the state; rho_A = Psi Psi^dagger.
  Eigen::MatrixXcd psi(Eigen::Index(1) << na, Eigen::Index(1) << nb);
  const Eigen::Index dim = state.amplitudes.size();
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    std::uint64_t a = 0, b = 0;
    for (int i = 0; i < na; ++i) {
      if ((std::uint64_t(idx) >> region_edges[i]) & 1) a |= std::uint64_t{1} << i;
    }
    for (int i = 0; i < nb; ++i) {
      if ((std::uint64_t(idx) >> rest[i]) & 1) b |= std::uint64_t{1} << i;
    }
    psi(Eigen::Index(a), Eigen::Index(b)) = state.amplitudes[idx];
  }
  const Eigen::MatrixXcd rho = psi * psi.adjoint();
  const double purity = rho.squaredNorm();  // Tr rho^2 for Hermitian rho
  return -std::log(purity);
}

std::complex<double> ExactLogPsi::log_amplitude(const SpinConfiguration& s) const {
  const std::uint64_t idx = config_index(s);
  const std::complex<double> a = state_->amplitudes[Eigen::Index(idx)];
  return {std::log(std::abs(a)), std::arg(a)};
}

}  // namespace tcnqs
