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

#include "tcnqs/hamiltonian.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tcnqs {

namespace {

std::string describe_configuration(const SpinConfiguration& s) {
  std::ostringstream os;
  for (auto v : s) os << (v > 0 ? '+' : '-');
  return os.str();
}

}  // namespace

std::vector<ConnectedElement> connected_configurations(
    const LatticeGeometry& geom, const FieldParameters& h,
    const SpinConfiguration& s) {
  validate_configuration(geom, s);

  std::vector<ConnectedElement> out;
  out.reserve(1 + geom.n_vertices + geom.n_edges);

  double diagonal = 0.0;
  for (const auto& p : geom.plaquette_edges) {
    diagonal -= double(s[p[0]]) * s[p[1]] * s[p[2]] * s[p[3]];
  }
  if (h.hz != 0.0) {
    long zsum = 0;
    for (auto v : s) zsum += v;
    diagonal -= h.hz * double(zsum);
  }
  out.push_back({{}, {diagonal, 0.0}});

  for (int v = 0; v < geom.n_vertices; ++v) {
    out.push_back({geom.vertex_edges[v], {-1.0, 0.0}});
  }

  if (h.hx != 0.0 || h.hy != 0.0) {
    for (int i = 0; i < geom.n_edges; ++i) {
      out.push_back({{i}, {-h.hx, -h.hy * s[i]}});
    }
  }
  return out;
}

std::complex<double> local_energy(const LatticeGeometry& geom,
                                  const FieldParameters& h,
                                  const LogAmplitude& psi,
                                  const SpinConfiguration& s) {
  return local_energy(geom, h, psi, s, psi.log_amplitude(s));
}

std::complex<double> local_energy(const LatticeGeometry& geom,
                                  const FieldParameters& h,
                                  const LogAmplitude& psi,
                                  const SpinConfiguration& s,
                                  std::complex<double> log_psi_s) {
  if (!std::isfinite(log_psi_s.real()) || !std::isfinite(log_psi_s.imag())) {
    throw std::domain_error("local_energy: non-finite log-amplitude at " +
                            describe_configuration(s));
  }

  const auto elements = connected_configurations(geom, h, s);
  std::complex<double> total = 0.0;
  SpinConfiguration target = s;
  for (const auto& el : elements) {
    if (el.flips.empty()) {
      total += std::conj(el.amplitude);
      continue;
    }
    for (int e : el.flips) target[e] = -target[e];
    const std::complex<double> log_target = psi.log_amplitude(target);
    if (!std::isfinite(log_target.real()) || !std::isfinite(log_target.imag())) {
      throw std::domain_error("local_energy: non-finite log-amplitude at " +
                              describe_configuration(target));
    }
    const std::complex<double> log_ratio = log_target - log_psi_s;
    for (int e : el.flips) target[e] = -target[e];
    // E_loc sums <s|H|s'> psi(s')/psi(s); stored amplitudes are <s'|H|s>.
    total += std::conj(el.amplitude) * std::exp(log_ratio);
  }
  return total;
}

}  // namespace tcnqs
