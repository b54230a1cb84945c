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

#include "tcnqs/observables.hpp"

#include <cmath>

#include "tcnqs/ed_oracle.hpp"

namespace tcnqs {

WeightedEnsemble WeightedEnsemble::from_batch(const SampleBatch& batch) {
  WeightedEnsemble e;
  e.configs = batch.configs.data();
  e.count = batch.size();
  e.n_edges = batch.n_edges;
  e.weights = nullptr;
  e.n_chains = batch.n_chains;
  e.exhaustive = false;
  return e;
}

WeightedEnsemble ExhaustiveEnsemble::view() const {
  WeightedEnsemble e;
  e.configs = configs.data();
  e.count = weights.size();
  e.n_edges = n_edges;
  e.weights = weights.data();
  e.n_chains = 1;
  e.exhaustive = true;
  return e;
}

ExhaustiveEnsemble enumerate_ensemble(const LogAmplitude& psi,
                                      const LatticeGeometry& geom) {
  if (geom.n_edges > 20) {
    throw std::invalid_argument(
        "enumerate_ensemble: exhaustive enumeration limited to N <= 20");
  }
  const long dim = 1L << geom.n_edges;
  ExhaustiveEnsemble out;
  out.n_edges = geom.n_edges;
  out.configs.resize(std::size_t(dim) * geom.n_edges);
  Eigen::VectorXd log_weights(dim);
  for (long i = 0; i < dim; ++i) {
    const SpinConfiguration s = index_config(std::uint64_t(i), geom.n_edges);
    std::copy(s.begin(), s.end(), out.configs.begin() + i * geom.n_edges);
    log_weights[i] = 2.0 * psi.log_amplitude(s).real();
  }
  const double shift = log_weights.maxCoeff();
  out.weights = (log_weights.array() - shift).exp();
  out.weights /= out.weights.sum();
  return out;
}

double energy_density(std::complex<double> energy, const LatticeGeometry& geom) {
  return energy.real() / double(geom.n_edges + 1);
}

namespace {

// Weighted mean plus tau-corrected error of a complex per-sample series.
ObservableEstimate reduce_series(const std::vector<std::complex<double>>& series,
                                 const WeightedEnsemble& ens) {
  ObservableEstimate est;
  est.n_samples = ens.count;
  std::complex<double> mean = 0.0;
  for (long i = 0; i < ens.count; ++i) mean += ens.weight(i) * series[i];
  est.mean = mean;
  if (ens.exhaustive || ens.count < 2) return est;  // exact weights: no MC error

  std::vector<double> re(ens.count), im(ens.count);
  for (long i = 0; i < ens.count; ++i) {
    re[i] = series[i].real();
    im[i] = series[i].imag();
  }
  const int chains =
      (ens.count % ens.n_chains == 0 && ens.count / ens.n_chains >= 2)
          ? ens.n_chains
          : 1;
  est.tau = integrated_autocorrelation_time(re, chains);
  const double se_re = tau_corrected_stderr(re, chains);
  const double se_im = tau_corrected_stderr(im, chains);
  est.std_error = std::hypot(se_re, se_im);
  return est;
}

struct CompiledString {
  std::vector<int> flips;
  std::vector<int> z_edges;  // phase s_e
  std::vector<int> y_edges;  // phase i * s_e, also flip
};

CompiledString compile_string(const LatticeGeometry& geom,
                              const PauliString& string) {
  if (string.empty()) {
    throw std::invalid_argument("pauli string must be non-empty");
  }
  CompiledString cs;
  std::vector<bool> seen(geom.n_edges, false);
  for (const auto& [edge, op] : string) {
    if (edge < 0 || edge >= geom.n_edges) {
      throw std::invalid_argument("pauli string edge out of range");
    }
    if (seen[edge]) {
      throw std::invalid_argument("pauli string repeats an edge");
    }
    seen[edge] = true;
    switch (op) {
      case Pauli::Z: cs.z_edges.push_back(edge); break;
      case Pauli::X: cs.flips.push_back(edge); break;
      case Pauli::Y:
        cs.flips.push_back(edge);
        cs.y_edges.push_back(edge);
        break;
    }
  }
  return cs;
}

std::complex<double> string_estimator(const CompiledString& cs,
                                      const LogAmplitude& psi,
                                      SpinConfiguration& s,
                                      std::complex<double> log_psi_s) {
  std::complex<double> phase = 1.0;
  for (int e : cs.z_edges) phase *= double(s[e]);
  for (int e : cs.y_edges) phase *= std::complex<double>(0.0, double(s[e]));
  if (cs.flips.empty()) return phase;
  for (int e : cs.flips) s[e] = -s[e];
  const std::complex<double> log_ratio = psi.log_amplitude(s) - log_psi_s;
  for (int e : cs.flips) s[e] = -s[e];
  return phase * std::exp(log_ratio);
}

template <class Fn>
void for_each_sample(long count, ExecMode mode, Fn&& fn) {
  if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) fn(i);
  } else {
    for (long i = 0; i < count; ++i) fn(i);
  }
}

}  // namespace

std::vector<ObservableEstimate> pauli_strings_expectation(
    const LogAmplitude& psi, const LatticeGeometry& geom,
    const std::vector<PauliString>& strings, const WeightedEnsemble& ensemble,
    ExecMode mode) {
  if (ensemble.count == 0) {
    throw std::invalid_argument("pauli_strings_expectation: empty ensemble");
  }
  std::vector<CompiledString> compiled;
  compiled.reserve(strings.size());
  for (const auto& str : strings) compiled.push_back(compile_string(geom, str));

  std::vector<std::vector<std::complex<double>>> series(
      strings.size(), std::vector<std::complex<double>>(ensemble.count));
  for_each_sample(ensemble.count, mode, [&](long i) {
    SpinConfiguration s = ensemble.configuration(i);
    const std::complex<double> log_psi_s = psi.log_amplitude(s);
    for (std::size_t k = 0; k < compiled.size(); ++k) {
      series[k][i] = string_estimator(compiled[k], psi, s, log_psi_s);
    }
  });

  std::vector<ObservableEstimate> out;
  out.reserve(strings.size());
  for (const auto& sr : series) out.push_back(reduce_series(sr, ensemble));
  return out;
}

ObservableEstimate pauli_string_expectation(const LogAmplitude& psi,
                                            const LatticeGeometry& geom,
                                            const PauliString& string,
                                            const WeightedEnsemble& ensemble,
                                            ExecMode mode) {
  return pauli_strings_expectation(psi, geom, {string}, ensemble, mode)[0];
}

BffmResult bffm(const LogAmplitude& psi, const LatticeGeometry& geom,
                int perimeter, LatticeKind kind,
                const WeightedEnsemble& ensemble, ExecMode mode) {
  const StringSupport sup = string_support(geom, perimeter, kind);
  const Pauli op = (kind == LatticeKind::primal) ? Pauli::Z : Pauli::X;
  PauliString open_string, closed_string;
  for (int e : sup.half_string) open_string.push_back({e, op});
  for (int e : sup.closed_loop) closed_string.push_back({e, op});

  const auto est =
      pauli_strings_expectation(psi, geom, {open_string, closed_string},
                                ensemble, mode);
  BffmResult out;
  out.numerator = est[0];
  out.denominator = est[1];

  const double den = out.denominator.mean.real();
  const double den_se = out.denominator.std_error;
  if (std::abs(den) <= 3.0 * den_se || den <= 0.0) {
    throw UndefinedRatioError(
        "bffm: closed-loop expectation consistent with zero", out.numerator,
        out.denominator);
  }
  const double num = out.numerator.mean.real();
  const double num_se = out.numerator.std_error;
  out.value = num / std::sqrt(den);
  // first-order propagation through n / sqrt(d)
  const double dn = 1.0 / std::sqrt(den);
  const double dd = -0.5 * num / std::pow(den, 1.5);
  out.error = std::hypot(dn * num_se, dd * den_se);
  return out;
}

Renyi2Result renyi2_swap(const LogAmplitude& psi, const LatticeGeometry& geom,
                         const Region& region, const WeightedEnsemble& replica_a,
                         const WeightedEnsemble& replica_b, ExecMode mode) {
  if (region.edges.empty() || int(region.edges.size()) >= geom.n_edges) {
    throw std::invalid_argument("renyi2: region must be a non-empty proper subset");
  }
  std::vector<bool> seen(geom.n_edges, false);
  for (int e : region.edges) {
    if (e < 0 || e >= geom.n_edges || seen[e]) {
      throw std::invalid_argument("renyi2: bad region edge list");
    }
    seen[e] = true;
  }

  auto swap_estimator = [&](const SpinConfiguration& s1,
                            const SpinConfiguration& s2) {
    SpinConfiguration t1 = s1, t2 = s2;
    for (int e : region.edges) {
      t1[e] = s2[e];
      t2[e] = s1[e];
    }
    return std::exp(psi.log_amplitude(t1) + psi.log_amplitude(t2) -
                    psi.log_amplitude(s1) - psi.log_amplitude(s2));
  };

  Renyi2Result out;
  if (replica_a.exhaustive && replica_b.exhaustive) {
    // all pairs, weighted: the dense cross of the two enumerations
    std::complex<double> acc = 0.0;
    for (long i = 0; i < replica_a.count; ++i) {
      const SpinConfiguration s1 = replica_a.configuration(i);
      std::complex<double> inner = 0.0;
      for (long j = 0; j < replica_b.count; ++j) {
        inner += replica_b.weight(j) * swap_estimator(s1, replica_b.configuration(j));
      }
      acc += replica_a.weight(i) * inner;
    }
    out.pairs = replica_a.count * replica_b.count;
    out.swap_mean = acc.real();
    if (out.swap_mean <= 0.0) {
      throw UndefinedEntropyError("renyi2: non-positive SWAP mean",
                                  out.swap_mean, 0.0);
    }
    out.s2 = -std::log(out.swap_mean);
    return out;
  }

  if (replica_a.count != replica_b.count || replica_a.count < 2) {
    throw std::invalid_argument("renyi2: replicas must have equal size >= 2");
  }
  const long n = replica_a.count;
  std::vector<double> est(n);
  for_each_sample(n, mode, [&](long i) {
    est[i] =
        swap_estimator(replica_a.configuration(i), replica_b.configuration(i))
            .real();
  });

  double sum = 0.0;
  for (double v : est) sum += v;
  out.pairs = n;
  out.swap_mean = sum / double(n);
  {
    double var = 0.0;
    for (double v : est) var += (v - out.swap_mean) * (v - out.swap_mean);
    out.swap_stderr = std::sqrt(var / double(n - 1) / double(n));
  }
  if (out.swap_mean <= 0.0) {
    throw UndefinedEntropyError("renyi2: non-positive SWAP mean", out.swap_mean,
                                out.swap_stderr);
  }
  out.s2 = -std::log(out.swap_mean);

  // delete-one jackknife of -log(mean)
  double jk_mean = 0.0;
  std::vector<double> jk(n);
  for (long i = 0; i < n; ++i) {
    const double rest = (sum - est[i]) / double(n - 1);
    jk[i] = rest > 0.0 ? -std::log(rest) : out.s2;
    jk_mean += jk[i];
  }
  jk_mean /= double(n);
  double jk_var = 0.0;
  for (double v : jk) jk_var += (v - jk_mean) * (v - jk_mean);
  out.error = std::sqrt(jk_var * double(n - 1) / double(n));
  return out;
}

ObservableEstimate invariance_error(const LogAmplitude& psi,
                                    const LatticeGeometry& geom,
                                    const WeightedEnsemble& ensemble,
                                    ExecMode mode) {
  if (ensemble.count == 0) {
    throw std::invalid_argument("invariance_error: empty ensemble");
  }
  std::vector<std::complex<double>> series(ensemble.count);
  for_each_sample(ensemble.count, mode, [&](long i) {
    SpinConfiguration s = ensemble.configuration(i);
    const std::complex<double> base = psi.log_amplitude(s);
    double acc = 0.0;
    for (int v = 0; v < geom.n_vertices; ++v) {
      for (int e : geom.vertex_edges[v]) s[e] = -s[e];
      acc += std::abs(psi.log_amplitude(s) - base);
      for (int e : geom.vertex_edges[v]) s[e] = -s[e];
    }
    series[i] = acc / double(geom.n_vertices);
  });
  return reduce_series(series, ensemble);
}

}  // namespace tcnqs
