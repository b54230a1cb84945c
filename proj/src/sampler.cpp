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

#include "tcnqs/sampler.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tcnqs {

void SamplerConfig::validate() const {
  if (n_chains < 1 || n_burn_in < 0 || n_subsample < 1 || samples_per_chain < 1) {
    throw std::invalid_argument("sampler configuration values must be positive");
  }
}

double SampleBatch::mean_acceptance() const {
  if (acceptance.empty()) return 0.0;
  return std::accumulate(acceptance.begin(), acceptance.end(), 0.0) /
         double(acceptance.size());
}

ProposalMove propose_move(const LatticeGeometry& geom, Rng& rng) {
  const int n_interior = int(geom.interior_vertices.size());
  // vertex flip with probability N_v'/N, counting interior vertices only
  if (n_interior > 0 &&
      rng.uniform() < double(n_interior) / double(geom.n_edges)) {
    return {true, geom.interior_vertices[rng.uniform_below(n_interior)]};
  }
  return {false, int(rng.uniform_below(geom.n_edges))};
}

std::pair<SpinConfiguration, ProposalMove> propose(const LatticeGeometry& geom,
                                                   const SpinConfiguration& s,
                                                   Rng& rng) {
  validate_configuration(geom, s);
  const ProposalMove move = propose_move(geom, rng);
  SpinConfiguration next = s;
  if (move.vertex_move) {
    for (int e : geom.vertex_edges[move.index]) next[e] = -next[e];
  } else {
    next[move.index] = -next[move.index];
  }
  return {std::move(next), move};
}

namespace {

void apply_move(const LatticeGeometry& geom, const ProposalMove& move,
                SpinConfiguration& s) {
  if (move.vertex_move) {
    for (int e : geom.vertex_edges[move.index]) s[e] = -s[e];
  } else {
    s[move.index] = -s[move.index];
  }
}

}  // namespace

bool metropolis_step(const LogAmplitude& psi, const LatticeGeometry& geom,
                     SpinConfiguration& s, std::complex<double>& log_amp,
                     Rng& rng, long& numerical_events) {
  const ProposalMove move = propose_move(geom, rng);
  apply_move(geom, move, s);
  const std::complex<double> cand = psi.log_amplitude(s);

  bool accept = false;
  if (std::isnan(cand.real()) || std::isnan(cand.imag()) ||
      cand.real() == std::numeric_limits<double>::infinity()) {
    ++numerical_events;  // NaN or +inf amplitude: reject and count
  } else if (cand.real() == -std::numeric_limits<double>::infinity()) {
    // zero-amplitude target: ordinary rejection
  } else {
    const double log_ratio = 2.0 * (cand.real() - log_amp.real());
    accept = log_ratio >= 0.0 || rng.uniform() < std::exp(log_ratio);
  }

  if (accept) {
    log_amp = cand;
  } else {
    apply_move(geom, move, s);  // proposals are involutions
  }
  return accept;
}

namespace {

void run_one_chain(const LogAmplitude& psi, const LatticeGeometry& geom,
                   const SamplerConfig& config, int chain, SampleBatch& batch) {
  Rng rng(stream_seed(config.seed, 0xc0de, std::uint64_t(chain)));
  SpinConfiguration s(geom.n_edges);
  for (auto& v : s) v = rng.spin();
  std::complex<double> log_amp = psi.log_amplitude(s);
  // a zero-amplitude start would pin the chain; redraw a few times if needed
  for (int tries = 0; tries < 1024 && !std::isfinite(log_amp.real()); ++tries) {
    for (auto& v : s) v = rng.spin();
    log_amp = psi.log_amplitude(s);
  }

  long accepted = 0, attempted = 0, events = 0;
  const long retained_total = config.n_burn_in + config.samples_per_chain;
  for (long k = 0; k < retained_total; ++k) {
    for (int u = 0; u < config.n_subsample; ++u) {
      accepted += metropolis_step(psi, geom, s, log_amp, rng, events);
      ++attempted;
    }
    const long keep = k - config.n_burn_in;
    if (keep >= 0) {
      std::int8_t* dst =
          batch.configs.data() +
          (long(chain) * config.samples_per_chain + keep) * geom.n_edges;
      std::copy(s.begin(), s.end(), dst);
      batch.log_amps[long(chain) * config.samples_per_chain + keep] = log_amp;
    }
  }
  batch.acceptance[chain] = attempted > 0 ? double(accepted) / double(attempted) : 0.0;
#pragma omp atomic
  batch.numerical_events += events;
}

}  // namespace

SampleBatch run_chains(const LogAmplitude& psi, const LatticeGeometry& geom,
                       const SamplerConfig& config, ExecMode mode) {
  config.validate();
  SampleBatch batch;
  batch.n_chains = config.n_chains;
  batch.samples_per_chain = config.samples_per_chain;
  batch.n_edges = geom.n_edges;
  batch.configs.assign(std::size_t(batch.size()) * geom.n_edges, 0);
  batch.log_amps.assign(std::size_t(batch.size()), {});
  batch.acceptance.assign(config.n_chains, 0.0);

  if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int chain = 0; chain < config.n_chains; ++chain) {
      run_one_chain(psi, geom, config, chain, batch);
    }
  } else {
    for (int chain = 0; chain < config.n_chains; ++chain) {
      run_one_chain(psi, geom, config, chain, batch);
    }
  }
  return batch;
}

namespace {

// Mean autocorrelation over chains, each centered on its own mean, normalized
// by the pooled variance.
std::vector<double> chain_averaged_autocorrelation(
    const std::vector<double>& series, int n_chains, int max_lag) {
  const long n = long(series.size()) / n_chains;
  std::vector<double> means(n_chains, 0.0);
  double var = 0.0;
  for (int c = 0; c < n_chains; ++c) {
    const double* x = series.data() + long(c) * n;
    for (long t = 0; t < n; ++t) means[c] += x[t];
    means[c] /= double(n);
    for (long t = 0; t < n; ++t) {
      var += (x[t] - means[c]) * (x[t] - means[c]);
    }
  }
  var /= double(long(n_chains) * n);
  std::vector<double> rho(max_lag + 1, 0.0);
  rho[0] = 1.0;
  if (var <= 0.0) return rho;
  for (int lag = 1; lag <= max_lag; ++lag) {
    double acc = 0.0;
    long count = 0;
    for (int c = 0; c < n_chains; ++c) {
      const double* x = series.data() + long(c) * n;
      for (long t = 0; t + lag < n; ++t) {
        acc += (x[t] - means[c]) * (x[t + lag] - means[c]);
      }
      count += n - lag;
    }
    rho[lag] = acc / (double(count) * var);
  }
  return rho;
}

bool zero_variance(const std::vector<double>& series) {
  for (double v : series) {
    if (v != series.front()) return false;
  }
  return true;
}

}  // namespace

double integrated_autocorrelation_time(const std::vector<double>& series,
                                       int n_chains) {
  if (n_chains < 1 || series.empty() || series.size() % std::size_t(n_chains)) {
    throw std::invalid_argument("series length must be a multiple of n_chains");
  }
  if (zero_variance(series)) return 0.0;
  const long n = long(series.size()) / n_chains;
  const int max_lag = int(std::min<long>(n - 1, 1000));
  const auto rho = chain_averaged_autocorrelation(series, n_chains, max_lag);
  // Sokal's adaptive window with tau defined as sum_{t>=1} rho(t):
  // stop at the first W >= 5 * (1 + 2 * sum_{t<=W} rho).
  double tau = 0.0;
  for (int w = 1; w <= max_lag; ++w) {
    tau += rho[w];
    if (double(w) >= 5.0 * (1.0 + 2.0 * tau)) break;
  }
  return std::max(tau, 0.0);
}

double tau_corrected_stderr(const std::vector<double>& series, int n_chains) {
  if (zero_variance(series)) return 0.0;
  const long n = long(series.size());
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= double(n);
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= double(n - 1);
  const double tau = integrated_autocorrelation_time(series, n_chains);
  return std::sqrt(var * (1.0 + 2.0 * tau) / double(n));
}

ChainDiagnostics diagnostics(const SampleBatch& batch,
                             const std::vector<double>& series) {
  if (batch.n_chains < 2 || batch.samples_per_chain < 4) {
    throw std::invalid_argument(
        "diagnostics needs >= 2 chains with >= 4 retained samples");
  }
  if (series.size() != std::size_t(batch.size())) {
    throw std::invalid_argument("series length does not match batch");
  }
  ChainDiagnostics out;
  out.mean_acceptance = batch.mean_acceptance();
  if (zero_variance(series)) {
    out.degenerate = true;
    out.tau = 0.0;
    out.rhat = 1.0;
    return out;
  }
  out.tau = integrated_autocorrelation_time(series, batch.n_chains);

  // split-Rhat: halve every chain, then the usual between/within ratio
  const long half = batch.samples_per_chain / 2;
  const int groups = batch.n_chains * 2;
  std::vector<double> gmean(groups, 0.0), gvar(groups, 0.0);
  for (int c = 0; c < batch.n_chains; ++c) {
    for (int g = 0; g < 2; ++g) {
      const double* x = series.data() + long(c) * batch.samples_per_chain + g * half;
      double m = 0.0;
      for (long t = 0; t < half; ++t) m += x[t];
      m /= double(half);
      double v = 0.0;
      for (long t = 0; t < half; ++t) v += (x[t] - m) * (x[t] - m);
      v /= double(half - 1);
      gmean[c * 2 + g] = m;
      gvar[c * 2 + g] = v;
    }
  }
  double grand = 0.0;
  for (double m : gmean) grand += m;
  grand /= double(groups);
  double between = 0.0;
  for (double m : gmean) between += (m - grand) * (m - grand);
  between *= double(half) / double(groups - 1);
  double within = 0.0;
  for (double v : gvar) within += v;
  within /= double(groups);
  if (within <= 0.0) {
    out.rhat = 1.0;
    out.degenerate = true;
    return out;
  }
  const double var_plus =
      (double(half - 1) / double(half)) * within + between / double(half);
  out.rhat = std::sqrt(var_plus / within);
  return out;
}

}  // namespace tcnqs
