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

#include "tcnqs/ansatz.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tcnqs/rng.hpp"

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

template <class T>
std::complex<double> widen(const T& x) {
  if constexpr (is_complex_v<T>) {
    return x;
  } else {
    return {x, 0.0};
  }
}

inline const double kTanhHalf = std::tanh(0.5);

// Normalized sigmoid tanh(x/2)/tanh(1/2); maps +-1 to +-1 exactly, which is
// what keeps the identity-initialized NIB an exact identity on spin inputs.
inline double nsig(double x) { return std::tanh(0.5 * x) / kTanhHalf; }
inline double nsig_prime(double x) {
  const double t = std::tanh(0.5 * x);
  return (1.0 - t * t) / (2.0 * kTanhHalf);
}
inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_prime(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

// Split nonlinearity: f applied to real and imaginary parts separately.
template <class S, double (*F)(double)>
S split_apply(const S& z) {
  if constexpr (is_complex_v<S>) {
    return {F(z.real()), F(z.imag())};
  } else {
    return F(z);
  }
}

// Wirtinger factors of a split nonlinearity: d/dz = alpha, d/dzbar = beta.
// Both are real; beta vanishes in the real case.
struct ActDeriv {
  double alpha;
  double beta;
};

template <class S, double (*Fp)(double)>
ActDeriv act_deriv(const S& z) {
  if constexpr (is_complex_v<S>) {
    const double dr = Fp(z.real());
    const double di = Fp(z.imag());
    return {0.5 * (dr + di), 0.5 * (dr - di)};
  } else {
    return {Fp(z), 0.0};
  }
}

// Adjoint pair through a split activation.  lam tracks d(out)/d(z), mu tracks
// d(out)/d(zbar); mu is identically zero in the real case and is not touched.
template <class S>
void activation_backward(const ActDeriv& d, S& lam, S& mu) {
  if constexpr (is_complex_v<S>) {
    const S l = lam, m = mu;
    lam = l * d.alpha + m * d.beta;
    mu = l * d.beta + m * d.alpha;
  } else {
    lam *= d.alpha;
    (void)mu;
  }
}

struct ConvSpec {
  int in_ch = 0;
  int out_ch = 0;
  int kernel = 1;
  int radius = 0;
  Eigen::Index w_off = 0;
  Eigen::Index b_off = 0;
  bool biased = true;
  Eigen::Index weight_count_edge() const {
    return Eigen::Index(out_ch) * 2 * in_ch * 2 * kernel * kernel;
  }
  Eigen::Index weight_count_plaq() const {
    return Eigen::Index(out_ch) * in_ch * kernel * kernel;
  }
};

// --- edge-grid layout: [copy][orientation][row][col], orientation 0 = H, 1 = V

inline int egrid(int L, int copy, int o, int r, int c) {
  return ((copy * 2 + o) * L + r) * L + c;
}

inline bool edge_valid(int L, int o, int r, int c) {
  return (o == 0) ? (c < L - 1) : (r < L - 1);
}

inline Eigen::Index nib_w(const ConvSpec& sp, int a, int o, int b, int p,
                          int ky, int kx) {
  return sp.w_off +
         ((((Eigen::Index(a) * 2 + o) * sp.in_ch + b) * 2 + p) * sp.kernel + ky) *
             sp.kernel +
         kx;
}

inline Eigen::Index nib_b(const ConvSpec& sp, int a, int o) {
  return sp.b_off + Eigen::Index(a) * 2 + o;
}

// --- plaquette-grid layout: [channel][row][col] on an (L-1) x (L-1) grid

inline int pgrid(int m, int ch, int r, int c) { return (ch * m + r) * m + c; }

inline Eigen::Index ib_w(const ConvSpec& sp, int w, int q, int ky, int kx) {
  return sp.w_off + ((Eigen::Index(w) * sp.in_ch + q) * sp.kernel + ky) * sp.kernel + kx;
}

inline Eigen::Index ib_b(const ConvSpec& sp, int w) { return sp.b_off + w; }

// Edge-lattice convolution: for every output copy/orientation the kernel
// window gathers both orientations of every input copy, with zero padding at
// the open boundary.  Weights depend on the relative position and the
// orientation pair and are shared across cells (translation equivariance).
template <class S>
void nib_conv_forward(const ConvSpec& sp, int L, const S* params, const S* in,
                      S* pre) {
  const int K = sp.kernel, R = sp.radius;
  for (int a = 0; a < sp.out_ch; ++a) {
    for (int o = 0; o < 2; ++o) {
      for (int r = 0; r < L; ++r) {
        for (int c = 0; c < L; ++c) {
          if (!edge_valid(L, o, r, c)) continue;
          S z = params[nib_b(sp, a, o)];
          for (int b = 0; b < sp.in_ch; ++b) {
            for (int p = 0; p < 2; ++p) {
              for (int ky = 0; ky < K; ++ky) {
                const int rr = r + ky - R;
                if (rr < 0 || rr >= L) continue;
                for (int kx = 0; kx < K; ++kx) {
                  const int cc = c + kx - R;
                  if (cc < 0 || cc >= L) continue;
                  if (!edge_valid(L, p, rr, cc)) continue;
                  z += params[nib_w(sp, a, o, b, p, ky, kx)] *
                       in[egrid(L, b, p, rr, cc)];
                }
              }
            }
          }
          pre[egrid(L, a, o, r, c)] = z;
        }
      }
    }
  }
}

// Gradient and input-adjoint pass of the edge convolution.  grad accumulates
// conjugate-free Wirtinger derivatives; lam_in/mu_in (optional) accumulate
// the adjoint pair of the layer input.
template <class S>
void nib_conv_backward(const ConvSpec& sp, int L, const S* params,
                       const S* in_act, const S* lam_pre, const S* mu_pre,
                       S* grad, S* lam_in, S* mu_in) {
  const int K = sp.kernel, R = sp.radius;
  constexpr bool cplx = is_complex_v<S>;
  for (int a = 0; a < sp.out_ch; ++a) {
    for (int o = 0; o < 2; ++o) {
      for (int r = 0; r < L; ++r) {
        for (int c = 0; c < L; ++c) {
          if (!edge_valid(L, o, r, c)) continue;
          const S lp = lam_pre[egrid(L, a, o, r, c)];
          S mp{};
          if constexpr (cplx) mp = mu_pre[egrid(L, a, o, r, c)];
          grad[nib_b(sp, a, o)] += lp;
          for (int b = 0; b < sp.in_ch; ++b) {
            for (int p = 0; p < 2; ++p) {
              for (int ky = 0; ky < K; ++ky) {
                const int rr = r + ky - R;
                if (rr < 0 || rr >= L) continue;
                for (int kx = 0; kx < K; ++kx) {
                  const int cc = c + kx - R;
                  if (cc < 0 || cc >= L) continue;
                  if (!edge_valid(L, p, rr, cc)) continue;
                  const Eigen::Index w = nib_w(sp, a, o, b, p, ky, kx);
                  const int i = egrid(L, b, p, rr, cc);
                  grad[w] += lp * in_act[i];
                  if (lam_in != nullptr) {
                    lam_in[i] += lp * params[w];
                    if constexpr (cplx) mu_in[i] += mp * scalar_conj(params[w]);
                  }
                }
              }
            }
          }
        }
      }
    }
  }
}

// Plaquette-grid convolution with zero padding.
template <class S>
void ib_conv_forward(const ConvSpec& sp, int m, const S* params, const S* in,
                     S* pre) {
  const int K = sp.kernel, R = sp.radius;
  for (int w = 0; w < sp.out_ch; ++w) {
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        S z = sp.biased ? params[ib_b(sp, w)] : S{};
        for (int q = 0; q < sp.in_ch; ++q) {
          for (int ky = 0; ky < K; ++ky) {
            const int rr = r + ky - R;
            if (rr < 0 || rr >= m) continue;
            for (int kx = 0; kx < K; ++kx) {
              const int cc = c + kx - R;
              if (cc < 0 || cc >= m) continue;
              z += params[ib_w(sp, w, q, ky, kx)] * in[pgrid(m, q, rr, cc)];
            }
          }
        }
        pre[pgrid(m, w, r, c)] = z;
      }
    }
  }
}

template <class S>
void ib_conv_backward(const ConvSpec& sp, int m, const S* params,
                      const S* in_act, const S* lam_pre, const S* mu_pre,
                      S* grad, S* lam_in, S* mu_in) {
  const int K = sp.kernel, R = sp.radius;
  constexpr bool cplx = is_complex_v<S>;
  for (int w = 0; w < sp.out_ch; ++w) {
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        const S lp = lam_pre[pgrid(m, w, r, c)];
        S mp{};
        if constexpr (cplx) mp = mu_pre[pgrid(m, w, r, c)];
        if (sp.biased) grad[ib_b(sp, w)] += lp;
        for (int q = 0; q < sp.in_ch; ++q) {
          for (int ky = 0; ky < K; ++ky) {
            const int rr = r + ky - R;
            if (rr < 0 || rr >= m) continue;
            for (int kx = 0; kx < K; ++kx) {
              const int cc = c + kx - R;
              if (cc < 0 || cc >= m) continue;
              const Eigen::Index w_ix = ib_w(sp, w, q, ky, kx);
              const int i = pgrid(m, q, rr, cc);
              grad[w_ix] += lp * in_act[i];
              if (lam_in != nullptr) {
                lam_in[i] += lp * params[w_ix];
                if constexpr (cplx) mu_in[i] += mp * scalar_conj(params[w_ix]);
              }
            }
          }
        }
      }
    }
  }
}

// Plaquette products of an edge grid, one output channel per input copy.
// Commutes with vertex flips: every plaquette shares 0 or 2 edges with any
// vertex star.
template <class S>
void sigma_forward(int L, int copies, const S* edge, S* plaq) {
  const int m = L - 1;
  for (int a = 0; a < copies; ++a) {
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        plaq[pgrid(m, a, r, c)] = edge[egrid(L, a, 0, r, c)] *
                                  edge[egrid(L, a, 0, r + 1, c)] *
                                  edge[egrid(L, a, 1, r, c)] *
                                  edge[egrid(L, a, 1, r, c + 1)];
      }
    }
  }
}

template <class S>
void sigma_backward(int L, int copies, const S* edge, const S* lam_plaq,
                    const S* mu_plaq, S* lam_edge, S* mu_edge) {
  const int m = L - 1;
  constexpr bool cplx = is_complex_v<S>;
  for (int a = 0; a < copies; ++a) {
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        const int i1 = egrid(L, a, 0, r, c);
        const int i2 = egrid(L, a, 0, r + 1, c);
        const int i3 = egrid(L, a, 1, r, c);
        const int i4 = egrid(L, a, 1, r, c + 1);
        const S f1 = edge[i1], f2 = edge[i2], f3 = edge[i3], f4 = edge[i4];
        const S p12 = f1 * f2, p34 = f3 * f4;
        const S lp = lam_plaq[pgrid(m, a, r, c)];
        lam_edge[i1] += lp * (f2 * p34);
        lam_edge[i2] += lp * (f1 * p34);
        lam_edge[i3] += lp * (p12 * f4);
        lam_edge[i4] += lp * (p12 * f3);
        if constexpr (cplx) {
          const S mp = mu_plaq[pgrid(m, a, r, c)];
          mu_edge[i1] += mp * scalar_conj(f2 * p34);
          mu_edge[i2] += mp * scalar_conj(f1 * p34);
          mu_edge[i3] += mp * scalar_conj(p12 * f4);
          mu_edge[i4] += mp * scalar_conj(p12 * f3);
        }
      }
    }
  }
}

// Plaquette products of the raw configuration (the B_p values).
template <class S>
void sigma_raw(const LatticeGeometry& geom, const SpinConfiguration& s, S* plaq) {
  const int m = geom.side - 1;
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      const auto& e = geom.plaquette_edges[geom.plaquette_index(r, c)];
      plaq[pgrid(m, 0, r, c)] =
          S(double(s[e[0]]) * s[e[1]] * s[e[2]] * s[e[3]]);
    }
  }
}

template <class S>
void load_edge_input(const LatticeGeometry& geom, const SpinConfiguration& s,
                     S* x0) {
  const int L = geom.side;
  std::fill(x0, x0 + 2 * L * L, S{});
  for (int r = 0; r < L; ++r) {
    for (int c = 0; c < L - 1; ++c) {
      x0[egrid(L, 0, 0, r, c)] = S(double(s[geom.horizontal_index(r, c)]));
    }
  }
  for (int r = 0; r < L - 1; ++r) {
    for (int c = 0; c < L; ++c) {
      x0[egrid(L, 0, 1, r, c)] = S(double(s[geom.vertical_index(r, c)]));
    }
  }
}

template <class S>
void draw_gaussian(Rng& rng, double stddev, S* out, Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i) {
    if constexpr (is_complex_v<S>) {
      const double re = stddev * rng.normal();
      const double im = stddev * rng.normal();
      out[i] = S{re, im};
    } else {
      out[i] = stddev * rng.normal();
    }
  }
}

void check_input(const LatticeGeometry& geom, const SpinConfiguration& s) {
  if (static_cast<int>(s.size()) != geom.n_edges) {
    throw std::invalid_argument("configuration length does not match lattice");
  }
}

}  // namespace

const char* ansatz_kind_name(AnsatzKind kind) {
  switch (kind) {
    case AnsatzKind::combo: return "combo";
    case AnsatzKind::rpp: return "rpp";
    case AnsatzKind::rbm: return "rbm";
  }
  return "?";
}

AnsatzKind ansatz_kind_from_name(const std::string& name) {
  if (name == "combo") return AnsatzKind::combo;
  if (name == "rpp") return AnsatzKind::rpp;
  if (name == "rbm") return AnsatzKind::rbm;
  throw std::invalid_argument("unknown ansatz kind '" + name + "'");
}

int AnsatzConfig::effective_ib_kernel(int L) const {
  const int cap = 2 * (L - 1) - 1;
  return std::max(1, std::min(ib_kernel, cap));
}

void AnsatzConfig::validate(const LatticeGeometry& geom) const {
  auto check_channels = [](const std::vector<int>& ch, const char* name) {
    if (ch.empty()) {
      throw std::invalid_argument(std::string(name) + " channel list is empty");
    }
    for (int c : ch) {
      if (c < 1) {
        throw std::invalid_argument(std::string(name) +
                                    " channel width must be >= 1");
      }
    }
  };
  if (nib_kernel < 1 || nib_kernel % 2 == 0 || ib_kernel < 1 ||
      ib_kernel % 2 == 0) {
    throw std::invalid_argument("kernel sizes must be odd and positive");
  }
  if (kind == AnsatzKind::rbm) {
    if (rbm_alpha <= 0.0) {
      throw std::invalid_argument("rbm hidden-unit density must be positive");
    }
    return;
  }
  check_channels(nib_channels, "NIB");
  check_channels(ib_channels, "IB");
  if (nib_kernel > 2 * geom.side - 1) {
    throw std::invalid_argument(
        "NIB kernel size " + std::to_string(nib_kernel) +
        " is larger than the lattice allows (max " +
        std::to_string(2 * geom.side - 1) + ")");
  }
}

// ---------------------------------------------------------------------------
// ComboNet

template <class Scalar>
struct ComboNet<Scalar>::Impl {
  LatticeGeometry geom;
  int L = 0;
  int m = 0;
  std::vector<ConvSpec> nib;
  std::vector<ConvSpec> ib;
  Eigen::Index nib_count = 0;
  Eigen::Index total = 0;

  struct Scratch {
    std::vector<Scalar> x0;
    std::vector<std::vector<Scalar>> nib_pre, nib_act;
    std::vector<Scalar> sigma;
    std::vector<std::vector<Scalar>> ib_pre, ib_act;
    std::vector<std::vector<Scalar>> lam_ib, mu_ib;
    std::vector<Scalar> lam_sigma, mu_sigma;
    std::vector<std::vector<Scalar>> lam_nib, mu_nib;
  };

  static Scratch& scratch() {
    static thread_local Scratch s;
    return s;
  }

  void shape_scratch(Scratch& s, bool backward) const {
    const std::size_t egridsz = std::size_t(2) * L * L;
    s.x0.assign(egridsz, Scalar{});
    s.nib_pre.resize(nib.size());
    s.nib_act.resize(nib.size());
    for (std::size_t t = 0; t < nib.size(); ++t) {
      s.nib_pre[t].assign(std::size_t(nib[t].out_ch) * egridsz, Scalar{});
      s.nib_act[t].assign(std::size_t(nib[t].out_ch) * egridsz, Scalar{});
    }
    const std::size_t pgridsz = std::size_t(m) * m;
    s.sigma.assign(std::size_t(nib.back().out_ch) * pgridsz, Scalar{});
    s.ib_pre.resize(ib.size());
    s.ib_act.resize(ib.size());
    for (std::size_t u = 0; u < ib.size(); ++u) {
      s.ib_pre[u].assign(std::size_t(ib[u].out_ch) * pgridsz, Scalar{});
      s.ib_act[u].assign(std::size_t(ib[u].out_ch) * pgridsz, Scalar{});
    }
    if (!backward) return;
    s.lam_ib.resize(ib.size());
    s.mu_ib.resize(ib.size());
    for (std::size_t u = 0; u < ib.size(); ++u) {
      s.lam_ib[u].assign(std::size_t(ib[u].out_ch) * pgridsz, Scalar{});
      s.mu_ib[u].assign(std::size_t(ib[u].out_ch) * pgridsz, Scalar{});
    }
    s.lam_sigma.assign(s.sigma.size(), Scalar{});
    s.mu_sigma.assign(s.sigma.size(), Scalar{});
    s.lam_nib.resize(nib.size());
    s.mu_nib.resize(nib.size());
    for (std::size_t t = 0; t < nib.size(); ++t) {
      s.lam_nib[t].assign(s.nib_act[t].size(), Scalar{});
      s.mu_nib[t].assign(s.nib_act[t].size(), Scalar{});
    }
  }

  Scalar forward(const Scalar* params, const SpinConfiguration& s,
                 Scratch& ws) const {
    load_edge_input(geom, s, ws.x0.data());
    const Scalar* in = ws.x0.data();
    for (std::size_t t = 0; t < nib.size(); ++t) {
      nib_conv_forward(nib[t], L, params, in, ws.nib_pre[t].data());
      auto& act = ws.nib_act[t];
      const auto& pre = ws.nib_pre[t];
      for (int a = 0; a < nib[t].out_ch; ++a) {
        for (int o = 0; o < 2; ++o) {
          for (int r = 0; r < L; ++r) {
            for (int c = 0; c < L; ++c) {
              if (!edge_valid(L, o, r, c)) continue;
              const int i = egrid(L, a, o, r, c);
              act[i] = split_apply<Scalar, nsig>(pre[i]);
            }
          }
        }
      }
      in = act.data();
    }
    sigma_forward(L, nib.back().out_ch, in, ws.sigma.data());
    const Scalar* pin = ws.sigma.data();
    for (std::size_t u = 0; u < ib.size(); ++u) {
      ib_conv_forward(ib[u], m, params, pin, ws.ib_pre[u].data());
      if (u + 1 < ib.size()) {
        auto& act = ws.ib_act[u];
        const auto& pre = ws.ib_pre[u];
        for (std::size_t i = 0; i < pre.size(); ++i) {
          act[i] = split_apply<Scalar, elu>(pre[i]);
        }
        pin = act.data();
      }
    }
    Scalar out{};
    for (const Scalar& z : ws.ib_pre.back()) out += z;
    return out;
  }

  void backward(const Scalar* params, Scalar* grad, Scratch& ws) const {
    constexpr bool cplx = is_complex_v<Scalar>;
    const std::size_t last = ib.size() - 1;
    // log psi is the plain sum of final pre-activations
    for (auto& v : ws.lam_ib[last]) v = Scalar(1.0);
    std::fill(ws.mu_ib[last].begin(), ws.mu_ib[last].end(), Scalar{});

    for (std::size_t u = ib.size(); u-- > 0;) {
      const Scalar* in_act = (u == 0) ? ws.sigma.data() : ws.ib_act[u - 1].data();
      Scalar* lam_in = (u == 0) ? ws.lam_sigma.data() : ws.lam_ib[u - 1].data();
      Scalar* mu_in = (u == 0) ? ws.mu_sigma.data() : ws.mu_ib[u - 1].data();
      const std::size_t in_size =
          (u == 0) ? ws.lam_sigma.size() : ws.lam_ib[u - 1].size();
      std::fill(lam_in, lam_in + in_size, Scalar{});
      std::fill(mu_in, mu_in + in_size, Scalar{});
      ib_conv_backward(ib[u], m, params, in_act, ws.lam_ib[u].data(),
                       ws.mu_ib[u].data(), grad, lam_in, mu_in);
      if (u > 0) {
        const auto& pre = ws.ib_pre[u - 1];
        for (std::size_t i = 0; i < pre.size(); ++i) {
          activation_backward(act_deriv<Scalar, elu_prime>(pre[i]), lam_in[i],
                              mu_in[i]);
        }
      }
    }

    auto& lam_edge = ws.lam_nib.back();
    auto& mu_edge = ws.mu_nib.back();
    std::fill(lam_edge.begin(), lam_edge.end(), Scalar{});
    std::fill(mu_edge.begin(), mu_edge.end(), Scalar{});
    sigma_backward(L, nib.back().out_ch, ws.nib_act.back().data(),
                   ws.lam_sigma.data(), ws.mu_sigma.data(), lam_edge.data(),
                   mu_edge.data());

    for (std::size_t t = nib.size(); t-- > 0;) {
      auto& lam = ws.lam_nib[t];
      auto& mu = ws.mu_nib[t];
      const auto& pre = ws.nib_pre[t];
      for (int a = 0; a < nib[t].out_ch; ++a) {
        for (int o = 0; o < 2; ++o) {
          for (int r = 0; r < L; ++r) {
            for (int c = 0; c < L; ++c) {
              if (!edge_valid(L, o, r, c)) continue;
              const int i = egrid(L, a, o, r, c);
              activation_backward(act_deriv<Scalar, nsig_prime>(pre[i]), lam[i],
                                  mu[i]);
            }
          }
        }
      }
      const Scalar* in_act = (t == 0) ? ws.x0.data() : ws.nib_act[t - 1].data();
      Scalar* lam_in = nullptr;
      Scalar* mu_in = nullptr;
      if (t > 0) {
        std::fill(ws.lam_nib[t - 1].begin(), ws.lam_nib[t - 1].end(), Scalar{});
        std::fill(ws.mu_nib[t - 1].begin(), ws.mu_nib[t - 1].end(), Scalar{});
        lam_in = ws.lam_nib[t - 1].data();
        mu_in = ws.mu_nib[t - 1].data();
      }
      nib_conv_backward(nib[t], L, params, in_act, lam.data(),
                        cplx ? mu.data() : nullptr, grad, lam_in, mu_in);
    }
  }
};

template <class Scalar>
ComboNet<Scalar>::ComboNet(const LatticeGeometry& geom, const AnsatzConfig& config)
    : config_(config), impl_(std::make_unique<Impl>()) {
  config_.kind = AnsatzKind::combo;
  config_.validate(geom);
  impl_->geom = geom;
  impl_->L = geom.side;
  impl_->m = geom.side - 1;

  Eigen::Index off = 0;
  int in_ch = 1;
  for (int width : config_.nib_channels) {
    ConvSpec sp;
    sp.in_ch = in_ch;
    sp.out_ch = width;
    sp.kernel = config_.nib_kernel;
    sp.radius = config_.nib_kernel / 2;
    sp.w_off = off;
    off += sp.weight_count_edge();
    sp.b_off = off;
    off += Eigen::Index(width) * 2;
    impl_->nib.push_back(sp);
    in_ch = width;
  }
  impl_->nib_count = off;

  const int kib = config_.effective_ib_kernel(geom.side);
  for (int width : config_.ib_channels) {
    ConvSpec sp;
    sp.in_ch = in_ch;
    sp.out_ch = width;
    sp.kernel = kib;
    sp.radius = kib / 2;
    sp.w_off = off;
    off += sp.weight_count_plaq();
    sp.b_off = off;
    off += width;
    impl_->ib.push_back(sp);
    in_ch = width;
  }
  impl_->total = off;

  params_ = Vector::Zero(impl_->total);
  // NIB starts as the identity: center tap 1 on the matching orientation,
  // in-copy j % m for out-copy j, zero bias.
  for (const auto& sp : impl_->nib) {
    const int ctr = sp.kernel / 2;
    for (int a = 0; a < sp.out_ch; ++a) {
      for (int o = 0; o < 2; ++o) {
        params_[nib_w(sp, a, o, a % sp.in_ch, o, ctr, ctr)] = Scalar(1.0);
      }
    }
  }
  Rng rng(stream_seed(config_.seed, 0x1b));
  draw_gaussian(rng, 0.02, params_.data() + impl_->nib_count,
                impl_->total - impl_->nib_count);
}

template <class Scalar>
ComboNet<Scalar>::~ComboNet() = default;

template <class Scalar>
void ComboNet<Scalar>::set_parameters(const Vector& p) {
  if (p.size() != params_.size()) {
    throw std::invalid_argument("parameter vector length mismatch");
  }
  params_ = p;
}

template <class Scalar>
std::complex<double> ComboNet<Scalar>::log_amplitude(
    const SpinConfiguration& s) const {
  check_input(impl_->geom, s);
  auto& ws = Impl::scratch();
  impl_->shape_scratch(ws, false);
  return widen(impl_->forward(params_.data(), s, ws));
}

template <class Scalar>
std::complex<double> ComboNet<Scalar>::log_amp_and_gradient(
    const SpinConfiguration& s, Scalar* grad) const {
  check_input(impl_->geom, s);
  auto& ws = Impl::scratch();
  impl_->shape_scratch(ws, true);
  const Scalar value = impl_->forward(params_.data(), s, ws);
  std::fill(grad, grad + impl_->total, Scalar{});
  impl_->backward(params_.data(), grad, ws);
  return widen(value);
}

template <class Scalar>
std::vector<bool> ComboNet<Scalar>::partition_mask(ParamBlock block) const {
  std::vector<bool> mask(impl_->total, block == ParamBlock::ib);
  for (Eigen::Index i = 0; i < impl_->nib_count; ++i) {
    mask[i] = (block == ParamBlock::nib);
  }
  return mask;
}

template <class Scalar>
std::vector<Scalar> ComboNet<Scalar>::nib_features(
    const SpinConfiguration& s) const {
  check_input(impl_->geom, s);
  auto& ws = Impl::scratch();
  impl_->shape_scratch(ws, false);
  impl_->forward(params_.data(), s, ws);
  return ws.nib_act.back();
}

// ---------------------------------------------------------------------------
// RppNet

template <class Scalar>
struct RppNet<Scalar>::Impl {
  LatticeGeometry geom;
  int L = 0;
  int m = 0;
  ConvSpec skip;       // edge -> plaquette, the non-invariant pathway
  ConvSpec invariant;  // plaquette products of s -> merge width
  std::vector<ConvSpec> omega;
  Eigen::Index nib_count = 0;
  Eigen::Index total = 0;

  struct Scratch {
    std::vector<Scalar> x0;
    std::vector<Scalar> sigma0;
    std::vector<Scalar> merged;  // skip + invariant pre-activations
    std::vector<std::vector<Scalar>> om_pre, om_act;
    std::vector<Scalar> merged_act;
    std::vector<std::vector<Scalar>> lam_om, mu_om;
    std::vector<Scalar> lam_merged, mu_merged;
  };

  static Scratch& scratch() {
    static thread_local Scratch s;
    return s;
  }

  void shape_scratch(Scratch& s, bool backward) const {
    const std::size_t pgridsz = std::size_t(m) * m;
    s.x0.assign(std::size_t(2) * L * L, Scalar{});
    s.sigma0.assign(pgridsz, Scalar{});
    s.merged.assign(std::size_t(skip.out_ch) * pgridsz, Scalar{});
    s.merged_act.assign(s.merged.size(), Scalar{});
    s.om_pre.resize(omega.size());
    s.om_act.resize(omega.size());
    for (std::size_t u = 0; u < omega.size(); ++u) {
      s.om_pre[u].assign(std::size_t(omega[u].out_ch) * pgridsz, Scalar{});
      s.om_act[u].assign(std::size_t(omega[u].out_ch) * pgridsz, Scalar{});
    }
    if (!backward) return;
    s.lam_om.resize(omega.size());
    s.mu_om.resize(omega.size());
    for (std::size_t u = 0; u < omega.size(); ++u) {
      s.lam_om[u].assign(std::size_t(omega[u].out_ch) * pgridsz, Scalar{});
      s.mu_om[u].assign(std::size_t(omega[u].out_ch) * pgridsz, Scalar{});
    }
    s.lam_merged.assign(s.merged.size(), Scalar{});
    s.mu_merged.assign(s.merged.size(), Scalar{});
  }

  // The skip convolution anchors the kernel at the plaquette's upper-left
  // cell, so a radius-1 window covers the four bounding edges.
  Scalar skip_at(const Scalar* params, const Scalar* x0, int w, int r,
                 int c) const {
    const int K = skip.kernel, R = skip.radius;
    Scalar z{};
    for (int o = 0; o < 2; ++o) {
      for (int ky = 0; ky < K; ++ky) {
        const int rr = r + ky - R;
        if (rr < 0 || rr >= L) continue;
        for (int kx = 0; kx < K; ++kx) {
          const int cc = c + kx - R;
          if (cc < 0 || cc >= L) continue;
          if (!edge_valid(L, o, rr, cc)) continue;
          z += params[skip.w_off +
                      ((Eigen::Index(w) * 2 + o) * K + ky) * K + kx] *
               x0[egrid(L, 0, o, rr, cc)];
        }
      }
    }
    return z;
  }

  Scalar forward(const Scalar* params, const SpinConfiguration& s,
                 Scratch& ws) const {
    load_edge_input(geom, s, ws.x0.data());
    sigma_raw(geom, s, ws.sigma0.data());
    ib_conv_forward(invariant, m, params, ws.sigma0.data(), ws.merged.data());
    for (int w = 0; w < skip.out_ch; ++w) {
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
          ws.merged[pgrid(m, w, r, c)] += skip_at(params, ws.x0.data(), w, r, c);
        }
      }
    }
    if (omega.empty()) {
      Scalar out{};
      for (const Scalar& z : ws.merged) out += z;
      return out;
    }
    for (std::size_t i = 0; i < ws.merged.size(); ++i) {
      ws.merged_act[i] = split_apply<Scalar, elu>(ws.merged[i]);
    }
    const Scalar* pin = ws.merged_act.data();
    for (std::size_t u = 0; u < omega.size(); ++u) {
      ib_conv_forward(omega[u], m, params, pin, ws.om_pre[u].data());
      if (u + 1 < omega.size()) {
        auto& act = ws.om_act[u];
        const auto& pre = ws.om_pre[u];
        for (std::size_t i = 0; i < pre.size(); ++i) {
          act[i] = split_apply<Scalar, elu>(pre[i]);
        }
        pin = act.data();
      }
    }
    Scalar out{};
    for (const Scalar& z : ws.om_pre.back()) out += z;
    return out;
  }

  void backward(const Scalar* params, Scalar* grad, Scratch& ws) const {
    if (omega.empty()) {
      for (auto& v : ws.lam_merged) v = Scalar(1.0);
      std::fill(ws.mu_merged.begin(), ws.mu_merged.end(), Scalar{});
    } else {
      const std::size_t last = omega.size() - 1;
      for (auto& v : ws.lam_om[last]) v = Scalar(1.0);
      std::fill(ws.mu_om[last].begin(), ws.mu_om[last].end(), Scalar{});
      for (std::size_t u = omega.size(); u-- > 0;) {
        const Scalar* in_act =
            (u == 0) ? ws.merged_act.data() : ws.om_act[u - 1].data();
        Scalar* lam_in = (u == 0) ? ws.lam_merged.data() : ws.lam_om[u - 1].data();
        Scalar* mu_in = (u == 0) ? ws.mu_merged.data() : ws.mu_om[u - 1].data();
        const std::size_t in_size =
            (u == 0) ? ws.lam_merged.size() : ws.lam_om[u - 1].size();
        std::fill(lam_in, lam_in + in_size, Scalar{});
        std::fill(mu_in, mu_in + in_size, Scalar{});
        ib_conv_backward(omega[u], m, params, in_act, ws.lam_om[u].data(),
                         ws.mu_om[u].data(), grad, lam_in, mu_in);
        const Scalar* pre =
            (u == 0) ? ws.merged.data() : ws.om_pre[u - 1].data();
        for (std::size_t i = 0; i < in_size; ++i) {
          activation_backward(act_deriv<Scalar, elu_prime>(pre[i]), lam_in[i],
                              mu_in[i]);
        }
      }
    }

    // Both pathways read constants (raw spins / their plaquette products),
    // so only weight gradients remain.
    ib_conv_backward(invariant, m, params, ws.sigma0.data(),
                     ws.lam_merged.data(), ws.mu_merged.data(), grad, nullptr,
                     nullptr);
    const int K = skip.kernel, R = skip.radius;
    for (int w = 0; w < skip.out_ch; ++w) {
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
          const Scalar lp = ws.lam_merged[pgrid(m, w, r, c)];
          for (int o = 0; o < 2; ++o) {
            for (int ky = 0; ky < K; ++ky) {
              const int rr = r + ky - R;
              if (rr < 0 || rr >= L) continue;
              for (int kx = 0; kx < K; ++kx) {
                const int cc = c + kx - R;
                if (cc < 0 || cc >= L) continue;
                if (!edge_valid(L, o, rr, cc)) continue;
                grad[skip.w_off + ((Eigen::Index(w) * 2 + o) * K + ky) * K + kx] +=
                    lp * ws.x0[egrid(L, 0, o, rr, cc)];
              }
            }
          }
        }
      }
    }
  }
};

template <class Scalar>
RppNet<Scalar>::RppNet(const LatticeGeometry& geom, const AnsatzConfig& config)
    : config_(config), impl_(std::make_unique<Impl>()) {
  config_.kind = AnsatzKind::rpp;
  config_.validate(geom);
  impl_->geom = geom;
  impl_->L = geom.side;
  impl_->m = geom.side - 1;

  const int merge_width = config_.ib_channels.front();
  const int kib = config_.effective_ib_kernel(geom.side);

  Eigen::Index off = 0;
  impl_->skip.in_ch = 1;
  impl_->skip.out_ch = merge_width;
  impl_->skip.kernel = config_.nib_kernel;
  impl_->skip.radius = config_.nib_kernel / 2;
  impl_->skip.w_off = off;
  impl_->skip.biased = false;
  off += Eigen::Index(merge_width) * 2 * config_.nib_kernel * config_.nib_kernel;
  impl_->nib_count = off;

  impl_->invariant.in_ch = 1;
  impl_->invariant.out_ch = merge_width;
  impl_->invariant.kernel = kib;
  impl_->invariant.radius = kib / 2;
  impl_->invariant.w_off = off;
  off += impl_->invariant.weight_count_plaq();
  impl_->invariant.b_off = off;
  off += merge_width;

  int in_ch = merge_width;
  for (std::size_t u = 1; u < config_.ib_channels.size(); ++u) {
    ConvSpec sp;
    sp.in_ch = in_ch;
    sp.out_ch = config_.ib_channels[u];
    sp.kernel = kib;
    sp.radius = kib / 2;
    sp.w_off = off;
    off += sp.weight_count_plaq();
    sp.b_off = off;
    off += sp.out_ch;
    impl_->omega.push_back(sp);
    in_ch = sp.out_ch;
  }
  impl_->total = off;

  // All pathways initialize from the same Gaussian; an edge-to-plaquette
  // map has no identity to start from.
  params_ = Vector::Zero(impl_->total);
  Rng rng(stream_seed(config_.seed, 0x2c));
  draw_gaussian(rng, 0.02, params_.data(), impl_->total);
}

template <class Scalar>
RppNet<Scalar>::~RppNet() = default;

template <class Scalar>
void RppNet<Scalar>::set_parameters(const Vector& p) {
  if (p.size() != params_.size()) {
    throw std::invalid_argument("parameter vector length mismatch");
  }
  params_ = p;
}

template <class Scalar>
std::complex<double> RppNet<Scalar>::log_amplitude(
    const SpinConfiguration& s) const {
  check_input(impl_->geom, s);
  auto& ws = Impl::scratch();
  impl_->shape_scratch(ws, false);
  return widen(impl_->forward(params_.data(), s, ws));
}

template <class Scalar>
std::complex<double> RppNet<Scalar>::log_amp_and_gradient(
    const SpinConfiguration& s, Scalar* grad) const {
  check_input(impl_->geom, s);
  auto& ws = Impl::scratch();
  impl_->shape_scratch(ws, true);
  const Scalar value = impl_->forward(params_.data(), s, ws);
  std::fill(grad, grad + impl_->total, Scalar{});
  impl_->backward(params_.data(), grad, ws);
  return widen(value);
}

template <class Scalar>
std::vector<bool> RppNet<Scalar>::partition_mask(ParamBlock block) const {
  std::vector<bool> mask(impl_->total, block == ParamBlock::ib);
  for (Eigen::Index i = 0; i < impl_->nib_count; ++i) {
    mask[i] = (block == ParamBlock::nib);
  }
  return mask;
}

// ---------------------------------------------------------------------------
// RbmNet

namespace {

// log cosh with a stable large-argument branch.
template <class S>
S log_cosh(const S& z) {
  const double kLog2 = 0.6931471805599453;
  if constexpr (is_complex_v<S>) {
    if (z.real() >= 0.0) {
      return z + std::log(1.0 + std::exp(-2.0 * z)) - kLog2;
    }
    return -z + std::log(1.0 + std::exp(2.0 * z)) - kLog2;
  } else {
    const double a = std::abs(z);
    return a + std::log1p(std::exp(-2.0 * a)) - kLog2;
  }
}

}  // namespace

template <class Scalar>
RbmNet<Scalar>::RbmNet(const LatticeGeometry& geom, const AnsatzConfig& config)
    : config_(config) {
  config_.kind = AnsatzKind::rbm;
  config_.validate(geom);
  n_visible_ = geom.n_edges;
  n_hidden_ = std::max(1, int(std::lround(config_.rbm_alpha * n_visible_)));
  const Eigen::Index total =
      n_visible_ + n_hidden_ + Eigen::Index(n_hidden_) * n_visible_;
  params_ = Vector::Zero(total);
  Rng rng(stream_seed(config_.seed, 0x3d));
  draw_gaussian(rng, 0.01, params_.data(), total);
}

template <class Scalar>
void RbmNet<Scalar>::set_parameters(const Vector& p) {
  if (p.size() != params_.size()) {
    throw std::invalid_argument("parameter vector length mismatch");
  }
  params_ = p;
}

template <class Scalar>
std::complex<double> RbmNet<Scalar>::log_amplitude(
    const SpinConfiguration& s) const {
  if (static_cast<int>(s.size()) != n_visible_) {
    throw std::invalid_argument("configuration length does not match lattice");
  }
  const Scalar* a = params_.data();
  const Scalar* b = a + n_visible_;
  const Scalar* w = b + n_hidden_;
  Scalar out{};
  for (int j = 0; j < n_visible_; ++j) out += a[j] * double(s[j]);
  for (int i = 0; i < n_hidden_; ++i) {
    Scalar theta = b[i];
    const Scalar* wi = w + Eigen::Index(i) * n_visible_;
    for (int j = 0; j < n_visible_; ++j) theta += wi[j] * double(s[j]);
    out += log_cosh(theta);
  }
  return widen(out);
}

template <class Scalar>
std::complex<double> RbmNet<Scalar>::log_amp_and_gradient(
    const SpinConfiguration& s, Scalar* grad) const {
  if (static_cast<int>(s.size()) != n_visible_) {
    throw std::invalid_argument("configuration length does not match lattice");
  }
  const Scalar* a = params_.data();
  const Scalar* b = a + n_visible_;
  const Scalar* w = b + n_hidden_;
  Scalar* ga = grad;
  Scalar* gb = grad + n_visible_;
  Scalar* gw = gb + n_hidden_;
  Scalar out{};
  for (int j = 0; j < n_visible_; ++j) {
    out += a[j] * double(s[j]);
    ga[j] = Scalar(double(s[j]));
  }
  for (int i = 0; i < n_hidden_; ++i) {
    Scalar theta = b[i];
    const Scalar* wi = w + Eigen::Index(i) * n_visible_;
    for (int j = 0; j < n_visible_; ++j) theta += wi[j] * double(s[j]);
    out += log_cosh(theta);
    const Scalar t = std::tanh(theta);
    gb[i] = t;
    Scalar* gwi = gw + Eigen::Index(i) * n_visible_;
    for (int j = 0; j < n_visible_; ++j) gwi[j] = t * double(s[j]);
  }
  return widen(out);
}

template <class Scalar>
std::vector<bool> RbmNet<Scalar>::partition_mask(ParamBlock block) const {
  if (block == ParamBlock::nib) {
    throw std::invalid_argument("RBM has a single block; no NIB partition");
  }
  return std::vector<bool>(params_.size(), true);
}

// ---------------------------------------------------------------------------

template <class Scalar>
std::unique_ptr<Ansatz<Scalar>> make_ansatz(const LatticeGeometry& geom,
                                            const AnsatzConfig& config) {
  switch (config.kind) {
    case AnsatzKind::combo:
      return std::make_unique<ComboNet<Scalar>>(geom, config);
    case AnsatzKind::rpp:
      return std::make_unique<RppNet<Scalar>>(geom, config);
    case AnsatzKind::rbm:
      return std::make_unique<RbmNet<Scalar>>(geom, config);
  }
  throw std::invalid_argument("unknown ansatz kind");
}

template class ComboNet<double>;
template class ComboNet<std::complex<double>>;
template class RppNet<double>;
template class RppNet<std::complex<double>>;
template class RbmNet<double>;
template class RbmNet<std::complex<double>>;

template std::unique_ptr<Ansatz<double>> make_ansatz<double>(
    const LatticeGeometry&, const AnsatzConfig&);
template std::unique_ptr<Ansatz<std::complex<double>>>
make_ansatz<std::complex<double>>(const LatticeGeometry&, const AnsatzConfig&);

}  // namespace tcnqs
