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

#include "tcnqs/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace tcnqs {

void SweepTable::validate(std::size_t min_points) const {
  if (points.size() < min_points) {
    throw std::invalid_argument("sweep table needs at least " +
                                std::to_string(min_points) + " points");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].field > points[i - 1].field)) {
      throw std::invalid_argument("sweep fields must be strictly increasing");
    }
  }
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepTable>& tables) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open sweep csv for writing: " + path);
  }
  out << "field,mean,stderr,tau,L,observable\n";
  out.precision(17);
  for (const auto& t : tables) {
    for (const auto& p : t.points) {
      out << p.field << ',' << p.mean << ',' << p.std_error << ',' << p.tau
          << ',' << t.L << ',' << t.observable << '\n';
    }
  }
}

std::vector<SweepTable> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open sweep csv: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty sweep csv: " + path);
  }
  std::map<std::pair<std::string, int>, SweepTable> groups;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) {
      throw std::runtime_error("malformed sweep csv row: " + line);
    }
    SweepPoint p;
    p.field = std::stod(cells[0]);
    p.mean = std::stod(cells[1]);
    p.std_error = std::stod(cells[2]);
    p.tau = std::stod(cells[3]);
    const int L = std::stoi(cells[4]);
    const std::string obs = cells[5];
    auto& table = groups[{obs, L}];
    table.observable = obs;
    table.L = L;
    table.points.push_back(p);
  }
  std::vector<SweepTable> out;
  for (auto& [key, table] : groups) {
    std::sort(table.points.begin(), table.points.end(),
              [](const SweepPoint& a, const SweepPoint& b) {
                return a.field < b.field;
              });
    out.push_back(std::move(table));
  }
  return out;
}

PeakEstimate peak_from_sweep(const SweepTable& table) {
  table.validate(5);
  const auto& pts = table.points;
  const int n = int(pts.size());

  // Central finite differences on a possibly non-uniform grid; the stencil
  // coefficients stay around for the error propagation.
  const int nd = n - 2;
  std::vector<double> deriv(nd), cm(nd), c0(nd), cp(nd);
  for (int i = 1; i + 1 < n; ++i) {
    const double hl = pts[i].field - pts[i - 1].field;
    const double hr = pts[i + 1].field - pts[i].field;
    const int j = i - 1;
    cm[j] = -hr / (hl * (hl + hr));
    c0[j] = (hr - hl) / (hl * hr);
    cp[j] = hl / (hr * (hl + hr));
    deriv[j] = cm[j] * pts[i - 1].mean + c0[j] * pts[i].mean +
               cp[j] * pts[i + 1].mean;
  }

  int jmax = 0;
  for (int j = 1; j < nd; ++j) {
    if (std::abs(deriv[j]) > std::abs(deriv[jmax])) jmax = j;
  }
  if (jmax == 0 || jmax == nd - 1) {
    throw BoundaryPeakError(
        "derivative extremum at the sweep boundary; the sweep range is too "
        "narrow");
  }

  // Quadratic through the three derivative points around the extremum.
  const double x1 = pts[jmax].field;      // deriv index j sits at field j+1
  const double x2 = pts[jmax + 1].field;
  const double x3 = pts[jmax + 2].field;
  const double y1 = deriv[jmax - 1], y2 = deriv[jmax], y3 = deriv[jmax + 1];
  const double A = x2 - x1, B = x2 - x3;
  const double N = A * A * (y2 - y3) - B * B * (y2 - y1);
  const double D = A * (y2 - y3) - B * (y2 - y1);

  PeakEstimate out;
  if (D == 0.0) {
    out.location = x2;
    out.uncertainty = std::max(std::abs(A), std::abs(B));
    return out;
  }
  out.location = x2 - 0.5 * N / D;

  // d(x*)/d(y_j) analytically, then chain through the difference stencils to
  // the five observable values feeding the three derivative points.
  const double dN[3] = {B * B, A * A - B * B, -A * A};
  const double dD[3] = {B, A - B, -A};
  double dxdy[3];
  for (int j = 0; j < 3; ++j) {
    dxdy[j] = -0.5 * (dN[j] * D - N * dD[j]) / (D * D);
  }
  double var = 0.0;
  for (int k = -2; k <= 2; ++k) {
    // observable index jmax + 1 + k
    double sens = 0.0;
    for (int j = 0; j < 3; ++j) {
      const int dj = jmax - 1 + j;       // derivative index
      const int center = dj + 1;         // its central observable index
      const int offset = (jmax + 1 + k) - center;
      if (offset == -1) sens += dxdy[j] * cm[dj];
      if (offset == 0) sens += dxdy[j] * c0[dj];
      if (offset == 1) sens += dxdy[j] * cp[dj];
    }
    const double sigma = pts[jmax + 1 + k].std_error;
    var += sens * sens * sigma * sigma;
  }
  out.uncertainty = std::sqrt(var);
  return out;
}

namespace {

struct LinearFit {
  double a = 0.0;  // intercept, h_crit
  double b = 0.0;
  double chi2 = 0.0;
  bool ok = false;
};

// WLS of y = a + b * u^x for fixed exponent.
LinearFit fit_fixed_exponent(const std::vector<SizePeak>& pts, double x) {
  double sw = 0, swu = 0, swuu = 0, swy = 0, swuy = 0;
  for (const auto& p : pts) {
    const double u = std::pow(1.0 / double(p.L), x);
    const double w = 1.0 / (p.error * p.error);
    sw += w;
    swu += w * u;
    swuu += w * u * u;
    swy += w * p.h_peak;
    swuy += w * u * p.h_peak;
  }
  LinearFit f;
  const double det = sw * swuu - swu * swu;
  if (std::abs(det) < 1e-300) return f;
  f.a = (swuu * swy - swu * swuy) / det;
  f.b = (sw * swuy - swu * swy) / det;
  for (const auto& p : pts) {
    const double u = std::pow(1.0 / double(p.L), x);
    const double w = 1.0 / (p.error * p.error);
    const double r = p.h_peak - f.a - f.b * u;
    f.chi2 += w * r * r;
  }
  f.ok = true;
  return f;
}

}  // namespace

ExtrapolationFit power_law_extrapolate(const std::vector<SizePeak>& points) {
  {
    std::vector<int> sizes;
    for (const auto& p : points) {
      if (p.error <= 0.0) {
        throw std::invalid_argument("power_law_extrapolate: errors must be > 0");
      }
      sizes.push_back(p.L);
    }
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    if (sizes.size() < 3) {
      throw std::invalid_argument(
          "power_law_extrapolate: need at least 3 distinct sizes");
    }
  }
  std::vector<SizePeak> pts = points;  // reorder-invariant by construction
  std::sort(pts.begin(), pts.end(),
            [](const SizePeak& a, const SizePeak& b) { return a.L < b.L; });

  double best_x = 0.25;
  LinearFit best;
  for (double x = 0.25; x <= 3.0 + 1e-12; x += 0.05) {
    const LinearFit f = fit_fixed_exponent(pts, x);
    if (f.ok && (!best.ok || f.chi2 < best.chi2)) {
      best = f;
      best_x = x;
    }
  }
  if (!best.ok) {
    throw std::runtime_error("power_law_extrapolate: degenerate fit");
  }

  // golden-section polish of the exponent within one grid step
  auto chi2_of = [&](double x) {
    const LinearFit f = fit_fixed_exponent(pts, x);
    return f.ok ? f.chi2 : std::numeric_limits<double>::max();
  };
  double lo = std::max(0.25 - 1e-9, best_x - 0.05);
  double hi = std::min(3.0 + 1e-9, best_x + 0.05);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  double fc = chi2_of(c), fd = chi2_of(d);
  for (int it = 0; it < 200 && (hi - lo) > 1e-13; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = chi2_of(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = chi2_of(d);
    }
  }
  const double x_polished = 0.5 * (lo + hi);
  const LinearFit polished = fit_fixed_exponent(pts, x_polished);

  ExtrapolationFit out;
  out.inputs = pts;
  if (polished.ok && polished.chi2 <= best.chi2) {
    out.h_crit = polished.a;
    out.b = polished.b;
    out.x = x_polished;
    out.polished = true;
  } else {
    out.h_crit = best.a;
    out.b = best.b;
    out.x = best_x;
    out.polished = false;
  }

  // Gauss-Newton covariance (J^T W J)^+ on (h_crit, b, x).
  Eigen::Matrix3d jwj = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const double u = std::pow(1.0 / double(p.L), out.x);
    const double w = 1.0 / (p.error * p.error);
    Eigen::Vector3d j(1.0, u, out.b * u * std::log(1.0 / double(p.L)));
    jwj += w * j * j.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(jwj);
  Eigen::Vector3d inv_ev = Eigen::Vector3d::Zero();
  const double ev_max = es.eigenvalues().maxCoeff();
  for (int i = 0; i < 3; ++i) {
    if (es.eigenvalues()[i] > 1e-12 * ev_max) {
      inv_ev[i] = 1.0 / es.eigenvalues()[i];
    }
  }
  out.covariance =
      es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();
  return out;
}

}  // namespace tcnqs
