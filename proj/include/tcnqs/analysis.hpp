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

#ifndef TCNQS_ANALYSIS_HPP
#define TCNQS_ANALYSIS_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcnqs {

struct SweepPoint {
  double field = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  double tau = 0.0;
};

// One observable swept over one field component at fixed L.
struct SweepTable {
  std::string observable;
  int L = 0;
  std::vector<SweepPoint> points;

  void validate(std::size_t min_points) const;  // strictly increasing fields
};

// CSV rows are "field,mean,stderr,tau,L,observable"; a file may carry several
// (observable, L) groups.
void write_sweep_csv(const std::string& path,
                     const std::vector<SweepTable>& tables);
std::vector<SweepTable> read_sweep_csv(const std::string& path);

class BoundaryPeakError : public std::runtime_error {
 public:
  explicit BoundaryPeakError(const std::string& what)
      : std::runtime_error(what) {}
};

struct PeakEstimate {
  double location = 0.0;
  double uncertainty = 0.0;
};

// Locates the extremum of the numerical derivative of the sweep: central
// finite differences on the (possibly non-uniform) grid, then quadratic
// interpolation through the maximum-|derivative| point and its neighbors.
// Observable errors propagate linearly through both steps.  Throws
// BoundaryPeakError when the extremum sits at the edge of the grid.
PeakEstimate peak_from_sweep(const SweepTable& table);

struct SizePeak {
  int L = 0;
  double h_peak = 0.0;
  double error = 0.0;
};

struct ExtrapolationFit {
  double h_crit = 0.0;
  double b = 0.0;
  double x = 0.0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  bool polished = false;
  std::vector<SizePeak> inputs;

  double h_crit_uncertainty() const { return std::sqrt(covariance(0, 0)); }
};

// Weighted least squares for h_peak(L) = h_crit + b (1/L)^x: the exponent is
// scanned over [0.25, 3] in steps of 0.05, then polished locally; for fixed x
// the remaining fit is linear.
ExtrapolationFit power_law_extrapolate(const std::vector<SizePeak>& points);

}  // namespace tcnqs

#endif  // TCNQS_ANALYSIS_HPP
