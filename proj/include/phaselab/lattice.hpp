// Copyright 2026 The phaselab Authors
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

#pragma once

#include <cstddef>
#include <vector>

#include "phaselab/tolerance.hpp"
#include "phaselab/types.hpp"

namespace phaselab {

/// Normalized Gaussian density with covariance `covariance` on a periodic box.
///
/// The density is summed over the nearest periodic images of the box, so its
/// grid quadrature is exactly one up to spectral (trapezoid) error even when
/// the box clips a little of the tail. Inside the box the image terms are
/// below double precision for any covariance that passes the domain check.
class GaussianMeasure {
 public:
  GaussianMeasure() = default;
  GaussianMeasure(RMatrix covariance, RVector periods);

  int dim() const { return static_cast<int>(covariance_.rows()); }
  const RMatrix& covariance() const { return covariance_; }
  const RMatrix& precision() const { return precision_; }
  double log_normalization() const { return log_norm_; }
  const RVector& periods() const { return periods_; }

  /// Periodized density.
  double density(const RVector& x) const;
  /// Plain analytic density, no image sum.
  double analytic_density(const RVector& x) const;

 private:
  RMatrix covariance_;
  RMatrix precision_;
  RVector periods_;
  double log_norm_ = 0.0;
};

/// Uniform grid over [-L, L)^d and its discrete-Fourier dual.
///
/// Coordinates are centred: x_j = (j - n/2) h and p_k = (k - n/2) dp with
/// h = 2L/n and dp = pi/L. Multi-indices are flattened with axis 0 most
/// significant.
struct Grid {
  int d = 1;
  int n = 0;
  double half_width = 0.0;
  double h = 0.0;
  double dp = 0.0;
  RVector q;  // per-axis position coordinates (length n)
  RVector p;  // per-axis momentum coordinates (length n)

  std::size_t points() const;  // n^d
  double position_cell() const;
  double momentum_cell() const;
  double phase_cell() const;
  double p_max() const { return 0.5 * n * dp; }

  std::vector<int> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::vector<int>& idx) const;
  RVector position(std::size_t flat) const;
  RVector momentum(std::size_t flat) const;
};

/// The discretized phase space E = Q x P with its reference Gaussians.
class PhaseSpaceSpec {
 public:
  int d() const { return grid_.d; }
  int n() const { return grid_.n; }
  double half_width() const { return grid_.half_width; }
  const RMatrix& covariance() const { return covariance_; }
  const Grid& grid() const { return grid_; }
  std::size_t dim() const { return grid_.points(); }

  const GaussianMeasure& mu() const { return mu_; }
  const GaussianMeasure& nu() const { return nu_; }
  const GaussianMeasure& mu_nu() const { return mu_nu_; }

  /// mu density sampled at every position grid point.
  RVector mu_samples() const;
  /// nu density sampled at every momentum grid point.
  RVector nu_samples() const;
  /// (mu x nu) density on the phase grid, rows = position, cols = momentum.
  RMatrix mu_nu_samples() const;

  bool same_geometry(const PhaseSpaceSpec& other) const;

  friend PhaseSpaceSpec make_phase_space(int d, int n_per_axis, double half_width,
                                         const RMatrix& covariance,
                                         const TolerancePolicy& tol);

 private:
  Grid grid_;
  RMatrix covariance_;
  GaussianMeasure mu_;
  GaussianMeasure nu_;
  GaussianMeasure mu_nu_;
};

PhaseSpaceSpec make_phase_space(int d, int n_per_axis, double half_width,
                                const RMatrix& covariance,
                                const TolerancePolicy& tol = default_tolerances());

/// Half-width that gives equal position and momentum extents for n points.
double balanced_half_width(int n_per_axis);

double gaussian_density(const GaussianMeasure& measure, const RVector& point);

/// Spec of the product space Q_1 x Q_2; both factors must share n and L.
PhaseSpaceSpec combine(const PhaseSpaceSpec& first, const PhaseSpaceSpec& second,
                       const TolerancePolicy& tol = default_tolerances());

}  // namespace phaselab
