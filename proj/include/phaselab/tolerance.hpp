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

namespace phaselab {

/// Numerical thresholds shared by the constructors and validators.
///
/// Defaults are the values the test-suite pins; a scenario may override them
/// through its config, and the manifest records whichever set was used.
struct TolerancePolicy {
  // core lattice
  double covariance_symmetry = 1e-12;
  // Per-axis tail mass of the reference Gaussians outside the grid box.
  double domain_tail_mass = 1e-5;
  double measure_quadrature = 1e-10;

  // density operators
  double hermiticity = 1e-10;
  double trace = 1e-8;
  double psd_floor = 1e-8;
  double state_norm = 1e-10;

  // phase-space fields
  double underflow_floor = 1e-300;
  double underflow_signal = 1e-12;
  double normalization = 1e-6;
  // Points where the mu x nu density is below this fraction of its peak are
  // outside the resolved region for eta-density comparisons.
  double resolved_density_ratio = 1e-4;

  // dynamics
  double boundary_mass = 1e-8;
  double step_mass_drift = 1e-4;

  // feedback classifier
  double classifier_residual = 1e-8;
  double classifier_nonscalar = 1e-8;
};

inline const TolerancePolicy& default_tolerances() {
  static const TolerancePolicy policy{};
  return policy;
}

}  // namespace phaselab
