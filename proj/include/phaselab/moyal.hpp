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

#include <map>
#include <string>
#include <vector>

#include "phaselab/hilbert.hpp"
#include "phaselab/tolerance.hpp"
#include "phaselab/types.hpp"
#include "phaselab/weyl.hpp"
#include "phaselab/wigner.hpp"

namespace phaselab {

enum class DerivativeScheme { spectral, finite_difference_4th };

/// How the eta-density right-hand side is assembled.
enum class EtaScheme {
  product,  // act on phi * (mu x nu), then divide
  leibniz   // Leibniz rule with Wick polynomials for the measure derivatives
};

const char* to_string(DerivativeScheme scheme);
DerivativeScheme derivative_scheme_from_string(const std::string& name);

using MultiIndex = std::vector<int>;

/// Partial derivative of a grid field. `orders` has 2d entries: position axes first.
RMatrix field_derivative(const RMatrix& field, const PhaseSpaceSpec& spec, const MultiIndex& orders,
                         DerivativeScheme scheme);

struct MoyalGenerator {
  PhaseSpaceSpec spec;
  HamiltonianSymbol symbol;
  int K = 3;
  DerivativeScheme scheme = DerivativeScheme::spectral;
  /// Nonzero derivative tensors of the symbol up to order 2K-1, keyed by multi-index.
  std::map<MultiIndex, RMatrix> derivatives;

  int max_order() const { return 2 * K - 1; }
  /// Derivative of the symbol; nullptr when it vanishes identically.
  const RMatrix* derivative(const MultiIndex& orders) const;
};

MoyalGenerator make_generator(const HamiltonianSymbol& symbol, const PhaseSpaceSpec& spec, int K = 3,
                              DerivativeScheme scheme = DerivativeScheme::spectral);

/// Full symplectic contraction of the n-th derivative tensors of psi and H.
PhaseSpaceField poisson_power(const PhaseSpaceField& psi, const MoyalGenerator& gen, int order);

/// Truncated sine series of brackets: time derivative of a Wigner density.
PhaseSpaceField moyal_rhs(const PhaseSpaceField& w, const MoyalGenerator& gen);

/// Time derivative of an eta density.
PhaseSpaceField eta_rhs(const PhaseSpaceField& phi, const MoyalGenerator& gen,
                             EtaScheme scheme = EtaScheme::product);

/// Wick polynomial P with d^k density / dh_1..dh_k = density * P.
PhasePolynomial wick_polynomial(const RMatrix& precision, const std::vector<RVector>& directions);

/// Wick polynomial for a coordinate multi-index.
PhasePolynomial wick_polynomial(const RMatrix& precision, const MultiIndex& orders);

/// k-th directional derivative (k <= 4) of the Gaussian density at a point.
double gaussian_measure_derivative(const GaussianMeasure& measure,
                                   const std::vector<RVector>& directions, const RVector& point);

struct EvolutionRun {
  double dt = 1e-3;
  double t_end = 1.0;
  int stride = 1;
  int K = 3;
  DerivativeScheme scheme = DerivativeScheme::spectral;
  /// Accept steps above the stability guard (a warning is recorded instead).
  bool allow_large_step = false;
  /// Forces K = 1 (classical Liouville flow).
  bool classical = false;
};

struct DiagnosticsRow {
  double t = 0.0;
  double mass = 0.0;
  double l2 = 0.0;
  double energy = 0.0;
  double min_w = 0.0;
  double purity_est = 0.0;
};

struct Snapshot {
  double t = 0.0;
  PhaseSpaceField field;
};

struct EvolutionResult {
  std::vector<Snapshot> snapshots;
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<std::string> warnings;
};

/// Largest step accepted by the stability guard for this symbol on this grid.
double max_stable_step(const HamiltonianSymbol& symbol, const PhaseSpaceSpec& spec);

/// RK4 integration of a Wigner density or an eta density.
EvolutionResult evolve(const PhaseSpaceField& initial, const HamiltonianSymbol& symbol,
                       const EvolutionRun& run, const TolerancePolicy& tol = default_tolerances());

/// Exact conjugation by exp(-i H t) at the given times.
std::vector<DensityOperator> von_neumann_oracle(const DensityOperator& t0, const CMatrix& hamiltonian,
                                                const std::vector<double>& times);

/// Snapshot times produced by `evolve` for this run.
std::vector<double> snapshot_times(const EvolutionRun& run);

}  // namespace phaselab
