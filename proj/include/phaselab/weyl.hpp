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

#include <optional>
#include <vector>

#include "phaselab/hilbert.hpp"
#include "phaselab/lattice.hpp"
#include "phaselab/polynomial.hpp"
#include "phaselab/types.hpp"

namespace phaselab {

/// Real polynomial on phase space; variables are ordered q_1..q_d, p_1..p_d.
using PhasePolynomial = Polynomial<double>;

/// Piece of a control schedule: from `t_start` on, `control` is added to the
/// static part of the symbol (until the next segment starts).
struct ScheduleSegment {
  double t_start = 0.0;
  PhasePolynomial control;
};

/// Weyl symbol of a Hamiltonian or observable.
struct HamiltonianSymbol {
  int d = 1;
  PhasePolynomial polynomial;
  /// Optional sampled part on the phase grid (rows position, cols momentum).
  std::optional<RMatrix> sampled;
  std::vector<ScheduleSegment> schedule;

  static HamiltonianSymbol from_polynomial(PhasePolynomial poly);

  int degree() const { return polynomial.degree(); }
  bool time_dependent() const { return !schedule.empty(); }
  /// Frozen symbol active at time t.
  HamiltonianSymbol at(double t) const;
  /// Index of the schedule segment active at time t (-1 before the first).
  int segment_at(double t) const;
};

struct PhasePoint {
  RVector q;
  RVector p;
};

inline constexpr int kMaxSymbolDegree = 6;

/// Monomial prod_i q_i^powers_q[i] p_i^powers_p[i] times coeff.
PhasePolynomial monomial(const std::vector<int>& powers_q, const std::vector<int>& powers_p,
                         double coeff = 1.0);
/// sum_i (q_i^2 + p_i^2) / 2
PhasePolynomial harmonic_polynomial(int d);

/// Position and momentum operators of one axis in the orthonormal grid basis.
/// Per-axis operators; only the one-axis grid of `spec` is used.
CMatrix position_operator_1d(const PhaseSpaceSpec& spec);
CMatrix momentum_operator_1d(const PhaseSpaceSpec& spec);
/// Truncated ladder-basis position and momentum for an m-level factor.
CMatrix position_operator_levels(int levels);
CMatrix momentum_operator_levels(int levels);

/// Symmetric (Weyl) ordering of a polynomial given per-axis Q_i, P_i
/// matrices; axes are combined by Kronecker products.
CMatrix weyl_order(const PhasePolynomial& poly, const std::vector<CMatrix>& q_ops,
                   const std::vector<CMatrix>& p_ops);

/// Weyl quantization on the grid, as a matrix in the orthonormal basis.
CMatrix weyl_quantize(const HamiltonianSymbol& symbol, const PhaseSpaceSpec& spec);

/// W(h) = exp(-i h^) with h^ the quantization of <p_h, q> + <q_h, p>, built
/// as exp(-i<p_h,q>/2) exp(-i<q_h,p>) exp(-i<p_h,q>/2) with a spectral shift.
CMatrix weyl_unitary(const PhasePoint& h, const PhaseSpaceSpec& spec);

/// tr(T W(h)).
Complex weyl_function(const DensityOperator& t, const PhasePoint& h);

/// tr(T A) for an operator in the orthonormal basis.
Complex trace_with(const DensityOperator& t, const CMatrix& op);

/// tr(T S^), real part; throws NonHermitianInput if the imaginary residue
/// exceeds 1e-10.
double expectation(const DensityOperator& t, const HamiltonianSymbol& symbol);

}  // namespace phaselab
