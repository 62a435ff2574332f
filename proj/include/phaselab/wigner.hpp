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

#include <string>
#include <vector>

#include "phaselab/hilbert.hpp"
#include "phaselab/lattice.hpp"
#include "phaselab/tolerance.hpp"
#include "phaselab/types.hpp"
#include "phaselab/weyl.hpp"

namespace phaselab {

enum class FieldRole { wigner_measure_density, eta_density, symbol, weyl_function_samples };
enum class ReferenceMeasure { lebesgue, mu_otimes_nu };

const char* to_string(FieldRole role);
const char* to_string(ReferenceMeasure ref);

/// Values on the 2d-dimensional phase grid, stored as an N x N matrix with
/// rows indexed by the position multi-index and columns by momentum.
///
/// For `weyl_function_samples` the grid is the dual one: rows index the
/// translation part q_h (spacing h) and columns the boost part p_h
/// (spacing pi/L), both centred.
struct PhaseSpaceField {
  PhaseSpaceSpec spec;
  FieldRole role = FieldRole::wigner_measure_density;
  ReferenceMeasure reference = ReferenceMeasure::lebesgue;
  CMatrix values;

  RMatrix real() const { return values.real(); }
  double max_imag() const { return values.imag().cwiseAbs().maxCoeff(); }
  /// Plain grid quadrature of the values (Lebesgue cell volume).
  Complex integral() const;
};

PhaseSpaceField make_field(const PhaseSpaceSpec& spec, FieldRole role, ReferenceMeasure ref,
                           const RMatrix& values);

/// W(q, p) = (2 pi)^-d  int rho(q - r/2, q + r/2) e^{i<r, p>} dr.
///
/// The half-step points q +- r/2 come from band-limited interpolation of the
/// kernel onto the doubled grid; r is restricted to |r_i| <= L.
PhaseSpaceField wigner_from_density(const DensityOperator& t);

/// Samples of tr(T W(h)) on the dual grid.
PhaseSpaceField weyl_function_samples(const DensityOperator& t);

/// F(q_h, p_h) = int f(q, p) exp(-i(<p_h, q> + <q_h, p>)) dq dp on the dual grid.
PhaseSpaceField symplectic_fourier(const PhaseSpaceField& field);
/// Inverse of symplectic_fourier (conjugate kernel, (2 pi)^-2d).
PhaseSpaceField inverse_symplectic_fourier(const PhaseSpaceField& dual);

/// Wigner density recovered from Weyl-function samples.
PhaseSpaceField wigner_from_weyl_function(const PhaseSpaceField& samples);

/// Phi = W / (mu x nu), the density relative to the Gaussian reference.
PhaseSpaceField eta_density(const PhaseSpaceField& w,
                            const TolerancePolicy& tol = default_tolerances());
/// W = Phi (mu x nu).
PhaseSpaceField wigner_from_eta(const PhaseSpaceField& phi);

/// Density operator whose Wigner density is `w`; hermitized but never
/// projected onto PSD, so unphysical input shows up as negative eigenvalues.
DensityOperator inverse_wigner(const PhaseSpaceField& w,
                               const TolerancePolicy& tol = default_tolerances());

/// int G dW (or int G Phi d(mu x nu) for an eta density).
double pair_expectation(const PhaseSpaceField& field, const HamiltonianSymbol& symbol);

/// Marginal on the kept grid factors of a composite phase space.
PhaseSpaceField reduce_wigner(const PhaseSpaceField& w, const CompositeSystem& sys,
                              const std::vector<std::string>& keep);
/// Eta-density form of reduce_wigner: Phi_1 = int Phi d(mu_2 x nu_2).
PhaseSpaceField reduce_eta(const PhaseSpaceField& phi, const CompositeSystem& sys,
                           const std::vector<std::string>& keep);

/// Quantization of a sampled symbol: the operator G^ with
/// tr(T G^) = sum G W_T dq dp for every T (adjoint of wigner_from_density).
CMatrix weyl_quantize_sampled(const RMatrix& symbol, const PhaseSpaceSpec& spec);

/// Symbol sampled on the phase grid.
RMatrix sample_symbol(const PhasePolynomial& poly, const PhaseSpaceSpec& spec);

RVector position_marginal(const PhaseSpaceField& w);
RVector momentum_marginal(const PhaseSpaceField& w);
/// (2 pi)^d int W^2.
double wigner_purity(const PhaseSpaceField& w);

}  // namespace phaselab
