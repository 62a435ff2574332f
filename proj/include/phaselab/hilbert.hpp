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
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "phaselab/lattice.hpp"
#include "phaselab/tolerance.hpp"
#include "phaselab/types.hpp"

namespace phaselab {

/// Which inner product a grid function is written against: plain Lebesgue
/// quadrature, or L2(Q, mu) with the reference Gaussian as weight.
enum class Representation { lebesgue, gaussian };

const char* to_string(Representation rep);

/// Wave function sampled on the position grid.
struct StateVector {
  PhaseSpaceSpec spec;
  CVector values;
  Representation rep = Representation::lebesgue;

  double norm() const;
  /// Coefficients in the orthonormal grid basis (Lebesgue frame).
  CVector coefficients() const;
};

/// Density operator stored as its kernel sampled at grid pairs, relative to
/// the measure named by `rep`:
///   (T phi)(x_a) = sum_b kernel(a, b) phi(x_b) w_b,
/// with w_b = h^d (lebesgue) or mu(x_b) h^d (gaussian).
class DensityOperator {
 public:
  DensityOperator() = default;
  DensityOperator(PhaseSpaceSpec spec, CMatrix kernel, Representation rep);

  /// Wraps a matrix given in the orthonormal grid basis (trace one = plain trace).
  static DensityOperator from_orthonormal(const PhaseSpaceSpec& spec, const CMatrix& matrix);

  const PhaseSpaceSpec& spec() const { return spec_; }
  const CMatrix& kernel() const { return kernel_; }
  Representation rep() const { return rep_; }
  std::size_t dim() const { return static_cast<std::size_t>(kernel_.rows()); }

  /// Matrix in the orthonormal grid basis; identical for both representations.
  CMatrix orthonormal() const;

  Complex trace() const;
  double purity() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
  RVector eigenvalues() const;

  CVector apply(const CVector& phi) const;

  /// Throws NonPhysicalState when the trace, hermiticity or PSD floor is violated.
  void check(const TolerancePolicy& tol = default_tolerances()) const;

 private:
  PhaseSpaceSpec spec_;
  CMatrix kernel_;
  Representation rep_ = Representation::lebesgue;
};

StateVector to_gaussian_rep(const StateVector& x);
StateVector to_lebesgue_rep(const StateVector& x);
DensityOperator to_gaussian_rep(const DensityOperator& x);
DensityOperator to_lebesgue_rep(const DensityOperator& x);

DensityOperator pure_density(const StateVector& phi,
                             const TolerancePolicy& tol = default_tolerances());

/// Convex combination; weights are renormalized to sum to one.
DensityOperator mix(const std::vector<std::pair<double, DensityOperator>>& parts);

// --- composite systems --------------------------------------------------------

struct Factor {
  std::string label;
  std::size_t dim = 0;
  std::optional<PhaseSpaceSpec> spec;  // set for grid factors
};

/// Ordered tensor factors; index maps put the first factor most significant.
class CompositeSystem {
 public:
  CompositeSystem() = default;
  explicit CompositeSystem(std::vector<Factor> factors);

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t total_dim() const { return total_dim_; }
  std::vector<std::size_t> dims() const;
  std::size_t index_of(const std::string& label) const;
  bool contains(const std::string& label) const;

 private:
  std::vector<Factor> factors_;
  std::size_t total_dim_ = 1;
};

/// Kronecker product of two kernels on the product grid.
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);
/// Tensor product checked against the factor specs recorded in `sys`.
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b,
                       const CompositeSystem& sys);

/// Partial trace of a matrix in an orthonormal product basis.
CMatrix partial_trace(const CMatrix& matrix, const std::vector<std::size_t>& dims,
                      const std::vector<std::size_t>& keep);
/// Reduced density operator on the kept grid factors (order preserved).
DensityOperator partial_trace(const DensityOperator& t, const CompositeSystem& sys,
                              const std::vector<std::string>& keep);

/// Operator `op` acting on the factors `support` (in the order given), lifted
/// to the full product space with identities elsewhere.
CMatrix embed(const CMatrix& op, const std::vector<std::size_t>& dims,
              const std::vector<std::size_t>& support);

/// Reorders tensor factors: result factor k is input factor `order[k]`.
CMatrix permute_factors(const CMatrix& op, const std::vector<std::size_t>& dims,
                        const std::vector<std::size_t>& order);

// --- integral kernels ---------------------------------------------------------

enum class KernelKind { rho1, rho2 };

/// rho1 and rho2 in the Gaussian-weighted conventions. rho2 is stored as
/// density times cell volume of its second argument.
struct IntegralKernel {
  PhaseSpaceSpec spec;
  KernelKind kind = KernelKind::rho1;
  CMatrix values;
};

IntegralKernel kernel_of(const DensityOperator& t, KernelKind kind);
/// Applies the kernel to a Gaussian-representation function via its defining
/// quadrature; returns T phi in the Gaussian representation.
CVector apply_kernel(const IntegralKernel& kernel, const CVector& phi);

/// exp(-<B^-1 x, x>/2) on the position grid (unnormalized Gaussian density).
RVector generalized_density(const PhaseSpaceSpec& spec);

// --- state recipes ------------------------------------------------------------

/// Hermite function of order `level` per axis (product over axes).
StateVector hermite_state(const PhaseSpaceSpec& spec, const std::vector<int>& levels);
/// Oscillator ground state displaced to (q0, p0).
StateVector displaced_state(const PhaseSpaceSpec& spec, const RVector& q0, const RVector& p0);
/// Normalized superposition of ground states displaced to +a and -a.
StateVector cat_state(const PhaseSpaceSpec& spec, const RVector& a, bool even = true);
/// Gibbs state of (q^2 + p^2)/2 per axis at inverse temperature beta.
DensityOperator thermal_state(const PhaseSpaceSpec& spec, double beta);

/// Random mixed state: a mixture of `rank` random superpositions of the lowest
/// oscillator levels, displaced by at most `max_shift`.
DensityOperator random_mixed_state(const PhaseSpaceSpec& spec, std::mt19937_64& rng,
                                   int rank = 3, int max_level = 2, double max_shift = 1.0);

/// Momentum density |psi~(p)|^2 of the state on the momentum grid.
RVector momentum_density(const DensityOperator& t);
/// Position density on the position grid.
RVector position_density(const DensityOperator& t);

}  // namespace phaselab
