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
#include <string>
#include <vector>

#include "phaselab/hilbert.hpp"
#include "phaselab/moyal.hpp"
#include "phaselab/tolerance.hpp"
#include "phaselab/types.hpp"
#include "phaselab/weyl.hpp"

namespace phaselab {

inline constexpr std::size_t kMaxCompositeDim = 65536;

/// Plant factors P1, P2, controller factors C1, C2 and an optional
/// perturbation factor E, stored in that order.
class SubsystemLayout {
 public:
  SubsystemLayout() = default;
  explicit SubsystemLayout(std::vector<Factor> factors);

  const std::vector<Factor>& factors() const { return factors_; }
  CompositeSystem system() const { return CompositeSystem(factors_); }
  std::vector<std::size_t> dims() const;
  std::size_t total_dim() const;
  bool has(const std::string& label) const;
  std::size_t index(const std::string& label) const;
  const Factor& factor(const std::string& label) const { return factors_[index(label)]; }

  std::vector<std::string> plant_labels() const;
  std::vector<std::string> controller_labels() const;
  /// Plant and controller labels (everything except E).
  std::vector<std::string> coupled_labels() const;

 private:
  std::vector<Factor> factors_;
};

/// Grid factor or level-truncated oscillator factor.
Factor grid_factor(const std::string& label, const PhaseSpaceSpec& spec);
Factor level_factor(const std::string& label, std::size_t levels);

/// Degrees of freedom of a factor (grid dimension, or 1 for level factors).
int factor_dof(const Factor& f);

/// Weyl-ordered operator of a polynomial in the factor's (q, p) variables.
CMatrix factor_operator(const Factor& f, const PhasePolynomial& poly);

struct CouplingTerm {
  std::vector<std::string> support;
  CMatrix op;  // acts on the support factors, in the order listed
};

struct CouplingSpec {
  std::vector<CouplingTerm> terms;
};

/// Operator on `labels` (layout order) made from `op` acting on `support`.
CMatrix embed_on(const SubsystemLayout& layout, const std::vector<std::string>& labels,
                 const CMatrix& op, const std::vector<std::string>& support);

/// Sum of the embedded coupling terms on the plant-controller space.
CMatrix assemble_coupling(const CouplingSpec& spec, const SubsystemLayout& layout,
                          const TolerancePolicy& tol = default_tolerances());

/// H_P on P1 P2, H_C on C1 C2, K1 on P1 C1, K2 on P2 C2.
CMatrix build_feedback_hamiltonian(const CMatrix& h_p, const CMatrix& h_c, const CMatrix& k1,
                                   const CMatrix& k2, const SubsystemLayout& layout,
                                   const TolerancePolicy& tol = default_tolerances());

/// K acts on the whole plant-controller space.
CMatrix build_general_hamiltonian(const CMatrix& h_p, const CMatrix& h_c, const CMatrix& k,
                                  const SubsystemLayout& layout,
                                  const TolerancePolicy& tol = default_tolerances());

struct RefinedParts {
  CMatrix h_p1, h_p2, k_p1p2;
  CMatrix h_c1, h_c2, k_c1c2;
  CMatrix k1, k2;  // on P1 C1 and P2 C2
};

CMatrix build_refined_hamiltonian(const RefinedParts& parts, const SubsystemLayout& layout,
                                  const TolerancePolicy& tol = default_tolerances());

enum class CouplingClass { feedback, no_feedback, general };

const char* to_string(CouplingClass c);

struct FeedbackVerdict {
  CouplingClass cls = CouplingClass::general;
  CMatrix a;              // traceless witness on P1 C1
  CMatrix b;              // traceless witness on P2 C2
  double scalar = 0.0;    // identity component per dimension
  double residual = 0.0;  // relative Frobenius residual of the split fit
  double a_weight = 0.0;  // |A x I| / |K - scalar|
  double b_weight = 0.0;  // |I x B| / |K - scalar|
};

/// K acts on the plant-controller space in layout order.
FeedbackVerdict classify_coupling(const CMatrix& k, const SubsystemLayout& layout,
                                  const TolerancePolicy& tol = default_tolerances());

struct StateRecipe {
  std::string kind = "ground";  // ground | displaced | cat | thermal
  RVector a;                    // displacement (q then p) or cat amplitude
  double beta = 1.0;
  bool even = true;
};

/// Density matrix of a factor state in its orthonormal basis.
CMatrix recipe_state(const Factor& f, const StateRecipe& recipe);
CMatrix kron_all(const std::vector<CMatrix>& parts);

struct ScenarioRun {
  double dt = 0.05;  // spacing of recorded times
  double t_end = 1.0;
  int stride = 1;    // Wigner snapshot every `stride` recorded times
  bool plant_wigner = true;
  bool commuting_square = true;
};

struct ScenarioRow {
  double t = 0.0;
  double plant_purity = 0.0;
  double plant_energy = 0.0;
  double square_error = -1.0;  // negative when the check does not apply
};

struct ScenarioResult {
  std::vector<ScenarioRow> rows;
  std::vector<Snapshot> plant_snapshots;
  std::vector<CMatrix> plant_states;
};

/// Exact composite evolution, reduced to the plant at each recorded time.
ScenarioResult run_scenario(const SubsystemLayout& layout, const CMatrix& hamiltonian,
                            const CMatrix& plant_hamiltonian, const CMatrix& initial,
                            const ScenarioRun& run);

/// Classical Liouville flow on the composite grid, reduced to the plant.
std::vector<Snapshot> run_classical_scenario(const SubsystemLayout& layout,
                                             const HamiltonianSymbol& symbol,
                                             const CMatrix& initial, const EvolutionRun& run);

}  // namespace phaselab
