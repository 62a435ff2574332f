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

#include "phaselab/feedback.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "phaselab/wigner.hpp"

namespace phaselab {

namespace {

const std::vector<std::string> kRoleOrder{"P1", "P2", "C1", "C2", "E"};

void require_hermitian(const CMatrix& op, const char* what, const TolerancePolicy& tol) {
  if (op.rows() != op.cols()) throw Error(ErrorKind::FactorMismatch, std::string(what) + " is not square");
  const double scale = std::max(1.0, op.norm());
  if ((op - op.adjoint()).norm() > tol.hermiticity * scale)
    throw Error(ErrorKind::NonHermitianInput, std::string(what) + " is not Hermitian");
}

}  // namespace

SubsystemLayout::SubsystemLayout(std::vector<Factor> factors) {
  for (const auto& f : factors)
    if (std::find(kRoleOrder.begin(), kRoleOrder.end(), f.label) == kRoleOrder.end())
      throw Error(ErrorKind::UnknownSubsystem, "unknown subsystem role '" + f.label + "'");
  for (const auto& role : kRoleOrder) {
    const auto count = std::count_if(factors.begin(), factors.end(),
                                     [&](const Factor& f) { return f.label == role; });
    if (count > 1) throw Error(ErrorKind::UnknownSubsystem, "duplicate subsystem role " + role);
    if (count == 1)
      factors_.push_back(*std::find_if(factors.begin(), factors.end(),
                                       [&](const Factor& f) { return f.label == role; }));
  }
  if (!has("P1") || !has("C1"))
    throw Error(ErrorKind::UnknownSubsystem, "layout needs at least P1 and C1");
  for (auto& f : factors_)
    if (f.spec && f.dim == 0) f.dim = f.spec->dim();
  if (total_dim() > kMaxCompositeDim)
    throw Error(ErrorKind::DimensionCap, "composite dimension " + std::to_string(total_dim()) +
                                             " exceeds " + std::to_string(kMaxCompositeDim));
}

std::vector<std::size_t> SubsystemLayout::dims() const {
  std::vector<std::size_t> out;
  for (const auto& f : factors_) out.push_back(f.dim);
  return out;
}

std::size_t SubsystemLayout::total_dim() const {
  std::size_t total = 1;
  for (const auto& f : factors_) total *= f.dim;
  return total;
}

bool SubsystemLayout::has(const std::string& label) const {
  return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.label == label; });
}

std::size_t SubsystemLayout::index(const std::string& label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (factors_[i].label == label) return i;
  throw Error(ErrorKind::UnknownSubsystem, "no subsystem labelled '" + label + "'");
}

std::vector<std::string> SubsystemLayout::plant_labels() const {
  std::vector<std::string> out{"P1"};
  if (has("P2")) out.push_back("P2");
  return out;
}

std::vector<std::string> SubsystemLayout::controller_labels() const {
  std::vector<std::string> out{"C1"};
  if (has("C2")) out.push_back("C2");
  return out;
}

std::vector<std::string> SubsystemLayout::coupled_labels() const {
  auto out = plant_labels();
  for (const auto& c : controller_labels()) out.push_back(c);
  return out;
}

Factor grid_factor(const std::string& label, const PhaseSpaceSpec& spec) {
  return Factor{label, spec.dim(), spec};
}

Factor level_factor(const std::string& label, std::size_t levels) {
  if (levels < 2) throw Error(ErrorKind::FactorMismatch, "a level factor needs at least two levels");
  return Factor{label, levels, std::nullopt};
}

int factor_dof(const Factor& f) { return f.spec ? f.spec->d() : 1; }

CMatrix factor_operator(const Factor& f, const PhasePolynomial& poly) {
  const int dof = factor_dof(f);
  if (poly.num_vars() != static_cast<std::size_t>(2 * dof))
    throw Error(ErrorKind::FactorMismatch, "polynomial variables do not match factor " + f.label);
  if (f.spec) return weyl_quantize(HamiltonianSymbol::from_polynomial(poly), *f.spec);
  const int levels = static_cast<int>(f.dim);
  CMatrix op = weyl_order(poly, {position_operator_levels(levels)}, {momentum_operator_levels(levels)});
  return 0.5 * (op + op.adjoint());
}

CMatrix embed_on(const SubsystemLayout& layout, const std::vector<std::string>& labels,
                 const CMatrix& op, const std::vector<std::string>& support) {
  std::vector<std::size_t> dims, positions;
  for (const auto& l : labels) dims.push_back(layout.factor(l).dim);
  for (const auto& s : support) {
    auto it = std::find(labels.begin(), labels.end(), s);
    if (it == labels.end()) throw Error(ErrorKind::UnknownSubsystem, "subsystem '" + s + "' is not in scope");
    positions.push_back(static_cast<std::size_t>(it - labels.begin()));
  }
  return embed(op, dims, positions);
}

CMatrix assemble_coupling(const CouplingSpec& spec, const SubsystemLayout& layout,
                          const TolerancePolicy& tol) {
  std::vector<std::string> labels;
  for (const auto& f : layout.factors()) labels.push_back(f.label);
  std::size_t total = layout.total_dim();
  CMatrix out = CMatrix::Zero(total, total);
  for (const auto& term : spec.terms) {
    require_hermitian(term.op, "coupling term", tol);
    out += embed_on(layout, labels, term.op, term.support);
  }
  return out;
}

namespace {

std::vector<std::string> all_labels(const SubsystemLayout& layout) {
  std::vector<std::string> out;
  for (const auto& f : layout.factors()) out.push_back(f.label);
  return out;
}

void require_roles(const SubsystemLayout& layout, const std::vector<std::string>& roles) {
  for (const auto& r : roles)
    if (!layout.has(r)) throw Error(ErrorKind::FactorMismatch, "layout lacks subsystem " + r);
}

}  // namespace

CMatrix build_feedback_hamiltonian(const CMatrix& h_p, const CMatrix& h_c, const CMatrix& k1,
                                   const CMatrix& k2, const SubsystemLayout& layout,
                                   const TolerancePolicy& tol) {
  require_roles(layout, {"P1", "P2", "C1", "C2"});
  require_hermitian(h_p, "plant Hamiltonian", tol);
  require_hermitian(h_c, "controller Hamiltonian", tol);
  require_hermitian(k1, "first feedback coupling", tol);
  require_hermitian(k2, "second feedback coupling", tol);
  const auto labels = all_labels(layout);
  return embed_on(layout, labels, h_p, {"P1", "P2"}) + embed_on(layout, labels, h_c, {"C1", "C2"}) +
         embed_on(layout, labels, k1, {"P1", "C1"}) + embed_on(layout, labels, k2, {"P2", "C2"});
}

CMatrix build_general_hamiltonian(const CMatrix& h_p, const CMatrix& h_c, const CMatrix& k,
                                  const SubsystemLayout& layout, const TolerancePolicy& tol) {
  require_hermitian(h_p, "plant Hamiltonian", tol);
  require_hermitian(h_c, "controller Hamiltonian", tol);
  require_hermitian(k, "coupling", tol);
  const auto labels = all_labels(layout);
  return embed_on(layout, labels, h_p, layout.plant_labels()) +
         embed_on(layout, labels, h_c, layout.controller_labels()) +
         embed_on(layout, labels, k, layout.coupled_labels());
}

CMatrix build_refined_hamiltonian(const RefinedParts& parts, const SubsystemLayout& layout,
                                  const TolerancePolicy& tol) {
  require_roles(layout, {"P1", "P2", "C1", "C2"});
  const auto labels = all_labels(layout);
  const std::vector<std::pair<const CMatrix*, std::vector<std::string>>> terms{
      {&parts.h_p1, {"P1"}},         {&parts.h_p2, {"P2"}},       {&parts.k_p1p2, {"P1", "P2"}},
      {&parts.h_c1, {"C1"}},         {&parts.h_c2, {"C2"}},       {&parts.k_c1c2, {"C1", "C2"}},
      {&parts.k1, {"P1", "C1"}},     {&parts.k2, {"P2", "C2"}}};
  const std::size_t total = layout.total_dim();
  CMatrix out = CMatrix::Zero(total, total);
  for (const auto& [op, support] : terms) {
    require_hermitian(*op, "refined Hamiltonian term", tol);
    out += embed_on(layout, labels, *op, support);
  }
  return out;
}

const char* to_string(CouplingClass c) {
  switch (c) {
    case CouplingClass::feedback: return "feedback";
    case CouplingClass::no_feedback: return "no_feedback";
    case CouplingClass::general: return "general";
  }
  return "general";
}

FeedbackVerdict classify_coupling(const CMatrix& k, const SubsystemLayout& layout,
                                  const TolerancePolicy& tol) {
  const auto labels = layout.coupled_labels();
  std::vector<std::size_t> dims;
  for (const auto& l : labels) dims.push_back(layout.factor(l).dim);
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  if (static_cast<std::size_t>(k.rows()) != total || k.rows() != k.cols())
    throw Error(ErrorKind::FactorMismatch, "coupling does not act on the plant-controller space");
  require_hermitian(k, "coupling", tol);

  // regroup as (P1 C1) | (P2 C2); absent factors have dimension one
  auto dim_of = [&](const std::string& l) { return layout.has(l) ? layout.factor(l).dim : std::size_t{1}; };
  std::vector<std::size_t> order;
  for (const auto& l : {"P1", "C1", "P2", "C2"}) {
    auto it = std::find(labels.begin(), labels.end(), l);
    if (it != labels.end()) order.push_back(static_cast<std::size_t>(it - labels.begin()));
  }
  const CMatrix kp = permute_factors(k, dims, order);
  const std::size_t da = dim_of("P1") * dim_of("C1"), db = dim_of("P2") * dim_of("C2");

  FeedbackVerdict v;
  v.scalar = kp.trace().real() / static_cast<double>(total);
  const CMatrix k0 = kp - v.scalar * CMatrix::Identity(total, total);
  const double k0_norm = k0.norm();
  v.a = partial_trace(k0, {da, db}, {0}) / static_cast<double>(db);
  v.b = partial_trace(k0, {da, db}, {1}) / static_cast<double>(da);
  if (k0_norm <= tol.classifier_nonscalar * kp.norm()) {
    v.cls = CouplingClass::no_feedback;
    return v;
  }
  const CMatrix fit = embed(v.a, {da, db}, {0}) + embed(v.b, {da, db}, {1});
  v.residual = (k0 - fit).norm() / k0_norm;
  v.a_weight = v.a.norm() * std::sqrt(static_cast<double>(db)) / k0_norm;
  v.b_weight = v.b.norm() * std::sqrt(static_cast<double>(da)) / k0_norm;
  if (v.residual > tol.classifier_residual)
    v.cls = CouplingClass::general;
  else if (v.a_weight > tol.classifier_nonscalar && v.b_weight > tol.classifier_nonscalar)
    v.cls = CouplingClass::feedback;
  else
    v.cls = CouplingClass::no_feedback;
  return v;
}

CMatrix recipe_state(const Factor& f, const StateRecipe& recipe) {
  if (f.spec) {
    const PhaseSpaceSpec& spec = *f.spec;
    const int d = spec.d();
    auto vec = [&](Eigen::Index offset) {
      RVector v = RVector::Zero(d);
      for (int i = 0; i < d && offset + i < recipe.a.size(); ++i) v(i) = recipe.a(offset + i);
      return v;
    };
    if (recipe.kind == "ground") return pure_density(hermite_state(spec, std::vector<int>(d, 0))).orthonormal();
    if (recipe.kind == "displaced") return pure_density(displaced_state(spec, vec(0), vec(d))).orthonormal();
    if (recipe.kind == "cat") return pure_density(cat_state(spec, vec(0), recipe.even)).orthonormal();
    if (recipe.kind == "thermal") return thermal_state(spec, recipe.beta).orthonormal();
    throw Error(ErrorKind::SchemaViolation, "unknown state recipe '" + recipe.kind + "'");
  }
  const int levels = static_cast<int>(f.dim);
  auto coherent = [&](double q, double p) {
    const Complex alpha(q / std::sqrt(2.0), p / std::sqrt(2.0));
    CVector c(levels);
    Complex term(1.0);
    for (int k = 0; k < levels; ++k) {
      c(k) = term;
      term *= alpha / std::sqrt(static_cast<double>(k + 1));
    }
    return CVector(c.normalized());
  };
  const double q0 = recipe.a.size() > 0 ? recipe.a(0) : 0.0;
  const double p0 = recipe.a.size() > 1 ? recipe.a(1) : 0.0;
  if (recipe.kind == "ground" || recipe.kind == "displaced") {
    const CVector c = recipe.kind == "ground" ? coherent(0.0, 0.0) : coherent(q0, p0);
    return c * c.adjoint();
  }
  if (recipe.kind == "cat") {
    const CVector c = (coherent(q0, p0) + (recipe.even ? 1.0 : -1.0) * coherent(-q0, -p0)).normalized();
    return c * c.adjoint();
  }
  if (recipe.kind == "thermal") {
    RVector w(levels);
    for (int k = 0; k < levels; ++k) w(k) = std::exp(-recipe.beta * k);
    w /= w.sum();
    return w.cast<Complex>().asDiagonal();
  }
  throw Error(ErrorKind::SchemaViolation, "unknown state recipe '" + recipe.kind + "'");
}

CMatrix kron_all(const std::vector<CMatrix>& parts) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (const auto& p : parts) {
    CMatrix next(out.rows() * p.rows(), out.cols() * p.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        next.block(i * p.rows(), j * p.cols(), p.rows(), p.cols()) = out(i, j) * p;
    out = std::move(next);
  }
  return out;
}

namespace {

std::optional<PhaseSpaceSpec> plant_spec(const SubsystemLayout& layout) {
  std::optional<PhaseSpaceSpec> out;
  for (const auto& l : layout.plant_labels()) {
    const Factor& f = layout.factor(l);
    if (!f.spec) return std::nullopt;
    out = out ? combine(*out, *f.spec) : *f.spec;
  }
  return out;
}

}  // namespace

ScenarioResult run_scenario(const SubsystemLayout& layout, const CMatrix& hamiltonian,
                            const CMatrix& plant_hamiltonian, const CMatrix& initial,
                            const ScenarioRun& run) {
  const std::size_t total = layout.total_dim();
  if (static_cast<std::size_t>(hamiltonian.rows()) != total || static_cast<std::size_t>(initial.rows()) != total)
    throw Error(ErrorKind::FactorMismatch, "Hamiltonian or state does not act on the composite space");
  if (!(run.dt > 0.0) || run.stride < 1 || run.t_end < 0.0)
    throw Error(ErrorKind::SchemaViolation, "scenario run needs dt > 0, stride >= 1 and t_end >= 0");

  const std::vector<std::size_t> dims = layout.dims();
  std::vector<std::size_t> keep;
  for (const auto& l : layout.plant_labels()) keep.push_back(layout.index(l));
  const std::optional<PhaseSpaceSpec> pspec = plant_spec(layout);

  bool all_grid = true;
  int total_d = 0;
  for (const auto& f : layout.factors()) {
    all_grid = all_grid && f.spec.has_value();
    total_d += factor_dof(f);
  }
  const bool square = run.commuting_square && all_grid && total_d <= 2;
  std::optional<PhaseSpaceSpec> composite;
  if (square)
    for (const auto& f : layout.factors()) composite = composite ? combine(*composite, *f.spec) : *f.spec;

  const CMatrix herm = 0.5 * (hamiltonian + hamiltonian.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
  const CMatrix& vecs = eig.eigenvectors();
  const RVector& vals = eig.eigenvalues();
  const CMatrix r0 = vecs.adjoint() * initial * vecs;

  ScenarioResult result;
  const long steps = static_cast<long>(std::ceil(run.t_end / run.dt - 1e-9));
  for (long s = 0; s <= steps; ++s) {
    const double t = s == steps ? run.t_end : static_cast<double>(s) * run.dt;
    CVector phase(vals.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) phase(i) = std::polar(1.0, -vals(i) * t);
    const CMatrix rt = vecs * (phase.asDiagonal() * r0 * phase.conjugate().asDiagonal()) * vecs.adjoint();
    const CMatrix plant = partial_trace(rt, dims, keep);

    ScenarioRow row;
    row.t = t;
    row.plant_purity = (plant * plant).trace().real();
    row.plant_energy = (plant * plant_hamiltonian).trace().real();
    const bool snapshot = s % run.stride == 0 || s == steps;
    if (pspec && (run.plant_wigner || square) && snapshot) {
      const PhaseSpaceField w = wigner_from_density(DensityOperator::from_orthonormal(*pspec, plant));
      if (square) {
        const PhaseSpaceField wc = wigner_from_density(DensityOperator::from_orthonormal(*composite, rt));
        const PhaseSpaceField reduced = reduce_wigner(wc, layout.system(), layout.plant_labels());
        row.square_error = (reduced.real() - w.real()).cwiseAbs().maxCoeff();
      }
      if (run.plant_wigner) result.plant_snapshots.push_back({t, w});
    }
    if (snapshot) result.plant_states.push_back(plant);
    result.rows.push_back(row);
  }
  return result;
}

std::vector<Snapshot> run_classical_scenario(const SubsystemLayout& layout, const HamiltonianSymbol& symbol,
                                             const CMatrix& initial, const EvolutionRun& run) {
  std::optional<PhaseSpaceSpec> composite;
  for (const auto& f : layout.factors()) {
    if (!f.spec) throw Error(ErrorKind::FactorMismatch, "classical scenarios need grid factors");
    composite = composite ? combine(*composite, *f.spec) : *f.spec;
  }
  if (composite->d() > 2)
    throw Error(ErrorKind::DimensionCap, "classical scenarios are limited to two phase-space dimensions");
  EvolutionRun classical = run;
  classical.classical = true;
  const PhaseSpaceField w0 = wigner_from_density(DensityOperator::from_orthonormal(*composite, initial));
  const EvolutionResult res = evolve(w0, symbol, classical);
  std::vector<Snapshot> out;
  for (const auto& snap : res.snapshots)
    out.push_back({snap.t, reduce_wigner(snap.field, layout.system(), layout.plant_labels())});
  return out;
}

}  // namespace phaselab
