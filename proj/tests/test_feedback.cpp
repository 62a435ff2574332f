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


#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oracles.hpp"
#include "phaselab/feedback.hpp"

using namespace phaselab;

namespace {

/// Embedding by explicit index loops: `op` acts on the factors listed in
/// `support` (in that order); identities elsewhere.
CMatrix embed_loops(const CMatrix& op, const std::vector<std::size_t>& dims,
                    const std::vector<std::size_t>& support) {
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  auto digits = [&](std::size_t flat) {
    std::vector<std::size_t> out(dims.size());
    for (std::size_t k = dims.size(); k-- > 0;) {
      out[k] = flat % dims[k];
      flat /= dims[k];
    }
    return out;
  };
  CMatrix out = CMatrix::Zero(total, total);
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = 0; j < total; ++j) {
      auto di = digits(i), dj = digits(j);
      bool same = true;
      for (std::size_t k = 0; k < dims.size(); ++k)
        if (std::find(support.begin(), support.end(), k) == support.end() && di[k] != dj[k]) same = false;
      if (!same) continue;
      std::size_t a = 0, b = 0;
      for (auto s : support) {
        a = a * dims[s] + di[s];
        b = b * dims[s] + dj[s];
      }
      out(i, j) = op(a, b);
    }
  return out;
}

SubsystemLayout four_levels(std::size_t p1, std::size_t p2, std::size_t c1, std::size_t c2) {
  return SubsystemLayout({level_factor("P1", p1), level_factor("P2", p2), level_factor("C1", c1),
                          level_factor("C2", c2)});
}

CMatrix q_levels(std::size_t m) { return position_operator_levels(static_cast<int>(m)); }
CMatrix p_levels(std::size_t m) { return momentum_operator_levels(static_cast<int>(m)); }

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IoFailure;
}

/// Relative least-squares residual of K against {A x I + I x B} across the
/// cut (first da | last db), by closed-form partial-trace projection.
double split_residual(const CMatrix& k, Eigen::Index da, Eigen::Index db) {
  const Eigen::Index dim = da * db;
  CMatrix centred = k - k.trace() / double(dim) * CMatrix::Identity(dim, dim);
  CMatrix a = oracle::trace_second(centred, da, db) / double(db);
  CMatrix b = oracle::trace_first(centred, da, db) / double(da);
  CMatrix fit = oracle::kron(a, CMatrix::Identity(db, db)) + oracle::kron(CMatrix::Identity(da, da), b);
  return (centred - fit).norm() / centred.norm();
}

}  // namespace

TEST_CASE("uncoupled build is a tensor sum") {
  auto layout = four_levels(2, 3, 2, 2);
  std::mt19937_64 rng(301);
  CMatrix hp = oracle::random_hermitian(6, rng), hc = oracle::random_hermitian(4, rng);
  CMatrix h = build_feedback_hamiltonian(hp, hc, CMatrix::Zero(4, 4), CMatrix::Zero(6, 6), layout);
  Eigen::SelfAdjointEigenSolver<CMatrix> eh(h), ep(hp), ec(hc);
  std::vector<double> sums;
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) sums.push_back(ep.eigenvalues()(i) + ec.eigenvalues()(j));
  std::sort(sums.begin(), sums.end());
  for (std::size_t i = 0; i < sums.size(); ++i) CHECK(std::abs(eh.eigenvalues()(i) - sums[i]) < 1e-10);
}

TEST_CASE("feedback build on four-level factors matches explicit Kronecker products") {
  const std::size_t m = 4;
  auto layout = four_levels(m, m, m, m);
  const std::vector<std::size_t> dims{m, m, m, m};
  CMatrix q = q_levels(m), p = p_levels(m);
  CMatrix h1 = 0.5 * (q * q + p * p);
  CMatrix hp = oracle::kron(h1, CMatrix::Identity(m, m)) + oracle::kron(CMatrix::Identity(m, m), h1);
  CMatrix hc = 1.3 * hp;
  CMatrix k1 = oracle::kron(q, q), k2 = 0.7 * oracle::kron(q, q);
  CMatrix h = build_feedback_hamiltonian(hp, hc, k1, k2, layout);
  CHECK(oracle::max_abs(h - h.adjoint()) < 1e-10);
  CMatrix expected = embed_loops(hp, dims, {0, 1}) + embed_loops(hc, dims, {2, 3}) +
                     embed_loops(k1, dims, {0, 2}) + embed_loops(k2, dims, {1, 3});
  CHECK(oracle::max_abs(h - expected) < 1e-12);

  CMatrix coupling = embed_loops(k1, dims, {0, 2}) + embed_loops(k2, dims, {1, 3});
  auto verdict = classify_coupling(coupling, layout);
  CHECK(verdict.cls == CouplingClass::feedback);
  CHECK(verdict.residual < 1e-10);

  CHECK(kind_of([&] { build_feedback_hamiltonian(hp, hc, k1, CMatrix::Zero(3, 3), layout); }) ==
        ErrorKind::FactorMismatch);
  CMatrix skew = k1;
  skew(0, 1) += 1.0;
  CHECK(kind_of([&] { build_feedback_hamiltonian(hp, hc, skew, k2, layout); }) == ErrorKind::NonHermitianInput);
}

TEST_CASE("general builder") {
  const std::size_t m = 3;
  auto layout = four_levels(m, m, m, m);
  const std::vector<std::size_t> dims{m, m, m, m};
  CMatrix q = q_levels(m);
  std::mt19937_64 rng(307);
  CMatrix hp = oracle::random_hermitian(9, rng), hc = oracle::random_hermitian(9, rng);
  CMatrix k1 = oracle::kron(q, q), k2 = oracle::kron(q, p_levels(m));
  k2 = 0.5 * (k2 + k2.adjoint());
  CMatrix k = embed_loops(k1, dims, {0, 2}) + embed_loops(k2, dims, {1, 3});
  CMatrix general = build_general_hamiltonian(hp, hc, k, layout);
  CMatrix feedback = build_feedback_hamiltonian(hp, hc, k1, k2, layout);
  CHECK(oracle::max_abs(general - feedback) < 1e-14);

  CMatrix one_sided = embed_loops(k1, dims, {0, 2});
  CHECK(classify_coupling(one_sided, layout).cls == CouplingClass::no_feedback);

  CMatrix random = oracle::random_hermitian(81, rng);
  auto verdict = classify_coupling(random, layout);
  CHECK(verdict.cls == CouplingClass::general);
  CHECK(verdict.residual ==
        doctest::Approx(split_residual(permute_factors(random, dims, {0, 2, 1, 3}), 9, 9)).epsilon(1e-10));
}

TEST_CASE("refined builder") {
  const std::size_t m = 3;
  auto layout = four_levels(m, m, m, m);
  const std::vector<std::size_t> dims{m, m, m, m};
  std::mt19937_64 rng(311);
  RefinedParts parts;
  parts.h_p1 = oracle::random_hermitian(m, rng);
  parts.h_p2 = oracle::random_hermitian(m, rng);
  parts.k_p1p2 = CMatrix::Zero(9, 9);
  parts.h_c1 = oracle::random_hermitian(m, rng);
  parts.h_c2 = oracle::random_hermitian(m, rng);
  parts.k_c1c2 = CMatrix::Zero(9, 9);
  parts.k1 = oracle::random_hermitian(9, rng);
  parts.k2 = oracle::random_hermitian(9, rng);
  CMatrix id = CMatrix::Identity(m, m);
  CMatrix hp = oracle::kron(parts.h_p1, id) + oracle::kron(id, parts.h_p2);
  CMatrix hc = oracle::kron(parts.h_c1, id) + oracle::kron(id, parts.h_c2);
  CMatrix refined = build_refined_hamiltonian(parts, layout);
  CHECK(oracle::max_abs(refined - build_feedback_hamiltonian(hp, hc, parts.k1, parts.k2, layout)) < 1e-12);

  RefinedParts single;
  single.h_p1 = single.h_p2 = single.h_c1 = single.h_c2 = CMatrix::Zero(m, m);
  single.k_p1p2 = single.k_c1c2 = single.k2 = CMatrix::Zero(9, 9);
  single.k1 = oracle::random_hermitian(9, rng);
  CHECK(classify_coupling(build_refined_hamiltonian(single, layout), layout).cls == CouplingClass::no_feedback);

  parts.k_p1p2 = oracle::random_hermitian(9, rng);
  parts.k_c1c2 = oracle::random_hermitian(9, rng);
  CMatrix full = build_refined_hamiltonian(parts, layout);
  CHECK(oracle::max_abs(full - full.adjoint()) < 1e-10);
  Eigen::ComplexEigenSolver<CMatrix> ces(full);
  CHECK(ces.eigenvalues().imag().cwiseAbs().maxCoeff() < 1e-10);
  CMatrix expected = embed_loops(parts.h_p1, dims, {0}) + embed_loops(parts.h_p2, dims, {1}) +
                     embed_loops(parts.k_p1p2, dims, {0, 1}) + embed_loops(parts.h_c1, dims, {2}) +
                     embed_loops(parts.h_c2, dims, {3}) + embed_loops(parts.k_c1c2, dims, {2, 3}) +
                     embed_loops(parts.k1, dims, {0, 2}) + embed_loops(parts.k2, dims, {1, 3});
  CHECK(oracle::max_abs(full - expected) < 1e-12);
}

TEST_CASE("classifier on the canonical couplings") {
  const std::size_t m = 4;
  auto layout = four_levels(m, m, m, m);
  const std::vector<std::size_t> dims{m, m, m, m};
  CMatrix q = q_levels(m);
  CMatrix qq = oracle::kron(q, q);
  CMatrix fb = embed_loops(qq, dims, {0, 2}) + embed_loops(qq, dims, {1, 3});
  auto v = classify_coupling(fb, layout);
  CHECK(v.cls == CouplingClass::feedback);
  CHECK(v.residual < 1e-10);
  CHECK(classify_coupling(embed_loops(qq, dims, {0, 2}), layout).cls == CouplingClass::no_feedback);

  CMatrix product = oracle::kron(oracle::kron(q, q), oracle::kron(q, q));
  auto g = classify_coupling(product, layout);
  CHECK(g.cls == CouplingClass::general);
  CHECK(g.residual > 1e-2);
  // A product of traceless factors across the cut has no split component at all.
  CHECK(g.residual == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(classify_coupling(CMatrix::Identity(256, 256), layout).cls == CouplingClass::no_feedback);
  CMatrix skew = fb;
  skew(0, 3) += Complex(0.0, 1.0);
  CHECK(kind_of([&] { classify_coupling(skew, layout); }) == ErrorKind::NonHermitianInput);
}

TEST_CASE("property: verdicts are invariant under positive scaling and identity shifts") {
  const std::size_t m = 3;
  auto layout = four_levels(m, m, m, m);
  const std::vector<std::size_t> dims{m, m, m, m};
  std::mt19937_64 rng(313);
  CMatrix k1 = oracle::random_hermitian(9, rng), k2 = oracle::random_hermitian(9, rng);
  std::vector<std::pair<CMatrix, CouplingClass>> cases{
      {embed_loops(k1, dims, {0, 2}) + embed_loops(k2, dims, {1, 3}), CouplingClass::feedback},
      {embed_loops(k1, dims, {0, 2}), CouplingClass::no_feedback},
      {oracle::random_hermitian(81, rng), CouplingClass::general}};
  CMatrix id = CMatrix::Identity(81, 81);
  for (const auto& [k, cls] : cases) {
    CHECK(classify_coupling(k, layout).cls == cls);
    for (double alpha : {0.01, 0.5, 3.0, 40.0})
      for (double c : {-7.0, 0.0, 2.5}) CHECK(classify_coupling(alpha * k + c * id, layout).cls == cls);
  }
}

TEST_CASE("property: generator set on two- and three-level factors") {
  for (std::size_t m : {2ul, 3ul}) {
    auto layout = four_levels(m, m, m, m);
    const std::vector<std::size_t> dims{m, m, m, m};
    CMatrix q = q_levels(m), p = p_levels(m);
    std::vector<CMatrix> gens{q, p, 0.5 * (q * p + p * q), q * q};
    for (const auto& a : gens)
      for (const auto& b : gens) {
        CMatrix k1 = oracle::kron(a, b);
        CMatrix k2 = oracle::kron(b, a);
        auto fb = classify_coupling(embed_loops(k1, dims, {0, 2}) + embed_loops(k2, dims, {1, 3}), layout);
        auto one = classify_coupling(embed_loops(k1, dims, {0, 2}), layout);
        CHECK(fb.residual < 1e-8);
        CHECK(one.residual < 1e-8);
        CHECK(one.cls == CouplingClass::no_feedback);
        bool scalar_a = oracle::max_abs(k1 - k1.trace() / double(m * m) * CMatrix::Identity(m * m, m * m)) < 1e-12;
        if (!scalar_a) CHECK(fb.cls == CouplingClass::feedback);
      }
  }
}

TEST_CASE("layouts") {
  auto layout = SubsystemLayout({level_factor("C1", 2), level_factor("P1", 3), level_factor("E", 2)});
  CHECK(layout.factors().front().label == "P1");
  CHECK(layout.plant_labels() == std::vector<std::string>{"P1"});
  CHECK(layout.coupled_labels() == std::vector<std::string>{"P1", "C1"});
  CHECK(layout.total_dim() == 12);
  CHECK(kind_of([] { SubsystemLayout({level_factor("P1", 17), level_factor("P2", 17), level_factor("C1", 17),
                                      level_factor("C2", 17)}); }) == ErrorKind::DimensionCap);
  CHECK(kind_of([] { level_factor("P1", 1); }) == ErrorKind::FactorMismatch);
  CHECK(kind_of([] { SubsystemLayout({level_factor("P2", 2), level_factor("C1", 2)}); }) ==
        ErrorKind::UnknownSubsystem);
  CHECK(kind_of([] { SubsystemLayout({level_factor("P1", 2), level_factor("P1", 2), level_factor("C1", 2)}); }) ==
        ErrorKind::UnknownSubsystem);
  CHECK(kind_of([] { SubsystemLayout({level_factor("P1", 2), level_factor("X", 2), level_factor("C1", 2)}); }) ==
        ErrorKind::UnknownSubsystem);
}

TEST_CASE("uncoupled scenario follows the isolated plant") {
  const std::size_t m = 4;
  auto layout = four_levels(m, m, m, m);
  CMatrix q = q_levels(m), p = p_levels(m);
  CMatrix h1 = 0.5 * (q * q + p * p) + 0.1 * q * q * q * q;
  CMatrix id = CMatrix::Identity(m, m);
  CMatrix hp = oracle::kron(h1, id) + oracle::kron(id, 1.2 * h1) + 0.2 * oracle::kron(q, q);
  CMatrix hc = oracle::kron(h1, id) + oracle::kron(id, h1);
  CMatrix zero = CMatrix::Zero(m * m, m * m);
  CMatrix h = build_feedback_hamiltonian(hp, hc, zero, zero, layout);

  StateRecipe coherent{"displaced", (RVector(2) << 0.8, 0.2).finished()};
  StateRecipe thermal{"thermal", RVector(), 1.5};
  auto f = layout.factors();
  CMatrix rp = oracle::kron(recipe_state(f[0], coherent), recipe_state(f[1], thermal));
  CMatrix rc = oracle::kron(recipe_state(f[2], thermal), recipe_state(f[3], coherent));
  CMatrix initial = oracle::kron(rp, rc);

  ScenarioRun run;
  run.dt = 0.25;
  run.t_end = 2.0;
  auto res = run_scenario(layout, h, hp, initial, run);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hp);
  for (std::size_t s = 0; s < res.plant_states.size(); ++s) {
    double t = res.rows[s].t;
    CVector ph = (es.eigenvalues() * Complex(0.0, -t)).array().exp();
    CMatrix u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    CMatrix expected = u * rp * u.adjoint();
    CHECK(oracle::max_abs(res.plant_states[s] - expected) < 1e-8);
    CHECK(std::abs(res.rows[s].plant_purity - res.rows[0].plant_purity) < 1e-8);
    CHECK(std::abs(res.rows[s].plant_energy - res.rows[0].plant_energy) < 1e-8);
  }
}

TEST_CASE("coupled scenario entangles plant and controller") {
  const std::size_t m = 4;
  auto layout = four_levels(m, m, m, m);
  const std::vector<std::size_t> dims{m, m, m, m};
  CMatrix q = q_levels(m), p = p_levels(m);
  CMatrix id = CMatrix::Identity(m, m);
  CMatrix h1 = 0.5 * (q * q + p * p);
  CMatrix hp = oracle::kron(h1, id) + oracle::kron(id, h1);
  CMatrix h = build_feedback_hamiltonian(hp, hp, 0.3 * oracle::kron(q, q), 0.3 * oracle::kron(q, q), layout);
  StateRecipe ground;
  auto f = layout.factors();
  CMatrix initial = kron_all({recipe_state(f[0], ground), recipe_state(f[1], ground),
                              recipe_state(f[2], ground), recipe_state(f[3], ground)});
  CHECK(std::abs(initial.trace() - 1.0) < 1e-12);
  ScenarioRun run;
  run.dt = 0.1;
  run.t_end = 5.0;
  auto res = run_scenario(layout, h, hp, initial, run);
  double min_purity = 1.0;
  for (const auto& row : res.rows) min_purity = std::min(min_purity, row.plant_purity);
  CHECK(res.rows.front().plant_purity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(min_purity < 1.0 - 1e-4);
}

TEST_CASE("commuting square along a two-factor grid scenario") {
  auto spec = make_phase_space(1, 16, balanced_half_width(16), RMatrix::Identity(1, 1));
  SubsystemLayout layout({grid_factor("P1", spec), grid_factor("C1", spec)});
  auto f = layout.factors();
  CMatrix hp = factor_operator(f[0], harmonic_polynomial(1));
  CMatrix hc = factor_operator(f[1], harmonic_polynomial(1));
  CMatrix q = factor_operator(f[0], monomial({1}, {0}));
  CMatrix k = 0.2 * oracle::kron(q, q);
  CMatrix h = build_general_hamiltonian(hp, hc, k, layout);
  CHECK(classify_coupling(k, layout).cls == CouplingClass::no_feedback);
  StateRecipe shifted{"displaced", (RVector(2) << 0.7, 0.0).finished()};
  StateRecipe ground;
  CMatrix initial = oracle::kron(recipe_state(f[0], shifted), recipe_state(f[1], ground));
  ScenarioRun run;
  run.dt = 0.5;
  run.t_end = 2.0;
  auto res = run_scenario(layout, h, hp, initial, run);
  REQUIRE(!res.rows.empty());
  for (const auto& row : res.rows) {
    CHECK(row.square_error >= 0.0);
    CHECK(row.square_error < 1e-6);
  }
  CHECK(res.rows.back().plant_purity < 1.0 - 1e-4);
  CHECK(res.plant_snapshots.size() == res.rows.size());
}

TEST_CASE("perturbation factor is traced out before plant diagnostics") {
  const std::size_t m = 3;
  auto layout = SubsystemLayout({level_factor("P1", m), level_factor("C1", m), level_factor("E", 2)});
  CMatrix q = q_levels(m), p = p_levels(m);
  CMatrix h1 = 0.5 * (q * q + p * p);
  CMatrix id = CMatrix::Identity(m, m);
  CMatrix hpc = oracle::kron(h1, id) + oracle::kron(id, h1);
  CMatrix h = oracle::kron(hpc, CMatrix::Identity(2, 2));
  auto f = layout.factors();
  StateRecipe ground;
  CMatrix env = CMatrix::Identity(2, 2) / 2.0;
  CMatrix initial = oracle::kron(oracle::kron(recipe_state(f[0], ground), recipe_state(f[1], ground)), env);
  ScenarioRun run;
  run.dt = 0.5;
  run.t_end = 1.0;
  auto res = run_scenario(layout, h, h1, initial, run);
  for (const auto& row : res.rows) CHECK(row.plant_purity == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(res.plant_states.front().rows() == static_cast<Eigen::Index>(m));
}
