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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "phaselab/feedback.hpp"
#include "phaselab/moyal.hpp"
#include "phaselab/wigner.hpp"

using namespace phaselab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

PhaseSpaceSpec line(int n = 64) { return make_phase_space(1, n, balanced_half_width(n), RMatrix::Identity(1, 1)); }

HamiltonianSymbol sym(const PhasePolynomial& p) { return HamiltonianSymbol::from_polynomial(p); }

double max_abs_diff(const PhaseSpaceField& a, const PhaseSpaceField& b) {
  return (a.values - b.values).cwiseAbs().maxCoeff();
}

/// Largest |diff| where the reference mu x nu is above `ratio` of its peak.
double resolved_max(const RMatrix& diff, const PhaseSpaceSpec& spec, double ratio = 1e-4) {
  const RMatrix ref = spec.mu_nu_samples();
  const double cut = ratio * ref.maxCoeff();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < diff.size(); ++i)
    if (ref(i) >= cut) worst = std::max(worst, std::abs(diff(i)));
  return worst;
}

Outcome normalization_and_bound() {
  const auto start = Clock::now();
  auto spec = line();
  std::mt19937_64 rng(1001);
  double mass = 0.0, excess = -1.0;
  for (int trial = 0; trial < 50; ++trial) {
    auto w = wigner_from_density(random_mixed_state(spec, rng));
    mass = std::max(mass, std::abs(w.integral() - 1.0));
    excess = std::max(excess, w.real().cwiseAbs().maxCoeff() - 1.0 / oracle::kPi);
  }
  const double elapsed = seconds_since(start);
  return {mass < 1e-8 && excess <= 1e-8 && elapsed < 10.0,
          fmt("max|mass-1| %.2e, max|W|-1/pi %.2e, %.1f s", mass, excess, elapsed)};
}

Outcome monomial_pairing() {
  const auto start = Clock::now();
  auto spec = line();
  std::vector<HamiltonianSymbol> symbols;
  std::vector<CMatrix> operators;
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b) {
      symbols.push_back(sym(monomial({a}, {b})));
      operators.push_back(weyl_quantize(symbols.back(), spec));
    }
  std::mt19937_64 rng(1002);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto t = random_mixed_state(spec, rng);
    auto w = wigner_from_density(t);
    const CMatrix& rho = t.orthonormal();
    for (std::size_t s = 0; s < symbols.size(); ++s)
      worst = std::max(worst, std::abs(pair_expectation(w, symbols[s]) - (rho * operators[s]).trace().real()));
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-6 && elapsed < 30.0, fmt("max pairing error %.2e over 15 monomials, %.1f s", worst, elapsed)};
}

Outcome route_equivalence() {
  auto spec = line();
  std::mt19937_64 rng(1003);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    auto t = random_mixed_state(spec, rng);
    worst = std::max(worst, max_abs_diff(wigner_from_weyl_function(weyl_function_samples(t)), wigner_from_density(t)));
  }
  return {worst < 1e-6, fmt("max|W_weyl - W_kernel| %.2e", worst)};
}

Outcome inversion_round_trip() {
  auto spec = line();
  std::mt19937_64 rng(1004);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto t = random_mixed_state(spec, rng);
    auto back = inverse_wigner(wigner_from_density(t));
    worst = std::max(worst, (back.orthonormal() - t.orthonormal()).norm() / t.orthonormal().norm());
  }
  return {worst < 1e-8, fmt("max relative Frobenius error %.2e", worst)};
}

Outcome eta_consistency() {
  auto spec = line();
  std::mt19937_64 rng(1005);
  const RMatrix ref = spec.mu_nu_samples();
  double mass = 0.0, pairing = 0.0;
  auto s = sym(harmonic_polynomial(1) + monomial({1}, {1}, 0.3) + monomial({2}, {2}, 0.1));
  for (int trial = 0; trial < 10; ++trial) {
    auto t = random_mixed_state(spec, rng);
    auto phi = eta_density(wigner_from_density(t));
    const double m = (phi.real().array() * ref.array()).sum() * spec.grid().phase_cell();
    mass = std::max(mass, std::abs(m - 1.0));
    pairing = std::max(pairing, std::abs(pair_expectation(phi, s) - expectation(t, s)));
  }
  return {mass < 1e-8 && pairing < 1e-6, fmt("max|mass-1| %.2e, max pairing error %.2e", mass, pairing)};
}

Outcome series_termination() {
  auto spec = line();
  std::mt19937_64 rng(1006);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double quad_gap = 0.0, quart_gap = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    auto w = wigner_from_density(random_mixed_state(spec, rng));
    PhasePolynomial quad(2);
    quad.add_term({2, 0}, 0.5 + 0.2 * u(rng));
    quad.add_term({0, 2}, 0.5 + 0.2 * u(rng));
    quad.add_term({1, 1}, 0.2 * u(rng));
    quad.add_term({0, 1}, u(rng));
    PhasePolynomial quart = quad;
    quart.add_term({4, 0}, 0.05 * (1.5 + u(rng)));
    quart.add_term({3, 1}, 0.02 * u(rng));
    quart.add_term({2, 2}, 0.02 * u(rng));
    auto rhs = [&](const PhasePolynomial& p, int k) { return moyal_rhs(w, make_generator(sym(p), spec, k)).values; };
    quad_gap = std::max(quad_gap, (rhs(quad, 1) - rhs(quad, 4)).cwiseAbs().maxCoeff());
    quart_gap = std::max(quart_gap, (rhs(quart, 2) - rhs(quart, 4)).cwiseAbs().maxCoeff());
  }
  return {quad_gap < 1e-12 && quart_gap < 1e-12,
          fmt("degree 2: |K1-K4| %.2e, degree 4: |K2-K4| %.2e", quad_gap, quart_gap)};
}

/// Max-abs distance between evolved snapshots and the exact conjugation oracle.
double oracle_gap(const EvolutionResult& res, const DensityOperator& t0, const HamiltonianSymbol& h) {
  std::vector<double> times;
  for (const auto& s : res.snapshots) times.push_back(s.t);
  auto exact = von_neumann_oracle(t0, weyl_quantize(h, t0.spec()), times);
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i)
    worst = std::max(worst, max_abs_diff(res.snapshots[i].field, wigner_from_density(exact[i])));
  return worst;
}

Outcome oracle_agreement() {
  const auto start = Clock::now();
  auto spec = line();
  auto t0 = pure_density(displaced_state(spec, RVector::Constant(1, 1.0), RVector::Constant(1, 0.5)));
  auto w0 = wigner_from_density(t0);
  auto harmonic = sym(harmonic_polynomial(1));
  EvolutionRun run;
  run.dt = 1e-3;
  run.t_end = 2.0 * oracle::kPi;
  run.stride = 500;
  auto res = evolve(w0, harmonic, run);
  const double gap = oracle_gap(res, t0, harmonic);
  const double period = max_abs_diff(res.snapshots.back().field, w0);
  const double elapsed = seconds_since(start);

  auto quartic = sym(harmonic_polynomial(1) + monomial({4}, {0}, 0.01));
  EvolutionRun qrun;
  qrun.dt = std::min(1e-3, 0.9 * max_stable_step(quartic, spec));
  qrun.t_end = 0.5;
  qrun.stride = 100;
  qrun.K = 2;
  const double qgap = oracle_gap(evolve(w0, quartic, qrun), t0, quartic);
  return {gap <= 1e-4 && period <= 1e-4 && elapsed < 120.0 && qgap <= 1e-3,
          fmt("harmonic max error %.2e, |W(2pi)-W(0)| %.2e, %.1f s; quartic max error %.2e", gap, period, elapsed,
              qgap) + fmt(" at dt %.1e", qrun.dt)};
}

Outcome eta_route() {
  auto spec = line();
  auto t0 = pure_density(displaced_state(spec, RVector::Constant(1, 0.8), RVector::Constant(1, -0.4)));
  auto w0 = wigner_from_density(t0);
  auto h = sym(harmonic_polynomial(1) + monomial({4}, {0}, 0.01));
  EvolutionRun run;
  run.dt = std::min(1e-3, 0.9 * max_stable_step(h, spec));
  run.t_end = 0.5;
  run.stride = 50;
  run.K = 2;
  auto via_w = evolve(w0, h, run);
  auto via_phi = evolve(eta_density(w0), h, run);
  if (via_w.snapshots.size() != via_phi.snapshots.size()) return {false, "snapshot counts differ"};
  double worst = 0.0;
  for (std::size_t i = 0; i < via_w.snapshots.size(); ++i) {
    const RMatrix divided = eta_density(via_w.snapshots[i].field).real();
    worst = std::max(worst, resolved_max(via_phi.snapshots[i].field.real() - divided, spec));
  }
  return {worst < 1e-7, fmt("max|Phi(t) - W(t)/(mu x nu)| %.2e over %.0f snapshots", worst,
                            static_cast<double>(via_w.snapshots.size()))};
}

Outcome commuting_square() {
  const int n = 16;
  auto s1 = line(n);
  auto s2 = combine(s1, s1);
  CompositeSystem sys({{"P", s1.dim(), s1}, {"C", s1.dim(), s1}});
  std::mt19937_64 rng(1009);
  double product = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    auto a = random_mixed_state(s1, rng);
    auto b = random_mixed_state(s1, rng);
    auto w = wigner_from_density(tensor(a, b, sys));
    product = std::max(product, max_abs_diff(reduce_wigner(w, sys, {"P"}), wigner_from_density(a)));
    product = std::max(product, max_abs_diff(reduce_wigner(w, sys, {"C"}), wigner_from_density(b)));
  }
  CMatrix h = weyl_quantize(sym(harmonic_polynomial(2) + monomial({1, 1}, {0, 0}, 0.5)), s2);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  CVector g = es.eigenvectors().col(0);
  auto t = DensityOperator::from_orthonormal(s2, g * g.adjoint());
  const double entangled = max_abs_diff(reduce_wigner(wigner_from_density(t), sys, {"P"}),
                                        wigner_from_density(partial_trace(t, sys, {"P"})));
  return {product < 1e-8 && entangled < 1e-6,
          fmt("product states %.2e, entangled ground state %.2e (purity %.4f)", product, entangled,
              partial_trace(t, sys, {"P"}).purity())};
}

Outcome feedback_axioms() {
  const std::size_t m = 3;
  SubsystemLayout layout({level_factor("P1", m), level_factor("P2", m), level_factor("C1", m), level_factor("C2", m)});
  const auto labels = layout.coupled_labels();
  std::mt19937_64 rng(1010);
  CMatrix q = position_operator_levels(static_cast<int>(m));
  struct Case {
    CMatrix k;
    CouplingClass expected;
  };
  std::vector<Case> family;
  for (int trial = 0; trial < 3; ++trial) {
    CMatrix k1 = oracle::random_hermitian(9, rng), k2 = oracle::random_hermitian(9, rng);
    family.push_back({embed_on(layout, labels, k1, {"P1", "C1"}) + embed_on(layout, labels, k2, {"P2", "C2"}),
                      CouplingClass::feedback});
    family.push_back({embed_on(layout, labels, k1, {"P1", "C1"}), CouplingClass::no_feedback});
    family.push_back({embed_on(layout, labels, k2, {"P2", "C2"}), CouplingClass::no_feedback});
    family.push_back({oracle::random_hermitian(81, rng), CouplingClass::general});
  }
  CMatrix product = oracle::kron(oracle::kron(q, q), oracle::kron(q, q));
  family.push_back({product, CouplingClass::general});

  bool ok = true;
  double round_trip = 0.0;
  for (const auto& c : family) {
    auto v = classify_coupling(c.k, layout);
    ok = ok && v.cls == c.expected;
    if (c.expected != CouplingClass::general) round_trip = std::max(round_trip, v.residual);
    const CMatrix id = CMatrix::Identity(c.k.rows(), c.k.cols());
    for (double alpha : {0.01, 2.0, 50.0})
      for (double shift : {-3.0, 0.0, 4.0}) ok = ok && classify_coupling(alpha * c.k + shift * id, layout).cls == c.expected;
  }
  const double counter = classify_coupling(product, layout).residual;
  return {ok && round_trip < 1e-8 && counter > 1e-2,
          fmt("%.0f couplings, builder residual %.2e, product counterexample residual %.3f",
              static_cast<double>(family.size()), round_trip, counter)};
}

Outcome scenario_sanity() {
  const std::size_t m = 4;
  SubsystemLayout layout({level_factor("P1", m), level_factor("P2", m), level_factor("C1", m), level_factor("C2", m)});
  CMatrix q = position_operator_levels(static_cast<int>(m)), p = momentum_operator_levels(static_cast<int>(m));
  CMatrix id = CMatrix::Identity(m, m);
  CMatrix h1 = 0.5 * (q * q + p * p);
  CMatrix hp = oracle::kron(h1, id) + oracle::kron(id, h1);
  CMatrix hc = 1.2 * hp;
  CMatrix zero = CMatrix::Zero(m * m, m * m);
  auto f = layout.factors();
  StateRecipe coherent{"displaced", (RVector(2) << 0.8, 0.3).finished()};
  StateRecipe ground;
  CMatrix initial = kron_all({recipe_state(f[0], coherent), recipe_state(f[1], ground), recipe_state(f[2], ground),
                              recipe_state(f[3], coherent)});
  ScenarioRun run;
  run.dt = 0.1;
  run.t_end = 10.0;
  auto free = run_scenario(layout, build_feedback_hamiltonian(hp, hc, zero, zero, layout), hp, initial, run);
  double drift = 0.0;
  for (const auto& row : free.rows) drift = std::max(drift, std::abs(row.plant_purity - free.rows.front().plant_purity));
  CMatrix k = 0.3 * oracle::kron(q, q);
  auto coupled = run_scenario(layout, build_feedback_hamiltonian(hp, hc, k, k, layout), hp, initial, run);
  double lowest = 1.0;
  for (const auto& row : coupled.rows) lowest = std::min(lowest, row.plant_purity);
  return {drift < 1e-8 && lowest < 1.0 - 1e-4,
          fmt("uncoupled purity drift %.2e, coupled minimum purity %.4f", drift, lowest)};
}

Outcome wick_formulas() {
  RMatrix b(2, 2);
  b << 1.2, 0.3, 0.3, 0.8;
  auto spec = make_phase_space(2, 64, 8.0, b);
  const auto& mu = spec.mu();
  std::mt19937_64 rng(1012);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double step = 1e-2;
  using Fn = std::function<double(const RVector&)>;
  auto central = [&](const Fn& f, const RVector& y, const RVector& dir) {
    return (-f(y + 2.0 * step * dir) + 8.0 * f(y + step * dir) - 8.0 * f(y - step * dir) + f(y - 2.0 * step * dir)) /
           (12.0 * step);
  };
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    RVector x(2), h1(2), h2(2);
    x << u(rng), u(rng);
    h1 << u(rng), u(rng);
    h2 << u(rng), u(rng);
    Fn f = [&](const RVector& y) { return mu.analytic_density(y); };
    Fn df = [&](const RVector& y) { return central(f, y, h1); };
    worst = std::max(worst, std::abs(gaussian_measure_derivative(mu, {h1}, x) - df(x)));
    worst = std::max(worst, std::abs(gaussian_measure_derivative(mu, {h1, h2}, x) - central(df, x, h2)));
  }
  return {worst < 1e-7, fmt("max |analytic - finite difference| %.2e at 20 points", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"wigner normalization and bound", normalization_and_bound},
      {"monomial symbol pairing", monomial_pairing},
      {"weyl-function route equivalence", route_equivalence},
      {"inversion round trip", inversion_round_trip},
      {"eta-density consistency", eta_consistency},
      {"bracket series termination", series_termination},
      {"oracle agreement", oracle_agreement},
      {"eta-density evolution route", eta_route},
      {"reduction commuting square", commuting_square},
      {"feedback classification", feedback_axioms},
      {"scenario sanity", scenario_sanity},
      {"wick formulas", wick_formulas},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s [%2zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
