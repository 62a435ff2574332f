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


#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oracles.hpp"
#include "phaselab/weyl.hpp"

using namespace phaselab;

namespace {

PhaseSpaceSpec line(int n = 64) {
  return make_phase_space(1, n, balanced_half_width(n), RMatrix::Identity(1, 1));
}

/// Unitary centred DFT matrix F(k, j) = exp(-i p_k x_j) / sqrt(n).
CMatrix dft_matrix(const Grid& g) {
  CMatrix f(g.n, g.n);
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j) f(k, j) = std::exp(Complex(0.0, -g.p(k) * g.q(j))) / std::sqrt(double(g.n));
  return f;
}

CMatrix oracle_q(const Grid& g) { return g.q.cast<Complex>().asDiagonal(); }

CMatrix oracle_p(const Grid& g) {
  CMatrix f = dft_matrix(g);
  return f.adjoint() * g.p.cast<Complex>().asDiagonal() * f;
}

HamiltonianSymbol sym(const PhasePolynomial& p) { return HamiltonianSymbol::from_polynomial(p); }

PhasePoint point(double q, double p) {
  return {RVector::Constant(1, q), RVector::Constant(1, p)};
}

}  // namespace

TEST_CASE("position and momentum symbols") {
  auto spec = line();
  const Grid& g = spec.grid();
  CMatrix q = weyl_quantize(sym(monomial({1}, {0})), spec);
  CHECK(oracle::max_abs(q - oracle_q(g)) < 1e-12);
  CMatrix p = weyl_quantize(sym(monomial({0}, {1})), spec);
  CHECK(oracle::max_abs(p - oracle_p(g)) < 1e-10);
  CMatrix qp = weyl_quantize(sym(monomial({1}, {1})), spec);
  CMatrix expected = 0.5 * (oracle_q(g) * oracle_p(g) + oracle_p(g) * oracle_q(g));
  CHECK(oracle::max_abs(qp - expected) < 1e-10);
}

TEST_CASE("harmonic oscillator spectrum") {
  auto spec = line();
  CMatrix h = weyl_quantize(sym(harmonic_polynomial(1)), spec);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const RVector& ev = es.eigenvalues();
  CHECK(ev(0) == doctest::Approx(0.5).epsilon(1e-6));
  for (int k = 0; k < 6; ++k) CHECK(std::abs(ev(k + 1) - ev(k) - 1.0) < 1e-6);
}

TEST_CASE("monomials up to degree four follow symmetric ordering") {
  auto spec = line(32);
  const Grid& g = spec.grid();
  std::vector<CMatrix> ops{oracle_q(g), oracle_p(g)};
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b) {
      CMatrix got = weyl_quantize(sym(monomial({a}, {b})), spec);
      CMatrix want = oracle::symmetrized_product(std::string(a, 'q') + std::string(b, 'p'), ops, "qp");
      if (a + b == 0) want = CMatrix::Identity(g.n, g.n);
      CHECK_MESSAGE(oracle::max_abs(got - want) < 1e-10 * std::max(1.0, oracle::max_abs(want)),
                    "q^" << a << " p^" << b);
    }
}

TEST_CASE("two-axis monomials factor over axes") {
  auto spec = make_phase_space(2, 16, balanced_half_width(16), RMatrix::Identity(2, 2));
  const Grid& g = spec.grid();
  CMatrix q = oracle_q(g), p = oracle_p(g);
  CMatrix got = weyl_quantize(sym(monomial({1, 0}, {1, 1})), spec);
  CMatrix want = oracle::kron(0.5 * (q * p + p * q), p);
  CHECK(oracle::max_abs(got - want) < 1e-10 * oracle::max_abs(want));
}

TEST_CASE("degree cap") {
  auto spec = line(16);
  CHECK_THROWS_AS(weyl_quantize(sym(monomial({4}, {3})), spec), Error);
  try {
    weyl_quantize(sym(monomial({7}, {0})), spec);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegreeTooHigh);
  }
}

TEST_CASE("property: quantization is linear and Hermitian") {
  auto spec = line(32);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_poly = [&] {
    PhasePolynomial poly(2);
    for (int a = 0; a <= 3; ++a)
      for (int b = 0; a + b <= 3; ++b) poly.add_term({a, b}, u(rng));
    return poly;
  };
  for (int trial = 0; trial < 5; ++trial) {
    auto s1 = random_poly(), s2 = random_poly();
    double alpha = u(rng), beta = u(rng);
    CMatrix lhs = weyl_quantize(sym(alpha * s1 + beta * s2), spec);
    CMatrix rhs = alpha * weyl_quantize(sym(s1), spec) + beta * weyl_quantize(sym(s2), spec);
    CHECK(oracle::max_abs(lhs - rhs) < 1e-12 * oracle::max_abs(lhs));
    CHECK(oracle::max_abs(lhs - lhs.adjoint()) < 1e-10 * oracle::max_abs(lhs));
  }
  CMatrix one = weyl_quantize(sym(PhasePolynomial::constant(2, 1.0)), spec);
  CHECK(oracle::max_abs(one - CMatrix::Identity(32, 32)) < 1e-14);
}

TEST_CASE("Weyl unitaries") {
  auto spec = line();
  const Grid& g = spec.grid();
  CMatrix id = CMatrix::Identity(g.n, g.n);
  CHECK(oracle::max_abs(weyl_unitary(point(0.0, 0.0), spec) - id) < 1e-14);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int trial = 0; trial < 5; ++trial) {
    double a = u(rng), b = u(rng);
    CMatrix w = weyl_unitary(point(a, b), spec);
    CHECK(oracle::max_abs(w.adjoint() * w - id) < 1e-10);
    CHECK(oracle::max_abs(weyl_unitary(point(-a, -b), spec) - w.adjoint()) < 1e-10);
  }

  // A pure boost multiplies by a phase.
  CVector phi = hermite_state(spec, {1}).coefficients();
  CVector boosted = weyl_unitary(point(0.0, 0.7), spec) * phi;
  CHECK((boosted.cwiseAbs() - phi.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-12);

  // A pure translation shifts the modulus.
  CVector ground = hermite_state(spec, {0}).coefficients();
  double shift = 3.0 * g.h;
  CVector moved = weyl_unitary(point(shift, 0.0), spec) * ground;
  double worst = 0.0;
  for (int j = 0; j < g.n; ++j) {
    double expected = oracle::hermite_function(0, g.q(j) - shift) * std::sqrt(g.h);
    worst = std::max(worst, std::abs(std::abs(moved(j)) - expected));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("Weyl group law on localized states") {
  auto spec = line();
  CVector phi = hermite_state(spec, {0}).coefficients();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int trial = 0; trial < 8; ++trial) {
    double a1 = u(rng), b1 = u(rng), a2 = u(rng), b2 = u(rng);
    // exp(A) exp(B) = exp(A + B) exp([A, B] / 2) with [q, p] = i.
    double sigma = b1 * a2 - a1 * b2;
    CVector lhs = weyl_unitary(point(a1, b1), spec) * (weyl_unitary(point(a2, b2), spec) * phi);
    CVector rhs = std::exp(Complex(0.0, -0.5 * sigma)) * (weyl_unitary(point(a1 + a2, b1 + b2), spec) * phi);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("Weyl function") {
  auto spec = line();
  auto ground = pure_density(hermite_state(spec, {0}));
  CHECK(std::abs(weyl_function(ground, point(0.0, 0.0)) - 1.0) < 1e-12);
  for (auto [a, b] : {std::pair{0.5, 0.0}, {0.0, 1.0}, {1.0, -1.5}, {2.0, 0.3}}) {
    Complex w = weyl_function(ground, point(a, b));
    CHECK(std::abs(w - std::exp(-(a * a + b * b) / 4.0)) < 1e-6);
  }

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  auto t = random_mixed_state(spec, rng);
  auto tg = to_gaussian_rep(t);
  for (int trial = 0; trial < 6; ++trial) {
    auto h = point(u(rng), u(rng));
    auto minus = point(-h.q(0), -h.p(0));
    Complex w = weyl_function(t, h);
    CHECK(std::abs(w) <= 1.0 + 1e-12);
    CHECK(std::abs(weyl_function(t, minus) - std::conj(w)) < 1e-10);
    CHECK(std::abs(weyl_function(tg, h) - w) < 1e-10);
    Complex direct = (t.orthonormal() * weyl_unitary(h, spec)).trace();
    CHECK(std::abs(direct - w) < 1e-12);
  }
}

TEST_CASE("expectations") {
  auto spec = line();
  std::mt19937_64 rng(43);
  auto t = random_mixed_state(spec, rng);
  CHECK(expectation(t, sym(PhasePolynomial::constant(2, 1.0))) == doctest::Approx(1.0).epsilon(1e-12));
  auto ground = pure_density(hermite_state(spec, {0}));
  CHECK(expectation(ground, sym(harmonic_polynomial(1))) == doctest::Approx(0.5).epsilon(1e-6));
  auto shifted = pure_density(displaced_state(spec, RVector::Constant(1, 1.3), RVector::Constant(1, 0.4)));
  CHECK(std::abs(expectation(shifted, sym(monomial({1}, {0}))) - 1.3) < 1e-6);
  CHECK(std::abs(expectation(shifted, sym(monomial({0}, {1}))) - 0.4) < 1e-6);
  // Quadrature oracle for <q> of the displaced ground state.
  RVector dens = position_density(shifted);
  CHECK(std::abs(dens.dot(spec.grid().q) * spec.grid().h - 1.3) < 1e-10);
}

TEST_CASE("truncated ladder operators") {
  const int m = 6;
  CMatrix x = position_operator_levels(m), p = momentum_operator_levels(m);
  CMatrix h = weyl_order(harmonic_polynomial(1), {x}, {p});
  for (int k = 0; k + 1 < m; ++k) CHECK(h(k, k).real() == doctest::Approx(k + 0.5).epsilon(1e-12));
  CMatrix comm = x * p - p * x;
  for (int k = 0; k + 1 < m; ++k) CHECK(std::abs(comm(k, k) - Complex(0.0, 1.0)) < 1e-12);
}

TEST_CASE("scheduled symbols") {
  HamiltonianSymbol s = sym(harmonic_polynomial(1));
  s.schedule.push_back({0.5, monomial({1}, {0}, 0.2)});
  s.schedule.push_back({1.0, monomial({1}, {0}, -0.2)});
  CHECK(s.time_dependent());
  CHECK(s.segment_at(0.1) == -1);
  CHECK(s.segment_at(0.5) == 0);
  CHECK(s.segment_at(2.0) == 1);
  RVector x(2);
  x << 1.0, 0.0;
  CHECK(s.at(0.1).polynomial.evaluate(x) == doctest::Approx(0.5));
  CHECK(s.at(0.7).polynomial.evaluate(x) == doctest::Approx(0.7));
  CHECK(s.at(1.5).polynomial.evaluate(x) == doctest::Approx(0.3));
}
