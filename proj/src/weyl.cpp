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

#include "phaselab/weyl.hpp"

#include <cmath>

#include "phaselab/fft.hpp"
#include "phaselab/wigner.hpp"

namespace phaselab {

HamiltonianSymbol HamiltonianSymbol::from_polynomial(PhasePolynomial poly) {
  if (poly.num_vars() % 2 != 0)
    throw Error(ErrorKind::SpecMismatch, "phase polynomial needs an even number of variables");
  HamiltonianSymbol out;
  out.d = static_cast<int>(poly.num_vars() / 2);
  out.polynomial = std::move(poly);
  return out;
}

int HamiltonianSymbol::segment_at(double t) const {
  int active = -1;
  for (std::size_t s = 0; s < schedule.size(); ++s)
    if (schedule[s].t_start <= t) active = static_cast<int>(s);
  return active;
}

HamiltonianSymbol HamiltonianSymbol::at(double t) const {
  HamiltonianSymbol out;
  out.d = d;
  out.polynomial = polynomial;
  out.sampled = sampled;
  const int seg = segment_at(t);
  if (seg >= 0) out.polynomial += schedule[static_cast<std::size_t>(seg)].control;
  return out;
}

PhasePolynomial monomial(const std::vector<int>& powers_q, const std::vector<int>& powers_p,
                         double coeff) {
  if (powers_q.size() != powers_p.size())
    throw Error(ErrorKind::SpecMismatch, "position and momentum powers differ in length");
  PhasePolynomial out(2 * powers_q.size());
  std::vector<int> e(powers_q);
  e.insert(e.end(), powers_p.begin(), powers_p.end());
  out.add_term(e, coeff);
  return out;
}

PhasePolynomial harmonic_polynomial(int d) {
  PhasePolynomial out(2 * static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    std::vector<int> q(d, 0), p(d, 0);
    q[i] = 2;
    out += monomial(q, p, 0.5);
    q[i] = 0;
    p[i] = 2;
    out += monomial(q, p, 0.5);
  }
  return out;
}

namespace {

CMatrix fourier_matrix(int n) {
  CMatrix f = CMatrix::Identity(n, n);
  for (int c = 0; c < n; ++c) {
    CVector col = f.col(c);
    centered_dft_all(col, 1, n, -1);
    f.col(c) = col / std::sqrt(static_cast<double>(n));
  }
  return f;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

CMatrix position_operator_1d(const PhaseSpaceSpec& spec) {
  return spec.grid().q.cast<Complex>().asDiagonal();
}

CMatrix momentum_operator_1d(const PhaseSpaceSpec& spec) {
  const CMatrix f = fourier_matrix(spec.n());
  return f.adjoint() * spec.grid().p.cast<Complex>().asDiagonal() * f;
}

namespace {

CMatrix lowering(int levels) {
  CMatrix a = CMatrix::Zero(levels, levels);
  for (int k = 1; k < levels; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

}  // namespace

CMatrix position_operator_levels(int levels) {
  const CMatrix a = lowering(levels);
  return (a + a.adjoint()) / std::sqrt(2.0);
}

CMatrix momentum_operator_levels(int levels) {
  const CMatrix a = lowering(levels);
  return Complex(0.0, 1.0) * (a.adjoint() - a) / std::sqrt(2.0);
}

namespace {

/// Sum of all distinct products with a factors Q and b factors P, from
/// S(a, b) = Q S(a-1, b) + P S(a, b-1).
CMatrix word_sum(const CMatrix& q, const CMatrix& p, int a, int b) {
  std::vector<std::vector<CMatrix>> s(a + 1, std::vector<CMatrix>(b + 1));
  for (int i = 0; i <= a; ++i)
    for (int j = 0; j <= b; ++j) {
      if (i == 0 && j == 0) {
        s[i][j] = CMatrix::Identity(q.rows(), q.cols());
        continue;
      }
      s[i][j] = CMatrix::Zero(q.rows(), q.cols());
      if (i > 0) s[i][j].noalias() += q * s[i - 1][j];
      if (j > 0) s[i][j].noalias() += p * s[i][j - 1];
    }
  return s[a][b];
}

}  // namespace

CMatrix weyl_order(const PhasePolynomial& poly, const std::vector<CMatrix>& q_ops,
                   const std::vector<CMatrix>& p_ops) {
  const std::size_t d = q_ops.size();
  if (p_ops.size() != d || poly.num_vars() != 2 * d)
    throw Error(ErrorKind::SpecMismatch, "operator list does not match the polynomial");
  if (poly.degree() > kMaxSymbolDegree)
    throw Error(ErrorKind::DegreeTooHigh, "symbol degree " + std::to_string(poly.degree()) +
                                              " exceeds " + std::to_string(kMaxSymbolDegree));
  Eigen::Index total = 1;
  for (const auto& q : q_ops) total *= q.rows();
  CMatrix out = CMatrix::Zero(total, total);
  for (const auto& [e, coeff] : poly.terms()) {
    CMatrix term;
    for (std::size_t i = 0; i < d; ++i) {
      const int a = e[i], b = e[d + i];
      const CMatrix axis = word_sum(q_ops[i], p_ops[i], a, b) / binomial(a + b, a);
      term = i == 0 ? axis : kron(term, axis);
    }
    out += coeff * term;
  }
  return out;
}

CMatrix weyl_quantize(const HamiltonianSymbol& symbol, const PhaseSpaceSpec& spec) {
  if (symbol.d != spec.d())
    throw Error(ErrorKind::SpecMismatch, "symbol dimension differs from the phase space");
  const CMatrix q = position_operator_1d(spec), p = momentum_operator_1d(spec);
  CMatrix op = weyl_order(symbol.polynomial, std::vector<CMatrix>(spec.d(), q),
                          std::vector<CMatrix>(spec.d(), p));
  if (symbol.sampled) op += weyl_quantize_sampled(*symbol.sampled, spec);
  return 0.5 * (op + op.adjoint());
}

CMatrix weyl_unitary(const PhasePoint& h, const PhaseSpaceSpec& spec) {
  const int d = spec.d(), n = spec.n();
  if (h.q.size() != d || h.p.size() != d)
    throw Error(ErrorKind::SpecMismatch, "phase point dimension differs from the phase space");
  const Grid& g = spec.grid();
  const CMatrix f = fourier_matrix(n);
  CMatrix out;
  for (int i = 0; i < d; ++i) {
    const double a = h.q(i), b = h.p(i);
    CVector half_kick(n), shift(n);
    for (int j = 0; j < n; ++j) {
      half_kick(j) = std::polar(1.0, -0.5 * b * g.q(j));
      shift(j) = std::polar(1.0, -a * g.p(j));
    }
    const CMatrix axis = half_kick.asDiagonal() * (f.adjoint() * shift.asDiagonal() * f) *
                         half_kick.asDiagonal();
    out = i == 0 ? axis : kron(out, axis);
  }
  return out;
}

Complex trace_with(const DensityOperator& t, const CMatrix& op) {
  if (op.rows() != t.orthonormal().rows())
    throw Error(ErrorKind::SpecMismatch, "operator dimension differs from the state");
  return (t.orthonormal() * op).trace();
}

Complex weyl_function(const DensityOperator& t, const PhasePoint& h) {
  return trace_with(t, weyl_unitary(h, t.spec()));
}

double expectation(const DensityOperator& t, const HamiltonianSymbol& symbol) {
  return trace_with(t, weyl_quantize(symbol, t.spec())).real();
}

}  // namespace phaselab
