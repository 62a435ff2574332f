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

#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace phaselab {

/// Sparse multivariate polynomial keyed by exponent vectors.
///
/// Used both for Hamilton functions on phase space (variables ordered
/// q_1..q_d, p_1..p_d) and for the Wick polynomials multiplying Gaussian
/// densities. Terms with a zero coefficient are dropped eagerly.
template <typename Scalar>
class Polynomial {
 public:
  using Exponents = std::vector<int>;
  using TermMap = std::map<Exponents, Scalar>;

  Polynomial() = default;
  explicit Polynomial(std::size_t num_vars) : num_vars_(num_vars) {}

  static Polynomial constant(std::size_t num_vars, Scalar c) {
    Polynomial out(num_vars);
    out.add_term(Exponents(num_vars, 0), c);
    return out;
  }

  static Polynomial variable(std::size_t num_vars, std::size_t index, Scalar c = Scalar(1)) {
    Polynomial out(num_vars);
    Exponents e(num_vars, 0);
    e[index] = 1;
    out.add_term(e, c);
    return out;
  }

  std::size_t num_vars() const { return num_vars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Exponents& exponents, Scalar coeff) {
    if (coeff == Scalar(0)) return;
    auto [it, inserted] = terms_.try_emplace(exponents, coeff);
    if (!inserted) {
      it->second += coeff;
      if (it->second == Scalar(0)) terms_.erase(it);
    }
  }

  int degree() const {
    int deg = 0;
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (int k : e) s += k;
      deg = std::max(deg, s);
    }
    return deg;
  }

  Polynomial derivative(std::size_t var) const {
    Polynomial out(num_vars_);
    for (const auto& [e, c] : terms_) {
      if (e[var] == 0) continue;
      Exponents d = e;
      d[var] -= 1;
      out.add_term(d, c * Scalar(e[var]));
    }
    return out;
  }

  Polynomial derivative(const Exponents& orders) const {
    Polynomial out = *this;
    for (std::size_t v = 0; v < orders.size(); ++v)
      for (int k = 0; k < orders[v]; ++k) out = out.derivative(v);
    return out;
  }

  template <typename Derived>
  Scalar evaluate(const Eigen::MatrixBase<Derived>& x) const {
    Scalar sum(0);
    for (const auto& [e, c] : terms_) {
      Scalar term = c;
      for (std::size_t v = 0; v < e.size(); ++v)
        if (e[v] != 0) term *= std::pow(x(static_cast<Eigen::Index>(v)), e[v]);
      sum += term;
    }
    return sum;
  }

  Polynomial& operator+=(const Polynomial& other) {
    if (num_vars_ == 0) num_vars_ = other.num_vars_;
    for (const auto& [e, c] : other.terms_) add_term(e, c);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& other) {
    if (num_vars_ == 0) num_vars_ = other.num_vars_;
    for (const auto& [e, c] : other.terms_) add_term(e, -c);
    return *this;
  }

  Polynomial& operator*=(Scalar s) {
    if (s == Scalar(0)) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, Polynomial b) { return a += (b *= Scalar(-1)); }
  friend Polynomial operator*(Polynomial a, Scalar s) { return a *= s; }
  friend Polynomial operator*(Scalar s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial out(std::max(a.num_vars_, b.num_vars_));
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        Exponents e(out.num_vars_, 0);
        for (std::size_t v = 0; v < ea.size(); ++v) e[v] += ea[v];
        for (std::size_t v = 0; v < eb.size(); ++v) e[v] += eb[v];
        out.add_term(e, ca * cb);
      }
    return out;
  }

 private:
  std::size_t num_vars_ = 0;
  TermMap terms_;
};

}  // namespace phaselab
