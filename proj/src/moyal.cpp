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

#include "phaselab/moyal.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Eigenvalues>

#include "phaselab/fft.hpp"

namespace phaselab {

const char* to_string(DerivativeScheme scheme) {
  return scheme == DerivativeScheme::spectral ? "spectral" : "finite_difference_4th";
}

DerivativeScheme derivative_scheme_from_string(const std::string& name) {
  if (name == "spectral") return DerivativeScheme::spectral;
  if (name == "finite_difference_4th") return DerivativeScheme::finite_difference_4th;
  throw Error(ErrorKind::SchemaViolation, "unknown derivative scheme '" + name + "'");
}

namespace {

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

/// All multi-indices over `vars` variables with total order `order`.
std::vector<MultiIndex> multi_indices(int vars, int order) {
  std::vector<MultiIndex> out;
  MultiIndex cur(vars, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == vars - 1) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int k = left; k >= 0; --k) {
      cur[pos] = k;
      rec(pos + 1, left - k);
    }
  };
  if (vars > 0) rec(0, order);
  return out;
}

std::size_t stride_of(const PhaseSpaceSpec& spec, int var) {
  const int d = spec.d();
  return var < d ? position_axis_stride(d, spec.n(), var)
                 : momentum_axis_stride(d, spec.n(), var - d);
}

RMatrix fd4_first(const RMatrix& f, const PhaseSpaceSpec& spec, int var) {
  const int n = spec.n();
  const double step = var < spec.d() ? spec.grid().h : spec.grid().dp;
  const std::size_t stride = stride_of(spec, var), block = stride * n;
  const std::size_t total = static_cast<std::size_t>(f.size());
  RMatrix out(f.rows(), f.cols());
  const double* src = f.data();
  double* dst = out.data();
  for (std::size_t outer = 0; outer < total; outer += block)
    for (std::size_t inner = 0; inner < stride; ++inner) {
      auto at = [&](int j) { return src[outer + inner + static_cast<std::size_t>((j + n) % n) * stride]; };
      for (int j = 0; j < n; ++j)
        dst[outer + inner + static_cast<std::size_t>(j) * stride] =
            (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * step);
    }
  return out;
}

/// Derivatives of one field, sharing the forward transform.
class Differentiator {
 public:
  Differentiator(const RMatrix& field, const PhaseSpaceSpec& spec, DerivativeScheme scheme)
      : field_(field), spec_(spec), scheme_(scheme) {
    if (scheme_ == DerivativeScheme::spectral) {
      hat_ = field.cast<Complex>();
      const std::size_t total = static_cast<std::size_t>(hat_.size());
      for (int v = 0; v < 2 * spec.d(); ++v)
        centered_dft_lines(hat_.data(), total, spec.n(), stride_of(spec, v), -1);
    }
  }

  const RMatrix& operator()(const MultiIndex& orders) {
    auto it = cache_.find(orders);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(orders, compute(orders)).first->second;
  }

 private:
  RMatrix compute(const MultiIndex& orders) const {
    const int d = spec_.d(), n = spec_.n();
    if (scheme_ == DerivativeScheme::finite_difference_4th) {
      RMatrix out = field_;
      for (int v = 0; v < 2 * d; ++v)
        for (int k = 0; k < orders[v]; ++k) out = fd4_first(out, spec_, v);
      return out;
    }
    const Grid& g = spec_.grid();
    std::vector<CVector> axis(2 * d, CVector::Ones(n));
    for (int v = 0; v < 2 * d; ++v) {
      const int k = orders[v];
      if (k == 0) continue;
      for (int l = 0; l < n; ++l) {
        // conjugate of position is momentum-spaced, and vice versa
        const double omega = v < d ? g.p(l) : g.q(l);
        axis[v](l) = (l == 0 && k % 2 == 1) ? Complex(0.0) : std::pow(Complex(0.0, omega), k);
      }
    }
    const std::size_t N = spec_.dim();
    CVector row_factor(N), col_factor(N);
    for (std::size_t r = 0; r < N; ++r) {
      const auto idx = g.unflatten(r);
      Complex fr(1.0), fc(1.0);
      for (int i = 0; i < d; ++i) {
        fr *= axis[i](idx[i]);
        fc *= axis[d + i](idx[i]);
      }
      row_factor(static_cast<Eigen::Index>(r)) = fr;
      col_factor(static_cast<Eigen::Index>(r)) = fc;
    }
    CMatrix v = row_factor.asDiagonal() * hat_ * col_factor.asDiagonal();
    const std::size_t total = static_cast<std::size_t>(v.size());
    for (int a = 0; a < 2 * d; ++a) centered_dft_lines(v.data(), total, n, stride_of(spec_, a), +1);
    return v.real() / static_cast<double>(total);
  }

  RMatrix field_;
  PhaseSpaceSpec spec_;
  DerivativeScheme scheme_;
  CMatrix hat_;
  std::map<MultiIndex, RMatrix> cache_;
};

void require_grid(const PhaseSpaceField& f, const MoyalGenerator& gen) {
  if (!f.spec.same_geometry(gen.spec) || f.values.rows() != static_cast<Eigen::Index>(gen.spec.dim()))
    throw Error(ErrorKind::GridMismatch, "field and generator live on different grids");
}

/// Contraction of order `order` with psi-derivatives supplied by `dpsi`.
template <typename Deriv>
RMatrix contraction(Deriv&& dpsi, const MoyalGenerator& gen, int order) {
  const int d = gen.spec.d();
  const Eigen::Index N = static_cast<Eigen::Index>(gen.spec.dim());
  RMatrix out = RMatrix::Zero(N, N);
  for (const auto& split : multi_indices(2 * d, order)) {
    // split = (alpha | beta): psi gets d_q^alpha d_p^beta, H gets d_q^beta d_p^alpha
    MultiIndex h_index(2 * d);
    int beta_total = 0;
    double weight = factorial(order);
    for (int i = 0; i < d; ++i) {
      h_index[i] = split[d + i];
      h_index[d + i] = split[i];
      beta_total += split[d + i];
      weight /= factorial(split[i]) * factorial(split[d + i]);
    }
    const RMatrix* dh = gen.derivative(h_index);
    if (!dh) continue;
    if (beta_total % 2 == 1) weight = -weight;
    out.array() += weight * dpsi(split).array() * dh->array();
  }
  return out;
}

double series_coefficient(int k) {
  // sin series with a = 1/2, outer factor 2, adjoint sign
  const int order = 2 * k - 1;
  const double sign = (k % 2 == 1) ? -1.0 : 1.0;
  return sign * 2.0 * std::pow(0.5, order) / factorial(order);
}

bool series_term_vanishes(const MoyalGenerator& gen, int order) {
  for (const auto& idx : multi_indices(2 * gen.spec.d(), order))
    if (gen.derivative(idx)) return false;
  return true;
}

}  // namespace

RMatrix field_derivative(const RMatrix& field, const PhaseSpaceSpec& spec, const MultiIndex& orders,
                         DerivativeScheme scheme) {
  if (static_cast<int>(orders.size()) != 2 * spec.d())
    throw Error(ErrorKind::GridMismatch, "derivative multi-index has the wrong length");
  Differentiator diff(field, spec, scheme);
  return diff(orders);
}

const RMatrix* MoyalGenerator::derivative(const MultiIndex& orders) const {
  auto it = derivatives.find(orders);
  return it == derivatives.end() ? nullptr : &it->second;
}

MoyalGenerator make_generator(const HamiltonianSymbol& symbol, const PhaseSpaceSpec& spec, int K,
                              DerivativeScheme scheme) {
  if (K < 1) throw Error(ErrorKind::OrderOverflow, "truncation count must be at least 1");
  if (symbol.d != spec.d()) throw Error(ErrorKind::GridMismatch, "symbol dimension mismatch");
  if (symbol.degree() > kMaxSymbolDegree)
    throw Error(ErrorKind::DegreeTooHigh, "symbol degree exceeds " + std::to_string(kMaxSymbolDegree));
  MoyalGenerator gen{spec, symbol, K, scheme, {}};
  std::optional<Differentiator> sampled;
  if (symbol.sampled) sampled.emplace(*symbol.sampled, spec, scheme);
  for (int order = 0; order <= gen.max_order(); ++order) {
    if (order > 1 && order % 2 == 0) continue;
    for (const auto& idx : multi_indices(2 * spec.d(), order)) {
      const PhasePolynomial poly = symbol.polynomial.derivative(idx);
      if (poly.is_zero() && !sampled) continue;
      RMatrix values = poly.is_zero() ? RMatrix::Zero(spec.dim(), spec.dim())
                                      : sample_symbol(poly, spec);
      if (sampled) values += (*sampled)(idx);
      gen.derivatives.emplace(idx, std::move(values));
    }
  }
  return gen;
}

PhaseSpaceField poisson_power(const PhaseSpaceField& psi, const MoyalGenerator& gen, int order) {
  require_grid(psi, gen);
  if (order < 1 || order > gen.max_order())
    throw Error(ErrorKind::OrderOverflow, "bracket order " + std::to_string(order) +
                                              " outside the generator's range");
  Differentiator diff(psi.real(), gen.spec, gen.scheme);
  const RMatrix out = contraction([&](const MultiIndex& i) -> const RMatrix& { return diff(i); }, gen, order);
  return PhaseSpaceField{gen.spec, psi.role, psi.reference, out.cast<Complex>()};
}

PhaseSpaceField moyal_rhs(const PhaseSpaceField& w, const MoyalGenerator& gen) {
  require_grid(w, gen);
  Differentiator diff(w.real(), gen.spec, gen.scheme);
  const Eigen::Index N = static_cast<Eigen::Index>(gen.spec.dim());
  RMatrix out = RMatrix::Zero(N, N);
  for (int k = 1; k <= gen.K; ++k) {
    const int order = 2 * k - 1;
    if (series_term_vanishes(gen, order)) continue;
    out += series_coefficient(k) *
           contraction([&](const MultiIndex& i) -> const RMatrix& { return diff(i); }, gen, order);
  }
  return PhaseSpaceField{gen.spec, FieldRole::wigner_measure_density, ReferenceMeasure::lebesgue,
                         out.cast<Complex>()};
}

PhasePolynomial wick_polynomial(const RMatrix& precision, const MultiIndex& orders) {
  const std::size_t vars = static_cast<std::size_t>(precision.rows());
  if (orders.size() != vars) throw Error(ErrorKind::GridMismatch, "multi-index length mismatch");
  PhasePolynomial p = PhasePolynomial::constant(vars, 1.0);
  for (std::size_t i = 0; i < vars; ++i) {
    PhasePolynomial ax(vars);
    for (std::size_t j = 0; j < vars; ++j) ax += PhasePolynomial::variable(vars, j, precision(i, j));
    for (int k = 0; k < orders[i]; ++k) p = p.derivative(i) - ax * p;
  }
  return p;
}

PhasePolynomial wick_polynomial(const RMatrix& precision, const std::vector<RVector>& directions) {
  const std::size_t vars = static_cast<std::size_t>(precision.rows());
  PhasePolynomial p = PhasePolynomial::constant(vars, 1.0);
  for (const auto& h : directions) {
    if (static_cast<std::size_t>(h.size()) != vars)
      throw Error(ErrorKind::GridMismatch, "direction dimension mismatch");
    const RVector ah = precision * h;
    PhasePolynomial next(vars);
    for (std::size_t i = 0; i < vars; ++i) {
      next += h(static_cast<Eigen::Index>(i)) * p.derivative(i);
      next -= p * PhasePolynomial::variable(vars, i, ah(static_cast<Eigen::Index>(i)));
    }
    p = next;
  }
  return p;
}

double gaussian_measure_derivative(const GaussianMeasure& measure,
                                   const std::vector<RVector>& directions, const RVector& point) {
  if (directions.size() > 4)
    throw Error(ErrorKind::OrderOverflow, "measure derivatives are supported up to order 4");
  if (point.size() != measure.dim()) throw Error(ErrorKind::GridMismatch, "point dimension mismatch");
  return measure.analytic_density(point) * wick_polynomial(measure.precision(), directions).evaluate(point);
}

PhaseSpaceField eta_rhs(const PhaseSpaceField& phi, const MoyalGenerator& gen, EtaScheme scheme) {
  require_grid(phi, gen);
  if (phi.role != FieldRole::eta_density)
    throw Error(ErrorKind::GridMismatch, "eta_rhs needs an eta density");
  if (scheme == EtaScheme::product) return eta_density(moyal_rhs(wigner_from_eta(phi), gen));

  const PhaseSpaceSpec& spec = gen.spec;
  const RMatrix precision = spec.mu_nu().precision();
  Differentiator diff(phi.real(), spec, gen.scheme);
  std::map<MultiIndex, RMatrix> wick_samples;
  auto wick = [&](const MultiIndex& idx) -> const RMatrix& {
    auto it = wick_samples.find(idx);
    if (it != wick_samples.end()) return it->second;
    return wick_samples.emplace(idx, sample_symbol(wick_polynomial(precision, idx), spec)).first->second;
  };
  // d^gamma(phi m) / m = sum_delta C(gamma, delta) d^delta phi * P_{gamma - delta}
  std::map<MultiIndex, RMatrix> product_derivs;
  auto product_derivative = [&](const MultiIndex& gamma) -> const RMatrix& {
    auto it = product_derivs.find(gamma);
    if (it != product_derivs.end()) return it->second;
    const Eigen::Index N = static_cast<Eigen::Index>(spec.dim());
    RMatrix acc = RMatrix::Zero(N, N);
    MultiIndex delta(gamma.size(), 0);
    std::function<void(std::size_t, double)> rec = [&](std::size_t pos, double binom) {
      if (pos == gamma.size()) {
        MultiIndex rest(gamma.size());
        for (std::size_t i = 0; i < gamma.size(); ++i) rest[i] = gamma[i] - delta[i];
        acc.array() += binom * diff(delta).array() * wick(rest).array();
        return;
      }
      for (int k = 0; k <= gamma[pos]; ++k) {
        delta[pos] = k;
        rec(pos + 1, binom * factorial(gamma[pos]) / (factorial(k) * factorial(gamma[pos] - k)));
      }
    };
    rec(0, 1.0);
    return product_derivs.emplace(gamma, std::move(acc)).first->second;
  };
  const Eigen::Index N = static_cast<Eigen::Index>(spec.dim());
  RMatrix out = RMatrix::Zero(N, N);
  for (int k = 1; k <= gen.K; ++k) {
    const int order = 2 * k - 1;
    if (series_term_vanishes(gen, order)) continue;
    out += series_coefficient(k) * contraction(product_derivative, gen, order);
  }
  return PhaseSpaceField{spec, FieldRole::eta_density, ReferenceMeasure::mu_otimes_nu, out.cast<Complex>()};
}

double max_stable_step(const HamiltonianSymbol& symbol, const PhaseSpaceSpec& spec) {
  const int d = spec.d();
  double grad = 0.0;
  for (int v = 0; v < 2 * d; ++v) {
    MultiIndex idx(2 * d, 0);
    idx[v] = 1;
    RMatrix g = sample_symbol(symbol.polynomial.derivative(idx), spec);
    if (symbol.sampled) g += field_derivative(*symbol.sampled, spec, idx, DerivativeScheme::finite_difference_4th);
    grad = std::max(grad, g.cwiseAbs().maxCoeff());
  }
  if (grad == 0.0) return std::numeric_limits<double>::infinity();
  return std::min(spec.grid().h, spec.grid().dp) / (4.0 * grad);
}

namespace {

/// Step count; the last step is shortened to land on t_end.
long step_count(const EvolutionRun& run) {
  return static_cast<long>(std::ceil(run.t_end / run.dt - 1e-9));
}

double step_time(const EvolutionRun& run, long s, long steps) {
  return s == steps ? run.t_end : static_cast<double>(s) * run.dt;
}

}  // namespace

std::vector<double> snapshot_times(const EvolutionRun& run) {
  const long steps = step_count(run);
  std::vector<double> out;
  for (long s = 0; s <= steps; ++s)
    if (s % run.stride == 0 || s == steps) out.push_back(step_time(run, s, steps));
  return out;
}

EvolutionResult evolve(const PhaseSpaceField& initial, const HamiltonianSymbol& symbol,
                       const EvolutionRun& run, const TolerancePolicy& tol) {
  if (!(run.dt > 0.0)) throw Error(ErrorKind::SchemaViolation, "dt must be positive");
  if (run.stride < 1) throw Error(ErrorKind::SchemaViolation, "stride must be at least 1");
  if (run.t_end < 0.0) throw Error(ErrorKind::SchemaViolation, "t_end must be non-negative");
  const bool eta = initial.role == FieldRole::eta_density;
  if (!eta && initial.role != FieldRole::wigner_measure_density)
    throw Error(ErrorKind::GridMismatch, "evolve needs a Wigner or eta density");
  const PhaseSpaceSpec& spec = initial.spec;
  const int K = run.classical ? 1 : run.K;
  const int d = spec.d(), n = spec.n();
  const std::size_t N = spec.dim();
  const double cell = spec.grid().phase_cell();

  EvolutionResult result;
  const long steps = step_count(run);

  std::vector<double> segment_starts{0.0};
  for (const auto& seg : symbol.schedule)
    if (seg.t_start > 0.0 && seg.t_start < run.t_end) segment_starts.push_back(seg.t_start);
  for (double t0 : segment_starts) {
    const double limit = max_stable_step(symbol.at(t0), spec);
    if (run.dt > limit) {
      const std::string msg = "dt = " + std::to_string(run.dt) + " exceeds the stability guard " +
                              std::to_string(limit);
      if (!run.allow_large_step) throw Error(ErrorKind::StepTooLarge, msg);
      result.warnings.push_back(msg);
    }
  }

  const RMatrix reference = eta ? spec.mu_nu_samples() : RMatrix();
  RMatrix boundary = RMatrix::Zero(N, N);
  {
    std::vector<bool> edge(N, false);
    for (std::size_t r = 0; r < N; ++r)
      for (int v : spec.grid().unflatten(r)) edge[r] = edge[r] || v == 0 || v == n - 1;
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t c = 0; c < N; ++c)
        if (edge[r] || edge[c]) boundary(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 1.0;
  }

  int segment = symbol.segment_at(0.0);
  MoyalGenerator gen = make_generator(symbol.at(0.0), spec, K, run.scheme);
  auto as_wigner = [&](const RMatrix& y) -> RMatrix { return eta ? RMatrix(y.cwiseProduct(reference)) : y; };
  auto rhs = [&](const RMatrix& y) -> RMatrix {
    const PhaseSpaceField f{spec, initial.role, initial.reference, y.cast<Complex>()};
    return (eta ? eta_rhs(f, gen) : moyal_rhs(f, gen)).real();
  };
  auto diagnose = [&](double t, const RMatrix& y) {
    const RMatrix w = as_wigner(y);
    DiagnosticsRow row;
    row.t = t;
    row.mass = w.sum() * cell;
    row.l2 = std::sqrt(w.squaredNorm() * cell);
    row.energy = (gen.derivatives.count(MultiIndex(2 * d, 0))
                      ? (gen.derivatives.at(MultiIndex(2 * d, 0)).array() * w.array()).sum() * cell
                      : 0.0);
    row.min_w = w.minCoeff();
    row.purity_est = std::pow(2.0 * kPi, d) * w.squaredNorm() * cell;
    return row;
  };

  auto edge_mass_of = [&](const RMatrix& v) {
    return (as_wigner(v).cwiseAbs().array() * boundary.array()).sum() * cell;
  };
  RMatrix y = initial.real();
  // the discrete transform leaves a small floor at the edges; escape is growth above it
  const double initial_edge_mass = edge_mass_of(y);
  result.diagnostics.push_back(diagnose(0.0, y));
  result.snapshots.push_back({0.0, PhaseSpaceField{spec, initial.role, initial.reference, y.cast<Complex>()}});
  for (long s = 1; s <= steps; ++s) {
    const double t = step_time(run, s - 1, steps);
    const double dt = step_time(run, s, steps) - t;
    const int seg = symbol.segment_at(t);
    if (seg != segment) {
      segment = seg;
      gen = make_generator(symbol.at(t), spec, K, run.scheme);
    }
    const RMatrix k1 = rhs(y);
    const RMatrix k2 = rhs(y + 0.5 * dt * k1);
    const RMatrix k3 = rhs(y + 0.5 * dt * k2);
    const RMatrix k4 = rhs(y + dt * k3);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double t_next = t + dt;
    const DiagnosticsRow row = diagnose(t_next, y);
    if (std::abs(row.mass - result.diagnostics.back().mass) > tol.step_mass_drift || !std::isfinite(row.mass)) {
      result.diagnostics.push_back(row);
      throw Error(ErrorKind::UnstableStep, "mass drift exceeded " + std::to_string(tol.step_mass_drift) +
                                               " at t = " + std::to_string(t_next));
    }
    const double edge_mass = edge_mass_of(y) - initial_edge_mass;
    if (edge_mass > tol.boundary_mass)
      throw Error(ErrorKind::BoundaryEscape, "mass " + std::to_string(edge_mass) +
                                                 " reached the grid boundary at t = " + std::to_string(t_next));
    result.diagnostics.push_back(row);
    if (s % run.stride == 0 || s == steps)
      result.snapshots.push_back({t_next, PhaseSpaceField{spec, initial.role, initial.reference, y.cast<Complex>()}});
  }
  return result;
}

std::vector<DensityOperator> von_neumann_oracle(const DensityOperator& t0, const CMatrix& hamiltonian,
                                                const std::vector<double>& times) {
  if (hamiltonian.rows() != static_cast<Eigen::Index>(t0.dim()))
    throw Error(ErrorKind::GridMismatch, "Hamiltonian dimension differs from the state");
  const CMatrix herm = 0.5 * (hamiltonian + hamiltonian.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
  const CMatrix& v = eig.eigenvectors();
  const RVector& e = eig.eigenvalues();
  const CMatrix r0 = v.adjoint() * t0.orthonormal() * v;
  std::vector<DensityOperator> out;
  out.reserve(times.size());
  for (double t : times) {
    if (t == 0.0) {
      out.push_back(t0.rep() == Representation::lebesgue ? t0 : to_lebesgue_rep(t0));
      continue;
    }
    CVector phase(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) phase(i) = std::polar(1.0, -e(i) * t);
    const CMatrix rt = phase.asDiagonal() * r0 * phase.conjugate().asDiagonal();
    out.push_back(DensityOperator::from_orthonormal(t0.spec(), v * rt * v.adjoint()));
  }
  return out;
}

}  // namespace phaselab
