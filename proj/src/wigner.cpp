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

#include "phaselab/wigner.hpp"

#include <cmath>
#include <numeric>
#include <optional>

#include "phaselab/fft.hpp"

namespace phaselab {

const char* to_string(FieldRole role) {
  switch (role) {
    case FieldRole::wigner_measure_density: return "wigner_measure_density";
    case FieldRole::eta_density: return "eta_density";
    case FieldRole::symbol: return "symbol";
    case FieldRole::weyl_function_samples: return "weyl_function_samples";
  }
  return "unknown";
}

const char* to_string(ReferenceMeasure ref) {
  return ref == ReferenceMeasure::lebesgue ? "lebesgue" : "mu_otimes_nu";
}

Complex PhaseSpaceField::integral() const { return values.sum() * spec.grid().phase_cell(); }

PhaseSpaceField make_field(const PhaseSpaceSpec& spec, FieldRole role, ReferenceMeasure ref,
                           const RMatrix& values) {
  if (static_cast<std::size_t>(values.rows()) != spec.dim() ||
      static_cast<std::size_t>(values.cols()) != spec.dim())
    throw Error(ErrorKind::GridMismatch, "field shape does not match the phase grid");
  return PhaseSpaceField{spec, role, ref, values.cast<Complex>()};
}

namespace {

/// Band-limited interpolation from the n-point grid onto the 2n-point grid of
/// half-step points (fine index 2j is coarse point j).
RMatrix interpolation_1d(const PhaseSpaceSpec& spec) {
  const int n = spec.n();
  const double dp = spec.grid().dp;
  const double h = spec.grid().h;
  RMatrix out(2 * n, n);
  for (int s = 0; s < 2 * n; ++s)
    for (int j = 0; j < n; ++j) {
      const double delta = (s - n) * 0.5 * h - (j - n / 2) * h;
      double v = 1.0 + std::cos(0.5 * n * dp * delta);
      for (int k = 1; k < n / 2; ++k) v += 2.0 * std::cos(k * dp * delta);
      out(s, j) = v / n;
    }
  return out;
}

RMatrix kron(const RMatrix& a, const RMatrix& b) {
  RMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

RMatrix interpolation_full(const PhaseSpaceSpec& spec) {
  const RMatrix one = interpolation_1d(spec);
  RMatrix out = one;
  for (int i = 1; i < spec.d(); ++i) out = kron(out, one);
  return out;
}

std::size_t flatten_base(const std::vector<int>& idx, int base) {
  std::size_t flat = 0;
  for (int v : idx) flat = flat * static_cast<std::size_t>(base) + static_cast<std::size_t>(v);
  return flat;
}

std::vector<int> unflatten_base(std::size_t flat, int d, int base) {
  std::vector<int> idx(d);
  for (int i = d - 1; i >= 0; --i) {
    idx[i] = static_cast<int>(flat % static_cast<std::size_t>(base));
    flat /= static_cast<std::size_t>(base);
  }
  return idx;
}

int wrap(int v, int period) { return ((v % period) + period) % period; }

void require_role(const PhaseSpaceField& f, FieldRole role, const char* what) {
  if (f.role != role) throw Error(ErrorKind::GridMismatch, std::string(what) + ": unexpected field role");
  if (static_cast<std::size_t>(f.values.rows()) != f.spec.dim() ||
      static_cast<std::size_t>(f.values.cols()) != f.spec.dim())
    throw Error(ErrorKind::GridMismatch, std::string(what) + ": field shape does not match the grid");
}

}  // namespace

PhaseSpaceField wigner_from_density(const DensityOperator& t) {
  const PhaseSpaceSpec& spec = t.spec();
  const int d = spec.d(), n = spec.n();
  const std::size_t N = spec.dim();
  const double h = spec.grid().h;
  const CMatrix rho = t.orthonormal() / spec.grid().position_cell();
  const RMatrix interp_t = interpolation_full(spec).transpose();  // N x Nf
  const CMatrix xt = rho.transpose() * interp_t.cast<Complex>();    // column alpha = (I rho)(alpha, :)

  auto fine_entry = [&](std::size_t alpha, std::size_t beta) {
    return (xt.col(static_cast<Eigen::Index>(alpha)).array() *
            interp_t.col(static_cast<Eigen::Index>(beta)).array().cast<Complex>())
        .sum();
  };

  CMatrix w(N, N);
  CVector f(N);
  std::vector<int> a(d), b(d), m(d);
  for (std::size_t j = 0; j < N; ++j) {
    const auto jidx = unflatten_base(j, d, n);
    for (std::size_t u = 0; u < N; ++u) {
      const auto uidx = unflatten_base(u, d, n);
      std::vector<int> edge;
      for (int i = 0; i < d; ++i) {
        m[i] = uidx[i] - n / 2;
        if (m[i] == -n / 2) edge.push_back(i);
      }
      // r_i = -L and r_i = +L fold onto the same frequency; average both.
      Complex acc(0.0);
      const int variants = 1 << edge.size();
      for (int mask = 0; mask < variants; ++mask) {
        std::vector<int> mm = m;
        for (std::size_t e = 0; e < edge.size(); ++e)
          if (mask & (1 << e)) mm[edge[e]] = -mm[edge[e]];
        for (int i = 0; i < d; ++i) {
          a[i] = wrap(2 * jidx[i] - mm[i], 2 * n);
          b[i] = wrap(2 * jidx[i] + mm[i], 2 * n);
        }
        acc += fine_entry(flatten_base(a, 2 * n), flatten_base(b, 2 * n));
      }
      f(static_cast<Eigen::Index>(u)) = acc / double(variants);
    }
    centered_dft_all(f, d, n, +1);
    w.row(static_cast<Eigen::Index>(j)) = f.transpose() * std::pow(h / (2.0 * kPi), d);
  }
  return PhaseSpaceField{spec, FieldRole::wigner_measure_density, ReferenceMeasure::lebesgue,
                         w.real().cast<Complex>()};
}

PhaseSpaceField weyl_function_samples(const DensityOperator& t) {
  const PhaseSpaceSpec& spec = t.spec();
  const Grid& g = spec.grid();
  const int d = spec.d(), n = spec.n();
  const std::size_t N = spec.dim();
  const CMatrix r = t.orthonormal();
  // tr(R U) = sum_y R(y, y+m) exp(-i <b, (x_y + x_{y+m})/2>), separable per axis.
  std::vector<CMatrix> kernel(n, CMatrix(n, n));
  for (int m = 0; m < n; ++m)
    for (int l = 0; l < n; ++l)
      for (int y = 0; y < n; ++y)
        kernel[m](l, y) = std::polar(1.0, -0.5 * g.p(l) * (g.q(y) + g.q(wrap(y + m - n / 2, n))));
  CMatrix out(N, N);
  std::vector<int> x(d);
  CVector f(N), line(n);
  for (std::size_t mflat = 0; mflat < N; ++mflat) {
    const auto midx = g.unflatten(mflat);
    for (std::size_t yflat = 0; yflat < N; ++yflat) {
      const auto yidx = g.unflatten(yflat);
      for (int i = 0; i < d; ++i) x[i] = wrap(yidx[i] + midx[i] - n / 2, n);
      f(static_cast<Eigen::Index>(yflat)) =
          r(static_cast<Eigen::Index>(yflat), static_cast<Eigen::Index>(g.flatten(x)));
    }
    for (int i = 0; i < d; ++i) {
      const std::size_t stride = axis_stride(d, i, n), block = stride * n;
      for (std::size_t outer = 0; outer < N; outer += block)
        for (std::size_t inner = 0; inner < stride; ++inner) {
          for (int k = 0; k < n; ++k) line(k) = f(static_cast<Eigen::Index>(outer + inner + k * stride));
          line = kernel[midx[i]] * line.eval();
          for (int k = 0; k < n; ++k) f(static_cast<Eigen::Index>(outer + inner + k * stride)) = line(k);
        }
    }
    out.row(static_cast<Eigen::Index>(mflat)) = f.transpose();
  }
  return PhaseSpaceField{spec, FieldRole::weyl_function_samples, ReferenceMeasure::lebesgue, out};
}

PhaseSpaceField symplectic_fourier(const PhaseSpaceField& field) {
  const PhaseSpaceSpec& spec = field.spec;
  const int d = spec.d(), n = spec.n();
  CMatrix v = field.values;
  const std::size_t total = static_cast<std::size_t>(v.size());
  for (int i = 0; i < d; ++i) {
    centered_dft_lines(v.data(), total, n, position_axis_stride(d, n, i), -1);
    centered_dft_lines(v.data(), total, n, momentum_axis_stride(d, n, i), -1);
  }
  CMatrix out = v.transpose() * spec.grid().phase_cell();
  return PhaseSpaceField{spec, FieldRole::weyl_function_samples, field.reference, out};
}

PhaseSpaceField inverse_symplectic_fourier(const PhaseSpaceField& dual) {
  const PhaseSpaceSpec& spec = dual.spec;
  const int d = spec.d(), n = spec.n();
  CMatrix v = dual.values.transpose();
  const std::size_t total = static_cast<std::size_t>(v.size());
  for (int i = 0; i < d; ++i) {
    centered_dft_lines(v.data(), total, n, position_axis_stride(d, n, i), +1);
    centered_dft_lines(v.data(), total, n, momentum_axis_stride(d, n, i), +1);
  }
  v *= spec.grid().phase_cell() / std::pow(2.0 * kPi, 2 * d);
  return PhaseSpaceField{spec, FieldRole::wigner_measure_density, dual.reference, v};
}

PhaseSpaceField wigner_from_weyl_function(const PhaseSpaceField& samples) {
  require_role(samples, FieldRole::weyl_function_samples, "wigner_from_weyl_function");
  return inverse_symplectic_fourier(samples);
}

PhaseSpaceField eta_density(const PhaseSpaceField& w, const TolerancePolicy& tol) {
  require_role(w, FieldRole::wigner_measure_density, "eta_density");
  const RMatrix ref = w.spec.mu_nu_samples();
  CMatrix out(w.values.rows(), w.values.cols());
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      const Complex v = w.values(r, c);
      if (ref(r, c) < tol.underflow_floor) {
        if (std::abs(v) > tol.underflow_signal)
          throw Error(ErrorKind::UnderflowRegion,
                      "reference density underflows where the Wigner density is not negligible");
        out(r, c) = 0.0;
      } else {
        out(r, c) = v / ref(r, c);
      }
    }
  return PhaseSpaceField{w.spec, FieldRole::eta_density, ReferenceMeasure::mu_otimes_nu, out};
}

PhaseSpaceField wigner_from_eta(const PhaseSpaceField& phi) {
  require_role(phi, FieldRole::eta_density, "wigner_from_eta");
  const RMatrix ref = phi.spec.mu_nu_samples();
  return PhaseSpaceField{phi.spec, FieldRole::wigner_measure_density, ReferenceMeasure::lebesgue,
                         (phi.values.array() * ref.array().cast<Complex>()).matrix()};
}

DensityOperator inverse_wigner(const PhaseSpaceField& w, const TolerancePolicy& tol) {
  require_role(w, FieldRole::wigner_measure_density, "inverse_wigner");
  const Complex mass = w.integral();
  if (std::abs(mass - Complex(1.0)) > tol.normalization)
    throw Error(ErrorKind::NotNormalized, "Wigner density integrates to " + std::to_string(mass.real()));
  const PhaseSpaceSpec& spec = w.spec;
  const int d = spec.d(), n = spec.n();
  const std::size_t N = spec.dim();
  const double h = spec.grid().h;
  const RMatrix interp = interpolation_full(spec);
  const CMatrix fine_rows = interp.cast<Complex>() * w.real().cast<Complex>();  // Nf x N
  const std::size_t Nf = static_cast<std::size_t>(fine_rows.rows());
  const double scale = std::pow(2.0 * kPi / h, d) / static_cast<double>(N);

  CMatrix rho = CMatrix::Zero(N, N);
  CVector f(N);
  for (std::size_t s = 0; s < Nf; ++s) {
    f = fine_rows.row(static_cast<Eigen::Index>(s)).transpose();
    centered_dft_all(f, d, n, -1);
    f *= scale;
    const auto sidx = unflatten_base(s, d, 2 * n);
    // admissible offsets m_i per axis: same parity as s_i, both endpoints on grid
    std::vector<std::vector<int>> options(d);
    for (int i = 0; i < d; ++i)
      for (int m = -n / 2; m <= n / 2; ++m) {
        if (((sidx[i] - m) % 2 + 2) % 2 != 0) continue;
        const int ai = (sidx[i] - m) / 2, bi = (sidx[i] + m) / 2;
        if (ai >= 0 && ai < n && bi >= 0 && bi < n) options[i].push_back(m);
      }
    std::vector<std::size_t> pos(d, 0);
    bool empty = false;
    for (int i = 0; i < d; ++i) empty = empty || options[i].empty();
    if (empty) continue;
    std::vector<int> a(d), b(d), u(d);
    while (true) {
      for (int i = 0; i < d; ++i) {
        const int m = options[i][pos[i]];
        a[i] = (sidx[i] - m) / 2;
        b[i] = (sidx[i] + m) / 2;
        u[i] = wrap(m + n / 2, n);
      }
      rho(static_cast<Eigen::Index>(flatten_base(a, n)), static_cast<Eigen::Index>(flatten_base(b, n))) =
          f(static_cast<Eigen::Index>(flatten_base(u, n)));
      int axis = d - 1;
      while (axis >= 0 && pos[axis] + 1 == options[axis].size()) pos[axis--] = 0;
      if (axis < 0) break;
      ++pos[axis];
    }
  }
  const CMatrix r = rho * spec.grid().position_cell();
  return DensityOperator::from_orthonormal(spec, 0.5 * (r + r.adjoint()));
}

RMatrix sample_symbol(const PhasePolynomial& poly, const PhaseSpaceSpec& spec) {
  const std::size_t N = spec.dim();
  const int d = spec.d();
  RMatrix out(N, N);
  RVector x(2 * d);
  for (std::size_t c = 0; c < N; ++c) {
    x.tail(d) = spec.grid().momentum(c);
    for (std::size_t r = 0; r < N; ++r) {
      x.head(d) = spec.grid().position(r);
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = poly.evaluate(x);
    }
  }
  return out;
}

double pair_expectation(const PhaseSpaceField& field, const HamiltonianSymbol& symbol) {
  if (field.role != FieldRole::wigner_measure_density && field.role != FieldRole::eta_density)
    throw Error(ErrorKind::GridMismatch, "pair_expectation needs a Wigner or eta density");
  if (symbol.d != field.spec.d()) throw Error(ErrorKind::GridMismatch, "symbol dimension mismatch");
  RMatrix g = sample_symbol(symbol.polynomial, field.spec);
  if (symbol.sampled) {
    if (symbol.sampled->rows() != g.rows() || symbol.sampled->cols() != g.cols())
      throw Error(ErrorKind::GridMismatch, "sampled symbol does not match the grid");
    g += *symbol.sampled;
  }
  RMatrix density = field.real();
  if (field.role == FieldRole::eta_density) density.array() *= field.spec.mu_nu_samples().array();
  return (g.array() * density.array()).sum() * field.spec.grid().phase_cell();
}

namespace {

struct AxisSplit {
  std::vector<std::size_t> keep_offset;   // per kept multi-index
  std::vector<std::size_t> trace_offset;  // per traced multi-index
  std::vector<std::size_t> traced_factors;
  std::optional<PhaseSpaceSpec> kept_spec;
};

AxisSplit split_axes(const PhaseSpaceField& w, const CompositeSystem& sys,
                     const std::vector<std::string>& keep) {
  const int n = w.spec.n();
  std::vector<int> axis_owner;
  for (std::size_t f = 0; f < sys.factors().size(); ++f) {
    const auto& fac = sys.factors()[f];
    if (!fac.spec) throw Error(ErrorKind::UnknownSubsystem, fac.label + " is not a grid factor");
    for (int i = 0; i < fac.spec->d(); ++i) axis_owner.push_back(static_cast<int>(f));
  }
  if (static_cast<int>(axis_owner.size()) != w.spec.d())
    throw Error(ErrorKind::GridMismatch, "field does not live on this composite system");
  std::vector<bool> kept(sys.factors().size(), false);
  for (const auto& label : keep) kept[sys.index_of(label)] = true;

  AxisSplit out;
  for (std::size_t f = 0; f < sys.factors().size(); ++f) {
    if (kept[f])
      out.kept_spec = out.kept_spec ? combine(*out.kept_spec, *sys.factors()[f].spec)
                                    : *sys.factors()[f].spec;
    else
      out.traced_factors.push_back(f);
  }
  if (!out.kept_spec) throw Error(ErrorKind::UnknownSubsystem, "nothing to keep");

  const int d = w.spec.d();
  std::vector<int> keep_axes, trace_axes;
  for (int i = 0; i < d; ++i) (kept[axis_owner[i]] ? keep_axes : trace_axes).push_back(i);
  auto offsets = [&](const std::vector<int>& axes) {
    std::size_t count = 1;
    for (std::size_t k = 0; k < axes.size(); ++k) count *= static_cast<std::size_t>(n);
    std::vector<std::size_t> offs(count);
    for (std::size_t c = 0; c < count; ++c) {
      const auto idx = unflatten_base(c, static_cast<int>(axes.size()), n);
      std::size_t off = 0;
      for (std::size_t k = 0; k < axes.size(); ++k) off += idx[k] * axis_stride(d, axes[k], n);
      offs[c] = off;
    }
    return offs;
  };
  out.keep_offset = offsets(keep_axes);
  out.trace_offset = offsets(trace_axes);
  return out;
}

CMatrix sum_traced(const CMatrix& values, const AxisSplit& split, const RVector& row_weight,
                   const RVector& col_weight) {
  const std::size_t nk = split.keep_offset.size(), nt = split.trace_offset.size();
  CMatrix out = CMatrix::Zero(nk, nk);
  for (std::size_t b = 0; b < nk; ++b)
    for (std::size_t a = 0; a < nk; ++a) {
      Complex acc(0.0);
      for (std::size_t u = 0; u < nt; ++u)
        for (std::size_t t = 0; t < nt; ++t)
          acc += values(split.keep_offset[a] + split.trace_offset[t],
                        split.keep_offset[b] + split.trace_offset[u]) *
                 (row_weight(t) * col_weight(u));
      out(a, b) = acc;
    }
  return out;
}

}  // namespace

PhaseSpaceField reduce_wigner(const PhaseSpaceField& w, const CompositeSystem& sys,
                              const std::vector<std::string>& keep) {
  require_role(w, FieldRole::wigner_measure_density, "reduce_wigner");
  const AxisSplit split = split_axes(w, sys, keep);
  const std::size_t nt = split.trace_offset.size();
  const int traced_d = w.spec.d() - split.kept_spec->d();
  const RVector rw = RVector::Constant(nt, std::pow(w.spec.grid().h, traced_d));
  const RVector cw = RVector::Constant(nt, std::pow(w.spec.grid().dp, traced_d));
  return PhaseSpaceField{*split.kept_spec, FieldRole::wigner_measure_density,
                         ReferenceMeasure::lebesgue, sum_traced(w.values, split, rw, cw)};
}

PhaseSpaceField reduce_eta(const PhaseSpaceField& phi, const CompositeSystem& sys,
                           const std::vector<std::string>& keep) {
  require_role(phi, FieldRole::eta_density, "reduce_eta");
  const AxisSplit split = split_axes(phi, sys, keep);
  std::optional<PhaseSpaceSpec> traced;
  for (std::size_t f : split.traced_factors)
    traced = traced ? combine(*traced, *sys.factors()[f].spec) : *sys.factors()[f].spec;
  if (!traced) throw Error(ErrorKind::UnknownSubsystem, "nothing to trace out");
  const RVector rw = traced->mu_samples() * traced->grid().position_cell();
  const RVector cw = traced->nu_samples() * traced->grid().momentum_cell();
  return PhaseSpaceField{*split.kept_spec, FieldRole::eta_density, ReferenceMeasure::mu_otimes_nu,
                         sum_traced(phi.values, split, rw, cw)};
}

CMatrix weyl_quantize_sampled(const RMatrix& symbol, const PhaseSpaceSpec& spec) {
  const int d = spec.d(), n = spec.n();
  const std::size_t N = spec.dim();
  if (static_cast<std::size_t>(symbol.rows()) != N || static_cast<std::size_t>(symbol.cols()) != N)
    throw Error(ErrorKind::DomainOverflow, "sampled symbol is not supported on the phase grid");
  const double h = spec.grid().h;
  const RMatrix interp = interpolation_full(spec);  // Nf x N
  const std::size_t Nf = static_cast<std::size_t>(interp.rows());
  // Adjoint of wigner_from_density: tr(R G^) = sum_{alpha,beta} rho_fine Y.
  CMatrix y = CMatrix::Zero(Nf, Nf);
  const double weight = spec.grid().phase_cell() * std::pow(h / (2.0 * kPi), d);
  CVector g(N);
  std::vector<int> a(d), b(d), m(d);
  for (std::size_t j = 0; j < N; ++j) {
    g = symbol.row(static_cast<Eigen::Index>(j)).transpose().cast<Complex>();
    centered_dft_all(g, d, n, +1);
    g *= weight;
    const auto jidx = unflatten_base(j, d, n);
    for (std::size_t u = 0; u < N; ++u) {
      const auto uidx = unflatten_base(u, d, n);
      std::vector<int> edge;
      for (int i = 0; i < d; ++i) {
        m[i] = uidx[i] - n / 2;
        if (m[i] == -n / 2) edge.push_back(i);
      }
      const int variants = 1 << edge.size();
      for (int mask = 0; mask < variants; ++mask) {
        std::vector<int> mm = m;
        for (std::size_t e = 0; e < edge.size(); ++e)
          if (mask & (1 << e)) mm[edge[e]] = -mm[edge[e]];
        for (int i = 0; i < d; ++i) {
          a[i] = wrap(2 * jidx[i] - mm[i], 2 * n);
          b[i] = wrap(2 * jidx[i] + mm[i], 2 * n);
        }
        y(static_cast<Eigen::Index>(flatten_base(a, 2 * n)),
          static_cast<Eigen::Index>(flatten_base(b, 2 * n))) +=
            g(static_cast<Eigen::Index>(u)) / double(variants);
      }
    }
  }
  // tr(I rho I^T Y^T) = tr(rho I^T Y^T I); rho = R / h^d.
  const CMatrix ic = interp.cast<Complex>();
  CMatrix op = ic.transpose() * y.transpose() * ic / spec.grid().position_cell();
  return 0.5 * (op + op.adjoint());
}

RVector position_marginal(const PhaseSpaceField& w) {
  return w.real().rowwise().sum() * w.spec.grid().momentum_cell();
}

RVector momentum_marginal(const PhaseSpaceField& w) {
  return w.real().colwise().sum().transpose() * w.spec.grid().position_cell();
}

double wigner_purity(const PhaseSpaceField& w) {
  return std::pow(2.0 * kPi, w.spec.d()) * w.real().squaredNorm() * w.spec.grid().phase_cell();
}

}  // namespace phaselab
