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

#include "phaselab/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phaselab/fft.hpp"

namespace phaselab {

const char* to_string(Representation rep) {
  return rep == Representation::lebesgue ? "lebesgue" : "gaussian";
}

namespace {

RVector sqrt_mu(const PhaseSpaceSpec& spec) { return spec.mu_samples().cwiseSqrt(); }

}  // namespace

double StateVector::norm() const {
  const double cell = spec.grid().position_cell();
  if (rep == Representation::lebesgue) return std::sqrt(values.squaredNorm() * cell);
  return std::sqrt((values.cwiseAbs2().array() * spec.mu_samples().array()).sum() * cell);
}

CVector StateVector::coefficients() const {
  const double root_cell = std::sqrt(spec.grid().position_cell());
  if (rep == Representation::lebesgue) return values * root_cell;
  return (values.array() * sqrt_mu(spec).array().cast<Complex>()).matrix() * root_cell;
}

DensityOperator::DensityOperator(PhaseSpaceSpec spec, CMatrix kernel, Representation rep)
    : spec_(std::move(spec)), kernel_(std::move(kernel)), rep_(rep) {
  if (static_cast<std::size_t>(kernel_.rows()) != spec_.dim() || kernel_.rows() != kernel_.cols())
    throw Error(ErrorKind::SpecMismatch, "kernel shape does not match the grid");
}

DensityOperator DensityOperator::from_orthonormal(const PhaseSpaceSpec& spec,
                                                  const CMatrix& matrix) {
  return DensityOperator(spec, matrix / spec.grid().position_cell(), Representation::lebesgue);
}

CMatrix DensityOperator::orthonormal() const {
  const double cell = spec_.grid().position_cell();
  if (rep_ == Representation::lebesgue) return kernel_ * cell;
  const RVector s = sqrt_mu(spec_);
  return (s.asDiagonal() * kernel_ * s.asDiagonal()) * cell;
}

Complex DensityOperator::trace() const { return orthonormal().trace(); }

double DensityOperator::purity() const {
  const CMatrix r = orthonormal();
  return (r * r).trace().real();
}

double DensityOperator::hermiticity_error() const {
  const CMatrix r = orthonormal();
  return (r - r.adjoint()).cwiseAbs().maxCoeff();
}

RVector DensityOperator::eigenvalues() const {
  const CMatrix r = orthonormal();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

double DensityOperator::min_eigenvalue() const { return eigenvalues().minCoeff(); }

CVector DensityOperator::apply(const CVector& phi) const {
  RVector w = RVector::Constant(dim(), spec_.grid().position_cell());
  if (rep_ == Representation::gaussian) w.array() *= spec_.mu_samples().array();
  return kernel_ * (phi.array() * w.array().cast<Complex>()).matrix();
}

void DensityOperator::check(const TolerancePolicy& tol) const {
  if (std::abs(trace() - Complex(1.0)) > tol.trace)
    throw Error(ErrorKind::NonPhysicalState, "trace differs from one");
  if (hermiticity_error() > tol.hermiticity)
    throw Error(ErrorKind::NonPhysicalState, "operator is not Hermitian");
  if (min_eigenvalue() < -tol.psd_floor)
    throw Error(ErrorKind::NonPhysicalState, "operator has a negative eigenvalue");
}

StateVector to_gaussian_rep(const StateVector& x) {
  if (x.rep != Representation::lebesgue)
    throw Error(ErrorKind::WrongRepresentation, "state is already in the gaussian representation");
  StateVector out = x;
  out.values = (x.values.array() / sqrt_mu(x.spec).array().cast<Complex>()).matrix();
  out.rep = Representation::gaussian;
  return out;
}

StateVector to_lebesgue_rep(const StateVector& x) {
  if (x.rep != Representation::gaussian)
    throw Error(ErrorKind::WrongRepresentation, "state is already in the lebesgue representation");
  StateVector out = x;
  out.values = (x.values.array() * sqrt_mu(x.spec).array().cast<Complex>()).matrix();
  out.rep = Representation::lebesgue;
  return out;
}

DensityOperator to_gaussian_rep(const DensityOperator& x) {
  if (x.rep() != Representation::lebesgue)
    throw Error(ErrorKind::WrongRepresentation, "operator is already in the gaussian representation");
  const RVector inv = sqrt_mu(x.spec()).cwiseInverse();
  return DensityOperator(x.spec(), inv.asDiagonal() * x.kernel() * inv.asDiagonal(),
                         Representation::gaussian);
}

DensityOperator to_lebesgue_rep(const DensityOperator& x) {
  if (x.rep() != Representation::gaussian)
    throw Error(ErrorKind::WrongRepresentation, "operator is already in the lebesgue representation");
  const RVector s = sqrt_mu(x.spec());
  return DensityOperator(x.spec(), s.asDiagonal() * x.kernel() * s.asDiagonal(),
                         Representation::lebesgue);
}

DensityOperator pure_density(const StateVector& phi, const TolerancePolicy& tol) {
  if (std::abs(phi.norm() - 1.0) > tol.state_norm)
    throw Error(ErrorKind::UnnormalizedState, "state norm is " + std::to_string(phi.norm()));
  return DensityOperator(phi.spec, phi.values * phi.values.adjoint(), phi.rep);
}

DensityOperator mix(const std::vector<std::pair<double, DensityOperator>>& parts) {
  if (parts.empty()) throw Error(ErrorKind::NotNormalized, "empty mixture");
  double total = 0.0;
  for (const auto& [w, t] : parts) total += w;
  const auto& first = parts.front().second;
  CMatrix k = CMatrix::Zero(first.dim(), first.dim());
  for (const auto& [w, t] : parts) {
    if (!t.spec().same_geometry(first.spec())) throw Error(ErrorKind::SpecMismatch, "mixture grids differ");
    if (t.rep() != first.rep()) throw Error(ErrorKind::RepresentationMismatch, "mixture reps differ");
    k += (w / total) * t.kernel();
  }
  return DensityOperator(first.spec(), k, first.rep());
}

// --- composite systems --------------------------------------------------------

CompositeSystem::CompositeSystem(std::vector<Factor> factors) : factors_(std::move(factors)) {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (factors_[i].label == factors_[j].label)
        throw Error(ErrorKind::UnknownSubsystem, "duplicate subsystem label " + factors_[i].label);
    if (factors_[i].spec && factors_[i].dim == 0) factors_[i].dim = factors_[i].spec->dim();
    if (factors_[i].dim == 0) throw Error(ErrorKind::FactorMismatch, "factor dimension is zero");
    total_dim_ *= factors_[i].dim;
  }
}

std::vector<std::size_t> CompositeSystem::dims() const {
  std::vector<std::size_t> out;
  for (const auto& f : factors_) out.push_back(f.dim);
  return out;
}

std::size_t CompositeSystem::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (factors_[i].label == label) return i;
  throw Error(ErrorKind::UnknownSubsystem, "no subsystem labelled " + label);
}

bool CompositeSystem::contains(const std::string& label) const {
  return std::any_of(factors_.begin(), factors_.end(),
                     [&](const Factor& f) { return f.label == label; });
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  if (a.rep() != b.rep()) throw Error(ErrorKind::RepresentationMismatch, "tensor factors differ in rep");
  const PhaseSpaceSpec joint = combine(a.spec(), b.spec());
  const auto na = a.dim(), nb = b.dim();
  CMatrix k(na * nb, na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < na; ++j)
      k.block(i * nb, j * nb, nb, nb) = a.kernel()(i, j) * b.kernel();
  return DensityOperator(joint, k, a.rep());
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b,
                       const CompositeSystem& sys) {
  const auto& f = sys.factors();
  if (f.size() != 2 || !f[0].spec || !f[1].spec || !f[0].spec->same_geometry(a.spec()) ||
      !f[1].spec->same_geometry(b.spec()))
    throw Error(ErrorKind::SpecMismatch, "operands do not match the composite system factors");
  return tensor(a, b);
}

namespace {

std::vector<std::size_t> digits_of(std::size_t flat, const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> out(dims.size());
  for (std::size_t i = dims.size(); i-- > 0;) {
    out[i] = flat % dims[i];
    flat /= dims[i];
  }
  return out;
}

std::size_t flat_of(const std::vector<std::size_t>& digits, const std::vector<std::size_t>& dims) {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) flat = flat * dims[i] + digits[i];
  return flat;
}

std::size_t product(const std::vector<std::size_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

CMatrix partial_trace(const CMatrix& matrix, const std::vector<std::size_t>& dims,
                      const std::vector<std::size_t>& keep) {
  const std::size_t total = product(dims);
  if (static_cast<std::size_t>(matrix.rows()) != total)
    throw Error(ErrorKind::FactorMismatch, "matrix size does not match factor dimensions");
  std::vector<bool> kept(dims.size(), false);
  std::vector<std::size_t> keep_dims, traced_dims, traced;
  for (std::size_t k : keep) {
    if (k >= dims.size()) throw Error(ErrorKind::UnknownSubsystem, "kept factor index out of range");
    kept[k] = true;
  }
  std::vector<std::size_t> keep_sorted;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (kept[i]) {
      keep_sorted.push_back(i);
      keep_dims.push_back(dims[i]);
    } else {
      traced.push_back(i);
      traced_dims.push_back(dims[i]);
    }
  }
  const std::size_t nk = product(keep_dims), nt = product(traced_dims);
  // full index = sum over factors; precompute contributions.
  std::vector<std::size_t> stride(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) stride[i - 1] = stride[i] * dims[i];
  std::vector<std::size_t> keep_offset(nk), trace_offset(nt);
  for (std::size_t a = 0; a < nk; ++a) {
    const auto dg = digits_of(a, keep_dims);
    std::size_t off = 0;
    for (std::size_t i = 0; i < keep_sorted.size(); ++i) off += dg[i] * stride[keep_sorted[i]];
    keep_offset[a] = off;
  }
  for (std::size_t t = 0; t < nt; ++t) {
    const auto dg = digits_of(t, traced_dims);
    std::size_t off = 0;
    for (std::size_t i = 0; i < traced.size(); ++i) off += dg[i] * stride[traced[i]];
    trace_offset[t] = off;
  }
  CMatrix out = CMatrix::Zero(nk, nk);
  for (std::size_t b = 0; b < nk; ++b)
    for (std::size_t a = 0; a < nk; ++a) {
      Complex s(0.0);
      for (std::size_t t = 0; t < nt; ++t)
        s += matrix(keep_offset[a] + trace_offset[t], keep_offset[b] + trace_offset[t]);
      out(a, b) = s;
    }
  return out;
}

DensityOperator partial_trace(const DensityOperator& t, const CompositeSystem& sys,
                              const std::vector<std::string>& keep) {
  if (sys.total_dim() != t.dim())
    throw Error(ErrorKind::SpecMismatch, "operator does not live on this composite system");
  std::vector<std::size_t> keep_idx;
  for (const auto& label : keep) keep_idx.push_back(sys.index_of(label));
  std::sort(keep_idx.begin(), keep_idx.end());
  std::optional<PhaseSpaceSpec> kept_spec;
  for (std::size_t i : keep_idx) {
    const auto& f = sys.factors()[i];
    if (!f.spec) throw Error(ErrorKind::UnknownSubsystem, f.label + " is not a grid factor");
    kept_spec = kept_spec ? combine(*kept_spec, *f.spec) : *f.spec;
  }
  if (!kept_spec) throw Error(ErrorKind::UnknownSubsystem, "nothing to keep");
  const CMatrix reduced = partial_trace(t.orthonormal(), sys.dims(), keep_idx);
  DensityOperator out = DensityOperator::from_orthonormal(*kept_spec, reduced);
  return t.rep() == Representation::gaussian ? to_gaussian_rep(out) : out;
}

CMatrix embed(const CMatrix& op, const std::vector<std::size_t>& dims,
              const std::vector<std::size_t>& support) {
  std::vector<std::size_t> sub_dims;
  for (std::size_t s : support) {
    if (s >= dims.size()) throw Error(ErrorKind::UnknownSubsystem, "support index out of range");
    sub_dims.push_back(dims[s]);
  }
  const std::size_t nsub = product(sub_dims), total = product(dims);
  if (static_cast<std::size_t>(op.rows()) != nsub || op.rows() != op.cols())
    throw Error(ErrorKind::FactorMismatch, "operator size does not match its support");
  CMatrix out = CMatrix::Zero(total, total);
  for (std::size_t i = 0; i < total; ++i) {
    auto di = digits_of(i, dims);
    std::vector<std::size_t> row_sub(support.size());
    for (std::size_t k = 0; k < support.size(); ++k) row_sub[k] = di[support[k]];
    const std::size_t r = flat_of(row_sub, sub_dims);
    for (std::size_t c = 0; c < nsub; ++c) {
      const Complex v = op(r, c);
      if (v == Complex(0.0)) continue;
      const auto dc = digits_of(c, sub_dims);
      auto dj = di;
      for (std::size_t k = 0; k < support.size(); ++k) dj[support[k]] = dc[k];
      out(i, flat_of(dj, dims)) += v;
    }
  }
  return out;
}

CMatrix permute_factors(const CMatrix& op, const std::vector<std::size_t>& dims,
                        const std::vector<std::size_t>& order) {
  const std::size_t total = product(dims);
  std::vector<std::size_t> new_dims;
  for (std::size_t k : order) new_dims.push_back(dims[k]);
  std::vector<std::size_t> map(total);
  for (std::size_t i = 0; i < total; ++i) {
    const auto d = digits_of(i, dims);
    std::vector<std::size_t> nd(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) nd[k] = d[order[k]];
    map[i] = flat_of(nd, new_dims);
  }
  CMatrix out(total, total);
  for (std::size_t j = 0; j < total; ++j)
    for (std::size_t i = 0; i < total; ++i) out(map[i], map[j]) = op(i, j);
  return out;
}

// --- integral kernels ---------------------------------------------------------

RVector generalized_density(const PhaseSpaceSpec& spec) {
  const RMatrix& prec = spec.mu().precision();
  RVector g(spec.dim());
  for (std::size_t a = 0; a < spec.dim(); ++a) {
    const RVector x = spec.grid().position(a);
    g(a) = std::exp(-0.5 * x.dot(prec * x));
  }
  return g;
}

IntegralKernel kernel_of(const DensityOperator& t, KernelKind kind) {
  const DensityOperator tg = t.rep() == Representation::gaussian ? t : to_gaussian_rep(t);
  const RVector g = generalized_density(t.spec());
  const RVector rg = g.cwiseSqrt();
  IntegralKernel out{t.spec(), kind, {}};
  if (kind == KernelKind::rho1) {
    out.values = rg.asDiagonal() * tg.kernel() * rg.asDiagonal();
  } else {
    const RVector col = (t.spec().mu_samples().array() / rg.array()).matrix() *
                        t.spec().grid().position_cell();
    out.values = rg.asDiagonal() * tg.kernel() * col.asDiagonal();
  }
  return out;
}

CVector apply_kernel(const IntegralKernel& kernel, const CVector& phi) {
  const RVector rg = generalized_density(kernel.spec).cwiseSqrt();
  CVector weighted;
  if (kernel.kind == KernelKind::rho1) {
    const RVector w = (kernel.spec.mu_samples().array() / rg.array()).matrix() *
                      kernel.spec.grid().position_cell();
    weighted = (phi.array() * w.array().cast<Complex>()).matrix();
  } else {
    weighted = (phi.array() * rg.array().cast<Complex>()).matrix();
  }
  return (rg.cwiseInverse().array().cast<Complex>() * (kernel.values * weighted).array()).matrix();
}

// --- state recipes ------------------------------------------------------------

namespace {

/// Hermite functions 0..max_level at shifted, boosted coordinates on one axis.
std::vector<CVector> hermite_table(const RVector& x, int max_level, double shift, double boost) {
  const Eigen::Index n = x.size();
  std::vector<CVector> out;
  RVector prev = RVector::Zero(n);
  RVector cur(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double y = x(j) - shift;
    cur(j) = std::pow(kPi, -0.25) * std::exp(-0.5 * y * y);
  }
  CVector phase(n);
  for (Eigen::Index j = 0; j < n; ++j) phase(j) = std::polar(1.0, boost * x(j));
  for (int k = 0; k <= max_level; ++k) {
    out.push_back((cur.array().cast<Complex>() * phase.array()).matrix());
    RVector next(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double y = x(j) - shift;
      next(j) = std::sqrt(2.0 / (k + 1)) * y * cur(j) - std::sqrt(double(k) / (k + 1)) * prev(j);
    }
    prev = cur;
    cur = next;
  }
  return out;
}

CVector product_state(const PhaseSpaceSpec& spec, const std::vector<CVector>& per_axis) {
  const Grid& g = spec.grid();
  CVector out(spec.dim());
  for (std::size_t a = 0; a < spec.dim(); ++a) {
    const auto idx = g.unflatten(a);
    Complex v(1.0);
    for (int i = 0; i < g.d; ++i) v *= per_axis[i](idx[i]);
    out(a) = v;
  }
  return out;
}

StateVector normalized(const PhaseSpaceSpec& spec, CVector values) {
  StateVector s{spec, std::move(values), Representation::lebesgue};
  s.values /= s.norm();
  return s;
}

}  // namespace

StateVector hermite_state(const PhaseSpaceSpec& spec, const std::vector<int>& levels) {
  std::vector<CVector> axes;
  for (int i = 0; i < spec.d(); ++i) {
    const int level = levels.at(static_cast<std::size_t>(i));
    axes.push_back(hermite_table(spec.grid().q, level, 0.0, 0.0)[level]);
  }
  return normalized(spec, product_state(spec, axes));
}

StateVector displaced_state(const PhaseSpaceSpec& spec, const RVector& q0, const RVector& p0) {
  std::vector<CVector> axes;
  for (int i = 0; i < spec.d(); ++i)
    axes.push_back(hermite_table(spec.grid().q, 0, q0(i), p0(i))[0]);
  return normalized(spec, product_state(spec, axes));
}

StateVector cat_state(const PhaseSpaceSpec& spec, const RVector& a, bool even) {
  const RVector zero = RVector::Zero(spec.d());
  const StateVector plus = displaced_state(spec, a, zero);
  const StateVector minus = displaced_state(spec, -a, zero);
  return normalized(spec, plus.values + (even ? 1.0 : -1.0) * minus.values);
}

DensityOperator thermal_state(const PhaseSpaceSpec& spec, double beta) {
  // Levels beyond this carry weight below 1e-16 relative to the ground level.
  const int max_level = std::max(1, static_cast<int>(std::ceil(37.0 / std::max(beta, 1e-3))));
  const int capped = std::min(max_level, 12);
  std::vector<std::vector<CVector>> tables;
  for (int i = 0; i < spec.d(); ++i) tables.push_back(hermite_table(spec.grid().q, capped, 0.0, 0.0));
  std::vector<std::pair<double, DensityOperator>> parts;
  std::vector<int> level(spec.d(), 0);
  while (true) {
    int total = 0;
    std::vector<CVector> axes;
    for (int i = 0; i < spec.d(); ++i) {
      total += level[i];
      axes.push_back(tables[i][level[i]]);
    }
    parts.emplace_back(std::exp(-beta * total),
                       pure_density(normalized(spec, product_state(spec, axes))));
    int axis = 0;
    while (axis < spec.d() && level[axis] == capped) level[axis++] = 0;
    if (axis == spec.d()) break;
    ++level[axis];
  }
  return mix(parts);
}

DensityOperator random_mixed_state(const PhaseSpaceSpec& spec, std::mt19937_64& rng, int rank,
                                   int max_level, double max_shift) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::pair<double, DensityOperator>> parts;
  for (int r = 0; r < rank; ++r) {
    std::vector<CVector> axes;
    for (int i = 0; i < spec.d(); ++i) {
      const auto table =
          hermite_table(spec.grid().q, max_level, max_shift * unit(rng), max_shift * unit(rng));
      CVector v = CVector::Zero(spec.grid().n);
      for (int k = 0; k <= max_level; ++k) v += Complex(gauss(rng), gauss(rng)) * table[k];
      axes.push_back(v);
    }
    parts.emplace_back(0.1 + 0.5 * (unit(rng) + 1.0),
                       pure_density(normalized(spec, product_state(spec, axes))));
  }
  return mix(parts);
}

RVector momentum_density(const DensityOperator& t) {
  const PhaseSpaceSpec& spec = t.spec();
  const int d = spec.d(), n = spec.n();
  CMatrix m = t.orthonormal();
  // F R F^dagger: transform the columns, then the rows (conjugate kernel).
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    CVector col = m.col(c);
    centered_dft_all(col, d, n, -1);
    m.col(c) = col;
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    CVector row = m.row(r).transpose();
    centered_dft_all(row, d, n, +1);
    m.row(r) = row.transpose();
  }
  const double scale = spec.grid().position_cell() / std::pow(2.0 * kPi, d);
  return m.diagonal().real() * scale;
}

RVector position_density(const DensityOperator& t) {
  return t.orthonormal().diagonal().real() / t.spec().grid().position_cell();
}

}  // namespace phaselab
