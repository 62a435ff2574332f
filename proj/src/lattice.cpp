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

#include "phaselab/lattice.hpp"

#include <cmath>

namespace phaselab {

GaussianMeasure::GaussianMeasure(RMatrix covariance, RVector periods)
    : covariance_(std::move(covariance)), periods_(std::move(periods)) {
  Eigen::LLT<RMatrix> llt(covariance_);
  precision_ = llt.solve(RMatrix::Identity(covariance_.rows(), covariance_.cols()));
  precision_ = 0.5 * (precision_ + precision_.transpose()).eval();
  const RMatrix l = llt.matrixL();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
  log_norm_ = -0.5 * (static_cast<double>(dim()) * std::log(2.0 * kPi) + log_det);
}

double GaussianMeasure::analytic_density(const RVector& x) const {
  return std::exp(log_norm_ - 0.5 * x.dot(precision_ * x));
}

double GaussianMeasure::density(const RVector& x) const {
  const int k = dim();
  std::vector<int> shift(k, -1);
  double sum = 0.0;
  RVector y(k);
  while (true) {
    for (int i = 0; i < k; ++i) y(i) = x(i) + shift[i] * periods_(i);
    sum += analytic_density(y);
    int axis = 0;
    while (axis < k && shift[axis] == 1) shift[axis++] = -1;
    if (axis == k) break;
    ++shift[axis];
  }
  return sum;
}

std::size_t Grid::points() const {
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
  return total;
}

double Grid::position_cell() const { return std::pow(h, d); }
double Grid::momentum_cell() const { return std::pow(dp, d); }
double Grid::phase_cell() const { return std::pow(h * dp, d); }

std::vector<int> Grid::unflatten(std::size_t flat) const {
  std::vector<int> idx(d);
  for (int i = d - 1; i >= 0; --i) {
    idx[i] = static_cast<int>(flat % n);
    flat /= n;
  }
  return idx;
}

std::size_t Grid::flatten(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (int i = 0; i < d; ++i) flat = flat * n + static_cast<std::size_t>(idx[i]);
  return flat;
}

RVector Grid::position(std::size_t flat) const {
  const auto idx = unflatten(flat);
  RVector x(d);
  for (int i = 0; i < d; ++i) x(i) = q(idx[i]);
  return x;
}

RVector Grid::momentum(std::size_t flat) const {
  const auto idx = unflatten(flat);
  RVector x(d);
  for (int i = 0; i < d; ++i) x(i) = p(idx[i]);
  return x;
}

RVector PhaseSpaceSpec::mu_samples() const {
  RVector out(dim());
  for (std::size_t a = 0; a < dim(); ++a) out(a) = mu_.density(grid_.position(a));
  return out;
}

RVector PhaseSpaceSpec::nu_samples() const {
  RVector out(dim());
  for (std::size_t a = 0; a < dim(); ++a) out(a) = nu_.density(grid_.momentum(a));
  return out;
}

RMatrix PhaseSpaceSpec::mu_nu_samples() const {
  // mu x nu has block-diagonal covariance, so it factorizes exactly.
  return mu_samples() * nu_samples().transpose();
}

bool PhaseSpaceSpec::same_geometry(const PhaseSpaceSpec& other) const {
  return d() == other.d() && n() == other.n() && half_width() == other.half_width() &&
         covariance_.isApprox(other.covariance_, 1e-14);
}

double balanced_half_width(int n_per_axis) { return std::sqrt(kPi * n_per_axis / 2.0); }

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

double tail_mass(double edge, double sigma) { return std::erfc(edge / (sigma * std::sqrt(2.0))); }

}  // namespace

PhaseSpaceSpec make_phase_space(int d, int n_per_axis, double half_width,
                                const RMatrix& covariance, const TolerancePolicy& tol) {
  if (d < 1 || d > 4) throw Error(ErrorKind::BadGridSize, "d must be in [1, 4]");
  if (!is_power_of_two(n_per_axis) || n_per_axis < 4)
    throw Error(ErrorKind::BadGridSize, "n_per_axis must be a power of two >= 4");
  if (!(half_width > 0.0)) throw Error(ErrorKind::BadGridSize, "half width must be positive");
  if (covariance.rows() != d || covariance.cols() != d)
    throw Error(ErrorKind::BadGridSize, "covariance must be d x d");

  const double scale = std::max(covariance.cwiseAbs().maxCoeff(), 1e-300);
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > tol.covariance_symmetry * scale)
    throw Error(ErrorKind::NonSymmetricCovariance, "covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(covariance);
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw Error(ErrorKind::NonPositiveCovariance, "covariance has a non-positive eigenvalue");

  PhaseSpaceSpec spec;
  Grid& g = spec.grid_;
  g.d = d;
  g.n = n_per_axis;
  g.half_width = half_width;
  g.h = 2.0 * half_width / n_per_axis;
  g.dp = kPi / half_width;
  g.q.resize(n_per_axis);
  g.p.resize(n_per_axis);
  for (int j = 0; j < n_per_axis; ++j) {
    g.q(j) = (j - n_per_axis / 2) * g.h;
    g.p(j) = (j - n_per_axis / 2) * g.dp;
  }

  for (int i = 0; i < d; ++i) {
    const double sigma = std::sqrt(covariance(i, i));
    const double q_tail = tail_mass(half_width, sigma);
    const double p_tail = tail_mass(g.p_max(), sigma);
    if (q_tail >= tol.domain_tail_mass || p_tail >= tol.domain_tail_mass)
      throw Error(ErrorKind::InsufficientDomain,
                  "reference Gaussian tail mass outside the grid box is too large on axis " +
                      std::to_string(i));
  }

  spec.covariance_ = 0.5 * (covariance + covariance.transpose());
  const RVector q_periods = RVector::Constant(d, 2.0 * half_width);
  const RVector p_periods = RVector::Constant(d, 2.0 * g.p_max());
  spec.mu_ = GaussianMeasure(spec.covariance_, q_periods);
  spec.nu_ = GaussianMeasure(spec.covariance_, p_periods);
  RMatrix joint = RMatrix::Zero(2 * d, 2 * d);
  joint.topLeftCorner(d, d) = spec.covariance_;
  joint.bottomRightCorner(d, d) = spec.covariance_;
  RVector joint_periods(2 * d);
  joint_periods << q_periods, p_periods;
  spec.mu_nu_ = GaussianMeasure(joint, joint_periods);
  return spec;
}

double gaussian_density(const GaussianMeasure& measure, const RVector& point) {
  return measure.density(point);
}

PhaseSpaceSpec combine(const PhaseSpaceSpec& first, const PhaseSpaceSpec& second,
                       const TolerancePolicy& tol) {
  if (first.n() != second.n() || first.half_width() != second.half_width())
    throw Error(ErrorKind::SpecMismatch, "combined factors must share n and L");
  const int d = first.d() + second.d();
  RMatrix cov = RMatrix::Zero(d, d);
  cov.topLeftCorner(first.d(), first.d()) = first.covariance();
  cov.bottomRightCorner(second.d(), second.d()) = second.covariance();
  return make_phase_space(d, first.n(), first.half_width(), cov, tol);
}

}  // namespace phaselab
