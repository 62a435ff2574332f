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

#include <cstddef>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "phaselab/types.hpp"

namespace phaselab {

/// Unnormalized centred DFT along every line of one axis of a flat array.
///
///   X_l = sum_j x_j exp(sign * 2 pi i (j - n/2)(l - n/2) / n)
///
/// A line is the set of n entries spaced `stride` apart; `total` must be a
/// multiple of n * stride.
inline void centered_dft_lines(Complex* data, std::size_t total, int n, std::size_t stride,
                               int sign) {
  thread_local Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<Complex> in(n), out(n);
  const double nyquist_phase = ((n / 2) % 2 == 0) ? 1.0 : -1.0;
  const std::size_t block = stride * static_cast<std::size_t>(n);
  for (std::size_t outer = 0; outer < total; outer += block) {
    for (std::size_t inner = 0; inner < stride; ++inner) {
      Complex* line = data + outer + inner;
      for (int j = 0; j < n; ++j) in[j] = (j % 2 == 0 ? 1.0 : -1.0) * line[j * stride];
      if (sign < 0)
        fft.fwd(out, in);
      else
        fft.inv(out, in);
      for (int l = 0; l < n; ++l) line[l * stride] = (l % 2 == 0 ? nyquist_phase : -nyquist_phase) * out[l];
    }
  }
}

/// Stride of axis `axis` in a row-major array of `rank` axes of length n.
inline std::size_t axis_stride(int rank, int axis, int n) {
  std::size_t s = 1;
  for (int i = axis + 1; i < rank; ++i) s *= static_cast<std::size_t>(n);
  return s;
}

/// Centred DFT over all d axes of a state-like vector of length n^d.
inline void centered_dft_all(CVector& v, int d, int n, int sign) {
  for (int axis = 0; axis < d; ++axis)
    centered_dft_lines(v.data(), static_cast<std::size_t>(v.size()), n, axis_stride(d, axis, n), sign);
}

/// Phase-space fields are N x N column-major matrices (rows: position
/// multi-index, cols: momentum multi-index). These give the flat stride of
/// position axis i and momentum axis i.
inline std::size_t position_axis_stride(int d, int n, int axis) { return axis_stride(d, axis, n); }

inline std::size_t momentum_axis_stride(int d, int n, int axis) {
  std::size_t N = 1;
  for (int i = 0; i < d; ++i) N *= static_cast<std::size_t>(n);
  return N * axis_stride(d, axis, n);
}

}  // namespace phaselab
