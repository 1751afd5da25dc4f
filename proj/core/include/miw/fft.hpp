// Copyright 2026 The MIW Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace miw {

/// In-place complex FFT of fixed length backed by an FFTW plan.
///
/// Plans are made with FFTW_ESTIMATE so that the chosen algorithm, and hence
/// the bit pattern of the output, does not depend on timing measurements.
/// Plan creation is serialized internally; execution is thread-safe on
/// distinct objects.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  Fft(Fft&& other) noexcept;
  Fft& operator=(Fft&& other) noexcept;

  std::size_t size() const noexcept { return n_; }

  /// Unnormalized forward transform (exponent sign -1).
  void forward(std::span<std::complex<double>> data) const;
  /// Backward transform including the 1/n normalization.
  void inverse(std::span<std::complex<double>> data) const;

 private:
  void release() noexcept;

  std::size_t n_ = 0;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
  std::complex<double>* scratch_ = nullptr;
};

/// Angular wavenumbers of the discrete Fourier modes, FFT ordering.
std::vector<double> fft_wavenumbers(std::size_t n, double dx);

/// d^order f / dx^order of a periodic sampled function via FFT. For even
/// lengths the Nyquist mode is dropped for odd orders.
std::vector<double> spectral_derivative(std::span<const double> f, double dx, int order);
std::vector<std::complex<double>> spectral_derivative(std::span<const std::complex<double>> f,
                                                      double dx, int order);

}  // namespace miw
