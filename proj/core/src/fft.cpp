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

#include "miw/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <numbers>
#include <utility>

#include "miw/error.hpp"

namespace miw {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "FFT length must be positive");
  std::lock_guard lock(planner_mutex());
  scratch_ = static_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (scratch_ == nullptr) throw std::bad_alloc();
  const int len = static_cast<int>(n);
  forward_plan_ =
      fftw_plan_dft_1d(len, as_fftw(scratch_), as_fftw(scratch_), FFTW_FORWARD, FFTW_ESTIMATE);
  backward_plan_ =
      fftw_plan_dft_1d(len, as_fftw(scratch_), as_fftw(scratch_), FFTW_BACKWARD, FFTW_ESTIMATE);
  if (forward_plan_ == nullptr || backward_plan_ == nullptr) {
    release();
    throw Error(ErrorCode::InvalidArgument, "FFTW planning failed");
  }
}

Fft::~Fft() { release(); }

Fft::Fft(Fft&& other) noexcept
    : n_(std::exchange(other.n_, 0)),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      backward_plan_(std::exchange(other.backward_plan_, nullptr)),
      scratch_(std::exchange(other.scratch_, nullptr)) {}

Fft& Fft::operator=(Fft&& other) noexcept {
  if (this != &other) {
    release();
    n_ = std::exchange(other.n_, 0);
    forward_plan_ = std::exchange(other.forward_plan_, nullptr);
    backward_plan_ = std::exchange(other.backward_plan_, nullptr);
    scratch_ = std::exchange(other.scratch_, nullptr);
  }
  return *this;
}

void Fft::release() noexcept {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (backward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
  if (scratch_ != nullptr) fftw_free(scratch_);
  forward_plan_ = backward_plan_ = nullptr;
  scratch_ = nullptr;
}

void Fft::forward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw Error(ErrorCode::ShapeMismatch, "FFT length mismatch");
  std::copy(data.begin(), data.end(), scratch_);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  std::copy(scratch_, scratch_ + n_, data.begin());
}

void Fft::inverse(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw Error(ErrorCode::ShapeMismatch, "FFT length mismatch");
  std::copy(data.begin(), data.end(), scratch_);
  fftw_execute(static_cast<fftw_plan>(backward_plan_));
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t j = 0; j < n_; ++j) data[j] = scratch_[j] * scale;
}

std::vector<double> fft_wavenumbers(std::size_t n, double dx) {
  if (n == 0 || !(dx > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad FFT grid");
  std::vector<double> k(n);
  const double base = 2.0 * std::numbers::pi / (static_cast<double>(n) * dx);
  for (std::size_t j = 0; j < n; ++j) {
    const auto m = static_cast<std::ptrdiff_t>(j);
    const auto half = static_cast<std::ptrdiff_t>(n / 2);
    k[j] = base * static_cast<double>(m < half || (m == half && n % 2 == 1)
                                          ? m
                                          : m - static_cast<std::ptrdiff_t>(n));
  }
  return k;
}

std::vector<std::complex<double>> spectral_derivative(std::span<const std::complex<double>> f,
                                                      double dx, int order) {
  if (order < 0) throw Error(ErrorCode::InvalidArgument, "derivative order must be >= 0");
  const std::size_t n = f.size();
  std::vector<std::complex<double>> out(f.begin(), f.end());
  if (order == 0) return out;
  const auto k = fft_wavenumbers(n, dx);
  Fft fft(n);
  fft.forward(out);
  std::complex<double> ik_unit(0.0, 1.0);
  std::complex<double> factor_unit = 1.0;
  for (int o = 0; o < order; ++o) factor_unit *= ik_unit;
  for (std::size_t j = 0; j < n; ++j) out[j] *= factor_unit * std::pow(k[j], order);
  if (n % 2 == 0 && order % 2 == 1) out[n / 2] = 0.0;
  fft.inverse(out);
  return out;
}

std::vector<double> spectral_derivative(std::span<const double> f, double dx, int order) {
  std::vector<std::complex<double>> c(f.begin(), f.end());
  const auto d = spectral_derivative(std::span<const std::complex<double>>(c), dx, order);
  std::vector<double> out(d.size());
  std::transform(d.begin(), d.end(), out.begin(), [](const auto& z) { return z.real(); });
  return out;
}

}  // namespace miw
