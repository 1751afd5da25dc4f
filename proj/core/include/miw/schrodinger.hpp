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
#include <cstdint>
#include <cstddef>
#include <variant>
#include <vector>

#include "miw/dynamics.hpp"
#include "miw/ensemble.hpp"
#include "miw/fft.hpp"

namespace miw {

/// Uniform periodic grid x_j = x_min + j dx, j = 0 .. n-1, dx = (x_max - x_min) / n.
struct GridSpec {
  double x_min = -32.0;
  double x_max = 32.0;
  std::size_t n_points = 2048;

  double dx() const noexcept { return (x_max - x_min) / static_cast<double>(n_points); }
  double x(std::size_t j) const noexcept { return x_min + static_cast<double>(j) * dx(); }
};

/// Complex wavefunction sampled on a GridSpec, with P = |psi|^2 and S = hbar arg psi.
struct WavefunctionGrid {
  GridSpec grid;
  std::vector<std::complex<double>> psi;
  double mass = 1.0;
  double hbar = 1.0;

  std::size_t size() const noexcept { return psi.size(); }
  std::vector<double> density() const;
  /// Trapezoid (periodic) L2 norm.
  double norm() const;
  double mean_x() const;
  double variance_x() const;
};

/// Throws InvalidArgument unless the grid is finite, non-empty and a power of two.
void validate_grid(const GridSpec& g);

/// |psi|^2 sum with density std sigma (psi ~ exp(-(x-c)^2 / (4 sigma^2))),
/// placed at +-separation/2, equal weights, renormalized.
struct GaussianPair {
  double sigma = 1.0;
  double separation = 4.0;
};
/// Var(x) = sigma^2.
struct SingleGaussian {
  double sigma = 1.0;
  double center = 0.0;
};
/// Harmonic oscillator ground state, Var(x) = hbar / (2 m omega).
struct OscillatorGround {
  double omega = 1.0;
};

using InitialStateSpec = std::variant<GaussianPair, SingleGaussian, OscillatorGround>;

/// Real, normalized psi_0. Throws GridTooSmall if the grid does not cover ten
/// standard deviations beyond every packet centre.
WavefunctionGrid build_initial_state(const InitialStateSpec& spec, const GridSpec& grid,
                                     double mass, double hbar);

/// Boundary density relative to the peak density.
double boundary_density_ratio(const WavefunctionGrid& w);

/// Strang split-step propagator: half potential kick, exact kinetic step in
/// Fourier space, half potential kick.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const GridSpec& grid, const PotentialSpec& v, double mass, double hbar,
                      double dt);

  double dt() const noexcept { return dt_; }
  void step(std::vector<std::complex<double>>& psi) const;

 private:
  Fft fft_;
  double dt_;
  std::vector<std::complex<double>> half_potential_;
  std::vector<std::complex<double>> kinetic_;
};

struct SplitStepOptions {
  double dt = 1e-3;
  std::size_t steps = 1;
  /// Snapshot cadence in steps; 0 keeps only the final state. Snapshots always
  /// include t = 0 and the final step.
  std::size_t snapshot_every = 0;
  /// Abort (GridTooSmall) when the boundary density exceeds this fraction of the peak.
  double boundary_tolerance = 1e-10;
};

struct SplitStepResult {
  WavefunctionGrid final_state;
  std::vector<double> times;
  std::vector<WavefunctionGrid> snapshots;
  /// max | ||psi_t|| - 1 | over the run.
  double max_norm_drift = 0.0;
};

SplitStepResult split_step_evolve(const WavefunctionGrid& w, const PotentialSpec& v,
                                  const SplitStepOptions& options);

/// Real field on the grid with a validity mask (1 = value meaningful).
struct MaskedField {
  std::vector<double> values;
  std::vector<std::uint8_t> valid;
};

/// Relative density below which velocity/force fields are masked.
inline constexpr double kDensityMaskFloor = 1e-12;

/// v(x) = (hbar/m) Im[psi'(x)/psi(x)] with spectral psi'. Masked entries hold 0.
MaskedField bohmian_velocity_field(const WavefunctionGrid& w);

/// Q = -(hbar^2/2m) R''/R, R = sqrt(P).
MaskedField quantum_potential(const WavefunctionGrid& w);

/// r = -Q' = (hbar^2/2m) (R''' R - R'' R') / R^2.
MaskedField bohmian_force(const WavefunctionGrid& w);

/// r = (hbar^2/4m) (1/P) [P (P'/P)']', expanded in derivatives of P.
MaskedField bohmian_force_density_form(const WavefunctionGrid& w);

/// x_n = F^{-1}((n - 1/2)/N) of the piecewise-linear density on the node set
/// (x, density), integrated by trapezoids. Deterministic; strictly increasing.
std::vector<double> quantile_sample(std::span<const double> x, std::span<const double> density,
                                    std::size_t n_worlds);
std::vector<double> quantile_sample(const WavefunctionGrid& w, std::size_t n_worlds);

/// Sorted draws from |psi|^2 by inverse-CDF sampling of uniform variates from a
/// seeded mt19937_64.
std::vector<double> random_sample(const WavefunctionGrid& w, std::size_t n_worlds,
                                  std::uint64_t seed);

/// De Broglie-Bohm trajectories through a sequence of snapshots.
///
/// Each interval between consecutive snapshots is one RK4 step; the velocity
/// is interpolated cubically in x and quadratically in t. Momenta are m v.
/// Throws LeftGrid if a trajectory leaves the grid interior.
TrajectorySet dbb_trajectories(const std::vector<WavefunctionGrid>& snapshots,
                               const std::vector<double>& times, std::span<const double> x0);

}  // namespace miw
