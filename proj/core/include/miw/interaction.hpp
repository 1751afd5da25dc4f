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

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "miw/ensemble.hpp"

namespace miw {

/// Fixed worlds placed outside the configuration, replacing the formal
/// x_0 = -inf and x_{N+1} = +inf boundary. Ordered left to right:
/// left = {x_{-1}, x_0}, right = {x_{N+1}, x_{N+2}}.
struct AuxiliaryWorlds {
  std::array<double, 2> left{};
  std::array<double, 2> right{};
};

// All functions below use the +-infinity boundary convention unless auxiliary
// worlds are supplied: reciprocal spacings that reference a missing world are
// exactly zero. Positions must be strictly increasing (NotStrictlyOrdered).

/// U_N = hbar^2/(8m) sum_n [1/(x_{n+1}-x_n) - 1/(x_n-x_{n-1})]^2.
double interworld_potential(std::span<const double> x, double mass, double hbar);
double interworld_potential(const WorldEnsemble& e);

/// Same sum, extended over n = 0 .. N+1 when auxiliary worlds are present, so
/// that its negative gradient is the auxiliary-modified force.
double interworld_potential(std::span<const double> x, double mass, double hbar,
                            const AuxiliaryWorlds& aux);

/// r_n = -dU_N/dx_n = hbar^2/(4m) [sigma_{n+1} - sigma_n], a five-world stencil.
std::vector<double> interworld_force(std::span<const double> x, double mass, double hbar,
                                     const std::optional<AuxiliaryWorlds>& aux = std::nullopt);
std::vector<double> interworld_force(const WorldEnsemble& e);

/// p^nc_n = (hbar/2) [1/(x_{n+1}-x_n) - 1/(x_n-x_{n-1})].
std::vector<double> nonclassical_momentum(std::span<const double> x, double hbar);
std::vector<double> nonclassical_momentum(const WorldEnsemble& e);

/// ((N-1)^2/N) (hbar^2/8m) / V_N; never exceeds interworld_potential().
double potential_lower_bound(std::span<const double> x, double mass, double hbar);
double potential_lower_bound(const WorldEnsemble& e);

/// (Delta x)_N (Delta p^nc)_N, bounded below by (1 - 1/N) hbar/2.
double heisenberg_product(std::span<const double> x, double hbar);
double heisenberg_product(const WorldEnsemble& e);

/// Residual of the bound's equality condition
///   x_n - <x> = alpha (g_n - g_{n-1}),  g_n = 1/(x_{n+1} - x_n),
/// with alpha fitted by least squares. Zero exactly when the bound is tight.
struct SaturationFit {
  double alpha = 0.0;
  double max_residual = 0.0;
};
SaturationFit bound_saturation(std::span<const double> x);

/// Piecewise density built from world spacings.
///
/// step_values[n] = 1 / (N (x_n - x_{n-1})) for n >= 1 (zero-based), and the
/// first world uses the forward spacing 1 / (N (x_1 - x_0)) so that every
/// height is positive.
///  - Step: P(x) = step_values[n] on (x_{n-1}, x_n], zero outside [x_0, x_{N-1}];
///    total mass (N-1)/N.
///  - Linear: piecewise linear through (x_n, step_values[n]), falling to zero
///    one mean spacing beyond each end.
struct DensityEstimate {
  enum class Interpolation { Step, Linear };

  std::vector<double> support_points;
  std::vector<double> step_values;
  Interpolation interpolation = Interpolation::Step;

  double operator()(double x) const;
  /// Exact integral of the estimate over the real line.
  double total_mass() const;
};

DensityEstimate smoothed_density(std::span<const double> x,
                                 DensityEstimate::Interpolation interpolation =
                                     DensityEstimate::Interpolation::Step);
DensityEstimate smoothed_density(const WorldEnsemble& e,
                                 DensityEstimate::Interpolation interpolation =
                                     DensityEstimate::Interpolation::Step);

}  // namespace miw
