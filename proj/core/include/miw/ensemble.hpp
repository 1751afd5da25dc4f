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

#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "miw/error.hpp"

namespace miw {

struct FreePotential {};

struct HarmonicPotential {
  double omega = 1.0;
};

/// V(x) = v0 * exp(-(x - center)^2 / (2 width^2)).
struct GaussianBarrier {
  double v0 = 1.0;
  double width = 1.0;
  double center = 0.0;
};

using PotentialSpec = std::variant<FreePotential, HarmonicPotential, GaussianBarrier>;

/// Throws Error(InvalidArgument) for non-finite or non-positive parameters.
void validate_potential(const PotentialSpec& v);

/// Positions and momenta of N one-dimensional worlds sharing mass m and hbar.
///
/// Positions are strictly increasing. The type never reorders its input:
/// an unsorted configuration is rejected, since the world labels carry meaning
/// (the interworld potential couples neighbours by index).
class WorldEnsemble {
 public:
  /// Validates and builds an ensemble.
  /// Errors: BadLength (size mismatch or N < 2), NonFinite, NotStrictlyOrdered,
  /// InvalidArgument (mass <= 0 or hbar < 0).
  static WorldEnsemble create(std::vector<double> positions, std::vector<double> momenta,
                              double mass, double hbar);

  /// Same as create() with all momenta zero.
  static WorldEnsemble at_rest(std::vector<double> positions, double mass, double hbar);

  std::size_t size() const noexcept { return positions_.size(); }
  std::span<const double> positions() const noexcept { return positions_; }
  std::span<const double> momenta() const noexcept { return momenta_; }
  double mass() const noexcept { return mass_; }
  double hbar() const noexcept { return hbar_; }

  /// Returns a copy with replaced phase-space coordinates. Ordering violations
  /// are reported as OrderingViolated (worlds crossed during evolution).
  WorldEnsemble with_state(std::vector<double> positions, std::vector<double> momenta) const;

 private:
  WorldEnsemble(std::vector<double> x, std::vector<double> p, double m, double hbar)
      : positions_(std::move(x)), momenta_(std::move(p)), mass_(m), hbar_(hbar) {}

  std::vector<double> positions_;
  std::vector<double> momenta_;
  double mass_;
  double hbar_;
};

/// Throws `code` if any x[n+1] <= x[n], NonFinite on NaN/Inf.
void check_strictly_increasing(std::span<const double> x,
                               ErrorCode code = ErrorCode::NotStrictlyOrdered);

/// Equally weighted population mean N^-1 sum f(x_n, p_n).
double population_mean(const WorldEnsemble& e,
                       const std::function<double(double, double)>& f);

double mean_position(const WorldEnsemble& e);
double mean_momentum(const WorldEnsemble& e);

/// <x^2>_N - <x>_N^2.
double variance_x(std::span<const double> x);
double variance_x(const WorldEnsemble& e);

/// N^-1 X.P - <x>_N <p>_N.
double covariance_xp(const WorldEnsemble& e);

}  // namespace miw
