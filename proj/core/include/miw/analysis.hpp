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
#include <span>
#include <vector>

#include "miw/dynamics.hpp"
#include "miw/schrodinger.hpp"

namespace miw {

// ---------------------------------------------------------------------------
// Wavepacket spreading

/// V(t) ~ c0 + c1 t + c2 t^2 by least squares.
struct QuadraticFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  /// max |fit(t_k) - V(t_k)| / max |V(t_k)|.
  double max_residual = 0.0;
};

QuadraticFit fit_quadratic(std::span<const double> t, std::span<const double> y);

struct SpreadingCheck {
  QuadraticFit fit;
  /// V_N(0), (2/m) Cov_{N,0}(x,p), (2/m) [<E>_N - <p>_N^2 / 2m].
  double expected_c0 = 0.0;
  double expected_c1 = 0.0;
  double expected_c2 = 0.0;
  /// Largest |fit - expected| over the three coefficients, each divided by
  /// max(|expected|, largest expected magnitude) so that a zero coefficient is
  /// compared on the scale of the others.
  double max_coefficient_error = 0.0;
};

/// Compares the position variance of a free-evolution trajectory to the
/// quadratic spreading law fixed by its initial data.
SpreadingCheck verify_spreading_law(const TrajectorySet& t, double mass, double energy_per_world,
                                    double covariance0, double mean_momentum0);

/// Same, taking the initial data from the first frame (free potential).
SpreadingCheck verify_spreading_law(const TrajectorySet& t, double mass, double hbar);

// ---------------------------------------------------------------------------
// Ehrenfest

/// max_t |<x>_N(t) - xbar(t)| where xbar solves the classical equation of
/// motion from the first frame's centroid. Free and Harmonic only
/// (UnsupportedPotential otherwise).
double ehrenfest_residual(const TrajectorySet& t, const PotentialSpec& v, double mass);

// ---------------------------------------------------------------------------
// Two-world results

/// q(t) = [q0^2 + (hbar t / m q0)^2]^{1/2}.
double two_world_separation_exact(double q0, double t, double mass, double hbar);

struct TunnelingPrediction {
  /// hbar / (2 m q0), the asymptotic speed gained (lost) by the leading (trailing) world.
  double boost = 0.0;
  /// sqrt(2 V0 / m).
  double v_classical = 0.0;
  bool leading_transmits = false;
  bool trailing_reflects = false;
};

TunnelingPrediction tunneling_prediction(double v0, double q0, double barrier_v0, double mass,
                                         double hbar);

struct TunnelingRunOptions {
  /// Separation multiple q/q0 the pair reaches before the leading world meets the barrier.
  double asymptotic_ratio = 20.0;
  /// Target (dt * fastest rate)^2; sets the fixed step for the run.
  double dt_scale = 1e-9;
  std::size_t max_steps = 200'000'000;
  std::size_t record_every = 1000;
};

struct TunnelingOutcome {
  TunnelingPrediction prediction;
  /// Beyond barrier centre + 3 w moving right at the end of the run.
  bool leading_transmitted = false;
  bool trailing_transmitted = false;
  bool resolved = false;
  double dt = 0.0;
  double t_end = 0.0;
  double max_energy_drift = 0.0;
  EvolveResult run;
};

/// Simulates two worlds with equal initial velocity v0 and separation q0
/// approaching the barrier from the left, starting far enough away that the
/// pair separates to asymptotic_ratio * q0 first. Stops once each world is
/// beyond centre +- 3w and moving away from the barrier.
TunnelingOutcome simulate_tunneling(double v0, double q0, const GaussianBarrier& barrier,
                                    double mass, double hbar,
                                    const TunnelingRunOptions& options = {});

// ---------------------------------------------------------------------------
// Zero-point and uncertainty bounds

/// <V>_N + ((N-1)/N)^2 hbar^2 / (8 m V_N).
double zero_point_energy_bound(std::span<const double> x, const PotentialSpec& v, double mass,
                               double hbar);

struct BoundReport {
  std::size_t frames = 0;
  std::size_t energy_violations = 0;
  std::size_t uncertainty_violations = 0;
  /// min over frames of (<E>_N - bound) / |bound|.
  double min_energy_margin = 0.0;
  /// min over frames of product / ((1 - 1/N) hbar / 2) - 1.
  double min_uncertainty_margin = 0.0;

  bool ok() const noexcept { return energy_violations == 0 && uncertainty_violations == 0; }
};

/// Checks the zero-point energy bound and the uncertainty-type bound on every
/// frame of an MIW trajectory. `tolerance` absorbs rounding in the comparison.
BoundReport check_bounds(const TrajectorySet& t, const PotentialSpec& v, double mass, double hbar,
                         double tolerance = 1e-12);

// ---------------------------------------------------------------------------
// MIW vs quantum comparison

/// W1 between the empirical measure of `samples` and the piecewise-linear
/// density (x, density), computed as the integral of |F_emp - F|.
double wasserstein1_to_density(std::span<const double> samples, std::span<const double> x,
                               std::span<const double> density);

/// W1 between two equal-size empirical measures (mean |a_(i) - b_(i)|).
double wasserstein1_samples(std::span<const double> a, std::span<const double> b);

struct ComparisonReport {
  std::vector<double> times;
  std::vector<double> per_world_max_deviation;
  std::vector<double> mean_abs_deviation;
  std::vector<double> wasserstein_density_distance;
};

/// Rank-matched deviations between MIW and dBB worlds and the W1 distance of
/// the MIW worlds to |psi_t|^2. Throws ShapeMismatch unless the two trajectory
/// sets and the reference list share N and their recorded times.
ComparisonReport compare_miw_vs_dbb(const TrajectorySet& miw, const TrajectorySet& dbb,
                                    const std::vector<WavefunctionGrid>& reference);

/// Number of maxima of a sampled profile after merging every pair of
/// adjacent maxima whose separating minimum is not below `depth` times the
/// smaller of the two. Maxima below `floor` times the global maximum are ignored.
std::size_t count_separated_maxima(std::span<const double> profile, double depth = 0.5,
                                   double floor = 0.0);

/// Smallest depth (to 0.01) at which count_separated_maxima reaches `wanted`;
/// 1.0 if never.
double interference_depth(std::span<const double> profile, std::size_t wanted = 3,
                          double floor = 0.0);

/// Node heights of the linear density estimate with the zero end points
/// appended, i.e. the profile whose maxima are those of the smoothed density.
std::vector<double> miw_density_profile(std::span<const double> x);

}  // namespace miw
