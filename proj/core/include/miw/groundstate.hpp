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
#include <cstddef>
#include <vector>

#include "miw/dynamics.hpp"

namespace miw {

struct GroundstateResult {
  /// Dimensionless coordinates xi_n = sqrt(2 m omega / hbar) x_n (harmonic only;
  /// empty for other potentials).
  std::vector<double> xi;
  std::vector<double> positions;
  double energy_per_world = 0.0;
  std::size_t iterations = 0;
  /// max_n |f(x_n) + r_n| at the returned configuration.
  double residual = 0.0;
  bool converged = true;
};

/// (1 - 1/N) hbar omega / 2.
double groundstate_energy_exact(std::size_t n_worlds, double omega, double hbar);

/// Exact toy-model oscillator ground state.
///
/// Solves xi_{n+1} = xi_n - 1/(xi_1 + ... + xi_n) for xi_1 by bisection on the
/// half-configuration condition xi_1^2 + ... + xi_[N/2]^2 = (N-1)/2 and fills
/// the rest by the antisymmetry xi_n = -xi_{N+1-n}.
/// Errors: InvalidArgument (N < 2 or bad parameters), NoConvergence.
GroundstateResult exact_oscillator_groundstate(std::size_t n_worlds, double omega, double mass,
                                               double hbar);

struct RelaxOptions {
  double dt = 5e-2;
  std::size_t inner_steps = 10;
  std::size_t max_outer = 200000;
  double force_tol = 1e-10;
  /// Auxiliary worlds sit at x_1 - k d and x_N + k d for k in these offsets,
  /// with d the mean spacing of the starting configuration.
  std::array<double, 2> aux_offsets{1e12, 2e12};
  bool use_auxiliary_worlds = true;
  /// Record sum V + U_N after each outer iteration into RelaxResult::energy_trace.
  bool trace_energy = false;
};

struct RelaxResult {
  GroundstateResult ground;
  /// Total potential energy (classical plus interworld) before the first and
  /// after each outer iteration, when traced.
  std::vector<double> energy_trace;
};

/// Repeatedly zero all momenta and integrate over dt until the net force drops
/// below force_tol. Non-convergence is reported through ground.converged =
/// false with the best configuration found; crossing worlds throw
/// OrderingViolated.
RelaxResult relax_to_groundstate(std::vector<double> x0, const PotentialSpec& v, double mass,
                                 double hbar, const RelaxOptions& options = {});

}  // namespace miw
