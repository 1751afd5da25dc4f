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
#include <optional>
#include <string>
#include <vector>

#include "miw/ensemble.hpp"
#include "miw/interaction.hpp"

namespace miw {

/// V(x) for the classical external potential. Harmonic uses (1/2) m omega^2 x^2.
double potential_energy(const PotentialSpec& v, double x, double mass);

/// f = -V'(x).
double classical_force(const PotentialSpec& v, double x, double mass);

struct EnergyBreakdown {
  double kinetic = 0.0;
  double classical = 0.0;
  double interworld = 0.0;

  double total() const noexcept { return kinetic + classical + interworld; }
};

EnergyBreakdown energy_breakdown(const WorldEnsemble& e, const PotentialSpec& v);

/// H_N = sum p^2/2m + sum V(x_n) + U_N(X). The average energy per world is H_N / N.
double total_hamiltonian(const WorldEnsemble& e, const PotentialSpec& v);

/// f(x_n) + r_n for every world.
std::vector<double> net_force(std::span<const double> x, const PotentialSpec& v, double mass,
                              double hbar,
                              const std::optional<AuxiliaryWorlds>& aux = std::nullopt);

/// One kick-drift-kick step. Throws InvalidArgument for dt <= 0 and
/// OrderingViolated if two worlds cross.
WorldEnsemble velocity_verlet_step(const WorldEnsemble& e, const PotentialSpec& v, double dt);

struct TrajectorySet {
  enum class Kind { MIW, Bohmian };

  Kind kind = Kind::MIW;
  std::vector<double> times;
  std::vector<std::vector<double>> positions;
  std::vector<std::vector<double>> momenta;
  /// Total energy per frame (MIW only).
  std::vector<double> energy;
  /// Per-frame energy components (MIW only).
  std::vector<EnergyBreakdown> energy_parts;

  std::size_t frames() const noexcept { return times.size(); }
  std::size_t worlds() const noexcept { return positions.empty() ? 0 : positions.front().size(); }
};

struct StepReport {
  double dt = 0.0;
  std::size_t steps_taken = 0;
  /// max |H(t) - H(0)| / |H(0)| over recorded frames.
  double max_energy_drift = 0.0;
  bool aborted = false;
  std::string reason;
};

struct EvolveOptions {
  double dt = 1e-3;
  std::size_t steps = 1;
  std::size_t record_every = 1;
  /// Checked at every recorded frame; returning true ends the run early. Not an abort.
  std::function<bool(const WorldEnsemble&, double)> stop_when;
};

struct EvolveResult {
  TrajectorySet trajectory;
  StepReport report;
  WorldEnsemble final_state;
};

/// Velocity-Verlet evolution with one force evaluation per step.
///
/// Records t = 0, every `record_every` steps, and the final step. A crossing of
/// two worlds ends the run with report.aborted set and the partial trajectory
/// retained; it does not throw.
EvolveResult evolve(const WorldEnsemble& e, const PotentialSpec& v, const EvolveOptions& options);

EvolveResult evolve(const WorldEnsemble& e, const PotentialSpec& v, double dt, std::size_t steps,
                    std::size_t record_every);

}  // namespace miw
