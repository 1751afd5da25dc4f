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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "miw/dynamics.hpp"
#include "miw/schrodinger.hpp"

namespace miw {

enum class Command {
  GroundExact,
  GroundRelax,
  Evolve,
  Tunnel,
  ReferenceEvolve,
  Compare,
};

std::string_view to_string(Command c) noexcept;
std::optional<Command> parse_command(std::string_view name) noexcept;

/// Flat description of one run. Every field has a key of the same name in the
/// config file and a --flag on the command line (underscores become dashes).
struct ScenarioConfig {
  Command command = Command::Evolve;
  /// Preset filling unset fields: double-slit, oscillator, free-pair or custom.
  std::string scenario = "custom";

  std::size_t n = 0;
  double mass = 1.0;
  double hbar = 1.0;

  std::string potential = "free";  // free | harmonic | barrier
  double omega = 1.0;
  std::optional<double> barrier_v0;
  std::optional<double> barrier_width;
  std::optional<double> barrier_center;

  /// Initial worlds: pair (two Gaussians), gaussian, ground (exact oscillator
  /// ground state), uniform-pair (two worlds at separation q0) or explicit.
  std::string initial = "pair";
  /// Packet spread: psi ~ exp(-(x - c)^2 / (2 sigma^2)) for `pair`, density
  /// standard deviation for `gaussian`.
  double sigma = 1.0;
  double separation = 4.0;
  double center = 0.0;
  /// Uniform initial velocity of every world.
  double v0 = 0.0;
  double q0 = 1.0;
  /// Centroid displacement applied to `ground` initial data.
  double offset = 0.0;
  std::vector<double> positions;
  std::vector<double> momenta;

  double dt = 1e-3;
  double t_final = 1.0;
  std::size_t record_every = 10;

  double force_tol = 1e-10;
  std::size_t max_outer = 200000;
  std::size_t inner_steps = 10;
  std::vector<double> aux_offsets{1e12, 2e12};

  double grid_min = -32.0;
  double grid_max = 32.0;
  std::size_t grid_points = 2048;
  std::size_t snapshot_every = 1;

  double energy_drift_tol = 1e-6;

  std::string sample = "quantile";  // quantile | random
  std::uint64_t seed = 0;

  std::filesystem::path output_dir;
  std::string format = "csv";  // csv | json
};

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment. Keys are normalized to
/// snake_case. Throws Error(ConfigError) on malformed lines.
KeyValues parse_key_values(std::string_view text);
KeyValues load_key_values(const std::filesystem::path& path);

/// Applies a preset, then the key-values (later keys win). Unknown keys and
/// malformed numbers are collected into the thrown Error(ConfigError) message.
ScenarioConfig make_config(Command command, const KeyValues& values);

/// All problems with a config, reported together. Empty means valid.
std::vector<std::string> validate(const ScenarioConfig& config);

/// Keys accepted by make_config, in snake_case.
const std::vector<std::string>& config_keys();

struct RunResult {
  int exit_code = 0;
  std::vector<std::filesystem::path> files;
  std::string summary;  // contents of summary.json
};

/// Process exit status for an error class: 2 config, 3 numerical abort
/// (ordering/grid), 4 non-convergence.
int exit_code_for(ErrorCode code) noexcept;

/// Executes a validated config and writes trajectory, energy and summary files
/// into config.output_dir (falling back to $MIW_OUTPUT_DIR, then "."). Output
/// is byte-for-byte reproducible for identical configs on one platform.
RunResult run(const ScenarioConfig& config);

}  // namespace miw
