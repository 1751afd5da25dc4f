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

#include "miw/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace miw {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Runs the recurrence from xi_1 over the first half of the configuration.
/// Returns nothing when the trial leaves the admissible branch (a partial sum
/// reaching zero or a first-half coordinate becoming non-negative).
std::optional<std::vector<double>> half_configuration(double xi1, std::size_t half) {
  std::vector<double> xi;
  xi.reserve(half);
  xi.push_back(xi1);
  double partial = xi1;
  for (std::size_t n = 1; n < half; ++n) {
    if (!(partial < 0.0)) return std::nullopt;
    const double next = xi.back() - 1.0 / partial;
    if (!(next < 0.0)) return std::nullopt;
    xi.push_back(next);
    partial += next;
  }
  return xi;
}

/// Half-sum-of-squares condition; inadmissible trials count as undershoot.
double half_condition(double xi1, std::size_t n_worlds) {
  const auto xi = half_configuration(xi1, n_worlds / 2);
  if (!xi) return -1.0;
  double sq = 0.0;
  for (double v : *xi) sq += v * v;
  return sq - 0.5 * static_cast<double>(n_worlds - 1);
}

double first_coordinate(std::size_t n_worlds) {
  // For N = 2 the root is the upper bracket end itself.
  if (n_worlds == 2) return -std::sqrt(0.5);
  const double nm1 = static_cast<double>(n_worlds - 1);
  double lo = -std::sqrt(nm1);
  double hi = -std::sqrt(nm1 / static_cast<double>(n_worlds));
  const double f_lo = half_condition(lo, n_worlds);
  const double f_hi = half_condition(hi, n_worlds);
  if (!(f_lo > 0.0) || f_hi > 0.0) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "no sign change on [" << lo << ", " << hi << "]: f = " << f_lo << ", " << f_hi;
    throw Error(ErrorCode::NoConvergence, msg.str());
  }
  // Bisect to the last representable midpoint.
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (half_condition(mid, n_worlds) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(half_condition(lo, n_worlds)) <= std::abs(half_condition(hi, n_worlds)) ? lo : hi;
}

}  // namespace

double groundstate_energy_exact(std::size_t n_worlds, double omega, double hbar) {
  if (n_worlds < 1) throw Error(ErrorCode::InvalidArgument, "n_worlds must be >= 1");
  return (1.0 - 1.0 / static_cast<double>(n_worlds)) * 0.5 * hbar * omega;
}

GroundstateResult exact_oscillator_groundstate(std::size_t n_worlds, double omega, double mass,
                                               double hbar) {
  if (n_worlds < 2) throw Error(ErrorCode::InvalidArgument, "n_worlds must be >= 2");
  if (!(omega > 0.0 && mass > 0.0 && hbar > 0.0) || !std::isfinite(omega * mass * hbar)) {
    throw Error(ErrorCode::InvalidArgument, "omega, mass and hbar must be positive");
  }
  const double xi1 = first_coordinate(n_worlds);
  const auto half = half_configuration(xi1, n_worlds / 2);
  if (!half) throw Error(ErrorCode::NoConvergence, "root left the admissible branch");

  GroundstateResult out;
  out.xi.assign(n_worlds, 0.0);
  for (std::size_t n = 0; n < half->size(); ++n) {
    out.xi[n] = (*half)[n];
    out.xi[n_worlds - 1 - n] = -(*half)[n];
  }
  const double length = std::sqrt(hbar / (2.0 * mass * omega));
  out.positions.resize(n_worlds);
  for (std::size_t n = 0; n < n_worlds; ++n) out.positions[n] = out.xi[n] * length;

  const PotentialSpec v = HarmonicPotential{omega};
  const auto e = WorldEnsemble::at_rest(out.positions, mass, hbar);
  out.energy_per_world = total_hamiltonian(e, v) / static_cast<double>(n_worlds);
  out.residual = max_abs(net_force(out.positions, v, mass, hbar));
  out.iterations = 0;
  out.converged = true;
  return out;
}

RelaxResult relax_to_groundstate(std::vector<double> x0, const PotentialSpec& v, double mass,
                                 double hbar, const RelaxOptions& options) {
  check_strictly_increasing(x0);
  validate_potential(v);
  if (x0.size() < 2) throw Error(ErrorCode::BadLength, "at least two worlds are required");
  if (!(options.dt > 0.0) || !std::isfinite(options.dt)) {
    throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  }
  if (options.inner_steps < 1) throw Error(ErrorCode::InvalidArgument, "inner_steps must be >= 1");
  if (!(mass > 0.0) || !(hbar >= 0.0)) throw Error(ErrorCode::InvalidArgument, "bad mass or hbar");

  const std::size_t n = x0.size();
  std::optional<AuxiliaryWorlds> aux;
  if (options.use_auxiliary_worlds) {
    const auto [near, far] = std::minmax(options.aux_offsets[0], options.aux_offsets[1]);
    if (!(near > 0.0) || !(far > near)) {
      throw Error(ErrorCode::InvalidArgument, "auxiliary offsets must be distinct and positive");
    }
    const double spacing = (x0.back() - x0.front()) / static_cast<double>(n - 1);
    aux = AuxiliaryWorlds{{x0.front() - far * spacing, x0.front() - near * spacing},
                          {x0.back() + near * spacing, x0.back() + far * spacing}};
  }

  const auto potential_total = [&](const std::vector<double>& x) {
    double sum = interworld_potential(x, mass, hbar);
    for (double xi : x) sum += potential_energy(v, xi, mass);
    return sum;
  };

  RelaxResult out;
  std::vector<double> x = std::move(x0);
  std::vector<double> p(n);
  const double h = options.dt / static_cast<double>(options.inner_steps);
  auto f = net_force(x, v, mass, hbar, aux);
  double residual = max_abs(f);
  std::vector<double> best = x;
  double best_residual = residual;
  if (options.trace_energy) out.energy_trace.push_back(potential_total(x));

  std::size_t outer = 0;
  while (residual >= options.force_tol && outer < options.max_outer) {
    std::fill(p.begin(), p.end(), 0.0);
    for (std::size_t s = 0; s < options.inner_steps; ++s) {
      for (std::size_t k = 0; k < n; ++k) {
        p[k] += 0.5 * h * f[k];
        x[k] += h * p[k] / mass;
      }
      check_strictly_increasing(x, ErrorCode::OrderingViolated);
      if (aux && (x.front() <= aux->left[1] || x.back() >= aux->right[0])) {
        throw Error(ErrorCode::OrderingViolated, "world crossed an auxiliary world");
      }
      f = net_force(x, v, mass, hbar, aux);
      for (std::size_t k = 0; k < n; ++k) p[k] += 0.5 * h * f[k];
    }
    ++outer;
    residual = max_abs(f);
    if (residual < best_residual) {
      best_residual = residual;
      best = x;
    }
    if (options.trace_energy) out.energy_trace.push_back(potential_total(x));
  }

  auto& g = out.ground;
  g.converged = residual < options.force_tol;
  g.positions = g.converged ? x : best;
  g.residual = g.converged ? residual : best_residual;
  g.iterations = outer;
  const auto e = WorldEnsemble::at_rest(g.positions, mass, hbar);
  g.energy_per_world = total_hamiltonian(e, v) / static_cast<double>(n);
  if (const auto* osc = std::get_if<HarmonicPotential>(&v)) {
    const double scale = std::sqrt(2.0 * mass * osc->omega / hbar);
    g.xi.resize(n);
    for (std::size_t k = 0; k < n; ++k) g.xi[k] = g.positions[k] * scale;
  }
  return out;
}

}  // namespace miw
