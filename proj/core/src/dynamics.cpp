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

#include "miw/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace miw {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double potential_energy(const PotentialSpec& v, double x, double mass) {
  return std::visit(
      overloaded{
          [](const FreePotential&) { return 0.0; },
          [&](const HarmonicPotential& h) { return 0.5 * mass * h.omega * h.omega * x * x; },
          [&](const GaussianBarrier& b) {
            const double u = (x - b.center) / b.width;
            return b.v0 * std::exp(-0.5 * u * u);
          },
      },
      v);
}

double classical_force(const PotentialSpec& v, double x, double mass) {
  return std::visit(
      overloaded{
          [](const FreePotential&) { return 0.0; },
          [&](const HarmonicPotential& h) { return -mass * h.omega * h.omega * x; },
          [&](const GaussianBarrier& b) {
            const double u = (x - b.center) / b.width;
            return b.v0 * (x - b.center) / (b.width * b.width) * std::exp(-0.5 * u * u);
          },
      },
      v);
}

EnergyBreakdown energy_breakdown(const WorldEnsemble& e, const PotentialSpec& v) {
  EnergyBreakdown out;
  const auto x = e.positions();
  const auto p = e.momenta();
  for (std::size_t n = 0; n < x.size(); ++n) {
    out.kinetic += p[n] * p[n] / (2.0 * e.mass());
    out.classical += potential_energy(v, x[n], e.mass());
  }
  out.interworld = interworld_potential(e);
  return out;
}

double total_hamiltonian(const WorldEnsemble& e, const PotentialSpec& v) {
  return energy_breakdown(e, v).total();
}

std::vector<double> net_force(std::span<const double> x, const PotentialSpec& v, double mass,
                              double hbar, const std::optional<AuxiliaryWorlds>& aux) {
  auto f = interworld_force(x, mass, hbar, aux);
  if (!std::holds_alternative<FreePotential>(v)) {
    for (std::size_t n = 0; n < x.size(); ++n) f[n] += classical_force(v, x[n], mass);
  }
  return f;
}

namespace {

void require_dt(double dt) {
  if (!(std::isfinite(dt) && dt > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "dt must be positive and finite");
  }
}

/// Kick-drift-kick with the force carried between steps.
class VerletStepper {
 public:
  VerletStepper(const WorldEnsemble& e, const PotentialSpec& v, double dt)
      : v_(v),
        dt_(dt),
        mass_(e.mass()),
        hbar_(e.hbar()),
        x_(e.positions().begin(), e.positions().end()),
        p_(e.momenta().begin(), e.momenta().end()),
        f_(net_force(x_, v_, mass_, hbar_)) {}

  /// Leaves the state untouched if the step fails.
  void step() {
    const double half = 0.5 * dt_;
    x_prev_ = x_;
    p_prev_ = p_;
    for (std::size_t n = 0; n < x_.size(); ++n) {
      p_[n] += half * f_[n];
      x_[n] += dt_ * p_[n] / mass_;
    }
    try {
      for (std::size_t n = 0; n < x_.size(); ++n) {
        if (!std::isfinite(x_[n]) || !std::isfinite(p_[n])) {
          throw Error(ErrorCode::NonFinite, "state became non-finite");
        }
      }
      check_strictly_increasing(x_, ErrorCode::OrderingViolated);
    } catch (...) {
      x_.swap(x_prev_);
      p_.swap(p_prev_);
      throw;
    }
    f_ = net_force(x_, v_, mass_, hbar_);
    for (std::size_t n = 0; n < x_.size(); ++n) p_[n] += half * f_[n];
  }

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& p() const { return p_; }

 private:
  const PotentialSpec& v_;
  double dt_;
  double mass_;
  double hbar_;
  std::vector<double> x_;
  std::vector<double> p_;
  std::vector<double> f_;
  std::vector<double> x_prev_;
  std::vector<double> p_prev_;
};

}  // namespace

WorldEnsemble velocity_verlet_step(const WorldEnsemble& e, const PotentialSpec& v, double dt) {
  require_dt(dt);
  VerletStepper stepper(e, v, dt);
  stepper.step();
  return e.with_state(stepper.x(), stepper.p());
}

EvolveResult evolve(const WorldEnsemble& e, const PotentialSpec& v, const EvolveOptions& options) {
  require_dt(options.dt);
  if (options.steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
  if (options.record_every < 1) throw Error(ErrorCode::InvalidArgument, "record_every must be >= 1");
  validate_potential(v);

  EvolveResult out{{}, {}, e};
  auto& traj = out.trajectory;
  auto& report = out.report;
  traj.kind = TrajectorySet::Kind::MIW;
  report.dt = options.dt;

  const auto record = [&](const WorldEnsemble& state, double t) {
    const auto parts = energy_breakdown(state, v);
    traj.times.push_back(t);
    traj.positions.emplace_back(state.positions().begin(), state.positions().end());
    traj.momenta.emplace_back(state.momenta().begin(), state.momenta().end());
    traj.energy.push_back(parts.total());
    traj.energy_parts.push_back(parts);
    const double h0 = traj.energy.front();
    const double scale = std::abs(h0) > 0.0 ? std::abs(h0) : 1.0;
    report.max_energy_drift = std::max(report.max_energy_drift, std::abs(parts.total() - h0) / scale);
  };

  record(e, 0.0);
  VerletStepper stepper(e, v, options.dt);
  for (std::size_t s = 1; s <= options.steps; ++s) {
    try {
      stepper.step();
    } catch (const Error& err) {
      report.aborted = true;
      report.reason = err.what();
      break;
    }
    report.steps_taken = s;
    const bool last = s == options.steps;
    if (s % options.record_every == 0 || last) {
      const double t = static_cast<double>(s) * options.dt;
      out.final_state = e.with_state(stepper.x(), stepper.p());
      record(out.final_state, t);
      if (!last && options.stop_when && options.stop_when(out.final_state, t)) break;
    }
  }
  if (report.aborted && report.steps_taken > 0) {
    const double t = static_cast<double>(report.steps_taken) * options.dt;
    if (traj.times.back() != t) {
      out.final_state = e.with_state(stepper.x(), stepper.p());
      record(out.final_state, t);
    }
  }
  return out;
}

EvolveResult evolve(const WorldEnsemble& e, const PotentialSpec& v, double dt, std::size_t steps,
                    std::size_t record_every) {
  EvolveOptions options;
  options.dt = dt;
  options.steps = steps;
  options.record_every = record_every;
  return evolve(e, v, options);
}

}  // namespace miw
