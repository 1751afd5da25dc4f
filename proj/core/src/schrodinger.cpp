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

#include "miw/schrodinger.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "miw/error.hpp"

namespace miw {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::complex<double> kI{0.0, 1.0};

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive and finite");
  }
}

void normalize(WavefunctionGrid& w) {
  const double n = w.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorCode::NonFinite, "cannot normalize psi");
  for (auto& z : w.psi) z /= n;
}

void require_coverage(const GridSpec& g, double center, double sigma) {
  if (center - 10.0 * sigma < g.x_min || center + 10.0 * sigma > g.x_max) {
    throw Error(ErrorCode::GridTooSmall,
                "grid [" + std::to_string(g.x_min) + ", " + std::to_string(g.x_max) +
                    "] does not cover 10 sigma around " + std::to_string(center));
  }
}

double peak(std::span<const double> p) {
  return p.empty() ? 0.0 : *std::max_element(p.begin(), p.end());
}

struct Derivatives {
  std::vector<double> p;
  std::vector<double> d0;
  std::vector<double> d1;
  std::vector<double> d2;
  std::vector<double> d3;
  std::vector<std::uint8_t> valid;
};

Derivatives derivatives_of(const WavefunctionGrid& w, bool amplitude) {
  Derivatives d;
  d.p = w.density();
  d.d0 = d.p;
  if (amplitude) {
    for (auto& v : d.d0) v = std::sqrt(v);
  }
  const double dx = w.grid.dx();
  d.d1 = spectral_derivative(std::span<const double>(d.d0), dx, 1);
  d.d2 = spectral_derivative(std::span<const double>(d.d0), dx, 2);
  d.d3 = spectral_derivative(std::span<const double>(d.d0), dx, 3);
  const double floor = kDensityMaskFloor * peak(d.p);
  d.valid.resize(d.p.size());
  for (std::size_t j = 0; j < d.p.size(); ++j) d.valid[j] = d.p[j] >= floor && d.p[j] > 0.0;
  return d;
}

std::vector<double> trapezoid_cdf(std::span<const double> x, std::span<const double> density) {
  std::vector<double> c(x.size(), 0.0);
  for (std::size_t j = 1; j < x.size(); ++j) {
    c[j] = c[j - 1] + 0.5 * (density[j] + density[j - 1]) * (x[j] - x[j - 1]);
  }
  return c;
}

/// Position where the piecewise-linear density has accumulated `target`.
double invert_cdf(std::span<const double> x, std::span<const double> density,
                  const std::vector<double>& cdf, double target) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.begin()) return x.front();
  if (it == cdf.end()) return x.back();
  const auto j = static_cast<std::size_t>(std::distance(cdf.begin(), it)) - 1;
  const double h = x[j + 1] - x[j];
  const double rest = target - cdf[j];
  const double a = 0.5 * (density[j + 1] - density[j]) / h;
  const double b = density[j];
  double s = 0.0;
  const double disc = std::max(0.0, b * b + 4.0 * a * rest);
  const double denom = b + std::sqrt(disc);
  s = denom > 0.0 ? 2.0 * rest / denom : 0.0;
  return x[j] + std::clamp(s, 0.0, h);
}

void validate_density(std::span<const double> x, std::span<const double> density) {
  if (x.size() != density.size()) throw Error(ErrorCode::ShapeMismatch, "x/density size mismatch");
  if (x.size() < 2) throw Error(ErrorCode::BadLength, "density needs at least two nodes");
  check_strictly_increasing(x);
  for (double d : density) {
    if (!std::isfinite(d) || d < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "density must be finite and non-negative");
    }
  }
}

std::vector<double> grid_points(const GridSpec& g) {
  std::vector<double> x(g.n_points);
  for (std::size_t j = 0; j < g.n_points; ++j) x[j] = g.x(j);
  return x;
}

}  // namespace

std::vector<double> WavefunctionGrid::density() const {
  std::vector<double> p(psi.size());
  std::transform(psi.begin(), psi.end(), p.begin(), [](const auto& z) { return std::norm(z); });
  return p;
}

double WavefunctionGrid::norm() const {
  double sum = 0.0;
  for (const auto& z : psi) sum += std::norm(z);
  return std::sqrt(sum * grid.dx());
}

double WavefunctionGrid::mean_x() const {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double p = std::norm(psi[j]);
    num += grid.x(j) * p;
    den += p;
  }
  return num / den;
}

double WavefunctionGrid::variance_x() const {
  const double mu = mean_x();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double p = std::norm(psi[j]);
    const double d = grid.x(j) - mu;
    num += d * d * p;
    den += p;
  }
  return num / den;
}

void validate_grid(const GridSpec& g) {
  if (!std::isfinite(g.x_min) || !std::isfinite(g.x_max) || !(g.x_max > g.x_min)) {
    throw Error(ErrorCode::InvalidArgument, "grid bounds must be finite with x_max > x_min");
  }
  if (g.n_points < 4 || !std::has_single_bit(g.n_points)) {
    throw Error(ErrorCode::InvalidArgument, "grid_points must be a power of two >= 4");
  }
}

WavefunctionGrid build_initial_state(const InitialStateSpec& spec, const GridSpec& grid,
                                     double mass, double hbar) {
  validate_grid(grid);
  require_positive(mass, "mass");
  require_positive(hbar, "hbar");
  WavefunctionGrid w{grid, std::vector<std::complex<double>>(grid.n_points), mass, hbar};
  const auto gaussian = [&](double c, double sigma) {
    for (std::size_t j = 0; j < grid.n_points; ++j) {
      const double d = grid.x(j) - c;
      w.psi[j] += std::exp(-d * d / (4.0 * sigma * sigma));
    }
  };
  std::visit(overloaded{
                 [&](const GaussianPair& s) {
                   require_positive(s.sigma, "sigma");
                   if (!(s.separation >= 0.0)) {
                     throw Error(ErrorCode::InvalidArgument, "separation must be >= 0");
                   }
                   require_coverage(grid, -0.5 * s.separation, s.sigma);
                   require_coverage(grid, 0.5 * s.separation, s.sigma);
                   gaussian(-0.5 * s.separation, s.sigma);
                   gaussian(0.5 * s.separation, s.sigma);
                 },
                 [&](const SingleGaussian& s) {
                   require_positive(s.sigma, "sigma");
                   require_coverage(grid, s.center, s.sigma);
                   gaussian(s.center, s.sigma);
                 },
                 [&](const OscillatorGround& s) {
                   require_positive(s.omega, "omega");
                   const double sigma = std::sqrt(hbar / (2.0 * mass * s.omega));
                   require_coverage(grid, 0.0, sigma);
                   gaussian(0.0, sigma);
                 },
             },
             spec);
  normalize(w);
  return w;
}

double boundary_density_ratio(const WavefunctionGrid& w) {
  const auto p = w.density();
  const double top = peak(p);
  if (!(top > 0.0)) return 0.0;
  return std::max(p.front(), p.back()) / top;
}

SplitStepPropagator::SplitStepPropagator(const GridSpec& grid, const PotentialSpec& v,
                                         double mass, double hbar, double dt)
    : fft_(grid.n_points), dt_(dt) {
  validate_grid(grid);
  validate_potential(v);
  require_positive(mass, "mass");
  require_positive(hbar, "hbar");
  require_positive(dt, "dt");
  const std::size_t n = grid.n_points;
  half_potential_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    half_potential_[j] = std::exp(-kI * potential_energy(v, grid.x(j), mass) * dt / (2.0 * hbar));
  }
  const auto k = fft_wavenumbers(n, grid.dx());
  kinetic_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    kinetic_[j] = std::exp(-kI * hbar * k[j] * k[j] * dt / (2.0 * mass));
  }
}

void SplitStepPropagator::step(std::vector<std::complex<double>>& psi) const {
  if (psi.size() != half_potential_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "psi does not match the propagator grid");
  }
  for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= half_potential_[j];
  fft_.forward(psi);
  for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= kinetic_[j];
  fft_.inverse(psi);
  for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= half_potential_[j];
}

SplitStepResult split_step_evolve(const WavefunctionGrid& w, const PotentialSpec& v,
                                  const SplitStepOptions& options) {
  if (options.steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
  if (w.psi.size() != w.grid.n_points) {
    throw Error(ErrorCode::ShapeMismatch, "psi does not match grid");
  }
  const SplitStepPropagator prop(w.grid, v, w.mass, w.hbar, options.dt);
  SplitStepResult out;
  out.final_state = w;
  auto& psi = out.final_state.psi;
  const double norm0 = w.norm();
  const auto snapshot = [&](double t) {
    out.times.push_back(t);
    out.snapshots.push_back(out.final_state);
  };
  if (options.snapshot_every > 0) snapshot(0.0);
  for (std::size_t s = 1; s <= options.steps; ++s) {
    prop.step(psi);
    const double t = static_cast<double>(s) * options.dt;
    const double norm = out.final_state.norm();
    if (!std::isfinite(norm)) throw Error(ErrorCode::NonFinite, "psi became non-finite");
    out.max_norm_drift = std::max(out.max_norm_drift, std::abs(norm - norm0));
    const double ratio = boundary_density_ratio(out.final_state);
    if (ratio > options.boundary_tolerance) {
      throw Error(ErrorCode::GridTooSmall,
                  "boundary density ratio " + std::to_string(ratio) + " at t = " +
                      std::to_string(t));
    }
    if (options.snapshot_every > 0 && (s % options.snapshot_every == 0 || s == options.steps)) {
      snapshot(t);
    }
  }
  return out;
}

MaskedField bohmian_velocity_field(const WavefunctionGrid& w) {
  const auto dpsi = spectral_derivative(std::span<const std::complex<double>>(w.psi),
                                        w.grid.dx(), 1);
  const auto p = w.density();
  const double floor = kDensityMaskFloor * peak(p);
  MaskedField out{std::vector<double>(p.size(), 0.0), std::vector<std::uint8_t>(p.size(), 0)};
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] >= floor && p[j] > 0.0) {
      out.values[j] = (w.hbar / w.mass) * std::imag(std::conj(w.psi[j]) * dpsi[j]) / p[j];
      out.valid[j] = 1;
    }
  }
  return out;
}

MaskedField quantum_potential(const WavefunctionGrid& w) {
  const auto d = derivatives_of(w, true);
  const double c = w.hbar * w.hbar / (2.0 * w.mass);
  MaskedField out{std::vector<double>(d.p.size(), 0.0), d.valid};
  for (std::size_t j = 0; j < d.p.size(); ++j) {
    if (d.valid[j]) out.values[j] = -c * d.d2[j] / d.d0[j];
  }
  return out;
}

MaskedField bohmian_force(const WavefunctionGrid& w) {
  const auto d = derivatives_of(w, true);
  const double c = w.hbar * w.hbar / (2.0 * w.mass);
  MaskedField out{std::vector<double>(d.p.size(), 0.0), d.valid};
  for (std::size_t j = 0; j < d.p.size(); ++j) {
    if (d.valid[j]) {
      const double r = d.d0[j];
      out.values[j] = c * (d.d3[j] * r - d.d2[j] * d.d1[j]) / (r * r);
    }
  }
  return out;
}

MaskedField bohmian_force_density_form(const WavefunctionGrid& w) {
  const auto d = derivatives_of(w, false);
  const double c = w.hbar * w.hbar / (4.0 * w.mass);
  MaskedField out{std::vector<double>(d.p.size(), 0.0), d.valid};
  for (std::size_t j = 0; j < d.p.size(); ++j) {
    if (d.valid[j]) {
      const double p = d.p[j];
      const double g = d.d1[j] / p;
      out.values[j] = c / p * (d.d3[j] - 2.0 * g * d.d2[j] + g * g * d.d1[j]);
    }
  }
  return out;
}

std::vector<double> quantile_sample(std::span<const double> x, std::span<const double> density,
                                    std::size_t n_worlds) {
  validate_density(x, density);
  if (n_worlds < 1) throw Error(ErrorCode::BadLength, "n_worlds must be >= 1");
  const auto cdf = trapezoid_cdf(x, density);
  const double total = cdf.back();
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "density has zero mass");
  std::vector<double> out(n_worlds);
  for (std::size_t n = 0; n < n_worlds; ++n) {
    const double u = (static_cast<double>(n) + 0.5) / static_cast<double>(n_worlds);
    out[n] = invert_cdf(x, density, cdf, u * total);
  }
  check_strictly_increasing(out);
  return out;
}

std::vector<double> quantile_sample(const WavefunctionGrid& w, std::size_t n_worlds) {
  const auto x = grid_points(w.grid);
  const auto p = w.density();
  return quantile_sample(x, p, n_worlds);
}

std::vector<double> random_sample(const WavefunctionGrid& w, std::size_t n_worlds,
                                  std::uint64_t seed) {
  if (n_worlds < 1) throw Error(ErrorCode::BadLength, "n_worlds must be >= 1");
  const auto x = grid_points(w.grid);
  const auto p = w.density();
  validate_density(x, p);
  const auto cdf = trapezoid_cdf(x, p);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> out(n_worlds);
  for (auto& v : out) v = invert_cdf(x, p, cdf, uniform(rng) * cdf.back());
  std::sort(out.begin(), out.end());
  return out;
}

TrajectorySet dbb_trajectories(const std::vector<WavefunctionGrid>& snapshots,
                               const std::vector<double>& times, std::span<const double> x0) {
  if (snapshots.size() != times.size() || snapshots.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "snapshots and times must have equal non-zero length");
  }
  check_strictly_increasing(times, ErrorCode::InvalidArgument);
  const GridSpec& g = snapshots.front().grid;
  const double mass = snapshots.front().mass;
  for (const auto& s : snapshots) {
    if (s.grid.n_points != g.n_points || s.grid.x_min != g.x_min || s.grid.x_max != g.x_max ||
        s.psi.size() != g.n_points) {
      throw Error(ErrorCode::ShapeMismatch, "snapshots must share one grid");
    }
  }
  std::vector<std::vector<double>> fields;
  fields.reserve(snapshots.size());
  for (const auto& s : snapshots) fields.push_back(bohmian_velocity_field(s).values);

  const double dx = g.dx();
  const auto sample = [&](const std::vector<double>& f, double x) {
    const double u = (x - g.x_min) / dx;
    const auto j = static_cast<std::ptrdiff_t>(std::floor(u));
    if (!std::isfinite(u) || j < 1 || j + 2 >= static_cast<std::ptrdiff_t>(g.n_points)) {
      throw Error(ErrorCode::LeftGrid, "trajectory left the grid at x = " + std::to_string(x));
    }
    const double s = u - static_cast<double>(j);
    const double fm = f[static_cast<std::size_t>(j - 1)];
    const double f0 = f[static_cast<std::size_t>(j)];
    const double f1 = f[static_cast<std::size_t>(j + 1)];
    const double f2 = f[static_cast<std::size_t>(j + 2)];
    return -s * (s - 1.0) * (s - 2.0) / 6.0 * fm + (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 * f0 -
           (s + 1.0) * s * (s - 2.0) / 2.0 * f1 + (s + 1.0) * s * (s - 1.0) / 6.0 * f2;
  };

  TrajectorySet out;
  out.kind = TrajectorySet::Kind::Bohmian;
  std::vector<double> x(x0.begin(), x0.end());
  const auto record = [&](std::size_t i) {
    out.times.push_back(times[i]);
    out.positions.push_back(x);
    std::vector<double> p(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) p[n] = mass * sample(fields[i], x[n]);
    out.momenta.push_back(std::move(p));
  };
  record(0);
  std::vector<double> mid(fields.front().size());
  for (std::size_t i = 0; i + 1 < snapshots.size(); ++i) {
    const double h = times[i + 1] - times[i];
    const auto& fa = fields[i];
    const auto& fb = fields[i + 1];
    if (snapshots.size() < 3) {
      for (std::size_t j = 0; j < mid.size(); ++j) mid[j] = 0.5 * (fa[j] + fb[j]);
    } else {
      // Quadratic in time through three neighbouring snapshots.
      const std::size_t k = i + 2 < snapshots.size() ? i : i - 1;
      const double t0 = times[k];
      const double t1 = times[k + 1];
      const double t2 = times[k + 2];
      const double tm = times[i] + 0.5 * h;
      const double w0 = (tm - t1) * (tm - t2) / ((t0 - t1) * (t0 - t2));
      const double w1 = (tm - t0) * (tm - t2) / ((t1 - t0) * (t1 - t2));
      const double w2 = (tm - t0) * (tm - t1) / ((t2 - t0) * (t2 - t1));
      const auto& f0 = fields[k];
      const auto& f1 = fields[k + 1];
      const auto& f2 = fields[k + 2];
      for (std::size_t j = 0; j < mid.size(); ++j) mid[j] = w0 * f0[j] + w1 * f1[j] + w2 * f2[j];
    }
    for (auto& xn : x) {
      const double k1 = sample(fa, xn);
      const double k2 = sample(mid, xn + 0.5 * h * k1);
      const double k3 = sample(mid, xn + 0.5 * h * k2);
      const double k4 = sample(fb, xn + h * k3);
      xn += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    record(i + 1);
  }
  return out;
}

}  // namespace miw
