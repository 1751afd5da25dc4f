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

#include "miw/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "miw/error.hpp"
#include "miw/interaction.hpp"

namespace miw {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

WorldEnsemble frame_ensemble(const TrajectorySet& t, std::size_t i, double mass, double hbar) {
  return WorldEnsemble::create(t.positions[i], t.momenta[i], mass, hbar);
}

void require_frames(const TrajectorySet& t) {
  if (t.frames() == 0 || t.positions.size() != t.frames() || t.momenta.size() != t.frames()) {
    throw Error(ErrorCode::ShapeMismatch, "trajectory has no consistent frames");
  }
}

std::array<double, 3> solve3(std::array<std::array<double, 4>, 3> a) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    if (a[col][col] == 0.0) throw Error(ErrorCode::InvalidArgument, "singular least-squares system");
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return {a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]};
}

/// Normalized trapezoid CDF of a piecewise-linear density, evaluated exactly.
class LinearCdf {
 public:
  LinearCdf(std::span<const double> x, std::span<const double> density)
      : x_(x), rho_(density), c_(x.size(), 0.0) {
    for (std::size_t j = 1; j < x.size(); ++j) {
      c_[j] = c_[j - 1] + 0.5 * (rho_[j] + rho_[j - 1]) * (x_[j] - x_[j - 1]);
    }
    total_ = c_.back();
    if (!(total_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "density has zero mass");
  }

  double operator()(double x) const {
    if (x <= x_.front()) return 0.0;
    if (x >= x_.back()) return 1.0;
    const auto j = static_cast<std::size_t>(
        std::distance(x_.begin(), std::upper_bound(x_.begin(), x_.end(), x)) - 1);
    const double h = x_[j + 1] - x_[j];
    const double s = x - x_[j];
    const double slope = (rho_[j + 1] - rho_[j]) / h;
    return (c_[j] + rho_[j] * s + 0.5 * slope * s * s) / total_;
  }

 private:
  std::span<const double> x_;
  std::span<const double> rho_;
  std::vector<double> c_;
  double total_ = 0.0;
};

}  // namespace

QuadraticFit fit_quadratic(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw Error(ErrorCode::ShapeMismatch, "t/y size mismatch");
  if (t.size() < 3) throw Error(ErrorCode::BadLength, "need at least three samples");
  double scale = 0.0;
  for (double v : t) scale = std::max(scale, std::abs(v));
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "time samples are all zero");
  std::array<std::array<double, 4>, 3> a{};
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double s = t[k] / scale;
    const std::array<double, 3> basis{1.0, s, s * s};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a[r][c] += basis[r] * basis[c];
      a[r][3] += basis[r] * y[k];
    }
  }
  const auto b = solve3(a);
  QuadraticFit fit{b[0], b[1] / scale, b[2] / (scale * scale), 0.0};
  double ymax = 0.0;
  double rmax = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    ymax = std::max(ymax, std::abs(y[k]));
    rmax = std::max(rmax, std::abs(fit.c0 + fit.c1 * t[k] + fit.c2 * t[k] * t[k] - y[k]));
  }
  fit.max_residual = ymax > 0.0 ? rmax / ymax : rmax;
  return fit;
}

SpreadingCheck verify_spreading_law(const TrajectorySet& t, double mass, double energy_per_world,
                                    double covariance0, double mean_momentum0) {
  require_frames(t);
  std::vector<double> var(t.frames());
  for (std::size_t i = 0; i < t.frames(); ++i) var[i] = variance_x(t.positions[i]);
  SpreadingCheck out;
  out.fit = fit_quadratic(t.times, var);
  out.expected_c0 = var.front();
  out.expected_c1 = 2.0 / mass * covariance0;
  out.expected_c2 = 2.0 / mass * (energy_per_world - mean_momentum0 * mean_momentum0 / (2.0 * mass));
  const double scale = std::max({std::abs(out.expected_c0), std::abs(out.expected_c1),
                                 std::abs(out.expected_c2)});
  const auto rel = [&](double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), scale);
  };
  out.max_coefficient_error = std::max({rel(out.fit.c0, out.expected_c0),
                                        rel(out.fit.c1, out.expected_c1),
                                        rel(out.fit.c2, out.expected_c2)});
  return out;
}

SpreadingCheck verify_spreading_law(const TrajectorySet& t, double mass, double hbar) {
  require_frames(t);
  const auto e = frame_ensemble(t, 0, mass, hbar);
  const double energy = total_hamiltonian(e, FreePotential{}) / static_cast<double>(e.size());
  return verify_spreading_law(t, mass, energy, covariance_xp(e), mean_momentum(e));
}

double ehrenfest_residual(const TrajectorySet& t, const PotentialSpec& v, double mass) {
  require_frames(t);
  const double x0 = mean_of(t.positions.front());
  const double p0 = mean_of(t.momenta.front());
  const double t0 = t.times.front();
  std::function<double(double)> classical;
  if (std::holds_alternative<FreePotential>(v)) {
    classical = [=](double s) { return x0 + p0 * (s - t0) / mass; };
  } else if (const auto* h = std::get_if<HarmonicPotential>(&v)) {
    const double w = h->omega;
    classical = [=](double s) {
      return x0 * std::cos(w * (s - t0)) + p0 / (mass * w) * std::sin(w * (s - t0));
    };
  } else {
    throw Error(ErrorCode::UnsupportedPotential, "centroid has no closed form for this potential");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < t.frames(); ++i) {
    worst = std::max(worst, std::abs(mean_of(t.positions[i]) - classical(t.times[i])));
  }
  return worst;
}

double two_world_separation_exact(double q0, double t, double mass, double hbar) {
  if (!(q0 > 0.0) || !(mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "q0 and mass must be positive");
  const double r = hbar * t / (mass * q0);
  return std::sqrt(q0 * q0 + r * r);
}

TunnelingPrediction tunneling_prediction(double v0, double q0, double barrier_v0, double mass,
                                         double hbar) {
  if (!(q0 > 0.0) || !(mass > 0.0) || !(barrier_v0 > 0.0) || !(hbar >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "q0, mass and barrier height must be positive");
  }
  TunnelingPrediction p;
  p.boost = hbar / (2.0 * mass * q0);
  p.v_classical = std::sqrt(2.0 * barrier_v0 / mass);
  p.leading_transmits = v0 + p.boost > p.v_classical;
  p.trailing_reflects = v0 - p.boost < p.v_classical;
  return p;
}

TunnelingOutcome simulate_tunneling(double v0, double q0, const GaussianBarrier& barrier,
                                    double mass, double hbar, const TunnelingRunOptions& options) {
  validate_potential(barrier);
  const auto prediction = tunneling_prediction(v0, q0, barrier.v0, mass, hbar);
  if (!(options.asymptotic_ratio >= 1.0) || !(options.dt_scale > 0.0) || options.record_every < 1) {
    throw Error(ErrorCode::InvalidArgument, "bad tunneling run options");
  }
  const double w = barrier.width;
  const double k = options.asymptotic_ratio;
  const double t_sep = hbar > 0.0 ? k * mass * q0 * q0 / hbar : 0.0;
  const double distance = std::max(v0, 0.0) * t_sep + 0.5 * k * q0 + 4.0 * w;
  const double lead = barrier.center - distance;
  const auto start = WorldEnsemble::create(std::vector<double>{lead - q0, lead},
                                           std::vector<double>{mass * v0, mass * v0}, mass, hbar);

  const double speed = std::max({std::abs(v0) + prediction.boost, prediction.v_classical});
  const double rate = std::max({hbar / (mass * q0 * q0), std::sqrt(barrier.v0 / mass) / w,
                                speed / w});
  const double dt = std::sqrt(options.dt_scale) / rate;

  const double left_edge = barrier.center - 3.0 * w;
  const double right_edge = barrier.center + 3.0 * w;
  const auto settled = [&](double x, double p) {
    return (x > right_edge && p > 0.0) || (x < left_edge && p < 0.0);
  };
  EvolveOptions evo;
  evo.dt = dt;
  evo.steps = options.max_steps;
  evo.record_every = options.record_every;
  evo.stop_when = [&](const WorldEnsemble& e, double) {
    return settled(e.positions()[0], e.momenta()[0]) && settled(e.positions()[1], e.momenta()[1]);
  };
  TunnelingOutcome out{prediction, false, false, false, dt, 0.0, 0.0, evolve(start, barrier, evo)};
  const auto& fin = out.run.final_state;
  out.t_end = out.run.trajectory.times.back();
  out.max_energy_drift = out.run.report.max_energy_drift;
  out.resolved = !out.run.report.aborted && settled(fin.positions()[0], fin.momenta()[0]) &&
                 settled(fin.positions()[1], fin.momenta()[1]);
  out.leading_transmitted = fin.positions()[1] > right_edge && fin.momenta()[1] > 0.0;
  out.trailing_transmitted = fin.positions()[0] > right_edge && fin.momenta()[0] > 0.0;
  return out;
}

double zero_point_energy_bound(std::span<const double> x, const PotentialSpec& v, double mass,
                               double hbar) {
  double mean_v = 0.0;
  for (double xi : x) mean_v += potential_energy(v, xi, mass);
  const double n = static_cast<double>(x.size());
  mean_v /= n;
  return mean_v + potential_lower_bound(x, mass, hbar) / n;
}

BoundReport check_bounds(const TrajectorySet& t, const PotentialSpec& v, double mass, double hbar,
                         double tolerance) {
  require_frames(t);
  BoundReport r;
  r.frames = t.frames();
  r.min_energy_margin = std::numeric_limits<double>::infinity();
  r.min_uncertainty_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.frames(); ++i) {
    const auto e = frame_ensemble(t, i, mass, hbar);
    const double n = static_cast<double>(e.size());
    const double energy = total_hamiltonian(e, v) / n;
    const double bound = zero_point_energy_bound(e.positions(), v, mass, hbar);
    const double scale = std::abs(bound) > 0.0 ? std::abs(bound) : 1.0;
    const double margin = (energy - bound) / scale;
    r.min_energy_margin = std::min(r.min_energy_margin, margin);
    if (margin < -tolerance) ++r.energy_violations;
    const double floor = (1.0 - 1.0 / n) * hbar / 2.0;
    if (floor > 0.0) {
      const double u = heisenberg_product(e) / floor - 1.0;
      r.min_uncertainty_margin = std::min(r.min_uncertainty_margin, u);
      if (u < -tolerance) ++r.uncertainty_violations;
    }
  }
  if (!std::isfinite(r.min_uncertainty_margin)) r.min_uncertainty_margin = 0.0;
  return r;
}

double wasserstein1_to_density(std::span<const double> samples, std::span<const double> x,
                               std::span<const double> density) {
  if (samples.empty()) throw Error(ErrorCode::BadLength, "no samples");
  if (x.size() != density.size() || x.size() < 2) {
    throw Error(ErrorCode::ShapeMismatch, "x/density size mismatch");
  }
  check_strictly_increasing(x);
  const LinearCdf cdf(x, density);
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  std::vector<double> points(x.begin(), x.end());
  points.insert(points.end(), s.begin(), s.end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  const double inv_n = 1.0 / static_cast<double>(s.size());
  double total = 0.0;
  std::size_t below = 0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = points[i];
    const double b = points[i + 1];
    while (below < s.size() && s[below] <= a) ++below;
    const double c = static_cast<double>(below) * inv_n;
    const auto g = [&](double z) { return cdf(z) - c; };
    const double ga = g(a);
    const double gb = g(b);
    const auto simpson = [&](double l, double r, double gl, double gr) {
      return std::abs((r - l) / 6.0 * (gl + 4.0 * g(0.5 * (l + r)) + gr));
    };
    if (ga * gb >= 0.0) {
      total += simpson(a, b, ga, gb);
      continue;
    }
    double lo = a;
    double hi = b;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (g(mid) < 0.0) == (ga < 0.0) ? lo = mid : hi = mid;
    }
    total += simpson(a, lo, ga, 0.0) + simpson(lo, b, 0.0, gb);
  }
  return total;
}

double wasserstein1_samples(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw Error(ErrorCode::ShapeMismatch, "sample sizes differ");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) sum += std::abs(sa[i] - sb[i]);
  return sum / static_cast<double>(sa.size());
}

ComparisonReport compare_miw_vs_dbb(const TrajectorySet& miw, const TrajectorySet& dbb,
                                    const std::vector<WavefunctionGrid>& reference) {
  require_frames(miw);
  require_frames(dbb);
  if (miw.frames() != dbb.frames() || miw.frames() != reference.size() ||
      miw.worlds() != dbb.worlds()) {
    throw Error(ErrorCode::ShapeMismatch, "trajectory sets and reference differ in shape");
  }
  ComparisonReport r;
  for (std::size_t i = 0; i < miw.frames(); ++i) {
    const double ta = miw.times[i];
    if (std::abs(ta - dbb.times[i]) > 1e-9 * std::max(1.0, std::abs(ta))) {
      throw Error(ErrorCode::ShapeMismatch, "recorded times differ");
    }
    std::vector<double> a = miw.positions[i];
    std::vector<double> b = dbb.positions[i];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double worst = 0.0;
    double sum = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
      const double d = std::abs(a[n] - b[n]);
      worst = std::max(worst, d);
      sum += d;
    }
    const auto& ref = reference[i];
    std::vector<double> x(ref.grid.n_points);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = ref.grid.x(j);
    const auto p = ref.density();
    r.times.push_back(ta);
    r.per_world_max_deviation.push_back(worst);
    r.mean_abs_deviation.push_back(sum / static_cast<double>(a.size()));
    r.wasserstein_density_distance.push_back(wasserstein1_to_density(a, x, p));
  }
  return r;
}

std::size_t count_separated_maxima(std::span<const double> profile, double depth, double floor) {
  if (profile.empty()) return 0;
  const double top = *std::max_element(profile.begin(), profile.end());
  std::vector<double> v;
  v.reserve(profile.size() + 2);
  v.push_back(0.0);
  for (double p : profile) v.push_back(p < floor * top ? 0.0 : p);
  v.push_back(0.0);

  // Alternating sequence of maxima and minima, starting and ending on a maximum.
  std::vector<double> peaks;
  std::vector<double> dips;
  bool last_was_peak = false;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const bool is_peak = v[i] >= v[i - 1] && v[i] > v[i + 1];
    const bool is_dip = v[i] <= v[i - 1] && v[i] < v[i + 1];
    if (is_peak) {
      if (last_was_peak) {
        peaks.back() = std::max(peaks.back(), v[i]);
      } else {
        peaks.push_back(v[i]);
      }
      last_was_peak = true;
    } else if (is_dip && !peaks.empty()) {
      if (!last_was_peak) {
        dips.back() = std::min(dips.back(), v[i]);
      } else {
        dips.push_back(v[i]);
      }
      last_was_peak = false;
    }
  }
  if (dips.size() == peaks.size() && !dips.empty()) dips.pop_back();

  bool changed = true;
  while (changed && peaks.size() > 1) {
    changed = false;
    for (std::size_t i = 0; i < dips.size(); ++i) {
      if (dips[i] >= depth * std::min(peaks[i], peaks[i + 1])) {
        peaks[i] = std::max(peaks[i], peaks[i + 1]);
        peaks.erase(peaks.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        dips.erase(dips.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return peaks.size();
}

double interference_depth(std::span<const double> profile, std::size_t wanted, double floor) {
  for (int k = 1; k <= 100; ++k) {
    const double depth = 0.01 * k;
    if (count_separated_maxima(profile, depth, floor) >= wanted) return depth;
  }
  return 1.0;
}

std::vector<double> miw_density_profile(std::span<const double> x) {
  const auto est = smoothed_density(x);
  std::vector<double> out;
  out.reserve(est.step_values.size() + 2);
  out.push_back(0.0);
  out.insert(out.end(), est.step_values.begin(), est.step_values.end());
  out.push_back(0.0);
  return out;
}

}  // namespace miw
