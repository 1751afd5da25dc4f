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

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "miw/schrodinger.hpp"
#include "support.hpp"

using namespace miw;

namespace {

double sigma_at(double sigma0, double t, double mass, double hbar) {
  const double r = hbar * t / (2.0 * mass * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + r * r);
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_NOTHROW(validate_grid(GridSpec{-10.0, 10.0, 256}));
  CHECK_THROWS_AS(validate_grid(GridSpec{-10.0, 10.0, 300}), Error);
  CHECK_THROWS_AS(validate_grid(GridSpec{10.0, -10.0, 256}), Error);
}

TEST_CASE("initial states are normalized with the requested moments") {
  const GridSpec g{-20.0, 20.0, 1024};
  const auto single = build_initial_state(SingleGaussian{1.5, 2.0}, g, 1.0, 1.0);
  CHECK(single.norm() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(single.mean_x() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(single.variance_x() == doctest::Approx(2.25).epsilon(1e-12));
  const auto ground = build_initial_state(OscillatorGround{2.0}, g, 0.5, 1.0);
  CHECK(ground.variance_x() == doctest::Approx(1.0 / (2.0 * 0.5 * 2.0)).epsilon(1e-12));
  const auto pair = build_initial_state(GaussianPair{0.5, 8.0}, g, 1.0, 1.0);
  CHECK(pair.mean_x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pair.variance_x() == doctest::Approx(0.25 + 16.0).epsilon(1e-9));
}

TEST_CASE("too narrow a grid is reported") {
  CHECK_THROWS_AS(build_initial_state(SingleGaussian{1.0, 0.0}, GridSpec{-5.0, 5.0, 256}, 1.0, 1.0),
                  Error);
}

TEST_CASE("free Gaussian spreading follows the analytic law") {
  const GridSpec g{-40.0, 40.0, 2048};
  const auto w = build_initial_state(SingleGaussian{1.0, 0.0}, g, 1.0, 1.0);
  SplitStepOptions o;
  o.dt = 1e-2;
  o.steps = 300;
  o.snapshot_every = 100;
  const auto r = split_step_evolve(w, FreePotential{}, o);
  REQUIRE(r.snapshots.size() == 4);
  for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
    const double s = sigma_at(1.0, r.times[i], 1.0, 1.0);
    CHECK(r.snapshots[i].variance_x() == doctest::Approx(s * s).epsilon(1e-10));
  }
  CHECK(r.max_norm_drift < 1e-12);
}

TEST_CASE("oscillator ground state is stationary") {
  const GridSpec g{-16.0, 16.0, 512};
  const auto w = build_initial_state(OscillatorGround{1.0}, g, 1.0, 1.0);
  SplitStepOptions o;
  o.dt = 1e-3;
  o.steps = 2000;
  const auto r = split_step_evolve(w, HarmonicPotential{1.0}, o);
  const auto p0 = w.density();
  const auto p1 = r.final_state.density();
  CHECK(miw::testing::max_abs_diff(p0, p1) < 1e-6 * miw::testing::max_abs(p0));
}

TEST_CASE("the boundary watchdog aborts on wraparound") {
  const GridSpec g{-12.0, 12.0, 256};
  const auto w = build_initial_state(SingleGaussian{1.0, 0.0}, g, 1.0, 1.0);
  SplitStepOptions o;
  o.dt = 0.05;
  o.steps = 400;
  CHECK_THROWS_AS(split_step_evolve(w, FreePotential{}, o), Error);
}

TEST_CASE("plane-wave factor gives a uniform velocity") {
  const GridSpec g{-20.0, 20.0, 512};
  auto w = build_initial_state(SingleGaussian{1.0, 0.0}, g, 2.0, 1.0);
  const double k = 2.0 * std::numbers::pi * 8.0 / 40.0;
  for (std::size_t j = 0; j < w.size(); ++j) w.psi[j] *= std::polar(1.0, k * g.x(j));
  const auto v = bohmian_velocity_field(w);
  std::size_t checked = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (v.valid[j] && std::abs(g.x(j)) < 5.0) {
      CHECK(v.values[j] == doctest::Approx(k / 2.0).epsilon(1e-9));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("quantum potential and force of a Gaussian") {
  const double s = 1.2;
  const double m = 0.8;
  const GridSpec g{-20.0, 20.0, 1024};
  const auto w = build_initial_state(SingleGaussian{s, 0.0}, g, m, 1.0);
  const auto q = quantum_potential(w);
  const auto r = bohmian_force(w);
  const auto r2 = bohmian_force_density_form(w);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double x = g.x(j);
    if (std::abs(x) > 4.0 * s) continue;
    REQUIRE(q.valid[j]);
    const double q_exact = -(1.0 / (2.0 * m)) * (x * x / (4.0 * std::pow(s, 4)) - 1.0 / (2.0 * s * s));
    const double r_exact = x / (4.0 * m * std::pow(s, 4));
    CHECK(q.values[j] == doctest::Approx(q_exact).epsilon(1e-8));
    CHECK(std::abs(r.values[j] - r_exact) < 1e-8);
    CHECK(std::abs(r2.values[j] - r_exact) < 1e-6 * std::max(1.0, std::abs(r_exact)));
  }
}

TEST_CASE("quantiles of a uniform density") {
  const std::vector<double> x{0.0, 0.5, 1.0};
  const std::vector<double> p{1.0, 1.0, 1.0};
  const auto q = quantile_sample(x, p, 4);
  for (std::size_t n = 0; n < 4; ++n) CHECK(q[n] == doctest::Approx((n + 0.5) / 4.0).epsilon(1e-14));
}

TEST_CASE("quantiles of a linear ramp invert the quadratic CDF exactly") {
  const std::vector<double> x{0.0, 1.0};
  const std::vector<double> p{0.0, 2.0};
  const auto q = quantile_sample(x, p, 5);
  for (std::size_t n = 0; n < 5; ++n) {
    CHECK(q[n] == doctest::Approx(std::sqrt((n + 0.5) / 5.0)).epsilon(1e-14));
  }
}

TEST_CASE("quantile sampling rejects bad densities") {
  const std::vector<double> x{0.0, 1.0};
  CHECK_THROWS_AS(quantile_sample(x, std::vector<double>{0.0, 0.0}, 3), Error);
  CHECK_THROWS_AS(quantile_sample(x, std::vector<double>{-1.0, 1.0}, 3), Error);
  CHECK_THROWS_AS(quantile_sample(x, std::vector<double>{1.0}, 3), Error);
}

TEST_CASE("random sampling is reproducible and sorted") {
  const GridSpec g{-20.0, 20.0, 512};
  const auto w = build_initial_state(SingleGaussian{1.0, 0.0}, g, 1.0, 1.0);
  const auto a = random_sample(w, 200, 42);
  const auto b = random_sample(w, 200, 42);
  const auto c = random_sample(w, 200, 43);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(std::is_sorted(a.begin(), a.end()));
  double mean = 0.0;
  for (double v : a) mean += v;
  CHECK(std::abs(mean / 200.0) < 0.3);
}

TEST_CASE("Bohmian trajectories of a free Gaussian scale with its width") {
  const GridSpec g{-40.0, 40.0, 1024};
  const auto w = build_initial_state(SingleGaussian{1.0, 0.0}, g, 1.0, 1.0);
  SplitStepOptions o;
  o.dt = 1e-2;
  o.steps = 200;
  o.snapshot_every = 2;
  const auto r = split_step_evolve(w, FreePotential{}, o);
  const std::vector<double> x0{-2.0, -0.7, 0.1, 1.3, 2.5};
  const auto t = dbb_trajectories(r.snapshots, r.times, x0);
  CHECK(t.kind == TrajectorySet::Kind::Bohmian);
  REQUIRE(t.frames() == r.snapshots.size());
  for (std::size_t i = 0; i < t.frames(); ++i) {
    const double scale = sigma_at(1.0, t.times[i], 1.0, 1.0);
    for (std::size_t n = 0; n < x0.size(); ++n) {
      CHECK(std::abs(t.positions[i][n] - x0[n] * scale) < 1e-6);
    }
  }
}

TEST_CASE("trajectories leaving the grid are reported") {
  const GridSpec g{-10.0, 10.0, 256};
  const auto w = build_initial_state(SingleGaussian{0.5, 0.0}, g, 1.0, 1.0);
  std::vector<WavefunctionGrid> snaps{w, w};
  CHECK_THROWS_AS(dbb_trajectories(snaps, {0.0, 1.0}, std::vector<double>{9.99}), Error);
}
