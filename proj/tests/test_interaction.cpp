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
#include <random>

#include "miw/groundstate.hpp"
#include "miw/interaction.hpp"
#include "support.hpp"

using namespace miw;
using miw::testing::max_abs;
using miw::testing::max_abs_diff;
using miw::testing::numeric_gradient;
using miw::testing::random_configuration;

TEST_CASE("three-world potential by hand") {
  // g = (0, 1, 1/2, 0): U = (1/8) [1 + 1/4 + 1/4]
  const std::vector<double> x{0.0, 1.0, 3.0};
  CHECK(interworld_potential(x, 1.0, 1.0) == doctest::Approx(0.1875));
  CHECK(interworld_potential(x, 2.0, 3.0) == doctest::Approx(0.1875 * 9.0 / 2.0));
}

TEST_CASE("two-world potential is hbar^2 / (4 m q^2)") {
  for (double q : {0.1, 1.0, 3.0}) {
    const std::vector<double> x{-0.5 * q, 0.5 * q};
    CHECK(interworld_potential(x, 1.0, 1.0) == doctest::Approx(1.0 / (4.0 * q * q)));
  }
}

TEST_CASE("force is minus the gradient of the potential") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 14);
    const auto x = random_configuration(rng, n);
    const auto r = interworld_force(x, 1.3, 0.7);
    auto fd = numeric_gradient([](std::span<const double> y) { return interworld_potential(y, 1.3, 0.7); },
                               x, 1e-6);
    for (auto& v : fd) v = -v;
    CHECK(max_abs_diff(r, fd) <= 1e-6 * std::max(1e-3, max_abs(r)));
  }
}

TEST_CASE("force with auxiliary worlds is the gradient of the extended potential") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_configuration(rng, 6);
    const AuxiliaryWorlds aux{{x.front() - 3.0, x.front() - 1.5}, {x.back() + 0.8, x.back() + 2.0}};
    const auto r = interworld_force(x, 1.0, 1.0, aux);
    auto fd = numeric_gradient(
        [&](std::span<const double> y) { return interworld_potential(y, 1.0, 1.0, aux); }, x, 1e-6);
    for (auto& v : fd) v = -v;
    CHECK(max_abs_diff(r, fd) <= 1e-6 * std::max(1e-3, max_abs(r)));
  }
}

TEST_CASE("auxiliary worlds must bracket the configuration") {
  const std::vector<double> x{0.0, 1.0, 2.0};
  const AuxiliaryWorlds bad{{-2.0, 0.5}, {3.0, 4.0}};
  CHECK_THROWS_AS(interworld_force(x, 1.0, 1.0, bad), Error);
}

TEST_CASE("interworld forces sum to zero") {
  std::mt19937_64 rng(3);
  const auto x = random_configuration(rng, 12);
  const auto r = interworld_force(x, 1.0, 1.0);
  double sum = 0.0;
  for (double v : r) sum += v;
  CHECK(std::abs(sum) < 1e-10 * max_abs(r));
}

TEST_CASE("nonclassical kinetic energy equals the potential") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_configuration(rng, 9);
    const double m = 0.8;
    const auto pnc = nonclassical_momentum(x, 1.1);
    double kin = 0.0;
    for (double p : pnc) kin += p * p / (2.0 * m);
    CHECK(kin == doctest::Approx(interworld_potential(x, m, 1.1)).epsilon(1e-12));
  }
}

TEST_CASE("lower bound never exceeds the potential") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 30);
    const auto x = random_configuration(rng, n, 0.01, 3.0);
    CHECK(potential_lower_bound(x, 1.0, 1.0) <= interworld_potential(x, 1.0, 1.0) * (1.0 + 1e-12));
    CHECK(heisenberg_product(x, 1.0) >= (1.0 - 1.0 / static_cast<double>(n)) * 0.5 * (1.0 - 1e-12));
  }
}

TEST_CASE("bounds are tight at the oscillator ground state") {
  for (std::size_t n : {2u, 5u, 11u, 40u}) {
    const auto g = exact_oscillator_groundstate(n, 1.0, 1.0, 1.0);
    const double u = interworld_potential(g.positions, 1.0, 1.0);
    CHECK(potential_lower_bound(g.positions, 1.0, 1.0) == doctest::Approx(u).epsilon(1e-10));
    CHECK(heisenberg_product(g.positions, 1.0) ==
          doctest::Approx((1.0 - 1.0 / static_cast<double>(n)) * 0.5).epsilon(1e-10));
    const auto fit = bound_saturation(g.positions);
    CHECK(fit.max_residual < 1e-10);
  }
}

TEST_CASE("step density holds (N-1)/N of the mass") {
  const std::vector<double> x{-2.0, -0.5, 0.0, 1.0, 4.0};
  const auto d = smoothed_density(x);
  CHECK(d.total_mass() == doctest::Approx(4.0 / 5.0));
  CHECK(d.step_values[0] == doctest::Approx(1.0 / (5.0 * 1.5)));
  CHECK(d.step_values[3] == doctest::Approx(1.0 / 5.0));
  CHECK(d(-1.0) == doctest::Approx(1.0 / (5.0 * 1.5)));
  CHECK(d(0.5) == doctest::Approx(1.0 / 5.0));
  CHECK(d(-3.0) == 0.0);
  CHECK(d(5.0) == 0.0);
}

TEST_CASE("linear density mass matches a Riemann sum") {
  const std::vector<double> x{-2.0, -0.5, 0.0, 1.0, 4.0};
  const auto d = smoothed_density(x, DensityEstimate::Interpolation::Linear);
  double sum = 0.0;
  const double h = 1e-4;
  for (double z = -10.0; z < 10.0; z += h) sum += d(z + 0.5 * h) * h;
  CHECK(d.total_mass() == doctest::Approx(sum).epsilon(1e-6));
  CHECK(d(x[2]) == doctest::Approx(d.step_values[2]));
}
