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

#include "miw/interaction.hpp"

#include <algorithm>
#include <cmath>

namespace miw {

namespace {

/// Reciprocal spacings g_k = 1/(x_{k+1} - x_k) for k = -1 .. N+1, stored at
/// index k + 1. Entries that reference a missing world are zero.
std::vector<double> reciprocal_spacings(std::span<const double> x,
                                        const std::optional<AuxiliaryWorlds>& aux) {
  const std::size_t n = x.size();
  std::vector<double> g(n + 3, 0.0);
  for (std::size_t k = 1; k < n; ++k) g[k + 1] = 1.0 / (x[k] - x[k - 1]);
  if (aux) {
    g[0] = 1.0 / (aux->left[1] - aux->left[0]);
    g[1] = 1.0 / (x.front() - aux->left[1]);
    g[n + 1] = 1.0 / (aux->right[0] - x.back());
    g[n + 2] = 1.0 / (aux->right[1] - aux->right[0]);
  }
  return g;
}

void check_aux(std::span<const double> x, const AuxiliaryWorlds& aux) {
  if (!(aux.left[0] < aux.left[1] && aux.left[1] < x.front() && x.back() < aux.right[0] &&
        aux.right[0] < aux.right[1])) {
    throw Error(ErrorCode::NotStrictlyOrdered, "auxiliary worlds must bracket the configuration");
  }
}

}  // namespace

double interworld_potential(std::span<const double> x, double mass, double hbar) {
  check_strictly_increasing(x);
  const auto g = reciprocal_spacings(x, std::nullopt);
  double sum = 0.0;
  for (std::size_t k = 1; k <= x.size(); ++k) {
    const double d = g[k + 1] - g[k];
    sum += d * d;
  }
  return hbar * hbar / (8.0 * mass) * sum;
}

double interworld_potential(const WorldEnsemble& e) {
  return interworld_potential(e.positions(), e.mass(), e.hbar());
}

double interworld_potential(std::span<const double> x, double mass, double hbar,
                            const AuxiliaryWorlds& aux) {
  check_strictly_increasing(x);
  check_aux(x, aux);
  const auto g = reciprocal_spacings(x, aux);
  double sum = 0.0;
  for (std::size_t k = 0; k <= x.size() + 1; ++k) {
    const double d = g[k + 1] - g[k];
    sum += d * d;
  }
  return hbar * hbar / (8.0 * mass) * sum;
}

std::vector<double> interworld_force(std::span<const double> x, double mass, double hbar,
                                     const std::optional<AuxiliaryWorlds>& aux) {
  check_strictly_increasing(x);
  if (aux) check_aux(x, *aux);
  const std::size_t n = x.size();
  const auto g = reciprocal_spacings(x, aux);
  // sigma_k = g_{k-1}^2 (g_k - 2 g_{k-1} + g_{k-2}) for k = 1 .. N+1.
  std::vector<double> sigma(n + 2, 0.0);
  for (std::size_t k = 1; k <= n + 1; ++k) {
    const double gm1 = g[k];
    sigma[k] = gm1 * gm1 * (g[k + 1] - 2.0 * gm1 + g[k - 1]);
  }
  const double c = hbar * hbar / (4.0 * mass);
  std::vector<double> r(n);
  for (std::size_t k = 1; k <= n; ++k) r[k - 1] = c * (sigma[k + 1] - sigma[k]);
  return r;
}

std::vector<double> interworld_force(const WorldEnsemble& e) {
  return interworld_force(e.positions(), e.mass(), e.hbar());
}

std::vector<double> nonclassical_momentum(std::span<const double> x, double hbar) {
  check_strictly_increasing(x);
  const auto g = reciprocal_spacings(x, std::nullopt);
  std::vector<double> p(x.size());
  for (std::size_t k = 1; k <= x.size(); ++k) p[k - 1] = 0.5 * hbar * (g[k + 1] - g[k]);
  return p;
}

std::vector<double> nonclassical_momentum(const WorldEnsemble& e) {
  return nonclassical_momentum(e.positions(), e.hbar());
}

double potential_lower_bound(std::span<const double> x, double mass, double hbar) {
  const double n = static_cast<double>(x.size());
  return (n - 1.0) * (n - 1.0) / n * hbar * hbar / (8.0 * mass) / variance_x(x);
}

double potential_lower_bound(const WorldEnsemble& e) {
  return potential_lower_bound(e.positions(), e.mass(), e.hbar());
}

double heisenberg_product(std::span<const double> x, double hbar) {
  const auto p = nonclassical_momentum(x, hbar);
  double sq = 0.0;
  for (double v : p) sq += v * v;
  return std::sqrt(variance_x(x)) * std::sqrt(sq / static_cast<double>(p.size()));
}

double heisenberg_product(const WorldEnsemble& e) { return heisenberg_product(e.positions(), e.hbar()); }

SaturationFit bound_saturation(std::span<const double> x) {
  check_strictly_increasing(x);
  const std::size_t n = x.size();
  const auto g = reciprocal_spacings(x, std::nullopt);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double fh = 0.0;
  double hh = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double h = g[k + 1] - g[k];
    fh += (x[k - 1] - mean) * h;
    hh += h * h;
  }
  SaturationFit fit;
  fit.alpha = fh / hh;
  for (std::size_t k = 1; k <= n; ++k) {
    const double h = g[k + 1] - g[k];
    fit.max_residual = std::max(fit.max_residual, std::abs(x[k - 1] - mean - fit.alpha * h));
  }
  return fit;
}

double DensityEstimate::operator()(double x) const {
  const auto& s = support_points;
  const std::size_t n = s.size();
  if (n < 2) return 0.0;
  if (interpolation == Interpolation::Step) {
    if (x <= s.front() || x > s.back()) return 0.0;
    // First support point with s[k] >= x; x lies in (s[k-1], s[k]].
    const auto k = static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), x) - s.begin());
    return step_values[k];
  }
  const double pad = (s.back() - s.front()) / static_cast<double>(n - 1);
  if (x <= s.front() - pad || x >= s.back() + pad) return 0.0;
  if (x < s.front()) return step_values.front() * (x - (s.front() - pad)) / pad;
  if (x > s.back()) return step_values.back() * ((s.back() + pad) - x) / pad;
  const auto k = static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), x) - s.begin());
  if (k == 0) return step_values.front();
  const double w = (x - s[k - 1]) / (s[k] - s[k - 1]);
  return (1.0 - w) * step_values[k - 1] + w * step_values[k];
}

double DensityEstimate::total_mass() const {
  const auto& s = support_points;
  const std::size_t n = s.size();
  if (n < 2) return 0.0;
  double mass = 0.0;
  if (interpolation == Interpolation::Step) {
    for (std::size_t k = 1; k < n; ++k) mass += step_values[k] * (s[k] - s[k - 1]);
    return mass;
  }
  const double pad = (s.back() - s.front()) / static_cast<double>(n - 1);
  mass += 0.5 * pad * (step_values.front() + step_values.back());
  for (std::size_t k = 1; k < n; ++k) {
    mass += 0.5 * (step_values[k] + step_values[k - 1]) * (s[k] - s[k - 1]);
  }
  return mass;
}

DensityEstimate smoothed_density(std::span<const double> x,
                                 DensityEstimate::Interpolation interpolation) {
  check_strictly_increasing(x);
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorCode::BadLength, "density estimate needs two worlds");
  DensityEstimate d;
  d.interpolation = interpolation;
  d.support_points.assign(x.begin(), x.end());
  d.step_values.resize(n);
  const double nn = static_cast<double>(n);
  for (std::size_t k = 1; k < n; ++k) d.step_values[k] = 1.0 / (nn * (x[k] - x[k - 1]));
  d.step_values[0] = 1.0 / (nn * (x[1] - x[0]));
  return d;
}

DensityEstimate smoothed_density(const WorldEnsemble& e,
                                 DensityEstimate::Interpolation interpolation) {
  return smoothed_density(e.positions(), interpolation);
}

}  // namespace miw
