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

#include "miw/ensemble.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace miw {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotStrictlyOrdered: return "NotStrictlyOrdered";
    case ErrorCode::OrderingViolated: return "OrderingViolated";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::LeftGrid: return "LeftGrid";
    case ErrorCode::UnsupportedPotential: return "UnsupportedPotential";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(ErrorCode::NonFinite, std::string(what) + "[" + std::to_string(i) + "]");
    }
  }
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void validate_potential(const PotentialSpec& v) {
  if (const auto* h = std::get_if<HarmonicPotential>(&v)) {
    if (!positive_finite(h->omega)) {
      throw Error(ErrorCode::InvalidArgument, "harmonic omega must be positive");
    }
  } else if (const auto* b = std::get_if<GaussianBarrier>(&v)) {
    if (!positive_finite(b->v0) || !positive_finite(b->width) || !std::isfinite(b->center)) {
      throw Error(ErrorCode::InvalidArgument, "barrier needs v0 > 0, width > 0, finite center");
    }
  }
}

void check_strictly_increasing(std::span<const double> x, ErrorCode code) {
  require_finite(x, "positions");
  for (std::size_t n = 1; n < x.size(); ++n) {
    if (!(x[n] > x[n - 1])) {
      throw Error(code, "x[" + std::to_string(n) + "] <= x[" + std::to_string(n - 1) + "]");
    }
  }
}

WorldEnsemble WorldEnsemble::create(std::vector<double> positions, std::vector<double> momenta,
                                    double mass, double hbar) {
  if (positions.size() != momenta.size()) {
    throw Error(ErrorCode::BadLength, std::to_string(positions.size()) + " positions vs " +
                                          std::to_string(momenta.size()) + " momenta");
  }
  if (positions.size() < 2) {
    throw Error(ErrorCode::BadLength, "at least two worlds are required");
  }
  if (!positive_finite(mass)) throw Error(ErrorCode::InvalidArgument, "mass must be positive");
  if (!std::isfinite(hbar) || hbar < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "hbar must be non-negative");
  }
  require_finite(momenta, "momenta");
  check_strictly_increasing(positions);
  return WorldEnsemble(std::move(positions), std::move(momenta), mass, hbar);
}

WorldEnsemble WorldEnsemble::at_rest(std::vector<double> positions, double mass, double hbar) {
  std::vector<double> p(positions.size(), 0.0);
  return create(std::move(positions), std::move(p), mass, hbar);
}

WorldEnsemble WorldEnsemble::with_state(std::vector<double> positions,
                                        std::vector<double> momenta) const {
  if (positions.size() != size() || momenta.size() != size()) {
    throw Error(ErrorCode::BadLength, "state size differs from ensemble size");
  }
  require_finite(momenta, "momenta");
  check_strictly_increasing(positions, ErrorCode::OrderingViolated);
  return WorldEnsemble(std::move(positions), std::move(momenta), mass_, hbar_);
}

double population_mean(const WorldEnsemble& e, const std::function<double(double, double)>& f) {
  const auto x = e.positions();
  const auto p = e.momenta();
  double sum = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) sum += f(x[n], p[n]);
  return sum / static_cast<double>(x.size());
}

double mean_position(const WorldEnsemble& e) {
  const auto x = e.positions();
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double mean_momentum(const WorldEnsemble& e) {
  const auto p = e.momenta();
  return std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
}

double variance_x(std::span<const double> x) {
  // Centered two-pass sum.
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double sum = 0.0;
  for (double xi : x) sum += (xi - mean) * (xi - mean);
  return sum / n;
}

double variance_x(const WorldEnsemble& e) { return variance_x(e.positions()); }

double covariance_xp(const WorldEnsemble& e) {
  const auto x = e.positions();
  const auto p = e.momenta();
  const double xm = mean_position(e);
  const double pm = mean_momentum(e);
  double sum = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) sum += (x[n] - xm) * (p[n] - pm);
  return sum / static_cast<double>(x.size());
}

}  // namespace miw
