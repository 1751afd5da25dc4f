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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "miw/analysis.hpp"
#include "miw/dynamics.hpp"
#include "miw/error.hpp"
#include "miw/groundstate.hpp"
#include "miw/interaction.hpp"
#include "miw/scenario.hpp"
#include "miw/schrodinger.hpp"
#include "support.hpp"

using namespace miw;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "!") + what);
  }
};

fs::path scratch_root() {
  static const fs::path root = [] {
    const auto dir = fs::temp_directory_path() / "miw_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
  }();
  return root;
}

struct ScenarioRun {
  int exit_code = 0;
  json summary;
  fs::path dir;
};

ScenarioRun run_scenario(Command command, KeyValues kv, const std::string& tag) {
  const auto dir = scratch_root() / tag;
  fs::remove_all(dir);
  kv["output_dir"] = dir.string();
  const auto config = make_config(command, kv);
  const auto r = run(config);
  return {r.exit_code, r.summary.empty() ? json::object() : json::parse(r.summary), dir};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Every frame of every MIW trajectory produced here goes through the bound
/// checks of criterion 6.
struct BoundLedger {
  std::size_t frames = 0;
  std::size_t violations = 0;

  void add(const TrajectorySet& t, const PotentialSpec& v, double mass, double hbar) {
    const auto b = check_bounds(t, v, mass, hbar);
    frames += b.frames;
    violations += b.energy_violations + b.uncertainty_violations;
  }
  void add(const json& summary) {
    if (!summary.contains("checks") || !summary["checks"].contains("bounds")) return;
    const auto& b = summary["checks"]["bounds"];
    frames += b["frames"].get<std::size_t>();
    violations += b["energy_violations"].get<std::size_t>() +
                  b["uncertainty_violations"].get<std::size_t>();
  }
};

BoundLedger g_bounds;

// ---------------------------------------------------------------------------

Outcome exact_groundstate() {
  Outcome out;
  const auto t0 = Clock::now();
  const auto g3 = exact_oscillator_groundstate(3, 1.0, 1.0, 1.0);
  const double e3 = std::max({std::abs(g3.xi[0] + 1.0), std::abs(g3.xi[1]), std::abs(g3.xi[2] - 1.0)});
  out.require(e3 < 1e-12, "N=3 xi error " + fmt("%.2e", e3));

  const auto g4 = exact_oscillator_groundstate(4, 1.0, 1.0, 1.0);
  const double xi1 = -std::sqrt(7.0 + std::sqrt(17.0)) / (2.0 * std::sqrt(2.0));
  const double e4 = std::abs(g4.xi[0] - xi1);
  out.require(e4 < 1e-12, "N=4 xi1 error " + fmt("%.2e", e4));

  double worst = 0.0;
  for (std::size_t n = 2; n <= 64; ++n) {
    const auto g = exact_oscillator_groundstate(n, 1.0, 1.0, 1.0);
    const double want = (1.0 - 1.0 / static_cast<double>(n)) * 0.5;
    worst = std::max(worst, std::abs(g.energy_per_world - want));
  }
  out.require(worst < 1e-12, "N=2..64 energy error " + fmt("%.2e", worst));
  const double elapsed = seconds_since(t0);
  out.require(elapsed < 1.0, "runtime " + fmt("%.3f", elapsed) + " s");

  const auto cli = run_scenario(Command::GroundExact, {{"n", "11"}, {"omega", "1"}}, "ground_exact");
  const double e11 = cli.summary["metrics"]["energy_per_world"].get<double>();
  out.require(cli.exit_code == 0 && std::abs(e11 - 5.0 / 11.0) < 1e-12,
              "groundstate-exact N=11 " + fmt("%.16f", e11));
  g_bounds.add(cli.summary);
  return out;
}

Outcome relaxation() {
  Outcome out;
  const auto t0 = Clock::now();
  const auto r = run_scenario(Command::GroundRelax, {{"n", "11"}, {"omega", "1"}, {"dt", "0.05"}},
                              "ground_relax");
  const double elapsed = seconds_since(t0);
  const auto& m = r.summary["metrics"];
  const double rel = r.summary["checks"]["energy"]["relative_error"].get<double>();
  out.require(r.exit_code == 0 && r.summary["checks"]["converged"]["pass"].get<bool>(),
              "converged after " + std::to_string(m["iterations"].get<std::size_t>()) + " steps");
  out.require(rel < 1e-9, "relative energy error " + fmt("%.2e", rel));
  out.require(elapsed < 60.0, "runtime " + fmt("%.2f", elapsed) + " s");
  g_bounds.add(r.summary);
  return out;
}

Outcome ehrenfest() {
  Outcome out;
  const double dt = 1e-3;
  const auto steps = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / dt));
  for (std::size_t n : {2u, 11u, 41u}) {
    auto x = exact_oscillator_groundstate(n, 1.0, 1.0, 1.0).positions;
    for (auto& v : x) v += 1.0;
    const auto e = WorldEnsemble::create(x, std::vector<double>(n, 0.5), 1.0, 1.0);
    const PotentialSpec v = HarmonicPotential{1.0};
    const auto r = evolve(e, v, dt, steps, 10);
    const double res = ehrenfest_residual(r.trajectory, v, 1.0);
    out.require(!r.report.aborted && res < 1e-6,
                "N=" + std::to_string(n) + " centroid deviation " + fmt("%.2e", res));
    g_bounds.add(r.trajectory, v, 1.0, 1.0);
  }
  return out;
}

Outcome spreading() {
  Outcome out;
  const PotentialSpec free = FreePotential{};
  {
    const double q0 = 1.0;
    const auto e = WorldEnsemble::at_rest({-0.5 * q0, 0.5 * q0}, 1.0, 1.0);
    const auto r = evolve(e, free, 1e-3, 10000, 10);
    const auto s = verify_spreading_law(r.trajectory, 1.0, 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < r.trajectory.frames(); ++i) {
      const auto& x = r.trajectory.positions[i];
      const double q = two_world_separation_exact(q0, r.trajectory.times[i], 1.0, 1.0);
      worst = std::max(worst, std::abs((x[1] - x[0]) - q) / q);
    }
    out.require(s.max_coefficient_error < 1e-6,
                "N=2 coefficient error " + fmt("%.2e", s.max_coefficient_error));
    out.require(worst < 1e-6, "N=2 separation error " + fmt("%.2e", worst));
    g_bounds.add(r.trajectory, free, 1.0, 1.0);
  }
  {
    const GridSpec g{-32.0, 32.0, 2048};
    const auto w = build_initial_state(SingleGaussian{1.0, 0.0}, g, 1.0, 1.0);
    const auto x = quantile_sample(w, 41);
    std::vector<double> p(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) p[k] = 0.3 + 0.1 * x[k];
    const auto e = WorldEnsemble::create(x, p, 1.0, 1.0);
    const auto r = evolve(e, free, 1e-4, 30000, 100);
    const auto s = verify_spreading_law(r.trajectory, 1.0, 1.0);
    out.require(!r.report.aborted && s.max_coefficient_error < 1e-6,
                "N=41 coefficient error " + fmt("%.2e", s.max_coefficient_error));
    g_bounds.add(r.trajectory, free, 1.0, 1.0);
  }
  return out;
}

Outcome tunneling() {
  Outcome out;
  const GaussianBarrier barrier{10.0, 1.0, 0.0};
  const double vc = std::sqrt(2.0 * barrier.v0);
  const std::vector<double> q0s{0.06, 0.1, 0.2, 0.5, 2.0};
  const std::vector<double> v0s{0.0, 1.5, 3.0, 6.5, 9.0};
  std::size_t cases = 0;
  std::size_t matched = 0;
  std::size_t classes[3] = {0, 0, 0};
  double worst_drift = 0.0;
  double min_margin = 1e300;
  TunnelingRunOptions opts;
  opts.record_every = 100;
  for (double q0 : q0s) {
    for (double v0 : v0s) {
      const auto r = simulate_tunneling(v0, q0, barrier, 1.0, 1.0, opts);
      const auto& p = r.prediction;
      min_margin = std::min({min_margin, std::abs(v0 + p.boost - vc) / vc,
                             std::abs(v0 - p.boost - vc) / vc});
      ++cases;
      const bool ok = r.resolved && r.leading_transmitted == p.leading_transmits &&
                      r.trailing_transmitted != p.trailing_reflects;
      if (ok) ++matched;
      ++classes[static_cast<int>(p.leading_transmits) + static_cast<int>(!p.trailing_reflects)];
      worst_drift = std::max(worst_drift, r.max_energy_drift);
      g_bounds.add(r.run.trajectory, barrier, 1.0, 1.0);
    }
  }
  out.require(min_margin >= 0.1, "smallest threshold margin " + fmt("%.3f", min_margin));
  out.require(matched == cases,
              std::to_string(matched) + "/" + std::to_string(cases) + " outcomes match");
  out.require(classes[0] > 0 && classes[1] > 0 && classes[2] > 0,
              "outcome classes " + std::to_string(classes[0]) + "/" + std::to_string(classes[1]) +
                  "/" + std::to_string(classes[2]));
  out.require(worst_drift < 1e-8, "max energy drift " + fmt("%.2e", worst_drift));
  return out;
}

Outcome forces() {
  Outcome out;
  std::mt19937_64 rng(20260101);
  std::uniform_int_distribution<std::size_t> size(3, 16);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = size(rng);
    const auto x = miw::testing::random_configuration(rng, n);
    const auto f = interworld_force(x, 1.0, 1.0);
    const auto grad = miw::testing::numeric_gradient(
        [](std::span<const double> y) { return interworld_potential(y, 1.0, 1.0); }, x, 1e-6);
    double scale = 0.0;
    double err = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      scale = std::max(scale, std::abs(grad[k]));
      err = std::max(err, std::abs(f[k] + grad[k]));
    }
    worst = std::max(worst, err / scale);
  }
  out.require(worst < 1e-6, "finite-difference relative error " + fmt("%.2e", worst));

  const GridSpec g{-20.0, 20.0, 1024};
  const std::vector<std::pair<std::string, InitialStateSpec>> states{
      {"Gaussian", SingleGaussian{1.0, 0.0}}, {"double Gaussian", GaussianPair{1.0, 4.0}}};
  for (const auto& [name, spec] : states) {
    const auto w = build_initial_state(spec, g, 1.0, 1.0);
    const auto a = bohmian_force(w);
    const auto b = bohmian_force_density_form(w);
    const auto p = w.density();
    const double peak = *std::max_element(p.begin(), p.end());
    double scale = 0.0;
    double err = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (p[j] < 1e-3 * peak || !a.valid[j] || !b.valid[j]) continue;
      scale = std::max(scale, std::abs(a.values[j]));
      err = std::max(err, std::abs(a.values[j] - b.values[j]));
    }
    out.require(err / scale < 1e-6, name + " dual-form relative error " + fmt("%.2e", err / scale));
  }
  return out;
}

Outcome reference_solver() {
  Outcome out;
  double drift = 0.0;
  {
    const GridSpec g{-16.0, 16.0, 512};
    const auto w = build_initial_state(OscillatorGround{1.0}, g, 1.0, 1.0);
    SplitStepOptions o;
    o.dt = 1e-3;
    o.steps = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / o.dt));
    o.snapshot_every = 100;
    const auto r = split_step_evolve(w, HarmonicPotential{1.0}, o);
    const auto p0 = w.density();
    const double peak = miw::testing::max_abs(p0);
    double worst = 0.0;
    for (const auto& s : r.snapshots) worst = std::max(worst, miw::testing::max_abs_diff(s.density(), p0));
    out.require(worst / peak < 1e-6, "oscillator density change " + fmt("%.2e", worst / peak));
    drift = std::max(drift, r.max_norm_drift);
  }
  {
    const GridSpec g{-40.0, 40.0, 2048};
    const auto w = build_initial_state(SingleGaussian{1.0, 0.0}, g, 1.0, 1.0);
    SplitStepOptions o;
    o.dt = 1e-3;
    o.steps = 3000;
    o.snapshot_every = 100;
    const auto r = split_step_evolve(w, FreePotential{}, o);
    double worst = 0.0;
    for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
      const double s2 = 1.0 + std::pow(r.times[i] / 2.0, 2);
      worst = std::max(worst, std::abs(r.snapshots[i].variance_x() - s2) / s2);
    }
    out.require(worst < 1e-6, "free variance relative error " + fmt("%.2e", worst));
    drift = std::max(drift, r.max_norm_drift);
  }
  const auto ds = run_scenario(Command::ReferenceEvolve, {{"scenario", "double-slit"}}, "reference");
  const auto& eq = ds.summary["checks"]["equivariance"];
  drift = std::max(drift, ds.summary["metrics"]["max_norm_drift"].get<double>());
  out.require(drift < 1e-8, "max norm drift " + fmt("%.2e", drift));
  const double w1 = eq["max_wasserstein1"].get<double>();
  out.require(ds.exit_code == 0 && w1 < 0.05 * eq["sigma"].get<double>(),
              "double-slit equivariance W1 " + fmt("%.2e", w1));
  return out;
}

Outcome double_slit() {
  Outcome out;
  struct Level {
    const char* dt;
    const char* snapshot_every;
    const char* record_every;
  };
  const std::vector<Level> levels{{"2e-4", "5", "500"}, {"1e-4", "10", "1000"}, {"5e-5", "20", "2000"}};
  std::vector<double> dev;
  std::vector<double> w1;
  json interference;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto r = run_scenario(Command::Compare,
                                {{"scenario", "double-slit"},
                                 {"n", "41"},
                                 {"sigma", "1"},
                                 {"separation", "4"},
                                 {"dt", levels[i].dt},
                                 {"snapshot_every", levels[i].snapshot_every},
                                 {"record_every", levels[i].record_every}},
                                "double_slit_" + std::to_string(i));
    if (r.exit_code != 0) {
      out.require(false, std::string("compare run at dt=") + levels[i].dt + " exited " +
                             std::to_string(r.exit_code));
      return out;
    }
    const auto& m = r.summary["metrics"];
    dev.push_back(m["final_per_world_max_deviation"].get<double>());
    w1.push_back(m["final_wasserstein_density"].get<double>());
    g_bounds.add(r.summary);
    if (std::string(levels[i].dt) == "1e-4") interference = m["interference"];
  }
  const auto maxima = interference["maxima_at_half_depth"].get<std::size_t>();
  out.require(maxima >= 3, "maxima at depth 0.5: " + std::to_string(maxima) +
                               " (three maxima first at depth " +
                               fmt("%.2f", interference["depth_for_three_maxima"].get<double>()) + ")");
  const bool finite = std::all_of(dev.begin(), dev.end(), [](double v) { return std::isfinite(v); }) &&
                      std::all_of(w1.begin(), w1.end(), [](double v) { return std::isfinite(v); });
  out.require(finite, "metrics finite");
  const auto cauchy = [](const std::vector<double>& v) {
    return std::abs(v[2] - v[1]) < std::abs(v[1] - v[0]);
  };
  out.require(cauchy(dev), "max deviation " + fmt("%.6e", dev[0]) + " " + fmt("%.6e", dev[1]) + " " +
                               fmt("%.6e", dev[2]));
  out.require(cauchy(w1), "W1 " + fmt("%.6e", w1[0]) + " " + fmt("%.6e", w1[1]) + " " +
                              fmt("%.6e", w1[2]));
  return out;
}

Outcome bounds() {
  Outcome out;
  out.require(g_bounds.violations == 0, std::to_string(g_bounds.violations) + " violations over " +
                                            std::to_string(g_bounds.frames) + " frames");
  double worst_energy = 0.0;
  double worst_product = 0.0;
  for (std::size_t n = 2; n <= 64; ++n) {
    const auto g = exact_oscillator_groundstate(n, 1.0, 1.0, 1.0);
    const PotentialSpec v = HarmonicPotential{1.0};
    const double bound = zero_point_energy_bound(g.positions, v, 1.0, 1.0);
    worst_energy = std::max(worst_energy, std::abs(g.energy_per_world - bound) / bound);
    const double floor = (1.0 - 1.0 / static_cast<double>(n)) * 0.5;
    worst_product = std::max(worst_product, std::abs(heisenberg_product(g.positions, 1.0) - floor) / floor);
  }
  out.require(worst_energy < 1e-9, "energy bound saturation " + fmt("%.2e", worst_energy));
  out.require(worst_product < 1e-9, "uncertainty bound saturation " + fmt("%.2e", worst_product));
  return out;
}

Outcome determinism() {
  Outcome out;
  struct Case {
    Command command;
    KeyValues kv;
    const char* tag;
  };
  const std::vector<Case> cases{
      {Command::GroundExact, {{"n", "11"}}, "exact"},
      {Command::GroundRelax, {{"n", "11"}}, "relax"},
      {Command::Evolve, {{"scenario", "double-slit"}}, "evolve"},
      {Command::Evolve, {{"scenario", "free-pair"}, {"format", "json"}}, "evolve_json"},
      {Command::Tunnel, {{"v0", "0"}, {"q0", "0.1"}, {"barrier_v0", "10"}}, "tunnel"},
      {Command::ReferenceEvolve, {{"scenario", "oscillator"}}, "reference"},
      {Command::ReferenceEvolve,
       {{"scenario", "double-slit"}, {"sample", "random"}, {"seed", "7"}, {"t_final", "0.5"}},
       "reference_random"},
      {Command::Compare, {{"scenario", "double-slit"}, {"t_final", "0.5"}}, "compare"},
  };
  for (const auto& c : cases) {
    const auto a = run_scenario(c.command, c.kv, std::string("det_a_") + c.tag);
    const auto b = run_scenario(c.command, c.kv, std::string("det_b_") + c.tag);
    g_bounds.add(a.summary);
    std::size_t files = 0;
    bool same = a.exit_code == b.exit_code;
    for (const auto& entry : fs::directory_iterator(a.dir)) {
      const auto other = b.dir / entry.path().filename();
      ++files;
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) same = false;
    }
    out.require(same && files >= 3, std::string(c.tag) + " " + std::to_string(files) + " files");
  }
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> body;
  };
  // Bounds run after the scenarios whose frames they audit.
  const std::vector<Criterion> criteria{
      {1, "exact ground state", exact_groundstate},
      {2, "relaxation", relaxation},
      {3, "Ehrenfest centroid", ehrenfest},
      {4, "spreading law", spreading},
      {5, "tunneling thresholds", tunneling},
      {7, "forces", forces},
      {8, "reference solver", reference_solver},
      {9, "double-slit", double_slit},
      {10, "determinism", determinism},
      {6, "zero-point and uncertainty bounds", bounds},
  };
  std::vector<std::pair<int, std::string>> lines;
  bool all = true;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    all = all && o.pass;
    std::string line = std::string(o.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(c.id) +
                       ": " + c.name + " [";
    for (std::size_t i = 0; i < o.notes.size(); ++i) line += (i ? "; " : "") + o.notes[i];
    line += "] (" + fmt("%.1f", seconds_since(t0)) + " s)";
    lines.emplace_back(c.id, line);
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  return all ? 0 : 1;
}
