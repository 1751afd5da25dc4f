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

#include "miw/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "miw/analysis.hpp"
#include "miw/error.hpp"
#include "miw/groundstate.hpp"
#include "miw/interaction.hpp"

namespace miw {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kCheckTolerance = 1e-6;

// ---------------------------------------------------------------------------
// Key-value parsing

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string snake(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorCode::ConfigError, key + ": expected a finite number, got '" + text + "'");
  }
  return v;
}

std::size_t parse_size(const std::string& key, const std::string& text) {
  std::size_t v = 0;
  const auto* first = text.data();
  const auto* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::ConfigError, key + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* first = text.data();
  const auto* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::ConfigError, key + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> out;
  std::string item;
  while (in >> item) out.push_back(parse_double(key, item));
  return out;
}

// ---------------------------------------------------------------------------
// Field table

struct Field {
  std::string name;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<json(const ScenarioConfig&)> get;
};

template <class T>
Field number(std::string name, T ScenarioConfig::*member) {
  return {name,
          [name, member](ScenarioConfig& c, const std::string& v) {
            if constexpr (std::is_same_v<T, double>) {
              c.*member = parse_double(name, v);
            } else if constexpr (std::is_same_v<T, std::uint64_t>) {
              c.*member = parse_u64(name, v);
            } else {
              c.*member = parse_size(name, v);
            }
          },
          [member](const ScenarioConfig& c) { return json(c.*member); }};
}

Field optional_number(std::string name, std::optional<double> ScenarioConfig::*member) {
  return {name,
          [name, member](ScenarioConfig& c, const std::string& v) {
            c.*member = parse_double(name, v);
          },
          [member](const ScenarioConfig& c) {
            return (c.*member).has_value() ? json(*(c.*member)) : json(nullptr);
          }};
}

Field text(std::string name, std::string ScenarioConfig::*member) {
  return {name, [member](ScenarioConfig& c, const std::string& v) { c.*member = v; },
          [member](const ScenarioConfig& c) { return json(c.*member); }};
}

Field list(std::string name, std::vector<double> ScenarioConfig::*member) {
  return {name,
          [name, member](ScenarioConfig& c, const std::string& v) {
            c.*member = parse_list(name, v);
          },
          [member](const ScenarioConfig& c) { return json(c.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(text("scenario", &ScenarioConfig::scenario));
    f.push_back(number("n", &ScenarioConfig::n));
    f.push_back(number("mass", &ScenarioConfig::mass));
    f.push_back(number("hbar", &ScenarioConfig::hbar));
    f.push_back(text("potential", &ScenarioConfig::potential));
    f.push_back(number("omega", &ScenarioConfig::omega));
    f.push_back(optional_number("barrier_v0", &ScenarioConfig::barrier_v0));
    f.push_back(optional_number("barrier_width", &ScenarioConfig::barrier_width));
    f.push_back(optional_number("barrier_center", &ScenarioConfig::barrier_center));
    f.push_back(text("initial", &ScenarioConfig::initial));
    f.push_back(number("sigma", &ScenarioConfig::sigma));
    f.push_back(number("separation", &ScenarioConfig::separation));
    f.push_back(number("center", &ScenarioConfig::center));
    f.push_back(number("v0", &ScenarioConfig::v0));
    f.push_back(number("q0", &ScenarioConfig::q0));
    f.push_back(number("offset", &ScenarioConfig::offset));
    f.push_back(list("positions", &ScenarioConfig::positions));
    f.push_back(list("momenta", &ScenarioConfig::momenta));
    f.push_back(number("dt", &ScenarioConfig::dt));
    f.push_back(number("t_final", &ScenarioConfig::t_final));
    f.push_back(number("record_every", &ScenarioConfig::record_every));
    f.push_back(number("force_tol", &ScenarioConfig::force_tol));
    f.push_back(number("max_outer", &ScenarioConfig::max_outer));
    f.push_back(number("inner_steps", &ScenarioConfig::inner_steps));
    f.push_back(list("aux_offsets", &ScenarioConfig::aux_offsets));
    f.push_back(number("grid_min", &ScenarioConfig::grid_min));
    f.push_back(number("grid_max", &ScenarioConfig::grid_max));
    f.push_back(number("grid_points", &ScenarioConfig::grid_points));
    f.push_back(number("snapshot_every", &ScenarioConfig::snapshot_every));
    f.push_back(number("energy_drift_tol", &ScenarioConfig::energy_drift_tol));
    f.push_back(text("sample", &ScenarioConfig::sample));
    f.push_back(number("seed", &ScenarioConfig::seed));
    f.push_back({"output_dir",
                 [](ScenarioConfig& c, const std::string& v) { c.output_dir = v; },
                 [](const ScenarioConfig& c) { return json(c.output_dir.string()); }});
    f.push_back(text("format", &ScenarioConfig::format));
    return f;
  }();
  return table;
}

void apply_command_defaults(ScenarioConfig& c) {
  switch (c.command) {
    case Command::GroundExact:
      c.potential = "harmonic";
      c.initial = "ground";
      c.n = 11;
      break;
    case Command::GroundRelax:
      c.potential = "harmonic";
      c.initial = "gaussian";
      c.n = 11;
      c.dt = 5e-2;
      break;
    case Command::Tunnel:
      c.potential = "barrier";
      c.initial = "uniform-pair";
      c.n = 2;
      c.barrier_width = 1.0;
      c.barrier_center = 0.0;
      c.record_every = 1000;
      break;
    case Command::Evolve:
    case Command::ReferenceEvolve:
    case Command::Compare:
      break;
  }
}

bool apply_preset(ScenarioConfig& c, const std::string& name) {
  if (name == "custom") return true;
  if (name == "double-slit") {
    c.potential = "free";
    c.initial = "pair";
    c.n = 41;
    c.sigma = 1.0;
    c.separation = 4.0;
    c.mass = 0.5;
    c.hbar = 1.0;
    c.dt = 1e-4;
    c.t_final = 2.0;
    c.record_every = 1000;
    c.snapshot_every = 10;
    c.grid_min = -32.0;
    c.grid_max = 32.0;
    c.grid_points = 2048;
    return true;
  }
  if (name == "oscillator") {
    c.potential = "harmonic";
    c.omega = 1.0;
    c.initial = "ground";
    c.n = 11;
    c.dt = 1e-3;
    c.t_final = 2.0 * std::numbers::pi;
    c.record_every = 100;
    c.snapshot_every = 10;
    return true;
  }
  if (name == "free-pair") {
    c.potential = "free";
    c.initial = "uniform-pair";
    c.n = 2;
    c.q0 = 1.0;
    c.dt = 1e-3;
    c.t_final = 10.0;
    c.record_every = 100;
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Output

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void append_number(std::string& out, double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(len));
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i) out += ',';
    out += t.header[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      append_number(out, row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.header[i]] = row[i];
    rows.push_back(std::move(obj));
  }
  return rows.dump(1) + "\n";
}

class Writer {
 public:
  Writer(fs::path dir, std::string format) : dir_(std::move(dir)), format_(std::move(format)) {
    fs::create_directories(dir_);
  }

  void table(const std::string& stem, const Table& t) {
    const bool as_json = format_ == "json";
    write(stem + (as_json ? ".json" : ".csv"), as_json ? to_json(t) : to_csv(t));
  }

  void write(const std::string& name, const std::string& contents) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << contents;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    files_.push_back(path);
  }

  const std::vector<fs::path>& files() const { return files_; }

 private:
  fs::path dir_;
  std::string format_;
  std::vector<fs::path> files_;
};

Table trajectory_table(const TrajectorySet& t) {
  Table out{{"t", "world_index", "x", "p"}, {}};
  for (std::size_t i = 0; i < t.frames(); ++i) {
    for (std::size_t n = 0; n < t.positions[i].size(); ++n) {
      out.rows.push_back({t.times[i], static_cast<double>(n), t.positions[i][n], t.momenta[i][n]});
    }
  }
  return out;
}

Table energy_table(const TrajectorySet& t) {
  Table out{{"t", "H", "kinetic", "classical_V", "interworld_U"}, {}};
  for (std::size_t i = 0; i < t.energy_parts.size(); ++i) {
    const auto& e = t.energy_parts[i];
    out.rows.push_back({t.times[i], e.total(), e.kinetic, e.classical, e.interworld});
  }
  return out;
}

fs::path output_directory(const ScenarioConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("MIW_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

json config_json(const ScenarioConfig& c) {
  json out = json::object();
  out["command"] = std::string(to_string(c.command));
  for (const auto& f : fields()) {
    if (f.name == "output_dir") continue;
    out[f.name] = f.get(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scenario construction

PotentialSpec potential_of(const ScenarioConfig& c) {
  if (c.potential == "harmonic") return HarmonicPotential{c.omega};
  if (c.potential == "barrier") {
    return GaussianBarrier{c.barrier_v0.value_or(0.0), c.barrier_width.value_or(1.0),
                           c.barrier_center.value_or(0.0)};
  }
  return FreePotential{};
}

GridSpec grid_of(const ScenarioConfig& c) { return {c.grid_min, c.grid_max, c.grid_points}; }

std::size_t step_count(const ScenarioConfig& c) {
  return static_cast<std::size_t>(std::llround(c.t_final / c.dt));
}

InitialStateSpec wave_spec(const ScenarioConfig& c) {
  if (c.initial == "pair") return GaussianPair{c.sigma / std::numbers::sqrt2, c.separation};
  if (c.initial == "gaussian") return SingleGaussian{c.sigma, c.center};
  return OscillatorGround{c.omega};
}

std::vector<double> sample_worlds(const ScenarioConfig& c, const WavefunctionGrid& w) {
  return c.sample == "random" ? random_sample(w, c.n, c.seed) : quantile_sample(w, c.n);
}

std::vector<double> initial_positions(const ScenarioConfig& c) {
  if (c.initial == "explicit") return c.positions;
  if (c.initial == "uniform-pair") return {c.center - 0.5 * c.q0, c.center + 0.5 * c.q0};
  if (c.initial == "ground") {
    auto x = exact_oscillator_groundstate(c.n, c.omega, c.mass, c.hbar).positions;
    for (auto& v : x) v += c.offset;
    return x;
  }
  const auto w = build_initial_state(wave_spec(c), grid_of(c), c.mass, c.hbar);
  return sample_worlds(c, w);
}

WorldEnsemble initial_ensemble(const ScenarioConfig& c) {
  auto x = initial_positions(c);
  std::vector<double> p(x.size(), c.mass * c.v0);
  if (c.initial == "explicit" && !c.momenta.empty()) p = c.momenta;
  return WorldEnsemble::create(std::move(x), std::move(p), c.mass, c.hbar);
}

json bounds_json(const BoundReport& b) {
  return {{"frames", b.frames},
          {"energy_violations", b.energy_violations},
          {"uncertainty_violations", b.uncertainty_violations},
          {"min_energy_margin", b.min_energy_margin},
          {"min_uncertainty_margin", b.min_uncertainty_margin},
          {"pass", b.ok()}};
}

/// Quantum energy split into the Bohmian kinetic part and the
/// hbar^2/(2m) int (R')^2 term that the interworld potential mirrors.
EnergyBreakdown quantum_energy(const WavefunctionGrid& w, const PotentialSpec& v) {
  const double dx = w.grid.dx();
  const auto dpsi = spectral_derivative(std::span<const std::complex<double>>(w.psi), dx, 1);
  auto r = w.density();
  for (auto& x : r) x = std::sqrt(x);
  const auto dr = spectral_derivative(std::span<const double>(r), dx, 1);
  const double c = w.hbar * w.hbar / (2.0 * w.mass);
  EnergyBreakdown e;
  double total_kinetic = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    total_kinetic += c * std::norm(dpsi[j]) * dx;
    e.interworld += c * dr[j] * dr[j] * dx;
    e.classical += potential_energy(v, w.grid.x(j), w.mass) * std::norm(w.psi[j]) * dx;
  }
  e.kinetic = total_kinetic - e.interworld;
  return e;
}

struct ReferenceRun {
  SplitStepResult quantum;
  TrajectorySet dbb;
  /// Indices into quantum.snapshots of the recorded frames.
  std::vector<std::size_t> recorded;
  double max_equivariance_w1 = 0.0;
};

ReferenceRun reference_run(const ScenarioConfig& c, std::span<const double> x0) {
  const auto psi0 = build_initial_state(wave_spec(c), grid_of(c), c.mass, c.hbar);
  SplitStepOptions opts;
  opts.dt = c.dt;
  opts.steps = step_count(c);
  opts.snapshot_every = c.snapshot_every;
  ReferenceRun out;
  out.quantum = split_step_evolve(psi0, potential_of(c), opts);
  const auto all = dbb_trajectories(out.quantum.snapshots, out.quantum.times, x0);
  out.dbb.kind = TrajectorySet::Kind::Bohmian;
  for (std::size_t i = 0; i < all.frames(); ++i) {
    const std::size_t step = std::min(i * c.snapshot_every, opts.steps);
    if (step % c.record_every != 0 && step != opts.steps) continue;
    out.recorded.push_back(i);
    out.dbb.times.push_back(all.times[i]);
    out.dbb.positions.push_back(all.positions[i]);
    out.dbb.momenta.push_back(all.momenta[i]);
    const auto q = quantile_sample(out.quantum.snapshots[i], x0.size());
    out.max_equivariance_w1 =
        std::max(out.max_equivariance_w1, wasserstein1_samples(all.positions[i], q));
  }
  return out;
}

Table density_table(const ReferenceRun& r) {
  Table out{{"t", "x", "density"}, {}};
  for (std::size_t i : r.recorded) {
    const auto& w = r.quantum.snapshots[i];
    const auto p = w.density();
    for (std::size_t j = 0; j < p.size(); ++j) out.rows.push_back({r.quantum.times[i], w.grid.x(j), p[j]});
  }
  return out;
}

json interference_json(std::span<const double> x) {
  const auto profile = miw_density_profile(x);
  return {{"maxima_at_half_depth", count_separated_maxima(profile, 0.5)},
          {"depth_for_three_maxima", interference_depth(profile, 3)},
          {"pass", count_separated_maxima(profile, 0.5) >= 3}};
}

EvolveResult miw_run(const ScenarioConfig& c, const WorldEnsemble& e) {
  return evolve(e, potential_of(c), c.dt, step_count(c), c.record_every);
}

json evolve_checks(const ScenarioConfig& c, const EvolveResult& r) {
  const auto v = potential_of(c);
  json checks = json::object();
  checks["ordering"] = {{"pass", !r.report.aborted}, {"reason", r.report.reason}};
  checks["energy_drift"] = {{"value", r.report.max_energy_drift},
                            {"tolerance", c.energy_drift_tol},
                            {"pass", r.report.max_energy_drift <= c.energy_drift_tol}};
  checks["bounds"] = bounds_json(check_bounds(r.trajectory, v, c.mass, c.hbar));
  if (r.trajectory.frames() >= 3 && std::holds_alternative<FreePotential>(v)) {
    const auto s = verify_spreading_law(r.trajectory, c.mass, c.hbar);
    checks["spreading_law"] = {{"c0", s.fit.c0},
                               {"c1", s.fit.c1},
                               {"c2", s.fit.c2},
                               {"expected_c0", s.expected_c0},
                               {"expected_c1", s.expected_c1},
                               {"expected_c2", s.expected_c2},
                               {"max_coefficient_error", s.max_coefficient_error},
                               {"pass", s.max_coefficient_error < kCheckTolerance}};
  }
  if (!std::holds_alternative<GaussianBarrier>(v)) {
    const double res = ehrenfest_residual(r.trajectory, v, c.mass);
    checks["ehrenfest"] = {{"residual", res}, {"pass", res < kCheckTolerance}};
  }
  return checks;
}

bool all_pass(const json& checks) {
  for (const auto& [name, check] : checks.items()) {
    if (check.contains("pass") && !check["pass"].get<bool>()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Commands

json run_ground_exact(const ScenarioConfig& c, Writer& out) {
  const auto g = exact_oscillator_groundstate(c.n, c.omega, c.mass, c.hbar);
  const auto e = WorldEnsemble::at_rest(g.positions, c.mass, c.hbar);
  TrajectorySet t;
  t.times = {0.0};
  t.positions = {g.positions};
  t.momenta = {std::vector<double>(g.positions.size(), 0.0)};
  t.energy_parts = {energy_breakdown(e, potential_of(c))};
  out.table("trajectory", trajectory_table(t));
  out.table("energy", energy_table(t));
  const double expected = groundstate_energy_exact(c.n, c.omega, c.hbar);
  const auto bounds = check_bounds(t, potential_of(c), c.mass, c.hbar, 1e-9);
  json checks = {{"energy", {{"value", g.energy_per_world},
                             {"expected", expected},
                             {"pass", std::abs(g.energy_per_world - expected) <= 1e-12 * expected}}},
                 {"stationarity", {{"residual", g.residual}, {"pass", g.residual < 1e-8}}},
                 {"bounds", bounds_json(bounds)}};
  json metrics = {{"energy_per_world", g.energy_per_world},
                  {"expected_energy_per_world", expected},
                  {"xi", g.xi},
                  {"positions", g.positions}};
  return {{"checks", checks}, {"metrics", metrics}};
}

json run_ground_relax(const ScenarioConfig& c, Writer& out, int& exit_code) {
  RelaxOptions opts;
  opts.dt = c.dt;
  opts.inner_steps = c.inner_steps;
  opts.max_outer = c.max_outer;
  opts.force_tol = c.force_tol;
  opts.aux_offsets = {c.aux_offsets[0], c.aux_offsets[1]};
  opts.trace_energy = true;
  const auto v = potential_of(c);
  const auto r = relax_to_groundstate(initial_positions(c), v, c.mass, c.hbar, opts);
  const auto& g = r.ground;
  const auto e = WorldEnsemble::at_rest(g.positions, c.mass, c.hbar);
  TrajectorySet t;
  t.times = {0.0};
  t.positions = {g.positions};
  t.momenta = {std::vector<double>(g.positions.size(), 0.0)};
  t.energy_parts = {energy_breakdown(e, v)};
  out.table("trajectory", trajectory_table(t));
  out.table("energy", energy_table(t));
  Table trace{{"iteration", "potential_energy"}, {}};
  bool monotone = true;
  for (std::size_t i = 0; i < r.energy_trace.size(); ++i) {
    trace.rows.push_back({static_cast<double>(i), r.energy_trace[i]});
    if (i > 0 && r.energy_trace[i] > r.energy_trace[i - 1] * (1.0 + 1e-14)) monotone = false;
  }
  out.table("relaxation", trace);

  json checks = {{"converged", {{"residual", g.residual}, {"pass", g.converged}}},
                 {"energy_monotone", {{"pass", monotone}}}};
  json metrics = {{"energy_per_world", g.energy_per_world},
                  {"iterations", g.iterations},
                  {"positions", g.positions}};
  if (c.potential == "harmonic") {
    const double expected = groundstate_energy_exact(c.n, c.omega, c.hbar);
    const double rel = std::abs(g.energy_per_world - expected) / expected;
    checks["energy"] = {{"relative_error", rel}, {"expected", expected}, {"pass", rel < 1e-9}};
    metrics["xi"] = g.xi;
  }
  if (!g.converged) exit_code = exit_code_for(ErrorCode::NoConvergence);
  return {{"checks", checks}, {"metrics", metrics}};
}

json run_evolve(const ScenarioConfig& c, Writer& out, int& exit_code) {
  const auto e = initial_ensemble(c);
  const auto r = miw_run(c, e);
  out.table("trajectory", trajectory_table(r.trajectory));
  out.table("energy", energy_table(r.trajectory));
  json checks = evolve_checks(c, r);
  json metrics = {{"steps_taken", r.report.steps_taken},
                  {"t_end", r.trajectory.times.back()},
                  {"max_energy_drift", r.report.max_energy_drift},
                  {"final_positions", r.trajectory.positions.back()}};
  if (c.n == 2 && c.potential == "free" && e.momenta()[0] == e.momenta()[1]) {
    const double q0 = e.positions()[1] - e.positions()[0];
    double worst = 0.0;
    for (std::size_t i = 0; i < r.trajectory.frames(); ++i) {
      const auto& x = r.trajectory.positions[i];
      worst = std::max(worst, std::abs((x[1] - x[0]) -
                                       two_world_separation_exact(q0, r.trajectory.times[i],
                                                                  c.mass, c.hbar)));
    }
    checks["two_world_separation"] = {{"max_error", worst}, {"pass", worst < kCheckTolerance}};
  }
  if (c.initial == "pair") metrics["interference"] = interference_json(r.trajectory.positions.back());
  if (r.report.aborted) exit_code = exit_code_for(ErrorCode::OrderingViolated);
  return {{"checks", checks}, {"metrics", metrics}};
}

json run_tunnel(const ScenarioConfig& c, Writer& out) {
  const GaussianBarrier barrier{*c.barrier_v0, c.barrier_width.value_or(1.0),
                                c.barrier_center.value_or(0.0)};
  TunnelingRunOptions opts;
  opts.record_every = c.record_every;
  const auto r = simulate_tunneling(c.v0, c.q0, barrier, c.mass, c.hbar, opts);
  out.table("trajectory", trajectory_table(r.run.trajectory));
  out.table("energy", energy_table(r.run.trajectory));
  const auto& p = r.prediction;
  const bool match =
      r.leading_transmitted == p.leading_transmits && r.trailing_transmitted != p.trailing_reflects;
  json checks = {{"resolved", {{"pass", r.resolved}}},
                 {"prediction_match", {{"pass", r.resolved && match}}},
                 {"energy_drift", {{"value", r.max_energy_drift},
                                   {"tolerance", c.energy_drift_tol},
                                   {"pass", r.max_energy_drift <= c.energy_drift_tol}}},
                 {"bounds", bounds_json(check_bounds(r.run.trajectory, barrier, c.mass, c.hbar))}};
  json metrics = {{"boost", p.boost},
                  {"v_classical", p.v_classical},
                  {"predicted_leading_transmits", p.leading_transmits},
                  {"predicted_trailing_reflects", p.trailing_reflects},
                  {"leading_transmitted", r.leading_transmitted},
                  {"trailing_transmitted", r.trailing_transmitted},
                  {"trailing_reflected", !r.trailing_transmitted},
                  {"dt", r.dt},
                  {"t_end", r.t_end}};
  return {{"checks", checks}, {"metrics", metrics}};
}

json reference_metrics(const ScenarioConfig& c, const ReferenceRun& ref, json& checks) {
  const auto& q = ref.quantum;
  checks["norm_drift"] = {{"value", q.max_norm_drift}, {"pass", q.max_norm_drift < 1e-8}};
  checks["equivariance"] = {{"max_wasserstein1", ref.max_equivariance_w1},
                            {"sigma", c.sigma},
                            {"pass", ref.max_equivariance_w1 < 0.05 * c.sigma}};
  json metrics = {{"max_norm_drift", q.max_norm_drift},
                  {"final_variance_x", q.final_state.variance_x()},
                  {"final_boundary_ratio", boundary_density_ratio(q.final_state)}};
  if (c.initial == "ground" && c.potential == "harmonic") {
    const auto p0 = q.snapshots.front().density();
    const double top = *std::max_element(p0.begin(), p0.end());
    double worst = 0.0;
    for (const auto& s : q.snapshots) {
      const auto p = s.density();
      for (std::size_t j = 0; j < p.size(); ++j) worst = std::max(worst, std::abs(p[j] - p0[j]) / top);
    }
    checks["stationarity"] = {{"max_density_change", worst}, {"pass", worst < kCheckTolerance}};
  }
  return metrics;
}

json run_reference(const ScenarioConfig& c, Writer& out) {
  const auto psi0 = build_initial_state(wave_spec(c), grid_of(c), c.mass, c.hbar);
  const auto x0 = sample_worlds(c, psi0);
  const auto ref = reference_run(c, x0);
  out.table("trajectory", trajectory_table(ref.dbb));
  Table energy{{"t", "H", "kinetic", "classical_V", "interworld_U"}, {}};
  for (std::size_t i : ref.recorded) {
    const auto e = quantum_energy(ref.quantum.snapshots[i], potential_of(c));
    energy.rows.push_back({ref.quantum.times[i], e.total(), e.kinetic, e.classical, e.interworld});
  }
  out.table("energy", energy);
  out.table("density", density_table(ref));
  json checks = json::object();
  json metrics = reference_metrics(c, ref, checks);
  return {{"checks", checks}, {"metrics", metrics}};
}

json run_compare(const ScenarioConfig& c, Writer& out, int& exit_code) {
  const auto e = initial_ensemble(c);
  const auto miw = miw_run(c, e);
  if (miw.report.aborted) {
    throw Error(ErrorCode::OrderingViolated, "MIW run aborted: " + miw.report.reason);
  }
  const auto ref = reference_run(c, e.positions());
  std::vector<WavefunctionGrid> frames;
  for (std::size_t i : ref.recorded) frames.push_back(ref.quantum.snapshots[i]);
  const auto cmp = compare_miw_vs_dbb(miw.trajectory, ref.dbb, frames);

  out.table("trajectory", trajectory_table(miw.trajectory));
  out.table("energy", energy_table(miw.trajectory));
  out.table("dbb_trajectory", trajectory_table(ref.dbb));
  out.table("density", density_table(ref));
  Table table{{"t", "per_world_max_deviation", "mean_abs_deviation", "wasserstein_density"}, {}};
  for (std::size_t i = 0; i < cmp.times.size(); ++i) {
    table.rows.push_back({cmp.times[i], cmp.per_world_max_deviation[i], cmp.mean_abs_deviation[i],
                          cmp.wasserstein_density_distance[i]});
  }
  out.table("comparison", table);

  json checks = evolve_checks(c, miw);
  json metrics = reference_metrics(c, ref, checks);
  const bool finite = std::all_of(table.rows.begin(), table.rows.end(), [](const auto& row) {
    return std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); });
  });
  checks["comparison_finite"] = {{"pass", finite}};
  metrics["final_per_world_max_deviation"] = cmp.per_world_max_deviation.back();
  metrics["final_mean_abs_deviation"] = cmp.mean_abs_deviation.back();
  metrics["final_wasserstein_density"] = cmp.wasserstein_density_distance.back();
  metrics["max_energy_drift"] = miw.report.max_energy_drift;
  if (c.initial == "pair") {
    metrics["interference"] = interference_json(miw.trajectory.positions.back());
  }
  (void)exit_code;
  return {{"checks", checks}, {"metrics", metrics}};
}

}  // namespace

std::string_view to_string(Command c) noexcept {
  switch (c) {
    case Command::GroundExact: return "groundstate-exact";
    case Command::GroundRelax: return "groundstate-relax";
    case Command::Evolve: return "evolve";
    case Command::Tunnel: return "tunnel";
    case Command::ReferenceEvolve: return "reference-evolve";
    case Command::Compare: return "compare";
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) noexcept {
  for (auto c : {Command::GroundExact, Command::GroundRelax, Command::Evolve, Command::Tunnel,
                 Command::ReferenceEvolve, Command::Compare}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError,
                  "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = snake(trim(std::string_view(body).substr(0, eq)));
    if (key.empty()) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": empty key");
    }
    out[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return out;
}

KeyValues load_key_values(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.name);
    return k;
  }();
  return keys;
}

ScenarioConfig make_config(Command command, const KeyValues& values) {
  ScenarioConfig c;
  c.command = command;
  apply_command_defaults(c);
  std::vector<std::string> problems;
  if (const auto it = values.find("scenario"); it != values.end()) {
    if (!apply_preset(c, it->second)) problems.push_back("scenario: unknown preset '" + it->second + "'");
    c.scenario = it->second;
  }
  for (const auto& [raw, value] : values) {
    const std::string key = snake(raw);
    if (key == "scenario") continue;
    const auto f = std::find_if(fields().begin(), fields().end(),
                                [&](const Field& x) { return x.name == key; });
    if (f == fields().end()) {
      problems.push_back(key + ": unknown key");
      continue;
    }
    try {
      f->set(c, value);
    } catch (const Error& e) {
      problems.push_back(e.what());
    }
  }
  if (c.initial == "explicit" && c.n == 0) c.n = c.positions.size();
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw Error(ErrorCode::ConfigError, msg);
  }
  return c;
}

std::vector<std::string> validate(const ScenarioConfig& c) {
  std::vector<std::string> e;
  const auto require = [&](bool ok, const std::string& msg) {
    if (!ok) e.push_back(msg);
  };
  const bool quantum = c.command == Command::ReferenceEvolve || c.command == Command::Compare;
  const bool timed = c.command == Command::Evolve || quantum;

  require(c.n >= 2, "n: at least two worlds are required");
  require(c.mass > 0.0, "mass: must be positive");
  const bool needs_hbar = c.command != Command::Evolve && c.command != Command::Tunnel;
  require(needs_hbar ? c.hbar > 0.0 : c.hbar >= 0.0,
          needs_hbar ? "hbar: must be positive" : "hbar: must be non-negative");

  const std::vector<std::string> potentials{"free", "harmonic", "barrier"};
  if (std::find(potentials.begin(), potentials.end(), c.potential) == potentials.end()) {
    e.push_back("potential: must be free, harmonic or barrier");
  }
  if (c.potential == "harmonic") require(c.omega > 0.0, "omega: must be positive");
  if (c.potential == "barrier" || c.command == Command::Tunnel) {
    require(c.potential == "barrier", "potential: tunnel requires the barrier potential");
    require(c.barrier_v0.has_value(), "barrier_v0: required for the barrier potential");
    if (c.barrier_v0) require(*c.barrier_v0 > 0.0, "barrier_v0: must be positive");
    require(c.barrier_width.has_value(), "barrier_width: required for the barrier potential");
    if (c.barrier_width) require(*c.barrier_width > 0.0, "barrier_width: must be positive");
  }
  if (c.command == Command::GroundExact || c.command == Command::GroundRelax) {
    if (c.command == Command::GroundExact) {
      require(c.potential == "harmonic", "potential: groundstate-exact requires harmonic");
    }
  }
  if (c.command == Command::Tunnel) {
    require(c.n == 2, "n: tunnel uses exactly two worlds");
    require(c.q0 > 0.0, "q0: must be positive");
  }

  const std::vector<std::string> initials{"pair", "gaussian", "ground", "uniform-pair", "explicit"};
  if (std::find(initials.begin(), initials.end(), c.initial) == initials.end()) {
    e.push_back("initial: must be pair, gaussian, ground, uniform-pair or explicit");
  }
  if (c.initial == "ground") {
    require(c.potential == "harmonic" || c.command == Command::GroundExact,
            "initial: ground requires the harmonic potential");
  }
  if (c.initial == "pair" || c.initial == "gaussian") require(c.sigma > 0.0, "sigma: must be positive");
  if (c.initial == "pair") require(c.separation >= 0.0, "separation: must be non-negative");
  if (c.initial == "uniform-pair" && c.command != Command::Tunnel) {
    require(c.n == 2, "n: uniform-pair places exactly two worlds");
    require(c.q0 > 0.0, "q0: must be positive");
  }
  if (c.initial == "explicit") {
    require(c.positions.size() == c.n, "positions: expected n values");
    require(c.momenta.empty() || c.momenta.size() == c.n, "momenta: expected n values");
  }
  if (quantum) {
    require(c.initial == "pair" || c.initial == "gaussian" || c.initial == "ground",
            "initial: reference runs need pair, gaussian or ground");
    require(c.initial != "ground" || c.offset == 0.0,
            "offset: reference runs start from the centred ground state");
    require(c.v0 == 0.0, "v0: reference runs start from real wavefunctions");
  }

  if (c.command != Command::GroundExact && c.command != Command::Tunnel) {
    require(c.dt > 0.0, "dt: must be positive");
  }
  if (timed) {
    require(c.t_final > 0.0, "t_final: must be positive");
    if (c.dt > 0.0 && c.t_final > 0.0) require(step_count(c) >= 1, "t_final: shorter than one step");
  }
  require(c.record_every >= 1, "record_every: must be >= 1");
  if (c.command == Command::GroundRelax) {
    require(c.force_tol > 0.0, "force_tol: must be positive");
    require(c.max_outer >= 1, "max_outer: must be >= 1");
    require(c.inner_steps >= 1, "inner_steps: must be >= 1");
    require(c.aux_offsets.size() == 2 && c.aux_offsets[0] > 0.0 && c.aux_offsets[1] > 0.0 &&
                c.aux_offsets[0] != c.aux_offsets[1],
            "aux_offsets: two distinct positive multiples of the mean spacing");
  }
  const bool uses_grid = quantum || c.initial == "pair" || c.initial == "gaussian";
  if (uses_grid) {
    require(c.grid_max > c.grid_min, "grid_max: must exceed grid_min");
    require(c.grid_points >= 4 && (c.grid_points & (c.grid_points - 1)) == 0,
            "grid_points: must be a power of two >= 4");
  }
  if (quantum) {
    require(c.snapshot_every >= 1, "snapshot_every: must be >= 1");
    require(c.snapshot_every >= 1 && c.record_every % c.snapshot_every == 0,
            "record_every: must be a multiple of snapshot_every");
  }
  require(c.energy_drift_tol > 0.0, "energy_drift_tol: must be positive");
  require(c.sample == "quantile" || c.sample == "random", "sample: must be quantile or random");
  require(c.format == "csv" || c.format == "json", "format: must be csv or json");
  return e;
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OrderingViolated:
    case ErrorCode::NonFinite:
    case ErrorCode::GridTooSmall:
    case ErrorCode::LeftGrid:
      return 3;
    case ErrorCode::NoConvergence:
      return 4;
    default:
      return 2;
  }
}

RunResult run(const ScenarioConfig& config) {
  RunResult result;
  json summary = json::object();
  summary["command"] = std::string(to_string(config.command));
  summary["scenario"] = config.scenario;
  summary["config"] = config_json(config);
  const auto problems = validate(config);
  if (!problems.empty()) {
    summary["status"] = "config_error";
    summary["errors"] = problems;
    result.exit_code = exit_code_for(ErrorCode::ConfigError);
    result.summary = summary.dump(2) + "\n";
    return result;
  }

  Writer out(output_directory(config), config.format);
  int exit_code = 0;
  try {
    json body;
    switch (config.command) {
      case Command::GroundExact: body = run_ground_exact(config, out); break;
      case Command::GroundRelax: body = run_ground_relax(config, out, exit_code); break;
      case Command::Evolve: body = run_evolve(config, out, exit_code); break;
      case Command::Tunnel: body = run_tunnel(config, out); break;
      case Command::ReferenceEvolve: body = run_reference(config, out); break;
      case Command::Compare: body = run_compare(config, out, exit_code); break;
    }
    summary["status"] = exit_code == 0 ? "ok" : "failed";
    summary["all_checks_pass"] = all_pass(body["checks"]);
    summary["checks"] = body["checks"];
    summary["metrics"] = body["metrics"];
  } catch (const Error& err) {
    exit_code = exit_code_for(err.code());
    summary["status"] = "error";
    summary["error"] = {{"code", std::string(miw::to_string(err.code()))}, {"message", err.what()}};
  }
  result.exit_code = exit_code;
  result.summary = summary.dump(2) + "\n";
  out.write("summary.json", result.summary);
  result.files = out.files();
  return result;
}

}  // namespace miw
