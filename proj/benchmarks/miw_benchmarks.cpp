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

#include <benchmark/benchmark.h>

#include <vector>

#include "miw/dynamics.hpp"
#include "miw/groundstate.hpp"
#include "miw/interaction.hpp"
#include "miw/schrodinger.hpp"

namespace {

std::vector<double> ground(std::size_t n) {
  return miw::exact_oscillator_groundstate(n, 1.0, 1.0, 1.0).positions;
}

void BM_InterworldForce(benchmark::State& state) {
  const auto x = ground(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(miw::interworld_force(x, 1.0, 1.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_InterworldForce)->RangeMultiplier(4)->Range(4, 1024)->Complexity();

void BM_VerletStep(benchmark::State& state) {
  const auto e = miw::WorldEnsemble::at_rest(ground(static_cast<std::size_t>(state.range(0))), 1.0, 1.0);
  const miw::PotentialSpec v = miw::HarmonicPotential{1.0};
  for (auto _ : state) benchmark::DoNotOptimize(miw::velocity_verlet_step(e, v, 1e-3));
}
BENCHMARK(BM_VerletStep)->Arg(11)->Arg(41)->Arg(256);

void BM_ExactGroundstate(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(ground(static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_ExactGroundstate)->Arg(11)->Arg(64);

void BM_SplitStep(benchmark::State& state) {
  const miw::GridSpec g{-32.0, 32.0, static_cast<std::size_t>(state.range(0))};
  const auto w = miw::build_initial_state(miw::GaussianPair{1.0, 4.0}, g, 0.5, 1.0);
  miw::SplitStepOptions o;
  o.dt = 1e-4;
  o.steps = 100;
  for (auto _ : state) benchmark::DoNotOptimize(miw::split_step_evolve(w, miw::FreePotential{}, o));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(o.steps));
}
BENCHMARK(BM_SplitStep)->Arg(1024)->Arg(2048)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
