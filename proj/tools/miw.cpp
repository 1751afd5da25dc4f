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

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "miw/error.hpp"
#include "miw/scenario.hpp"

namespace {

std::string flag_name(std::string key) {
  for (auto& ch : key) {
    if (ch == '_') ch = '-';
  }
  return "--" + key;
}

struct Subcommand {
  miw::Command command;
  CLI::App* app = nullptr;
  std::string config_file;
  std::map<std::string, std::string> flags;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Many-interacting-worlds simulator"};
  app.require_subcommand(1);

  std::vector<Subcommand> subs;
  const std::pair<miw::Command, const char*> commands[] = {
      {miw::Command::GroundExact, "Exact oscillator ground state"},
      {miw::Command::GroundRelax, "Ground state by damped relaxation"},
      {miw::Command::Evolve, "Velocity-Verlet evolution of the worlds"},
      {miw::Command::Tunnel, "Two-world barrier scattering"},
      {miw::Command::ReferenceEvolve, "Split-step Schrodinger solution and dBB trajectories"},
      {miw::Command::Compare, "MIW against dBB trajectories from the same initial worlds"},
  };
  subs.reserve(std::size(commands));
  for (const auto& [command, help] : commands) {
    auto& s = subs.emplace_back();
    s.command = command;
    s.app = app.add_subcommand(std::string(miw::to_string(command)), help);
    s.app->add_option("--config", s.config_file, "key = value config file; flags override it")
        ->check(CLI::ExistingFile);
  }
  for (auto& s : subs) {
    for (const auto& key : miw::config_keys()) {
      s.app->add_option(flag_name(key), s.flags[key], key);
    }
  }

  CLI11_PARSE(app, argc, argv);

  for (auto& s : subs) {
    if (!s.app->parsed()) continue;
    try {
      miw::KeyValues values;
      if (!s.config_file.empty()) values = miw::load_key_values(s.config_file);
      for (const auto& key : miw::config_keys()) {
        if (s.app->count(flag_name(key)) > 0) values[key] = s.flags[key];
      }
      const auto config = miw::make_config(s.command, values);
      const auto result = miw::run(config);
      std::cout << result.summary;
      if (result.exit_code == miw::exit_code_for(miw::ErrorCode::ConfigError) &&
          result.files.empty()) {
        for (const auto& problem : miw::validate(config)) std::cerr << "error: " << problem << "\n";
      }
      return result.exit_code;
    } catch (const miw::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return miw::exit_code_for(e.code());
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 1;
}
