// Copyright 2026 The phaselab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "phaselab/commands.hpp"
#include "phaselab/config.hpp"
#include "phaselab/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"phaselab: Wigner measures, Moyal dynamics and coherent feedback scenarios"};
  app.set_version_flag("--version", std::string(phaselab::kVersion));

  std::string command, config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  bool strict = false;
  if (const char* env = std::getenv("PHASELAB_THREADS")) {
    try {
      threads = std::stoi(env);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring non-numeric PHASELAB_THREADS\n";
    }
  }

  app.add_option("command", command, "transform | evolve | oracle | compare | feedback | verify")
      ->required()
      ->check(CLI::IsMember(phaselab::command_names()));
  auto* config_opt = app.add_option("--config", config_path, "scenario config (JSON)")->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized states");
  app.add_option("--threads", threads, "worker threads (env PHASELAB_THREADS)")->check(CLI::PositiveNumber);
  app.add_flag("--strict", strict, "treat warnings as tolerance violations");
  CLI11_PARSE(app, argc, argv);

  try {
    std::string text = R"({"version": "1"})";
    if (*config_opt) text = phaselab::read_text(config_path);
    else if (command != "verify") {
      std::cerr << "error: --config is required for '" << command << "'\n";
      return phaselab::kExitError;
    }
    const phaselab::ScenarioConfig cfg = phaselab::parse_config(text);
    phaselab::CommandOptions opt;
    if (*out_opt) opt.out_dir = out_dir;
    if (*seed_opt) opt.seed = seed;
    opt.threads = threads;
    opt.strict = strict;
    return phaselab::run_command(command, cfg, opt, std::cout);
  } catch (const phaselab::ConfigError& e) {
    std::cerr << "error: " << phaselab::to_string(e.kind()) << "\n";
    for (const auto& v : e.violations()) std::cerr << "  " << (v.path.empty() ? "/" : v.path) << ": " << v.reason << "\n";
    return phaselab::kExitError;
  } catch (const phaselab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return phaselab::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return phaselab::kExitError;
  }
}
