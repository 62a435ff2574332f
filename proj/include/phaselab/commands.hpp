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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "phaselab/config.hpp"

namespace phaselab {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitTolerance = 2;

struct CommandOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool strict = false;
};

const std::vector<std::string>& command_names();

/// Runs one command; returns the exit code (0 pass, 2 tolerance violation).
int run_command(const std::string& command, const ScenarioConfig& cfg, const CommandOptions& opt,
                std::ostream& log);

/// Piecewise exact evolution of a density operator under a (possibly scheduled) symbol.
std::vector<DensityOperator> oracle_states(const DensityOperator& t0, const HamiltonianSymbol& symbol,
                                           const std::vector<double>& times);

}  // namespace phaselab
