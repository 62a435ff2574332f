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
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "phaselab/feedback.hpp"
#include "phaselab/moyal.hpp"
#include "phaselab/tolerance.hpp"
#include "phaselab/wigner.hpp"

namespace phaselab {

inline constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t value);

nlohmann::json spec_to_json(const PhaseSpaceSpec& spec);
nlohmann::json tolerances_to_json(const TolerancePolicy& tol);

/// One row per grid point: position coordinates, momentum coordinates, value.
void write_field_csv(const std::filesystem::path& path, const PhaseSpaceField& field);

/// Row-major complex128 little-endian values plus a JSON sidecar `<base>.json`.
void write_field_binary(const std::filesystem::path& base, const PhaseSpaceField& field);
PhaseSpaceField read_field_binary(const std::filesystem::path& base);

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRow>& rows);
void write_scenario_csv(const std::filesystem::path& path, const std::vector<ScenarioRow>& rows);

/// Heat-map script for a one-dimensional field CSV.
void write_gnuplot_script(const std::filesystem::path& path, const std::string& csv_name,
                          const std::string& title);

void write_json(const std::filesystem::path& path, const nlohmann::json& value);
std::string read_text(const std::filesystem::path& path);

/// Records config hash, tool version, tolerances and the produced files.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::string& config_text, const TolerancePolicy& tol,
                    const std::vector<std::string>& files);

}  // namespace phaselab
