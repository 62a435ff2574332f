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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phaselab/feedback.hpp"
#include "phaselab/hilbert.hpp"
#include "phaselab/lattice.hpp"
#include "phaselab/moyal.hpp"
#include "phaselab/weyl.hpp"

namespace phaselab {

inline constexpr const char* kConfigVersion = "1";

struct ConfigViolation {
  std::string path;  // JSON pointer
  std::string reason;
};

/// Thrown by parse_config; carries every violation found.
class ConfigError : public Error {
 public:
  ConfigError(ErrorKind kind, std::vector<ConfigViolation> violations);
  const std::vector<ConfigViolation>& violations() const { return violations_; }

 private:
  std::vector<ConfigViolation> violations_;
};

struct PhaseSpaceConfig {
  int d = 1;
  int n = 64;
  std::optional<double> half_width;
  RMatrix covariance;
};

struct StateConfig {
  std::string recipe = "ground";  // ground | displaced | cat | thermal | hermite | random | product
  RVector a;
  double beta = 1.0;
  bool even = true;
  std::vector<int> levels;
  int rank = 3;
  std::vector<StateConfig> components;  // one per axis for "product"
};

struct OutputConfig {
  std::string dir = "phaselab_out";
  bool csv = true;
  bool binary = false;
  bool plot = false;
};

struct ReportTolerances {
  double compare_max_abs = 1e-4;
  double mass_drift = 1e-6;
  double normalization = 1e-8;
  double commuting_square = 1e-6;
  double purity_drift = 1e-8;
};

struct SubsystemConfig {
  std::string label;
  std::size_t levels = 0;
  std::optional<PhaseSpaceConfig> grid;
};

struct FeedbackTermConfig {
  std::string kind;  // plant | controller | coupling | perturbation
  std::vector<std::string> support;
  std::vector<PhasePolynomial> polynomials;  // one per support factor
  double coeff = 1.0;
};

struct FeedbackConfig {
  std::vector<SubsystemConfig> subsystems;
  std::vector<FeedbackTermConfig> terms;
  std::map<std::string, StateConfig> initial_state;
  ScenarioRun run;
  bool classical = false;  // classical Liouville flow on the composite grid
};

struct VerifyConfig {
  int states = 5;
};

struct ScenarioConfig {
  std::string version = kConfigVersion;
  std::string text;  // original config text, hashed into manifests
  std::optional<PhaseSpaceConfig> phase_space;
  PhasePolynomial hamiltonian;
  std::vector<ScheduleSegment> schedule;
  bool has_hamiltonian = false;
  StateConfig initial_state;
  EvolutionRun run;
  OutputConfig output;
  ReportTolerances report;
  std::optional<FeedbackConfig> feedback;
  VerifyConfig verify;
  std::uint64_t seed = 0;
};

/// Validates and fills defaults; throws ConfigError listing all violations.
ScenarioConfig parse_config(const std::string& text);

PhaseSpaceSpec build_phase_space(const PhaseSpaceConfig& cfg);
HamiltonianSymbol build_symbol(const ScenarioConfig& cfg);
DensityOperator build_state(const StateConfig& cfg, const PhaseSpaceSpec& spec, std::uint64_t seed);

struct FeedbackModel {
  SubsystemLayout layout;
  CMatrix plant_hamiltonian;       // on the plant factors
  CMatrix controller_hamiltonian;  // on the controller factors
  CMatrix coupling;                // on the plant-controller factors
  CMatrix hamiltonian;             // on all factors
  CMatrix initial;                 // on all factors
};

FeedbackModel build_feedback_model(const FeedbackConfig& cfg);

/// Phase-space symbol of the full feedback Hamiltonian on the composite grid.
HamiltonianSymbol build_composite_symbol(const FeedbackConfig& cfg, const SubsystemLayout& layout);

}  // namespace phaselab
