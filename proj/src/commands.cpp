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

#include "phaselab/commands.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>

#include <Eigen/Eigenvalues>

#include "json.hpp"
#include "phaselab/io.hpp"

namespace phaselab {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"transform", "evolve", "oracle", "compare", "feedback", "verify"};
  return names;
}

namespace {

struct Outputs {
  fs::path dir;
  OutputConfig fmt;
  std::vector<std::string> files;

  void field(const std::string& name, const PhaseSpaceField& f) {
    if (fmt.csv) {
      write_field_csv(dir / (name + ".csv"), f);
      files.push_back(name + ".csv");
      if (fmt.plot && f.spec.d() == 1) {
        write_gnuplot_script(dir / (name + ".gp"), name + ".csv", name);
        files.push_back(name + ".gp");
      }
    }
    if (fmt.binary) {
      write_field_binary(dir / name, f);
      files.push_back(name + ".bin");
      files.push_back(name + ".json");
    }
  }

  void json_file(const std::string& name, const json& value) {
    write_json(dir / name, value);
    files.push_back(name);
  }
};

std::string snapshot_name(const std::string& prefix, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "_%04zu", index);
  return prefix + buf;
}

const PhaseSpaceConfig& require_phase_space(const ScenarioConfig& cfg) {
  if (!cfg.phase_space) throw Error(ErrorKind::SchemaViolation, "this command needs a phase_space section");
  return *cfg.phase_space;
}

std::uint64_t seed_of(const ScenarioConfig& cfg, const CommandOptions& opt) { return opt.seed.value_or(cfg.seed); }

double max_abs_diff(const PhaseSpaceField& a, const PhaseSpaceField& b) {
  return (a.real() - b.real()).cwiseAbs().maxCoeff();
}

int finish(const std::vector<std::string>& warnings, bool pass, const CommandOptions& opt, std::ostream& log) {
  for (const auto& w : warnings) log << "warning: " << w << "\n";
  if (!pass) return kExitTolerance;
  if (opt.strict && !warnings.empty()) return kExitTolerance;
  return kExitPass;
}

int cmd_transform(const ScenarioConfig& cfg, const CommandOptions& opt, Outputs& out, std::ostream& log) {
  const PhaseSpaceSpec spec = build_phase_space(require_phase_space(cfg));
  const DensityOperator t0 = build_state(cfg.initial_state, spec, seed_of(cfg, opt));
  const PhaseSpaceField w = wigner_from_density(t0);
  const PhaseSpaceField phi = eta_density(w);
  out.field("wigner", w);
  out.field("eta", phi);
  const double mass_error = std::abs(w.integral().real() - 1.0);
  const double eta_mass = pair_expectation(phi, HamiltonianSymbol::from_polynomial(
                                                    PhasePolynomial::constant(2 * static_cast<std::size_t>(spec.d()), 1.0)));
  const double bound = std::pow(kPi, -spec.d());
  const double max_w = w.real().cwiseAbs().maxCoeff();
  const bool pass = mass_error < cfg.report.normalization && max_w <= bound + 1e-8;
  out.json_file("report.json", json{{"mass_error", mass_error},
                                    {"eta_mass_error", std::abs(eta_mass - 1.0)},
                                    {"max_abs_w", max_w},
                                    {"bound", bound},
                                    {"purity", t0.purity()},
                                    {"pass", pass}});
  log << "transform: mass error " << mass_error << ", max|W| " << max_w << "\n";
  return finish({}, pass, opt, log);
}

int cmd_evolve(const ScenarioConfig& cfg, const CommandOptions& opt, Outputs& out, std::ostream& log) {
  const PhaseSpaceSpec spec = build_phase_space(require_phase_space(cfg));
  const HamiltonianSymbol symbol = build_symbol(cfg);
  const DensityOperator t0 = build_state(cfg.initial_state, spec, seed_of(cfg, opt));
  const EvolutionResult res = evolve(wigner_from_density(t0), symbol, cfg.run);
  json index = json::array();
  for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
    const std::string name = snapshot_name("wigner", i);
    out.field(name, res.snapshots[i].field);
    index.push_back({{"index", i}, {"t", res.snapshots[i].t}, {"name", name}});
  }
  write_diagnostics_csv(out.dir / "diagnostics.csv", res.diagnostics);
  out.files.push_back("diagnostics.csv");
  double drift = 0.0;
  for (const auto& row : res.diagnostics) drift = std::max(drift, std::abs(row.mass - res.diagnostics.front().mass));
  const bool pass = drift < cfg.report.mass_drift;
  out.json_file("snapshots.json", index);
  out.json_file("report.json", json{{"mass_drift", drift}, {"warnings", res.warnings}, {"pass", pass}});
  log << "evolve: " << res.diagnostics.size() - 1 << " steps, mass drift " << drift << "\n";
  return finish(res.warnings, pass, opt, log);
}

int cmd_oracle(const ScenarioConfig& cfg, const CommandOptions& opt, Outputs& out, std::ostream& log) {
  const PhaseSpaceSpec spec = build_phase_space(require_phase_space(cfg));
  const HamiltonianSymbol symbol = build_symbol(cfg);
  const DensityOperator t0 = build_state(cfg.initial_state, spec, seed_of(cfg, opt));
  const std::vector<double> times = snapshot_times(cfg.run);
  const auto states = oracle_states(t0, symbol, times);
  json index = json::array();
  double purity_drift = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string name = snapshot_name("wigner", i);
    out.field(name, wigner_from_density(states[i]));
    purity_drift = std::max(purity_drift, std::abs(states[i].purity() - t0.purity()));
    index.push_back({{"index", i}, {"t", times[i]}, {"name", name}, {"purity", states[i].purity()}});
  }
  out.json_file("snapshots.json", index);
  const bool pass = purity_drift < 1e-10;
  out.json_file("report.json", json{{"purity_drift", purity_drift}, {"pass", pass}});
  log << "oracle: " << states.size() << " snapshots, purity drift " << purity_drift << "\n";
  return finish({}, pass, opt, log);
}

int cmd_compare(const ScenarioConfig& cfg, const CommandOptions& opt, Outputs& out, std::ostream& log) {
  const PhaseSpaceSpec spec = build_phase_space(require_phase_space(cfg));
  const HamiltonianSymbol symbol = build_symbol(cfg);
  const DensityOperator t0 = build_state(cfg.initial_state, spec, seed_of(cfg, opt));
  const EvolutionResult res = evolve(wigner_from_density(t0), symbol, cfg.run);
  const std::vector<double> times = snapshot_times(cfg.run);
  const auto states = oracle_states(t0, symbol, times);
  json rows = json::array();
  double worst = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double err = max_abs_diff(res.snapshots[i].field, wigner_from_density(states[i]));
    worst = std::max(worst, err);
    rows.push_back({{"t", times[i]}, {"max_abs", err}});
  }
  write_diagnostics_csv(out.dir / "diagnostics.csv", res.diagnostics);
  out.files.push_back("diagnostics.csv");
  const bool pass = worst <= cfg.report.compare_max_abs;
  out.json_file("compare.json", json{{"norm", "max_abs"},
                                     {"snapshots", rows},
                                     {"max_abs", worst},
                                     {"tolerance", cfg.report.compare_max_abs},
                                     {"pass", pass}});
  log << "compare: max-abs error " << worst << " (tolerance " << cfg.report.compare_max_abs << ")\n";
  return finish(res.warnings, pass, opt, log);
}

int cmd_feedback(const ScenarioConfig& cfg, const CommandOptions& opt, Outputs& out, std::ostream& log) {
  if (!cfg.feedback) throw Error(ErrorKind::SchemaViolation, "feedback command needs a feedback section");
  const FeedbackModel model = build_feedback_model(*cfg.feedback);
  const FeedbackVerdict verdict = classify_coupling(model.coupling, model.layout);
  out.json_file("verdict.json", json{{"class", to_string(verdict.cls)},
                                     {"residual", verdict.residual},
                                     {"witness_a_norm", verdict.a.norm()},
                                     {"witness_b_norm", verdict.b.norm()},
                                     {"witness_a_weight", verdict.a_weight},
                                     {"witness_b_weight", verdict.b_weight}});
  log << "feedback: coupling class " << to_string(verdict.cls) << " (residual " << verdict.residual << ")\n";

  bool pass = true;
  json report{{"class", to_string(verdict.cls)}};
  if (cfg.feedback->classical) {
    const HamiltonianSymbol symbol = build_composite_symbol(*cfg.feedback, model.layout);
    const auto snaps = run_classical_scenario(model.layout, symbol, model.initial, cfg.run);
    for (std::size_t i = 0; i < snaps.size(); ++i) out.field(snapshot_name("plant_classical", i), snaps[i].field);
    report["classical_snapshots"] = snaps.size();
  } else {
    const ScenarioResult res = run_scenario(model.layout, model.hamiltonian, model.plant_hamiltonian,
                                            model.initial, cfg.feedback->run);
    write_scenario_csv(out.dir / "scenario.csv", res.rows);
    out.files.push_back("scenario.csv");
    for (std::size_t i = 0; i < res.plant_snapshots.size(); ++i)
      out.field(snapshot_name("plant_wigner", i), res.plant_snapshots[i].field);
    double square = -1.0, purity_drift = 0.0;
    for (const auto& row : res.rows) {
      square = std::max(square, row.square_error);
      purity_drift = std::max(purity_drift, std::abs(row.plant_purity - res.rows.front().plant_purity));
    }
    if (square >= 0.0) {
      report["commuting_square_error"] = square;
      pass = pass && square <= cfg.report.commuting_square;
    }
    report["plant_purity_drift"] = purity_drift;
    report["min_plant_purity"] = std::min_element(res.rows.begin(), res.rows.end(), [](auto& a, auto& b) {
                                   return a.plant_purity < b.plant_purity;
                                 })->plant_purity;
    if (model.coupling.norm() == 0.0) pass = pass && purity_drift <= cfg.report.purity_drift;
  }
  report["pass"] = pass;
  out.json_file("report.json", report);
  return finish({}, pass, opt, log);
}

struct Check {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass() const { return measured <= threshold; }
};

int cmd_verify(const ScenarioConfig& cfg, const CommandOptions& opt, Outputs& out, std::ostream& log) {
  const PhaseSpaceConfig ps = cfg.phase_space.value_or(PhaseSpaceConfig{1, 64, std::nullopt, RMatrix::Identity(1, 1)});
  const PhaseSpaceSpec spec = build_phase_space(ps);
  const int d = spec.d();
  std::mt19937_64 rng(seed_of(cfg, opt));
  std::vector<DensityOperator> states;
  for (int i = 0; i < cfg.verify.states; ++i) states.push_back(random_mixed_state(spec, rng));

  std::vector<Check> checks;
  double mass = 0.0, bound = 0.0, pairing = 0.0, route = 0.0, roundtrip = 0.0, eta_mass = 0.0, eta_pair = 0.0;
  std::vector<PhasePolynomial> monomials;
  for (int deg = 0; deg <= 4; ++deg)
    for (int a = 0; a <= deg; ++a) {
      std::vector<int> pq(d, 0), pp(d, 0);
      pq[0] = a;
      pp[d - 1] = deg - a;
      monomials.push_back(monomial(pq, pp));
    }
  for (const auto& t : states) {
    const PhaseSpaceField w = wigner_from_density(t);
    mass = std::max(mass, std::abs(w.integral().real() - 1.0));
    bound = std::max(bound, w.real().cwiseAbs().maxCoeff() - std::pow(kPi, -d));
    for (const auto& m : monomials) {
      const HamiltonianSymbol g = HamiltonianSymbol::from_polynomial(m);
      pairing = std::max(pairing, std::abs(pair_expectation(w, g) - expectation(t, g)));
    }
    route = std::max(route, max_abs_diff(wigner_from_weyl_function(weyl_function_samples(t)), w));
    roundtrip = std::max(roundtrip, (inverse_wigner(w).orthonormal() - t.orthonormal()).norm() / t.orthonormal().norm());
    const PhaseSpaceField phi = eta_density(w);
    const HamiltonianSymbol one = HamiltonianSymbol::from_polynomial(PhasePolynomial::constant(2 * static_cast<std::size_t>(d), 1.0));
    eta_mass = std::max(eta_mass, std::abs(pair_expectation(phi, one) - 1.0));
    const HamiltonianSymbol h = HamiltonianSymbol::from_polynomial(harmonic_polynomial(d));
    eta_pair = std::max(eta_pair, std::abs(pair_expectation(phi, h) - expectation(t, h)));
  }
  checks.push_back({"wigner_normalization", mass, 1e-8});
  checks.push_back({"wigner_bound_excess", std::max(bound, 0.0), 1e-8});
  checks.push_back({"symbol_pairing", pairing, 1e-6});
  checks.push_back({"weyl_function_route", route, 1e-6});
  checks.push_back({"inversion_round_trip", roundtrip, 1e-8});
  checks.push_back({"eta_mass", eta_mass, 1e-8});
  checks.push_back({"eta_pairing", eta_pair, 1e-6});

  {
    const PhaseSpaceField w = wigner_from_density(states.front());
    const HamiltonianSymbol h = HamiltonianSymbol::from_polynomial(harmonic_polynomial(d));
    const double k14 = (moyal_rhs(w, make_generator(h, spec, 1)).real() - moyal_rhs(w, make_generator(h, spec, 4)).real())
                           .cwiseAbs().maxCoeff();
    checks.push_back({"quadratic_truncation_exactness", k14, 1e-12});
  }
  {
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    double worst = 0.0;
    const GaussianMeasure& mu = spec.mu();
    for (int i = 0; i < 20; ++i) {
      RVector x(d), h1(d), h2(d);
      for (int k = 0; k < d; ++k) {
        x(k) = u(rng);
        h1(k) = u(rng);
        h2(k) = u(rng);
      }
      const double eps = 1e-3;
      auto f = [&](const RVector& y) { return mu.analytic_density(y); };
      const double fd1 = (-f(x + 2 * eps * h1) + 8 * f(x + eps * h1) - 8 * f(x - eps * h1) + f(x - 2 * eps * h1)) / (12 * eps);
      worst = std::max(worst, std::abs(gaussian_measure_derivative(mu, {h1}, x) - fd1));
      auto g = [&](const RVector& y) {
        return (-f(y + 2 * eps * h2) + 8 * f(y + eps * h2) - 8 * f(y - eps * h2) + f(y - 2 * eps * h2)) / (12 * eps);
      };
      const double fd2 = (-g(x + 2 * eps * h1) + 8 * g(x + eps * h1) - 8 * g(x - eps * h1) + g(x - 2 * eps * h1)) / (12 * eps);
      worst = std::max(worst, std::abs(gaussian_measure_derivative(mu, {h1, h2}, x) - fd2));
    }
    checks.push_back({"wick_formulas", worst, 1e-7});
  }
  {
    const SubsystemLayout layout({level_factor("P1", 3), level_factor("P2", 3), level_factor("C1", 3), level_factor("C2", 3)});
    const CMatrix q = position_operator_levels(3);
    const std::vector<std::string> labels = layout.coupled_labels();
    const CMatrix fb = embed_on(layout, labels, kron_all({q, q}), {"P1", "C1"}) +
                       embed_on(layout, labels, kron_all({q, q}), {"P2", "C2"});
    const CMatrix nofb = embed_on(layout, labels, kron_all({q, q}), {"P1", "C1"});
    const CMatrix gen = kron_all({q, q, q, q});
    const auto v1 = classify_coupling(fb, layout), v2 = classify_coupling(nofb, layout), v3 = classify_coupling(gen, layout);
    const bool ok = v1.cls == CouplingClass::feedback && v2.cls == CouplingClass::no_feedback &&
                    v3.cls == CouplingClass::general;
    checks.push_back({"classifier_family", ok ? std::max(v1.residual, v2.residual) : 1.0, 1e-8});
  }

  json rows = json::array();
  bool pass = true;
  for (const auto& c : checks) {
    rows.push_back({{"name", c.name}, {"measured", c.measured}, {"threshold", c.threshold}, {"pass", c.pass()}});
    log << (c.pass() ? "PASS " : "FAIL ") << c.name << " measured=" << c.measured << " threshold=" << c.threshold << "\n";
    pass = pass && c.pass();
  }
  out.json_file("verify.json", json{{"phase_space", spec_to_json(spec)}, {"checks", rows}, {"pass", pass}});
  return finish({}, pass, opt, log);
}

}  // namespace

std::vector<DensityOperator> oracle_states(const DensityOperator& t0, const HamiltonianSymbol& symbol,
                                           const std::vector<double>& times) {
  const PhaseSpaceSpec& spec = t0.spec();
  std::map<int, CMatrix> hamiltonians;
  auto ham = [&](double t) -> const CMatrix& {
    const int seg = symbol.segment_at(t);
    auto it = hamiltonians.find(seg);
    if (it == hamiltonians.end()) it = hamiltonians.emplace(seg, weyl_quantize(symbol.at(t), spec)).first;
    return it->second;
  };
  std::vector<DensityOperator> out;
  DensityOperator cur = t0;
  double now = 0.0;
  for (double t : times) {
    while (now < t) {
      double next = t;
      for (const auto& seg : symbol.schedule)
        if (seg.t_start > now && seg.t_start < next) next = seg.t_start;
      cur = von_neumann_oracle(cur, ham(now), {next - now}).front();
      now = next;
    }
    out.push_back(cur);
  }
  return out;
}

int run_command(const std::string& command, const ScenarioConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  Outputs out{opt.out_dir.value_or(fs::path(cfg.output.dir)), cfg.output, {}};
  std::error_code ec;
  fs::create_directories(out.dir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create output directory " + out.dir.string());
  int code = kExitError;
  if (command == "transform") code = cmd_transform(cfg, opt, out, log);
  else if (command == "evolve") code = cmd_evolve(cfg, opt, out, log);
  else if (command == "oracle") code = cmd_oracle(cfg, opt, out, log);
  else if (command == "compare") code = cmd_compare(cfg, opt, out, log);
  else if (command == "feedback") code = cmd_feedback(cfg, opt, out, log);
  else if (command == "verify") code = cmd_verify(cfg, opt, out, log);
  else throw Error(ErrorKind::SchemaViolation, "unknown command '" + command + "'");
  TolerancePolicy tol = default_tolerances();
  write_manifest(out.dir, command, cfg.text, tol, out.files);
  return code;
}

}  // namespace phaselab
