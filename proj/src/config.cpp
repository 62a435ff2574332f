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

#include "phaselab/config.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "json.hpp"

namespace phaselab {

using nlohmann::json;

namespace {

std::string join(const std::vector<ConfigViolation>& v) {
  std::string out;
  for (const auto& x : v) out += (out.empty() ? "" : "; ") + x.path + ": " + x.reason;
  return out;
}

class Reader {
 public:
  std::vector<ConfigViolation> violations;

  void fail(const std::string& path, const std::string& reason) { violations.push_back({path, reason}); }

  bool is_object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  void known_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
        fail(path + "/" + it.key(), "unknown key");
  }

  template <typename T>
  std::optional<T> get(const json& obj, const char* key, const std::string& path, bool required = false) {
    const std::string p = path + "/" + key;
    if (!obj.contains(key)) {
      if (required) fail(p, "required");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return fail(p, "expected a boolean"), std::nullopt;
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return fail(p, "expected an integer"), std::nullopt;
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return fail(p, "expected a number"), std::nullopt;
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return fail(p, "expected a string"), std::nullopt;
    }
    return v.get<T>();
  }

  std::optional<RVector> vector(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const json& v = obj.at(key);
    const std::string p = path + "/" + key;
    if (!v.is_array()) return fail(p, "expected an array of numbers"), std::nullopt;
    RVector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) return fail(p + "/" + std::to_string(i), "expected a number"), std::nullopt;
      out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    return out;
  }

  std::optional<std::vector<int>> ints(const json& obj, const char* key, const std::string& path, bool required) {
    const std::string p = path + "/" + key;
    if (!obj.contains(key)) {
      if (required) fail(p, "required");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_array()) return fail(p, "expected an array of integers"), std::nullopt;
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer() || v[i].get<long>() < 0)
        return fail(p + "/" + std::to_string(i), "expected a non-negative integer"), std::nullopt;
      out.push_back(v[i].get<int>());
    }
    return out;
  }

  std::optional<PhaseSpaceConfig> phase_space(const json& j, const std::string& path) {
    if (!is_object(j, path)) return std::nullopt;
    known_keys(j, path, {"d", "n", "L", "B"});
    PhaseSpaceConfig cfg;
    const std::size_t before = violations.size();
    cfg.d = get<int>(j, "d", path).value_or(1);
    cfg.n = get<int>(j, "n", path).value_or(64);
    cfg.half_width = get<double>(j, "L", path);
    if (cfg.d < 1 || cfg.d > 4) fail(path + "/d", "must be between 1 and 4");
    if (cfg.n < 4 || (cfg.n & (cfg.n - 1)) != 0) fail(path + "/n", "must be a power of two, at least 4");
    if (cfg.half_width && !(*cfg.half_width > 0.0)) fail(path + "/L", "must be positive");
    cfg.covariance = RMatrix::Identity(std::max(cfg.d, 1), std::max(cfg.d, 1));
    if (j.contains("B")) {
      const json& b = j.at("B");
      const std::string bp = path + "/B";
      bool ok = b.is_array() && static_cast<int>(b.size()) == cfg.d;
      for (std::size_t i = 0; ok && i < b.size(); ++i) {
        ok = b[i].is_array() && static_cast<int>(b[i].size()) == cfg.d;
        for (std::size_t k = 0; ok && k < b[i].size(); ++k) ok = b[i][k].is_number();
      }
      if (!ok) {
        fail(bp, "expected a d x d array of numbers");
      } else {
        for (int r = 0; r < cfg.d; ++r)
          for (int c = 0; c < cfg.d; ++c) cfg.covariance(r, c) = b[r][c].get<double>();
        const double scale = std::max(1.0, cfg.covariance.cwiseAbs().maxCoeff());
        if ((cfg.covariance - cfg.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
          fail(bp, "covariance is not symmetric");
        else if (Eigen::LLT<RMatrix>(cfg.covariance).info() != Eigen::Success)
          fail(bp, "covariance is not positive definite");
      }
    }
    if (violations.size() != before) return std::nullopt;
    return cfg;
  }

  std::optional<PhasePolynomial> polynomial(const json& j, const std::string& path, int dof) {
    if (!is_object(j, path)) return std::nullopt;
    known_keys(j, path, {"terms"});
    if (!j.contains("terms") || !j.at("terms").is_array()) {
      fail(path + "/terms", "expected an array of terms");
      return std::nullopt;
    }
    PhasePolynomial poly(2 * static_cast<std::size_t>(dof));
    const std::size_t before = violations.size();
    const json& terms = j.at("terms");
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string tp = path + "/terms/" + std::to_string(t);
      if (!is_object(terms[t], tp)) continue;
      known_keys(terms[t], tp, {"powers_q", "powers_p", "coeff"});
      auto pq = ints(terms[t], "powers_q", tp, true);
      auto pp = ints(terms[t], "powers_p", tp, true);
      const double coeff = get<double>(terms[t], "coeff", tp).value_or(1.0);
      if (pq && static_cast<int>(pq->size()) != dof) fail(tp + "/powers_q", "length must be " + std::to_string(dof));
      if (pp && static_cast<int>(pp->size()) != dof) fail(tp + "/powers_p", "length must be " + std::to_string(dof));
      if (pq && pp && static_cast<int>(pq->size()) == dof && static_cast<int>(pp->size()) == dof)
        poly += monomial(*pq, *pp, coeff);
    }
    if (poly.degree() > kMaxSymbolDegree)
      fail(path, "degree " + std::to_string(poly.degree()) + " exceeds " + std::to_string(kMaxSymbolDegree));
    if (violations.size() != before) return std::nullopt;
    return poly;
  }

  StateConfig state(const json& j, const std::string& path) {
    StateConfig s;
    if (!is_object(j, path)) return s;
    known_keys(j, path, {"recipe", "a", "beta", "even", "levels", "rank", "components"});
    s.recipe = get<std::string>(j, "recipe", path).value_or("ground");
    static const std::set<std::string> recipes{"ground", "displaced", "cat", "thermal", "hermite", "random", "product"};
    if (!recipes.count(s.recipe)) fail(path + "/recipe", "unknown recipe '" + s.recipe + "'");
    s.a = vector(j, "a", path).value_or(RVector());
    s.beta = get<double>(j, "beta", path).value_or(1.0);
    if (!(s.beta > 0.0)) fail(path + "/beta", "must be positive");
    s.even = get<bool>(j, "even", path).value_or(true);
    s.levels = ints(j, "levels", path, false).value_or(std::vector<int>{});
    s.rank = get<int>(j, "rank", path).value_or(3);
    if (s.rank < 1) fail(path + "/rank", "must be at least 1");
    if (j.contains("components")) {
      const json& c = j.at("components");
      if (!c.is_array()) fail(path + "/components", "expected an array");
      else
        for (std::size_t i = 0; i < c.size(); ++i)
          s.components.push_back(state(c[i], path + "/components/" + std::to_string(i)));
    }
    if (s.recipe == "product" && s.components.empty()) fail(path + "/components", "product needs components");
    return s;
  }
};

}  // namespace

ConfigError::ConfigError(ErrorKind kind, std::vector<ConfigViolation> violations)
    : Error(kind, join(violations)), violations_(std::move(violations)) {}

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(ErrorKind::SchemaViolation, {{"", std::string("invalid JSON: ") + e.what()}});
  }
  Reader rd;
  ScenarioConfig cfg;
  cfg.text = text;
  if (!rd.is_object(root, "")) throw ConfigError(ErrorKind::SchemaViolation, rd.violations);
  rd.known_keys(root, "", {"version", "phase_space", "hamiltonian", "initial_state", "run", "output",
                           "tolerances", "feedback", "verify", "seed"});
  if (!root.contains("version") || !root.at("version").is_string()) {
    rd.fail("/version", "required string");
  } else if (root.at("version").get<std::string>() != kConfigVersion) {
    throw ConfigError(ErrorKind::UnknownVersion,
                      {{"/version", "unsupported version '" + root.at("version").get<std::string>() + "'"}});
  }
  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned()) rd.fail("/seed", "expected a non-negative integer");
    else cfg.seed = root.at("seed").get<std::uint64_t>();
  }

  if (root.contains("phase_space")) cfg.phase_space = rd.phase_space(root.at("phase_space"), "/phase_space");
  const int d = cfg.phase_space ? cfg.phase_space->d : 1;

  if (root.contains("hamiltonian")) {
    const json& h = root.at("hamiltonian");
    if (!root.contains("phase_space")) rd.fail("/hamiltonian", "needs a phase_space section");
    if (rd.is_object(h, "/hamiltonian")) {
      rd.known_keys(h, "/hamiltonian", {"terms", "schedule"});
      json body{{"terms", h.value("terms", json::array())}};
      if (auto p = rd.polynomial(body, "/hamiltonian", d)) {
        cfg.hamiltonian = *p;
        cfg.has_hamiltonian = true;
      }
      if (h.contains("schedule")) {
        const json& s = h.at("schedule");
        if (!s.is_array()) rd.fail("/hamiltonian/schedule", "expected an array");
        else
          for (std::size_t i = 0; i < s.size(); ++i) {
            const std::string sp = "/hamiltonian/schedule/" + std::to_string(i);
            if (!rd.is_object(s[i], sp)) continue;
            rd.known_keys(s[i], sp, {"t_start", "terms"});
            const double t0 = rd.get<double>(s[i], "t_start", sp, true).value_or(0.0);
            if (i > 0 && !cfg.schedule.empty() && t0 <= cfg.schedule.back().t_start)
              rd.fail(sp + "/t_start", "segments must start at increasing times");
            json seg{{"terms", s[i].value("terms", json::array())}};
            if (auto p = rd.polynomial(seg, sp, d)) cfg.schedule.push_back({t0, *p});
          }
      }
    }
  }

  if (root.contains("initial_state")) cfg.initial_state = rd.state(root.at("initial_state"), "/initial_state");

  if (root.contains("run")) {
    const json& r = root.at("run");
    if (rd.is_object(r, "/run")) {
      rd.known_keys(r, "/run", {"dt", "t_end", "stride", "K", "scheme", "dt_guard", "classical"});
      cfg.run.dt = rd.get<double>(r, "dt", "/run").value_or(1e-3);
      cfg.run.t_end = rd.get<double>(r, "t_end", "/run").value_or(1.0);
      cfg.run.stride = rd.get<int>(r, "stride", "/run").value_or(1);
      cfg.run.K = rd.get<int>(r, "K", "/run").value_or(3);
      cfg.run.allow_large_step = !rd.get<bool>(r, "dt_guard", "/run").value_or(true);
      cfg.run.classical = rd.get<bool>(r, "classical", "/run").value_or(false);
      const std::string scheme = rd.get<std::string>(r, "scheme", "/run").value_or("spectral");
      if (scheme == "spectral" || scheme == "finite_difference_4th") cfg.run.scheme = derivative_scheme_from_string(scheme);
      else rd.fail("/run/scheme", "unknown derivative scheme '" + scheme + "'");
      if (!(cfg.run.dt > 0.0)) rd.fail("/run/dt", "must be positive");
      if (cfg.run.t_end < 0.0) rd.fail("/run/t_end", "must be non-negative");
      if (cfg.run.stride < 1) rd.fail("/run/stride", "must be at least 1");
      if (cfg.run.K < 1) rd.fail("/run/K", "must be at least 1");
    }
  }

  if (root.contains("output")) {
    const json& o = root.at("output");
    if (rd.is_object(o, "/output")) {
      rd.known_keys(o, "/output", {"dir", "formats", "plot"});
      cfg.output.dir = rd.get<std::string>(o, "dir", "/output").value_or(cfg.output.dir);
      cfg.output.plot = rd.get<bool>(o, "plot", "/output").value_or(false);
      if (o.contains("formats")) {
        const json& f = o.at("formats");
        cfg.output.csv = cfg.output.binary = false;
        if (!f.is_array()) rd.fail("/output/formats", "expected an array");
        else
          for (std::size_t i = 0; i < f.size(); ++i) {
            const std::string name = f[i].is_string() ? f[i].get<std::string>() : "";
            if (name == "csv") cfg.output.csv = true;
            else if (name == "binary") cfg.output.binary = true;
            else rd.fail("/output/formats/" + std::to_string(i), "expected \"csv\" or \"binary\"");
          }
      }
    }
  }

  if (root.contains("tolerances")) {
    const json& t = root.at("tolerances");
    if (rd.is_object(t, "/tolerances")) {
      rd.known_keys(t, "/tolerances", {"compare_max_abs", "mass_drift", "normalization", "commuting_square", "purity_drift"});
      auto& r = cfg.report;
      r.compare_max_abs = rd.get<double>(t, "compare_max_abs", "/tolerances").value_or(r.compare_max_abs);
      r.mass_drift = rd.get<double>(t, "mass_drift", "/tolerances").value_or(r.mass_drift);
      r.normalization = rd.get<double>(t, "normalization", "/tolerances").value_or(r.normalization);
      r.commuting_square = rd.get<double>(t, "commuting_square", "/tolerances").value_or(r.commuting_square);
      r.purity_drift = rd.get<double>(t, "purity_drift", "/tolerances").value_or(r.purity_drift);
    }
  }

  if (root.contains("verify")) {
    const json& v = root.at("verify");
    if (rd.is_object(v, "/verify")) {
      rd.known_keys(v, "/verify", {"states"});
      cfg.verify.states = rd.get<int>(v, "states", "/verify").value_or(5);
      if (cfg.verify.states < 1) rd.fail("/verify/states", "must be at least 1");
    }
  }

  if (root.contains("feedback")) {
    const json& f = root.at("feedback");
    if (rd.is_object(f, "/feedback")) {
      rd.known_keys(f, "/feedback", {"subsystems", "terms", "initial_state", "run"});
      FeedbackConfig fb;
      std::map<std::string, int> dof;
      static const std::set<std::string> roles{"P1", "P2", "C1", "C2", "E"};
      const json subs = f.value("subsystems", json::array());
      if (!subs.is_array() || subs.empty()) rd.fail("/feedback/subsystems", "expected a non-empty array");
      for (std::size_t i = 0; subs.is_array() && i < subs.size(); ++i) {
        const std::string sp = "/feedback/subsystems/" + std::to_string(i);
        if (!rd.is_object(subs[i], sp)) continue;
        rd.known_keys(subs[i], sp, {"label", "levels", "grid"});
        SubsystemConfig sc;
        sc.label = rd.get<std::string>(subs[i], "label", sp, true).value_or("");
        if (!sc.label.empty() && !roles.count(sc.label)) rd.fail(sp + "/label", "unknown role '" + sc.label + "'");
        if (dof.count(sc.label)) rd.fail(sp + "/label", "duplicate label '" + sc.label + "'");
        if (subs[i].contains("grid")) {
          sc.grid = rd.phase_space(subs[i].at("grid"), sp + "/grid");
          dof[sc.label] = sc.grid ? sc.grid->d : 1;
        } else {
          const int levels = rd.get<int>(subs[i], "levels", sp).value_or(4);
          if (levels < 2) rd.fail(sp + "/levels", "must be at least 2");
          sc.levels = static_cast<std::size_t>(std::max(levels, 2));
          dof[sc.label] = 1;
        }
        fb.subsystems.push_back(sc);
      }
      for (const char* need : {"P1", "C1"})
        if (!dof.count(need)) rd.fail("/feedback/subsystems", std::string("missing required subsystem ") + need);

      const json terms = f.value("terms", json::array());
      if (!terms.is_array()) rd.fail("/feedback/terms", "expected an array");
      for (std::size_t i = 0; terms.is_array() && i < terms.size(); ++i) {
        const std::string tp = "/feedback/terms/" + std::to_string(i);
        if (!rd.is_object(terms[i], tp)) continue;
        rd.known_keys(terms[i], tp, {"kind", "support", "polynomials", "coeff"});
        FeedbackTermConfig t;
        t.kind = rd.get<std::string>(terms[i], "kind", tp, true).value_or("");
        static const std::set<std::string> kinds{"plant", "controller", "coupling", "perturbation"};
        if (!t.kind.empty() && !kinds.count(t.kind)) rd.fail(tp + "/kind", "unknown kind '" + t.kind + "'");
        t.coeff = rd.get<double>(terms[i], "coeff", tp).value_or(1.0);
        const json support = terms[i].value("support", json::array());
        const json polys = terms[i].value("polynomials", json::array());
        if (!support.is_array() || support.empty()) rd.fail(tp + "/support", "expected a non-empty array of labels");
        if (!polys.is_array() || polys.size() != support.size())
          rd.fail(tp + "/polynomials", "needs one polynomial per support label");
        bool ok = support.is_array() && polys.is_array() && polys.size() == support.size();
        for (std::size_t k = 0; support.is_array() && k < support.size(); ++k) {
          const std::string label = support[k].is_string() ? support[k].get<std::string>() : "";
          if (!dof.count(label)) {
            rd.fail(tp + "/support/" + std::to_string(k), "undefined subsystem label '" + label + "'");
            ok = false;
            continue;
          }
          t.support.push_back(label);
          const bool plant = label[0] == 'P', ctrl = label[0] == 'C';
          if ((t.kind == "plant" && !plant) || (t.kind == "controller" && !ctrl) ||
              (t.kind == "coupling" && label == "E"))
            rd.fail(tp + "/support/" + std::to_string(k), "label '" + label + "' not allowed in a " + t.kind + " term");
          if (ok) {
            auto p = rd.polynomial(polys[k], tp + "/polynomials/" + std::to_string(k), dof[label]);
            if (p) t.polynomials.push_back(*p);
            else ok = false;
          }
        }
        if (ok) fb.terms.push_back(t);
      }

      if (f.contains("initial_state")) {
        const json& s = f.at("initial_state");
        if (rd.is_object(s, "/feedback/initial_state"))
          for (auto it = s.begin(); it != s.end(); ++it) {
            if (!dof.count(it.key())) rd.fail("/feedback/initial_state/" + it.key(), "undefined subsystem label '" + it.key() + "'");
            fb.initial_state[it.key()] = rd.state(it.value(), "/feedback/initial_state/" + it.key());
          }
      }
      if (f.contains("run")) {
        const json& r = f.at("run");
        if (rd.is_object(r, "/feedback/run")) {
          rd.known_keys(r, "/feedback/run", {"dt", "t_end", "stride", "plant_wigner", "commuting_square", "classical"});
          fb.classical = rd.get<bool>(r, "classical", "/feedback/run").value_or(false);
          fb.run.dt = rd.get<double>(r, "dt", "/feedback/run").value_or(fb.run.dt);
          fb.run.t_end = rd.get<double>(r, "t_end", "/feedback/run").value_or(fb.run.t_end);
          fb.run.stride = rd.get<int>(r, "stride", "/feedback/run").value_or(fb.run.stride);
          fb.run.plant_wigner = rd.get<bool>(r, "plant_wigner", "/feedback/run").value_or(true);
          fb.run.commuting_square = rd.get<bool>(r, "commuting_square", "/feedback/run").value_or(true);
          if (!(fb.run.dt > 0.0)) rd.fail("/feedback/run/dt", "must be positive");
          if (fb.run.t_end < 0.0) rd.fail("/feedback/run/t_end", "must be non-negative");
          if (fb.run.stride < 1) rd.fail("/feedback/run/stride", "must be at least 1");
        }
      }
      cfg.feedback = fb;
    }
  }

  if (!rd.violations.empty()) throw ConfigError(ErrorKind::SchemaViolation, rd.violations);
  return cfg;
}

PhaseSpaceSpec build_phase_space(const PhaseSpaceConfig& cfg) {
  return make_phase_space(cfg.d, cfg.n, cfg.half_width.value_or(balanced_half_width(cfg.n)), cfg.covariance);
}

HamiltonianSymbol build_symbol(const ScenarioConfig& cfg) {
  if (!cfg.has_hamiltonian) throw Error(ErrorKind::SchemaViolation, "config has no hamiltonian section");
  HamiltonianSymbol h = HamiltonianSymbol::from_polynomial(cfg.hamiltonian);
  h.schedule = cfg.schedule;
  return h;
}

namespace {

RVector slice(const RVector& a, Eigen::Index offset, int d) {
  RVector v = RVector::Zero(d);
  for (int i = 0; i < d && offset + i < a.size(); ++i) v(i) = a(offset + i);
  return v;
}

}  // namespace

DensityOperator build_state(const StateConfig& cfg, const PhaseSpaceSpec& spec, std::uint64_t seed) {
  const int d = spec.d();
  if (cfg.recipe == "ground") return pure_density(hermite_state(spec, std::vector<int>(d, 0)));
  if (cfg.recipe == "hermite") {
    std::vector<int> levels = cfg.levels;
    levels.resize(d, 0);
    return pure_density(hermite_state(spec, levels));
  }
  if (cfg.recipe == "displaced") return pure_density(displaced_state(spec, slice(cfg.a, 0, d), slice(cfg.a, d, d)));
  if (cfg.recipe == "cat") return pure_density(cat_state(spec, slice(cfg.a, 0, d), cfg.even));
  if (cfg.recipe == "thermal") return thermal_state(spec, cfg.beta);
  if (cfg.recipe == "random") {
    std::mt19937_64 rng(seed);
    return random_mixed_state(spec, rng, cfg.rank);
  }
  if (cfg.recipe == "product") {
    if (static_cast<int>(cfg.components.size()) != d)
      throw Error(ErrorKind::SchemaViolation, "product recipe needs one component per axis");
    std::optional<DensityOperator> out;
    for (int i = 0; i < d; ++i) {
      const PhaseSpaceSpec ai = make_phase_space(1, spec.n(), spec.half_width(),
                                                 spec.covariance().block(i, i, 1, 1));
      DensityOperator part = build_state(cfg.components[static_cast<std::size_t>(i)], ai, seed + static_cast<std::uint64_t>(i));
      out = out ? tensor(*out, part) : part;
    }
    return DensityOperator::from_orthonormal(spec, out->orthonormal());
  }
  throw Error(ErrorKind::SchemaViolation, "unknown state recipe '" + cfg.recipe + "'");
}

FeedbackModel build_feedback_model(const FeedbackConfig& cfg) {
  std::vector<Factor> factors;
  for (const auto& s : cfg.subsystems)
    factors.push_back(s.grid ? grid_factor(s.label, build_phase_space(*s.grid)) : level_factor(s.label, s.levels));
  FeedbackModel m;
  m.layout = SubsystemLayout(factors);
  const auto& layout = m.layout;
  std::vector<std::string> all;
  for (const auto& f : layout.factors()) all.push_back(f.label);
  auto dim_of = [&](const std::vector<std::string>& labels) {
    std::size_t n = 1;
    for (const auto& l : labels) n *= layout.factor(l).dim;
    return n;
  };
  const auto plant = layout.plant_labels(), ctrl = layout.controller_labels(), coupled = layout.coupled_labels();
  m.plant_hamiltonian = CMatrix::Zero(dim_of(plant), dim_of(plant));
  m.controller_hamiltonian = CMatrix::Zero(dim_of(ctrl), dim_of(ctrl));
  m.coupling = CMatrix::Zero(dim_of(coupled), dim_of(coupled));
  CMatrix perturbation = CMatrix::Zero(layout.total_dim(), layout.total_dim());
  for (const auto& t : cfg.terms) {
    std::vector<CMatrix> parts;
    for (std::size_t k = 0; k < t.support.size(); ++k)
      parts.push_back(factor_operator(layout.factor(t.support[k]), t.polynomials[k]));
    const CMatrix op = t.coeff * kron_all(parts);
    if (t.kind == "plant") m.plant_hamiltonian += embed_on(layout, plant, op, t.support);
    else if (t.kind == "controller") m.controller_hamiltonian += embed_on(layout, ctrl, op, t.support);
    else if (t.kind == "coupling") m.coupling += embed_on(layout, coupled, op, t.support);
    else perturbation += embed_on(layout, all, op, t.support);
  }
  m.hamiltonian = build_general_hamiltonian(m.plant_hamiltonian, m.controller_hamiltonian, m.coupling, layout) + perturbation;
  std::vector<CMatrix> states;
  for (const auto& f : layout.factors()) {
    auto it = cfg.initial_state.find(f.label);
    const StateConfig sc = it == cfg.initial_state.end() ? StateConfig{} : it->second;
    StateRecipe r;
    r.kind = sc.recipe;
    r.a = sc.a;
    r.beta = sc.beta;
    r.even = sc.even;
    states.push_back(recipe_state(f, r));
  }
  m.initial = kron_all(states);
  return m;
}

HamiltonianSymbol build_composite_symbol(const FeedbackConfig& cfg, const SubsystemLayout& layout) {
  std::map<std::string, int> offset;
  int total = 0;
  for (const auto& f : layout.factors()) {
    offset[f.label] = total;
    total += factor_dof(f);
  }
  const std::size_t vars = 2 * static_cast<std::size_t>(total);
  PhasePolynomial sum(vars);
  for (const auto& t : cfg.terms) {
    PhasePolynomial term = PhasePolynomial::constant(vars, t.coeff);
    for (std::size_t k = 0; k < t.support.size(); ++k) {
      const int dof = factor_dof(layout.factor(t.support[k]));
      const int off = offset.at(t.support[k]);
      PhasePolynomial lifted(vars);
      for (const auto& [e, c] : t.polynomials[k].terms()) {
        std::vector<int> full(vars, 0);
        for (int i = 0; i < dof; ++i) {
          full[static_cast<std::size_t>(off + i)] = e[static_cast<std::size_t>(i)];
          full[static_cast<std::size_t>(total + off + i)] = e[static_cast<std::size_t>(dof + i)];
        }
        lifted.add_term(full, c);
      }
      term = term * lifted;
    }
    sum += term;
  }
  return HamiltonianSymbol::from_polynomial(sum);
}

}  // namespace phaselab
