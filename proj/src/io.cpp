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

#include "phaselab/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace phaselab {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + path.parent_path().string());
  }
  std::ofstream out(path, mode);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::IoFailure, "failed writing " + path.string());
}

FieldRole role_from_string(const std::string& s) {
  for (auto r : {FieldRole::wigner_measure_density, FieldRole::eta_density, FieldRole::symbol,
                 FieldRole::weyl_function_samples})
    if (s == to_string(r)) return r;
  throw Error(ErrorKind::SchemaViolation, "unknown field role '" + s + "'");
}

}  // namespace

json spec_to_json(const PhaseSpaceSpec& spec) {
  json b = json::array();
  for (Eigen::Index i = 0; i < spec.covariance().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < spec.covariance().cols(); ++j) row.push_back(spec.covariance()(i, j));
    b.push_back(row);
  }
  return json{{"d", spec.d()}, {"n", spec.n()}, {"L", spec.half_width()}, {"B", b}};
}

json tolerances_to_json(const TolerancePolicy& tol) {
  return json{{"covariance_symmetry", tol.covariance_symmetry},
              {"domain_tail_mass", tol.domain_tail_mass},
              {"measure_quadrature", tol.measure_quadrature},
              {"hermiticity", tol.hermiticity},
              {"trace", tol.trace},
              {"psd_floor", tol.psd_floor},
              {"state_norm", tol.state_norm},
              {"underflow_floor", tol.underflow_floor},
              {"underflow_signal", tol.underflow_signal},
              {"normalization", tol.normalization},
              {"resolved_density_ratio", tol.resolved_density_ratio},
              {"boundary_mass", tol.boundary_mass},
              {"step_mass_drift", tol.step_mass_drift},
              {"classifier_residual", tol.classifier_residual},
              {"classifier_nonscalar", tol.classifier_nonscalar}};
}

void write_field_csv(const fs::path& path, const PhaseSpaceField& field) {
  auto out = open_out(path);
  const Grid& g = field.spec.grid();
  const int d = field.spec.d();
  for (int i = 0; i < d; ++i) out << "q" << i << ",";
  for (int i = 0; i < d; ++i) out << "p" << i << ",";
  out << "value\n";
  const std::size_t N = field.spec.dim();
  for (std::size_t r = 0; r < N; ++r) {
    const RVector q = g.position(r);
    for (std::size_t c = 0; c < N; ++c) {
      const RVector p = g.momentum(c);
      for (int i = 0; i < d; ++i) out << fmt(q(i)) << ",";
      for (int i = 0; i < d; ++i) out << fmt(p(i)) << ",";
      out << fmt(field.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)).real()) << "\n";
    }
  }
  finish(out, path);
}

void write_field_binary(const fs::path& base, const PhaseSpaceField& field) {
  static_assert(std::endian::native == std::endian::little, "binary snapshots assume a little-endian host");
  fs::path bin = base;
  bin += ".bin";
  auto out = open_out(bin, std::ios::out | std::ios::binary);
  const Eigen::Index rows = field.values.rows(), cols = field.values.cols();
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Complex v = field.values(r, c);
      const double parts[2] = {v.real(), v.imag()};
      out.write(reinterpret_cast<const char*>(parts), sizeof(parts));
    }
  finish(out, bin);
  fs::path side = base;
  side += ".json";
  write_json(side, json{{"format", "complex128-le-row-major"},
                        {"rows", rows},
                        {"cols", cols},
                        {"role", to_string(field.role)},
                        {"reference", to_string(field.reference)},
                        {"phase_space", spec_to_json(field.spec)},
                        {"version", kVersion}});
}

PhaseSpaceField read_field_binary(const fs::path& base) {
  fs::path side = base;
  side += ".json";
  const json meta = json::parse(read_text(side));
  const auto& ps = meta.at("phase_space");
  const int d = ps.at("d");
  RMatrix b(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) b(i, j) = ps.at("B").at(i).at(j);
  const PhaseSpaceSpec spec = make_phase_space(d, ps.at("n"), ps.at("L"), b);
  const Eigen::Index rows = meta.at("rows"), cols = meta.at("cols");
  fs::path bin = base;
  bin += ".bin";
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + bin.string());
  CMatrix values(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      double parts[2];
      in.read(reinterpret_cast<char*>(parts), sizeof(parts));
      values(r, c) = Complex(parts[0], parts[1]);
    }
  if (!in) throw Error(ErrorKind::IoFailure, "truncated snapshot " + bin.string());
  const std::string ref = meta.at("reference");
  return PhaseSpaceField{spec, role_from_string(meta.at("role")),
                         ref == "lebesgue" ? ReferenceMeasure::lebesgue : ReferenceMeasure::mu_otimes_nu,
                         values};
}

void write_diagnostics_csv(const fs::path& path, const std::vector<DiagnosticsRow>& rows) {
  auto out = open_out(path);
  out << "t,mass,l2,energy,min_w,purity_est\n";
  for (const auto& r : rows)
    out << fmt(r.t) << "," << fmt(r.mass) << "," << fmt(r.l2) << "," << fmt(r.energy) << ","
        << fmt(r.min_w) << "," << fmt(r.purity_est) << "\n";
  finish(out, path);
}

void write_scenario_csv(const fs::path& path, const std::vector<ScenarioRow>& rows) {
  auto out = open_out(path);
  out << "t,plant_purity,plant_energy,square_error\n";
  for (const auto& r : rows)
    out << fmt(r.t) << "," << fmt(r.plant_purity) << "," << fmt(r.plant_energy) << ","
        << fmt(r.square_error) << "\n";
  finish(out, path);
}

void write_gnuplot_script(const fs::path& path, const std::string& csv_name, const std::string& title) {
  auto out = open_out(path);
  out << "set datafile separator ','\n"
      << "set title '" << title << "'\n"
      << "set xlabel 'q'\nset ylabel 'p'\n"
      << "set view map\nset pm3d at b\nunset surface\n"
      << "set palette defined (-1 'blue', 0 'white', 1 'red')\n"
      << "set terminal pngcairo size 800,700\n"
      << "set output '" << fs::path(csv_name).replace_extension(".png").string() << "'\n"
      << "splot '" << csv_name << "' every ::1 using 1:2:3 with pm3d notitle\n";
  finish(out, path);
}

void write_json(const fs::path& path, const json& value) {
  auto out = open_out(path);
  out << value.dump(2) << "\n";
  finish(out, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_manifest(const fs::path& dir, const std::string& command, const std::string& config_text,
                    const TolerancePolicy& tol, const std::vector<std::string>& files) {
  write_json(dir / "manifest.json", json{{"tool", "phaselab"},
                                         {"version", kVersion},
                                         {"command", command},
                                         {"config_hash", "fnv1a64:" + hex64(fnv1a(config_text))},
                                         {"tolerances", tolerances_to_json(tol)},
                                         {"files", files}});
}

}  // namespace phaselab
