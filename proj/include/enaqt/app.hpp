// Copyright 2026 The enaqt Authors
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

#pragma once

// Run configuration, model files, and the command implementations behind the
// `enaqt` CLI. Kept in the library so the test suites drive exactly what the
// binary runs.

#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "enaqt/circuit.hpp"
#include "enaqt/core.hpp"
#include "enaqt/fmo.hpp"
#include "enaqt/kernel.hpp"
#include "enaqt/lindblad.hpp"

namespace enaqt::app {

using nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

enum class Backend { Operator, Circuit, LindbladOracle };

inline std::string to_string(Backend b) {
  switch (b) {
    case Backend::Operator: return "operator";
    case Backend::Circuit: return "circuit";
    case Backend::LindbladOracle: return "lindblad-oracle";
  }
  return "operator";
}

inline Backend parse_backend(const std::string& s) {
  if (s == "operator") return Backend::Operator;
  if (s == "circuit") return Backend::Circuit;
  if (s == "lindblad-oracle") return Backend::LindbladOracle;
  throw ConfigError("backend: expected operator, circuit or lindblad-oracle, got '" + s + "'");
}

struct ModelFile {
  std::string path;
  std::string name;
  fmo::HamiltonianSpec hamiltonian;
  fmo::BathSpec bath;
  /// 0-based.
  std::set<int> sink_sites;
  std::string raw;
};

namespace detail {

inline std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFileError(std::string(what) + ": cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline json parse_json(const std::string& text, const std::string& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelFileError(path + ": JSON syntax error at " + line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": " +
                         e.what());
  }
}

inline double number(const json& j, const std::string& field, const std::string& path) {
  if (!j.is_number()) throw ModelFileError(path + ": field '" + field + "' must be a number");
  return j.get<double>();
}

inline RealMatrix square_matrix(const json& j, const std::string& field, Eigen::Index n, const std::string& path) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
    throw ModelFileError(path + ": field '" + field + "' must be a " + std::to_string(n) + "x" + std::to_string(n) +
                         " matrix");
  RealMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw ModelFileError(path + ": field '" + field + "' row " + std::to_string(r + 1) + " must have " +
                           std::to_string(n) + " entries");
    for (Eigen::Index c = 0; c < n; ++c)
      m(r, c) = number(row[static_cast<std::size_t>(c)],
                       field + "[" + std::to_string(r + 1) + "][" + std::to_string(c + 1) + "]", path);
  }
  return m;
}

}  // namespace detail

inline ModelFile parse_model(const std::string& text, const std::string& path) {
  const json j = detail::parse_json(text, path);
  if (!j.is_object()) throw ModelFileError(path + ": top level must be an object");
  ModelFile model;
  model.path = path;
  model.raw = text;
  model.name = j.value("name", std::string("unnamed"));

  if (!j.contains("site_energies_cm1") || !j["site_energies_cm1"].is_array())
    throw ModelFileError(path + ": missing array field 'site_energies_cm1'");
  for (std::size_t k = 0; k < j["site_energies_cm1"].size(); ++k)
    model.hamiltonian.site_energies_cm1.push_back(
        detail::number(j["site_energies_cm1"][k], "site_energies_cm1[" + std::to_string(k + 1) + "]", path));
  const auto n = model.hamiltonian.n_sites();
  if (n < 2) throw ModelFileError(path + ": 'site_energies_cm1' needs at least two sites");
  if (!j.contains("couplings_cm1")) throw ModelFileError(path + ": missing field 'couplings_cm1'");
  model.hamiltonian.couplings_cm1 = detail::square_matrix(j["couplings_cm1"], "couplings_cm1", n, path);
  try {
    model.hamiltonian.validate();
  } catch (const SpecInvalid& e) {
    throw ModelFileError(path + ": " + e.what());
  }

  if (!j.contains("bath") || !j["bath"].is_object()) throw ModelFileError(path + ": missing object field 'bath'");
  const json& b = j["bath"];
  if (b.contains("temperature_k")) model.bath.temperature_k = detail::number(b["temperature_k"], "bath.temperature_k", path);
  if (b.contains("rates_per_fs")) {
    model.bath.source = detail::square_matrix(b["rates_per_fs"], "bath.rates_per_fs", n, path);
  } else if (b.contains("lambda_cm1") && b.contains("omega_c_cm1")) {
    model.bath.source = fmo::OhmicBath{detail::number(b["lambda_cm1"], "bath.lambda_cm1", path),
                                       detail::number(b["omega_c_cm1"], "bath.omega_c_cm1", path)};
  } else {
    throw ModelFileError(path + ": 'bath' needs either 'rates_per_fs' or both 'lambda_cm1' and 'omega_c_cm1'");
  }
  const std::string uphill = b.value("uphill", std::string("detailed_balance"));
  if (uphill == "detailed_balance") model.bath.uphill = fmo::UphillRates::DetailedBalance;
  else if (uphill == "none") model.bath.uphill = fmo::UphillRates::None;
  else throw ModelFileError(path + ": 'bath.uphill' must be 'detailed_balance' or 'none'");
  model.bath.overlap_weighting = b.value("overlap_weighting", true);
  try {
    model.bath.validate();
  } catch (const SpecInvalid& e) {
    throw ModelFileError(path + ": " + e.what());
  }

  if (!j.contains("sink_sites") || !j["sink_sites"].is_array())
    throw ModelFileError(path + ": missing array field 'sink_sites'");
  for (const json& s : j["sink_sites"]) {
    if (!s.is_number_integer() || s.get<int>() < 1 || s.get<int>() > n)
      throw ModelFileError(path + ": 'sink_sites' entries must be site numbers in [1, " + std::to_string(n) + "]");
    model.sink_sites.insert(s.get<int>() - 1);
  }
  return model;
}

inline ModelFile load_model(const std::string& path) { return parse_model(detail::read_file(path, "model"), path); }

struct RunConfig {
  std::string model_path;
  int initial_site = 1;  ///< 1-based
  double dt_fs = 10.0;
  int steps = 400;
  double chi = 1.0;
  /// Overrides the model's bath temperature when set (> 0).
  double temperature_k = 0.0;
  Backend backend = Backend::Operator;
  bool renormalize = false;
  std::string out;

  void validate(int n_sites) const {
    if (initial_site < 1 || initial_site > n_sites)
      throw ConfigError("initial_site must lie in [1, " + std::to_string(n_sites) + "]");
    if (!(dt_fs > 0.0)) throw ConfigError("dt_fs must be > 0");
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (!(chi >= 0.0 && chi <= 1.0)) throw ConfigError("chi must lie in [0, 1]");
    if (temperature_k < 0.0) throw ConfigError("temperature_k must be > 0 when given");
  }

  json to_json() const {
    json j;
    j["model"] = model_path;
    j["initial_site"] = initial_site;
    j["dt_fs"] = dt_fs;
    j["steps"] = steps;
    j["chi"] = chi;
    if (temperature_k > 0.0) j["temperature_k"] = temperature_k;
    j["backend"] = to_string(backend);
    j["renormalize"] = renormalize;
    return j;
  }
};

namespace detail {

template <typename T>
T typed(const json& j, const char* field) {
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + field + "' has the wrong type");
  }
}

}  // namespace detail

/// `base_dir` resolves a relative model path. The returned model path is absolute.
inline RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> known = {"model", "initial_site", "dt_fs", "steps", "chi",
                                              "temperature_k", "backend", "renormalize", "out"};
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw ConfigError("config: unknown field '" + key + "'");
  RunConfig cfg;
  if (!j.contains("model")) throw ConfigError("config: missing field 'model'");
  std::filesystem::path model = detail::typed<std::string>(j, "model");
  if (model.is_relative()) model = base_dir / model;
  cfg.model_path = std::filesystem::weakly_canonical(model).string();
  if (j.contains("initial_site")) cfg.initial_site = detail::typed<int>(j, "initial_site");
  if (j.contains("dt_fs")) cfg.dt_fs = detail::typed<double>(j, "dt_fs");
  if (j.contains("steps")) cfg.steps = detail::typed<int>(j, "steps");
  if (j.contains("chi")) cfg.chi = detail::typed<double>(j, "chi");
  if (j.contains("temperature_k")) cfg.temperature_k = detail::typed<double>(j, "temperature_k");
  if (j.contains("backend")) cfg.backend = parse_backend(detail::typed<std::string>(j, "backend"));
  if (j.contains("renormalize")) cfg.renormalize = detail::typed<bool>(j, "renormalize");
  if (j.contains("out")) cfg.out = detail::typed<std::string>(j, "out");
  return cfg;
}

/// Reads a run config (JSON), or the `# config=` line echoed at the top of a
/// trajectory CSV written by `simulate`.
inline RunConfig load_run_config(const std::string& path) {
  std::string text;
  try {
    text = detail::read_file(path, "config");
  } catch (const ModelFileError& e) {
    throw ConfigError(e.what());
  }
  const auto base = std::filesystem::absolute(path).parent_path();
  if (!text.empty() && text[0] == '#') {
    std::istringstream in(text);
    for (std::string line; std::getline(in, line) && !line.empty() && line[0] == '#';) {
      const std::string tag = "# config=";
      if (line.rfind(tag, 0) == 0) {
        try {
          return run_config_from_json(json::parse(line.substr(tag.size())), base);
        } catch (const json::parse_error& e) {
          throw ConfigError(path + ": embedded config is not valid JSON: " + e.what());
        }
      }
    }
    throw ConfigError(path + ": no '# config=' line in the output header");
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": JSON syntax error at " +
                      detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  return run_config_from_json(j, base);
}

/// Everything a run needs, derived once from the config and the model.
struct Setup {
  RunConfig config;
  ModelFile model;
  fmo::ExcitonBasis basis;
  RealMatrix rates_per_fs;
  JumpRates gamma;
  Matrix unitary;  ///< exciton basis, diagonal
  EvolutionOperators ops;
  std::vector<Matrix> projectors;
  Matrix rho0;  ///< exciton basis
};

inline Setup prepare(const RunConfig& cfg) {
  Setup s;
  s.config = cfg;
  s.model = load_model(cfg.model_path);
  cfg.validate(static_cast<int>(s.model.hamiltonian.n_sites()));
  if (cfg.temperature_k > 0.0) s.model.bath.temperature_k = cfg.temperature_k;
  s.basis = fmo::exciton_basis(fmo::site_hamiltonian(s.model.hamiltonian));
  s.rates_per_fs = fmo::rate_matrix_per_fs(s.basis, s.model.bath);
  s.gamma = JumpRates::from_rates(s.rates_per_fs, cfg.dt_fs);
  s.unitary = mat_exp_unitary(s.basis.hamiltonian(), cfg.dt_fs);
  s.ops = build_evolution_operators(s.gamma, s.unitary);
  s.projectors = fmo::site_projectors(s.basis);
  s.rho0 = fmo::localized_state(s.basis, cfg.initial_site - 1);
  return s;
}

inline LindbladModel exciton_lindblad_model(const Setup& s, double chi) {
  return LindbladModel::from_rate_matrix(s.basis.hamiltonian(), chi * s.rates_per_fs);
}

inline constexpr int kOracleRefine = 10;

inline Trajectory simulate(const Setup& s) {
  const RunConfig& cfg = s.config;
  const auto steps = static_cast<std::size_t>(cfg.steps);
  switch (cfg.backend) {
    case Backend::Operator: {
      StepConfig sc{cfg.dt_fs, cfg.chi, cfg.renormalize};
      return evolve_trajectory(DensityMatrix::trusted(s.rho0), s.ops, sc, steps, s.projectors);
    }
    case Backend::Circuit: {
      if (cfg.chi != 1.0) throw ConfigError("the circuit backend compiles the chi = 1 step only");
      const auto layout = circuit::QubitLayout::for_dim(static_cast<int>(s.basis.dim()));
      const auto gates = circuit::build_step_circuit(s.gamma, s.unitary, layout);
      return run_trajectory(s.rho0, cfg.dt_fs, steps, s.projectors,
                            [&](const Matrix& rho) { return circuit::circuit_map(rho, gates, layout); });
    }
    case Backend::LindbladOracle: {
      const auto model = exciton_lindblad_model(s, cfg.chi);
      auto run = rk4_integrate(s.rho0, model, cfg.dt_fs / kOracleRefine, steps * kOracleRefine, s.projectors,
                               kOracleRefine);
      for (auto& p : run.trajectory.points) p.t_fs = std::round(p.t_fs * 1e9) / 1e9;
      return std::move(run.trajectory);
    }
  }
  return {};
}

inline Trajectory simulate(const RunConfig& cfg) { return simulate(prepare(cfg)); }

// ---------------------------------------------------------------------------
// Output.

inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::uint64_t fnv1a(const std::string& data, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& cfg, const std::string& model_raw) {
  std::ostringstream os;
  os << std::hex << fnv1a(model_raw, fnv1a(cfg.to_json().dump()));
  std::string h = os.str();
  return std::string(16 - h.size(), '0') + h;
}

inline std::string metadata_header(const std::string& command, const Setup& s) {
  std::string out = "# enaqt " + std::string(kVersion) + " " + command + "\n";
  out += "# config=" + s.config.to_json().dump() + "\n";
  out += "# config_hash=" + config_hash(s.config, s.model.raw) + "\n";
  out += "# backend=" + to_string(s.config.backend) + "\n";
  return out;
}

inline std::string trajectory_csv(const Trajectory& traj, std::size_t n_sites) {
  std::string out = "t_fs";
  for (std::size_t m = 1; m <= n_sites; ++m) out += ",site" + std::to_string(m);
  out += ",trace,min_eig\n";
  for (const auto& p : traj.points) {
    out += format_number(p.t_fs);
    for (double v : p.populations) out += "," + format_number(v);
    out += "," + format_number(p.trace) + "," + format_number(p.min_eig) + "\n";
  }
  return out;
}

inline std::string cmd_simulate(const Setup& s) {
  const Trajectory traj = simulate(s);
  return metadata_header("simulate", s) + trajectory_csv(traj, static_cast<std::size_t>(s.basis.dim()));
}

struct OracleOutput {
  std::string trajectory_csv;
  std::string convergence_csv;
  ConvergenceReport report;
};

/// RK4 trajectory for the config plus the discrete-vs-oracle convergence table.
/// Empty `dt_list` means {2 dt, dt, dt / 2}.
inline OracleOutput cmd_oracle(const Setup& base, double horizon_fs, std::vector<double> dt_list) {
  Setup s = base;
  s.config.backend = Backend::LindbladOracle;
  OracleOutput out;
  out.trajectory_csv = metadata_header("oracle", s) + trajectory_csv(simulate(s), static_cast<std::size_t>(s.basis.dim()));
  if (dt_list.empty()) dt_list = {2.0 * s.config.dt_fs, s.config.dt_fs, 0.5 * s.config.dt_fs};
  out.report = convergence_report(exciton_lindblad_model(s, 1.0), s.rho0, horizon_fs, dt_list);
  std::string csv = metadata_header("oracle", s);
  csv += "# horizon_fs=" + format_number(out.report.horizon_fs) +
         " oracle_dt_fs=" + format_number(out.report.oracle_dt_fs) + "\n";
  csv += "dt_fs,frob_dist,ratio\n";
  for (const auto& r : out.report.rows)
    csv += format_number(r.dt_fs) + "," + format_number(r.distance) + "," +
           (std::isnan(r.ratio) ? std::string() : format_number(r.ratio)) + "\n";
  out.convergence_csv = std::move(csv);
  return out;
}

struct ChiRow {
  double chi = 0.0;
  double efficiency = 0.0;
};

/// Sink population at `at_fs` (default: end of run) for each chi.
inline std::vector<ChiRow> sweep_chi(const Setup& base, const std::vector<double>& chis, double at_fs = -1.0) {
  std::vector<ChiRow> rows;
  const double t = at_fs >= 0.0 ? at_fs : base.config.dt_fs * base.config.steps;
  for (double chi : chis) {
    if (!(chi >= 0.0 && chi <= 1.0)) throw ConfigError("sweep-chi: chi values must lie in [0, 1]");
    Setup s = base;
    s.config.chi = chi;
    s.config.backend = Backend::Operator;
    rows.push_back({chi, fmo::transfer_efficiency(simulate(s), s.model.sink_sites, t)});
  }
  return rows;
}

inline std::string cmd_sweep_chi(const Setup& s, const std::vector<double>& chis, double at_fs = -1.0) {
  std::string out = metadata_header("sweep-chi", s) + "chi,efficiency\n";
  for (const auto& r : sweep_chi(s, chis, at_fs)) out += format_number(r.chi) + "," + format_number(r.efficiency) + "\n";
  return out;
}

/// Structural gate counts for a dim-state model (rates and U do not change them).
inline circuit::GateCount count_for_dim(int dim) {
  const auto layout = circuit::QubitLayout::for_dim(dim);
  const auto gates = circuit::build_step_circuit(JumpRates::zero(dim), Matrix::Identity(dim, dim), layout);
  return circuit::gate_count(gates, dim);
}

inline std::string cmd_gatecount(int dim_lo = 2, int dim_hi = 8) {
  std::string out = "dim,jumps,gates_per_jump,jump_gates,coherent_gates,elementary_gates,toffoli_expanded,qubits\n";
  for (int d = dim_lo; d <= dim_hi; ++d) {
    const auto c = count_for_dim(d);
    out += std::to_string(d) + "," + std::to_string(c.jumps) + "," + std::to_string(c.gates_per_jump) + "," +
           std::to_string(c.jump_gates) + "," + std::to_string(c.coherent_gates) + "," +
           std::to_string(c.elementary_gates) + "," + std::to_string(c.toffoli_expanded) + "," +
           std::to_string(c.qubits) + "\n";
  }
  return out;
}

struct VerifyReport {
  int dim = 0;
  double choi_vs_sequential = 0.0;
  double choi_min_eig = 0.0;
  double choi_trace_residual = 0.0;
  double max_leakage = 0.0;
  std::vector<circuit::ChannelComparisonRow> vs_step_map;
  bool ok = false;
};

inline constexpr double kChoiMatchTol = 1e-10;
inline constexpr double kChoiPsdTol = 1e-9;
inline constexpr double kTracePreservationTol = 1e-12;
inline constexpr double kLeakageTol = 1e-12;

inline VerifyReport circuit_verify(const Setup& s, const std::vector<double>& scales = {1.0, 0.5, 0.25}) {
  VerifyReport r;
  const int dim = static_cast<int>(s.basis.dim());
  r.dim = dim;
  const auto layout = circuit::QubitLayout::for_dim(dim);
  const auto gates = circuit::build_step_circuit(s.gamma, s.unitary, layout);
  const Matrix circ = circuit::channel_choi(
      [&](const Matrix& x) {
        const auto run = circuit::run_register(x, gates, layout);
        r.max_leakage = std::max(r.max_leakage, circuit::leakage(run.system, layout));
        return circuit::restrict_to_excitons(run.system, layout);
      },
      dim);
  const Matrix seq = circuit::channel_choi(
      [&](const Matrix& x) { return circuit::sequential_kraus_map(x, s.gamma, s.unitary); }, dim);
  r.choi_vs_sequential = frob_dist(circ, seq);
  r.choi_min_eig = min_eigenvalue(circ);
  r.choi_trace_residual = circuit::choi_trace_residual(circ, dim);
  r.vs_step_map = circuit::compare_step_channels(s.gamma, s.unitary, scales);
  r.ok = r.choi_vs_sequential <= kChoiMatchTol && r.choi_min_eig >= -kChoiPsdTol &&
         r.choi_trace_residual <= kTracePreservationTol && r.max_leakage <= kLeakageTol;
  return r;
}

inline std::string format_verify(const VerifyReport& r) {
  std::string out;
  out += "dim=" + std::to_string(r.dim) + "\n";
  out += "choi_distance_circuit_vs_sequential_kraus=" + format_number(r.choi_vs_sequential) + "\n";
  out += "choi_min_eigenvalue=" + format_number(r.choi_min_eig) + "\n";
  out += "choi_trace_residual=" + format_number(r.choi_trace_residual) + "\n";
  out += "max_unused_state_population=" + format_number(r.max_leakage) + "\n";
  out += "scale,choi_distance_circuit_vs_step_map,ratio\n";
  for (const auto& row : r.vs_step_map)
    out += format_number(row.scale) + "," + format_number(row.distance) + "," +
           (std::isnan(row.ratio) ? std::string() : format_number(row.ratio)) + "\n";
  out += std::string("status=") + (r.ok ? "ok" : "FAILED") + "\n";
  return out;
}

}  // namespace enaqt::app
