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

// enaqt: batch driver for the ENAQT simulator.
//
//   enaqt simulate       --config run.json [overrides]      trajectory CSV
//   enaqt oracle         --config run.json                  RK4 trajectory + convergence table
//   enaqt sweep-chi      --config run.json --chis 0,0.06,1  chi,efficiency CSV
//   enaqt gatecount      [--config run.json]                complexity table for dims 2-8
//   enaqt circuit-verify --config run.json                  channel-equivalence report
//
// Exit status: 0 success, 1 configuration error, 2 numerical-invariant violation.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "enaqt/app.hpp"

namespace {

struct Overrides {
  std::optional<std::string> model;
  std::optional<int> initial_site;
  std::optional<double> dt_fs;
  std::optional<int> steps;
  std::optional<double> chi;
  std::optional<double> temperature_k;
  std::optional<std::string> backend;
  std::optional<std::string> out;
  bool renormalize = false;
};

void add_overrides(CLI::App* cmd, std::string& config_path, Overrides& o) {
  cmd->add_option("--config", config_path, "run config (JSON) or a trajectory CSV written by simulate")->required();
  cmd->add_option("--model", o.model, "model data file (overrides the config)");
  cmd->add_option("--initial-site", o.initial_site, "1-based site holding the initial excitation");
  cmd->add_option("--dt-fs", o.dt_fs, "time step in fs");
  cmd->add_option("--steps", o.steps, "number of steps");
  cmd->add_option("--chi", o.chi, "fractional bath coupling in [0, 1]");
  cmd->add_option("--temperature-k", o.temperature_k, "bath temperature in K (overrides the model)");
  cmd->add_option("--backend", o.backend, "operator | circuit | lindblad-oracle");
  cmd->add_option("--out", o.out, "output path (default: stdout)");
  cmd->add_flag("--renormalize", o.renormalize, "divide each step's state by its trace");
}

enaqt::app::RunConfig resolve(const std::string& path, const Overrides& o) {
  auto cfg = enaqt::app::load_run_config(path);
  if (o.model) cfg.model_path = std::filesystem::weakly_canonical(std::filesystem::absolute(*o.model)).string();
  if (o.initial_site) cfg.initial_site = *o.initial_site;
  if (o.dt_fs) cfg.dt_fs = *o.dt_fs;
  if (o.steps) cfg.steps = *o.steps;
  if (o.chi) cfg.chi = *o.chi;
  if (o.temperature_k) cfg.temperature_k = *o.temperature_k;
  if (o.backend) cfg.backend = enaqt::app::parse_backend(*o.backend);
  if (o.out) cfg.out = *o.out;
  if (o.renormalize) cfg.renormalize = true;
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw enaqt::ConfigError("cannot write '" + path + "'");
  out << text;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw enaqt::ConfigError(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  if (v.empty()) throw enaqt::ConfigError(std::string(what) + ": empty list");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-time ENAQT simulator for open quantum transport"};
  app.set_version_flag("--version", enaqt::app::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  Overrides o;

  auto* simulate = app.add_subcommand("simulate", "write a site-population trajectory CSV");
  add_overrides(simulate, config_path, o);

  auto* oracle = app.add_subcommand("oracle", "RK4 Lindblad trajectory and discrete-vs-oracle convergence table");
  add_overrides(oracle, config_path, o);
  double horizon_fs = 1000.0;
  std::string dt_list;
  std::string convergence_out;
  oracle->add_option("--horizon-fs", horizon_fs, "comparison time for the convergence table")->capture_default_str();
  oracle->add_option("--dt-list", dt_list, "comma-separated dt values (default: 2dt,dt,dt/2)");
  oracle->add_option("--convergence-out", convergence_out, "convergence CSV path (default: <out>.convergence.csv or stdout)");

  auto* sweep = app.add_subcommand("sweep-chi", "transfer efficiency for each chi");
  add_overrides(sweep, config_path, o);
  std::string chis = "0,0.06,0.25,0.5,1";
  double at_fs = -1.0;
  sweep->add_option("--chis", chis, "comma-separated chi values")->capture_default_str();
  sweep->add_option("--at-fs", at_fs, "evaluation time (default: end of run)");

  auto* gatecount = app.add_subcommand("gatecount", "jump, gate and qubit counts for dims 2-8");
  std::string gc_config;
  std::string gatelist_out;
  gatecount->add_option("--config", gc_config, "also compile this config's step");
  gatecount->add_option("--gatelist-out", gatelist_out, "write the compiled step gate list (needs --config)");
  std::string gc_out;
  gatecount->add_option("--out", gc_out, "output path (default: stdout)");

  auto* verify = app.add_subcommand("circuit-verify", "check the compiled step channel against the operator model");
  add_overrides(verify, config_path, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) {
      const auto setup = enaqt::app::prepare(resolve(config_path, o));
      emit(setup.config.out, enaqt::app::cmd_simulate(setup));
    } else if (*oracle) {
      const auto setup = enaqt::app::prepare(resolve(config_path, o));
      const auto result = enaqt::app::cmd_oracle(setup, horizon_fs, dt_list.empty() ? std::vector<double>{}
                                                                                     : parse_list(dt_list, "--dt-list"));
      emit(setup.config.out, result.trajectory_csv);
      std::string conv = convergence_out;
      if (conv.empty() && !setup.config.out.empty() && setup.config.out != "-") conv = setup.config.out + ".convergence.csv";
      emit(conv, result.convergence_csv);
    } else if (*sweep) {
      const auto setup = enaqt::app::prepare(resolve(config_path, o));
      emit(setup.config.out, enaqt::app::cmd_sweep_chi(setup, parse_list(chis, "--chis"), at_fs));
    } else if (*gatecount) {
      std::string text = enaqt::app::cmd_gatecount();
      if (!gc_config.empty()) {
        const auto setup = enaqt::app::prepare(enaqt::app::load_run_config(gc_config));
        const auto layout = enaqt::circuit::QubitLayout::for_dim(static_cast<int>(setup.basis.dim()));
        const auto gates = enaqt::circuit::build_step_circuit(setup.gamma, setup.unitary, layout);
        if (!gatelist_out.empty()) emit(gatelist_out, enaqt::circuit::to_text(gates));
      } else if (!gatelist_out.empty()) {
        throw enaqt::ConfigError("--gatelist-out needs --config");
      }
      emit(gc_out, text);
    } else if (*verify) {
      const auto setup = enaqt::app::prepare(resolve(config_path, o));
      const auto report = enaqt::app::circuit_verify(setup);
      emit(setup.config.out, enaqt::app::format_verify(report));
      if (!report.ok) return 2;
    }
  } catch (const enaqt::NumericalError& e) {
    std::cerr << "enaqt: numerical invariant violated: " << e.what() << '\n';
    return 2;
  } catch (const enaqt::Error& e) {
    std::cerr << "enaqt: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
