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

// Continuous-time GKSL integrator used as an independent reference for the
// discrete step. Deliberately avoids the eigendecomposition path: the
// generator is integrated with classical RK4.

#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "enaqt/core.hpp"
#include "enaqt/kernel.hpp"

namespace enaqt {

struct LindbladJump {
  Matrix op;
  double rate_per_fs = 0.0;
};

class LindbladModel {
 public:
  LindbladModel(Matrix hamiltonian_cm1, std::vector<LindbladJump> jumps)
      : hamiltonian_(std::move(hamiltonian_cm1)), jumps_(std::move(jumps)) {
    require_hermitian(hamiltonian_, kEighInputTol, "LindbladModel");
    for (const auto& j : jumps_) {
      if (j.op.rows() != dim() || j.op.cols() != dim())
        throw DimensionMismatch("LindbladModel: jump operator dim mismatch");
      if (!(j.rate_per_fs >= 0.0)) throw SpecInvalid("LindbladModel: negative rate");
    }
  }

  /// Rank-one jumps L = |N><M| with rate rates(M, N), in the basis of H.
  static LindbladModel from_rate_matrix(const Matrix& hamiltonian_cm1, const RealMatrix& rates_per_fs) {
    if (rates_per_fs.rows() != hamiltonian_cm1.rows() || rates_per_fs.cols() != hamiltonian_cm1.cols())
      throw DimensionMismatch("LindbladModel: rate matrix dim mismatch");
    std::vector<LindbladJump> jumps;
    const Eigen::Index n = rates_per_fs.rows();
    for (Eigen::Index m = 0; m < n; ++m)
      for (Eigen::Index k = 0; k < n; ++k)
        if (m != k && rates_per_fs(m, k) > 0.0) jumps.push_back({ket_bra(n, k, m), rates_per_fs(m, k)});
    LindbladModel model(hamiltonian_cm1, std::move(jumps));
    model.rate_matrix_ = rates_per_fs;
    return model;
  }

  Eigen::Index dim() const { return hamiltonian_.rows(); }
  const Matrix& hamiltonian() const { return hamiltonian_; }
  const std::vector<LindbladJump>& jumps() const { return jumps_; }
  /// Present when built from a rate matrix; needed to build the matching
  /// discrete operators.
  const std::optional<RealMatrix>& rate_matrix() const { return rate_matrix_; }

 private:
  Matrix hamiltonian_;
  std::vector<LindbladJump> jumps_;
  std::optional<RealMatrix> rate_matrix_;
};

/// -(i/hbar)[H, rho] + sum_k Gamma_k (L rho L^dag - 1/2 {L^dag L, rho}).
inline Matrix lindblad_rhs(const Matrix& rho, const LindbladModel& model) {
  if (rho.rows() != model.dim() || rho.cols() != model.dim())
    throw DimensionMismatch("lindblad_rhs: state and model differ in dim");
  const Matrix& h = model.hamiltonian();
  const Complex minus_i_over_hbar(0.0, -kRadPerFsPerCm1);
  Matrix out = minus_i_over_hbar * (h * rho - rho * h);
  for (const auto& j : model.jumps()) {
    const Matrix ldl = j.op.adjoint() * j.op;
    out += j.rate_per_fs * (j.op * rho * j.op.adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

struct Rk4Run {
  Matrix final_state;
  Trajectory trajectory;
  /// Set when ||rhs(rho0)|| * dt >= 0.1.
  bool step_too_large = false;
};

/// Classical RK4 with per-step hermitian symmetrization. Samples through
/// `projectors` every `sample_every` steps (and at the end).
inline Rk4Run rk4_integrate(const Matrix& rho0, const LindbladModel& model, double dt_fs,
                            std::size_t steps, std::span<const Matrix> projectors = {},
                            std::size_t sample_every = 1) {
  if (!(dt_fs > 0.0)) throw SpecInvalid("rk4_integrate: dt must be > 0");
  if (sample_every == 0) sample_every = 1;
  // The identity part of H drops out of the commutator; removing it keeps
  // the cancellation well conditioned for absolute site energies.
  const Eigen::Index n = model.dim();
  Matrix h = model.hamiltonian();
  h -= (h.trace() / static_cast<double>(n)) * Matrix::Identity(n, n);
  const LindbladModel shifted(h, model.jumps());

  Rk4Run run;
  Matrix rho = rho0;
  run.step_too_large = lindblad_rhs(rho, shifted).norm() * dt_fs >= 0.1;
  for (std::size_t k = 0;; ++k) {
    if (!projectors.empty() && (k % sample_every == 0 || k == steps)) {
      run.trajectory.points.push_back(
          {static_cast<double>(k) * dt_fs, observe(rho, projectors), rho.trace().real(), min_eigenvalue(rho)});
    }
    if (k == steps) break;
    const Matrix k1 = lindblad_rhs(rho, shifted);
    const Matrix k2 = lindblad_rhs(rho + 0.5 * dt_fs * k1, shifted);
    const Matrix k3 = lindblad_rhs(rho + 0.5 * dt_fs * k2, shifted);
    const Matrix k4 = lindblad_rhs(rho + dt_fs * k3, shifted);
    rho += (dt_fs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint()).eval();
  }
  run.final_state = std::move(rho);
  return run;
}

struct ConvergenceRow {
  double dt_fs = 0.0;
  double distance = 0.0;
  /// distance(previous dt) / distance(this dt); NaN for the first row.
  double ratio = std::nan("");
};

struct ConvergenceReport {
  double horizon_fs = 0.0;
  double oracle_dt_fs = 0.0;
  std::vector<ConvergenceRow> rows;
};

/// Discrete state after horizon/dt steps of the ENAQT step with gamma = Gamma*dt.
inline Matrix discrete_final_state(const Matrix& rho0, const LindbladModel& model, double dt_fs,
                                   double horizon_fs, double chi = 1.0) {
  if (!model.rate_matrix()) throw SpecInvalid("convergence: model needs a rate matrix");
  const double count = horizon_fs / dt_fs;
  const auto steps = static_cast<std::size_t>(std::llround(count));
  if (std::abs(count - static_cast<double>(steps)) > 1e-9)
    throw SpecInvalid("convergence: horizon must be a multiple of every dt");
  const auto ops = build_evolution_operators(JumpRates::from_rates(*model.rate_matrix(), dt_fs),
                                             mat_exp_unitary(model.hamiltonian(), dt_fs));
  Matrix rho = rho0;
  for (std::size_t k = 0; k < steps; ++k) rho = tunable_map(rho, ops, chi);
  return rho;
}

/// Frobenius distance between the discrete step iterated to `horizon` and the
/// RK4 reference, for each dt. The reference runs at min(dt)/oracle_refine.
inline ConvergenceReport convergence_report(const LindbladModel& model, const Matrix& rho0,
                                            double horizon_fs, std::span<const double> dt_list,
                                            double oracle_refine = 10.0) {
  if (dt_list.empty()) throw SpecInvalid("convergence_report: empty dt list");
  double dt_min = dt_list.front();
  for (double dt : dt_list) dt_min = std::min(dt_min, dt);
  ConvergenceReport report;
  report.horizon_fs = horizon_fs;
  report.oracle_dt_fs = dt_min / oracle_refine;
  const auto oracle_steps = static_cast<std::size_t>(std::llround(horizon_fs / report.oracle_dt_fs));
  const Matrix reference = rk4_integrate(rho0, model, report.oracle_dt_fs, oracle_steps).final_state;
  for (double dt : dt_list) {
    ConvergenceRow row{dt, frob_dist(discrete_final_state(rho0, model, dt, horizon_fs), reference)};
    if (!report.rows.empty()) row.ratio = report.rows.back().distance / row.distance;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace enaqt
