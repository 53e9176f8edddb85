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

// Discrete-time ENAQT evolution: jump Kraus operators, the evolution operators
// that attach the coherent propagator to the no-jump branch, the step map with
// its asymmetric cross terms, and the chi-weighted (tunable coupling) step.

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "enaqt/core.hpp"

namespace enaqt {

/// Per-step jump probabilities gamma(M, N) for |M> -> |N>, already scaled by dt.
class JumpRates {
 public:
  JumpRates() = default;

  /// Validates gamma >= 0, zero diagonal, and per-source survival
  /// sum_{N != M} gamma(M, N) <= 1.
  explicit JumpRates(RealMatrix gamma) : gamma_(std::move(gamma)) {
    if (gamma_.rows() != gamma_.cols() || gamma_.rows() < 1) {
      throw DimensionMismatch("JumpRates: gamma must be square and non-empty");
    }
    for (Eigen::Index m = 0; m < dim(); ++m) {
      for (Eigen::Index n = 0; n < dim(); ++n) {
        const double g = gamma_(m, n);
        if (!std::isfinite(g) || g < 0.0) {
          std::ostringstream os;
          os << "JumpRates: gamma(" << m << "," << n << ") = " << g << " is negative or non-finite";
          throw ProbabilityOutOfRange(os.str());
        }
        if (m == n && g != 0.0) throw ProbabilityOutOfRange("JumpRates: diagonal must be zero");
      }
    }
    // Entries are non-negative, so a row sum <= 1 also bounds each entry by 1.
    for (Eigen::Index m = 0; m < dim(); ++m) {
      const double out = gamma_.row(m).sum();
      if (out > 1.0) {
        std::ostringstream os;
        os << "JumpRates: total jump probability " << out << " from state " << m
           << " exceeds 1; reduce dt";
        throw SurvivalUnderflow(os.str());
      }
    }
  }

  static JumpRates zero(Eigen::Index dim) { return JumpRates(RealMatrix::Zero(dim, dim)); }

  /// Gamma (per fs) times dt.
  static JumpRates from_rates(const RealMatrix& rates_per_fs, double dt_fs) {
    return JumpRates(rates_per_fs * dt_fs);
  }

  Eigen::Index dim() const { return gamma_.rows(); }
  double operator()(Eigen::Index from, Eigen::Index to) const { return gamma_(from, to); }
  const RealMatrix& matrix() const { return gamma_; }
  double outflow(Eigen::Index from) const { return gamma_.row(from).sum(); }

  JumpRates scaled(double s) const { return JumpRates(gamma_ * s); }

 private:
  RealMatrix gamma_;
};

struct KrausPair {
  Matrix no_jump;
  Matrix jump;
};

/// Kraus pair for a single jump |0> -> |1> with probability p.
inline KrausPair single_jump_kraus(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ProbabilityOutOfRange("single_jump_kraus: p outside [0, 1]");
  Matrix m0 = Matrix::Zero(2, 2);
  m0(0, 0) = std::sqrt(1.0 - p);
  m0(1, 1) = 1.0;
  Matrix m1 = Matrix::Zero(2, 2);
  m1(1, 0) = std::sqrt(p);
  return {std::move(m0), std::move(m1)};
}

inline void require_unitary(const Matrix& u, double tol, const char* what) {
  require_square(u, what);
  const double r = max_abs(u * u.adjoint() - Matrix::Identity(u.rows(), u.cols()));
  if (r > tol) {
    std::ostringstream os;
    os << what << ": unitarity residual " << r << " exceeds " << tol;
    throw NumericalError(os.str());
  }
}

/// M0 U rho U^dagger M0^dagger + M1 rho M1^dagger for the two-level toy model.
inline DensityMatrix single_jump_step(const DensityMatrix& rho, const Matrix& u, double p) {
  if (rho.dim() != 2) throw DimensionMismatch("single_jump_step: rho must be 2x2");
  require_unitary(u, 1e-10, "single_jump_step");
  if (u.rows() != 2) throw DimensionMismatch("single_jump_step: U must be 2x2");
  const auto [m0, m1] = single_jump_kraus(p);
  const Matrix m0u = m0 * u;
  Matrix out = m0u * rho.matrix() * m0u.adjoint() + m1 * rho.matrix() * m1.adjoint();
  return DensityMatrix::trusted(std::move(out));
}

/// A rank-one jump operator sqrt(gamma) |to><from|.
struct JumpOperator {
  Eigen::Index from = 0;
  Eigen::Index to = 0;
  double gamma = 0.0;
  Matrix op;
};

/// Evolution operators for one step: M'_MM = M_MM U on the no-jump branch,
/// M'_MN = M_MN on the jump branch (no coherent propagation).
struct EvolutionOperators {
  Eigen::Index dim = 0;
  Matrix unitary;
  /// sqrt(1 - sum_N gamma(M, N)) per source state M.
  RealVector survival;
  /// M_MM = survival(M) |M><M|.
  std::vector<Matrix> no_jump_ops;
  /// M'_MM = M_MM U.
  std::vector<Matrix> diagonal_ops;
  /// M'_MN for every pair with gamma > 0, lexicographic in (from, to).
  std::vector<JumpOperator> jump_ops;
  JumpRates rates;
};

inline EvolutionOperators build_evolution_operators(const JumpRates& rates, const Matrix& u) {
  const Eigen::Index n = rates.dim();
  require_square(u, "build_evolution_operators");
  if (u.rows() != n) throw DimensionMismatch("build_evolution_operators: U and rates differ in dim");
  require_unitary(u, 1e-10, "build_evolution_operators");

  EvolutionOperators ops;
  ops.dim = n;
  ops.unitary = u;
  ops.rates = rates;
  ops.survival.resize(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    ops.survival(m) = std::sqrt(std::max(0.0, 1.0 - rates.outflow(m)));
    Matrix mm = ops.survival(m) * projector(n, m);
    ops.diagonal_ops.push_back(mm * u);
    ops.no_jump_ops.push_back(std::move(mm));
    for (Eigen::Index to = 0; to < n; ++to) {
      const double g = rates(m, to);
      if (to == m || g == 0.0) continue;
      ops.jump_ops.push_back({m, to, g, std::sqrt(g) * ket_bra(n, to, m)});
    }
  }
  return ops;
}

/// max |sum M^dagger M - 1| over the underlying Kraus operators M_MN.
inline double completeness_residual(const EvolutionOperators& ops) {
  Matrix acc = Matrix::Zero(ops.dim, ops.dim);
  for (const Matrix& m : ops.no_jump_ops) acc += m.adjoint() * m;
  for (const JumpOperator& j : ops.jump_ops) acc += j.op.adjoint() * j.op;
  return max_abs(acc - Matrix::Identity(ops.dim, ops.dim));
}

/// The step map on an arbitrary operator X:
///   sum_M [ M'_MM X M'_MM^dag + sum_{N != M} ( M_MN X M_MN^dag + M'_MM X M'_NN^dag ) ].
/// The diagonal and cross terms together are K (U X U^dag) K with
/// K = sum_M M_MM diagonal, and each rank-one jump contributes
/// gamma(M, N) X_MM |N><N|. Linear in X; X need not be hermitian.
inline Matrix enaqt_map(const Matrix& x, const EvolutionOperators& ops) {
  if (x.rows() != ops.dim || x.cols() != ops.dim) {
    throw DimensionMismatch("enaqt_step: state and operators differ in dim");
  }
  const Matrix& u = ops.unitary;
  Matrix out = u * x * u.adjoint();
  out = ops.survival.asDiagonal() * out * ops.survival.asDiagonal();
  for (const JumpOperator& j : ops.jump_ops) out(j.to, j.to) += j.gamma * x(j.from, j.from);
  return out;
}

inline DensityMatrix enaqt_step(const DensityMatrix& rho, const EvolutionOperators& ops) {
  return DensityMatrix::trusted(enaqt_map(rho.matrix(), ops));
}

struct StepConfig {
  double dt_fs = 10.0;
  double chi = 1.0;
  bool renormalize_trace = false;

  void validate() const {
    if (!(dt_fs > 0.0)) throw SpecInvalid("StepConfig: dt must be > 0");
    if (!(chi >= 0.0 && chi <= 1.0)) throw SpecInvalid("StepConfig: chi must lie in [0, 1]");
  }
};

/// (1 - chi) U X U^dag + chi * enaqt_map(X). chi = 1 and chi = 0 return the
/// ENAQT step and the coherent step bit-for-bit.
inline Matrix tunable_map(const Matrix& x, const EvolutionOperators& ops, double chi) {
  if (chi == 1.0) return enaqt_map(x, ops);
  const Matrix& u = ops.unitary;
  if (chi == 0.0) return u * x * u.adjoint();
  return (1.0 - chi) * (u * x * u.adjoint()) + chi * enaqt_map(x, ops);
}

inline DensityMatrix tunable_step(const DensityMatrix& rho, const EvolutionOperators& ops,
                                  const StepConfig& cfg) {
  cfg.validate();
  Matrix out = tunable_map(rho.matrix(), ops, cfg.chi);
  if (cfg.renormalize_trace) out /= out.trace().real();
  return DensityMatrix::trusted(std::move(out));
}

struct TrajectoryPoint {
  double t_fs = 0.0;
  std::vector<double> populations;
  double trace = 1.0;
  double min_eig = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;

  std::size_t size() const { return points.size(); }
  const TrajectoryPoint& at_time(double t_fs, double tol = 1e-9) const {
    for (const auto& p : points)
      if (std::abs(p.t_fs - t_fs) <= tol) return p;
    std::ostringstream os;
    os << "no trajectory sample at t = " << t_fs << " fs";
    throw TimeOutOfRange(os.str());
  }
};

inline constexpr double kEvolutionPsdTol = 1e-6;

/// Re tr(P rho) for each projector.
inline std::vector<double> observe(const Matrix& rho, std::span<const Matrix> projectors) {
  std::vector<double> out;
  out.reserve(projectors.size());
  for (const Matrix& p : projectors) out.push_back((p.cwiseProduct(rho.transpose())).sum().real());
  return out;
}

inline TrajectoryPoint sample_point(double t, const Matrix& rho, std::span<const Matrix> projectors) {
  const double herm = hermiticity_residual(rho);
  if (!all_finite(rho) || herm > kEvolutionPsdTol) {
    std::ostringstream os;
    os << "state at t = " << t << " fs lost hermiticity (residual " << herm << ")";
    throw StateInvalid(os.str());
  }
  TrajectoryPoint pt{t, observe(rho, projectors), rho.trace().real(), min_eigenvalue(rho)};
  if (pt.min_eig < -kEvolutionPsdTol) {
    std::ostringstream os;
    os << "state at t = " << t << " fs has eigenvalue " << pt.min_eig
       << "; check rates and dt";
    throw StateInvalid(os.str());
  }
  return pt;
}

/// Generic driver: samples, then advances with `step`, `steps` times.
template <typename StepFn>
Trajectory run_trajectory(const Matrix& rho0, double dt_fs, std::size_t steps,
                          std::span<const Matrix> projectors, StepFn&& step) {
  Trajectory traj;
  traj.points.reserve(steps + 1);
  Matrix rho = rho0;
  for (std::size_t k = 0;; ++k) {
    traj.points.push_back(sample_point(static_cast<double>(k) * dt_fs, rho, projectors));
    if (k == steps) break;
    rho = step(rho);
  }
  return traj;
}

inline Trajectory evolve_trajectory(const DensityMatrix& rho0, const EvolutionOperators& ops,
                                    const StepConfig& cfg, std::size_t steps,
                                    std::span<const Matrix> projectors) {
  cfg.validate();
  if (rho0.dim() != ops.dim) throw DimensionMismatch("evolve_trajectory: dim mismatch");
  return run_trajectory(rho0.matrix(), cfg.dt_fs, steps, projectors, [&](const Matrix& rho) {
    Matrix next = tunable_map(rho, ops, cfg.chi);
    if (cfg.renormalize_trace) next /= next.trace().real();
    return next;
  });
}

}  // namespace enaqt
