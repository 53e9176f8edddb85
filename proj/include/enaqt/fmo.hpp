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

// FMO-specific physics: single-exciton site Hamiltonian, exciton basis,
// jump rates from an Ohmic spectral density, and site observables.
//
// Site and exciton indices are 0-based throughout the library; the model
// file and the CLI use 1-based site numbers.

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "enaqt/core.hpp"
#include "enaqt/kernel.hpp"

namespace enaqt::fmo {

struct HamiltonianSpec {
  std::vector<double> site_energies_cm1;
  RealMatrix couplings_cm1;

  Eigen::Index n_sites() const { return static_cast<Eigen::Index>(site_energies_cm1.size()); }

  void validate() const {
    const Eigen::Index n = n_sites();
    if (n < 2) throw SpecInvalid("HamiltonianSpec: need at least two sites");
    if (couplings_cm1.rows() != n || couplings_cm1.cols() != n) {
      std::ostringstream os;
      os << "HamiltonianSpec: couplings must be " << n << "x" << n;
      throw SpecInvalid(os.str());
    }
    for (double e : site_energies_cm1)
      if (!std::isfinite(e)) throw SpecInvalid("HamiltonianSpec: non-finite site energy");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (couplings_cm1(i, i) != 0.0) throw SpecInvalid("HamiltonianSpec: coupling diagonal must be zero");
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!std::isfinite(couplings_cm1(i, j)))
          throw SpecInvalid("HamiltonianSpec: non-finite coupling");
        if (couplings_cm1(i, j) != couplings_cm1(j, i)) {
          std::ostringstream os;
          os << "HamiltonianSpec: couplings not symmetric at (" << i + 1 << "," << j + 1 << ")";
          throw SpecInvalid(os.str());
        }
      }
    }
  }
};

inline Matrix site_hamiltonian(const HamiltonianSpec& spec) {
  spec.validate();
  const Eigen::Index n = spec.n_sites();
  Matrix h = spec.couplings_cm1.cast<Complex>();
  for (Eigen::Index m = 0; m < n; ++m) h(m, m) = spec.site_energies_cm1[static_cast<std::size_t>(m)];
  return h;
}

/// Columns of `transform` are the exciton states in the site basis:
/// transform(m, M) = c_m(M).
struct ExcitonBasis {
  RealVector energies_cm1;
  Matrix transform;

  Eigen::Index dim() const { return energies_cm1.size(); }
  /// |c_m(M)|^2
  double weight(Eigen::Index site, Eigen::Index exciton) const { return std::norm(transform(site, exciton)); }
  Matrix to_exciton(const Matrix& site_op) const { return transform.adjoint() * site_op * transform; }
  Matrix to_site(const Matrix& exciton_op) const { return transform * exciton_op * transform.adjoint(); }
  /// H in its own eigenbasis.
  Matrix hamiltonian() const { return energies_cm1.cast<Complex>().asDiagonal(); }
};

inline ExcitonBasis exciton_basis(const Matrix& h) {
  auto [values, vectors] = eigh(h);
  // Fix the phase convention: largest-magnitude component of each column real positive.
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    Eigen::Index arg = 0;
    vectors.col(k).cwiseAbs().maxCoeff(&arg);
    const Complex c = vectors(arg, k);
    vectors.col(k) *= std::conj(c) / std::abs(c);
  }
  return {std::move(values), std::move(vectors)};
}

struct OhmicBath {
  double lambda_cm1 = 0.0;
  double omega_c_cm1 = 0.0;
};

/// How the upward (absorption) rate of each pair is produced.
enum class UphillRates {
  DetailedBalance,  ///< 2 pi J(w) n(w)
  None,             ///< emission only, 2 pi J(w) (1 + n(w)) downhill
};

struct BathSpec {
  double temperature_k = 300.0;
  /// Ohmic parameters, or an explicit Gamma(M -> N) table in fs^-1 (exciton basis).
  std::variant<OhmicBath, RealMatrix> source = OhmicBath{};
  UphillRates uphill = UphillRates::DetailedBalance;
  bool overlap_weighting = true;

  void validate() const {
    if (!(temperature_k > 0.0)) throw SpecInvalid("BathSpec: temperature must be > 0");
    if (const auto* o = std::get_if<OhmicBath>(&source)) {
      if (!(o->lambda_cm1 >= 0.0) || !(o->omega_c_cm1 > 0.0))
        throw SpecInvalid("BathSpec: need lambda >= 0 and omega_c > 0");
    } else {
      const auto& r = std::get<RealMatrix>(source);
      for (Eigen::Index i = 0; i < r.size(); ++i)
        if (!(r.data()[i] >= 0.0) || !std::isfinite(r.data()[i]))
          throw SpecInvalid("BathSpec: explicit rates must be finite and >= 0");
    }
  }
};

/// J(w) = (lambda / omega_c) w exp(-w / omega_c), w in cm^-1.
inline double ohmic_spectral_density(double omega_cm1, const OhmicBath& bath) {
  if (omega_cm1 <= 0.0) return 0.0;
  return bath.lambda_cm1 / bath.omega_c_cm1 * omega_cm1 * std::exp(-omega_cm1 / bath.omega_c_cm1);
}

/// n(w) = 1 / (exp(hbar w / kT) - 1).
inline double bose_occupation(double omega_cm1, double temperature_k) {
  return 1.0 / std::expm1(omega_cm1 / (kBoltzmannCm1PerK * temperature_k));
}

/// sum_m |c_m(M)|^2 |c_m(N)|^2
inline double exciton_overlap(const ExcitonBasis& basis, Eigen::Index a, Eigen::Index b) {
  double s = 0.0;
  for (Eigen::Index m = 0; m < basis.dim(); ++m) s += basis.weight(m, a) * basis.weight(m, b);
  return s;
}

/// Gamma(M -> N) in fs^-1 between excitons.
inline RealMatrix rate_matrix_per_fs(const ExcitonBasis& basis, const BathSpec& bath) {
  bath.validate();
  const Eigen::Index n = basis.dim();
  if (const auto* table = std::get_if<RealMatrix>(&bath.source)) {
    if (table->rows() != n || table->cols() != n)
      throw DimensionMismatch("BathSpec: explicit rate table does not match the exciton count");
    RealMatrix r = *table;
    r.diagonal().setZero();
    return r;
  }
  const auto& ohmic = std::get<OhmicBath>(bath.source);
  RealMatrix rates = RealMatrix::Zero(n, n);
  for (Eigen::Index hi = 0; hi < n; ++hi) {
    for (Eigen::Index lo = 0; lo < n; ++lo) {
      const double omega = basis.energies_cm1(hi) - basis.energies_cm1(lo);
      if (omega <= 0.0) continue;
      // 2 pi J(w) is an energy in cm^-1; convert to an angular rate.
      const double base = 2.0 * std::numbers::pi * ohmic_spectral_density(omega, ohmic) * kRadPerFsPerCm1 *
                          (bath.overlap_weighting ? exciton_overlap(basis, hi, lo) : 1.0);
      const double occ = bose_occupation(omega, bath.temperature_k);
      rates(hi, lo) = base * (1.0 + occ);
      if (bath.uphill == UphillRates::DetailedBalance) rates(lo, hi) = base * occ;
    }
  }
  return rates;
}

inline JumpRates jump_rates(const ExcitonBasis& basis, const BathSpec& bath, double dt_fs) {
  if (!(dt_fs > 0.0)) throw SpecInvalid("jump_rates: dt must be > 0");
  return JumpRates::from_rates(rate_matrix_per_fs(basis, bath), dt_fs);
}

/// 1 / max_M sum_N Gamma(M -> N): the fastest exciton relaxation time.
inline double fastest_relaxation_time_fs(const RealMatrix& rates_per_fs) {
  return 1.0 / rates_per_fs.rowwise().sum().maxCoeff();
}

/// Site projectors |m><m| expressed in the exciton basis.
inline std::vector<Matrix> site_projectors(const ExcitonBasis& basis) {
  std::vector<Matrix> out;
  const Eigen::Index n = basis.dim();
  for (Eigen::Index m = 0; m < n; ++m) {
    const Vector row = basis.transform.row(m).adjoint();
    out.push_back(row * row.adjoint());
  }
  return out;
}

/// p_m = <m| D rho D^dag |m> for rho in the exciton basis.
inline std::vector<double> site_populations(const Matrix& rho_exciton, const ExcitonBasis& basis) {
  if (rho_exciton.rows() != basis.dim() || rho_exciton.cols() != basis.dim())
    throw DimensionMismatch("site_populations: state and basis differ in dim");
  const Matrix site = basis.to_site(rho_exciton);
  std::vector<double> p(static_cast<std::size_t>(basis.dim()));
  for (Eigen::Index m = 0; m < basis.dim(); ++m) p[static_cast<std::size_t>(m)] = site(m, m).real();
  return p;
}

/// Exciton-basis state for an excitation localized on `site`.
inline Matrix localized_state(const ExcitonBasis& basis, Eigen::Index site) {
  if (site < 0 || site >= basis.dim()) throw IndexOutOfRange("localized_state: site out of range");
  return basis.to_exciton(projector(basis.dim(), site));
}

inline double sink_population(const std::vector<double>& populations, const std::set<int>& sink_sites) {
  double s = 0.0;
  for (int m : sink_sites) {
    if (m < 0 || static_cast<std::size_t>(m) >= populations.size())
      throw IndexOutOfRange("sink site out of range");
    s += populations[static_cast<std::size_t>(m)];
  }
  return s;
}

inline double transfer_efficiency(const Trajectory& traj, const std::set<int>& sink_sites, double at_time_fs) {
  return sink_population(traj.at_time(at_time_fs).populations, sink_sites);
}

/// First sample time at which the sink population reaches `level`; negative if never.
inline double first_passage_fs(const Trajectory& traj, const std::set<int>& sink_sites, double level) {
  for (const auto& p : traj.points)
    if (sink_population(p.populations, sink_sites) >= level) return p.t_fs;
  return -1.0;
}

}  // namespace enaqt::fmo
