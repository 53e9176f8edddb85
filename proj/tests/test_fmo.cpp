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

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

namespace enaqt::fmo {
namespace {

using enaqt::testing::Rng;
using enaqt::testing::data_path;

const app::ModelFile& shipped() {
  static const app::ModelFile model = app::load_model(data_path("fmo_default.json"));
  return model;
}

struct Run {
  ExcitonBasis basis;
  RealMatrix rates;
  std::vector<Matrix> projectors;
};

Run shipped_run() {
  Run r;
  r.basis = exciton_basis(site_hamiltonian(shipped().hamiltonian));
  r.rates = rate_matrix_per_fs(r.basis, shipped().bath);
  r.projectors = site_projectors(r.basis);
  return r;
}

Trajectory evolve(const Run& r, int site, double chi, bool jumps, std::size_t steps = 400, double dt = 10.0) {
  const auto gamma = jumps ? JumpRates::from_rates(r.rates, dt) : JumpRates::zero(r.basis.dim());
  const auto ops = build_evolution_operators(gamma, mat_exp_unitary(r.basis.hamiltonian(), dt));
  return evolve_trajectory(DensityMatrix::trusted(localized_state(r.basis, site)), ops, {dt, chi, false}, steps,
                           r.projectors);
}

const std::set<int> kSink{2, 3};

TEST(SiteHamiltonian, SmallCases) {
  HamiltonianSpec two{{0.0, 0.0}, RealMatrix::Zero(2, 2)};
  two.couplings_cm1(0, 1) = two.couplings_cm1(1, 0) = 1.0;
  Matrix expect(2, 2);
  expect << 0.0, 1.0, 1.0, 0.0;
  EXPECT_EQ(site_hamiltonian(two), expect);

  HamiltonianSpec diag{{3.0, -1.0, 7.0}, RealMatrix::Zero(3, 3)};
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 3.0;
  d(1, 1) = -1.0;
  d(2, 2) = 7.0;
  EXPECT_EQ(site_hamiltonian(diag), d);
}

TEST(SiteHamiltonian, RejectsInvalidSpecs) {
  HamiltonianSpec one{{1.0}, RealMatrix::Zero(1, 1)};
  EXPECT_THROW(site_hamiltonian(one), SpecInvalid);
  HamiltonianSpec asym{{0.0, 0.0}, RealMatrix::Zero(2, 2)};
  asym.couplings_cm1(0, 1) = 1.0;
  EXPECT_THROW(site_hamiltonian(asym), SpecInvalid);
  HamiltonianSpec diag{{0.0, 0.0}, RealMatrix::Identity(2, 2)};
  EXPECT_THROW(site_hamiltonian(diag), SpecInvalid);
  HamiltonianSpec shape{{0.0, 0.0}, RealMatrix::Zero(3, 3)};
  EXPECT_THROW(site_hamiltonian(shape), SpecInvalid);
}

TEST(SiteHamiltonian, ShippedFileRoundTrips) {
  const Matrix h = site_hamiltonian(shipped().hamiltonian);
  const auto raw = nlohmann::json::parse(shipped().raw);
  ASSERT_EQ(h.rows(), 7);
  EXPECT_EQ(hermiticity_residual(h), 0.0);
  for (int m = 0; m < 7; ++m) {
    EXPECT_EQ(h(m, m).real(), raw["site_energies_cm1"][m].get<double>());
    for (int n = 0; n < 7; ++n)
      if (m != n) {
        EXPECT_EQ(h(m, n).real(), raw["couplings_cm1"][m][n].get<double>());
      }
  }
  EXPECT_EQ(shipped().sink_sites, kSink);
}

TEST(ExcitonBasis, DiagonalHamiltonianIsPermutation) {
  HamiltonianSpec spec{{5.0, 1.0, 3.0}, RealMatrix::Zero(3, 3)};
  const auto b = exciton_basis(site_hamiltonian(spec));
  EXPECT_EQ(b.energies_cm1, (RealVector(3) << 1.0, 3.0, 5.0).finished());
  EXPECT_NEAR(b.weight(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(b.weight(2, 1), 1.0, 1e-15);
  EXPECT_NEAR(b.weight(0, 2), 1.0, 1e-15);
}

TEST(ExcitonBasis, SymmetricDimerSplitsEvenly) {
  HamiltonianSpec spec{{0.0, 0.0}, RealMatrix::Zero(2, 2)};
  spec.couplings_cm1(0, 1) = spec.couplings_cm1(1, 0) = 50.0;
  const auto b = exciton_basis(site_hamiltonian(spec));
  EXPECT_NEAR(b.energies_cm1(0), -50.0, 1e-12);
  EXPECT_NEAR(b.energies_cm1(1), 50.0, 1e-12);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(b.transform(0, 0)), s, 1e-12);
  EXPECT_NEAR(std::abs(b.transform(1, 0)), s, 1e-12);
  EXPECT_NEAR(std::abs(b.transform(0, 0) + b.transform(1, 0)), 0.0, 1e-12);  // antisymmetric ground
  EXPECT_NEAR(std::abs(b.transform(0, 1) - b.transform(1, 1)), 0.0, 1e-12);  // symmetric upper
}

TEST(ExcitonBasis, ShippedHamiltonianDiagonalizes) {
  const Matrix h = site_hamiltonian(shipped().hamiltonian);
  const auto b = exciton_basis(h);
  EXPECT_LE(max_abs(b.transform.adjoint() * b.transform - Matrix::Identity(7, 7)), 1e-10);
  Matrix off = b.to_exciton(h);
  off.diagonal().setZero();
  EXPECT_LE(max_abs(off), 1e-8);
  for (int k = 1; k < 7; ++k) EXPECT_GT(b.energies_cm1(k), b.energies_cm1(k - 1));
}

BathSpec ohmic(double t, UphillRates up = UphillRates::DetailedBalance) {
  return {t, OhmicBath{35.0, 150.0}, up, true};
}

TEST(Rates, UphillVanishesAtLowTemperature) {
  const auto b = exciton_basis(site_hamiltonian(shipped().hamiltonian));
  const RealMatrix r = rate_matrix_per_fs(b, ohmic(0.1));
  for (int hi = 0; hi < 7; ++hi)
    for (int lo = 0; lo < hi; ++lo) {
      EXPECT_LT(r(lo, hi), 1e-30);
      EXPECT_GT(r(hi, lo), 0.0);
    }
}

TEST(Rates, DetailedBalanceHolds) {
  const auto b = exciton_basis(site_hamiltonian(shipped().hamiltonian));
  for (double t : {77.0, 300.0}) {
    const RealMatrix r = rate_matrix_per_fs(b, ohmic(t));
    for (int hi = 0; hi < 7; ++hi)
      for (int lo = 0; lo < hi; ++lo) {
        const double w = b.energies_cm1(hi) - b.energies_cm1(lo);
        EXPECT_NEAR(r(lo, hi) / r(hi, lo), std::exp(-w / (kBoltzmannCm1PerK * t)), 1e-12);
      }
  }
}

TEST(Rates, NondecreasingInTemperature) {
  const auto b = exciton_basis(site_hamiltonian(shipped().hamiltonian));
  for (auto up : {UphillRates::DetailedBalance, UphillRates::None}) {
    RealMatrix prev = rate_matrix_per_fs(b, ohmic(10.0, up));
    for (double t : {77.0, 150.0, 300.0, 600.0}) {
      const RealMatrix r = rate_matrix_per_fs(b, ohmic(t, up));
      EXPECT_TRUE(((r - prev).array() >= 0.0).all()) << "T=" << t;
      prev = r;
    }
  }
}

TEST(Rates, EmissionOnlyHasNoUphillEntries) {
  const auto b = exciton_basis(site_hamiltonian(shipped().hamiltonian));
  const RealMatrix r = rate_matrix_per_fs(b, ohmic(300.0, UphillRates::None));
  const RealMatrix db = rate_matrix_per_fs(b, ohmic(300.0));
  for (int hi = 0; hi < 7; ++hi)
    for (int lo = 0; lo < hi; ++lo) {
      EXPECT_EQ(r(lo, hi), 0.0);
      EXPECT_EQ(r(hi, lo), db(hi, lo));
    }
}

TEST(Rates, DownhillFormula) {
  const auto b = exciton_basis(site_hamiltonian(shipped().hamiltonian));
  const OhmicBath bath{35.0, 150.0};
  const RealMatrix r = rate_matrix_per_fs(b, ohmic(300.0));
  const double w = b.energies_cm1(4) - b.energies_cm1(1);
  const double j = 35.0 / 150.0 * w * std::exp(-w / 150.0);
  const double n = 1.0 / (std::exp(w / (kBoltzmannCm1PerK * 300.0)) - 1.0);
  double overlap = 0.0;
  for (int m = 0; m < 7; ++m) overlap += b.weight(m, 4) * b.weight(m, 1);
  EXPECT_NEAR(r(4, 1), 2.0 * std::numbers::pi * j * kRadPerFsPerCm1 * (1.0 + n) * overlap, 1e-15);
  EXPECT_NEAR(ohmic_spectral_density(w, bath), j, 1e-12);
  EXPECT_EQ(ohmic_spectral_density(-5.0, bath), 0.0);
}

TEST(Rates, ShippedRelaxationTimeIsNearSeventyFs) {
  const auto r = shipped_run();
  const double tau = fastest_relaxation_time_fs(r.rates);
  EXPECT_GE(tau, 50.0);
  EXPECT_LE(tau, 100.0);
}

TEST(Rates, ExplicitTableUsedVerbatim) {
  const auto b = exciton_basis(site_hamiltonian(shipped().hamiltonian));
  Rng rng(1);
  RealMatrix table = rng.rates(7, 0.02);
  BathSpec bath{300.0, table, UphillRates::DetailedBalance, true};
  EXPECT_EQ(rate_matrix_per_fs(b, bath), table);
  EXPECT_EQ(jump_rates(b, bath, 10.0).matrix(), table * 10.0);
  BathSpec wrong{300.0, RealMatrix::Zero(3, 3), UphillRates::None, true};
  EXPECT_THROW(rate_matrix_per_fs(b, wrong), DimensionMismatch);
  table(0, 1) = -1.0;
  EXPECT_THROW(rate_matrix_per_fs(b, BathSpec{300.0, table, UphillRates::None, true}), SpecInvalid);
}

TEST(Rates, OversizedStepUnderflowsSurvival) {
  const auto r = shipped_run();
  EXPECT_THROW(jump_rates(r.basis, shipped().bath, 500.0), SurvivalUnderflow);
  EXPECT_THROW(jump_rates(r.basis, ohmic(-1.0), 10.0), SpecInvalid);
}

TEST(SitePopulations, ExcitonAndMixedStates) {
  const auto r = shipped_run();
  for (int k = 0; k < 7; ++k) {
    const auto p = site_populations(projector(7, k), r.basis);
    for (int m = 0; m < 7; ++m) EXPECT_NEAR(p[static_cast<std::size_t>(m)], r.basis.weight(m, k), 1e-14);
  }
  const auto mixed = site_populations(Matrix::Identity(7, 7) / 7.0, r.basis);
  for (double x : mixed) EXPECT_NEAR(x, 1.0 / 7.0, 1e-14);
}

TEST(SitePopulations, MatchRotationAndProjectors) {
  const auto r = shipped_run();
  Rng rng(2);
  const Matrix rho = rng.density(7);
  const auto p = site_populations(rho, r.basis);
  const auto q = observe(rho, r.projectors);
  double sum = 0.0;
  for (int m = 0; m < 7; ++m) {
    Complex direct = 0.0;
    for (int a = 0; a < 7; ++a)
      for (int b = 0; b < 7; ++b) direct += r.basis.transform(m, a) * rho(a, b) * std::conj(r.basis.transform(m, b));
    EXPECT_NEAR(p[static_cast<std::size_t>(m)], direct.real(), 1e-14);
    EXPECT_NEAR(q[static_cast<std::size_t>(m)], direct.real(), 1e-14);
    EXPECT_GE(p[static_cast<std::size_t>(m)], -1e-10);
    sum += p[static_cast<std::size_t>(m)];
  }
  EXPECT_NEAR(sum, rho.trace().real(), 1e-10);
  EXPECT_THROW(site_populations(Matrix::Identity(3, 3), r.basis), DimensionMismatch);
}

TEST(TransferEfficiency, SimpleTrajectories) {
  Trajectory on_three{{{0.0, {0, 0, 1, 0, 0, 0, 0}, 1.0, 0.0}}};
  EXPECT_DOUBLE_EQ(transfer_efficiency(on_three, kSink, 0.0), 1.0);
  Trajectory uniform{{{0.0, std::vector<double>(7, 1.0 / 7.0), 1.0, 0.0}}};
  EXPECT_NEAR(transfer_efficiency(uniform, kSink, 0.0), 2.0 / 7.0, 1e-15);
  EXPECT_THROW(transfer_efficiency(uniform, kSink, 10.0), TimeOutOfRange);
  EXPECT_THROW(transfer_efficiency(uniform, {9}, 0.0), IndexOutOfRange);
  EXPECT_LT(first_passage_fs(uniform, kSink, 0.5), 0.0);
}

TEST(Dynamics, PopulationIsConservedAtEveryPoint) {
  const auto r = shipped_run();
  for (const auto& p : evolve(r, 0, 1.0, true).points) {
    double s = 0.0;
    for (double x : p.populations) s += x;
    EXPECT_NEAR(s, p.trace, 1e-10);
  }
}

TEST(Dynamics, ShippedEfficiencyFromBothAntennaSites) {
  const auto r = shipped_run();
  EXPECT_GE(transfer_efficiency(evolve(r, 0, 1.0, true), kSink, 4000.0), 0.93);
  EXPECT_GE(transfer_efficiency(evolve(r, 5, 1.0, true), kSink, 4000.0), 0.93);
}

TEST(Dynamics, CoherentOnlyRunStaysLocalized) {
  const auto r = shipped_run();
  const auto coherent = evolve(r, 0, 1.0, false);
  for (const auto& p : coherent.points) EXPECT_LE(sink_population(p.populations, kSink), 0.4) << p.t_fs;
  EXPECT_GT(transfer_efficiency(evolve(r, 0, 1.0, true), kSink, 4000.0), 0.9);
}

TEST(Dynamics, SiteSixReachesSinkFirst) {
  const auto r = shipped_run();
  const double t1 = first_passage_fs(evolve(r, 0, 1.0, true), kSink, 0.5);
  const double t6 = first_passage_fs(evolve(r, 5, 1.0, true), kSink, 0.5);
  ASSERT_GT(t1, 0.0);
  ASSERT_GT(t6, 0.0);
  EXPECT_LT(t6, t1);
}

double site_two_swing(const Trajectory& t, double until) {
  double lo = 1.0, hi = 0.0;
  for (const auto& p : t.points)
    if (p.t_fs <= until) {
      lo = std::min(lo, p.populations[1]);
      hi = std::max(hi, p.populations[1]);
    }
  return hi - lo;
}

TEST(Dynamics, WeakCouplingKeepsSiteOneTwoCoherence) {
  const auto r = shipped_run();
  EXPECT_GT(site_two_swing(evolve(r, 0, 0.06, true, 50), 500.0), site_two_swing(evolve(r, 0, 1.0, true, 50), 500.0));
}

TEST(Dynamics, ConvergesToLindbladAtFirstOrder) {
  const auto r = shipped_run();
  const auto model = LindbladModel::from_rate_matrix(r.basis.hamiltonian(), r.rates);
  const std::vector<double> dts{20.0, 10.0, 5.0};
  const auto report = convergence_report(model, localized_state(r.basis, 0), 1000.0, dts);
  for (std::size_t k = 1; k < 3; ++k) {
    EXPECT_GE(report.rows[k].ratio, 1.6);
    EXPECT_LE(report.rows[k].ratio, 2.4);
  }
}

}  // namespace
}  // namespace enaqt::fmo
