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

namespace enaqt {
namespace {

using testing::Rng;

// Reference exponential: 20-term Taylor series of exp(-i c h dt), with the
// argument first scaled down by 2^s and squared back up.
Matrix taylor_exp(const Matrix& h, double dt) {
  const Complex factor(0.0, -kRadPerFsPerCm1 * dt);
  const int s = 8;
  const Matrix a = factor * h / std::pow(2.0, s);
  Matrix sum = Matrix::Identity(h.rows(), h.cols());
  Matrix term = sum;
  for (int k = 1; k <= 20; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

// Reference partial trace by explicit double-index summation.
Matrix index_sum_trace(const Matrix& m, int da, int db, Keep keep) {
  if (keep == Keep::A) {
    Matrix out = Matrix::Zero(da, da);
    for (int i = 0; i < da; ++i)
      for (int j = 0; j < da; ++j)
        for (int k = 0; k < db; ++k) out(i, j) += m(i * db + k, j * db + k);
    return out;
  }
  Matrix out = Matrix::Zero(db, db);
  for (int i = 0; i < db; ++i)
    for (int j = 0; j < db; ++j)
      for (int k = 0; k < da; ++k) out(i, j) += m(k * db + i, k * db + j);
  return out;
}

TEST(Eigh, IdentityHasUnitEigenvaluesAndOrthonormalVectors) {
  const auto e = eigh(Matrix::Identity(3, 3));
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(e.values(k), 1.0, 1e-15);
  EXPECT_LE(max_abs(e.vectors.adjoint() * e.vectors - Matrix::Identity(3, 3)), 1e-12);
}

TEST(Eigh, DiagonalInputSortsAscending) {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 5.0;
  d(2, 2) = 2.0;
  const auto e = eigh(d);
  EXPECT_DOUBLE_EQ(e.values(0), 1.0);
  EXPECT_DOUBLE_EQ(e.values(1), 2.0);
  EXPECT_DOUBLE_EQ(e.values(2), 5.0);
  EXPECT_NEAR(std::abs(e.vectors(2, 1)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(1, 2)), 1.0, 1e-15);
}

TEST(Eigh, ReconstructsRandomHermitian) {
  Rng rng(11);
  for (int n : {2, 7, 16, 32}) {
    const Matrix m = rng.hermitian(n, 50.0);
    const auto e = eigh(m);
    const Matrix back = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    EXPECT_LE((back - m).norm(), 1e-9 * (1.0 + m.norm())) << "n=" << n;
    EXPECT_LE(max_abs(e.vectors.adjoint() * e.vectors - Matrix::Identity(n, n)), 1e-12);
    for (int k = 0; k < n; ++k)
      EXPECT_LE((m * e.vectors.col(k) - e.values(k) * e.vectors.col(k)).norm(), 1e-10 * m.norm());
  }
}

TEST(Eigh, RejectsNonHermitian) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = 1e-6;
  EXPECT_THROW(eigh(m), NotHermitian);
}

TEST(MatExp, ZeroHamiltonianGivesIdentity) {
  EXPECT_LE(max_abs(mat_exp_unitary(Matrix::Zero(4, 4), 10.0) - Matrix::Identity(4, 4)), 1e-15);
}

TEST(MatExp, DiagonalHamiltonianGivesPhases) {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = 100.0;
  h(1, 1) = -250.0;
  const Matrix u = mat_exp_unitary(h, 7.0);
  EXPECT_LE(std::abs(u(0, 0) - std::exp(Complex(0, -kRadPerFsPerCm1 * 100.0 * 7.0))), 1e-14);
  EXPECT_LE(std::abs(u(1, 1) - std::exp(Complex(0, kRadPerFsPerCm1 * 250.0 * 7.0))), 1e-14);
  EXPECT_EQ(u(0, 1), Complex(0.0));
}

TEST(MatExp, MatchesTaylorSeriesForCoupledPair) {
  Matrix h(2, 2);
  h << 120.0, -87.7, -87.7, 280.0;
  EXPECT_LE(max_abs(mat_exp_unitary(h, 10.0) - taylor_exp(h, 10.0)), 1e-10);
  Rng rng(3);
  const Matrix g = rng.hermitian(5, 200.0);
  EXPECT_LE(max_abs(mat_exp_unitary(g, 4.0) - taylor_exp(g, 4.0)), 1e-10);
}

TEST(MatExp, IsUnitaryAndHasGroupProperty) {
  Rng rng(5);
  const Matrix h = rng.hermitian(7, 300.0);
  const Matrix u1 = mat_exp_unitary(h, 3.0);
  const Matrix u2 = mat_exp_unitary(h, 8.5);
  EXPECT_LE(max_abs(u1 * u1.adjoint() - Matrix::Identity(7, 7)), 1e-10);
  EXPECT_LE(max_abs(u1 * u2 - mat_exp_unitary(h, 11.5)), 1e-9);
}

TEST(MatExp, RejectsNonHermitian) {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 1) = 1.0;
  EXPECT_THROW(mat_exp_unitary(h, 1.0), NotHermitian);
}

TEST(PartialTrace, ProductStateKeepsFactor) {
  Rng rng(7);
  const Matrix a = rng.density(3);
  const Matrix m = kron(a, projector(2, 0));
  EXPECT_LE(max_abs(partial_trace(m, 3, 2, Keep::A) - a), 1e-15);
  EXPECT_LE(max_abs(partial_trace(m, 3, 2, Keep::B) - projector(2, 0)), 1e-15);
}

TEST(PartialTrace, BellStateGivesMaximallyMixed) {
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const auto rho = DensityMatrix::pure(bell);
  const auto a = partial_trace(rho, 2, 2, Keep::A);
  EXPECT_LE(max_abs(a.matrix() - 0.5 * Matrix::Identity(2, 2)), 1e-15);
}

TEST(PartialTrace, MatchesIndexSummation) {
  Rng rng(13);
  const Matrix m = rng.density(6);
  for (Keep keep : {Keep::A, Keep::B}) {
    const Matrix got = partial_trace(m, 3, 2, keep);
    EXPECT_LE(max_abs(got - index_sum_trace(m, 3, 2, keep)), 1e-12);
    EXPECT_LE(hermiticity_residual(got), 1e-15);
    EXPECT_NEAR(got.trace().real(), m.trace().real(), 1e-12);
  }
}

TEST(PartialTrace, IsLinear) {
  Rng rng(17);
  const Matrix r1 = rng.density(6), r2 = rng.density(6);
  const double a = 0.3, b = -1.7;
  EXPECT_LE(max_abs(partial_trace(a * r1 + b * r2, 2, 3, Keep::B) -
                    (a * partial_trace(r1, 2, 3, Keep::B) + b * partial_trace(r2, 2, 3, Keep::B))),
            1e-14);
}

TEST(PartialTrace, RejectsBadFactorization) {
  EXPECT_THROW(partial_trace(Matrix::Identity(6, 6), 4, 2, Keep::A), DimensionMismatch);
}

TEST(FrobDist, Basics) {
  Rng rng(19);
  const Matrix m = rng.matrix(3, 3);
  EXPECT_EQ(frob_dist(m, m), 0.0);
  EXPECT_NEAR(frob_dist(Matrix::Zero(2, 2), Matrix::Identity(2, 2)), std::sqrt(2.0), 1e-15);
  const Matrix n = rng.matrix(3, 3);
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += std::norm(m(i, j) - n(i, j));
  EXPECT_NEAR(frob_dist(m, n), std::sqrt(s), 1e-14);
  EXPECT_THROW(frob_dist(m, Matrix::Zero(2, 2)), DimensionMismatch);
}

TEST(ValidateDensity, AcceptsAndRejects) {
  Matrix ok = Matrix::Zero(2, 2);
  ok(0, 0) = ok(1, 1) = 0.5;
  EXPECT_NO_THROW(validate_density(ok, 1e-12));

  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  EXPECT_THROW(validate_density(neg, 1e-12), NotPositive);

  Matrix skew = ok;
  skew(0, 1) = 1e-6;
  EXPECT_THROW(validate_density(skew, 1e-12), NotHermitian);

  EXPECT_THROW(validate_density(2.0 * ok, 1e-12), TraceOutOfTolerance);
}

TEST(ValidateDensity, ErrorsShareNumericalBase) {
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  EXPECT_THROW(validate_density(neg, 1e-12), NumericalError);
}

}  // namespace
}  // namespace enaqt
