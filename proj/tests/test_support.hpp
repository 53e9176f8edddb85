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

// Shared fixtures: seeded random matrices and small model builders.

#pragma once

#include <random>
#include <string>

#include "enaqt/app.hpp"
#include "enaqt/enaqt.hpp"

namespace enaqt::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  Complex complex() { return {uniform(), uniform()}; }

  Matrix matrix(Eigen::Index n, Eigen::Index m) {
    Matrix a(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j) a(i, j) = complex();
    return a;
  }
  Matrix hermitian(Eigen::Index n, double scale = 1.0) {
    const Matrix a = matrix(n, n);
    return scale * 0.5 * (a + a.adjoint());
  }
  Matrix unitary(Eigen::Index n) { return mat_exp_unitary(hermitian(n, 1000.0), 10.0); }
  /// Full-rank density matrix with generic coherences.
  Matrix density(Eigen::Index n) {
    const Matrix a = matrix(n, n);
    Matrix rho = a * a.adjoint();
    return rho / rho.trace().real();
  }
  Vector ket(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = complex();
    return v / v.norm();
  }
  /// Valid per-step probabilities with row sums <= max_out.
  RealMatrix rates(Eigen::Index n, double max_out) {
    RealMatrix g = RealMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) g(i, j) = uniform(0.0, 1.0);
      g.row(i) *= max_out * uniform(0.2, 1.0) / g.row(i).sum();
    }
    return g;
  }

 private:
  std::mt19937_64 gen_;
};

inline std::string data_path(const std::string& name) { return std::string(ENAQT_DATA_DIR) + "/" + name; }

}  // namespace enaqt::testing
