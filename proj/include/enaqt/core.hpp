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

// Dense complex-matrix primitives shared by the kernel, the oracle and the
// circuit backend.
//
// Units: energies in cm^-1, times in fs. A Hamiltonian entry E (cm^-1)
// accumulates phase 2*pi*c*E*t with c in cm/fs.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>

#include "enaqt/errors.hpp"

namespace enaqt {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kSpeedOfLightCmPerFs = 2.99792458e-5;
/// Angular frequency (rad/fs) of one wavenumber: 1/hbar in cm^-1 * fs units.
inline constexpr double kRadPerFsPerCm1 = 2.0 * std::numbers::pi * kSpeedOfLightCmPerFs;
/// Boltzmann constant in cm^-1 / K.
inline constexpr double kBoltzmannCm1PerK = 0.695034800;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kEighInputTol = 1e-10;
inline constexpr double kPsdTol = 1e-8;

namespace detail {

inline std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace detail

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// max |m - m^dagger| over entries.
inline double hermiticity_residual(const Matrix& m) {
  return max_abs(m - m.adjoint());
}

inline bool all_finite(const Matrix& m) {
  return m.allFinite();
}

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionMismatch(std::string(what) + ": expected a non-empty square matrix, got " +
                            detail::shape(m));
  }
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch(std::string(what) + ": shape " + detail::shape(a) + " vs " +
                            detail::shape(b));
  }
}

inline void require_hermitian(const Matrix& m, double tol, const char* what) {
  require_square(m, what);
  if (!all_finite(m)) throw NonFinite(std::string(what) + ": non-finite entry");
  const double r = hermiticity_residual(m);
  if (r > tol) {
    std::ostringstream os;
    os << what << ": hermiticity residual " << r << " exceeds " << tol;
    throw NotHermitian(os.str());
  }
}

/// Eigenvalues ascending; eigenvectors stored as columns.
struct EigenDecomposition {
  RealVector values;
  Matrix vectors;
};

inline EigenDecomposition eigh(const Matrix& m) {
  require_hermitian(m, kEighInputTol, "eigh");
  // Solve on the exactly hermitian part so the solver never sees asymmetry.
  const Matrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigh: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline double min_eigenvalue(const Matrix& hermitian) {
  const Matrix sym = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

/// e^{-i h dt / hbar}, built from the eigendecomposition of h so the result is
/// unitary to eigensolver precision.
inline Matrix mat_exp_unitary(const Matrix& h, double dt_fs,
                              double rad_per_fs_per_unit = kRadPerFsPerCm1) {
  if (!(dt_fs >= 0.0)) throw SpecInvalid("mat_exp_unitary: dt must be >= 0");
  const auto [values, vectors] = eigh(h);
  Vector phases(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    phases(k) = std::polar(1.0, -rad_per_fs_per_unit * values(k) * dt_fs);
  }
  return vectors * phases.asDiagonal() * vectors.adjoint();
}

inline double frob_dist(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "frob_dist");
  return (a - b).norm();
}

enum class Keep { A, B };

/// Partial trace of an operator on A (x) B, A being the slow (leading) index.
inline Matrix partial_trace(const Matrix& m, Eigen::Index dim_a, Eigen::Index dim_b, Keep keep) {
  require_square(m, "partial_trace");
  if (dim_a < 1 || dim_b < 1 || dim_a * dim_b != m.rows()) {
    std::ostringstream os;
    os << "partial_trace: dims (" << dim_a << ", " << dim_b << ") do not factor " << m.rows();
    throw DimensionMismatch(os.str());
  }
  if (keep == Keep::A) {
    Matrix out = Matrix::Zero(dim_a, dim_a);
    for (Eigen::Index i = 0; i < dim_a; ++i)
      for (Eigen::Index j = 0; j < dim_a; ++j)
        for (Eigen::Index b = 0; b < dim_b; ++b) out(i, j) += m(i * dim_b + b, j * dim_b + b);
    return out;
  }
  Matrix out = Matrix::Zero(dim_b, dim_b);
  for (Eigen::Index a = 0; a < dim_a; ++a)
    out += m.block(a * dim_b, a * dim_b, dim_b, dim_b);
  return out;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// |k><k| in dimension dim.
inline Matrix projector(Eigen::Index dim, Eigen::Index k) {
  Matrix p = Matrix::Zero(dim, dim);
  p(k, k) = 1.0;
  return p;
}

/// |to><from| in dimension dim.
inline Matrix ket_bra(Eigen::Index dim, Eigen::Index to, Eigen::Index from) {
  Matrix p = Matrix::Zero(dim, dim);
  p(to, from) = 1.0;
  return p;
}

/// A hermitian, (numerically) positive operator. Trace is not pinned here:
/// the kernel's raw step drifts by O(dt^2) and callers track that tolerance.
class DensityMatrix {
 public:
  /// Wraps m without checks. Use for outputs of maps known to preserve the
  /// invariants; use validate_density at trust boundaries.
  static DensityMatrix trusted(Matrix m) { return DensityMatrix(std::move(m)); }

  static DensityMatrix pure(const Vector& psi) {
    const Vector n = psi / psi.norm();
    return DensityMatrix(n * n.adjoint());
  }

  static DensityMatrix basis_state(Eigen::Index dim, Eigen::Index k) {
    if (k < 0 || k >= dim) throw IndexOutOfRange("basis_state: index out of range");
    return DensityMatrix(projector(dim, k));
  }

  static DensityMatrix maximally_mixed(Eigen::Index dim) {
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double trace() const { return m_.trace().real(); }

 private:
  explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

inline DensityMatrix validate_density(const Matrix& m, double trace_tol, double psd_tol = kPsdTol) {
  require_hermitian(m, kHermitianTol, "validate_density");
  const double tr_imag = std::abs(m.trace().imag());
  const double tr_dev = std::abs(m.trace().real() - 1.0);
  if (tr_dev > trace_tol || tr_imag > trace_tol) {
    std::ostringstream os;
    os << "validate_density: trace deviation " << tr_dev << " exceeds " << trace_tol;
    throw TraceOutOfTolerance(os.str());
  }
  const double lo = min_eigenvalue(m);
  if (lo < -psd_tol) {
    std::ostringstream os;
    os << "validate_density: minimum eigenvalue " << lo << " below -" << psd_tol;
    throw NotPositive(os.str());
  }
  return DensityMatrix::trusted(0.5 * (m + m.adjoint()));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, Eigen::Index dim_a, Eigen::Index dim_b,
                                   Keep keep) {
  return DensityMatrix::trusted(partial_trace(rho.matrix(), dim_a, dim_b, keep));
}

}  // namespace enaqt
