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

// Compiles one ENAQT step into a gate list over system qubits, two bath
// qubits (B1, B2) and ancillas, and simulates it on a density-matrix register.
//
// Wire numbering: system s_1..s_n are wires 0..n-1 (s_1 most significant),
// B1 = n, B2 = n+1, ancillas n+2..2n+1. In a register of W wires, wire w is
// bit (W-1-w) of the basis index, so a register without ancillas is the
// ancilla-zero block of the full one.
//
// Exciton k (0-based) is encoded as system basis state k + (2^n - dim); for
// dim 7 that is E_1 = |001> .. E_7 = |111>, with |000> unused.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "enaqt/core.hpp"
#include "enaqt/kernel.hpp"

namespace enaqt::circuit {

inline int ceil_log2(int n) {
  int q = 0;
  while ((1 << q) < n) ++q;
  return std::max(q, 1);
}

struct QubitLayout {
  int dim = 0;
  int n_system = 0;

  static QubitLayout for_dim(int dim) {
    if (dim < 2) throw SpecInvalid("QubitLayout: dim must be >= 2");
    return {dim, ceil_log2(dim)};
  }

  int b1() const { return n_system; }
  int b2() const { return n_system + 1; }
  int ancilla(int k) const { return n_system + 2 + k; }
  int n_ancillas() const { return n_system; }
  /// System + bath wires: the register the logical gates act on.
  int logical_wires() const { return n_system + 2; }
  int total_wires() const { return 2 * n_system + 2; }
  int system_states() const { return 1 << n_system; }
  int offset() const { return system_states() - dim; }
  int encode(int exciton) const {
    if (exciton < 0 || exciton >= dim) throw IndexOutOfRange("QubitLayout: exciton index out of range");
    return offset() + exciton;
  }
  std::vector<int> system_wires() const {
    std::vector<int> w(static_cast<std::size_t>(n_system));
    for (int k = 0; k < n_system; ++k) w[static_cast<std::size_t>(k)] = k;
    return w;
  }
  /// Register index for (system basis state, B1, B2) with ancillas at zero.
  std::size_t index(int system_state, int b1_bit, int b2_bit, int wires) const {
    const int low = wires - n_system;
    return (static_cast<std::size_t>(system_state) << low) | (static_cast<std::size_t>(b1_bit) << (low - 1)) |
           (static_cast<std::size_t>(b2_bit) << (low - 2));
  }
};

enum class GateKind {
  ControlledRy,          ///< Ry(theta) on one target, any number of controls
  MultiControlledX,      ///< X on one target, any number of controls
  ControlledPermutation, ///< swaps two basis patterns over `wires`
  ControlledUnitary,     ///< payload on the system wires, under `controls`
  BasisChange,           ///< payload on the system wires, unconditional
  ResetB2,               ///< trace out the wire and re-prepare |0>
  TraceOutB1,            ///< trace out the wire (re-prepared |0> for the next step)
};

struct Control {
  int wire = 0;
  bool value = true;
  friend bool operator==(const Control&, const Control&) = default;
};

struct Gate {
  GateKind kind = GateKind::MultiControlledX;
  /// Target wire (Ry/X/reset/trace), permutation wires, or system wires (payload gates).
  std::vector<int> wires;
  std::vector<Control> controls;
  double theta = 0.0;
  /// Permutation patterns over `wires`, first wire most significant.
  std::uint64_t from = 0;
  std::uint64_t to = 0;
  /// Operator on the 2^n system states for payload gates.
  Matrix payload;
  /// Informational tag for export ("U", "D", "D^-1").
  std::string label;

  bool is_unitary() const { return kind != GateKind::ResetB2 && kind != GateKind::TraceOutB1; }
};

struct GateList {
  QubitLayout layout;
  std::vector<Gate> gates;
  int jumps = 0;
};

inline Matrix ry(double theta) {
  Matrix m(2, 2);
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  m << c, -s, s, c;
  return m;
}

inline double jump_angle(double gamma) { return 2.0 * std::asin(std::sqrt(gamma)); }

namespace detail {

inline std::size_t bit_of(int wire, int wires) { return std::size_t{1} << (wires - 1 - wire); }

inline void check_wire(int w, int wires) {
  if (w < 0 || w >= wires) throw LayoutMismatch("gate touches a wire outside the register");
}

inline bool controls_hold(std::size_t idx, const std::vector<Control>& controls, int wires) {
  for (const auto& c : controls)
    if (((idx & bit_of(c.wire, wires)) != 0) != c.value) return false;
  return true;
}

/// Index with the pattern `bits` (over `ws`, first most significant) written in.
inline std::size_t with_pattern(std::size_t idx, const std::vector<int>& ws, std::uint64_t bits, int wires) {
  const std::size_t n = ws.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t b = bit_of(ws[k], wires);
    if ((bits >> (n - 1 - k)) & 1U) idx |= b;
    else idx &= ~b;
  }
  return idx;
}

inline std::uint64_t read_pattern(std::size_t idx, const std::vector<int>& ws, int wires) {
  std::uint64_t v = 0;
  for (int w : ws) v = (v << 1) | ((idx & bit_of(w, wires)) ? 1U : 0U);
  return v;
}

inline void apply_single_left(const Matrix& op, const Gate& g, Matrix& m, int wires) {
  check_wire(g.wires.at(0), wires);
  for (const auto& c : g.controls) check_wire(c.wire, wires);
  const std::size_t tb = bit_of(g.wires[0], wires);
  const auto dim = static_cast<std::size_t>(m.rows());
  for (std::size_t r = 0; r < dim; ++r) {
    if ((r & tb) || !controls_hold(r, g.controls, wires)) continue;
    const auto r0 = static_cast<Eigen::Index>(r), r1 = static_cast<Eigen::Index>(r | tb);
    const Eigen::RowVectorXcd a = m.row(r0), b = m.row(r1);
    m.row(r0) = op(0, 0) * a + op(0, 1) * b;
    m.row(r1) = op(1, 0) * a + op(1, 1) * b;
  }
}

inline void apply_payload_left(const Gate& g, Matrix& m, int wires) {
  for (int w : g.wires) check_wire(w, wires);
  const auto block = static_cast<Eigen::Index>(std::size_t{1} << g.wires.size());
  if (g.payload.rows() != block || g.payload.cols() != block)
    throw LayoutMismatch("payload gate: operator does not match its wires");
  const auto dim = static_cast<std::size_t>(m.rows());
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(block));
  for (std::size_t base = 0; base < dim; ++base) {
    if (read_pattern(base, g.wires, wires) != 0 || !controls_hold(base, g.controls, wires)) continue;
    for (Eigen::Index k = 0; k < block; ++k)
      rows[static_cast<std::size_t>(k)] =
          static_cast<Eigen::Index>(with_pattern(base, g.wires, static_cast<std::uint64_t>(k), wires));
    Matrix gathered(block, m.cols());
    for (Eigen::Index k = 0; k < block; ++k) gathered.row(k) = m.row(rows[static_cast<std::size_t>(k)]);
    gathered = g.payload * gathered;
    for (Eigen::Index k = 0; k < block; ++k) m.row(rows[static_cast<std::size_t>(k)]) = gathered.row(k);
  }
}

inline void apply_permutation_left(const Gate& g, Matrix& m, int wires) {
  for (int w : g.wires) check_wire(w, wires);
  const auto dim = static_cast<std::size_t>(m.rows());
  for (std::size_t r = 0; r < dim; ++r) {
    if (read_pattern(r, g.wires, wires) != g.from || !controls_hold(r, g.controls, wires)) continue;
    const std::size_t partner = with_pattern(r, g.wires, g.to, wires);
    m.row(static_cast<Eigen::Index>(r)).swap(m.row(static_cast<Eigen::Index>(partner)));
  }
}

}  // namespace detail

/// G * m for a unitary gate acting on a register of `wires` wires.
inline void apply_left(const Gate& g, Matrix& m, int wires) {
  switch (g.kind) {
    case GateKind::ControlledRy: detail::apply_single_left(ry(g.theta), g, m, wires); return;
    case GateKind::MultiControlledX: {
      Matrix x(2, 2);
      x << 0, 1, 1, 0;
      detail::apply_single_left(x, g, m, wires);
      return;
    }
    case GateKind::ControlledPermutation: detail::apply_permutation_left(g, m, wires); return;
    case GateKind::ControlledUnitary:
    case GateKind::BasisChange: detail::apply_payload_left(g, m, wires); return;
    case GateKind::ResetB2:
    case GateKind::TraceOutB1: break;
  }
  throw LayoutMismatch("apply_left: gate is not unitary");
}

/// Full matrix of a unitary gate on `wires` wires.
inline Matrix gate_unitary(const Gate& g, int wires) {
  const Eigen::Index d = Eigen::Index{1} << wires;
  Matrix m = Matrix::Identity(d, d);
  apply_left(g, m, wires);
  return m;
}

/// Trace out `wire` and re-prepare it in |0>.
inline Matrix reset_wire(const Matrix& rho, int wire, int wires) {
  detail::check_wire(wire, wires);
  const std::size_t b = detail::bit_of(wire, wires);
  const auto d = static_cast<std::size_t>(rho.rows());
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (std::size_t i = 0; i < d; ++i) {
    if (i & b) continue;
    for (std::size_t j = 0; j < d; ++j) {
      if (j & b) continue;
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      out(ii, jj) = rho(ii, jj) + rho(static_cast<Eigen::Index>(i | b), static_cast<Eigen::Index>(j | b));
    }
  }
  return out;
}

/// Applies a gate as a channel element on a register density matrix.
inline void apply_gate(const Gate& g, Matrix& rho, int wires) {
  if (g.kind == GateKind::ResetB2 || g.kind == GateKind::TraceOutB1) {
    rho = reset_wire(rho, g.wires.at(0), wires);
    return;
  }
  apply_left(g, rho, wires);
  rho.adjointInPlace();
  apply_left(g, rho, wires);
  rho.adjointInPlace();
}

inline void require_layout(const GateList& gates, const QubitLayout& layout) {
  if (gates.layout.dim != layout.dim || gates.layout.n_system != layout.n_system)
    throw LayoutMismatch("gate list was compiled for a different layout");
}

/// Register state with B1 = B2 = 0 (and ancillas zero) from a system operator
/// over the encoded excitons.
inline Matrix embed(const Matrix& x, const QubitLayout& layout, int wires) {
  if (x.rows() != layout.dim || x.cols() != layout.dim)
    throw LayoutMismatch("embed: operator dim does not match the layout");
  const Eigen::Index d = Eigen::Index{1} << wires;
  Matrix reg = Matrix::Zero(d, d);
  for (int a = 0; a < layout.dim; ++a)
    for (int b = 0; b < layout.dim; ++b)
      reg(static_cast<Eigen::Index>(layout.index(layout.encode(a), 0, 0, wires)),
          static_cast<Eigen::Index>(layout.index(layout.encode(b), 0, 0, wires))) = x(a, b);
  return reg;
}

/// Reduced operator on all 2^n system states (everything else traced out).
inline Matrix reduce_to_system(const Matrix& reg, const QubitLayout& layout, int wires) {
  return partial_trace(reg, Eigen::Index{1} << layout.n_system, Eigen::Index{1} << (wires - layout.n_system),
                       Keep::A);
}

inline Matrix restrict_to_excitons(const Matrix& sys, const QubitLayout& layout) {
  const int off = layout.offset();
  return sys.block(off, off, layout.dim, layout.dim);
}

/// Population of system basis states outside the exciton encoding.
inline double leakage(const Matrix& sys, const QubitLayout& layout) {
  double s = 0.0;
  for (int k = 0; k < layout.offset(); ++k) s += std::abs(sys(k, k));
  return s;
}

struct RegisterRun {
  Matrix system;  ///< 2^n x 2^n reduced system state
  Matrix register_state;
};

inline RegisterRun run_register(const Matrix& x, const GateList& gates, const QubitLayout& layout,
                                bool with_ancillas = false) {
  require_layout(gates, layout);
  const int wires = with_ancillas ? layout.total_wires() : layout.logical_wires();
  Matrix reg = embed(x, layout, wires);
  for (const Gate& g : gates.gates) apply_gate(g, reg, wires);
  Matrix sys = reduce_to_system(reg, layout, wires);
  return {std::move(sys), std::move(reg)};
}

/// Linear action of the compiled circuit on a system operator (exciton basis).
inline Matrix circuit_map(const Matrix& x, const GateList& gates, const QubitLayout& layout,
                          bool with_ancillas = false) {
  return restrict_to_excitons(run_register(x, gates, layout, with_ancillas).system, layout);
}

inline DensityMatrix apply_circuit(const DensityMatrix& rho, const GateList& gates, const QubitLayout& layout) {
  if (rho.dim() != layout.dim) throw LayoutMismatch("apply_circuit: state dim does not match layout");
  return DensityMatrix::trusted(circuit_map(rho.matrix(), gates, layout));
}

namespace detail {

inline std::vector<Control> system_controls(const QubitLayout& layout, int system_state) {
  std::vector<Control> cs;
  for (int k = 0; k < layout.n_system; ++k)
    cs.push_back({k, ((system_state >> (layout.n_system - 1 - k)) & 1) != 0});
  return cs;
}

}  // namespace detail

/// Two gates for the jump |i> -> |j>: a controlled Ry on B2 (system = i,
/// B1 = 0), then the swap |0>_B1 |i> |1>_B2 <-> |1>_B1 |j> |1>_B2.
inline GateList build_jump_circuit(int i, int j, double gamma, const QubitLayout& layout) {
  if (i < 0 || j < 0 || i >= layout.dim || j >= layout.dim || i == j)
    throw IndexOutOfRange("build_jump_circuit: need distinct exciton indices inside the layout");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ProbabilityOutOfRange("build_jump_circuit: gamma outside [0, 1]");
  GateList out{layout, {}, 1};
  Gate rot;
  rot.kind = GateKind::ControlledRy;
  rot.wires = {layout.b2()};
  rot.controls = detail::system_controls(layout, layout.encode(i));
  rot.controls.push_back({layout.b1(), false});
  rot.theta = jump_angle(gamma);
  out.gates.push_back(std::move(rot));

  Gate perm;
  perm.kind = GateKind::ControlledPermutation;
  perm.wires.push_back(layout.b1());
  for (int w : layout.system_wires()) perm.wires.push_back(w);
  perm.wires.push_back(layout.b2());
  const int n = layout.n_system;
  perm.from = (static_cast<std::uint64_t>(layout.encode(i)) << 1) | 1U;
  perm.to = (std::uint64_t{1} << (n + 1)) | (static_cast<std::uint64_t>(layout.encode(j)) << 1) | 1U;
  out.gates.push_back(std::move(perm));
  return out;
}

inline Gate reset_b2(const QubitLayout& layout) {
  Gate g;
  g.kind = GateKind::ResetB2;
  g.wires = {layout.b2()};
  return g;
}

/// Payload on the 2^n system states: `op` on the encoded excitons, identity
/// on the unused states.
inline Matrix lift_to_system(const Matrix& op, const QubitLayout& layout) {
  Matrix full = Matrix::Identity(layout.system_states(), layout.system_states());
  full.block(layout.offset(), layout.offset(), layout.dim, layout.dim) = op;
  return full;
}

/// C = |0><0|_B1 (x) U + |1><1|_B1 (x) I.
inline Gate coherent_gate(const Matrix& u, const QubitLayout& layout) {
  Gate g;
  g.kind = GateKind::ControlledUnitary;
  g.wires = layout.system_wires();
  g.controls = {{layout.b1(), false}};
  g.payload = lift_to_system(u, layout);
  g.label = "U";
  return g;
}

/// Site -> exciton change of basis (D^dag on states) or its inverse.
inline Gate basis_change_gate(const Matrix& site_to_exciton_columns, const QubitLayout& layout, bool inverse) {
  Gate g;
  g.kind = GateKind::BasisChange;
  g.wires = layout.system_wires();
  g.payload = lift_to_system(inverse ? Matrix(site_to_exciton_columns)
                                     : Matrix(site_to_exciton_columns.adjoint()),
                             layout);
  g.label = inverse ? "D^-1" : "D";
  return g;
}

using JumpOrder = std::vector<std::pair<int, int>>;

inline JumpOrder lexicographic_order(int dim) {
  JumpOrder order;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      if (i != j) order.emplace_back(i, j);
  return order;
}

/// All dim(dim-1) jump sub-circuits (each followed by a B2 reset), then the
/// coherent gate C, then the B1 trace-out.
inline GateList build_step_circuit(const JumpRates& rates, const Matrix& u, const QubitLayout& layout,
                                   const JumpOrder& order) {
  if (rates.dim() != layout.dim) throw LayoutMismatch("build_step_circuit: rates dim does not match layout");
  require_unitary(u, 1e-10, "build_step_circuit");
  if (u.rows() != layout.dim) throw LayoutMismatch("build_step_circuit: U dim does not match layout");
  GateList out{layout, {}, 0};
  for (const auto& [i, j] : order) {
    auto jump = build_jump_circuit(i, j, rates(i, j), layout);
    for (auto& g : jump.gates) out.gates.push_back(std::move(g));
    out.gates.push_back(reset_b2(layout));
    ++out.jumps;
  }
  out.gates.push_back(coherent_gate(u, layout));
  Gate tr;
  tr.kind = GateKind::TraceOutB1;
  tr.wires = {layout.b1()};
  out.gates.push_back(std::move(tr));
  return out;
}

inline GateList build_step_circuit(const JumpRates& rates, const Matrix& u, const QubitLayout& layout) {
  return build_step_circuit(rates, u, layout, lexicographic_order(layout.dim));
}

// ---------------------------------------------------------------------------
// Operator-algebra reference: the same step as explicit Kraus matrices on
// B1 (x) system, ordered |p, q> -> p * dim + q.

/// M0^{ij}, M1^{ij} for one jump on B1 (x) system.
inline KrausPair jump_kraus_pair(int i, int j, double gamma, int dim) {
  if (i < 0 || j < 0 || i >= dim || j >= dim || i == j) throw IndexOutOfRange("jump_kraus_pair: bad indices");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ProbabilityOutOfRange("jump_kraus_pair: gamma outside [0, 1]");
  const Eigen::Index d2 = 2 * dim;
  Matrix m0 = Matrix::Identity(d2, d2);
  m0(i, i) = std::sqrt(1.0 - gamma);
  Matrix m1 = Matrix::Zero(d2, d2);
  m1(dim + j, i) = std::sqrt(gamma);
  return {std::move(m0), std::move(m1)};
}

/// Sequential Kraus application of every jump in `order`, then C, then B1 traced out.
inline Matrix sequential_kraus_map(const Matrix& x, const JumpRates& rates, const Matrix& u, const JumpOrder& order) {
  const int dim = static_cast<int>(rates.dim());
  if (x.rows() != dim || x.cols() != dim) throw DimensionMismatch("sequential_kraus_map: dim mismatch");
  Matrix joint = kron(projector(2, 0), x);
  for (const auto& [i, j] : order) {
    const auto [m0, m1] = jump_kraus_pair(i, j, rates(i, j), dim);
    joint = m0 * joint * m0.adjoint() + m1 * joint * m1.adjoint();
  }
  const Matrix c = kron(projector(2, 0), u) + kron(projector(2, 1), Matrix::Identity(dim, dim));
  joint = c * joint * c.adjoint();
  return partial_trace(joint, 2, dim, Keep::B);
}

inline Matrix sequential_kraus_map(const Matrix& x, const JumpRates& rates, const Matrix& u) {
  return sequential_kraus_map(x, rates, u, lexicographic_order(static_cast<int>(rates.dim())));
}

// ---------------------------------------------------------------------------
// Channel certificates.

using LinearMap = std::function<Matrix(const Matrix&)>;

/// sum_{a,b} |a><b| (x) Phi(|a><b|).
inline Matrix channel_choi(const LinearMap& channel, int dim) {
  const Eigen::Index d = dim;
  Matrix choi = Matrix::Zero(d * d, d * d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) choi.block(a * d, b * d, d, d) = channel(ket_bra(d, a, b));
  return choi;
}

/// max |Tr_out(Choi) - 1|: zero for a trace-preserving channel.
inline double choi_trace_residual(const Matrix& choi, int dim) {
  return max_abs(partial_trace(choi, dim, dim, Keep::A) - Matrix::Identity(dim, dim));
}

struct ChannelComparisonRow {
  double scale = 1.0;
  double distance = 0.0;
  double ratio = std::nan("");
};

/// Choi distance between the compiled circuit and the raw step map as the
/// rates are scaled by each s in `scales`.
inline std::vector<ChannelComparisonRow> compare_step_channels(const JumpRates& rates, const Matrix& u,
                                                               const std::vector<double>& scales) {
  const int dim = static_cast<int>(rates.dim());
  const auto layout = QubitLayout::for_dim(dim);
  std::vector<ChannelComparisonRow> rows;
  for (double s : scales) {
    const JumpRates scaled = rates.scaled(s);
    const auto gates = build_step_circuit(scaled, u, layout);
    const auto ops = build_evolution_operators(scaled, u);
    const Matrix a = channel_choi([&](const Matrix& x) { return circuit_map(x, gates, layout); }, dim);
    const Matrix b = channel_choi([&](const Matrix& x) { return enaqt_map(x, ops); }, dim);
    ChannelComparisonRow row{s, frob_dist(a, b)};
    if (!rows.empty()) row.ratio = rows.back().distance / row.distance;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Elementary decomposition and complexity accounting.

/// Lowers multi-controlled gates to gates with at most two controls using a
/// Toffoli ladder on the ancillas (computed, used, uncomputed). Permutations
/// become CNOT conjugations around one multi-controlled X. Payload gates,
/// resets and trace-outs pass through unchanged.
inline GateList decompose(const GateList& in) {
  const QubitLayout& layout = in.layout;
  GateList out{layout, {}, in.jumps};

  auto emit_single = [&](GateKind kind, int target, std::vector<Control> controls, double theta) {
    Gate g;
    g.kind = kind;
    g.wires = {target};
    g.theta = theta;
    if (controls.size() <= 2) {
      g.controls = std::move(controls);
      out.gates.push_back(std::move(g));
      return;
    }
    const int k = static_cast<int>(controls.size());
    if (k - 2 > layout.n_ancillas()) throw LayoutMismatch("decompose: not enough ancillas");
    std::vector<Gate> ladder;
    for (int a = 0; a < k - 2; ++a) {
      Gate t;
      t.kind = GateKind::MultiControlledX;
      t.wires = {layout.ancilla(a)};
      t.controls = {a == 0 ? controls[0] : Control{layout.ancilla(a - 1), true},
                    controls[static_cast<std::size_t>(a + 1)]};
      ladder.push_back(std::move(t));
    }
    for (const auto& t : ladder) out.gates.push_back(t);
    g.controls = {{layout.ancilla(k - 3), true}, controls.back()};
    out.gates.push_back(std::move(g));
    for (auto it = ladder.rbegin(); it != ladder.rend(); ++it) out.gates.push_back(*it);
  };

  for (const Gate& g : in.gates) {
    switch (g.kind) {
      case GateKind::ControlledRy:
      case GateKind::MultiControlledX: emit_single(g.kind, g.wires.at(0), g.controls, g.theta); break;
      case GateKind::ControlledPermutation: {
        if (!g.controls.empty()) throw LayoutMismatch("decompose: controlled permutation with extra controls");
        const std::size_t n = g.wires.size();
        auto bit = [n](std::uint64_t v, std::size_t k) { return ((v >> (n - 1 - k)) & 1U) != 0; };
        std::uint64_t from = g.from, to = g.to;
        std::size_t pivot = n;
        for (std::size_t k = 0; k < n && pivot == n; ++k)
          if (bit(from, k) != bit(to, k) && !bit(from, k)) pivot = k;
        if (pivot == n) {
          std::swap(from, to);
          for (std::size_t k = 0; k < n && pivot == n; ++k)
            if (bit(from, k) != bit(to, k) && !bit(from, k)) pivot = k;
        }
        if (pivot == n) break;  // identical patterns: identity
        std::vector<Gate> cnots;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == pivot || bit(from, k) == bit(to, k)) continue;
          Gate c;
          c.kind = GateKind::MultiControlledX;
          c.wires = {g.wires[k]};
          c.controls = {{g.wires[pivot], true}};
          cnots.push_back(std::move(c));
        }
        for (const auto& c : cnots) out.gates.push_back(c);
        std::vector<Control> cs;
        for (std::size_t k = 0; k < n; ++k)
          if (k != pivot) cs.push_back({g.wires[k], bit(from, k)});
        emit_single(GateKind::MultiControlledX, g.wires[pivot], std::move(cs), 0.0);
        for (const auto& c : cnots) out.gates.push_back(c);
        break;
      }
      default: out.gates.push_back(g); break;
    }
  }
  return out;
}

struct GateCount {
  int dim = 0;
  int jumps = 0;
  /// Counting convention: a multi-controlled jump gate over the system
  /// register costs ceil(log2 dim) elementary (<= two-control) gates.
  int gates_per_jump = 0;
  int jump_gates = 0;
  int coherent_gates = 0;
  int elementary_gates = 0;
  /// Gates with at most two controls after `decompose`, ladders uncomputed.
  int toffoli_expanded = 0;
  int qubits = 0;
};

inline GateCount gate_count(const GateList& gates, int dim) {
  if (gates.layout.dim != dim) throw LayoutMismatch("gate_count: gate list compiled for another dim");
  const int n = gates.layout.n_system;
  GateCount c;
  c.dim = dim;
  int jump_gates = 0;
  for (const Gate& g : gates.gates) {
    switch (g.kind) {
      case GateKind::ControlledRy:
        ++c.jumps;
        jump_gates += n;
        break;
      case GateKind::ControlledPermutation: jump_gates += n; break;
      case GateKind::ControlledUnitary: ++c.coherent_gates; break;
      default: break;
    }
  }
  c.gates_per_jump = c.jumps > 0 ? jump_gates / c.jumps : 0;
  c.jump_gates = jump_gates;
  c.elementary_gates = jump_gates + c.coherent_gates;
  for (const Gate& g : decompose(gates).gates)
    if (g.is_unitary()) ++c.toffoli_expanded;
  c.qubits = gates.layout.total_wires();
  return c;
}

// ---------------------------------------------------------------------------
// Line-oriented text export: `KIND wires params...`, one gate per line.

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string join_wires(const std::vector<int>& ws) {
  std::string s;
  for (std::size_t k = 0; k < ws.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(ws[k]);
  }
  return s;
}

inline std::string join_controls(const std::vector<Control>& cs) {
  if (cs.empty()) return "-";
  std::string s;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(cs[k].wire) + ':' + (cs[k].value ? '1' : '0');
  }
  return s;
}

inline std::string bits(std::uint64_t v, std::size_t n) {
  std::string s(n, '0');
  for (std::size_t k = 0; k < n; ++k)
    if ((v >> (n - 1 - k)) & 1U) s[k] = '1';
  return s;
}

inline std::string format_matrix(const Matrix& m) {
  std::string s = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) s += ';';
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) s += ' ';
      s += format_double(m(r, c).real()) + ',' + format_double(m(r, c).imag());
    }
  }
  return s + "]";
}

}  // namespace detail

inline std::string gate_line(const Gate& g) {
  using detail::join_controls;
  using detail::join_wires;
  switch (g.kind) {
    case GateKind::ControlledRy:
      return "CRY " + join_wires(g.wires) + " " + join_controls(g.controls) + " theta=" + detail::format_double(g.theta);
    case GateKind::MultiControlledX: return "MCX " + join_wires(g.wires) + " " + join_controls(g.controls);
    case GateKind::ControlledPermutation:
      return "CPERM " + join_wires(g.wires) + " " + join_controls(g.controls) +
             " from=" + detail::bits(g.from, g.wires.size()) + " to=" + detail::bits(g.to, g.wires.size());
    case GateKind::ControlledUnitary:
      return "CU " + join_wires(g.wires) + " " + join_controls(g.controls) + " label=" + g.label +
             " u=" + detail::format_matrix(g.payload);
    case GateKind::BasisChange:
      return "BASIS " + join_wires(g.wires) + " - label=" + g.label + " u=" + detail::format_matrix(g.payload);
    case GateKind::ResetB2: return "RESET " + join_wires(g.wires);
    case GateKind::TraceOutB1: return "TRACE " + join_wires(g.wires);
  }
  return {};
}

inline std::string to_text(const GateList& gates) {
  std::ostringstream os;
  os << "# enaqt gatelist v1 dim=" << gates.layout.dim << " system_qubits=" << gates.layout.n_system
     << " wires=" << gates.layout.total_wires() << " jumps=" << gates.jumps << '\n';
  for (const Gate& g : gates.gates) os << gate_line(g) << '\n';
  return os.str();
}

}  // namespace enaqt::circuit
