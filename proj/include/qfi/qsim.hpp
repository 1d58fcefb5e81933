#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qfi/errors.hpp"

namespace qfi {

using Amplitude = std::complex<double>;

// Dense simulation memory guard; 2^24 amplitudes is 256 MiB.
inline constexpr int kMaxQubits = 24;

// Pure n-qubit state as the full amplitude vector. Qubit 0 is the least
// significant bit of the amplitude index.
struct StateVector {
  int n_qubits = 0;
  std::vector<Amplitude> amplitudes;

  std::size_t dim() const { return amplitudes.size(); }

  double norm() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return std::sqrt(s);
  }

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

inline StateVector zero_state(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    throw CapacityError("qubit count " + std::to_string(n_qubits) +
                        " outside supported range [1, " + std::to_string(kMaxQubits) + "]");
  StateVector s;
  s.n_qubits = n_qubits;
  s.amplitudes.assign(std::size_t{1} << n_qubits, Amplitude{0.0, 0.0});
  s.amplitudes[0] = Amplitude{1.0, 0.0};
  return s;
}

enum class GateKind { Hadamard, Phase, Cnot, RotY };

struct GateOp {
  GateKind kind = GateKind::Hadamard;
  int target = 0;
  int control = -1;    // Cnot only
  double angle = 0.0;  // Phase lambda / RotY theta, radians

  static GateOp hadamard(int target) { return {GateKind::Hadamard, target, -1, 0.0}; }
  static GateOp phase(int target, double lambda) { return {GateKind::Phase, target, -1, lambda}; }
  static GateOp cnot(int control, int target) { return {GateKind::Cnot, target, control, 0.0}; }
  static GateOp rot_y(int target, double theta) { return {GateKind::RotY, target, -1, theta}; }

  friend bool operator==(const GateOp&, const GateOp&) = default;
};

struct Circuit {
  int n_qubits = 0;
  std::vector<GateOp> ops;

  friend bool operator==(const Circuit&, const Circuit&) = default;
};

inline void validate_gate(const GateOp& op, int n_qubits) {
  if (op.target < 0 || op.target >= n_qubits)
    throw ValidationError("gate target " + std::to_string(op.target) +
                          " out of range for " + std::to_string(n_qubits) + " qubits");
  if (op.kind == GateKind::Cnot) {
    if (op.control < 0 || op.control >= n_qubits)
      throw ValidationError("CNOT control " + std::to_string(op.control) +
                            " out of range for " + std::to_string(n_qubits) + " qubits");
    if (op.control == op.target) throw ValidationError("CNOT control equals target");
  }
}

namespace detail {

// Real 2x2 update on the (a0, a1) pair of every index pair differing in bit
// `target`: a0' = m00*a0 + m01*a1, a1' = m10*a0 + m11*a1.
inline void apply_real_2x2(StateVector& s, int target, double m00, double m01, double m10,
                           double m11) {
  const std::size_t bit = std::size_t{1} << target;
  const std::size_t dim = s.amplitudes.size();
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & bit) continue;
    Amplitude& a0 = s.amplitudes[base];
    Amplitude& a1 = s.amplitudes[base | bit];
    const Amplitude t0 = a0;
    a0 = m00 * t0 + m01 * a1;
    a1 = m10 * t0 + m11 * a1;
  }
}

}  // namespace detail

// In-place counterpart of apply_gate; run_circuit uses it on its own copy.
inline void apply_gate_in_place(StateVector& state, const GateOp& op) {
  validate_gate(op, state.n_qubits);
  switch (op.kind) {
    case GateKind::Hadamard: {
      constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
      detail::apply_real_2x2(state, op.target, inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2);
      break;
    }
    case GateKind::RotY: {
      const double c = std::cos(op.angle / 2.0);
      const double sn = std::sin(op.angle / 2.0);
      detail::apply_real_2x2(state, op.target, c, -sn, sn, c);
      break;
    }
    case GateKind::Phase: {
      const Amplitude w{std::cos(op.angle), std::sin(op.angle)};
      const std::size_t bit = std::size_t{1} << op.target;
      for (std::size_t i = 0; i < state.amplitudes.size(); ++i)
        if (i & bit) state.amplitudes[i] *= w;
      break;
    }
    case GateKind::Cnot: {
      const std::size_t cbit = std::size_t{1} << op.control;
      const std::size_t tbit = std::size_t{1} << op.target;
      for (std::size_t i = 0; i < state.amplitudes.size(); ++i)
        if ((i & cbit) && !(i & tbit)) std::swap(state.amplitudes[i], state.amplitudes[i | tbit]);
      break;
    }
  }
}

inline StateVector apply_gate(StateVector state, const GateOp& op) {
  apply_gate_in_place(state, op);
  return state;
}

inline StateVector run_circuit(StateVector state, const Circuit& circuit) {
  if (circuit.n_qubits != state.n_qubits)
    throw ValidationError("circuit is for " + std::to_string(circuit.n_qubits) +
                          " qubits, state has " + std::to_string(state.n_qubits));
  for (const GateOp& op : circuit.ops) apply_gate_in_place(state, op);
  return state;
}

struct FeatureMapSpec {
  int feature_dimension = 1;
  int reps = 1;
  // Linear entanglement is the only supported strategy.

  friend bool operator==(const FeatureMapSpec&, const FeatureMapSpec&) = default;
};

// Second-order Pauli-Z data-encoding circuit with linear entanglement.
// Per repetition: H on every qubit, a single-qubit phase 2*x_i, then for each
// neighbor pair the two-qubit interaction compiled as CNOT-Phase-CNOT with
// phase 2*(pi - x_i)*(pi - x_j).
inline Circuit build_zz_feature_map(std::span<const double> x, const FeatureMapSpec& spec) {
  if (spec.feature_dimension < 1) throw ValidationError("feature dimension must be >= 1");
  if (spec.reps < 1) throw ValidationError("feature map reps must be >= 1");
  if (static_cast<int>(x.size()) != spec.feature_dimension)
    throw ValidationError("feature vector length " + std::to_string(x.size()) +
                          " does not match feature dimension " +
                          std::to_string(spec.feature_dimension));
  constexpr double pi = std::numbers::pi;
  const int n = spec.feature_dimension;
  Circuit c{n, {}};
  c.ops.reserve(static_cast<std::size_t>(spec.reps) * (2 * n + 3 * (n - 1)));
  for (int rep = 0; rep < spec.reps; ++rep) {
    for (int q = 0; q < n; ++q) c.ops.push_back(GateOp::hadamard(q));
    for (int q = 0; q < n; ++q) c.ops.push_back(GateOp::phase(q, 2.0 * x[q]));
    for (int q = 0; q + 1 < n; ++q) {
      c.ops.push_back(GateOp::cnot(q, q + 1));
      c.ops.push_back(GateOp::phase(q + 1, 2.0 * (pi - x[q]) * (pi - x[q + 1])));
      c.ops.push_back(GateOp::cnot(q, q + 1));
    }
  }
  return c;
}

// "Real amplitudes" style variational ansatz: RotY on every qubit followed by
// a linear CNOT chain, repeated `reps` times, closed by a final RotY layer.
// Parameters are consumed layer-major, qubit-minor.
inline Circuit build_ry_ansatz(int n_qubits, int reps, std::span<const double> theta) {
  if (n_qubits < 1) throw ValidationError("ansatz needs at least one qubit");
  if (reps < 0) throw ValidationError("ansatz reps must be >= 0");
  const std::size_t expected = static_cast<std::size_t>(n_qubits) * (reps + 1);
  if (theta.size() != expected)
    throw ValidationError("ansatz expects " + std::to_string(expected) + " parameters, got " +
                          std::to_string(theta.size()));
  Circuit c{n_qubits, {}};
  std::size_t t = 0;
  for (int layer = 0; layer < reps; ++layer) {
    for (int q = 0; q < n_qubits; ++q) c.ops.push_back(GateOp::rot_y(q, theta[t++]));
    for (int q = 0; q + 1 < n_qubits; ++q) c.ops.push_back(GateOp::cnot(q, q + 1));
  }
  for (int q = 0; q < n_qubits; ++q) c.ops.push_back(GateOp::rot_y(q, theta[t++]));
  return c;
}

// State prepared by encoding a feature vector through the ZZ map.
inline StateVector feature_map_state(std::span<const double> v, const FeatureMapSpec& spec) {
  return run_circuit(zero_state(spec.feature_dimension), build_zz_feature_map(v, spec));
}

inline Amplitude inner_product(const StateVector& a, const StateVector& b) {
  if (a.n_qubits != b.n_qubits || a.amplitudes.size() != b.amplitudes.size())
    throw ValidationError("inner product requires states of equal size");
  Amplitude acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
    acc += std::conj(a.amplitudes[i]) * b.amplitudes[i];
  return acc;
}

// <Z^(x)n> = sum_b (-1)^popcount(b) |amp_b|^2, in [-1, 1].
inline double parity_expectation(const StateVector& state) {
  double acc = 0.0;
  for (std::size_t i = 0; i < state.amplitudes.size(); ++i) {
    const double p = std::norm(state.amplitudes[i]);
    acc += (std::popcount(i) & 1) ? -p : p;
  }
  return acc;
}

}  // namespace qfi
