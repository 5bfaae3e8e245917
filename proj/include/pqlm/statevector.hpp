#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "pqlm/common.hpp"

namespace pqlm {

using cxd = std::complex<double>;

inline constexpr int kMaxQubits = 12;

enum class GateKind { H, RX, RY, RZ, CNOT };

struct Gate {
  GateKind kind = GateKind::H;
  int target = 0;
  int control = -1;   // CNOT only
  double angle = 0.0; // RX/RY/RZ only

  static Gate h(int target) { return Gate{GateKind::H, target, -1, 0.0}; }
  static Gate rx(int target, double angle) { return Gate{GateKind::RX, target, -1, angle}; }
  static Gate ry(int target, double angle) { return Gate{GateKind::RY, target, -1, angle}; }
  static Gate rz(int target, double angle) { return Gate{GateKind::RZ, target, -1, angle}; }
  static Gate cnot(int control, int target) { return Gate{GateKind::CNOT, target, control, 0.0}; }
};

// 2x2 matrix of a single-qubit gate, row-major. CNOT is rejected.
std::array<cxd, 4> gate_matrix(const Gate& gate);

// Dense amplitude vector over n qubits. Qubit 0 is the least significant
// bit of the amplitude index.
class StateVector {
 public:
  explicit StateVector(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  const std::vector<cxd>& amplitudes() const { return amps_; }
  std::vector<cxd>& amplitudes() { return amps_; }

  void apply(const Gate& gate);

  // <psi|Z_qubit|psi>, always in [-1, 1] for a normalized state.
  double expect_z(int qubit) const;

  double norm() const;

 private:
  void check_qubit(int qubit) const;

  int n_qubits_;
  std::vector<cxd> amps_;
};

StateVector zero_state(int n_qubits);

StateVector apply_gate(StateVector state, const Gate& gate);

double expect_z(const StateVector& state, int qubit);

}  // namespace pqlm
