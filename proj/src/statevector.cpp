#include "pqlm/statevector.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pqlm {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

std::array<cxd, 4> gate_matrix(const Gate& gate) {
  const double half = gate.angle * 0.5;
  const double c = std::cos(half);
  const double s = std::sin(half);
  switch (gate.kind) {
    case GateKind::H:
      return {cxd{kInvSqrt2, 0}, cxd{kInvSqrt2, 0}, cxd{kInvSqrt2, 0}, cxd{-kInvSqrt2, 0}};
    case GateKind::RX:
      return {cxd{c, 0}, cxd{0, -s}, cxd{0, -s}, cxd{c, 0}};
    case GateKind::RY:
      return {cxd{c, 0}, cxd{-s, 0}, cxd{s, 0}, cxd{c, 0}};
    case GateKind::RZ:
      return {cxd{c, -s}, cxd{0, 0}, cxd{0, 0}, cxd{c, s}};
    case GateKind::CNOT:
      break;
  }
  throw std::invalid_argument("gate_matrix: CNOT has no 2x2 matrix");
}

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("StateVector: n_qubits must be in [1, " +
                                std::to_string(kMaxQubits) + "], got " +
                                std::to_string(n_qubits));
  }
  amps_.assign(std::size_t{1} << n_qubits, cxd{0.0, 0.0});
  amps_[0] = cxd{1.0, 0.0};
}

void StateVector::check_qubit(int qubit) const {
  if (qubit < 0 || qubit >= n_qubits_) {
    throw std::out_of_range("StateVector: qubit index " + std::to_string(qubit) +
                            " out of range for " + std::to_string(n_qubits_) + " qubits");
  }
}

void StateVector::apply(const Gate& gate) {
  check_qubit(gate.target);
  if (gate.kind == GateKind::CNOT) {
    check_qubit(gate.control);
    if (gate.control == gate.target) {
      throw std::invalid_argument("StateVector: CNOT control equals target");
    }
    const std::size_t cmask = std::size_t{1} << gate.control;
    const std::size_t tmask = std::size_t{1} << gate.target;
    const std::size_t dim = amps_.size();
    for (std::size_t i = 0; i < dim; ++i) {
      if ((i & cmask) != 0 && (i & tmask) == 0) {
        std::swap(amps_[i], amps_[i | tmask]);
      }
    }
    return;
  }

  const auto m = gate_matrix(gate);
  const std::size_t step = std::size_t{1} << gate.target;
  const std::size_t dim = amps_.size();
  for (std::size_t base = 0; base < dim; base += 2 * step) {
    for (std::size_t off = 0; off < step; ++off) {
      const std::size_t i0 = base + off;
      const std::size_t i1 = i0 + step;
      const cxd a0 = amps_[i0];
      const cxd a1 = amps_[i1];
      amps_[i0] = m[0] * a0 + m[1] * a1;
      amps_[i1] = m[2] * a0 + m[3] * a1;
    }
  }
}

double StateVector::expect_z(int qubit) const {
  check_qubit(qubit);
  const std::size_t mask = std::size_t{1} << qubit;
  double acc = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    const double p = std::norm(amps_[i]);
    acc += (i & mask) ? -p : p;
  }
  return acc;
}

double StateVector::norm() const {
  double acc = 0.0;
  for (const cxd& a : amps_) acc += std::norm(a);
  return std::sqrt(acc);
}

StateVector zero_state(int n_qubits) { return StateVector(n_qubits); }

StateVector apply_gate(StateVector state, const Gate& gate) {
  state.apply(gate);
  return state;
}

double expect_z(const StateVector& state, int qubit) { return state.expect_z(qubit); }

}  // namespace pqlm
