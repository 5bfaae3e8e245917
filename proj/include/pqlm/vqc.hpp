#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pqlm/statevector.hpp"

namespace pqlm {

// Seed-randomized circuit layout. The entanglement pattern of each layer is
// a seed-derived permutation of the ring pairs {(i, (i+1) mod n)}; identical
// (seed, n_qubits, n_layers) always reproduce the identical layout.
struct CircuitSpec {
  int n_qubits = 0;
  int n_layers = 0;
  std::uint64_t seed = 0;
  // Per layer, CNOT (control, target) pairs applied in order.
  std::vector<std::vector<std::pair<int, int>>> entanglement;
};

CircuitSpec build_circuit(std::uint64_t seed, int n_qubits, int n_layers);

// Trainable rotation angles, one (rx, ry, rz) triple per qubit per layer.
struct VqcParams {
  int n_layers = 0;
  int n_qubits = 0;
  std::vector<double> angles; // [layer][qubit][{rx,ry,rz}]

  static VqcParams zeros(int n_qubits, int n_layers);
  static VqcParams random(std::uint64_t seed, int n_qubits, int n_layers);

  double& at(int layer, int qubit, int channel) {
    return angles[static_cast<std::size_t>((layer * n_qubits + qubit) * 3 + channel)];
  }
  double at(int layer, int qubit, int channel) const {
    return angles[static_cast<std::size_t>((layer * n_qubits + qubit) * 3 + channel)];
  }
  std::size_t count() const { return angles.size(); }
};

// Encoding stage: per qubit i emits H, RY(atan x_i), RZ(atan x_i^2).
// Angles stay inside (-pi/2, pi/2) for any finite input.
std::vector<Gate> encode(const std::vector<double>& x);

// Full three-stage evaluation: encoding, entangling layers with trainable
// rotations, Pauli-Z expectations. Output has one value per qubit, each in
// [-1, 1].
std::vector<double> vqc_forward(const CircuitSpec& spec, const VqcParams& params,
                                const std::vector<double>& x);

// Same circuit with explicit encoding angles (ry[i], rz[i] per qubit).
// Shared by the forward path and the parameter-shift machinery.
std::vector<double> vqc_forward_encoded(const CircuitSpec& spec, const VqcParams& params,
                                        const std::vector<double>& enc_ry,
                                        const std::vector<double>& enc_rz);

struct VqcJacobians {
  int n_outputs = 0;
  int n_params = 0;
  int n_inputs = 0;
  std::vector<double> wrt_params; // row-major [n_outputs][n_params]
  std::vector<double> wrt_input;  // row-major [n_outputs][n_inputs]

  double d_param(int output, int param) const {
    return wrt_params[static_cast<std::size_t>(output) * n_params + param];
  }
  double d_input(int output, int input) const {
    return wrt_input[static_cast<std::size_t>(output) * n_inputs + input];
  }
};

// Exact parameter-shift Jacobians of every output w.r.t. every trainable
// angle and every input coordinate. Each shifted evaluation is independent,
// so with n_threads > 1 they run in parallel; results land in fixed slots
// and are bitwise identical to the serial path.
VqcJacobians vqc_gradients(const CircuitSpec& spec, const VqcParams& params,
                           const std::vector<double>& x, int n_threads = 1);

}  // namespace pqlm
