#include "pqlm/vqc.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pqlm {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

void check_dims(const CircuitSpec& spec, const VqcParams& params, std::size_t n_inputs) {
  if (params.n_qubits != spec.n_qubits || params.n_layers != spec.n_layers ||
      params.count() != static_cast<std::size_t>(spec.n_layers * spec.n_qubits * 3)) {
    throw std::invalid_argument("vqc: params shape does not match circuit spec");
  }
  if (n_inputs != static_cast<std::size_t>(spec.n_qubits)) {
    throw std::invalid_argument("vqc: input length " + std::to_string(n_inputs) +
                                " does not match n_qubits " + std::to_string(spec.n_qubits));
  }
}

}  // namespace

CircuitSpec build_circuit(std::uint64_t seed, int n_qubits, int n_layers) {
  if (n_qubits < 2 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("build_circuit: n_qubits must be in [2, " +
                                std::to_string(kMaxQubits) + "]");
  }
  if (n_layers < 1) {
    throw std::invalid_argument("build_circuit: n_layers must be >= 1");
  }
  CircuitSpec spec;
  spec.n_qubits = n_qubits;
  spec.n_layers = n_layers;
  spec.seed = seed;
  spec.entanglement.resize(static_cast<std::size_t>(n_layers));
  for (int layer = 0; layer < n_layers; ++layer) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n_qubits));
    for (int i = 0; i < n_qubits; ++i) {
      pairs.emplace_back(i, (i + 1) % n_qubits);
    }
    Rng rng(derive_seed(seed, "entangle." + std::to_string(layer)));
    rng.shuffle(pairs);
    spec.entanglement[static_cast<std::size_t>(layer)] = std::move(pairs);
  }
  return spec;
}

VqcParams VqcParams::zeros(int n_qubits, int n_layers) {
  VqcParams p;
  p.n_qubits = n_qubits;
  p.n_layers = n_layers;
  p.angles.assign(static_cast<std::size_t>(n_layers * n_qubits * 3), 0.0);
  return p;
}

VqcParams VqcParams::random(std::uint64_t seed, int n_qubits, int n_layers) {
  VqcParams p = zeros(n_qubits, n_layers);
  Rng rng(seed);
  rng.fill_uniform(p.angles, -std::numbers::pi, std::numbers::pi);
  return p;
}

std::vector<Gate> encode(const std::vector<double>& x) {
  std::vector<Gate> gates;
  gates.reserve(x.size() * 3);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw std::domain_error("encode: non-finite input at index " + std::to_string(i));
    }
    const int q = static_cast<int>(i);
    gates.push_back(Gate::h(q));
    gates.push_back(Gate::ry(q, std::atan(x[i])));
    gates.push_back(Gate::rz(q, std::atan(x[i] * x[i])));
  }
  return gates;
}

std::vector<double> vqc_forward_encoded(const CircuitSpec& spec, const VqcParams& params,
                                        const std::vector<double>& enc_ry,
                                        const std::vector<double>& enc_rz) {
  check_dims(spec, params, enc_ry.size());
  StateVector state(spec.n_qubits);
  for (int q = 0; q < spec.n_qubits; ++q) {
    state.apply(Gate::h(q));
    state.apply(Gate::ry(q, enc_ry[static_cast<std::size_t>(q)]));
    state.apply(Gate::rz(q, enc_rz[static_cast<std::size_t>(q)]));
  }
  for (int layer = 0; layer < spec.n_layers; ++layer) {
    for (const auto& [control, target] : spec.entanglement[static_cast<std::size_t>(layer)]) {
      state.apply(Gate::cnot(control, target));
    }
    for (int q = 0; q < spec.n_qubits; ++q) {
      state.apply(Gate::rx(q, params.at(layer, q, 0)));
      state.apply(Gate::ry(q, params.at(layer, q, 1)));
      state.apply(Gate::rz(q, params.at(layer, q, 2)));
    }
  }
  std::vector<double> out(static_cast<std::size_t>(spec.n_qubits));
  for (int q = 0; q < spec.n_qubits; ++q) {
    out[static_cast<std::size_t>(q)] = state.expect_z(q);
  }
  return out;
}

std::vector<double> vqc_forward(const CircuitSpec& spec, const VqcParams& params,
                                const std::vector<double>& x) {
  check_dims(spec, params, x.size());
  std::vector<double> enc_ry(x.size()), enc_rz(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw std::domain_error("vqc_forward: non-finite input at index " + std::to_string(i));
    }
    enc_ry[i] = std::atan(x[i]);
    enc_rz[i] = std::atan(x[i] * x[i]);
  }
  return vqc_forward_encoded(spec, params, enc_ry, enc_rz);
}

VqcJacobians vqc_gradients(const CircuitSpec& spec, const VqcParams& params,
                           const std::vector<double>& x, int n_threads) {
  check_dims(spec, params, x.size());
  const int n = spec.n_qubits;
  const int n_params = static_cast<int>(params.count());

  std::vector<double> enc_ry(x.size()), enc_rz(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw std::domain_error("vqc_gradients: non-finite input at index " + std::to_string(i));
    }
    enc_ry[i] = std::atan(x[i]);
    enc_rz[i] = std::atan(x[i] * x[i]);
  }

  // One task per shifted evaluation: 2 per trainable angle, then 2 per
  // encoding channel (RY and RZ) per qubit.
  const int n_param_tasks = 2 * n_params;
  const int n_input_tasks = 4 * n;
  const int n_tasks = n_param_tasks + n_input_tasks;
  std::vector<std::vector<double>> shifted(static_cast<std::size_t>(n_tasks));

  parallel_for(n_tasks, n_threads, [&](std::int64_t task) {
    if (task < n_param_tasks) {
      const int p = static_cast<int>(task / 2);
      const double shift = (task % 2 == 0) ? kHalfPi : -kHalfPi;
      VqcParams shifted_params = params;
      shifted_params.angles[static_cast<std::size_t>(p)] += shift;
      shifted[static_cast<std::size_t>(task)] =
          vqc_forward_encoded(spec, shifted_params, enc_ry, enc_rz);
    } else {
      const int t = static_cast<int>(task - n_param_tasks);
      const int qubit = t / 4;
      const int channel = (t / 2) % 2; // 0 = RY angle, 1 = RZ angle
      const double shift = (t % 2 == 0) ? kHalfPi : -kHalfPi;
      std::vector<double> ry = enc_ry;
      std::vector<double> rz = enc_rz;
      if (channel == 0) {
        ry[static_cast<std::size_t>(qubit)] += shift;
      } else {
        rz[static_cast<std::size_t>(qubit)] += shift;
      }
      shifted[static_cast<std::size_t>(task)] = vqc_forward_encoded(spec, params, ry, rz);
    }
  });

  VqcJacobians jac;
  jac.n_outputs = n;
  jac.n_params = n_params;
  jac.n_inputs = n;
  jac.wrt_params.assign(static_cast<std::size_t>(n) * n_params, 0.0);
  jac.wrt_input.assign(static_cast<std::size_t>(n) * n, 0.0);

  for (int p = 0; p < n_params; ++p) {
    const auto& plus = shifted[static_cast<std::size_t>(2 * p)];
    const auto& minus = shifted[static_cast<std::size_t>(2 * p + 1)];
    for (int o = 0; o < n; ++o) {
      jac.wrt_params[static_cast<std::size_t>(o) * n_params + p] =
          0.5 * (plus[static_cast<std::size_t>(o)] - minus[static_cast<std::size_t>(o)]);
    }
  }

  for (int qubit = 0; qubit < n; ++qubit) {
    const std::size_t base = static_cast<std::size_t>(n_param_tasks + qubit * 4);
    const auto& ry_plus = shifted[base + 0];
    const auto& ry_minus = shifted[base + 1];
    const auto& rz_plus = shifted[base + 2];
    const auto& rz_minus = shifted[base + 3];
    const double xi = x[static_cast<std::size_t>(qubit)];
    // d(atan x)/dx and d(atan x^2)/dx chain factors.
    const double dry_dx = 1.0 / (1.0 + xi * xi);
    const double drz_dx = 2.0 * xi / (1.0 + xi * xi * xi * xi);
    for (int o = 0; o < n; ++o) {
      const double d_ry =
          0.5 * (ry_plus[static_cast<std::size_t>(o)] - ry_minus[static_cast<std::size_t>(o)]);
      const double d_rz =
          0.5 * (rz_plus[static_cast<std::size_t>(o)] - rz_minus[static_cast<std::size_t>(o)]);
      jac.wrt_input[static_cast<std::size_t>(o) * n + qubit] = d_ry * dry_dx + d_rz * drz_dx;
    }
  }
  return jac;
}

}  // namespace pqlm
