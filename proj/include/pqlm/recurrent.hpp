#pragma once

#include <cstdint>
#include <vector>

#include "pqlm/vqc.hpp"

namespace pqlm {

struct RecurrentState {
  std::vector<double> h;
  std::vector<double> c;
};

RecurrentState zero_recurrent_state(int hidden_dim);

// Hybrid recurrent cell: one shared input projection feeds four VQCs whose
// Pauli-Z expectations are recombined as the forget/input/update/output
// gates. hidden_dim equals n_qubits (the measurement width).
struct QLstmCell {
  int embed_dim = 0;
  int n_qubits = 0;
  int n_layers = 0;
  std::uint64_t seed = 0;

  CircuitSpec spec_f, spec_i, spec_g, spec_o;
  VqcParams params_f, params_i, params_g, params_o;

  std::vector<double> w_in; // [n_qubits x (embed_dim + n_qubits)]
  std::vector<double> b_in; // [n_qubits]

  int hidden_dim() const { return n_qubits; }
  int input_dim() const { return embed_dim + n_qubits; }

  static QLstmCell create(int embed_dim, int n_qubits, int n_layers, std::uint64_t seed);
};

struct ClassicalLstmCell {
  int embed_dim = 0;
  int hidden_dim_ = 0;

  std::vector<double> w_f, w_i, w_g, w_o; // each [hidden x (embed_dim + hidden)]
  std::vector<double> b_f, b_i, b_g, b_o; // each [hidden]

  int hidden_dim() const { return hidden_dim_; }
  int input_dim() const { return embed_dim + hidden_dim_; }

  static ClassicalLstmCell create(int embed_dim, int hidden_dim, std::uint64_t seed);
};

// Everything the backward pass needs from one forward step.
struct QLstmStepCache {
  std::vector<double> v;          // concat(x_t, h_prev)
  std::vector<double> u;          // projected VQC input
  std::vector<double> y_f, y_i, y_g, y_o; // raw VQC outputs
  std::vector<double> f, i, g, o;
  std::vector<double> c_prev, c, tanh_c;
};

struct ClassicalStepCache {
  std::vector<double> v;
  std::vector<double> f, i, g, o;
  std::vector<double> c_prev, c, tanh_c;
};

RecurrentState qlstm_step(const QLstmCell& cell, const std::vector<double>& x_t,
                          const RecurrentState& prev, QLstmStepCache* cache = nullptr);

RecurrentState lstm_step(const ClassicalLstmCell& cell, const std::vector<double>& x_t,
                         const RecurrentState& prev, ClassicalStepCache* cache = nullptr);

std::vector<RecurrentState> sequence_forward(const QLstmCell& cell,
                                             const std::vector<std::vector<double>>& xs,
                                             std::vector<QLstmStepCache>* caches = nullptr);

std::vector<RecurrentState> sequence_forward(const ClassicalLstmCell& cell,
                                             const std::vector<std::vector<double>>& xs,
                                             std::vector<ClassicalStepCache>* caches = nullptr);

struct ParamCount {
  std::size_t classical_params = 0;
  std::size_t quantum_params = 0;
  std::size_t total = 0;
};

ParamCount param_count(const QLstmCell& cell);
ParamCount param_count(const ClassicalLstmCell& cell);

struct QLstmGrads {
  std::vector<double> w_in, b_in;
  std::vector<double> params_f, params_i, params_g, params_o;

  static QLstmGrads zeros(const QLstmCell& cell);
};

struct ClassicalLstmGrads {
  std::vector<double> w_f, b_f, w_i, b_i, w_g, b_g, w_o, b_o;

  static ClassicalLstmGrads zeros(const ClassicalLstmCell& cell);
};

struct StepBackward {
  std::vector<double> dx;      // gradient w.r.t. x_t
  std::vector<double> dh_prev;
  std::vector<double> dc_prev;
};

// Backpropagates one step. dh/dc are the loss gradients w.r.t. this step's
// h and c; parameter gradients accumulate into grads. VQC Jacobians are
// recovered by the parameter-shift rule on the cached projected input.
StepBackward qlstm_step_backward(const QLstmCell& cell, const QLstmStepCache& cache,
                                 const std::vector<double>& dh, const std::vector<double>& dc,
                                 QLstmGrads& grads, int n_threads = 1);

StepBackward lstm_step_backward(const ClassicalLstmCell& cell, const ClassicalStepCache& cache,
                                const std::vector<double>& dh, const std::vector<double>& dc,
                                ClassicalLstmGrads& grads);

}  // namespace pqlm
