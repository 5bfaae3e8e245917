#include "pqlm/recurrent.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pqlm/linalg.hpp"

namespace pqlm {

namespace {

void xavier_init(std::vector<double>& w, std::size_t fan_out, std::size_t fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  w.assign(fan_out * fan_in, 0.0);
  rng.fill_uniform(w, -limit, limit);
}

void check_len(const std::vector<double>& v, std::size_t expect, const char* what) {
  if (v.size() != expect) {
    throw std::invalid_argument(std::string(what) + ": expected length " +
                                std::to_string(expect) + ", got " + std::to_string(v.size()));
  }
}

}  // namespace

RecurrentState zero_recurrent_state(int hidden_dim) {
  RecurrentState s;
  s.h.assign(static_cast<std::size_t>(hidden_dim), 0.0);
  s.c.assign(static_cast<std::size_t>(hidden_dim), 0.0);
  return s;
}

QLstmCell QLstmCell::create(int embed_dim, int n_qubits, int n_layers, std::uint64_t seed) {
  if (embed_dim < 1) throw std::invalid_argument("QLstmCell: embed_dim must be positive");
  QLstmCell cell;
  cell.embed_dim = embed_dim;
  cell.n_qubits = n_qubits;
  cell.n_layers = n_layers;
  cell.seed = seed;

  cell.spec_f = build_circuit(derive_seed(seed, "vqc.forget"), n_qubits, n_layers);
  cell.spec_i = build_circuit(derive_seed(seed, "vqc.input"), n_qubits, n_layers);
  cell.spec_g = build_circuit(derive_seed(seed, "vqc.update"), n_qubits, n_layers);
  cell.spec_o = build_circuit(derive_seed(seed, "vqc.output"), n_qubits, n_layers);

  cell.params_f = VqcParams::random(derive_seed(seed, "params.forget"), n_qubits, n_layers);
  cell.params_i = VqcParams::random(derive_seed(seed, "params.input"), n_qubits, n_layers);
  cell.params_g = VqcParams::random(derive_seed(seed, "params.update"), n_qubits, n_layers);
  cell.params_o = VqcParams::random(derive_seed(seed, "params.output"), n_qubits, n_layers);

  Rng rng(derive_seed(seed, "w_in"));
  const std::size_t in_dim = static_cast<std::size_t>(cell.input_dim());
  xavier_init(cell.w_in, static_cast<std::size_t>(n_qubits), in_dim, rng);
  cell.b_in.assign(static_cast<std::size_t>(n_qubits), 0.0);
  return cell;
}

ClassicalLstmCell ClassicalLstmCell::create(int embed_dim, int hidden_dim, std::uint64_t seed) {
  if (embed_dim < 1 || hidden_dim < 1) {
    throw std::invalid_argument("ClassicalLstmCell: dimensions must be positive");
  }
  ClassicalLstmCell cell;
  cell.embed_dim = embed_dim;
  cell.hidden_dim_ = hidden_dim;
  const std::size_t rows = static_cast<std::size_t>(hidden_dim);
  const std::size_t cols = static_cast<std::size_t>(embed_dim + hidden_dim);

  Rng rf(derive_seed(seed, "w_f")), ri(derive_seed(seed, "w_i"));
  Rng rg(derive_seed(seed, "w_g")), ro(derive_seed(seed, "w_o"));
  xavier_init(cell.w_f, rows, cols, rf);
  xavier_init(cell.w_i, rows, cols, ri);
  xavier_init(cell.w_g, rows, cols, rg);
  xavier_init(cell.w_o, rows, cols, ro);
  cell.b_f.assign(rows, 0.0);
  cell.b_i.assign(rows, 0.0);
  cell.b_g.assign(rows, 0.0);
  cell.b_o.assign(rows, 0.0);
  return cell;
}

RecurrentState qlstm_step(const QLstmCell& cell, const std::vector<double>& x_t,
                          const RecurrentState& prev, QLstmStepCache* cache) {
  const std::size_t n = static_cast<std::size_t>(cell.n_qubits);
  check_len(x_t, static_cast<std::size_t>(cell.embed_dim), "qlstm_step: x_t");
  check_len(prev.h, n, "qlstm_step: prev.h");
  check_len(prev.c, n, "qlstm_step: prev.c");

  std::vector<double> v;
  v.reserve(x_t.size() + n);
  v.insert(v.end(), x_t.begin(), x_t.end());
  v.insert(v.end(), prev.h.begin(), prev.h.end());

  std::vector<double> u(n);
  affine(cell.w_in, cell.b_in, v.data(), v.size(), u.data(), n);

  const std::vector<double> y_f = vqc_forward(cell.spec_f, cell.params_f, u);
  const std::vector<double> y_i = vqc_forward(cell.spec_i, cell.params_i, u);
  const std::vector<double> y_g = vqc_forward(cell.spec_g, cell.params_g, u);
  const std::vector<double> y_o = vqc_forward(cell.spec_o, cell.params_o, u);

  RecurrentState next;
  next.h.resize(n);
  next.c.resize(n);
  std::vector<double> f(n), i(n), g(n), o(n), tanh_c(n);
  for (std::size_t k = 0; k < n; ++k) {
    f[k] = sigmoid(y_f[k]);
    i[k] = sigmoid(y_i[k]);
    g[k] = std::tanh(y_g[k]);
    o[k] = sigmoid(y_o[k]);
    next.c[k] = f[k] * prev.c[k] + i[k] * g[k];
    tanh_c[k] = std::tanh(next.c[k]);
    next.h[k] = o[k] * tanh_c[k];
  }

  if (cache != nullptr) {
    cache->v = std::move(v);
    cache->u = std::move(u);
    cache->y_f = y_f;
    cache->y_i = y_i;
    cache->y_g = y_g;
    cache->y_o = y_o;
    cache->f = std::move(f);
    cache->i = std::move(i);
    cache->g = std::move(g);
    cache->o = std::move(o);
    cache->c_prev = prev.c;
    cache->c = next.c;
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

RecurrentState lstm_step(const ClassicalLstmCell& cell, const std::vector<double>& x_t,
                         const RecurrentState& prev, ClassicalStepCache* cache) {
  const std::size_t n = static_cast<std::size_t>(cell.hidden_dim());
  check_len(x_t, static_cast<std::size_t>(cell.embed_dim), "lstm_step: x_t");
  check_len(prev.h, n, "lstm_step: prev.h");
  check_len(prev.c, n, "lstm_step: prev.c");

  std::vector<double> v;
  v.reserve(x_t.size() + n);
  v.insert(v.end(), x_t.begin(), x_t.end());
  v.insert(v.end(), prev.h.begin(), prev.h.end());

  std::vector<double> zf(n), zi(n), zg(n), zo(n);
  affine(cell.w_f, cell.b_f, v.data(), v.size(), zf.data(), n);
  affine(cell.w_i, cell.b_i, v.data(), v.size(), zi.data(), n);
  affine(cell.w_g, cell.b_g, v.data(), v.size(), zg.data(), n);
  affine(cell.w_o, cell.b_o, v.data(), v.size(), zo.data(), n);

  RecurrentState next;
  next.h.resize(n);
  next.c.resize(n);
  std::vector<double> f(n), i(n), g(n), o(n), tanh_c(n);
  for (std::size_t k = 0; k < n; ++k) {
    f[k] = sigmoid(zf[k]);
    i[k] = sigmoid(zi[k]);
    g[k] = std::tanh(zg[k]);
    o[k] = sigmoid(zo[k]);
    next.c[k] = f[k] * prev.c[k] + i[k] * g[k];
    tanh_c[k] = std::tanh(next.c[k]);
    next.h[k] = o[k] * tanh_c[k];
  }

  if (cache != nullptr) {
    cache->v = std::move(v);
    cache->f = std::move(f);
    cache->i = std::move(i);
    cache->g = std::move(g);
    cache->o = std::move(o);
    cache->c_prev = prev.c;
    cache->c = next.c;
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

template <class Cell, class Cache, class StepFn>
static std::vector<RecurrentState> sequence_forward_impl(const Cell& cell,
                                                         const std::vector<std::vector<double>>& xs,
                                                         std::vector<Cache>* caches, StepFn step) {
  if (xs.empty()) throw std::invalid_argument("sequence_forward: empty sequence");
  std::vector<RecurrentState> states;
  states.reserve(xs.size());
  if (caches != nullptr) caches->resize(xs.size());
  RecurrentState prev = zero_recurrent_state(cell.hidden_dim());
  for (std::size_t t = 0; t < xs.size(); ++t) {
    Cache* cache = caches != nullptr ? &(*caches)[t] : nullptr;
    prev = step(cell, xs[t], prev, cache);
    states.push_back(prev);
  }
  return states;
}

std::vector<RecurrentState> sequence_forward(const QLstmCell& cell,
                                             const std::vector<std::vector<double>>& xs,
                                             std::vector<QLstmStepCache>* caches) {
  return sequence_forward_impl(cell, xs, caches,
                               [](const QLstmCell& c, const std::vector<double>& x,
                                  const RecurrentState& p, QLstmStepCache* cache) {
                                 return qlstm_step(c, x, p, cache);
                               });
}

std::vector<RecurrentState> sequence_forward(const ClassicalLstmCell& cell,
                                             const std::vector<std::vector<double>>& xs,
                                             std::vector<ClassicalStepCache>* caches) {
  return sequence_forward_impl(cell, xs, caches,
                               [](const ClassicalLstmCell& c, const std::vector<double>& x,
                                  const RecurrentState& p, ClassicalStepCache* cache) {
                                 return lstm_step(c, x, p, cache);
                               });
}

ParamCount param_count(const QLstmCell& cell) {
  ParamCount pc;
  pc.classical_params = cell.w_in.size() + cell.b_in.size();
  pc.quantum_params = cell.params_f.count() + cell.params_i.count() + cell.params_g.count() +
                      cell.params_o.count();
  pc.total = pc.classical_params + pc.quantum_params;
  return pc;
}

ParamCount param_count(const ClassicalLstmCell& cell) {
  ParamCount pc;
  pc.classical_params = cell.w_f.size() + cell.w_i.size() + cell.w_g.size() + cell.w_o.size() +
                        cell.b_f.size() + cell.b_i.size() + cell.b_g.size() + cell.b_o.size();
  pc.quantum_params = 0;
  pc.total = pc.classical_params;
  return pc;
}

QLstmGrads QLstmGrads::zeros(const QLstmCell& cell) {
  QLstmGrads g;
  g.w_in.assign(cell.w_in.size(), 0.0);
  g.b_in.assign(cell.b_in.size(), 0.0);
  g.params_f.assign(cell.params_f.count(), 0.0);
  g.params_i.assign(cell.params_i.count(), 0.0);
  g.params_g.assign(cell.params_g.count(), 0.0);
  g.params_o.assign(cell.params_o.count(), 0.0);
  return g;
}

ClassicalLstmGrads ClassicalLstmGrads::zeros(const ClassicalLstmCell& cell) {
  ClassicalLstmGrads g;
  g.w_f.assign(cell.w_f.size(), 0.0);
  g.b_f.assign(cell.b_f.size(), 0.0);
  g.w_i.assign(cell.w_i.size(), 0.0);
  g.b_i.assign(cell.b_i.size(), 0.0);
  g.w_g.assign(cell.w_g.size(), 0.0);
  g.b_g.assign(cell.b_g.size(), 0.0);
  g.w_o.assign(cell.w_o.size(), 0.0);
  g.b_o.assign(cell.b_o.size(), 0.0);
  return g;
}

StepBackward qlstm_step_backward(const QLstmCell& cell, const QLstmStepCache& cache,
                                 const std::vector<double>& dh, const std::vector<double>& dc,
                                 QLstmGrads& grads, int n_threads) {
  const std::size_t n = static_cast<std::size_t>(cell.n_qubits);
  check_len(dh, n, "qlstm_step_backward: dh");
  check_len(dc, n, "qlstm_step_backward: dc");

  std::vector<double> dy_f(n), dy_i(n), dy_g(n), dy_o(n);
  StepBackward back;
  back.dc_prev.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double dct = dc[k] + dh[k] * cache.o[k] * (1.0 - cache.tanh_c[k] * cache.tanh_c[k]);
    const double df = dct * cache.c_prev[k];
    const double di = dct * cache.g[k];
    const double dg = dct * cache.i[k];
    const double dout = dh[k] * cache.tanh_c[k];
    back.dc_prev[k] = dct * cache.f[k];
    dy_f[k] = df * cache.f[k] * (1.0 - cache.f[k]);
    dy_i[k] = di * cache.i[k] * (1.0 - cache.i[k]);
    dy_g[k] = dg * (1.0 - cache.g[k] * cache.g[k]);
    dy_o[k] = dout * cache.o[k] * (1.0 - cache.o[k]);
  }

  const VqcJacobians jac_f = vqc_gradients(cell.spec_f, cell.params_f, cache.u, n_threads);
  const VqcJacobians jac_i = vqc_gradients(cell.spec_i, cell.params_i, cache.u, n_threads);
  const VqcJacobians jac_g = vqc_gradients(cell.spec_g, cell.params_g, cache.u, n_threads);
  const VqcJacobians jac_o = vqc_gradients(cell.spec_o, cell.params_o, cache.u, n_threads);

  const int n_params = static_cast<int>(cell.params_f.count());
  auto accumulate_gate = [&](const VqcJacobians& jac, const std::vector<double>& dy,
                             std::vector<double>& dparams, std::vector<double>& du) {
    for (int o = 0; o < static_cast<int>(n); ++o) {
      const double go = dy[static_cast<std::size_t>(o)];
      if (go == 0.0) continue;
      for (int p = 0; p < n_params; ++p) {
        dparams[static_cast<std::size_t>(p)] += go * jac.d_param(o, p);
      }
      for (int j = 0; j < static_cast<int>(n); ++j) {
        du[static_cast<std::size_t>(j)] += go * jac.d_input(o, j);
      }
    }
  };

  std::vector<double> du(n, 0.0);
  accumulate_gate(jac_f, dy_f, grads.params_f, du);
  accumulate_gate(jac_i, dy_i, grads.params_i, du);
  accumulate_gate(jac_g, dy_g, grads.params_g, du);
  accumulate_gate(jac_o, dy_o, grads.params_o, du);

  outer_acc(grads.w_in, du.data(), n, cache.v.data(), cache.v.size());
  for (std::size_t k = 0; k < n; ++k) grads.b_in[k] += du[k];

  std::vector<double> dv(cache.v.size(), 0.0);
  matvec_t_acc(cell.w_in, du.data(), n, cache.v.size(), dv.data());

  const std::size_t embed = static_cast<std::size_t>(cell.embed_dim);
  back.dx.assign(dv.begin(), dv.begin() + static_cast<std::ptrdiff_t>(embed));
  back.dh_prev.assign(dv.begin() + static_cast<std::ptrdiff_t>(embed), dv.end());
  return back;
}

StepBackward lstm_step_backward(const ClassicalLstmCell& cell, const ClassicalStepCache& cache,
                                const std::vector<double>& dh, const std::vector<double>& dc,
                                ClassicalLstmGrads& grads) {
  const std::size_t n = static_cast<std::size_t>(cell.hidden_dim());
  check_len(dh, n, "lstm_step_backward: dh");
  check_len(dc, n, "lstm_step_backward: dc");

  std::vector<double> dz_f(n), dz_i(n), dz_g(n), dz_o(n);
  StepBackward back;
  back.dc_prev.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double dct = dc[k] + dh[k] * cache.o[k] * (1.0 - cache.tanh_c[k] * cache.tanh_c[k]);
    const double df = dct * cache.c_prev[k];
    const double di = dct * cache.g[k];
    const double dg = dct * cache.i[k];
    const double dout = dh[k] * cache.tanh_c[k];
    back.dc_prev[k] = dct * cache.f[k];
    dz_f[k] = df * cache.f[k] * (1.0 - cache.f[k]);
    dz_i[k] = di * cache.i[k] * (1.0 - cache.i[k]);
    dz_g[k] = dg * (1.0 - cache.g[k] * cache.g[k]);
    dz_o[k] = dout * cache.o[k] * (1.0 - cache.o[k]);
  }

  const std::size_t cols = cache.v.size();
  outer_acc(grads.w_f, dz_f.data(), n, cache.v.data(), cols);
  outer_acc(grads.w_i, dz_i.data(), n, cache.v.data(), cols);
  outer_acc(grads.w_g, dz_g.data(), n, cache.v.data(), cols);
  outer_acc(grads.w_o, dz_o.data(), n, cache.v.data(), cols);
  for (std::size_t k = 0; k < n; ++k) {
    grads.b_f[k] += dz_f[k];
    grads.b_i[k] += dz_i[k];
    grads.b_g[k] += dz_g[k];
    grads.b_o[k] += dz_o[k];
  }

  std::vector<double> dv(cols, 0.0);
  matvec_t_acc(cell.w_f, dz_f.data(), n, cols, dv.data());
  matvec_t_acc(cell.w_i, dz_i.data(), n, cols, dv.data());
  matvec_t_acc(cell.w_g, dz_g.data(), n, cols, dv.data());
  matvec_t_acc(cell.w_o, dz_o.data(), n, cols, dv.data());

  const std::size_t embed = static_cast<std::size_t>(cell.embed_dim);
  back.dx.assign(dv.begin(), dv.begin() + static_cast<std::ptrdiff_t>(embed));
  back.dh_prev.assign(dv.begin() + static_cast<std::ptrdiff_t>(embed), dv.end());
  return back;
}

}  // namespace pqlm
