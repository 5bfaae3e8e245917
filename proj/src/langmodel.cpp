#include "pqlm/langmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "pqlm/bytesio.hpp"
#include "pqlm/linalg.hpp"

namespace pqlm {

const char* backbone_name(BackboneKind k) {
  switch (k) {
    case BackboneKind::Quantum: return "quantum";
    case BackboneKind::Classical: return "classical";
  }
  throw std::invalid_argument("backbone_name: bad enum value");
}

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be positive");
  if (cfg.batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be positive");
  if (cfg.max_seq_len < 2) throw std::invalid_argument("TrainConfig: max_seq_len must be >= 2");
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw std::invalid_argument("TrainConfig: learning_rate must be finite and non-negative");
  }
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw std::invalid_argument("TrainConfig: betas must lie in [0, 1)");
  }
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("TrainConfig: epsilon must be positive");
  if (cfg.n_threads < 1) throw std::invalid_argument("TrainConfig: n_threads must be positive");
  if (!(cfg.holdout_fraction >= 0.0 && cfg.holdout_fraction < 1.0)) {
    throw std::invalid_argument("TrainConfig: holdout_fraction must lie in [0, 1)");
  }
}

int LmModel::hidden_dim() const {
  return std::visit([](const auto& cell) { return cell.hidden_dim(); }, backbone);
}

LmModel LmModel::create(Vocab vocab, const LmConfig& config, std::uint64_t seed) {
  if (config.embed_dim < 1) throw std::invalid_argument("LmModel: embed_dim must be positive");
  LmModel m;
  m.vocab = std::move(vocab);
  m.config = config;
  m.seed = seed;
  m.embeddings = EmbeddingMatrix::random(m.vocab.size(), static_cast<std::size_t>(config.embed_dim),
                                         derive_seed(seed, "embeddings"));
  if (config.backbone == BackboneKind::Quantum) {
    m.backbone = QLstmCell::create(config.embed_dim, config.n_qubits, config.n_layers,
                                   derive_seed(seed, "backbone"));
  } else {
    m.backbone = ClassicalLstmCell::create(config.embed_dim, config.hidden_dim,
                                           derive_seed(seed, "backbone"));
  }
  const std::size_t hidden = static_cast<std::size_t>(m.hidden_dim());
  const std::size_t vsize = m.vocab.size();
  Rng rng(derive_seed(seed, "w_out"));
  const double limit = std::sqrt(6.0 / static_cast<double>(hidden + vsize));
  m.w_out.assign(vsize * hidden, 0.0);
  rng.fill_uniform(m.w_out, -limit, limit);
  m.b_out.assign(vsize, 0.0);
  return m;
}

ParamCount param_count(const LmModel& model) {
  ParamCount pc = std::visit([](const auto& cell) { return param_count(cell); }, model.backbone);
  const std::size_t extra =
      model.embeddings.values.size() + model.w_out.size() + model.b_out.size();
  pc.classical_params += extra;
  pc.total += extra;
  return pc;
}

std::vector<int> document_to_sequence(const Vocab& vocab, const std::vector<std::string>& doc,
                                      int max_seq_len) {
  std::vector<int> seq;
  seq.reserve(doc.size() + 2);
  seq.push_back(Vocab::kBosId);
  for (const auto& tok : doc) seq.push_back(vocab.id_of(tok));
  seq.push_back(Vocab::kEosId);
  if (seq.size() > static_cast<std::size_t>(max_seq_len)) {
    seq.resize(static_cast<std::size_t>(max_seq_len));
  }
  return seq;
}

std::vector<std::vector<int>> corpus_to_sequences(
    const Vocab& vocab, const std::vector<std::vector<std::string>>& corpus, int max_seq_len) {
  std::vector<std::vector<int>> seqs;
  seqs.reserve(corpus.size());
  for (const auto& doc : corpus) seqs.push_back(document_to_sequence(vocab, doc, max_seq_len));
  return seqs;
}

namespace {

void check_ids(const std::vector<int>& ids, int vocab_size, const char* what) {
  if (ids.empty()) throw std::invalid_argument(std::string(what) + ": empty id sequence");
  for (int id : ids) {
    if (id < 0 || id >= vocab_size) {
      throw std::out_of_range(std::string(what) + ": token id " + std::to_string(id) +
                              " outside vocab of size " + std::to_string(vocab_size));
    }
  }
}

std::vector<std::vector<double>> gather_rows(const EmbeddingMatrix& emb,
                                             const std::vector<int>& ids) {
  std::vector<std::vector<double>> xs;
  xs.reserve(ids.size());
  for (int id : ids) {
    const double* row = emb.row(static_cast<std::size_t>(id));
    xs.emplace_back(row, row + emb.dim);
  }
  return xs;
}

}  // namespace

std::vector<double> lm_forward(const LmModel& model, const std::vector<int>& ids) {
  check_ids(ids, model.vocab_size(), "lm_forward");
  const auto xs = gather_rows(model.embeddings, ids);
  const auto states =
      std::visit([&](const auto& cell) { return sequence_forward(cell, xs); }, model.backbone);

  const std::size_t vsize = model.vocab.size();
  const std::size_t hidden = static_cast<std::size_t>(model.hidden_dim());
  std::vector<double> out(ids.size() * vsize);
  for (std::size_t t = 0; t < states.size(); ++t) {
    double* row = out.data() + t * vsize;
    affine(model.w_out, model.b_out, states[t].h.data(), hidden, row, vsize);
    log_softmax_inplace(row, vsize);
  }
  return out;
}

double nll(const std::vector<double>& logprobs, std::size_t vocab_size,
           const std::vector<int>& targets) {
  if (vocab_size == 0 || logprobs.size() % vocab_size != 0) {
    throw std::invalid_argument("nll: logprobs not a whole number of rows");
  }
  const std::size_t rows = logprobs.size() / vocab_size;
  if (rows != targets.size()) throw std::invalid_argument("nll: row/target count mismatch");
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < rows; ++t) {
    const int tgt = targets[t];
    if (tgt == Vocab::kPadId) continue;
    if (tgt < 0 || static_cast<std::size_t>(tgt) >= vocab_size) {
      throw std::out_of_range("nll: target id out of range");
    }
    total -= logprobs[t * vocab_size + static_cast<std::size_t>(tgt)];
    ++n;
  }
  if (n == 0) throw std::invalid_argument("nll: every position is padding");
  return total / static_cast<double>(n);
}

double perplexity_on_sequences(const LmModel& model,
                               const std::vector<std::vector<int>>& sequences) {
  if (sequences.empty()) throw std::invalid_argument("perplexity: empty corpus");
  const std::size_t vsize = model.vocab.size();
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& seq : sequences) {
    if (seq.size() < 2) continue;
    const std::vector<int> inputs(seq.begin(), seq.end() - 1);
    const auto logp = lm_forward(model, inputs);
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
      const int tgt = seq[t + 1];
      if (tgt == Vocab::kPadId) continue;
      total -= logp[t * vsize + static_cast<std::size_t>(tgt)];
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("perplexity: no scorable positions");
  return std::exp(total / static_cast<double>(n));
}

double perplexity(const LmModel& model, const std::vector<std::vector<std::string>>& corpus,
                  int max_seq_len) {
  if (corpus.empty()) throw std::invalid_argument("perplexity: empty corpus");
  return perplexity_on_sequences(model, corpus_to_sequences(model.vocab, corpus, max_seq_len));
}

LmGradients LmGradients::zeros(const LmModel& model) {
  LmGradients g;
  g.embeddings.assign(model.embeddings.values.size(), 0.0);
  if (const auto* q = std::get_if<QLstmCell>(&model.backbone)) {
    g.backbone = QLstmGrads::zeros(*q);
  } else {
    g.backbone = ClassicalLstmGrads::zeros(std::get<ClassicalLstmCell>(model.backbone));
  }
  g.w_out.assign(model.w_out.size(), 0.0);
  g.b_out.assign(model.b_out.size(), 0.0);
  return g;
}

namespace {

template <class Cell, class Cache, class Grads>
SequenceLoss sequence_gradients_impl(const LmModel& model, const Cell& cell,
                                     const std::vector<int>& seq, LmGradients& grads,
                                     Grads& bgrads, int n_threads) {
  const std::size_t T = seq.size() - 1;
  const std::vector<int> inputs(seq.begin(), seq.end() - 1);
  const auto xs = gather_rows(model.embeddings, inputs);

  std::vector<Cache> caches;
  const auto states = sequence_forward(cell, xs, &caches);

  const std::size_t vsize = model.vocab.size();
  const std::size_t hidden = static_cast<std::size_t>(cell.hidden_dim());

  // Per step: log-softmax row for the loss, then exponentiate in place so
  // the same buffer is the softmax needed by the backward pass.
  SequenceLoss loss;
  std::vector<double> probs(T * vsize);
  for (std::size_t t = 0; t < T; ++t) {
    double* row = probs.data() + t * vsize;
    affine(model.w_out, model.b_out, states[t].h.data(), hidden, row, vsize);
    log_softmax_inplace(row, vsize);
    const int tgt = seq[t + 1];
    if (tgt != Vocab::kPadId) {
      loss.sum_nll -= row[static_cast<std::size_t>(tgt)];
      ++loss.n_targets;
    }
    for (std::size_t j = 0; j < vsize; ++j) row[j] = std::exp(row[j]);
  }

  std::vector<double> dh_next(hidden, 0.0), dc_next(hidden, 0.0), dh(hidden);
  std::vector<double> dlogits(vsize);
  for (std::size_t t = T; t-- > 0;) {
    const int tgt = seq[t + 1];
    if (tgt == Vocab::kPadId) {
      std::fill(dlogits.begin(), dlogits.end(), 0.0);
    } else {
      std::memcpy(dlogits.data(), probs.data() + t * vsize, vsize * sizeof(double));
      dlogits[static_cast<std::size_t>(tgt)] -= 1.0;
      outer_acc(grads.w_out, dlogits.data(), vsize, states[t].h.data(), hidden);
      for (std::size_t j = 0; j < vsize; ++j) grads.b_out[j] += dlogits[j];
    }
    std::fill(dh.begin(), dh.end(), 0.0);
    if (tgt != Vocab::kPadId) {
      matvec_t_acc(model.w_out, dlogits.data(), vsize, hidden, dh.data());
    }
    for (std::size_t j = 0; j < hidden; ++j) dh[j] += dh_next[j];

    StepBackward back;
    if constexpr (std::is_same_v<Cell, QLstmCell>) {
      back = qlstm_step_backward(cell, caches[t], dh, dc_next, bgrads, n_threads);
    } else {
      back = lstm_step_backward(cell, caches[t], dh, dc_next, bgrads);
    }
    double* demb = grads.embeddings.data() + static_cast<std::size_t>(seq[t]) * xs[t].size();
    for (std::size_t j = 0; j < xs[t].size(); ++j) demb[j] += back.dx[j];
    dh_next = std::move(back.dh_prev);
    dc_next = std::move(back.dc_prev);
  }
  return loss;
}

}  // namespace

SequenceLoss lm_sequence_gradients(const LmModel& model, const std::vector<int>& seq,
                                   LmGradients& grads, int n_threads) {
  if (seq.size() < 2) {
    throw std::invalid_argument("lm_sequence_gradients: sequence needs at least two ids");
  }
  check_ids(seq, model.vocab_size(), "lm_sequence_gradients");
  if (const auto* q = std::get_if<QLstmCell>(&model.backbone)) {
    return sequence_gradients_impl<QLstmCell, QLstmStepCache>(
        model, *q, seq, grads, std::get<QLstmGrads>(grads.backbone), n_threads);
  }
  return sequence_gradients_impl<ClassicalLstmCell, ClassicalStepCache>(
      model, std::get<ClassicalLstmCell>(model.backbone), seq, grads,
      std::get<ClassicalLstmGrads>(grads.backbone), n_threads);
}

namespace {

struct View {
  double* p = nullptr;
  std::size_t n = 0;
};

std::vector<View> model_views(LmModel& m) {
  std::vector<View> vs;
  vs.push_back({m.embeddings.values.data(), m.embeddings.values.size()});
  if (auto* q = std::get_if<QLstmCell>(&m.backbone)) {
    vs.push_back({q->w_in.data(), q->w_in.size()});
    vs.push_back({q->b_in.data(), q->b_in.size()});
    vs.push_back({q->params_f.angles.data(), q->params_f.angles.size()});
    vs.push_back({q->params_i.angles.data(), q->params_i.angles.size()});
    vs.push_back({q->params_g.angles.data(), q->params_g.angles.size()});
    vs.push_back({q->params_o.angles.data(), q->params_o.angles.size()});
  } else {
    auto& c = std::get<ClassicalLstmCell>(m.backbone);
    vs.push_back({c.w_f.data(), c.w_f.size()});
    vs.push_back({c.b_f.data(), c.b_f.size()});
    vs.push_back({c.w_i.data(), c.w_i.size()});
    vs.push_back({c.b_i.data(), c.b_i.size()});
    vs.push_back({c.w_g.data(), c.w_g.size()});
    vs.push_back({c.b_g.data(), c.b_g.size()});
    vs.push_back({c.w_o.data(), c.w_o.size()});
    vs.push_back({c.b_o.data(), c.b_o.size()});
  }
  vs.push_back({m.w_out.data(), m.w_out.size()});
  vs.push_back({m.b_out.data(), m.b_out.size()});
  return vs;
}

std::vector<View> grad_views(LmGradients& g) {
  std::vector<View> vs;
  vs.push_back({g.embeddings.data(), g.embeddings.size()});
  if (auto* q = std::get_if<QLstmGrads>(&g.backbone)) {
    vs.push_back({q->w_in.data(), q->w_in.size()});
    vs.push_back({q->b_in.data(), q->b_in.size()});
    vs.push_back({q->params_f.data(), q->params_f.size()});
    vs.push_back({q->params_i.data(), q->params_i.size()});
    vs.push_back({q->params_g.data(), q->params_g.size()});
    vs.push_back({q->params_o.data(), q->params_o.size()});
  } else {
    auto& c = std::get<ClassicalLstmGrads>(g.backbone);
    vs.push_back({c.w_f.data(), c.w_f.size()});
    vs.push_back({c.b_f.data(), c.b_f.size()});
    vs.push_back({c.w_i.data(), c.w_i.size()});
    vs.push_back({c.b_i.data(), c.b_i.size()});
    vs.push_back({c.w_g.data(), c.w_g.size()});
    vs.push_back({c.b_g.data(), c.b_g.size()});
    vs.push_back({c.w_o.data(), c.w_o.size()});
    vs.push_back({c.b_o.data(), c.b_o.size()});
  }
  vs.push_back({g.w_out.data(), g.w_out.size()});
  vs.push_back({g.b_out.data(), g.b_out.size()});
  return vs;
}

std::size_t total_size(const std::vector<View>& vs) {
  std::size_t n = 0;
  for (const auto& v : vs) n += v.n;
  return n;
}

// Adam with bias correction over a flat gradient buffer.
class Adam {
 public:
  Adam(std::size_t n, const TrainConfig& cfg)
      : lr_(cfg.learning_rate), b1_(cfg.beta1), b2_(cfg.beta2), eps_(cfg.epsilon),
        m_(n, 0.0), v_(n, 0.0) {}

  void step(const std::vector<View>& params, const std::vector<double>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    std::size_t off = 0;
    for (const auto& view : params) {
      for (std::size_t i = 0; i < view.n; ++i, ++off) {
        const double g = grad[off];
        m_[off] = b1_ * m_[off] + (1.0 - b1_) * g;
        v_[off] = b2_ * v_[off] + (1.0 - b2_) * g * g;
        view.p[i] -= lr_ * (m_[off] / c1) / (std::sqrt(v_[off] / c2) + eps_);
      }
    }
  }

 private:
  double lr_, b1_, b2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace

TrainResult train_lm(const std::vector<std::vector<std::string>>& corpus, const Vocab& vocab,
                     const LmConfig& model_config, const TrainConfig& train_config,
                     const TrainCallback& on_batch) {
  validate(train_config);
  if (corpus.empty()) throw std::invalid_argument("train_lm: empty corpus");

  const std::size_t n_hold =
      static_cast<std::size_t>(train_config.holdout_fraction * static_cast<double>(corpus.size()));
  const std::size_t n_train = corpus.size() - n_hold;
  if (n_train == 0) throw std::invalid_argument("train_lm: holdout leaves nothing to train on");

  const std::vector<std::vector<std::string>> train_corpus(corpus.begin(),
                                                           corpus.begin() + n_train);
  const auto sequences = corpus_to_sequences(vocab, train_corpus, train_config.max_seq_len);

  TrainResult result;
  result.model = LmModel::create(vocab, model_config, train_config.seed);
  result.train_docs = n_train;
  result.holdout_docs = n_hold;

  const std::size_t n_seq = sequences.size();
  const std::size_t bs = static_cast<std::size_t>(train_config.batch_size);
  result.batches_per_epoch = static_cast<int>((n_seq + bs - 1) / bs);

  auto params = model_views(result.model);
  Adam adam(total_size(params), train_config);
  std::vector<double> flat_grad(total_size(params));

  std::vector<std::size_t> order(n_seq);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < train_config.epochs && !result.stopped_early; ++epoch) {
    if (train_config.shuffle) {
      Rng rng(derive_seed(train_config.seed, "shuffle.epoch." + std::to_string(epoch)));
      rng.shuffle(order);
    }
    double epoch_nll = 0.0;
    std::size_t epoch_targets = 0;
    for (int batch = 0; batch < result.batches_per_epoch; ++batch) {
      const std::size_t begin = static_cast<std::size_t>(batch) * bs;
      const std::size_t end = std::min(begin + bs, n_seq);
      const std::size_t n_items = end - begin;

      // Disjoint per-item buffers reduced in item order keep the result
      // bitwise independent of the worker count.
      std::vector<LmGradients> buffers(n_items);
      std::vector<SequenceLoss> losses(n_items);
      parallel_for(static_cast<std::int64_t>(n_items), train_config.n_threads,
                   [&](std::int64_t i) {
                     buffers[i] = LmGradients::zeros(result.model);
                     losses[i] = lm_sequence_gradients(
                         result.model, sequences[order[begin + static_cast<std::size_t>(i)]],
                         buffers[i], 1);
                   });

      double batch_nll = 0.0;
      std::size_t batch_targets = 0;
      for (const auto& l : losses) {
        batch_nll += l.sum_nll;
        batch_targets += l.n_targets;
      }
      std::fill(flat_grad.begin(), flat_grad.end(), 0.0);
      const double scale = 1.0 / static_cast<double>(batch_targets);
      for (auto& buf : buffers) {
        auto gviews = grad_views(buf);
        std::size_t off = 0;
        for (const auto& view : gviews) {
          for (std::size_t i = 0; i < view.n; ++i, ++off) flat_grad[off] += scale * view.p[i];
        }
      }
      adam.step(params, flat_grad);

      const double batch_loss = batch_nll / static_cast<double>(batch_targets);
      result.batch_losses.push_back(batch_loss);
      epoch_nll += batch_nll;
      epoch_targets += batch_targets;
      if (on_batch && !on_batch(TrainProgress{epoch, batch, batch_loss})) {
        result.stopped_early = true;
        break;
      }
    }
    if (epoch_targets > 0) {
      result.epoch_losses.push_back(epoch_nll / static_cast<double>(epoch_targets));
    }
  }
  return result;
}

std::pair<EmbeddingMatrix, Vocab> extract_embeddings(const LmModel& model) {
  return {model.embeddings, model.vocab};
}

std::vector<double> moving_average(const std::vector<double>& xs, int window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be positive");
  if (window == 1) return xs;
  std::vector<double> out(xs.size());
  double run = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    run += xs[i];
    if (i >= static_cast<std::size_t>(window)) run -= xs[i - static_cast<std::size_t>(window)];
    const std::size_t n = std::min(i + 1, static_cast<std::size_t>(window));
    out[i] = run / static_cast<double>(n);
  }
  return out;
}

void write_loss_csv(const std::string& path, const TrainResult& result, int smooth_window) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_loss_csv: cannot open " + path);
  out << "epoch,batch,loss\n";
  const auto losses = moving_average(result.batch_losses, smooth_window);
  const int bpe = std::max(result.batches_per_epoch, 1);
  for (std::size_t i = 0; i < losses.size(); ++i) {
    out << (i / static_cast<std::size_t>(bpe)) << ',' << (i % static_cast<std::size_t>(bpe))
        << ',' << format_g17(losses[i]) << '\n';
  }
  if (!out) throw std::runtime_error("write_loss_csv: write failed for " + path);
}

namespace {
constexpr char kCheckpointMagic[4] = {'P', 'Q', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;
}

std::vector<std::uint8_t> lm_checkpoint_bytes(const LmModel& model) {
  ByteWriter w;
  w.raw(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  w.u8(model.config.backbone == BackboneKind::Quantum ? 0 : 1);
  w.u32(static_cast<std::uint32_t>(model.config.embed_dim));
  w.u32(static_cast<std::uint32_t>(model.hidden_dim()));
  w.u32(static_cast<std::uint32_t>(model.config.n_layers));
  w.u64(model.seed);
  w.u32(static_cast<std::uint32_t>(model.vocab.size()));
  for (const auto& tok : model.vocab.tokens()) w.str16(tok);

  auto views = model_views(const_cast<LmModel&>(model));
  w.u64(total_size(views));
  for (const auto& view : views) {
    for (std::size_t i = 0; i < view.n; ++i) w.f64(view.p[i]);
  }
  w.u32(crc32_ieee(w.bytes.data(), w.bytes.size()));
  return std::move(w.bytes);
}

LmModel lm_checkpoint_from_bytes(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, "checkpoint");
  const std::uint8_t* magic = r.raw(4);
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint8_t backbone = r.u8();
  if (backbone > 1) throw FormatError("checkpoint: unknown backbone kind");
  LmConfig cfg;
  cfg.backbone = backbone == 0 ? BackboneKind::Quantum : BackboneKind::Classical;
  cfg.embed_dim = static_cast<int>(r.u32());
  const int width = static_cast<int>(r.u32());
  cfg.n_layers = static_cast<int>(r.u32());
  if (cfg.backbone == BackboneKind::Quantum) {
    cfg.n_qubits = width;
  } else {
    cfg.hidden_dim = width;
  }
  const std::uint64_t seed = r.u64();

  const std::uint32_t vocab_size = r.u32();
  if (vocab_size < Vocab::kNumReserved) {
    throw FormatError("checkpoint: vocab smaller than the reserved tokens");
  }
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (std::uint32_t i = 0; i < vocab_size; ++i) tokens.push_back(r.str16());

  const std::uint64_t n_params = r.u64();
  std::vector<double> params;
  params.reserve(n_params);
  for (std::uint64_t i = 0; i < n_params; ++i) params.push_back(r.f64());

  const std::size_t payload_end = r.pos();
  const std::uint32_t stored_crc = r.u32();
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes");
  if (crc32_ieee(bytes.data(), payload_end) != stored_crc) {
    throw CorruptionError("checkpoint: CRC mismatch");
  }

  Vocab vocab;
  for (std::size_t i = 0; i < static_cast<std::size_t>(Vocab::kNumReserved); ++i) {
    if (tokens[i] != vocab.token_of(static_cast<int>(i))) {
      throw FormatError("checkpoint: reserved token slot " + std::to_string(i) + " holds '" +
                        tokens[i] + "'");
    }
  }
  for (std::size_t i = Vocab::kNumReserved; i < tokens.size(); ++i) {
    if (vocab.contains(tokens[i])) {
      throw FormatError("checkpoint: duplicate token '" + tokens[i] + "'");
    }
    vocab.add(std::move(tokens[i]));
  }

  LmModel model = LmModel::create(std::move(vocab), cfg, seed);
  auto views = model_views(model);
  if (total_size(views) != n_params) {
    throw FormatError("checkpoint: parameter count does not match the declared shape");
  }
  std::size_t off = 0;
  for (const auto& view : views) {
    for (std::size_t i = 0; i < view.n; ++i, ++off) view.p[i] = params[off];
  }
  return model;
}

void save_lm_checkpoint(const LmModel& model, const std::string& path) {
  const auto bytes = lm_checkpoint_bytes(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_lm_checkpoint: cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("save_lm_checkpoint: write failed for " + path);
}

LmModel load_lm_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_lm_checkpoint: cannot open " + path);
  std::vector<std::uint8_t> bytes;
  char chunk[4096];
  while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
    bytes.insert(bytes.end(), chunk, chunk + in.gcount());
  }
  return lm_checkpoint_from_bytes(bytes);
}

}  // namespace pqlm
