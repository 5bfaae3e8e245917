#include "pqlm/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "pqlm/bytesio.hpp"
#include "pqlm/common.hpp"
#include "pqlm/linalg.hpp"

namespace pqlm {

namespace {

constexpr double kLnEpsilon = 1e-5;
constexpr double kMaskValue = -1e30;

using vd = std::vector<double>;

void xavier(vd& w, std::size_t fan_out, std::size_t fan_in, std::uint64_t seed) {
  Rng rng(seed);
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  w.assign(fan_out * fan_in, 0.0);
  rng.fill_uniform(w, -limit, limit);
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) * 0.39894228040143268; // 1/sqrt(2*pi)
  return cdf + x * pdf;
}

void ln_forward(const double* x, const vd& g, const vd& b, double* y, std::size_t d) {
  double mu = 0.0;
  for (std::size_t i = 0; i < d; ++i) mu += x[i];
  mu /= static_cast<double>(d);
  double var = 0.0;
  for (std::size_t i = 0; i < d; ++i) var += (x[i] - mu) * (x[i] - mu);
  var /= static_cast<double>(d);
  const double inv = 1.0 / std::sqrt(var + kLnEpsilon);
  for (std::size_t i = 0; i < d; ++i) y[i] = g[i] * (x[i] - mu) * inv + b[i];
}

// dx is overwritten; parameter gradients accumulate.
void ln_backward(const double* x, const vd& g, const double* dy, double* dx, vd& dg, vd& db,
                 std::size_t d) {
  double mu = 0.0;
  for (std::size_t i = 0; i < d; ++i) mu += x[i];
  mu /= static_cast<double>(d);
  double var = 0.0;
  for (std::size_t i = 0; i < d; ++i) var += (x[i] - mu) * (x[i] - mu);
  var /= static_cast<double>(d);
  const double inv = 1.0 / std::sqrt(var + kLnEpsilon);

  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double xhat = (x[i] - mu) * inv;
    const double dyh = dy[i] * g[i];
    m1 += dyh;
    m2 += dyh * xhat;
    dg[i] += dy[i] * xhat;
    db[i] += dy[i];
  }
  m1 /= static_cast<double>(d);
  m2 /= static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double xhat = (x[i] - mu) * inv;
    dx[i] = (dy[i] * g[i] - m1 - xhat * m2) * inv;
  }
}

// Multipliers 0 or 1/(1-p); empty mask = identity.
vd draw_dropout(Rng& rng, std::size_t n, double p) {
  vd mask(n);
  const double keep = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < n; ++i) mask[i] = rng.uniform() < p ? 0.0 : keep;
  return mask;
}

void apply_mask(vd& x, const vd& mask) {
  if (mask.empty()) return;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= mask[i];
}

}  // namespace

TransformerClassifier TransformerClassifier::create(EmbeddingMatrix embeddings, Vocab vocab,
                                                    const ClfConfig& config, std::uint64_t seed) {
  if (embeddings.rows != vocab.size()) {
    throw std::invalid_argument("TransformerClassifier: embeddings/vocab size mismatch");
  }
  if (embeddings.dim == 0 || config.n_blocks < 1 || config.n_heads < 1 || config.ffn_dim < 1 ||
      config.max_seq_len < 1) {
    throw std::invalid_argument("TransformerClassifier: dimensions must be positive");
  }
  if (embeddings.dim % static_cast<std::size_t>(config.n_heads) != 0) {
    throw std::invalid_argument("TransformerClassifier: head count must divide model width");
  }
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) {
    throw std::invalid_argument("TransformerClassifier: dropout must lie in [0, 1)");
  }

  TransformerClassifier clf;
  clf.vocab = std::move(vocab);
  clf.config = config;
  clf.seed = seed;
  clf.embeddings = std::move(embeddings);

  const std::size_t d = clf.embeddings.dim;
  const std::size_t ffn = static_cast<std::size_t>(config.ffn_dim);
  {
    Rng rng(derive_seed(seed, "positional"));
    clf.positional.assign(static_cast<std::size_t>(config.max_seq_len) * d, 0.0);
    rng.fill_uniform(clf.positional, -0.02, 0.02);
  }
  clf.blocks.resize(static_cast<std::size_t>(config.n_blocks));
  for (int i = 0; i < config.n_blocks; ++i) {
    auto& blk = clf.blocks[static_cast<std::size_t>(i)];
    const std::string tag = "block" + std::to_string(i) + ".";
    blk.ln1_g.assign(d, 1.0);
    blk.ln1_b.assign(d, 0.0);
    xavier(blk.wq, d, d, derive_seed(seed, tag + "wq"));
    xavier(blk.wk, d, d, derive_seed(seed, tag + "wk"));
    xavier(blk.wv, d, d, derive_seed(seed, tag + "wv"));
    xavier(blk.wo, d, d, derive_seed(seed, tag + "wo"));
    blk.bq.assign(d, 0.0);
    blk.bk.assign(d, 0.0);
    blk.bv.assign(d, 0.0);
    blk.bo.assign(d, 0.0);
    blk.ln2_g.assign(d, 1.0);
    blk.ln2_b.assign(d, 0.0);
    xavier(blk.w1, ffn, d, derive_seed(seed, tag + "w1"));
    blk.b1.assign(ffn, 0.0);
    xavier(blk.w2, d, ffn, derive_seed(seed, tag + "w2"));
    blk.b2.assign(d, 0.0);
  }
  clf.lnf_g.assign(d, 1.0);
  clf.lnf_b.assign(d, 0.0);
  xavier(clf.w_head, kNumSentiments, d, derive_seed(seed, "w_head"));
  clf.b_head.assign(kNumSentiments, 0.0);
  return clf;
}

Prediction clf_forward(const TransformerClassifier& clf, const std::vector<int>& ids,
                       std::uint64_t dropout_seed, ClfTrace* trace) {
  if (ids.empty()) throw std::invalid_argument("clf_forward: empty id sequence");
  std::vector<int> cut = ids;
  if (cut.size() > static_cast<std::size_t>(clf.config.max_seq_len)) {
    cut.resize(static_cast<std::size_t>(clf.config.max_seq_len));
  }
  const std::size_t T = cut.size();
  const std::size_t d = clf.embeddings.dim;
  const std::size_t H = static_cast<std::size_t>(clf.config.n_heads);
  const std::size_t dh = static_cast<std::size_t>(clf.head_dim());
  const std::size_t ffn = static_cast<std::size_t>(clf.config.ffn_dim);

  std::vector<std::uint8_t> pad(T, 0);
  std::size_t n_nonpad = 0;
  for (std::size_t t = 0; t < T; ++t) {
    const int id = cut[t];
    if (id < 0 || static_cast<std::size_t>(id) >= clf.embeddings.rows) {
      throw std::out_of_range("clf_forward: token id " + std::to_string(id) +
                              " outside vocab of size " + std::to_string(clf.embeddings.rows));
    }
    pad[t] = id == Vocab::kPadId ? 1 : 0;
    if (!pad[t]) ++n_nonpad;
  }
  if (n_nonpad == 0) throw std::invalid_argument("clf_forward: every position is padding");

  const bool use_dropout = dropout_seed != 0 && clf.config.dropout > 0.0;
  Rng drop_rng(dropout_seed);

  vd x(T * d);
  for (std::size_t t = 0; t < T; ++t) {
    const double* e = clf.embeddings.row(static_cast<std::size_t>(cut[t]));
    const double* p = clf.positional.data() + t * d;
    for (std::size_t i = 0; i < d; ++i) x[t * d + i] = e[i] + p[i];
  }
  vd drop_input;
  if (use_dropout) {
    drop_input = draw_dropout(drop_rng, T * d, clf.config.dropout);
    apply_mask(x, drop_input);
  }

  if (trace != nullptr) {
    trace->ids = cut;
    trace->pad = pad;
    trace->n_nonpad = n_nonpad;
    trace->drop_input = drop_input;
    trace->x0 = x;
    trace->blocks.assign(clf.blocks.size(), {});
  }

  vd n1(T * d), q(T * d), k(T * d), v(T * d), ctx(T * d), attn_out(T * d);
  vd n2(T * d), ffn_pre(T * ffn), ffn_act(T * ffn), f2(T * d);
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  for (std::size_t b = 0; b < clf.blocks.size(); ++b) {
    const auto& blk = clf.blocks[b];
    ClfTrace::Block* tb = trace != nullptr ? &trace->blocks[b] : nullptr;
    if (tb != nullptr) tb->x_in = x;

    for (std::size_t t = 0; t < T; ++t) {
      ln_forward(x.data() + t * d, blk.ln1_g, blk.ln1_b, n1.data() + t * d, d);
      affine(blk.wq, blk.bq, n1.data() + t * d, d, q.data() + t * d, d);
      affine(blk.wk, blk.bk, n1.data() + t * d, d, k.data() + t * d, d);
      affine(blk.wv, blk.bv, n1.data() + t * d, d, v.data() + t * d, d);
    }

    vd attention(H * T * T);
    for (std::size_t h = 0; h < H; ++h) {
      const std::size_t base = h * dh;
      for (std::size_t t = 0; t < T; ++t) {
        double* row = attention.data() + (h * T + t) * T;
        for (std::size_t s = 0; s < T; ++s) {
          double score = 0.0;
          for (std::size_t j = 0; j < dh; ++j) {
            score += q[t * d + base + j] * k[s * d + base + j];
          }
          row[s] = score * inv_sqrt_dh + (pad[s] ? kMaskValue : 0.0);
        }
        softmax_inplace(row, T);
        for (std::size_t j = 0; j < dh; ++j) {
          double acc = 0.0;
          for (std::size_t s = 0; s < T; ++s) acc += row[s] * v[s * d + base + j];
          ctx[t * d + base + j] = acc;
        }
      }
    }

    for (std::size_t t = 0; t < T; ++t) {
      affine(blk.wo, blk.bo, ctx.data() + t * d, d, attn_out.data() + t * d, d);
    }
    vd drop_attn;
    if (use_dropout) {
      drop_attn = draw_dropout(drop_rng, T * d, clf.config.dropout);
      apply_mask(attn_out, drop_attn);
    }
    for (std::size_t i = 0; i < T * d; ++i) x[i] += attn_out[i];

    if (tb != nullptr) {
      tb->n1 = n1;
      tb->q = q;
      tb->k = k;
      tb->v = v;
      tb->ctx = ctx;
      tb->attention = std::move(attention);
      tb->drop_attn = drop_attn;
      tb->x_mid = x;
    }

    for (std::size_t t = 0; t < T; ++t) {
      ln_forward(x.data() + t * d, blk.ln2_g, blk.ln2_b, n2.data() + t * d, d);
      affine(blk.w1, blk.b1, n2.data() + t * d, d, ffn_pre.data() + t * ffn, ffn);
      for (std::size_t j = 0; j < ffn; ++j) {
        ffn_act[t * ffn + j] = gelu(ffn_pre[t * ffn + j]);
      }
      affine(blk.w2, blk.b2, ffn_act.data() + t * ffn, ffn, f2.data() + t * d, d);
    }
    vd drop_ffn;
    if (use_dropout) {
      drop_ffn = draw_dropout(drop_rng, T * d, clf.config.dropout);
      apply_mask(f2, drop_ffn);
    }
    for (std::size_t i = 0; i < T * d; ++i) x[i] += f2[i];

    if (tb != nullptr) {
      tb->n2 = n2;
      tb->ffn_pre = ffn_pre;
      tb->ffn_act = ffn_act;
      tb->drop_ffn = drop_ffn;
      tb->x_out = x;
    }
  }

  vd xf(T * d);
  for (std::size_t t = 0; t < T; ++t) {
    ln_forward(x.data() + t * d, clf.lnf_g, clf.lnf_b, xf.data() + t * d, d);
  }
  vd pooled(d, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    if (pad[t]) continue;
    for (std::size_t i = 0; i < d; ++i) pooled[i] += xf[t * d + i];
  }
  for (std::size_t i = 0; i < d; ++i) pooled[i] /= static_cast<double>(n_nonpad);

  std::array<double, kNumSentiments> logits{};
  affine(clf.w_head, clf.b_head, pooled.data(), d, logits.data(), kNumSentiments);

  Prediction pred;
  pred.probabilities = logits;
  softmax_inplace(pred.probabilities.data(), kNumSentiments);
  pred.label = 0;
  for (int c = 1; c < kNumSentiments; ++c) {
    if (pred.probabilities[static_cast<std::size_t>(c)] >
        pred.probabilities[static_cast<std::size_t>(pred.label)]) {
      pred.label = c;
    }
  }

  if (trace != nullptr) {
    trace->x_final = std::move(x);
    trace->xf = std::move(xf);
    trace->pooled = std::move(pooled);
    trace->logits = logits;
    trace->probs = pred.probabilities;
  }
  return pred;
}

ClfGrads ClfGrads::zeros(const TransformerClassifier& clf) {
  ClfGrads g;
  if (clf.config.finetune) g.embeddings.assign(clf.embeddings.values.size(), 0.0);
  g.positional.assign(clf.positional.size(), 0.0);
  g.blocks.resize(clf.blocks.size());
  for (std::size_t b = 0; b < clf.blocks.size(); ++b) {
    const auto& src = clf.blocks[b];
    auto& dst = g.blocks[b];
    dst.ln1_g.assign(src.ln1_g.size(), 0.0);
    dst.ln1_b.assign(src.ln1_b.size(), 0.0);
    dst.wq.assign(src.wq.size(), 0.0);
    dst.bq.assign(src.bq.size(), 0.0);
    dst.wk.assign(src.wk.size(), 0.0);
    dst.bk.assign(src.bk.size(), 0.0);
    dst.wv.assign(src.wv.size(), 0.0);
    dst.bv.assign(src.bv.size(), 0.0);
    dst.wo.assign(src.wo.size(), 0.0);
    dst.bo.assign(src.bo.size(), 0.0);
    dst.ln2_g.assign(src.ln2_g.size(), 0.0);
    dst.ln2_b.assign(src.ln2_b.size(), 0.0);
    dst.w1.assign(src.w1.size(), 0.0);
    dst.b1.assign(src.b1.size(), 0.0);
    dst.w2.assign(src.w2.size(), 0.0);
    dst.b2.assign(src.b2.size(), 0.0);
  }
  g.lnf_g.assign(clf.lnf_g.size(), 0.0);
  g.lnf_b.assign(clf.lnf_b.size(), 0.0);
  g.w_head.assign(clf.w_head.size(), 0.0);
  g.b_head.assign(clf.b_head.size(), 0.0);
  return g;
}

double clf_doc_gradients(const TransformerClassifier& clf, const std::vector<int>& ids,
                         Sentiment gold, ClfGrads& grads, std::uint64_t dropout_seed) {
  ClfTrace tr;
  clf_forward(clf, ids, dropout_seed, &tr);

  const std::size_t T = tr.ids.size();
  const std::size_t d = clf.embeddings.dim;
  const std::size_t H = static_cast<std::size_t>(clf.config.n_heads);
  const std::size_t dh = static_cast<std::size_t>(clf.head_dim());
  const std::size_t ffn = static_cast<std::size_t>(clf.config.ffn_dim);
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  double mx = tr.logits[0];
  for (int c = 1; c < kNumSentiments; ++c) mx = std::max(mx, tr.logits[static_cast<std::size_t>(c)]);
  double lse = 0.0;
  for (int c = 0; c < kNumSentiments; ++c) {
    lse += std::exp(tr.logits[static_cast<std::size_t>(c)] - mx);
  }
  const std::size_t gi = static_cast<std::size_t>(gold);
  const double loss = mx + std::log(lse) - tr.logits[gi];

  std::array<double, kNumSentiments> dlogits = tr.probs;
  dlogits[gi] -= 1.0;

  outer_acc(grads.w_head, dlogits.data(), kNumSentiments, tr.pooled.data(), d);
  for (int c = 0; c < kNumSentiments; ++c) {
    grads.b_head[static_cast<std::size_t>(c)] += dlogits[static_cast<std::size_t>(c)];
  }
  vd dpool(d, 0.0);
  matvec_t_acc(clf.w_head, dlogits.data(), kNumSentiments, d, dpool.data());

  vd dx(T * d, 0.0);
  {
    vd dxf(d), dxt(d);
    for (std::size_t t = 0; t < T; ++t) {
      if (tr.pad[t]) continue;
      for (std::size_t i = 0; i < d; ++i) {
        dxf[i] = dpool[i] / static_cast<double>(tr.n_nonpad);
      }
      ln_backward(tr.x_final.data() + t * d, clf.lnf_g, dxf.data(), dxt.data(), grads.lnf_g,
                  grads.lnf_b, d);
      for (std::size_t i = 0; i < d; ++i) dx[t * d + i] += dxt[i];
    }
  }

  vd df2(T * d), dn2(T * d), dx_mid(T * d), dattn(T * d), dctx(T * d);
  vd dq(T * d), dk(T * d), dv(T * d), dn1(T * d);
  vd dpre(ffn), dact(ffn), drow(d);
  for (std::size_t b = clf.blocks.size(); b-- > 0;) {
    const auto& blk = clf.blocks[b];
    const auto& tb = tr.blocks[b];
    auto& gb = grads.blocks[b];

    // Feed-forward branch; residual passes dx through unchanged.
    df2 = dx;
    apply_mask(df2, tb.drop_ffn);
    std::fill(dn2.begin(), dn2.end(), 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      const double* df2t = df2.data() + t * d;
      outer_acc(gb.w2, df2t, d, tb.ffn_act.data() + t * ffn, ffn);
      for (std::size_t i = 0; i < d; ++i) gb.b2[i] += df2t[i];
      std::fill(dact.begin(), dact.end(), 0.0);
      matvec_t_acc(blk.w2, df2t, d, ffn, dact.data());
      for (std::size_t j = 0; j < ffn; ++j) {
        dpre[j] = dact[j] * gelu_grad(tb.ffn_pre[t * ffn + j]);
      }
      outer_acc(gb.w1, dpre.data(), ffn, tb.n2.data() + t * d, d);
      for (std::size_t j = 0; j < ffn; ++j) gb.b1[j] += dpre[j];
      std::fill(drow.begin(), drow.end(), 0.0);
      matvec_t_acc(blk.w1, dpre.data(), ffn, d, drow.data());
      std::memcpy(dn2.data() + t * d, drow.data(), d * sizeof(double));
    }

    dx_mid = dx; // residual
    for (std::size_t t = 0; t < T; ++t) {
      ln_backward(tb.x_mid.data() + t * d, blk.ln2_g, dn2.data() + t * d, drow.data(), gb.ln2_g,
                  gb.ln2_b, d);
      for (std::size_t i = 0; i < d; ++i) dx_mid[t * d + i] += drow[i];
    }

    // Attention branch of the same residual.
    dattn = dx_mid;
    apply_mask(dattn, tb.drop_attn);
    std::fill(dctx.begin(), dctx.end(), 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      const double* da = dattn.data() + t * d;
      outer_acc(gb.wo, da, d, tb.ctx.data() + t * d, d);
      for (std::size_t i = 0; i < d; ++i) gb.bo[i] += da[i];
      matvec_t_acc(blk.wo, da, d, d, dctx.data() + t * d);
    }

    std::fill(dq.begin(), dq.end(), 0.0);
    std::fill(dk.begin(), dk.end(), 0.0);
    std::fill(dv.begin(), dv.end(), 0.0);
    std::vector<double> dA(T);
    for (std::size_t h = 0; h < H; ++h) {
      const std::size_t base = h * dh;
      for (std::size_t t = 0; t < T; ++t) {
        const double* arow = tb.attention.data() + (h * T + t) * T;
        double ssum = 0.0;
        for (std::size_t s = 0; s < T; ++s) {
          double acc = 0.0;
          for (std::size_t j = 0; j < dh; ++j) {
            acc += dctx[t * d + base + j] * tb.v[s * d + base + j];
          }
          dA[s] = acc;
          ssum += acc * arow[s];
          for (std::size_t j = 0; j < dh; ++j) {
            dv[s * d + base + j] += arow[s] * dctx[t * d + base + j];
          }
        }
        for (std::size_t s = 0; s < T; ++s) {
          const double ds = arow[s] * (dA[s] - ssum) * inv_sqrt_dh;
          if (ds == 0.0) continue;
          for (std::size_t j = 0; j < dh; ++j) {
            dq[t * d + base + j] += ds * tb.k[s * d + base + j];
            dk[s * d + base + j] += ds * tb.q[t * d + base + j];
          }
        }
      }
    }

    std::fill(dn1.begin(), dn1.end(), 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      const double* n1t = tb.n1.data() + t * d;
      outer_acc(gb.wq, dq.data() + t * d, d, n1t, d);
      outer_acc(gb.wk, dk.data() + t * d, d, n1t, d);
      outer_acc(gb.wv, dv.data() + t * d, d, n1t, d);
      for (std::size_t i = 0; i < d; ++i) {
        gb.bq[i] += dq[t * d + i];
        gb.bk[i] += dk[t * d + i];
        gb.bv[i] += dv[t * d + i];
      }
      matvec_t_acc(blk.wq, dq.data() + t * d, d, d, dn1.data() + t * d);
      matvec_t_acc(blk.wk, dk.data() + t * d, d, d, dn1.data() + t * d);
      matvec_t_acc(blk.wv, dv.data() + t * d, d, d, dn1.data() + t * d);
    }

    dx = dx_mid; // residual into the block input
    for (std::size_t t = 0; t < T; ++t) {
      ln_backward(tb.x_in.data() + t * d, blk.ln1_g, dn1.data() + t * d, drow.data(), gb.ln1_g,
                  gb.ln1_b, d);
      for (std::size_t i = 0; i < d; ++i) dx[t * d + i] += drow[i];
    }
  }

  apply_mask(dx, tr.drop_input);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < d; ++i) grads.positional[t * d + i] += dx[t * d + i];
    if (clf.config.finetune) {
      double* e = grads.embeddings.data() + static_cast<std::size_t>(tr.ids[t]) * d;
      for (std::size_t i = 0; i < d; ++i) e[i] += dx[t * d + i];
    }
  }
  return loss;
}

void validate(const ClfTrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("ClfTrainConfig: epochs must be positive");
  if (cfg.batch_size < 1) {
    throw std::invalid_argument("ClfTrainConfig: batch_size must be positive");
  }
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw std::invalid_argument("ClfTrainConfig: learning_rate must be finite and non-negative");
  }
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw std::invalid_argument("ClfTrainConfig: betas must lie in [0, 1)");
  }
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("ClfTrainConfig: epsilon must be positive");
  if (cfg.n_threads < 1) throw std::invalid_argument("ClfTrainConfig: n_threads must be positive");
  if (!(cfg.subset_fraction > 0.0 && cfg.subset_fraction <= 1.0)) {
    throw std::invalid_argument("ClfTrainConfig: subset_fraction must lie in (0, 1]");
  }
}

namespace {

struct View {
  double* p = nullptr;
  std::size_t n = 0;
};

void block_views(ClfBlockParams& blk, std::vector<View>& vs) {
  for (auto* v : {&blk.ln1_g, &blk.ln1_b, &blk.wq, &blk.bq, &blk.wk, &blk.bk, &blk.wv, &blk.bv,
                  &blk.wo, &blk.bo, &blk.ln2_g, &blk.ln2_b, &blk.w1, &blk.b1, &blk.w2, &blk.b2}) {
    vs.push_back({v->data(), v->size()});
  }
}

// include_embeddings: true for serialization (full model), the finetune
// flag for optimization (frozen rows never enter the update).
std::vector<View> clf_views(TransformerClassifier& clf, bool include_embeddings) {
  std::vector<View> vs;
  if (include_embeddings) {
    vs.push_back({clf.embeddings.values.data(), clf.embeddings.values.size()});
  }
  vs.push_back({clf.positional.data(), clf.positional.size()});
  for (auto& blk : clf.blocks) block_views(blk, vs);
  vs.push_back({clf.lnf_g.data(), clf.lnf_g.size()});
  vs.push_back({clf.lnf_b.data(), clf.lnf_b.size()});
  vs.push_back({clf.w_head.data(), clf.w_head.size()});
  vs.push_back({clf.b_head.data(), clf.b_head.size()});
  return vs;
}

std::vector<View> clf_grad_views(ClfGrads& g, bool include_embeddings) {
  std::vector<View> vs;
  if (include_embeddings) vs.push_back({g.embeddings.data(), g.embeddings.size()});
  vs.push_back({g.positional.data(), g.positional.size()});
  for (auto& blk : g.blocks) block_views(blk, vs);
  vs.push_back({g.lnf_g.data(), g.lnf_g.size()});
  vs.push_back({g.lnf_b.data(), g.lnf_b.size()});
  vs.push_back({g.w_head.data(), g.w_head.size()});
  vs.push_back({g.b_head.data(), g.b_head.size()});
  return vs;
}

std::size_t total_size(const std::vector<View>& vs) {
  std::size_t n = 0;
  for (const auto& v : vs) n += v.n;
  return n;
}

class Adam {
 public:
  Adam(std::size_t n, double lr, double b1, double b2, double eps)
      : lr_(lr), b1_(b1), b2_(b2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

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

std::uint64_t nonzero_seed(std::uint64_t s) { return s == 0 ? 1 : s; }

}  // namespace

std::vector<int> classifier_ids(const TransformerClassifier& clf, const std::string& text) {
  auto ids = encode_ids(clf.vocab, tokenize(clean(text)));
  if (ids.size() > static_cast<std::size_t>(clf.config.max_seq_len)) {
    ids.resize(static_cast<std::size_t>(clf.config.max_seq_len));
  }
  return ids;
}

ClfTrainResult train_classifier(EmbeddingMatrix embeddings, Vocab vocab,
                                const std::vector<RawDocument>& labeled_docs,
                                const ClfConfig& config, const ClfTrainConfig& train_config) {
  validate(train_config);
  if (labeled_docs.empty()) throw std::invalid_argument("train_classifier: empty corpus");

  ClfTrainResult result;
  result.classifier =
      TransformerClassifier::create(std::move(embeddings), std::move(vocab), config,
                                    train_config.seed);
  auto& clf = result.classifier;

  std::vector<std::vector<int>> doc_ids;
  std::vector<Sentiment> golds;
  for (const auto& doc : labeled_docs) {
    if (!doc.label) throw std::invalid_argument("train_classifier: document without label");
    auto ids = classifier_ids(clf, doc.text);
    if (ids.empty()) {
      ++result.docs_dropped;
      continue;
    }
    doc_ids.push_back(std::move(ids));
    golds.push_back(*doc.label);
  }
  if (doc_ids.empty()) {
    throw std::invalid_argument("train_classifier: every document cleaned to nothing");
  }

  std::vector<std::size_t> selected(doc_ids.size());
  std::iota(selected.begin(), selected.end(), std::size_t{0});
  if (train_config.subset_fraction < 1.0) {
    const std::size_t keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(train_config.subset_fraction *
                                    static_cast<double>(selected.size())));
    Rng rng(derive_seed(train_config.seed, "subset"));
    rng.shuffle(selected);
    selected.resize(keep);
    std::sort(selected.begin(), selected.end());
  }
  result.docs_used = selected.size();

  auto params = clf_views(clf, config.finetune);
  Adam adam(total_size(params), train_config.learning_rate, train_config.beta1,
            train_config.beta2, train_config.epsilon);
  std::vector<double> flat_grad(total_size(params));

  const std::size_t bs = static_cast<std::size_t>(train_config.batch_size);
  result.batches_per_epoch = static_cast<int>((selected.size() + bs - 1) / bs);

  for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
    if (train_config.shuffle) {
      Rng rng(derive_seed(train_config.seed, "shuffle.epoch." + std::to_string(epoch)));
      rng.shuffle(selected);
    }
    double epoch_loss = 0.0;
    std::size_t epoch_docs = 0;
    for (int batch = 0; batch < result.batches_per_epoch; ++batch) {
      const std::size_t begin = static_cast<std::size_t>(batch) * bs;
      const std::size_t end = std::min(begin + bs, selected.size());
      const std::size_t n_items = end - begin;

      std::vector<ClfGrads> buffers(n_items);
      std::vector<double> losses(n_items);
      const std::string batch_tag =
          "dropout." + std::to_string(epoch) + "." + std::to_string(batch) + ".";
      parallel_for(static_cast<std::int64_t>(n_items), train_config.n_threads,
                   [&](std::int64_t i) {
                     const std::size_t doc = selected[begin + static_cast<std::size_t>(i)];
                     buffers[i] = ClfGrads::zeros(clf);
                     const std::uint64_t dseed =
                         config.dropout > 0.0
                             ? nonzero_seed(derive_seed(train_config.seed,
                                                        batch_tag + std::to_string(i)))
                             : 0;
                     losses[i] = clf_doc_gradients(clf, doc_ids[doc], golds[doc], buffers[i],
                                                   dseed);
                   });

      std::fill(flat_grad.begin(), flat_grad.end(), 0.0);
      const double scale = 1.0 / static_cast<double>(n_items);
      double batch_loss = 0.0;
      for (std::size_t i = 0; i < n_items; ++i) {
        batch_loss += losses[i];
        auto gviews = clf_grad_views(buffers[i], config.finetune);
        std::size_t off = 0;
        for (const auto& view : gviews) {
          for (std::size_t j = 0; j < view.n; ++j, ++off) flat_grad[off] += scale * view.p[j];
        }
      }
      adam.step(params, flat_grad);
      batch_loss *= scale;
      result.batch_losses.push_back(batch_loss);
      epoch_loss += batch_loss * static_cast<double>(n_items);
      epoch_docs += n_items;
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(epoch_docs));
  }
  return result;
}

EvalReport evaluate_classifier(const TransformerClassifier& clf,
                               const std::vector<RawDocument>& labeled_docs) {
  std::vector<int> preds, golds;
  for (const auto& doc : labeled_docs) {
    if (!doc.label) throw std::invalid_argument("evaluate_classifier: document without label");
    const auto ids = classifier_ids(clf, doc.text);
    if (ids.empty()) continue;
    preds.push_back(clf_forward(clf, ids).label);
    golds.push_back(static_cast<int>(*doc.label));
  }
  if (preds.empty()) {
    throw std::invalid_argument("evaluate_classifier: every document cleaned to nothing");
  }
  return evaluate_predictions(preds, golds, kNumSentiments);
}

namespace {
constexpr char kClfMagic[4] = {'P', 'Q', 'C', 'F'};
constexpr std::uint32_t kClfVersion = 1;
}

void save_clf_checkpoint(const TransformerClassifier& clf, const std::string& path) {
  ByteWriter w;
  w.raw(kClfMagic, 4);
  w.u32(kClfVersion);
  w.u32(static_cast<std::uint32_t>(clf.config.n_blocks));
  w.u32(static_cast<std::uint32_t>(clf.config.n_heads));
  w.u32(static_cast<std::uint32_t>(clf.config.ffn_dim));
  w.u32(static_cast<std::uint32_t>(clf.config.max_seq_len));
  w.f64(clf.config.dropout);
  w.u8(clf.config.finetune ? 1 : 0);
  w.u64(clf.seed);
  w.u32(static_cast<std::uint32_t>(clf.embeddings.dim));
  w.u32(static_cast<std::uint32_t>(clf.vocab.size()));
  for (const auto& tok : clf.vocab.tokens()) w.str16(tok);

  auto views = clf_views(const_cast<TransformerClassifier&>(clf), true);
  w.u64(total_size(views));
  for (const auto& view : views) {
    for (std::size_t i = 0; i < view.n; ++i) w.f64(view.p[i]);
  }
  w.u32(crc32_ieee(w.bytes.data(), w.bytes.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_clf_checkpoint: cannot open " + path);
  out.write(reinterpret_cast<const char*>(w.bytes.data()),
            static_cast<std::streamsize>(w.bytes.size()));
  if (!out) throw std::runtime_error("save_clf_checkpoint: write failed for " + path);
}

TransformerClassifier load_clf_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_clf_checkpoint: cannot open " + path);
  std::vector<std::uint8_t> bytes;
  char chunk[4096];
  while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
    bytes.insert(bytes.end(), chunk, chunk + in.gcount());
  }

  ByteReader r(bytes, "classifier checkpoint");
  const std::uint8_t* magic = r.raw(4);
  if (std::memcmp(magic, kClfMagic, 4) != 0) {
    throw FormatError("classifier checkpoint: bad magic");
  }
  const std::uint32_t version = r.u32();
  if (version != kClfVersion) {
    throw FormatError("classifier checkpoint: unsupported version " + std::to_string(version));
  }
  ClfConfig cfg;
  cfg.n_blocks = static_cast<int>(r.u32());
  cfg.n_heads = static_cast<int>(r.u32());
  cfg.ffn_dim = static_cast<int>(r.u32());
  cfg.max_seq_len = static_cast<int>(r.u32());
  cfg.dropout = r.f64();
  cfg.finetune = r.u8() != 0;
  const std::uint64_t seed = r.u64();
  const std::uint32_t dim = r.u32();
  const std::uint32_t vocab_size = r.u32();
  if (vocab_size < Vocab::kNumReserved) {
    throw FormatError("classifier checkpoint: vocab smaller than the reserved tokens");
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
  if (r.remaining() != 0) throw FormatError("classifier checkpoint: trailing bytes");
  if (crc32_ieee(bytes.data(), payload_end) != stored_crc) {
    throw CorruptionError("classifier checkpoint: CRC mismatch");
  }

  Vocab vocab;
  for (std::size_t i = 0; i < static_cast<std::size_t>(Vocab::kNumReserved); ++i) {
    if (tokens[i] != vocab.token_of(static_cast<int>(i))) {
      throw FormatError("classifier checkpoint: reserved token slot " + std::to_string(i) +
                        " holds '" + tokens[i] + "'");
    }
  }
  for (std::size_t i = Vocab::kNumReserved; i < tokens.size(); ++i) {
    if (vocab.contains(tokens[i])) {
      throw FormatError("classifier checkpoint: duplicate token '" + tokens[i] + "'");
    }
    vocab.add(std::move(tokens[i]));
  }

  TransformerClassifier clf = TransformerClassifier::create(
      EmbeddingMatrix::zeros(vocab_size, dim), std::move(vocab), cfg, seed);
  auto views = clf_views(clf, true);
  if (total_size(views) != n_params) {
    throw FormatError("classifier checkpoint: parameter count does not match the declared shape");
  }
  std::size_t off = 0;
  for (const auto& view : views) {
    for (std::size_t i = 0; i < view.n; ++i, ++off) view.p[i] = params[off];
  }
  return clf;
}

}  // namespace pqlm
