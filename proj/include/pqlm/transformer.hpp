#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pqlm/embedding.hpp"
#include "pqlm/metrics.hpp"
#include "pqlm/textprep.hpp"

namespace pqlm {

// Encoder classifier over imported embeddings: pre-norm blocks with
// multi-head self-attention and a GELU feed-forward, learned positional
// embeddings, mean pooling over non-pad positions, 4-way softmax head.
struct ClfConfig {
  int n_blocks = 4;
  int n_heads = 4;
  int ffn_dim = 128;
  int max_seq_len = 32;
  double dropout = 0.1;
  bool finetune = false; // embeddings stay frozen unless set
};

struct ClfBlockParams {
  std::vector<double> ln1_g, ln1_b;
  std::vector<double> wq, bq, wk, bk, wv, bv, wo, bo; // weights [d x d]
  std::vector<double> ln2_g, ln2_b;
  std::vector<double> w1, b1; // [ffn x d], [ffn]
  std::vector<double> w2, b2; // [d x ffn], [d]
};

struct TransformerClassifier {
  Vocab vocab;
  ClfConfig config;
  std::uint64_t seed = 0;
  EmbeddingMatrix embeddings;     // imported; row updates only when finetune
  std::vector<double> positional; // [max_seq_len x width]
  std::vector<ClfBlockParams> blocks;
  std::vector<double> lnf_g, lnf_b;
  std::vector<double> w_head; // [4 x width]
  std::vector<double> b_head; // [4]

  int width() const { return static_cast<int>(embeddings.dim); }
  int head_dim() const { return width() / config.n_heads; }

  static TransformerClassifier create(EmbeddingMatrix embeddings, Vocab vocab,
                                      const ClfConfig& config, std::uint64_t seed);
};

struct Prediction {
  std::array<double, kNumSentiments> probabilities{};
  int label = 0; // argmax, lowest index on ties
};

// Forward activations kept for the backward pass; attention holds, per
// block, n_heads stacked [T x T] row-stochastic matrices.
struct ClfTrace {
  std::vector<int> ids;
  std::vector<std::uint8_t> pad; // 1 where ids[t] is <pad>
  std::size_t n_nonpad = 0;
  std::vector<double> drop_input;
  std::vector<double> x0;
  struct Block {
    std::vector<double> x_in, n1, q, k, v, ctx, drop_attn, x_mid, n2, ffn_pre, ffn_act,
        drop_ffn, x_out;
    std::vector<double> attention; // [head][T][T]
  };
  std::vector<Block> blocks;
  std::vector<double> x_final, xf, pooled;
  std::array<double, kNumSentiments> logits{};
  std::array<double, kNumSentiments> probs{};
};

// dropout_seed 0 disables dropout (inference mode); any other value draws
// the masks deterministically from it.
Prediction clf_forward(const TransformerClassifier& clf, const std::vector<int>& ids,
                       std::uint64_t dropout_seed = 0, ClfTrace* trace = nullptr);

struct ClfGrads {
  std::vector<double> embeddings; // filled only when finetune
  std::vector<double> positional;
  std::vector<ClfBlockParams> blocks;
  std::vector<double> lnf_g, lnf_b;
  std::vector<double> w_head, b_head;

  static ClfGrads zeros(const TransformerClassifier& clf);
};

// Cross-entropy of one document; gradients accumulate into grads.
double clf_doc_gradients(const TransformerClassifier& clf, const std::vector<int>& ids,
                         Sentiment gold, ClfGrads& grads, std::uint64_t dropout_seed = 0);

struct ClfTrainConfig {
  int epochs = 10;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  int n_threads = 1;
  bool shuffle = false;
  double subset_fraction = 1.0; // seeded random subset of the labeled docs
};

void validate(const ClfTrainConfig& cfg);

struct ClfTrainResult {
  TransformerClassifier classifier;
  std::vector<double> batch_losses;
  std::vector<double> epoch_losses;
  int batches_per_epoch = 0;
  std::size_t docs_used = 0;
  std::size_t docs_dropped = 0; // cleaned to nothing
};

ClfTrainResult train_classifier(EmbeddingMatrix embeddings, Vocab vocab,
                                const std::vector<RawDocument>& labeled_docs,
                                const ClfConfig& config, const ClfTrainConfig& train_config);

// clean + tokenize + encode, truncated to the classifier's window.
std::vector<int> classifier_ids(const TransformerClassifier& clf, const std::string& text);

EvalReport evaluate_classifier(const TransformerClassifier& clf,
                               const std::vector<RawDocument>& labeled_docs);

void save_clf_checkpoint(const TransformerClassifier& clf, const std::string& path);
TransformerClassifier load_clf_checkpoint(const std::string& path);

}  // namespace pqlm
