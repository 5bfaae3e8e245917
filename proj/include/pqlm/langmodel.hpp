#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pqlm/embedding.hpp"
#include "pqlm/recurrent.hpp"
#include "pqlm/textprep.hpp"

namespace pqlm {

enum class BackboneKind { Quantum, Classical };

const char* backbone_name(BackboneKind k);

// Model shape. For the quantum backbone the hidden width equals n_qubits;
// hidden_dim applies to the classical baseline only.
struct LmConfig {
  BackboneKind backbone = BackboneKind::Quantum;
  int embed_dim = 64;
  int n_qubits = 4;
  int n_layers = 2;
  int hidden_dim = 5;
};

struct TrainConfig {
  int epochs = 15;
  int batch_size = 16;
  int max_seq_len = 32;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  int n_threads = 1;
  // Off by default so repeated epochs visit identical batches; with zero
  // learning rate the loss history is then exactly constant.
  bool shuffle = false;
  // Fraction of documents (taken from the tail, in corpus order) held out
  // of training for perplexity evaluation. 0 = evaluate on everything.
  double holdout_fraction = 0.0;
};

void validate(const TrainConfig& cfg);

struct LmModel {
  Vocab vocab;
  LmConfig config;
  std::uint64_t seed = 0;
  EmbeddingMatrix embeddings;
  std::variant<QLstmCell, ClassicalLstmCell> backbone;
  std::vector<double> w_out; // [vocab_size x hidden_dim]
  std::vector<double> b_out; // [vocab_size]

  int vocab_size() const { return static_cast<int>(vocab.size()); }
  int hidden_dim() const;

  static LmModel create(Vocab vocab, const LmConfig& config, std::uint64_t seed);
};

// Backbone counts plus embedding table and output head (all classical).
ParamCount param_count(const LmModel& model);

// <bos> + ids + <eos>, truncated to max_seq_len. Out-of-vocab tokens become
// <unk> through encode_ids.
std::vector<int> document_to_sequence(const Vocab& vocab, const std::vector<std::string>& doc,
                                      int max_seq_len);
std::vector<std::vector<int>> corpus_to_sequences(const Vocab& vocab,
                                                  const std::vector<std::vector<std::string>>& corpus,
                                                  int max_seq_len);

// Log-probability rows, one per input id: row t = log-softmax over the
// next-token distribution after consuming ids[0..t].
std::vector<double> lm_forward(const LmModel& model, const std::vector<int>& ids);

// Mean of -logprob[t][targets[t]] over non-<pad> positions.
double nll(const std::vector<double>& logprobs, std::size_t vocab_size,
           const std::vector<int>& targets);

double perplexity(const LmModel& model, const std::vector<std::vector<std::string>>& corpus,
                  int max_seq_len = 32);
double perplexity_on_sequences(const LmModel& model, const std::vector<std::vector<int>>& sequences);

struct LmGradients {
  std::vector<double> embeddings;
  std::variant<QLstmGrads, ClassicalLstmGrads> backbone;
  std::vector<double> w_out, b_out;

  static LmGradients zeros(const LmModel& model);
};

struct SequenceLoss {
  double sum_nll = 0.0;
  std::size_t n_targets = 0;
};

// Accumulates the gradient of the summed (not averaged) NLL of seq[1..]
// given seq[..n-2] into grads. Quantum backbone gradients arrive via the
// parameter-shift rule inside the recurrent backward pass.
SequenceLoss lm_sequence_gradients(const LmModel& model, const std::vector<int>& seq,
                                   LmGradients& grads, int n_threads = 1);

struct TrainProgress {
  int epoch = 0; // 0-based
  int batch = 0; // 0-based within the epoch
  double loss = 0.0;
};

// Return false to stop training after the current batch.
using TrainCallback = std::function<bool(const TrainProgress&)>;

struct TrainResult {
  LmModel model;
  std::vector<double> batch_losses; // every batch in order
  std::vector<double> epoch_losses; // token-weighted mean per epoch
  int batches_per_epoch = 0;
  std::size_t train_docs = 0;   // corpus[0..train_docs) was trained on
  std::size_t holdout_docs = 0; // corpus[train_docs..] held out
  bool stopped_early = false;
};

TrainResult train_lm(const std::vector<std::vector<std::string>>& corpus, const Vocab& vocab,
                     const LmConfig& model_config, const TrainConfig& train_config,
                     const TrainCallback& on_batch = nullptr);

std::pair<EmbeddingMatrix, Vocab> extract_embeddings(const LmModel& model);

// Trailing moving average for plotting; window 1 returns the input.
std::vector<double> moving_average(const std::vector<double>& xs, int window);

// CSV rows epoch,batch,loss; smoothing applies to the emitted loss column.
void write_loss_csv(const std::string& path, const TrainResult& result, int smooth_window = 1);

// Versioned model checkpoint with an integrity trailer.
void save_lm_checkpoint(const LmModel& model, const std::string& path);
LmModel load_lm_checkpoint(const std::string& path);
std::vector<std::uint8_t> lm_checkpoint_bytes(const LmModel& model);
LmModel lm_checkpoint_from_bytes(const std::vector<std::uint8_t>& bytes);

}  // namespace pqlm
