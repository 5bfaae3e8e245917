#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pqlm/langmodel.hpp"

namespace pqlm {

// Grid runner comparing language-model backbones across qubit counts and
// corpora. Report values are seed-deterministic; wall-clock timings land
// in a separate file so the report reruns bit-identically.

struct AblationCorpus {
  std::string name; // used in CSV rows and per-cell file names
  std::vector<std::string> documents;
};

struct AblationConfig {
  std::vector<int> qubit_counts = {4, 6};
  bool include_classical = false; // adds one classical baseline row per corpus
  int n_layers = 2;
  int embed_dim = 64;
  int hidden_dim = 5;
  int epochs = 15;
  int batch_size = 16;
  int max_seq_len = 32;
  double learning_rate = 0.01;
  std::size_t max_vocab = 5000;
  std::uint64_t seed = 0;
  int n_threads = 1;
};

struct AblationRow {
  std::string corpus;
  BackboneKind backbone = BackboneKind::Quantum;
  int n_qubits = 0; // 0 on classical rows
  int n_layers = 0;
  int embed_dim = 0;
  int hidden_dim = 0;
  int epochs = 0;
  std::size_t vocab_size = 0;
  std::size_t state_dim = 0; // 2^qubits, 0 on classical rows
  std::size_t params_backbone = 0;
  std::size_t params_total = 0;
  double final_loss = 0.0; // mean loss of the last epoch
  double perplexity = 0.0; // over the cell's corpus
  std::vector<double> first_epoch_losses;
  double runtime_seconds = 0.0;

  std::string cell_name() const; // e.g. "fixture_quantum_4q"
};

struct AblationReport {
  std::vector<AblationRow> rows;
};

AblationReport run_ablation(const std::vector<AblationCorpus>& corpora,
                            const AblationConfig& config);

// report.csv, timings.csv, and one <cell>_epoch0.csv per row under dir;
// with plot also first_epoch_loss.svg. Returns the written paths.
std::vector<std::string> write_ablation_report(const AblationReport& report,
                                               const std::string& dir, bool plot = false);

}  // namespace pqlm
