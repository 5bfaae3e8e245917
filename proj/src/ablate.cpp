#include "pqlm/ablate.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "pqlm/common.hpp"
#include "pqlm/statevector.hpp"
#include "pqlm/svgplot.hpp"

namespace pqlm {

std::string AblationRow::cell_name() const {
  std::string name = corpus + "_" + backbone_name(backbone);
  if (backbone == BackboneKind::Quantum) name += "_" + std::to_string(n_qubits) + "q";
  return name;
}

namespace {

AblationRow run_cell(const AblationCorpus& corpus, const AblationConfig& cfg,
                     BackboneKind backbone, int n_qubits) {
  AblationRow row;
  row.corpus = corpus.name;
  row.backbone = backbone;
  row.n_layers = cfg.n_layers;
  row.embed_dim = cfg.embed_dim;
  row.hidden_dim = cfg.hidden_dim;
  row.epochs = cfg.epochs;
  if (backbone == BackboneKind::Quantum) {
    row.n_qubits = n_qubits;
    row.state_dim = std::size_t{1} << n_qubits;
  }

  LmConfig model_config;
  model_config.backbone = backbone;
  model_config.embed_dim = cfg.embed_dim;
  model_config.n_qubits = n_qubits;
  model_config.n_layers = cfg.n_layers;
  model_config.hidden_dim = cfg.hidden_dim;

  TrainConfig train_config;
  train_config.epochs = cfg.epochs;
  train_config.batch_size = cfg.batch_size;
  train_config.max_seq_len = cfg.max_seq_len;
  train_config.learning_rate = cfg.learning_rate;
  train_config.seed = cfg.seed;
  train_config.n_threads = cfg.n_threads;

  const auto tokens = prepare_corpus(corpus.documents);
  const Vocab vocab = build_vocab(tokens, cfg.max_vocab);
  row.vocab_size = vocab.size();

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result = train_lm(tokens, vocab, model_config, train_config);
  const auto t1 = std::chrono::steady_clock::now();
  row.runtime_seconds = std::chrono::duration<double>(t1 - t0).count();

  const ParamCount pc = std::visit([](const auto& cell) { return param_count(cell); },
                                   result.model.backbone);
  row.params_backbone = pc.total;
  row.params_total = param_count(result.model).total;
  row.final_loss = result.epoch_losses.back();
  row.perplexity = perplexity(result.model, tokens, cfg.max_seq_len);
  const std::size_t first = std::min<std::size_t>(
      static_cast<std::size_t>(result.batches_per_epoch), result.batch_losses.size());
  row.first_epoch_losses.assign(result.batch_losses.begin(),
                                result.batch_losses.begin() + static_cast<std::ptrdiff_t>(first));
  return row;
}

}  // namespace

AblationReport run_ablation(const std::vector<AblationCorpus>& corpora,
                            const AblationConfig& config) {
  if (corpora.empty()) throw std::invalid_argument("run_ablation: no corpora in the grid");
  if (config.qubit_counts.empty() && !config.include_classical) {
    throw std::invalid_argument("run_ablation: grid selects no backend at all");
  }
  for (int q : config.qubit_counts) {
    if (q < 1 || q > kMaxQubits) {
      throw std::invalid_argument("run_ablation: qubit count " + std::to_string(q) +
                                  " outside [1, " + std::to_string(kMaxQubits) + "]");
    }
  }

  AblationReport report;
  for (const auto& corpus : corpora) {
    for (int q : config.qubit_counts) {
      report.rows.push_back(run_cell(corpus, config, BackboneKind::Quantum, q));
    }
    if (config.include_classical) {
      // n_qubits is dead weight on the classical backbone; any legal value works.
      report.rows.push_back(run_cell(corpus, config, BackboneKind::Classical, 4));
    }
  }
  return report;
}

std::vector<std::string> write_ablation_report(const AblationReport& report,
                                               const std::string& dir, bool plot) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;

  const auto open = [](const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_ablation_report: cannot open " + path);
    return out;
  };

  {
    const std::string path = (fs::path(dir) / "report.csv").string();
    auto out = open(path);
    out << "corpus,backend,qubits,layers,embed_dim,hidden_dim,epochs,vocab_size,state_dim,"
           "params_backbone,params_total,final_loss,perplexity\n";
    for (const auto& row : report.rows) {
      out << row.corpus << "," << backbone_name(row.backbone) << "," << row.n_qubits << ","
          << row.n_layers << "," << row.embed_dim << "," << row.hidden_dim << "," << row.epochs
          << "," << row.vocab_size << "," << row.state_dim << "," << row.params_backbone << ","
          << row.params_total << "," << format_g17(row.final_loss) << ","
          << format_g17(row.perplexity) << "\n";
    }
    written.push_back(path);
  }
  {
    const std::string path = (fs::path(dir) / "timings.csv").string();
    auto out = open(path);
    out << "corpus,backend,qubits,runtime_seconds\n";
    for (const auto& row : report.rows) {
      out << row.corpus << "," << backbone_name(row.backbone) << "," << row.n_qubits << ","
          << format_g17(row.runtime_seconds) << "\n";
    }
    written.push_back(path);
  }
  for (const auto& row : report.rows) {
    const std::string path = (fs::path(dir) / (row.cell_name() + "_epoch0.csv")).string();
    auto out = open(path);
    out << "batch,loss\n";
    for (std::size_t b = 0; b < row.first_epoch_losses.size(); ++b) {
      out << b << "," << format_g17(row.first_epoch_losses[b]) << "\n";
    }
    written.push_back(path);
  }
  if (plot) {
    std::vector<PlotSeries> series;
    for (const auto& row : report.rows) {
      series.push_back({row.cell_name(), row.first_epoch_losses});
    }
    const std::string path = (fs::path(dir) / "first_epoch_loss.svg").string();
    write_line_svg(path, "First-epoch training loss", "batch", "loss", series);
    written.push_back(path);
  }
  return written;
}

}  // namespace pqlm
