#include "pqlm/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pqlm/ablate.hpp"
#include "pqlm/embedfile.hpp"
#include "pqlm/langmodel.hpp"
#include "pqlm/manifest.hpp"
#include "pqlm/metrics.hpp"
#include "pqlm/service.hpp"
#include "pqlm/statevector.hpp"
#include "pqlm/transformer.hpp"

namespace pqlm::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t env_seed_default() {
  const char* s = std::getenv("PQLM_SEED");
  if (s == nullptr || *s == '\0') return 0;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (errno != 0 || end == s || *end != '\0') {
    std::fprintf(stderr, "warning: ignoring non-numeric PQLM_SEED '%s'\n", s);
    return 0;
  }
  return v;
}

struct Options {
  std::string config_path;

  struct {
    std::string input, out_corpus, out_vocab;
    bool labeled = false;
    std::size_t max_vocab = 5000;
  } pre;

  struct {
    std::string backend = "quantum", corpus, out, loss_csv;
    int qubits = 4, layers = 2, embed_dim = 64, hidden = 5;
    int epochs = 15, batch_size = 16, max_seq_len = 32, threads = 1, loss_smooth = 1;
    double lr = 0.01, holdout = 0.0, eval_budget = 2e8;
    std::uint64_t seed = 0;
    bool shuffle = false;
    std::size_t max_vocab = 5000;
  } tlm;

  struct {
    std::string checkpoint, out;
  } exp;

  struct {
    std::string embeddings, train, out;
    int blocks = 4, heads = 4, ffn = 128, epochs = 10, batch_size = 16;
    int max_seq_len = 32, threads = 1;
    double lr = 1e-3, dropout = 0.1, subset = 1.0;
    std::uint64_t seed = 0;
    bool finetune = false, shuffle = false;
  } tcl;

  struct {
    std::string classifier, test, out;
  } ev;

  struct {
    std::string work_dir = "qlm-jobs";
    int port = 8080, threads = 1;
    std::uint64_t seed = 0;
  } srv;

  struct {
    std::string server, job, out;
  } fetch;

  struct {
    std::string server, corpus, backend = "quantum";
    int qubits = 4, layers = 2, embed_dim = 64, hidden = 5;
    int epochs = 15, batch_size = 16, max_seq_len = 32;
    double lr = 0.01;
    std::size_t max_vocab = 5000;
  } sub;

  struct {
    std::string server, job;
  } stat;

  struct {
    std::vector<std::string> corpora;
    std::string qubits = "4,6", out_dir = "ablation";
    bool classical = false, plot = false;
    int layers = 2, embed_dim = 64, hidden = 5, epochs = 15, batch_size = 16;
    int max_seq_len = 32, threads = 1;
    double lr = 0.01;
    std::size_t max_vocab = 5000;
    std::uint64_t seed = 0;
  } abl;
};

std::unique_ptr<CLI::App> build_app(Options& o) {
  const std::uint64_t seed0 = env_seed_default();
  o.tlm.seed = o.tcl.seed = o.srv.seed = o.abl.seed = seed0;

  auto app = std::make_unique<CLI::App>(
      "pqlm: quantum-gated LSTM language models, portable embeddings, and downstream "
      "sentiment analysis");
  app->require_subcommand(1);
  app->add_option("--config", o.config_path,
                  "JSON config file; flags given on the command line take precedence");

  auto* pre = app->add_subcommand("preprocess", "Clean raw texts and build a vocabulary");
  pre->add_option("--input", o.pre.input, "raw corpus (one document per line), or a labeled TSV "
                                          "with --labeled")->required();
  pre->add_flag("--labeled", o.pre.labeled, "input is label<TAB>text per line");
  pre->add_option("--out-corpus", o.pre.out_corpus, "cleaned corpus output path")->required();
  pre->add_option("--out-vocab", o.pre.out_vocab, "vocabulary output path");
  pre->add_option("--max-vocab", o.pre.max_vocab, "vocabulary size cap");

  auto* tlm = app->add_subcommand("train-lm", "Train a next-token language model");
  tlm->add_option("--backend", o.tlm.backend, "quantum | classical")
      ->check(CLI::IsMember({"quantum", "classical"}));
  tlm->add_option("--corpus", o.tlm.corpus, "raw corpus, one document per line")->required();
  tlm->add_option("--out", o.tlm.out, "model checkpoint output path")->required();
  tlm->add_option("--qubits", o.tlm.qubits, "qubits per gate circuit (quantum backend)");
  tlm->add_option("--layers", o.tlm.layers, "trainable circuit layers");
  tlm->add_option("--embed-dim", o.tlm.embed_dim, "embedding dimension");
  tlm->add_option("--hidden", o.tlm.hidden, "hidden size (classical backend)");
  tlm->add_option("--epochs", o.tlm.epochs, "training epochs");
  tlm->add_option("--batch-size", o.tlm.batch_size, "documents per optimizer step");
  tlm->add_option("--max-seq-len", o.tlm.max_seq_len, "sequence window incl. markers");
  tlm->add_option("--lr", o.tlm.lr, "Adam learning rate");
  tlm->add_option("--seed", o.tlm.seed, "RNG seed (default from PQLM_SEED)");
  tlm->add_option("--threads", o.tlm.threads, "worker threads for batch gradients");
  tlm->add_flag("--shuffle", o.tlm.shuffle, "reshuffle documents every epoch");
  tlm->add_option("--holdout", o.tlm.holdout, "fraction of tail documents held out");
  tlm->add_option("--max-vocab", o.tlm.max_vocab, "vocabulary size cap");
  tlm->add_option("--loss-csv", o.tlm.loss_csv, "per-batch loss history output path");
  tlm->add_option("--loss-smooth", o.tlm.loss_smooth, "moving-average window for the loss CSV");
  tlm->add_option("--eval-budget", o.tlm.eval_budget,
                  "warn when estimated circuit evaluations exceed this");

  auto* exp = app->add_subcommand("export-embeddings",
                                  "Write the embedding matrix of a trained model");
  exp->add_option("--checkpoint", o.exp.checkpoint, "language model checkpoint")->required();
  exp->add_option("--out", o.exp.out, "embedding file output path")->required();

  auto* tcl = app->add_subcommand("train-classifier",
                                  "Train the sentiment classifier on imported embeddings");
  tcl->add_option("--embeddings", o.tcl.embeddings, "embedding file (.pqlm)")->required();
  tcl->add_option("--train", o.tcl.train, "labeled TSV training set")->required();
  tcl->add_option("--out", o.tcl.out, "classifier checkpoint output path")->required();
  tcl->add_option("--blocks", o.tcl.blocks, "encoder blocks");
  tcl->add_option("--heads", o.tcl.heads, "attention heads");
  tcl->add_option("--ffn", o.tcl.ffn, "feed-forward width");
  tcl->add_option("--epochs", o.tcl.epochs, "training epochs");
  tcl->add_option("--batch-size", o.tcl.batch_size, "documents per optimizer step");
  tcl->add_option("--max-seq-len", o.tcl.max_seq_len, "token window");
  tcl->add_option("--lr", o.tcl.lr, "Adam learning rate");
  tcl->add_option("--dropout", o.tcl.dropout, "dropout probability");
  tcl->add_option("--subset-fraction", o.tcl.subset, "train on a seeded subset of the data");
  tcl->add_option("--seed", o.tcl.seed, "RNG seed (default from PQLM_SEED)");
  tcl->add_option("--threads", o.tcl.threads, "worker threads for batch gradients");
  tcl->add_flag("--finetune", o.tcl.finetune, "update the imported embeddings too");
  tcl->add_flag("--shuffle", o.tcl.shuffle, "reshuffle documents every epoch");

  auto* ev = app->add_subcommand("evaluate", "Score a classifier on a labeled TSV");
  ev->add_option("--classifier", o.ev.classifier, "classifier checkpoint")->required();
  ev->add_option("--test", o.ev.test, "labeled TSV evaluation set")->required();
  ev->add_option("--out", o.ev.out, "metrics JSON output path");

  auto* srv = app->add_subcommand("serve", "Run the embedding training server");
  srv->add_option("--port", o.srv.port, "listen port (0 picks an ephemeral port)");
  srv->add_option("--work-dir", o.srv.work_dir, "job persistence directory");
  srv->add_option("--seed", o.srv.seed, "server secret seed (default from PQLM_SEED)");
  srv->add_option("--threads", o.srv.threads, "worker threads for training jobs");

  auto* fetch = app->add_subcommand("fetch-embeddings",
                                    "Download the embeddings of a converged job");
  fetch->add_option("--server", o.fetch.server, "host:port")->required();
  fetch->add_option("--job", o.fetch.job, "job id")->required();
  fetch->add_option("--out", o.fetch.out, "embedding file output path")->required();

  auto* sub = app->add_subcommand("submit-job", "Submit a training job to a server");
  sub->add_option("--server", o.sub.server, "host:port")->required();
  sub->add_option("--corpus", o.sub.corpus, "raw corpus, one document per line")->required();
  sub->add_option("--backend", o.sub.backend, "quantum | classical")
      ->check(CLI::IsMember({"quantum", "classical"}));
  sub->add_option("--qubits", o.sub.qubits, "qubits per gate circuit");
  sub->add_option("--layers", o.sub.layers, "trainable circuit layers");
  sub->add_option("--embed-dim", o.sub.embed_dim, "embedding dimension");
  sub->add_option("--hidden", o.sub.hidden, "hidden size (classical backend)");
  sub->add_option("--epochs", o.sub.epochs, "training epochs");
  sub->add_option("--batch-size", o.sub.batch_size, "documents per optimizer step");
  sub->add_option("--max-seq-len", o.sub.max_seq_len, "sequence window incl. markers");
  sub->add_option("--lr", o.sub.lr, "Adam learning rate");
  sub->add_option("--max-vocab", o.sub.max_vocab, "vocabulary size cap");

  auto* stat = app->add_subcommand("job-status", "Print a job's status record");
  stat->add_option("--server", o.stat.server, "host:port")->required();
  stat->add_option("--job", o.stat.job, "job id")->required();

  auto* abl = app->add_subcommand("ablate", "Run the backbone/qubit/corpus ablation grid");
  abl->add_option("--corpus", o.abl.corpora,
                  "name=path of a raw corpus; repeat for several corpora")
      ->required();
  abl->add_option("--qubits", o.abl.qubits, "comma-separated qubit counts");
  abl->add_flag("--classical", o.abl.classical, "include the classical baseline");
  abl->add_option("--out-dir", o.abl.out_dir, "report directory");
  abl->add_flag("--plot", o.abl.plot, "emit an SVG of first-epoch losses");
  abl->add_option("--layers", o.abl.layers, "trainable circuit layers");
  abl->add_option("--embed-dim", o.abl.embed_dim, "embedding dimension");
  abl->add_option("--hidden", o.abl.hidden, "hidden size of the classical baseline");
  abl->add_option("--epochs", o.abl.epochs, "training epochs per cell");
  abl->add_option("--batch-size", o.abl.batch_size, "documents per optimizer step");
  abl->add_option("--max-seq-len", o.abl.max_seq_len, "sequence window incl. markers");
  abl->add_option("--lr", o.abl.lr, "Adam learning rate");
  abl->add_option("--max-vocab", o.abl.max_vocab, "vocabulary size cap");
  abl->add_option("--seed", o.abl.seed, "RNG seed shared by every cell");
  abl->add_option("--threads", o.abl.threads, "worker threads for batch gradients");

  return app;
}

class StopWatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

RunManifest start_manifest(std::string subcommand, ordered_json config) {
  RunManifest m;
  m.subcommand = std::move(subcommand);
  m.config = std::move(config);
  return m;
}

void add_input(RunManifest& m, const std::string& path) {
  m.inputs.emplace_back(path, sha256_hex_file(path));
}

void add_output(RunManifest& m, const std::string& path) {
  m.outputs.emplace_back(path, sha256_hex_file(path));
}

void finish_manifest(RunManifest& m, const StopWatch& watch, const std::string& beside) {
  m.duration_seconds = watch.seconds();
  write_manifest(m, beside + ".manifest.json");
}

BackboneKind parse_backend(const std::string& s) {
  if (s == "quantum") return BackboneKind::Quantum;
  if (s == "classical") return BackboneKind::Classical;
  throw std::invalid_argument("backend must be 'quantum' or 'classical'");
}

std::pair<std::string, int> parse_server(const std::string& s) {
  const auto pos = s.rfind(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 == s.size()) {
    throw std::invalid_argument("--server expects host:port, got '" + s + "'");
  }
  const int port = std::stoi(s.substr(pos + 1));
  if (port < 1 || port > 65535) {
    throw std::invalid_argument("--server port out of range in '" + s + "'");
  }
  return {s.substr(0, pos), port};
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string piece =
        s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!piece.empty()) out.push_back(std::stoi(piece));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int run_preprocess(const Options& o) {
  StopWatch watch;
  std::vector<std::string> texts;
  if (o.pre.labeled) {
    for (const auto& doc : load_labeled_tsv(o.pre.input)) texts.push_back(doc.text);
  } else {
    texts = load_corpus(o.pre.input);
  }
  std::vector<std::string> cleaned;
  for (const auto& t : texts) {
    std::string c = clean(t);
    if (!c.empty()) cleaned.push_back(std::move(c));
  }
  if (cleaned.empty()) throw std::runtime_error("preprocess: no document survives cleaning");
  save_corpus(o.pre.out_corpus, cleaned);

  ordered_json cfg{{"input", o.pre.input},
                   {"labeled", o.pre.labeled},
                   {"out_corpus", o.pre.out_corpus},
                   {"out_vocab", o.pre.out_vocab},
                   {"max_vocab", o.pre.max_vocab}};
  RunManifest m = start_manifest("preprocess", cfg);
  add_input(m, o.pre.input);
  add_output(m, o.pre.out_corpus);

  std::printf("documents: %zu in, %zu kept\n", texts.size(), cleaned.size());
  if (!o.pre.out_vocab.empty()) {
    const auto tokens = prepare_corpus(cleaned);
    const Vocab vocab = build_vocab(tokens, o.pre.max_vocab);
    save_vocab(o.pre.out_vocab, vocab);
    add_output(m, o.pre.out_vocab);
    std::printf("vocabulary: %zu tokens\n", vocab.size());
  }
  finish_manifest(m, watch, o.pre.out_corpus);
  return 0;
}

int run_train_lm(const Options& o) {
  StopWatch watch;
  const auto documents = load_corpus(o.tlm.corpus);
  const auto tokens = prepare_corpus(documents);
  if (tokens.empty()) throw std::runtime_error("train-lm: no document survives cleaning");
  const Vocab vocab = build_vocab(tokens, o.tlm.max_vocab);

  LmConfig model_config;
  model_config.backbone = parse_backend(o.tlm.backend);
  model_config.embed_dim = o.tlm.embed_dim;
  model_config.n_qubits = o.tlm.qubits;
  model_config.n_layers = o.tlm.layers;
  model_config.hidden_dim = o.tlm.hidden;

  TrainConfig train_config;
  train_config.epochs = o.tlm.epochs;
  train_config.batch_size = o.tlm.batch_size;
  train_config.max_seq_len = o.tlm.max_seq_len;
  train_config.learning_rate = o.tlm.lr;
  train_config.seed = o.tlm.seed;
  train_config.n_threads = o.tlm.threads;
  train_config.shuffle = o.tlm.shuffle;
  train_config.holdout_fraction = o.tlm.holdout;

  if (model_config.backbone == BackboneKind::Quantum) {
    std::size_t steps = 0;
    for (const auto& seq : corpus_to_sequences(vocab, tokens, o.tlm.max_seq_len)) {
      if (seq.size() >= 2) steps += seq.size() - 1;
    }
    const double angles = 2.0 * o.tlm.qubits + 3.0 * o.tlm.layers * o.tlm.qubits;
    const double evals =
        static_cast<double>(o.tlm.epochs) * static_cast<double>(steps) * 4.0 * (1.0 + 2.0 * angles);
    if (evals > o.tlm.eval_budget) {
      std::fprintf(stderr,
                   "warning: estimated %.3g circuit evaluations exceed the budget of %.3g; "
                   "expect a long run\n",
                   evals, o.tlm.eval_budget);
    }
  }

  TrainResult result = train_lm(tokens, vocab, model_config, train_config);
  save_lm_checkpoint(result.model, o.tlm.out);
  if (!o.tlm.loss_csv.empty()) write_loss_csv(o.tlm.loss_csv, result, o.tlm.loss_smooth);

  const ParamCount backbone_params = std::visit(
      [](const auto& cell) { return param_count(cell); }, result.model.backbone);
  double ppl;
  const char* ppl_scope;
  if (result.holdout_docs > 0) {
    const std::vector<std::vector<std::string>> tail(tokens.begin() +
                                                         static_cast<std::ptrdiff_t>(result.train_docs),
                                                     tokens.end());
    ppl = perplexity(result.model, tail, o.tlm.max_seq_len);
    ppl_scope = "holdout";
  } else {
    ppl = perplexity(result.model, tokens, o.tlm.max_seq_len);
    ppl_scope = "train";
  }

  std::printf("backend: %s\n", backbone_name(model_config.backbone));
  std::printf("vocabulary: %zu tokens\n", vocab.size());
  std::printf("backbone parameters: %zu\n", backbone_params.total);
  std::printf("final epoch loss: %.6f\n", result.epoch_losses.back());
  std::printf("%s perplexity: %.6f\n", ppl_scope, ppl);

  ordered_json cfg{{"backend", o.tlm.backend},
                   {"corpus", o.tlm.corpus},
                   {"out", o.tlm.out},
                   {"qubits", o.tlm.qubits},
                   {"layers", o.tlm.layers},
                   {"embed_dim", o.tlm.embed_dim},
                   {"hidden", o.tlm.hidden},
                   {"epochs", o.tlm.epochs},
                   {"batch_size", o.tlm.batch_size},
                   {"max_seq_len", o.tlm.max_seq_len},
                   {"lr", o.tlm.lr},
                   {"seed", o.tlm.seed},
                   {"threads", o.tlm.threads},
                   {"shuffle", o.tlm.shuffle},
                   {"holdout", o.tlm.holdout},
                   {"max_vocab", o.tlm.max_vocab},
                   {"loss_csv", o.tlm.loss_csv},
                   {"loss_smooth", o.tlm.loss_smooth}};
  RunManifest m = start_manifest("train-lm", cfg);
  add_input(m, o.tlm.corpus);
  add_output(m, o.tlm.out);
  if (!o.tlm.loss_csv.empty()) add_output(m, o.tlm.loss_csv);
  finish_manifest(m, watch, o.tlm.out);
  return 0;
}

int run_export_embeddings(const Options& o) {
  StopWatch watch;
  const LmModel model = load_lm_checkpoint(o.exp.checkpoint);
  const auto [matrix, vocab] = extract_embeddings(model);
  write_embeddings_file(matrix, vocab, o.exp.out);
  std::printf("embeddings: %zu x %zu\n", matrix.rows, matrix.dim);

  RunManifest m = start_manifest(
      "export-embeddings", ordered_json{{"checkpoint", o.exp.checkpoint}, {"out", o.exp.out}});
  add_input(m, o.exp.checkpoint);
  add_output(m, o.exp.out);
  finish_manifest(m, watch, o.exp.out);
  return 0;
}

int run_train_classifier(const Options& o) {
  StopWatch watch;
  auto [matrix, vocab] = read_embeddings_file(o.tcl.embeddings);
  const auto docs = load_labeled_tsv(o.tcl.train);

  ClfConfig config;
  config.n_blocks = o.tcl.blocks;
  config.n_heads = o.tcl.heads;
  config.ffn_dim = o.tcl.ffn;
  config.max_seq_len = o.tcl.max_seq_len;
  config.dropout = o.tcl.dropout;
  config.finetune = o.tcl.finetune;

  ClfTrainConfig train_config;
  train_config.epochs = o.tcl.epochs;
  train_config.batch_size = o.tcl.batch_size;
  train_config.learning_rate = o.tcl.lr;
  train_config.seed = o.tcl.seed;
  train_config.n_threads = o.tcl.threads;
  train_config.shuffle = o.tcl.shuffle;
  train_config.subset_fraction = o.tcl.subset;

  ClfTrainResult result =
      train_classifier(std::move(matrix), std::move(vocab), docs, config, train_config);
  save_clf_checkpoint(result.classifier, o.tcl.out);

  std::printf("documents: %zu used, %zu dropped\n", result.docs_used, result.docs_dropped);
  std::printf("final epoch loss: %.6f\n", result.epoch_losses.back());
  std::printf("embeddings %s\n", o.tcl.finetune ? "finetuned" : "frozen");

  ordered_json cfg{{"embeddings", o.tcl.embeddings},
                   {"train", o.tcl.train},
                   {"out", o.tcl.out},
                   {"blocks", o.tcl.blocks},
                   {"heads", o.tcl.heads},
                   {"ffn", o.tcl.ffn},
                   {"epochs", o.tcl.epochs},
                   {"batch_size", o.tcl.batch_size},
                   {"max_seq_len", o.tcl.max_seq_len},
                   {"lr", o.tcl.lr},
                   {"dropout", o.tcl.dropout},
                   {"subset_fraction", o.tcl.subset},
                   {"seed", o.tcl.seed},
                   {"threads", o.tcl.threads},
                   {"finetune", o.tcl.finetune},
                   {"shuffle", o.tcl.shuffle}};
  RunManifest m = start_manifest("train-classifier", cfg);
  add_input(m, o.tcl.embeddings);
  add_input(m, o.tcl.train);
  add_output(m, o.tcl.out);
  finish_manifest(m, watch, o.tcl.out);
  return 0;
}

int run_evaluate(const Options& o) {
  StopWatch watch;
  const TransformerClassifier clf = load_clf_checkpoint(o.ev.classifier);
  const auto docs = load_labeled_tsv(o.ev.test);
  const EvalReport report = evaluate_classifier(clf, docs);

  std::printf("documents: %zu\n", report.n_docs);
  std::printf("accuracy: %.6f\n", report.accuracy);
  std::printf("weighted F1: %.6f\n", report.weighted_f1);
  for (int c = 0; c < kNumSentiments; ++c) {
    const auto& pc = report.per_class[static_cast<std::size_t>(c)];
    std::printf("  %-10s precision %.4f recall %.4f f1 %.4f support %zu\n",
                sentiment_name(static_cast<Sentiment>(c)), pc.precision, pc.recall, pc.f1,
                pc.support);
  }
  if (!o.ev.out.empty()) {
    write_metrics_json(o.ev.out, report);
    RunManifest m = start_manifest(
        "evaluate", ordered_json{{"classifier", o.ev.classifier}, {"test", o.ev.test},
                                 {"out", o.ev.out}});
    add_input(m, o.ev.classifier);
    add_input(m, o.ev.test);
    add_output(m, o.ev.out);
    finish_manifest(m, watch, o.ev.out);
  }
  return 0;
}

std::atomic<bool> g_interrupted{false};

int run_serve(const Options& o) {
  StopWatch watch;
  QlmServer server(o.srv.port, o.srv.work_dir, o.srv.seed, o.srv.threads);
  server.start();
  std::printf("qlm-server listening on port %d, jobs under %s\n", server.port(),
              o.srv.work_dir.c_str());
  std::fflush(stdout);

  RunManifest m = start_manifest("serve", ordered_json{{"port", server.port()},
                                                       {"work_dir", o.srv.work_dir},
                                                       {"threads", o.srv.threads}});
  finish_manifest(m, watch, o.srv.work_dir + "/server");

  std::signal(SIGINT, [](int) { g_interrupted.store(true); });
  std::signal(SIGTERM, [](int) { g_interrupted.store(true); });
  while (!g_interrupted.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  std::printf("shutting down\n");
  server.stop();
  return 0;
}

int run_fetch_embeddings(const Options& o) {
  StopWatch watch;
  const auto [host, port] = parse_server(o.fetch.server);
  QlmClient client(host, port);
  const auto bytes = client.fetch_embeddings(o.fetch.job);
  const auto [matrix, vocab] = embeddings_from_bytes(bytes); // integrity check before writing
  std::ofstream out(o.fetch.out, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("fetch-embeddings: cannot open " + o.fetch.out);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("fetch-embeddings: write failed for " + o.fetch.out);
  std::printf("embeddings: %zu x %zu (%zu bytes)\n", matrix.rows, matrix.dim, bytes.size());

  RunManifest m = start_manifest(
      "fetch-embeddings", ordered_json{{"server", o.fetch.server}, {"job", o.fetch.job},
                                       {"out", o.fetch.out}});
  add_output(m, o.fetch.out);
  finish_manifest(m, watch, o.fetch.out);
  return 0;
}

int run_submit_job(const Options& o) {
  const auto [host, port] = parse_server(o.sub.server);
  const auto documents = load_corpus(o.sub.corpus);

  JobConfig cfg;
  cfg.backbone = parse_backend(o.sub.backend);
  cfg.embed_dim = o.sub.embed_dim;
  cfg.n_qubits = o.sub.qubits;
  cfg.n_layers = o.sub.layers;
  cfg.hidden_dim = o.sub.hidden;
  cfg.epochs = o.sub.epochs;
  cfg.batch_size = o.sub.batch_size;
  cfg.max_seq_len = o.sub.max_seq_len;
  cfg.learning_rate = o.sub.lr;
  cfg.max_vocab = o.sub.max_vocab;

  QlmClient client(host, port);
  const std::string job_id = client.submit_job(documents, cfg);
  std::printf("%s\n", job_id.c_str());
  return 0;
}

int run_job_status(const Options& o) {
  const auto [host, port] = parse_server(o.stat.server);
  QlmClient client(host, port);
  std::printf("%s\n", client.job_status(o.stat.job).dump(2).c_str());
  return 0;
}

int run_ablate(const Options& o) {
  StopWatch watch;
  std::vector<AblationCorpus> corpora;
  std::vector<std::string> input_paths;
  for (const auto& spec : o.abl.corpora) {
    const auto eq = spec.find('=');
    std::string name, path;
    if (eq == std::string::npos) {
      path = spec;
      name = std::filesystem::path(spec).stem().string();
    } else {
      name = spec.substr(0, eq);
      path = spec.substr(eq + 1);
    }
    if (name.empty() || path.empty()) {
      throw std::invalid_argument("ablate: corpus spec '" + spec + "' is not name=path");
    }
    corpora.push_back({name, load_corpus(path)});
    input_paths.push_back(path);
  }

  AblationConfig config;
  config.qubit_counts = parse_int_list(o.abl.qubits);
  config.include_classical = o.abl.classical;
  config.n_layers = o.abl.layers;
  config.embed_dim = o.abl.embed_dim;
  config.hidden_dim = o.abl.hidden;
  config.epochs = o.abl.epochs;
  config.batch_size = o.abl.batch_size;
  config.max_seq_len = o.abl.max_seq_len;
  config.learning_rate = o.abl.lr;
  config.max_vocab = o.abl.max_vocab;
  config.seed = o.abl.seed;
  config.n_threads = o.abl.threads;

  const AblationReport report = run_ablation(corpora, config);
  const auto written = write_ablation_report(report, o.abl.out_dir, o.abl.plot);

  for (const auto& row : report.rows) {
    std::printf("%-28s loss %.4f  perplexity %.4f  params %zu  %.1fs\n", row.cell_name().c_str(),
                row.final_loss, row.perplexity, row.params_total, row.runtime_seconds);
  }

  ordered_json cfg{{"corpora", o.abl.corpora},
                   {"qubits", o.abl.qubits},
                   {"classical", o.abl.classical},
                   {"out_dir", o.abl.out_dir},
                   {"plot", o.abl.plot},
                   {"layers", o.abl.layers},
                   {"embed_dim", o.abl.embed_dim},
                   {"hidden", o.abl.hidden},
                   {"epochs", o.abl.epochs},
                   {"batch_size", o.abl.batch_size},
                   {"max_seq_len", o.abl.max_seq_len},
                   {"lr", o.abl.lr},
                   {"max_vocab", o.abl.max_vocab},
                   {"seed", o.abl.seed},
                   {"threads", o.abl.threads}};
  RunManifest m = start_manifest("ablate", cfg);
  for (const auto& p : input_paths) add_input(m, p);
  for (const auto& p : written) add_output(m, p);
  finish_manifest(m, watch, (std::filesystem::path(o.abl.out_dir) / "report.csv").string());
  return 0;
}

int dispatch(const CLI::App& app, const Options& o) {
  const auto got = [&](const char* name) { return app.get_subcommand(name)->parsed(); };
  if (got("preprocess")) return run_preprocess(o);
  if (got("train-lm")) return run_train_lm(o);
  if (got("export-embeddings")) return run_export_embeddings(o);
  if (got("train-classifier")) return run_train_classifier(o);
  if (got("evaluate")) return run_evaluate(o);
  if (got("serve")) return run_serve(o);
  if (got("fetch-embeddings")) return run_fetch_embeddings(o);
  if (got("submit-job")) return run_submit_job(o);
  if (got("job-status")) return run_job_status(o);
  if (got("ablate")) return run_ablate(o);
  std::fprintf(stderr, "error: no subcommand selected\n");
  return 2;
}

// Config-file values become synthetic tokens inserted right after the
// subcommand name, but only for options the command line left untouched,
// so flags always win.
std::vector<std::string> config_tokens(const CLI::App& parsed_app, const CLI::App& sub,
                                       const json& section) {
  std::vector<std::string> tokens;
  (void)parsed_app;
  for (auto it = section.begin(); it != section.end(); ++it) {
    const std::string flag = "--" + it.key();
    const CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option(flag);
    } catch (const CLI::OptionNotFound&) {
      throw std::invalid_argument("config: unknown key '" + it.key() + "' for subcommand '" +
                                  sub.get_name() + "'");
    }
    if (opt->count() > 0) continue; // the command line overrides
    const json& v = it.value();
    if (v.is_boolean()) {
      if (v.get<bool>()) tokens.push_back(flag);
    } else if (v.is_array()) {
      for (const auto& elem : v) {
        tokens.push_back(flag);
        tokens.push_back(elem.is_string() ? elem.get<std::string>() : elem.dump());
      }
    } else {
      tokens.push_back(flag);
      tokens.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
  }
  return tokens;
}

int run_impl(const std::vector<std::string>& argv_in) {
  // Pass 1: plain parse; discovers the subcommand and --config.
  Options opts;
  auto app = build_app(opts);
  std::vector<const char*> argv1;
  argv1.push_back("pqlm");
  for (const auto& a : argv_in) argv1.push_back(a.c_str());
  try {
    app->parse(static_cast<int>(argv1.size()), argv1.data());
  } catch (const CLI::Success& e) {
    return app->exit(e); // --help and friends
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (argv_in.empty()) std::fputs(app->help().c_str(), stderr);
    else std::fputs("Run with --help for usage.\n", stderr);
    return 2;
  }

  if (opts.config_path.empty()) return dispatch(*app, opts);

  // Pass 2: rebuild the command line with config-derived tokens spliced in
  // after the subcommand, then reparse from scratch.
  std::ifstream in(opts.config_path);
  if (!in) {
    std::fprintf(stderr, "error: cannot open config file %s\n", opts.config_path.c_str());
    return 1;
  }
  json config;
  try {
    config = json::parse(in);
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: config file %s is not valid JSON: %s\n",
                 opts.config_path.c_str(), e.what());
    return 2;
  }
  if (!config.is_object()) {
    std::fprintf(stderr, "error: config file %s must hold a JSON object\n",
                 opts.config_path.c_str());
    return 2;
  }

  const auto parsed_subs = app->get_subcommands();
  if (parsed_subs.size() != 1) {
    std::fprintf(stderr, "error: exactly one subcommand expected\n");
    return 2;
  }
  const CLI::App* sub = parsed_subs.front();
  const std::string sub_name = sub->get_name();

  std::vector<std::string> tokens;
  try {
    for (auto it = config.begin(); it != config.end(); ++it) {
      if (app->get_subcommand_no_throw(it.key()) == nullptr) {
        throw std::invalid_argument("config: '" + it.key() + "' is not a subcommand");
      }
      if (it.key() != sub_name) continue;
      if (!it.value().is_object()) {
        throw std::invalid_argument("config: section '" + it.key() + "' must be an object");
      }
      tokens = config_tokens(*app, *sub, it.value());
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  std::vector<std::string> argv2_storage;
  argv2_storage.push_back("pqlm");
  bool spliced = false;
  for (const auto& a : argv_in) {
    argv2_storage.push_back(a);
    if (!spliced && a == sub_name) {
      argv2_storage.insert(argv2_storage.end(), tokens.begin(), tokens.end());
      spliced = true;
    }
  }

  Options opts2;
  auto app2 = build_app(opts2);
  std::vector<const char*> argv2;
  for (const auto& a : argv2_storage) argv2.push_back(a.c_str());
  try {
    app2->parse(static_cast<int>(argv2.size()), argv2.data());
  } catch (const CLI::Success& e) {
    return app2->exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s (after applying %s)\n", e.what(), opts.config_path.c_str());
    return 2;
  }
  return dispatch(*app2, opts2);
}

}  // namespace

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

int run(const std::vector<std::string>& args) {
  try {
    return run_impl(args);
  } catch (const ServiceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace pqlm::cli
