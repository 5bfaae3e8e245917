#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqlm/cli.hpp"
#include "pqlm/embedfile.hpp"
#include "pqlm/langmodel.hpp"
#include "test_helpers.hpp"

using nlohmann::json;
using pqlm::cli::run;

namespace {

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  for (const auto& l : lines) out << l << "\n";
}

json read_manifest(const std::string& artifact_path) {
  return json::parse(testutil::slurp_text(artifact_path + ".manifest.json"));
}

// Environment guard: PQLM_SEED leaks across tests otherwise.
struct EnvSeed {
  explicit EnvSeed(const char* value) { setenv("PQLM_SEED", value, 1); }
  ~EnvSeed() { unsetenv("PQLM_SEED"); }
};

std::vector<std::string> train_lm_args(const std::string& corpus, const std::string& out) {
  return {"train-lm", "--backend", "classical", "--corpus", corpus,    "--out",
          out,        "--embed-dim", "4",       "--hidden", "3",       "--epochs",
          "2",        "--batch-size", "4",      "--seed",   "77",      "--max-vocab", "50"};
}

}  // namespace

TEST_CASE("usage errors and help") {
  CHECK(run(std::vector<std::string>{}) == 2);
  CHECK(run({"no-such-command"}) == 2);
  CHECK(run({"train-lm"}) == 2);                      // missing required options
  CHECK(run({"preprocess", "--bogus-flag", "x"}) == 2);
  CHECK(run({"--help"}) == 0);
  CHECK(run({"train-lm", "--help"}) == 0);
}

TEST_CASE("preprocess writes corpus, vocab, and manifest") {
  testutil::TempDir dir;
  const auto raw = dir.file("raw.txt");
  write_lines(raw, {"Check https://x.co NOW", "#Great day", "https://nothing.left"});
  const auto out_corpus = dir.file("clean.txt");
  const auto out_vocab = dir.file("vocab.txt");

  CHECK(run({"preprocess", "--input", raw, "--out-corpus", out_corpus, "--out-vocab", out_vocab,
             "--max-vocab", "50"}) == 0);

  const auto docs = pqlm::load_corpus(out_corpus);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0] == "Check NOW");
  CHECK(docs[1] == "Great day");

  const auto vocab = pqlm::load_vocab(out_vocab);
  CHECK(vocab.size() == 8);  // 4 reserved + {check, day, great, now}
  CHECK(vocab.contains("great"));

  const auto m = read_manifest(out_corpus);
  CHECK(m.at("subcommand") == "preprocess");
  REQUIRE(m.at("inputs").size() == 1);
  REQUIRE(m.at("inputs").contains(raw));
  CHECK(m.at("inputs").at(raw).get<std::string>().size() == 64);
  CHECK(m.at("outputs").size() == 2);
  CHECK(m.at("duration_seconds").is_number());
}

TEST_CASE("missing input file fails with exit 1") {
  testutil::TempDir dir;
  CHECK(run({"preprocess", "--input", dir.file("absent.txt"), "--out-corpus",
             dir.file("out.txt")}) == 1);
}

TEST_CASE("train-lm runs are reproducible byte for byte") {
  testutil::TempDir dir;
  const auto corpus = dir.file("corpus.txt");
  write_lines(corpus, testutil::make_lm_corpus(10));

  const auto ck_a = dir.file("a.pqck");
  const auto ck_b = dir.file("b.pqck");
  auto args_a = train_lm_args(corpus, ck_a);
  args_a.push_back("--loss-csv");
  args_a.push_back(dir.file("a.csv"));
  auto args_b = train_lm_args(corpus, ck_b);
  args_b.push_back("--loss-csv");
  args_b.push_back(dir.file("b.csv"));

  REQUIRE(run(args_a) == 0);
  REQUIRE(run(args_b) == 0);

  CHECK(testutil::slurp(ck_a) == testutil::slurp(ck_b));
  CHECK(testutil::slurp_text(dir.file("a.csv")) == testutil::slurp_text(dir.file("b.csv")));
  CHECK(testutil::slurp_text(dir.file("a.csv")).substr(0, 17) == "epoch,batch,loss\n");

  const auto m = read_manifest(ck_a);
  CHECK(m.at("config").at("seed") == 77);
  CHECK(m.at("config").at("epochs") == 2);
}

TEST_CASE("export and evaluate round trip through the CLI") {
  testutil::TempDir dir;
  const auto docs = testutil::make_sa_corpus(24);
  const auto corpus_path = dir.file("corpus.txt");
  write_lines(corpus_path, testutil::texts_of(docs));
  const auto tsv_path = dir.file("train.tsv");
  pqlm::save_labeled_tsv(tsv_path, docs);

  const auto ck = dir.file("lm.pqck");
  REQUIRE(run(train_lm_args(corpus_path, ck)) == 0);

  const auto emb_path = dir.file("emb.pqlm");
  REQUIRE(run({"export-embeddings", "--checkpoint", ck, "--out", emb_path}) == 0);
  CHECK_NOTHROW(pqlm::read_embeddings_file(emb_path));
  CHECK(read_manifest(emb_path).at("subcommand") == "export-embeddings");

  const auto clf_path = dir.file("clf.pqcf");
  REQUIRE(run({"train-classifier", "--embeddings", emb_path, "--train", tsv_path, "--out",
               clf_path, "--blocks", "1", "--heads", "2", "--ffn", "8", "--max-seq-len", "16",
               "--epochs", "2", "--dropout", "0", "--seed", "5"}) == 0);

  const auto metrics_path = dir.file("metrics.json");
  REQUIRE(run({"evaluate", "--classifier", clf_path, "--test", tsv_path, "--out",
               metrics_path}) == 0);
  const auto metrics = json::parse(testutil::slurp_text(metrics_path));
  CHECK(metrics.contains("accuracy"));
  CHECK(metrics.contains("weighted_f1"));
  CHECK(metrics.at("per_class").size() == 4);
}

TEST_CASE("config file supplies defaults, flags win") {
  testutil::TempDir dir;
  const auto corpus = dir.file("corpus.txt");
  write_lines(corpus, testutil::make_lm_corpus(8));

  const auto cfg_path = dir.file("run.json");
  {
    std::ofstream out(cfg_path);
    out << R"({"train-lm": {"epochs": 3, "seed": 900}})";
  }

  const auto ck1 = dir.file("one.pqck");
  REQUIRE(run({"--config", cfg_path, "train-lm", "--backend", "classical", "--corpus", corpus,
               "--out", ck1, "--embed-dim", "4", "--hidden", "3", "--batch-size", "4",
               "--max-vocab", "50"}) == 0);
  auto m1 = read_manifest(ck1);
  CHECK(m1.at("config").at("epochs") == 3);
  CHECK(m1.at("config").at("seed") == 900);

  const auto ck2 = dir.file("two.pqck");
  REQUIRE(run({"--config", cfg_path, "train-lm", "--backend", "classical", "--corpus", corpus,
               "--out", ck2, "--embed-dim", "4", "--hidden", "3", "--batch-size", "4",
               "--max-vocab", "50", "--epochs", "1"}) == 0);
  auto m2 = read_manifest(ck2);
  CHECK(m2.at("config").at("epochs") == 1);   // explicit flag beats the file
  CHECK(m2.at("config").at("seed") == 900);   // untouched keys still apply

  SUBCASE("unknown section is a usage error") {
    std::ofstream out(cfg_path, std::ios::trunc);
    out << R"({"mystery": {}})";
    out.close();
    CHECK(run({"--config", cfg_path, "train-lm", "--backend", "classical", "--corpus", corpus,
               "--out", dir.file("three.pqck"), "--embed-dim", "4", "--hidden", "3"}) == 2);
  }
  SUBCASE("unknown key inside the active section is a usage error") {
    std::ofstream out(cfg_path, std::ios::trunc);
    out << R"({"train-lm": {"mystery_knob": 1}})";
    out.close();
    CHECK(run({"--config", cfg_path, "train-lm", "--backend", "classical", "--corpus", corpus,
               "--out", dir.file("four.pqck"), "--embed-dim", "4", "--hidden", "3"}) == 2);
  }
}

TEST_CASE("seed falls back to the environment") {
  testutil::TempDir dir;
  const auto corpus = dir.file("corpus.txt");
  write_lines(corpus, testutil::make_lm_corpus(8));

  {
    EnvSeed guard("123");
    const auto ck = dir.file("env.pqck");
    REQUIRE(run({"train-lm", "--backend", "classical", "--corpus", corpus, "--out", ck,
                 "--embed-dim", "4", "--hidden", "3", "--epochs", "1", "--batch-size", "4",
                 "--max-vocab", "50"}) == 0);
    CHECK(read_manifest(ck).at("config").at("seed") == 123);

    // An explicit flag still wins over the environment.
    const auto ck2 = dir.file("flag.pqck");
    REQUIRE(run({"train-lm", "--backend", "classical", "--corpus", corpus, "--out", ck2,
                 "--embed-dim", "4", "--hidden", "3", "--epochs", "1", "--batch-size", "4",
                 "--max-vocab", "50", "--seed", "77"}) == 0);
    CHECK(read_manifest(ck2).at("config").at("seed") == 77);
  }
}

TEST_CASE("ablation subcommand writes the report set") {
  testutil::TempDir dir;
  const auto corpus = dir.file("tiny.txt");
  write_lines(corpus, testutil::make_lm_corpus(6));
  const auto out_dir = dir.file("report");

  REQUIRE(run({"ablate", "--corpus", std::string("tiny=") + corpus, "--qubits", "2", "--classical",
               "--out-dir", out_dir, "--layers", "1", "--embed-dim", "4", "--hidden", "3",
               "--epochs", "1", "--batch-size", "4", "--max-vocab", "50", "--seed", "3",
               "--max-seq-len", "16"}) == 0);

  const auto report = testutil::slurp_text(out_dir + "/report.csv");
  CHECK(report.substr(0, report.find('\n')) ==
        "corpus,backend,qubits,layers,embed_dim,hidden_dim,epochs,vocab_size,state_dim,"
        "params_backbone,params_total,final_loss,perplexity");
  CHECK(report.find("tiny,quantum,2,") != std::string::npos);
  CHECK(report.find("tiny,classical,") != std::string::npos);
  CHECK_NOTHROW(testutil::slurp_text(out_dir + "/timings.csv"));
  CHECK_NOTHROW(testutil::slurp_text(out_dir + "/tiny_quantum_2q_epoch0.csv"));
  CHECK_NOTHROW(testutil::slurp_text(out_dir + "/tiny_classical_epoch0.csv"));
  CHECK(json::parse(testutil::slurp_text(out_dir + "/report.csv.manifest.json"))
            .at("subcommand") == "ablate");
}
