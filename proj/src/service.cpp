#include "pqlm/service.hpp"

#include <atomic>
#include <cerrno>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "pqlm/embedfile.hpp"
#include "pqlm/statevector.hpp"

namespace pqlm {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* job_state_name(JobState s) {
  switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Converged: return "converged";
    case JobState::Failed: return "failed";
  }
  throw std::invalid_argument("job_state_name: bad state");
}

JobState parse_job_state(const std::string& name) {
  if (name == "queued") return JobState::Queued;
  if (name == "running") return JobState::Running;
  if (name == "converged") return JobState::Converged;
  if (name == "failed") return JobState::Failed;
  throw FormatError("parse_job_state: unknown state '" + name + "'");
}

LmConfig JobConfig::lm_config() const {
  LmConfig cfg;
  cfg.backbone = backbone;
  cfg.embed_dim = embed_dim;
  cfg.n_qubits = n_qubits;
  cfg.n_layers = n_layers;
  cfg.hidden_dim = hidden_dim;
  return cfg;
}

TrainConfig JobConfig::train_config(std::uint64_t seed, int n_threads) const {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = batch_size;
  cfg.max_seq_len = max_seq_len;
  cfg.learning_rate = learning_rate;
  cfg.seed = seed;
  cfg.n_threads = n_threads;
  return cfg;
}

namespace {

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

int require_int(const json& j, const char* key, long long lo, long long hi) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) {
    throw FormatError(std::string("config key '") + key + "' must be an integer");
  }
  const long long x = v.get<long long>();
  if (x < lo || x > hi) {
    throw FormatError(std::string("config key '") + key + "' out of range [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(x);
}

}  // namespace

JobConfig parse_job_config(const json& j) {
  if (!j.is_object()) throw FormatError("config must be a JSON object");

  // Seeds and circuit layout are the server's secret; rejecting the keys
  // (rather than ignoring them) makes the contract visible to clients.
  for (const char* secret : {"seed", "server_seed", "circuit_seed", "job_seed", "entanglement",
                             "vqc_params", "angles"}) {
    if (j.contains(secret)) {
      throw FormatError(std::string("config key '") + secret +
                        "' is chosen server-side and never accepted from clients");
    }
  }
  static const char* kKnown[] = {"backend",    "embed_dim",  "n_qubits",      "n_layers",
                                 "hidden_dim", "epochs",     "batch_size",    "max_seq_len",
                                 "learning_rate", "max_vocab"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : kKnown) known = known || it.key() == k;
    if (!known) throw FormatError("unknown config key '" + it.key() + "'");
  }

  JobConfig cfg;
  if (j.contains("backend")) {
    const auto& v = j.at("backend");
    if (!v.is_string()) throw FormatError("config key 'backend' must be a string");
    const std::string s = v.get<std::string>();
    if (s == "quantum") {
      cfg.backbone = BackboneKind::Quantum;
    } else if (s == "classical") {
      cfg.backbone = BackboneKind::Classical;
    } else {
      throw FormatError("config key 'backend' must be 'quantum' or 'classical'");
    }
  }
  if (j.contains("embed_dim")) cfg.embed_dim = require_int(j, "embed_dim", 1, 4096);
  if (j.contains("n_qubits")) cfg.n_qubits = require_int(j, "n_qubits", 2, kMaxQubits);
  if (j.contains("n_layers")) cfg.n_layers = require_int(j, "n_layers", 1, 64);
  if (j.contains("hidden_dim")) cfg.hidden_dim = require_int(j, "hidden_dim", 1, 4096);
  if (j.contains("epochs")) cfg.epochs = require_int(j, "epochs", 1, 100000);
  if (j.contains("batch_size")) cfg.batch_size = require_int(j, "batch_size", 1, 1 << 20);
  if (j.contains("max_seq_len")) cfg.max_seq_len = require_int(j, "max_seq_len", 2, 1 << 20);
  if (j.contains("learning_rate")) {
    const auto& v = j.at("learning_rate");
    if (!v.is_number()) throw FormatError("config key 'learning_rate' must be a number");
    cfg.learning_rate = v.get<double>();
    if (!std::isfinite(cfg.learning_rate) || cfg.learning_rate < 0.0) {
      throw FormatError("config key 'learning_rate' must be finite and non-negative");
    }
  }
  if (j.contains("max_vocab")) {
    cfg.max_vocab = static_cast<std::size_t>(
        require_int(j, "max_vocab", Vocab::kNumReserved + 1, 1 << 24));
  }
  try {
    validate(cfg.train_config(0, 1));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return cfg;
}

json job_config_to_json(const JobConfig& cfg) {
  ordered_json j;
  j["backend"] = backbone_name(cfg.backbone);
  j["embed_dim"] = cfg.embed_dim;
  j["n_qubits"] = cfg.n_qubits;
  j["n_layers"] = cfg.n_layers;
  j["hidden_dim"] = cfg.hidden_dim;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["max_seq_len"] = cfg.max_seq_len;
  j["learning_rate"] = cfg.learning_rate;
  j["max_vocab"] = cfg.max_vocab;
  j["seed"] = "REDACTED";
  return j;
}

json job_record_to_json(const JobRecord& r) {
  ordered_json j;
  j["job_id"] = r.job_id;
  j["state"] = job_state_name(r.state);
  j["progress"] = {{"epoch", r.progress.epoch},
                   {"batch", r.progress.batch},
                   {"last_loss", r.progress.last_loss}};
  j["config"] = job_config_to_json(r.config);
  if (r.state == JobState::Failed) j["error"] = r.error;
  j["created_at"] = r.created_at;
  j["updated_at"] = r.updated_at;
  return j;
}

std::uint64_t derive_job_seed(std::uint64_t server_seed, std::uint64_t ordinal) {
  return derive_seed(server_seed, "job." + std::to_string(ordinal));
}

struct QlmServer::Impl {
  int requested_port;
  std::string work_dir;
  std::uint64_t server_seed;
  int n_threads;

  httplib::Server svr;
  std::thread listen_thread;
  std::thread worker_thread;
  int bound_port = 0;
  bool started = false;

  std::mutex mu;
  std::condition_variable cv;
  std::atomic<bool> stopping{false};

  struct Job {
    JobRecord record;
    std::uint64_t ordinal = 0;
  };
  std::map<std::string, Job> jobs;       // guarded by mu
  std::deque<std::string> queue;         // guarded by mu
  std::uint64_t next_ordinal = 0;        // guarded by mu
  Rng id_rng{0};

  Impl(int port_, std::string dir, std::uint64_t seed_, int threads)
      : requested_port(port_), work_dir(std::move(dir)), server_seed(seed_), n_threads(threads),
        id_rng(derive_seed(seed_, "job_ids")) {
    fs::create_directories(work_dir);
    restore_jobs();
  }

  fs::path job_dir(const std::string& id) const { return fs::path(work_dir) / id; }

  // The id stream is a fixed function of the server seed; ordinal k always
  // gets the k-th pair of words, so restarts cannot recycle a live id.
  std::string make_job_id() {
    const std::uint64_t a = id_rng.next_u64();
    const std::uint64_t b = id_rng.next_u64();
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(a),
                  static_cast<unsigned long long>(b));
    return buf;
  }

  void persist(const Job& job) {
    ordered_json m;
    m["job_id"] = job.record.job_id;
    m["ordinal"] = job.ordinal;
    m["state"] = job_state_name(job.record.state);
    m["progress"] = {{"epoch", job.record.progress.epoch},
                     {"batch", job.record.progress.batch},
                     {"last_loss", job.record.progress.last_loss}};
    json cfg = job_config_to_json(job.record.config);
    cfg.erase("seed");
    m["config"] = cfg;
    m["error"] = job.record.error;
    m["created_at"] = job.record.created_at;
    m["updated_at"] = job.record.updated_at;

    const fs::path dir = job_dir(job.record.job_id);
    fs::create_directories(dir);
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write job manifest under " + dir.string());
    }
    out << m.dump(2) << "\n";
  }

  void persist_documents(const std::string& id, const std::vector<std::string>& documents) {
    json docs = documents;
    std::ofstream out(job_dir(id) / "documents.json", std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write job corpus under " + job_dir(id).string());
    }
    out << docs.dump() << "\n";
  }

  std::vector<std::string> load_documents(const std::string& id) const {
    std::ifstream in(job_dir(id) / "documents.json");
    if (!in) throw std::runtime_error("job " + id + " has no stored corpus");
    json docs = json::parse(in);
    return docs.get<std::vector<std::string>>();
  }

  void restore_jobs() {
    std::vector<std::pair<std::uint64_t, std::string>> queued;
    for (const auto& entry : fs::directory_iterator(work_dir)) {
      if (!entry.is_directory()) continue;
      const fs::path mf = entry.path() / "manifest.json";
      if (!fs::exists(mf)) continue;
      try {
        std::ifstream in(mf);
        json m = json::parse(in);
        Job job;
        job.record.job_id = m.at("job_id").get<std::string>();
        job.ordinal = m.at("ordinal").get<std::uint64_t>();
        job.record.state = parse_job_state(m.at("state").get<std::string>());
        job.record.progress.epoch = m.at("progress").at("epoch").get<int>();
        job.record.progress.batch = m.at("progress").at("batch").get<int>();
        job.record.progress.last_loss = m.at("progress").at("last_loss").get<double>();
        job.record.config = parse_job_config(m.at("config"));
        job.record.error = m.value("error", std::string());
        job.record.created_at = m.at("created_at").get<std::string>();
        job.record.updated_at = m.at("updated_at").get<std::string>();

        if (job.record.state == JobState::Running) {
          job.record.state = JobState::Failed;
          job.record.error = "interrupted by server restart";
          job.record.updated_at = iso_utc_now();
        } else if (job.record.state == JobState::Converged &&
                   !fs::exists(entry.path() / "embeddings.pqlm")) {
          job.record.state = JobState::Failed;
          job.record.error = "embedding artifact missing";
          job.record.updated_at = iso_utc_now();
        } else if (job.record.state == JobState::Queued) {
          queued.emplace_back(job.ordinal, job.record.job_id);
        }

        next_ordinal = std::max(next_ordinal, job.ordinal + 1);
        const std::string id = job.record.job_id;
        jobs.emplace(id, std::move(job));
        persist(jobs.at(id));
      } catch (const std::exception& e) {
        std::fprintf(stderr, "qlm-server: skipping unreadable job dir %s: %s\n",
                     entry.path().string().c_str(), e.what());
      }
    }
    std::sort(queued.begin(), queued.end());
    for (const auto& [ordinal, id] : queued) queue.push_back(id);
    // Skip the words already consumed so fresh ids continue the stream.
    for (std::uint64_t i = 0; i < 2 * next_ordinal; ++i) id_rng.next_u64();
  }

  static void respond_error(httplib::Response& res, int status, const std::string& code,
                            const std::string& message) {
    ordered_json j;
    j["code"] = code;
    j["message"] = message;
    res.status = status;
    res.set_content(j.dump(2) + "\n", "application/json");
  }

  void handle_submit(const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      respond_error(res, 400, "bad_config", std::string("request body is not valid JSON: ") +
                                                e.what());
      return;
    }
    if (!body.is_object()) {
      respond_error(res, 400, "bad_config", "request body must be a JSON object");
      return;
    }
    for (auto it = body.begin(); it != body.end(); ++it) {
      if (it.key() != "documents" && it.key() != "config") {
        respond_error(res, 400, "bad_config", "unknown request key '" + it.key() + "'");
        return;
      }
    }
    if (!body.contains("documents") || !body.at("documents").is_array()) {
      respond_error(res, 400, "bad_config", "request must carry a 'documents' string array");
      return;
    }
    std::vector<std::string> documents;
    for (const auto& d : body.at("documents")) {
      if (!d.is_string()) {
        respond_error(res, 400, "bad_config", "every document must be a string");
        return;
      }
      documents.push_back(d.get<std::string>());
    }
    if (documents.empty()) {
      respond_error(res, 400, "empty_corpus", "document list is empty");
      return;
    }
    JobConfig cfg;
    if (body.contains("config")) {
      try {
        cfg = parse_job_config(body.at("config"));
      } catch (const FormatError& e) {
        respond_error(res, 400, "bad_config", e.what());
        return;
      }
    }
    if (prepare_corpus(documents).empty()) {
      respond_error(res, 400, "empty_corpus", "no document survives preprocessing");
      return;
    }

    std::string id;
    {
      std::lock_guard<std::mutex> lock(mu);
      Job job;
      job.ordinal = next_ordinal++;
      id = make_job_id();
      job.record.job_id = id;
      job.record.state = JobState::Queued;
      job.record.config = cfg;
      job.record.created_at = iso_utc_now();
      job.record.updated_at = job.record.created_at;
      persist(job);
      persist_documents(id, documents);
      jobs.emplace(id, std::move(job));
      queue.push_back(id);
    }
    cv.notify_all();

    ordered_json j;
    j["job_id"] = id;
    res.set_content(j.dump(2) + "\n", "application/json");
  }

  void handle_status(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    std::lock_guard<std::mutex> lock(mu);
    auto it = jobs.find(id);
    if (it == jobs.end()) {
      respond_error(res, 404, "job_not_found", "no job with id '" + id + "'");
      return;
    }
    res.set_content(job_record_to_json(it->second.record).dump(2) + "\n", "application/json");
  }

  void handle_fetch(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    {
      std::lock_guard<std::mutex> lock(mu);
      auto it = jobs.find(id);
      if (it == jobs.end()) {
        respond_error(res, 404, "job_not_found", "no job with id '" + id + "'");
        return;
      }
      if (it->second.record.state != JobState::Converged) {
        respond_error(res, 409, "not_ready",
                      "job is " + std::string(job_state_name(it->second.record.state)));
        return;
      }
    }
    std::ifstream in(job_dir(id) / "embeddings.pqlm", std::ios::binary);
    if (!in) {
      respond_error(res, 500, "not_ready", "embedding artifact unreadable");
      return;
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    res.set_content(std::move(bytes), "application/octet-stream");
  }

  void run_one_job(const std::string& id) {
    JobConfig cfg;
    std::uint64_t ordinal = 0;
    {
      std::lock_guard<std::mutex> lock(mu);
      Job& job = jobs.at(id);
      job.record.state = JobState::Running;
      job.record.updated_at = iso_utc_now();
      cfg = job.record.config;
      ordinal = job.ordinal;
      persist(job);
    }
    try {
      const auto documents = load_documents(id);
      const auto corpus = prepare_corpus(documents);
      const Vocab vocab = build_vocab(corpus, cfg.max_vocab);
      const std::uint64_t job_seed = derive_job_seed(server_seed, ordinal);
      const auto on_batch = [&](const TrainProgress& p) {
        std::lock_guard<std::mutex> lock(mu);
        Job& job = jobs.at(id);
        job.record.progress.epoch = p.epoch;
        job.record.progress.batch = p.batch;
        job.record.progress.last_loss = p.loss;
        job.record.updated_at = iso_utc_now();
        return !stopping.load();
      };
      TrainResult result =
          train_lm(corpus, vocab, cfg.lm_config(), cfg.train_config(job_seed, n_threads),
                   on_batch);
      if (result.stopped_early) {
        std::lock_guard<std::mutex> lock(mu);
        Job& job = jobs.at(id);
        job.record.state = JobState::Failed;
        job.record.error = "server shut down mid-training";
        job.record.updated_at = iso_utc_now();
        persist(job);
        return;
      }
      save_lm_checkpoint(result.model, (job_dir(id) / "model.pqck").string());
      const auto [matrix, out_vocab] = extract_embeddings(result.model);
      write_embeddings_file(matrix, out_vocab, (job_dir(id) / "embeddings.pqlm").string());

      std::lock_guard<std::mutex> lock(mu);
      Job& job = jobs.at(id);
      job.record.state = JobState::Converged;
      job.record.progress.epoch = cfg.epochs;
      job.record.progress.batch =
          result.batches_per_epoch > 0 ? result.batches_per_epoch - 1 : 0;
      if (!result.batch_losses.empty()) {
        job.record.progress.last_loss = result.batch_losses.back();
      }
      job.record.updated_at = iso_utc_now();
      persist(job);
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(mu);
      Job& job = jobs.at(id);
      job.record.state = JobState::Failed;
      job.record.error = e.what();
      job.record.updated_at = iso_utc_now();
      persist(job);
    }
  }

  void worker_loop() {
    while (true) {
      std::string id;
      {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait(lock, [&] { return stopping.load() || !queue.empty(); });
        if (stopping.load()) return;
        id = queue.front();
        queue.pop_front();
      }
      run_one_job(id);
    }
  }

  void start() {
    if (started) throw std::logic_error("QlmServer already started");
    started = true;

    svr.Post("/v1/jobs", [this](const httplib::Request& req, httplib::Response& res) {
      handle_submit(req, res);
    });
    svr.Get(R"(/v1/jobs/([^/]+)/embeddings)",
            [this](const httplib::Request& req, httplib::Response& res) {
              handle_fetch(req, res);
            });
    svr.Get(R"(/v1/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      handle_status(req, res);
    });

    if (requested_port == 0) {
      bound_port = svr.bind_to_any_port("0.0.0.0");
      if (bound_port <= 0) throw std::runtime_error("cannot bind an ephemeral port");
    } else {
      if (!svr.bind_to_port("0.0.0.0", requested_port)) {
        throw std::runtime_error("cannot bind port " + std::to_string(requested_port));
      }
      bound_port = requested_port;
    }
    listen_thread = std::thread([this] { svr.listen_after_bind(); });
    while (!svr.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    worker_thread = std::thread([this] { worker_loop(); });
  }

  void stop() {
    if (!started) return;
    stopping.store(true);
    cv.notify_all();
    if (worker_thread.joinable()) worker_thread.join();
    svr.stop();
    if (listen_thread.joinable()) listen_thread.join();
    started = false;
  }
};

QlmServer::QlmServer(int port, std::string work_dir, std::uint64_t server_seed, int n_threads)
    : impl_(std::make_unique<Impl>(port, std::move(work_dir), server_seed, n_threads)) {}

QlmServer::~QlmServer() {
  if (impl_) impl_->stop();
}

void QlmServer::start() { impl_->start(); }
void QlmServer::stop() { impl_->stop(); }
int QlmServer::port() const { return impl_->bound_port; }

struct QlmClient::Impl {
  httplib::Client cli;

  Impl(const std::string& host, int port) : cli(host, port) {
    cli.set_connection_timeout(5, 0);
    cli.set_read_timeout(60, 0);
  }

  [[noreturn]] static void throw_protocol_error(const httplib::Result& res) {
    try {
      json j = json::parse(res->body);
      throw ServiceError(res->status, j.at("code").get<std::string>(),
                         j.at("message").get<std::string>());
    } catch (const json::exception&) {
      throw ServiceError(res->status, "protocol_error",
                         "unexpected response body: " + res->body);
    }
  }

  static void require_ok(const httplib::Result& res, const char* what) {
    if (!res) {
      throw std::runtime_error(std::string(what) + ": cannot reach server (" +
                               httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) throw_protocol_error(res);
  }
};

QlmClient::QlmClient(std::string host, int port) : impl_(std::make_unique<Impl>(host, port)) {}
QlmClient::~QlmClient() = default;

std::string QlmClient::submit_job(const std::vector<std::string>& documents,
                                  const JobConfig& config) {
  ordered_json body;
  body["documents"] = documents;
  json cfg = job_config_to_json(config);
  cfg.erase("seed"); // the echo slot is not a request field
  body["config"] = cfg;
  auto res = impl_->cli.Post("/v1/jobs", body.dump(), "application/json");
  Impl::require_ok(res, "submit_job");
  json j = json::parse(res->body);
  return j.at("job_id").get<std::string>();
}

nlohmann::json QlmClient::job_status(const std::string& job_id) {
  auto res = impl_->cli.Get("/v1/jobs/" + job_id);
  Impl::require_ok(res, "job_status");
  return json::parse(res->body);
}

std::vector<std::uint8_t> QlmClient::fetch_embeddings(const std::string& job_id) {
  auto res = impl_->cli.Get("/v1/jobs/" + job_id + "/embeddings");
  Impl::require_ok(res, "fetch_embeddings");
  const auto* p = reinterpret_cast<const std::uint8_t*>(res->body.data());
  return std::vector<std::uint8_t>(p, p + res->body.size());
}

JobState QlmClient::wait_for_completion(const std::string& job_id, std::chrono::milliseconds poll,
                                        std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const json j = job_status(job_id);
    const JobState state = parse_job_state(j.at("state").get<std::string>());
    if (state == JobState::Converged || state == JobState::Failed) return state;
    if (std::chrono::steady_clock::now() >= deadline) {
      throw std::runtime_error("wait_for_completion: job " + job_id + " still " +
                               job_state_name(state) + " after timeout");
    }
    std::this_thread::sleep_for(poll);
  }
}

}  // namespace pqlm
