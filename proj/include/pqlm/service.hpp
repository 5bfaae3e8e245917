#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqlm/common.hpp"
#include "pqlm/langmodel.hpp"

namespace pqlm {

// Mock NISQ training service: clients upload corpora and training configs,
// the server trains language models on its own secret seed and releases
// only the embedding matrices. Circuit internals never cross the wire.

enum class JobState { Queued, Running, Converged, Failed };

const char* job_state_name(JobState s);
JobState parse_job_state(const std::string& name);

struct JobProgress {
  int epoch = 0; // epochs completed once converged, current epoch while running
  int batch = 0;
  double last_loss = 0.0;
};

// The training request as it appears on the wire. Seeds are deliberately
// absent: the server derives one per job from its own secret.
struct JobConfig {
  BackboneKind backbone = BackboneKind::Quantum;
  int embed_dim = 64;
  int n_qubits = 4;
  int n_layers = 2;
  int hidden_dim = 5;
  int epochs = 15;
  int batch_size = 16;
  int max_seq_len = 32;
  double learning_rate = 0.01;
  std::size_t max_vocab = 5000;

  LmConfig lm_config() const;
  TrainConfig train_config(std::uint64_t seed, int n_threads) const;
};

// Rejects unknown keys outright; any attempt to smuggle a seed or circuit
// layout through the config is a protocol error, not a silent ignore.
JobConfig parse_job_config(const nlohmann::json& j);

// Wire echo of a config. The seed slot is always the literal "REDACTED".
nlohmann::json job_config_to_json(const JobConfig& cfg);

struct JobRecord {
  std::string job_id; // 32 hex chars
  JobState state = JobState::Queued;
  JobProgress progress;
  JobConfig config;
  std::string error; // shown only for failed jobs
  std::string created_at;
  std::string updated_at;
};

// The only serializer for status responses; keeping it single-sourced is
// what makes the privacy scan exhaustive.
nlohmann::json job_record_to_json(const JobRecord& r);

std::uint64_t derive_job_seed(std::uint64_t server_seed, std::uint64_t ordinal);

class QlmServer {
 public:
  // port 0 binds an ephemeral port (see port() after start). Jobs found
  // under work_dir are restored: converged and failed ones as they were,
  // queued ones back into the queue, running ones as failed.
  QlmServer(int port, std::string work_dir, std::uint64_t server_seed, int n_threads = 1);
  ~QlmServer();

  QlmServer(const QlmServer&) = delete;
  QlmServer& operator=(const QlmServer&) = delete;

  void start();
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ServiceError : std::runtime_error {
  ServiceError(int status_, std::string code_, const std::string& message_)
      : std::runtime_error(code_ + ": " + message_), status(status_), code(std::move(code_)) {}

  int status;
  std::string code;
};

class QlmClient {
 public:
  QlmClient(std::string host, int port);
  ~QlmClient();

  QlmClient(const QlmClient&) = delete;
  QlmClient& operator=(const QlmClient&) = delete;

  std::string submit_job(const std::vector<std::string>& documents, const JobConfig& config);
  nlohmann::json job_status(const std::string& job_id);
  std::vector<std::uint8_t> fetch_embeddings(const std::string& job_id);

  // Polls until the job leaves {queued, running}; throws on timeout.
  JobState wait_for_completion(const std::string& job_id,
                               std::chrono::milliseconds poll = std::chrono::milliseconds(50),
                               std::chrono::milliseconds timeout = std::chrono::minutes(15));

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pqlm
