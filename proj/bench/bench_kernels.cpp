// Times the serial and OpenMP paths of the parameter-shift kernels and
// verifies that both return bitwise-identical gradients. A speedup that
// changes the numbers would be a bug, not a win.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pqlm/common.hpp"
#include "pqlm/langmodel.hpp"
#include "pqlm/recurrent.hpp"
#include "pqlm/textprep.hpp"
#include "pqlm/vqc.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double best_seconds(int repeats, F&& body) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    body();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
  std::printf("%-24s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   %s\n", name,
              serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s,
              identical ? "bitwise identical" : "RESULTS DIVERGED");
}

bool same(const pqlm::VqcJacobians& a, const pqlm::VqcJacobians& b) {
  return a.wrt_params == b.wrt_params && a.wrt_input == b.wrt_input;
}

bool same(const pqlm::LmGradients& a, const pqlm::LmGradients& b) {
  const auto& qa = std::get<pqlm::QLstmGrads>(a.backbone);
  const auto& qb = std::get<pqlm::QLstmGrads>(b.backbone);
  return a.embeddings == b.embeddings && a.w_out == b.w_out && a.b_out == b.b_out &&
         qa.w_in == qb.w_in && qa.b_in == qb.b_in && qa.params_f == qb.params_f &&
         qa.params_i == qb.params_i && qa.params_g == qb.params_g && qa.params_o == qb.params_o;
}

// 6-qubit, 2-layer circuit: 36 angle shifts plus the encoding shifts, the
// unit of work the recurrent backward pass fans out per gate.
bool bench_vqc_gradients(int threads, int repeats) {
  const auto spec = pqlm::build_circuit(2024, 6, 2);
  const auto params = pqlm::VqcParams::random(7, 6, 2);
  pqlm::Rng rng(99);
  std::vector<double> x(6);
  rng.fill_uniform(x, -2.0, 2.0);

  const auto serial = pqlm::vqc_gradients(spec, params, x, 1);
  const auto parallel = pqlm::vqc_gradients(spec, params, x, threads);

  const double ts = best_seconds(repeats, [&] { pqlm::vqc_gradients(spec, params, x, 1); });
  const double tp = best_seconds(repeats, [&] { pqlm::vqc_gradients(spec, params, x, threads); });
  report("vqc_gradients 6q 2L", ts, tp, same(serial, parallel));
  return same(serial, parallel);
}

// One optimizer batch of the hybrid language model: full forward plus
// backward through time over 8 sequences.
bool bench_lm_batch(int threads, int repeats) {
  pqlm::Vocab vocab;
  for (int w = 0; w < 20; ++w) vocab.add("w" + std::to_string(w));

  pqlm::LmConfig config;
  config.backbone = pqlm::BackboneKind::Quantum;
  config.embed_dim = 8;
  config.n_qubits = 4;
  config.n_layers = 2;
  const auto model = pqlm::LmModel::create(vocab, config, 4242);

  pqlm::Rng rng(17);
  std::vector<std::vector<int>> batch;
  for (int s = 0; s < 8; ++s) {
    std::vector<int> seq{pqlm::Vocab::kBosId};
    for (int t = 0; t < 8; ++t)
      seq.push_back(pqlm::Vocab::kNumReserved + static_cast<int>(rng.below(20)));
    seq.push_back(pqlm::Vocab::kEosId);
    batch.push_back(std::move(seq));
  }

  const auto run = [&](int n_threads) {
    auto grads = pqlm::LmGradients::zeros(model);
    for (const auto& seq : batch) pqlm::lm_sequence_gradients(model, seq, grads, n_threads);
    return grads;
  };

  const auto serial = run(1);
  const auto parallel = run(threads);

  const double ts = best_seconds(repeats, [&] { run(1); });
  const double tp = best_seconds(repeats, [&] { run(threads); });
  report("lm batch gradient 4q", ts, tp, same(serial, parallel));
  return same(serial, parallel);
}

}  // namespace

int main(int argc, char** argv) {
  int threads = 0;
  int repeats = 5;

  CLI::App app{"serial vs OpenMP kernel comparison"};
  app.add_option("--threads", threads, "parallel thread count (default: all cores, minimum 2)");
  app.add_option("--repeats", repeats, "timing repetitions, best is reported")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    // At least two threads so the parallel path is a distinct code path even
    // on a single-core host; there the interesting column is the identity.
    threads = std::max(threads, 2);
  }

#ifdef _OPENMP
  std::printf("OpenMP enabled, comparing 1 thread against %d threads, best of %d runs\n\n", threads,
              repeats);
#else
  std::printf("built without OpenMP, both columns run the serial path\n\n");
#endif

  bool ok = true;
  ok &= bench_vqc_gradients(threads, repeats);
  ok &= bench_lm_batch(threads, repeats);
  return ok ? 0 : 1;
}
