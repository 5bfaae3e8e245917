#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pqlm {

// Thrown when a binary artifact does not parse (bad magic, bad sizes,
// unsupported version, truncation).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an artifact parses but its integrity trailer does not match.
struct CorruptionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

// Shortest representation that round-trips a double ("%.17g"), for
// deterministic text artifacts.
std::string format_g17(double v);

// Deterministic sub-seed for a named component of a seeded object.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  return splitmix64(base ^ fnv1a64(tag));
}

// mt19937_64 with hand-rolled conversions. std::uniform_*_distribution is
// implementation-defined, so sampled streams would not be stable across
// standard libraries; these conversions are.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  void fill_uniform(std::vector<double>& v, double lo, double hi) {
    for (double& x : v) x = uniform(lo, hi);
  }

 private:
  std::mt19937_64 eng_;
};

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs body(i) for i in [0, n). With n_threads <= 1 this is the serial
// reference path; otherwise iterations are distributed across OpenMP
// threads. Bodies must write to disjoint slots.
template <class F>
void parallel_for(std::int64_t n, int n_threads, F&& body) {
#ifdef _OPENMP
  if (n_threads > 1 && n > 1) {
#pragma omp parallel for num_threads(n_threads) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
#else
  (void)n_threads;
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    body(i);
  }
}

}  // namespace pqlm
