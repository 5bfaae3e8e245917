#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pqlm/common.hpp"

namespace pqlm {

// Row-major token embedding table; row id = token id.
struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> values; // [rows x dim]

  double* row(std::size_t r) {
    if (r >= rows) throw std::out_of_range("EmbeddingMatrix::row: index out of range");
    return values.data() + r * dim;
  }
  const double* row(std::size_t r) const {
    if (r >= rows) throw std::out_of_range("EmbeddingMatrix::row: index out of range");
    return values.data() + r * dim;
  }

  static EmbeddingMatrix zeros(std::size_t rows, std::size_t dim);
  static EmbeddingMatrix random(std::size_t rows, std::size_t dim, std::uint64_t seed);
};

}  // namespace pqlm
