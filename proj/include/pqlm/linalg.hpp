#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pqlm {

// y = W x + b with W row-major [rows x cols].
inline void affine(const std::vector<double>& w, const std::vector<double>& b,
                   const double* x, std::size_t cols, double* y, std::size_t rows) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b.empty() ? 0.0 : b[r];
    const double* wr = w.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

// dW += dy (x)T x, dW row-major [rows x cols].
inline void outer_acc(std::vector<double>& dw, const double* dy, std::size_t rows,
                      const double* x, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* dwr = dw.data() + r * cols;
    const double g = dy[r];
    for (std::size_t c = 0; c < cols; ++c) dwr[c] += g * x[c];
  }
}

// dx += W^T dy.
inline void matvec_t_acc(const std::vector<double>& w, const double* dy,
                         std::size_t rows, std::size_t cols, double* dx) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w.data() + r * cols;
    const double g = dy[r];
    for (std::size_t c = 0; c < cols; ++c) dx[c] += wr[c] * g;
  }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Numerically stable in-place log-softmax over one row.
inline void log_softmax_inplace(double* row, std::size_t n) {
  double mx = row[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, row[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::exp(row[i] - mx);
  const double lse = mx + std::log(sum);
  for (std::size_t i = 0; i < n; ++i) row[i] -= lse;
}

inline void softmax_inplace(double* row, std::size_t n) {
  double mx = row[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, row[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    row[i] = std::exp(row[i] - mx);
    sum += row[i];
  }
  for (std::size_t i = 0; i < n; ++i) row[i] /= sum;
}

inline void add_scaled(std::vector<double>& acc, const std::vector<double>& src, double s) {
  if (acc.size() != src.size()) throw std::invalid_argument("add_scaled: size mismatch");
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s * src[i];
}

}  // namespace pqlm
