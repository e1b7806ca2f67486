#include "minehaul/nn/kernels.hpp"

#include <algorithm>
#include <vector>

namespace minehaul::nn::kernels {

namespace {

constexpr std::size_t kRows = 4;
constexpr std::size_t kCols = 16;

typedef double v8d __attribute__((vector_size(64)));

// Full kRows x kCols tile of C over the whole k range, accumulators in registers.
inline void tile_full(const double* A, const double* B, double* C, std::size_t q, std::size_t p, bool acc) {
  v8d t[kRows][2];
  for (std::size_t r = 0; r < kRows; ++r)
    for (std::size_t h = 0; h < 2; ++h) {
      if (acc)
        __builtin_memcpy(&t[r][h], C + r * p + h * 8, sizeof(v8d));
      else
        t[r][h] = v8d{};
    }
  for (std::size_t k = 0; k < q; ++k) {
    v8d b0, b1;
    __builtin_memcpy(&b0, B + k * p, sizeof(v8d));
    __builtin_memcpy(&b1, B + k * p + 8, sizeof(v8d));
    for (std::size_t r = 0; r < kRows; ++r) {
      const double a = A[r * q + k];
      t[r][0] += a * b0;
      t[r][1] += a * b1;
    }
  }
  for (std::size_t r = 0; r < kRows; ++r)
    for (std::size_t h = 0; h < 2; ++h) __builtin_memcpy(C + r * p + h * 8, &t[r][h], sizeof(v8d));
}

// Ragged tile at the matrix edges.
inline void tile_edge(const double* A, const double* B, double* C, std::size_t rows, std::size_t cols, std::size_t q,
                      std::size_t p, bool acc) {
  double t[kRows][kCols];
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < cols; ++j) t[r][j] = acc ? C[r * p + j] : 0.0;
  for (std::size_t k = 0; k < q; ++k) {
    const double* b = B + k * p;
    for (std::size_t r = 0; r < rows; ++r) {
      const double a = A[r * q + k];
      for (std::size_t j = 0; j < cols; ++j) t[r][j] += a * b[j];
    }
  }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < cols; ++j) C[r * p + j] = t[r][j];
}

}  // namespace

void gemm(const double* A, const double* B, double* C, std::size_t m, std::size_t q, std::size_t p, bool accumulate) {
  if (m == 0 || p == 0) return;
  const std::size_t col_tiles = (p + kCols - 1) / kCols;
  const std::size_t row_tiles = (m + kRows - 1) / kRows;
  const long tiles = static_cast<long>(col_tiles * row_tiles);
#pragma omp parallel for schedule(static) if (tiles > 8 && m * q * p > 32768)
  for (long t = 0; t < tiles; ++t) {
    // Column-major tile order keeps a strip of B hot across row tiles.
    const std::size_t cj = static_cast<std::size_t>(t) / row_tiles;
    const std::size_t ri = static_cast<std::size_t>(t) % row_tiles;
    const std::size_t i0 = ri * kRows, j0 = cj * kCols;
    const std::size_t rows = std::min(kRows, m - i0), cols = std::min(kCols, p - j0);
    if (rows == kRows && cols == kCols)
      tile_full(A + i0 * q, B + j0, C + i0 * p + j0, q, p, accumulate);
    else
      tile_edge(A + i0 * q, B + j0, C + i0 * p + j0, rows, cols, q, p, accumulate);
  }
}

void transpose(const double* A, double* B, std::size_t rows, std::size_t cols) {
  constexpr std::size_t blk = 32;
  for (std::size_t i0 = 0; i0 < rows; i0 += blk)
    for (std::size_t j0 = 0; j0 < cols; j0 += blk)
      for (std::size_t i = i0; i < std::min(rows, i0 + blk); ++i)
        for (std::size_t j = j0; j < std::min(cols, j0 + blk); ++j) B[j * rows + i] = A[i * cols + j];
}

void dense_forward(const double* X, const double* W, const double* b, double* Y, std::size_t n, std::size_t in,
                   std::size_t out) {
  gemm(X, W, Y, n, in, out, false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < out; ++j) Y[i * out + j] += b[j];
}

void dense_backward_input(const double* dY, const double* W, double* dX, std::size_t n, std::size_t in,
                          std::size_t out) {
  thread_local std::vector<double> wt;
  wt.resize(in * out);
  transpose(W, wt.data(), in, out);
  gemm(dY, wt.data(), dX, n, out, in, false);
}

void dense_backward_params(const double* X, const double* dY, double* dW, double* db, std::size_t n,
                           std::size_t in, std::size_t out) {
  thread_local std::vector<double> xt;
  xt.resize(in * n);
  transpose(X, xt.data(), n, in);
  gemm(xt.data(), dY, dW, in, n, out, true);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < out; ++j) db[j] += dY[i * out + j];
}

namespace reference {

void gemm(const double* A, const double* B, double* C, std::size_t m, std::size_t q, std::size_t p, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      double s = accumulate ? C[i * p + j] : 0.0;
      for (std::size_t k = 0; k < q; ++k) s += A[i * q + k] * B[k * p + j];
      C[i * p + j] = s;
    }
}

void dense_forward(const double* X, const double* W, const double* b, double* Y, std::size_t n, std::size_t in,
                   std::size_t out) {
  gemm(X, W, Y, n, in, out, false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < out; ++j) Y[i * out + j] += b[j];
}

void dense_backward_input(const double* dY, const double* W, double* dX, std::size_t n, std::size_t in,
                          std::size_t out) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < in; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < out; ++j) s += dY[i * out + j] * W[k * out + j];
      dX[i * in + k] = s;
    }
}

void dense_backward_params(const double* X, const double* dY, double* dW, double* db, std::size_t n,
                           std::size_t in, std::size_t out) {
  for (std::size_t k = 0; k < in; ++k)
    for (std::size_t j = 0; j < out; ++j) {
      double s = dW[k * out + j];
      for (std::size_t i = 0; i < n; ++i) s += X[i * in + k] * dY[i * out + j];
      dW[k * out + j] = s;
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < out; ++j) db[j] += dY[i * out + j];
}

}  // namespace reference

}  // namespace minehaul::nn::kernels
