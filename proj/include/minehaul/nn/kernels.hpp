#pragma once

#include <cstddef>

namespace minehaul::nn::kernels {

// Row-major matrices throughout. Every output element is accumulated in
// ascending k order in both implementations, so results agree bitwise.

/// C[m x p] = (accumulate ? C : 0) + A[m x q] * B[q x p]
void gemm(const double* A, const double* B, double* C, std::size_t m, std::size_t q, std::size_t p, bool accumulate);

/// B[cols x rows] = A[rows x cols]^T
void transpose(const double* A, double* B, std::size_t rows, std::size_t cols);

/// Y[n x out] = X[n x in] * W[in x out] + b
void dense_forward(const double* X, const double* W, const double* b, double* Y, std::size_t n, std::size_t in,
                   std::size_t out);
/// dX[n x in] = dY[n x out] * W^T
void dense_backward_input(const double* dY, const double* W, double* dX, std::size_t n, std::size_t in,
                          std::size_t out);
/// dW[in x out] += X^T dY, db[out] += column sums of dY (rows in ascending order).
void dense_backward_params(const double* X, const double* dY, double* dW, double* db, std::size_t n,
                           std::size_t in, std::size_t out);

namespace reference {
void gemm(const double* A, const double* B, double* C, std::size_t m, std::size_t q, std::size_t p, bool accumulate);
void dense_forward(const double* X, const double* W, const double* b, double* Y, std::size_t n, std::size_t in,
                   std::size_t out);
void dense_backward_input(const double* dY, const double* W, double* dX, std::size_t n, std::size_t in,
                          std::size_t out);
void dense_backward_params(const double* X, const double* dY, double* dW, double* db, std::size_t n,
                           std::size_t in, std::size_t out);
}  // namespace reference

}  // namespace minehaul::nn::kernels
