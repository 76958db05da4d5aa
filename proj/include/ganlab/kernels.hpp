#pragma once

#include <vector>

#include "ganlab/matrix.hpp"

namespace ganlab {

// Data-parallel inner kernels. Each OpenMP kernel parallelizes over output
// rows only, so every output element is produced by exactly one thread with
// a fixed accumulation order: results are bit-identical across thread counts
// and match the serial references below.

// a(n×k) * b(k×m)
Matrix matmul(const Matrix& a, const Matrix& b);
// aᵀ(k×n)ᵀ... i.e. a(n×k) read column-wise: result(k×m) = aᵀ * b(n×m)
Matrix matmul_trans_a(const Matrix& a, const Matrix& b);
// a(n×k) * b(m×k)ᵀ -> n×m
Matrix matmul_trans_b(const Matrix& a, const Matrix& b);

// Squared Euclidean distances between rows: out(i,j) = ||a_i - b_j||².
Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b);

// Per-row distance to the k-th nearest neighbor within the same set,
// excluding the point itself. sq_within must be pairwise_sq_dists(x, x).
std::vector<double> knn_radii(const Matrix& sq_within, int k);

// Simple serial implementations kept as references for the parallel kernels.
namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_trans_a(const Matrix& a, const Matrix& b);
Matrix matmul_trans_b(const Matrix& a, const Matrix& b);
Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b);
std::vector<double> knn_radii(const Matrix& sq_within, int k);
}  // namespace serial

}  // namespace ganlab
