#include "ganlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "ganlab/common.hpp"

namespace ganlab {

namespace {

// Work threshold below which spawning an OpenMP region is not worth it.
constexpr std::int64_t kParallelCutoff = 1 << 16;

void check_matmul(const Matrix& a, const Matrix& b, int inner_a, int inner_b, const char* what) {
    if (inner_a != inner_b) throw DimensionError(std::string(what) + ": inner dimension mismatch");
}

// out_row += s * src_row, the vectorizable core of all three matmuls. The
// restrict qualifiers matter: without them the compiler emits alias checks
// that block clean SIMD codegen. Outputs are always freshly allocated here,
// so the no-alias promise holds.
inline void axpy(double s, const double* __restrict src, double* __restrict out, int n) {
    for (int j = 0; j < n; ++j) out[j] += s * src[j];
}

// The simd pragma permits a vectorized (reassociated) reduction; every caller
// of this helper gets the same summation tree, so serial and OpenMP variants
// still agree bit for bit.
inline double dot(const double* a, const double* b, int n) {
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (int j = 0; j < n; ++j) acc += a[j] * b[j];
    return acc;
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_matmul(a, b, a.cols(), b.rows(), "matmul");
    const int n = a.rows(), k = a.cols(), m = b.cols();
    Matrix out(n, m);
    const std::int64_t work = static_cast<std::int64_t>(n) * k * m;
#pragma omp parallel for schedule(static) if (work > kParallelCutoff)
    for (int i = 0; i < n; ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (int p = 0; p < k; ++p) axpy(arow[p], b.row_ptr(p), orow, m);
    }
    return out;
}

Matrix matmul_trans_a(const Matrix& a, const Matrix& b) {
    check_matmul(a, b, a.rows(), b.rows(), "matmul_trans_a");
    const int n = a.rows(), k = a.cols(), m = b.cols();
    Matrix out(k, m);
    const std::int64_t work = static_cast<std::int64_t>(n) * k * m;
#pragma omp parallel for schedule(static) if (work > kParallelCutoff)
    for (int i = 0; i < k; ++i) {
        double* orow = out.row_ptr(i);
        for (int p = 0; p < n; ++p) axpy(a(p, i), b.row_ptr(p), orow, m);
    }
    return out;
}

Matrix matmul_trans_b(const Matrix& a, const Matrix& b) {
    check_matmul(a, b, a.cols(), b.cols(), "matmul_trans_b");
    const int n = a.rows(), k = a.cols(), m = b.rows();
    Matrix out(n, m);
    const std::int64_t work = static_cast<std::int64_t>(n) * k * m;
#pragma omp parallel for schedule(static) if (work > kParallelCutoff)
    for (int i = 0; i < n; ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (int j = 0; j < m; ++j) orow[j] = dot(arow, b.row_ptr(j), k);
    }
    return out;
}

Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw DimensionError("pairwise_sq_dists: dimension mismatch");
    const int n = a.rows(), m = b.rows(), d = a.cols();
    Matrix out(n, m);
    const std::int64_t work = static_cast<std::int64_t>(n) * m * d;
#pragma omp parallel for schedule(static) if (work > kParallelCutoff)
    for (int i = 0; i < n; ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (int j = 0; j < m; ++j) {
            const double* brow = b.row_ptr(j);
            double acc = 0.0;
            for (int c = 0; c < d; ++c) {
                double diff = arow[c] - brow[c];
                acc += diff * diff;
            }
            orow[j] = acc;
        }
    }
    return out;
}

std::vector<double> knn_radii(const Matrix& sq_within, int k) {
    const int n = sq_within.rows();
    if (sq_within.cols() != n) throw DimensionError("knn_radii: square matrix expected");
    if (k < 1 || k >= n) throw DimensionError("knn_radii: need 1 <= k < n");
    std::vector<double> radii(n);
#pragma omp parallel for schedule(static) if (static_cast<std::int64_t>(n) * n > kParallelCutoff)
    for (int i = 0; i < n; ++i) {
        std::vector<double> row(sq_within.row_ptr(i), sq_within.row_ptr(i) + n);
        row[i] = std::numeric_limits<double>::infinity();  // self-exclusion
        std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
        radii[i] = std::sqrt(row[k - 1]);
    }
    return radii;
}

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_matmul(a, b, a.cols(), b.rows(), "matmul");
    const int n = a.rows(), k = a.cols(), m = b.cols();
    Matrix out(n, m);
    for (int i = 0; i < n; ++i)
        for (int p = 0; p < k; ++p) axpy(a(i, p), b.row_ptr(p), out.row_ptr(i), m);
    return out;
}

Matrix matmul_trans_a(const Matrix& a, const Matrix& b) {
    check_matmul(a, b, a.rows(), b.rows(), "matmul_trans_a");
    const int n = a.rows(), k = a.cols(), m = b.cols();
    Matrix out(k, m);
    for (int i = 0; i < k; ++i)
        for (int p = 0; p < n; ++p) axpy(a(p, i), b.row_ptr(p), out.row_ptr(i), m);
    return out;
}

Matrix matmul_trans_b(const Matrix& a, const Matrix& b) {
    check_matmul(a, b, a.cols(), b.cols(), "matmul_trans_b");
    const int n = a.rows(), k = a.cols(), m = b.rows();
    Matrix out(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out(i, j) = dot(a.row_ptr(i), b.row_ptr(j), k);
    return out;
}

Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw DimensionError("pairwise_sq_dists: dimension mismatch");
    const int n = a.rows(), m = b.rows(), d = a.cols();
    Matrix out(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int c = 0; c < d; ++c) {
                double diff = a(i, c) - b(j, c);
                acc += diff * diff;
            }
            out(i, j) = acc;
        }
    return out;
}

std::vector<double> knn_radii(const Matrix& sq_within, int k) {
    const int n = sq_within.rows();
    if (sq_within.cols() != n) throw DimensionError("knn_radii: square matrix expected");
    if (k < 1 || k >= n) throw DimensionError("knn_radii: need 1 <= k < n");
    std::vector<double> radii(n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> row(sq_within.row_ptr(i), sq_within.row_ptr(i) + n);
        row[i] = std::numeric_limits<double>::infinity();
        std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
        radii[i] = std::sqrt(row[k - 1]);
    }
    return radii;
}

}  // namespace serial

}  // namespace ganlab
