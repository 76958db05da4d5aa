// Timing comparison of the OpenMP kernels against their serial references.
// Run directly: build/ganlab_bench [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "ganlab/kernels.hpp"
#include "ganlab/matrix.hpp"
#include "ganlab/parallel.hpp"
#include "ganlab/rng.hpp"

using namespace ganlab;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

// Best-of-reps wall time in milliseconds; a volatile sink keeps the calls live.
template <typename F>
double best_ms(int reps, F&& fn) {
    volatile double sink = 0.0;
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        sink = sink + fn();
        const auto stop = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(stop - start).count());
    }
    (void)sink;
    return best;
}

void row(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s %10.3f ms %10.3f ms %8.2fx\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();
    const int reps = argc > 1 ? std::atoi(argv[1]) : 5;

    Rng rng(42);
    const Matrix a = random_matrix(512, 128, rng);
    const Matrix b = random_matrix(128, 512, rng);
    const Matrix bt = random_matrix(512, 128, rng);
    const Matrix at = random_matrix(128, 512, rng);
    const Matrix points = random_matrix(2000, 2, rng);
    const Matrix sq = pairwise_sq_dists(points, points);

    std::printf("threads: %d, best of %d reps\n\n", thread_cap(), reps);
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    row("matmul 512x128x512",
        best_ms(reps, [&] { return serial::matmul(a, b)(0, 0); }),
        best_ms(reps, [&] { return matmul(a, b)(0, 0); }));
    row("matmul_trans_a 512x128x512",
        best_ms(reps, [&] { return serial::matmul_trans_a(at, b)(0, 0); }),
        best_ms(reps, [&] { return matmul_trans_a(at, b)(0, 0); }));
    row("matmul_trans_b 512x128x512",
        best_ms(reps, [&] { return serial::matmul_trans_b(a, bt)(0, 0); }),
        best_ms(reps, [&] { return matmul_trans_b(a, bt)(0, 0); }));
    row("pairwise_sq_dists 2000x2000",
        best_ms(reps, [&] { return serial::pairwise_sq_dists(points, points)(0, 0); }),
        best_ms(reps, [&] { return pairwise_sq_dists(points, points)(0, 0); }));
    row("knn_radii 2000, k=5",
        best_ms(reps, [&] { return serial::knn_radii(sq, 5)[0]; }),
        best_ms(reps, [&] { return knn_radii(sq, 5)[0]; }));

    return 0;
}
