#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ganlab/common.hpp"
#include "ganlab/kernels.hpp"
#include "ganlab/linalg.hpp"
#include "ganlab/matrix.hpp"
#include "ganlab/rng.hpp"

using namespace ganlab;

namespace {

Matrix random_symmetric(int n, Rng& rng) {
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = rng.normal();
            a(i, j) = v;
            a(j, i) = v;
        }
    return a;
}

Matrix random_psd(int n, Rng& rng) {
    Matrix b(n, n);
    for (double& v : b.data()) v = rng.normal();
    return matmul_trans_a(b, b);  // bᵀb is PSD
}

double brute_force_assignment(const Matrix& cost) {
    const int n = cost.rows();
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("eigen_symmetric solves known matrices") {
    const Matrix a(2, 2, {2, 1, 1, 2});
    const SymmetricEigen eig = eigen_symmetric(a);
    REQUIRE(eig.values.size() == 2);
    CHECK(eig.values[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig.values[1] == doctest::Approx(3.0).epsilon(1e-12));

    const Matrix d(3, 3, {5, 0, 0, 0, -2, 0, 0, 0, 7});
    const SymmetricEigen eig_d = eigen_symmetric(d);
    CHECK(eig_d.values[0] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(eig_d.values[1] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(eig_d.values[2] == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("eigen_symmetric reconstructs random symmetric matrices") {
    Rng rng(17);
    for (int n : {2, 5, 8, 13}) {
        const Matrix a = random_symmetric(n, rng);
        const SymmetricEigen eig = eigen_symmetric(a);

        // Ascending eigenvalues.
        for (std::size_t i = 1; i < eig.values.size(); ++i)
            CHECK(eig.values[i] >= eig.values[i - 1]);

        // Orthonormal eigenvectors.
        const Matrix gram = matmul_trans_a(eig.vectors, eig.vectors);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK(gram(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-11));

        // V diag(values) Vᵀ == A.
        Matrix scaled = eig.vectors;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) scaled(i, j) *= eig.values[static_cast<std::size_t>(j)];
        const Matrix rebuilt = matmul_trans_b(scaled, eig.vectors);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK(rebuilt(i, j) == doctest::Approx(a(i, j)).epsilon(1e-10));
    }
}

TEST_CASE("eigen_symmetric rejects non-square input") {
    CHECK_THROWS_AS(eigen_symmetric(Matrix(2, 3)), DimensionError);
}

TEST_CASE("sqrt_psd squares back to the input") {
    const Matrix diag(2, 2, {4, 0, 0, 9});
    const Matrix root = sqrt_psd(diag);
    CHECK(root(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(root(1, 1) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(root(0, 1) == doctest::Approx(0.0).epsilon(1e-12));

    Rng rng(23);
    for (int n : {2, 4, 6}) {
        const Matrix a = random_psd(n, rng);
        const Matrix r = sqrt_psd(a);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) CHECK(r(i, j) == doctest::Approx(r(j, i)).epsilon(1e-10));
        const Matrix sq = matmul(r, r);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) CHECK(sq(i, j) == doctest::Approx(a(i, j)).epsilon(1e-8));
    }
}

TEST_CASE("sqrt_psd clips small negative eigenvalues instead of producing NaN") {
    // Rank-1 matrix nudged slightly indefinite.
    Matrix a(2, 2, {1.0, 1.0, 1.0, 1.0});
    a(0, 0) -= 1e-12;
    const Matrix r = sqrt_psd(a);
    CHECK(r.all_finite());
    const Matrix sq = matmul(r, r);
    CHECK(sq(0, 1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("solve_assignment finds the optimum of a known matrix") {
    const Matrix cost(3, 3, {4, 1, 3, 2, 0, 5, 3, 2, 2});
    const AssignmentResult res = solve_assignment(cost);
    CHECK(res.total_cost == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(res.col_of_row == std::vector<int>{1, 0, 2});
}

TEST_CASE("solve_assignment matches brute force on random matrices") {
    Rng rng(31);
    for (int n = 1; n <= 7; ++n) {
        for (int rep = 0; rep < 8; ++rep) {
            Matrix cost(n, n);
            for (double& v : cost.data()) v = rng.uniform(0.0, 10.0);
            const AssignmentResult res = solve_assignment(cost);

            // Valid permutation.
            std::vector<int> seen(static_cast<std::size_t>(n), 0);
            REQUIRE(static_cast<int>(res.col_of_row.size()) == n);
            double recomputed = 0.0;
            for (int i = 0; i < n; ++i) {
                const int j = res.col_of_row[static_cast<std::size_t>(i)];
                REQUIRE(j >= 0);
                REQUIRE(j < n);
                ++seen[static_cast<std::size_t>(j)];
                recomputed += cost(i, j);
            }
            for (int c : seen) CHECK(c == 1);

            CHECK(res.total_cost == doctest::Approx(recomputed).epsilon(1e-12));
            CHECK(res.total_cost == doctest::Approx(brute_force_assignment(cost)).epsilon(1e-10));
        }
    }
}

TEST_CASE("solve_assignment edge cases") {
    const AssignmentResult empty = solve_assignment(Matrix(0, 0));
    CHECK(empty.col_of_row.empty());
    CHECK(empty.total_cost == 0.0);
    CHECK_THROWS_AS(solve_assignment(Matrix(2, 3)), DimensionError);
}
