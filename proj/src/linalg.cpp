#include "ganlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ganlab/common.hpp"

namespace ganlab {

SymmetricEigen eigen_symmetric(const Matrix& input) {
    const int n = input.rows();
    if (input.cols() != n) throw DimensionError("eigen_symmetric: square matrix expected");

    Matrix a = input;
    Matrix v(n, n);
    for (int i = 0; i < n; ++i) v(i, i) = 1.0;

    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
    if (scale == 0.0) scale = 1.0;
    const double tol = 1e-15 * scale;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= tol) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= tol * 1e-2) continue;
                const double app = a(p, p), aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return a(x, x) < a(y, y); });

    SymmetricEigen result;
    result.values.resize(n);
    result.vectors = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        result.values[j] = a(order[j], order[j]);
        for (int i = 0; i < n; ++i) result.vectors(i, j) = v(i, order[j]);
    }
    return result;
}

Matrix sqrt_psd(const Matrix& a, double clip) {
    SymmetricEigen eig = eigen_symmetric(a);
    const int n = a.rows();
    Matrix out(n, n);
    for (int k = 0; k < n; ++k) {
        const double lam = eig.values[k];
        if (lam < clip) continue;
        const double root = std::sqrt(lam);
        for (int i = 0; i < n; ++i) {
            const double vik = eig.vectors(i, k) * root;
            for (int j = 0; j < n; ++j) out(i, j) += vik * eig.vectors(j, k);
        }
    }
    return out;
}

AssignmentResult solve_assignment(const Matrix& cost) {
    const int n = cost.rows();
    if (cost.cols() != n) throw DimensionError("solve_assignment: square cost matrix expected");
    if (n == 0) return {};

    constexpr double inf = std::numeric_limits<double>::infinity();
    // Potentials and matching use a virtual column n as the starting slot.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> match(n + 1, -1), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (int i = 0; i < n; ++i) {
        match[n] = i;
        int j0 = n;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            const double* crow = cost.row_ptr(i0);
            const double u0 = u[i0];
            double delta = inf;
            int j1 = -1;
            for (int j = 0; j < n; ++j) {
                if (used[j]) continue;
                const double cur = crow[j] - u0 - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != -1);
        // Unwind the augmenting path.
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != n);
    }

    AssignmentResult result;
    result.col_of_row.assign(n, -1);
    for (int j = 0; j < n; ++j)
        if (match[j] >= 0) result.col_of_row[match[j]] = j;
    for (int i = 0; i < n; ++i) result.total_cost += cost(i, result.col_of_row[i]);
    return result;
}

}  // namespace ganlab
