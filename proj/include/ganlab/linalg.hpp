#pragma once

#include <vector>

#include "ganlab/matrix.hpp"

namespace ganlab {

struct SymmetricEigen {
    std::vector<double> values;  // ascending
    Matrix vectors;              // columns are eigenvectors, same order
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Deterministic;
// accurate to ~1e-14 relative for the small dimensions used here (d <= 64).
SymmetricEigen eigen_symmetric(const Matrix& a);

// Symmetric positive-semidefinite square root via eigendecomposition.
// Eigenvalues below `clip` are treated as zero.
Matrix sqrt_psd(const Matrix& a, double clip = 1e-10);

struct AssignmentResult {
    std::vector<int> col_of_row;  // matching, row i -> col_of_row[i]
    double total_cost = 0.0;
};

// Exact minimum-cost perfect matching on a square cost matrix, shortest
// augmenting path with potentials, O(n^3).
AssignmentResult solve_assignment(const Matrix& cost);

}  // namespace ganlab
