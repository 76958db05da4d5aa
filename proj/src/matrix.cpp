#include "ganlab/matrix.hpp"

#include <cmath>
#include <utility>

#include "ganlab/common.hpp"

namespace ganlab {

Matrix::Matrix(int rows, int cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {
    if (rows < 0 || cols < 0) throw DimensionError("matrix dimensions must be non-negative");
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows < 0 || cols < 0) throw DimensionError("matrix dimensions must be non-negative");
    if (data_.size() != static_cast<std::size_t>(rows) * cols)
        throw DimensionError("matrix data length does not match rows*cols");
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix Matrix::transposed() const {
    Matrix out(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (!same_shape(other)) throw DimensionError("matrix += shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (!same_shape(other)) throw DimensionError("matrix -= shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

}  // namespace ganlab
