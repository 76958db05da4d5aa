#pragma once

#include <span>
#include <vector>

namespace ganlab {

// Dense row-major matrix of doubles. The one carrier type for sample
// batches, network parameters and gradients.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols);  // zero-filled
    Matrix(int rows, int cols, std::vector<double> data);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    double* row_ptr(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
    const double* row_ptr(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }
    std::span<const double> row(int r) const { return {row_ptr(r), static_cast<std::size_t>(cols_)}; }
    std::span<double> row(int r) { return {row_ptr(r), static_cast<std::size_t>(cols_)}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const;
    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    Matrix transposed() const;

    // Elementwise in-place helpers.
    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    bool operator==(const Matrix& other) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

}  // namespace ganlab
