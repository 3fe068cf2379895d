#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ddlab {

/// Dense row-major matrix of doubles. The single numeric carrier for
/// batches, weights, activations and class-activation matrices.
/// Values are immutable once a matrix is handed out by an operation;
/// sharing read-only across threads is safe.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> flat() const { return {data_.data(), data_.size()}; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool all_finite() const;

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// a (n x m) times b (m x p). Throws DimensionError on mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);

/// transpose(a) times b, without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// a times transpose(b), without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// Outer product u v^T of two non-empty vectors: (i,j) = u_i * v_j.
Matrix outer(std::span<const double> u, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// Flatten both operands and return dot/(|a||b|), in [-1, 1] up to 1e-12.
/// Shapes must match (DimensionError); an all-zero operand has no defined
/// similarity (ValueError).
double cosine_similarity(const Matrix& a, const Matrix& b);

}  // namespace ddlab
