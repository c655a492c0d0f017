#pragma once

#include <cstddef>
#include <vector>

namespace asnn {

// Dense row-major matrix of doubles. All weight and activation math in
// the project runs through this type.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }

    bool operator==(const Matrix& other) const = default;
};

// C = A * B, shapes (m x k) * (k x n).
Matrix matmul(const Matrix& a, const Matrix& b);

// C = A^T * B, shapes (k x m)^T * (k x n) -> (m x n).
Matrix matmul_transpose_a(const Matrix& a, const Matrix& b);

// C = A * B^T, shapes (m x k) * (n x k)^T -> (m x n).
Matrix matmul_transpose_b(const Matrix& a, const Matrix& b);

// In-place variants for hot loops: out is resized if needed and
// overwritten, so step-loop callers reuse one allocation.
void matmul_into(Matrix& out, const Matrix& a, const Matrix& b);
void matmul_transpose_a_into(Matrix& out, const Matrix& a, const Matrix& b);
void matmul_transpose_b_into(Matrix& out, const Matrix& a, const Matrix& b);
void column_sums_into(std::vector<double>& out, const Matrix& m);

// Adds a bias row vector to every row of m in place.
void add_bias_row(Matrix& m, const std::vector<double>& bias);

// Column sums, returned as a vector of length m.cols.
std::vector<double> column_sums(const Matrix& m);

bool all_finite(const Matrix& m);

// Copies the selected rows of src (in the given order) into a new matrix.
Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& row_indices);

}  // namespace asnn
