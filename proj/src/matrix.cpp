#include "asnn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asnn {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != rows * cols) {
        throw std::invalid_argument("Matrix: data length does not match rows * cols");
    }
}

namespace {

void reshape(Matrix& out, std::size_t rows, std::size_t cols) {
    out.rows = rows;
    out.cols = cols;
    out.data.resize(rows * cols);
}

}  // namespace

// The into-variants require out to be distinct from a and b; every call
// site in this project passes dedicated workspace buffers.
void matmul_into(Matrix& out, const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw std::invalid_argument("matmul: inner dimensions do not match");
    }
    reshape(out, a.rows, b.cols);
    std::fill(out.data.begin(), out.data.end(), 0.0);
    const std::size_t n = b.cols;
    // i-k-j order keeps the inner loop contiguous in both B and C.
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* __restrict arow = a.row_ptr(i);
        double* __restrict crow = out.row_ptr(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            const double* __restrict brow = b.row_ptr(k);
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
}

void matmul_transpose_a_into(Matrix& out, const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) {
        throw std::invalid_argument("matmul_transpose_a: row counts do not match");
    }
    reshape(out, a.cols, b.cols);
    std::fill(out.data.begin(), out.data.end(), 0.0);
    const std::size_t n = b.cols;
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* __restrict arow = a.row_ptr(k);
        const double* __restrict brow = b.row_ptr(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            double* __restrict crow = out.row_ptr(i);
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += aki * brow[j];
            }
        }
    }
}

void matmul_transpose_b_into(Matrix& out, const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) {
        throw std::invalid_argument("matmul_transpose_b: column counts do not match");
    }
    reshape(out, a.rows, b.rows);
    const std::size_t n = a.cols;
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* __restrict arow = a.row_ptr(i);
        double* __restrict crow = out.row_ptr(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* __restrict brow = b.row_ptr(j);
            double sum = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                sum += arow[k] * brow[k];
            }
            crow[j] = sum;
        }
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out;
    matmul_into(out, a, b);
    return out;
}

Matrix matmul_transpose_a(const Matrix& a, const Matrix& b) {
    Matrix out;
    matmul_transpose_a_into(out, a, b);
    return out;
}

Matrix matmul_transpose_b(const Matrix& a, const Matrix& b) {
    Matrix out;
    matmul_transpose_b_into(out, a, b);
    return out;
}

void add_bias_row(Matrix& m, const std::vector<double>& bias) {
    if (bias.size() != m.cols) {
        throw std::invalid_argument("add_bias_row: bias length does not match columns");
    }
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* row = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) row[j] += bias[j];
    }
}

void column_sums_into(std::vector<double>& out, const Matrix& m) {
    out.assign(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) out[j] += row[j];
    }
}

std::vector<double> column_sums(const Matrix& m) {
    std::vector<double> sums;
    column_sums_into(sums, m);
    return sums;
}

bool all_finite(const Matrix& m) {
    for (double v : m.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& row_indices) {
    Matrix out(row_indices.size(), src.cols);
    for (std::size_t i = 0; i < row_indices.size(); ++i) {
        if (row_indices[i] >= src.rows) {
            throw std::invalid_argument("gather_rows: row index out of range");
        }
        const double* from = src.row_ptr(row_indices[i]);
        double* to = out.row_ptr(i);
        for (std::size_t j = 0; j < src.cols; ++j) to[j] = from[j];
    }
    return out;
}

}  // namespace asnn
