#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace errsurf {

/// Small dense row-major matrix. Sizes here are tiny (order = number of
/// measured variables plus one), so no attempt at blocking or views.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    static Matrix identity(int order);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    Matrix transposed() const;
    std::vector<double> column(int j) const;

    friend Matrix operator*(const Matrix& a, const Matrix& b);

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

std::vector<double> mat_vec(const Matrix& m, std::span<const double> v);

/// Symmetric matrix with packed upper-triangular storage, so the two mirror
/// entries are one and the same value.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int order)
        : order_(order), data_(static_cast<std::size_t>(order) * (order + 1) / 2, 0.0) {}

    int order() const noexcept { return order_; }

    double operator()(int i, int j) const { return data_[pack(i, j)]; }
    void set(int i, int j, double value) { data_[pack(i, j)] = value; }

    double max_abs() const;
    Matrix dense() const;

    /// Principal submatrix on rows/columns [0, k).
    SymMatrix leading_block(int k) const;

private:
    std::size_t pack(int i, int j) const {
        if (i > j) std::swap(i, j);
        // row-major upper triangle: row i starts after i full rows minus the
        // skipped lower entries
        const int row_start = i * order_ - i * (i - 1) / 2;
        return static_cast<std::size_t>(row_start + (j - i));
    }

    int order_ = 0;
    std::vector<double> data_;
};

}  // namespace errsurf
