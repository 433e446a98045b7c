#include "errsurf/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace errsurf {

Matrix Matrix::identity(int order) {
    Matrix m(order, order);
    for (int i = 0; i < order; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

std::vector<double> Matrix::column(int j) const {
    std::vector<double> c(static_cast<std::size_t>(rows_));
    for (int i = 0; i < rows_; ++i) c[static_cast<std::size_t>(i)] = (*this)(i, j);
    return c;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix r(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
        for (int k = 0; k < a.cols_; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
        }
    return r;
}

std::vector<double> mat_vec(const Matrix& m, std::span<const double> v) {
    std::vector<double> r(static_cast<std::size_t>(m.rows()), 0.0);
    for (int i = 0; i < m.rows(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < m.cols(); ++j) acc += m(i, j) * v[static_cast<std::size_t>(j)];
        r[static_cast<std::size_t>(i)] = acc;
    }
    return r;
}

double SymMatrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

Matrix SymMatrix::dense() const {
    Matrix m(order_, order_);
    for (int i = 0; i < order_; ++i)
        for (int j = i; j < order_; ++j) {
            m(i, j) = (*this)(i, j);
            m(j, i) = (*this)(i, j);
        }
    return m;
}

SymMatrix SymMatrix::leading_block(int k) const {
    SymMatrix b(k);
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) b.set(i, j, (*this)(i, j));
    return b;
}

}  // namespace errsurf
