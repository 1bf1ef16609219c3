#include "bbo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bbo/error.hpp"

namespace bbo::linalg {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            fail(ErrorCode::DimensionMismatch, "ragged matrix initializer");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        fail(ErrorCode::DimensionMismatch, "matrix product shape mismatch");
    }
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

std::vector<double> multiply(const DenseMatrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) {
        fail(ErrorCode::DimensionMismatch, "matrix-vector shape mismatch");
    }
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            s += a(i, j) * x[j];
        }
        y[i] = s;
    }
    return y;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            t(j, i) = a(i, j);
        }
    }
    return t;
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.data()); }

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

double default_jitter(const DenseMatrix& a) {
    if (a.rows() == 0 || a.rows() != a.cols()) {
        fail(ErrorCode::NotSquare, "jitter needs a nonempty square matrix");
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        trace += a(i, i);
    }
    return 1e-10 * trace / static_cast<double>(a.rows());
}

DenseMatrix cholesky(const DenseMatrix& a, double jitter) {
    const std::size_t n = a.rows();
    if (n == 0 || n != a.cols()) {
        fail(ErrorCode::NotSquare, "cholesky needs a nonempty square matrix, got " +
                                       std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }
    if (!(jitter >= 0.0)) {
        fail(ErrorCode::InvalidArgument, "jitter must be nonnegative");
    }
    double scale = 0.0;
    for (double v : a.data()) {
        scale = std::max(scale, std::abs(v));
    }
    const double sym_tol = 1e-12 * scale;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (std::abs(a(i, j) - a(j, i)) > sym_tol) {
                fail(ErrorCode::NotSymmetric, "entries (" + std::to_string(i) + "," +
                                                  std::to_string(j) + ") differ from transpose");
            }
        }
    }

    DenseMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const double diag = a(j, j) + jitter;
        double pivot = diag;
        for (std::size_t k = 0; k < j; ++k) {
            pivot -= l(j, k) * l(j, k);
        }
        if (!(pivot > 1e-14 * std::abs(diag)) || !(pivot > 0.0)) {
            fail(ErrorCode::NotPositiveDefinite,
                 "pivot " + std::to_string(j) + " is not positive after jitter");
        }
        const double ljj = std::sqrt(pivot);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                s -= l(i, k) * l(j, k);
            }
            l(i, j) = s / ljj;
        }
    }
    return l;
}

std::vector<double> solve_lower(const DenseMatrix& l, std::span<const double> b) {
    const std::size_t n = l.rows();
    if (n != l.cols() || n != b.size()) {
        fail(ErrorCode::DimensionMismatch, "triangular solve shape mismatch");
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = l(i, i);
        if (d == 0.0) {
            fail(ErrorCode::SingularDiagonal, "zero diagonal at row " + std::to_string(i));
        }
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) {
            s -= l(i, k) * x[k];
        }
        x[i] = s / d;
    }
    return x;
}

std::vector<double> solve_lower_transposed(const DenseMatrix& l, std::span<const double> b) {
    const std::size_t n = l.rows();
    if (n != l.cols() || n != b.size()) {
        fail(ErrorCode::DimensionMismatch, "triangular solve shape mismatch");
    }
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        const double d = l(ii, ii);
        if (d == 0.0) {
            fail(ErrorCode::SingularDiagonal, "zero diagonal at row " + std::to_string(ii));
        }
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) {
            s -= l(k, ii) * x[k];
        }
        x[ii] = s / d;
    }
    return x;
}

std::vector<double> cholesky_solve(const DenseMatrix& l, std::span<const double> b) {
    return solve_lower_transposed(l, solve_lower(l, b));
}

std::vector<double> solve_spd(const DenseMatrix& a, std::span<const double> b, double jitter) {
    return cholesky_solve(cholesky(a, jitter), b);
}

} // namespace bbo::linalg
