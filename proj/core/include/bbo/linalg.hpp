#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace bbo::linalg {

/// Dense row-major matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMatrix identity(std::size_t n);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
std::vector<double> multiply(const DenseMatrix& a, std::span<const double> x);
DenseMatrix transpose(const DenseMatrix& a);
double frobenius_norm(const DenseMatrix& a);
double norm2(std::span<const double> v);

/// 1e-10 * trace(a) / rows.
double default_jitter(const DenseMatrix& a);

/// Lower-triangular L with L * L^T = a + jitter * I.
///
/// Throws NotSquare, NotSymmetric (asymmetry above 1e-12 relative to the
/// largest entry), or NotPositiveDefinite when a pivot is not positive. Pivots
/// below 1e-14 of their diagonal entry count as zero so that exactly singular
/// inputs fail regardless of rounding direction.
DenseMatrix cholesky(const DenseMatrix& a, double jitter);

/// Solves L x = b by forward substitution. Throws SingularDiagonal.
std::vector<double> solve_lower(const DenseMatrix& l, std::span<const double> b);

/// Solves L^T x = b by back substitution, reading only the lower triangle.
std::vector<double> solve_lower_transposed(const DenseMatrix& l, std::span<const double> b);

/// Solves (L L^T) x = b given the factor.
std::vector<double> cholesky_solve(const DenseMatrix& l, std::span<const double> b);

/// Solves (a + jitter * I) x = b through cholesky and two triangular solves.
std::vector<double> solve_spd(const DenseMatrix& a, std::span<const double> b, double jitter);

} // namespace bbo::linalg
