#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace pairkrr {

/// Dense real matrix, row-major flat storage. Dimensions are fixed at
/// construction and always >= 1 in each direction.
class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& entries() const { return data_; }

    /// Throws data_error if any entry is NaN or infinite.
    void require_finite(const char* what = "matrix") const;
    bool is_finite() const;

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix ones(std::size_t rows, std::size_t cols);

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

bool same_shape(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

/// Largest absolute entry.
double max_abs(const DenseMatrix& a);
/// Largest absolute entrywise difference; shapes must match.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
double frobenius_norm(const DenseMatrix& a);

} // namespace pairkrr
