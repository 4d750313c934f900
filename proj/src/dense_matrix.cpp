#include "pairkrr/dense_matrix.hpp"

#include "pairkrr/common.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pairkrr {

namespace {
void check_dims(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("DenseMatrix dimensions must be >= 1, got " +
                                    std::to_string(rows) + "x" + std::to_string(cols));
}
} // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    check_dims(rows, cols);
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    check_dims(rows, cols);
    if (data_.size() != rows * cols)
        throw std::invalid_argument("DenseMatrix: entry count " + std::to_string(data_.size()) +
                                    " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    check_dims(rows_, cols_);
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw std::invalid_argument("DenseMatrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

bool DenseMatrix::is_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void DenseMatrix::require_finite(const char* what) const {
    if (!is_finite()) throw data_error(std::string(what) + " contains a non-finite entry");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::ones(std::size_t rows, std::size_t cols) {
    return DenseMatrix(rows, cols, 1.0);
}

bool same_shape(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

namespace {
void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
    if (!same_shape(a, b))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}
} // namespace

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
    require_same_shape(a, b, "operator+");
    DenseMatrix c(a.rows(), a.cols());
    for (std::size_t k = 0; k < a.size(); ++k) c.data()[k] = a.data()[k] + b.data()[k];
    return c;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
    require_same_shape(a, b, "operator-");
    DenseMatrix c(a.rows(), a.cols());
    for (std::size_t k = 0; k < a.size(); ++k) c.data()[k] = a.data()[k] - b.data()[k];
    return c;
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
    DenseMatrix c(a.rows(), a.cols());
    for (std::size_t k = 0; k < a.size(); ++k) c.data()[k] = s * a.data()[k];
    return c;
}

double max_abs(const DenseMatrix& a) {
    double m = 0.0;
    for (double v : a.entries()) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::fabs(a.data()[k] - b.data()[k]));
    return m;
}

double frobenius_norm(const DenseMatrix& a) {
    double s = 0.0;
    for (double v : a.entries()) s += v * v;
    return std::sqrt(s);
}

} // namespace pairkrr
