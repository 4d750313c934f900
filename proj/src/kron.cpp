#include "pairkrr/kron.hpp"

#include "pairkrr/linalg.hpp"
#include "pairkrr/parallel.hpp"

#include <stdexcept>
#include <string>

namespace pairkrr {

std::vector<double> vec(const DenseMatrix& m) {
    std::vector<double> out(m.rows() * m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) out[j * m.rows() + i] = m(i, j);
    return out;
}

DenseMatrix unvec(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    if (v.size() != rows * cols)
        throw std::invalid_argument("unvec: vector length " + std::to_string(v.size()) +
                                    " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
    DenseMatrix m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) m(i, j) = v[j * rows + i];
    return m;
}

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
    const std::size_t ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
    DenseMatrix c(ra * rb, ca * cb);
    parallel::parallel_for(ra, [&](std::size_t i) {
        for (std::size_t k = 0; k < rb; ++k) {
            double* crow = c.data() + (i * rb + k) * ca * cb;
            const double* brow = b.data() + k * cb;
            for (std::size_t j = 0; j < ca; ++j) {
                const double aij = a(i, j);
                double* block = crow + j * cb;
                for (std::size_t l = 0; l < cb; ++l) block[l] = aij * brow[l];
            }
        }
    });
    return c;
}

DenseMatrix apply_kron_vec(const DenseMatrix& n, const DenseMatrix& m, const DenseMatrix& x) {
    if (m.cols() != x.rows() || x.cols() != n.rows())
        throw std::invalid_argument("apply_kron_vec: dimensions not conformable for M*X*N");
    return matmul(matmul(m, x), n);
}

} // namespace pairkrr
