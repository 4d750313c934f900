#include "pairkrr/linalg.hpp"

#include "pairkrr/common.hpp"
#include "pairkrr/parallel.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pairkrr {

namespace {

void require_mul_dims(std::size_t inner_a, std::size_t inner_b, const char* op) {
    if (inner_a != inner_b)
        throw std::invalid_argument(std::string(op) + ": inner dimensions differ (" +
                                    std::to_string(inner_a) + " vs " + std::to_string(inner_b) + ")");
}

// C = A * B with column blocking: a column slab of B stays cache-resident
// across a chunk of output rows. Each C entry accumulates over k in ascending
// order, so serial and parallel runs are bit-identical.
DenseMatrix blocked_ab(const DenseMatrix& a, const DenseMatrix& b) {
    const std::size_t m = a.rows(), n = a.cols(), p = b.cols();
    constexpr std::size_t kColBlock = 96, kRowChunk = 48;
    DenseMatrix c(m, p, 0.0);
    const std::size_t chunks = (m + kRowChunk - 1) / kRowChunk;
    parallel::parallel_for(chunks, [&](std::size_t chunk) {
        const std::size_t i0 = chunk * kRowChunk;
        const std::size_t i1 = std::min(i0 + kRowChunk, m);
        for (std::size_t j0 = 0; j0 < p; j0 += kColBlock) {
            const std::size_t width = std::min(kColBlock, p - j0);
            for (std::size_t i = i0; i < i1; ++i) {
                const double* arow = a.data() + i * n;
                double* cseg = c.data() + i * p + j0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double aik = arow[k];
                    const double* bseg = b.data() + k * p + j0;
                    for (std::size_t j = 0; j < width; ++j) cseg[j] += aik * bseg[j];
                }
            }
        }
    });
    return c;
}

} // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    require_mul_dims(a.cols(), b.rows(), "matmul");
    return blocked_ab(a, b);
}

DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
    require_mul_dims(a.rows(), b.rows(), "matmul_at_b");
    return blocked_ab(transpose(a), b);
}

DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
    require_mul_dims(a.cols(), b.cols(), "matmul_a_bt");
    return blocked_ab(a, transpose(b));
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

DenseMatrix EigenDecomposition::reconstruct() const {
    const std::size_t n = dim();
    DenseMatrix scaled(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scaled(i, j) = vectors(i, j) * values[j];
    return matmul_a_bt(scaled, vectors);
}

namespace {

// Householder reduction to tridiagonal form with accumulation of the
// orthogonal transformation. Classic tred2, zero-indexed; on return `a`
// holds the transformation matrix, d the diagonal, e the subdiagonal.
void tred2(DenseMatrix& a, std::vector<double>& d, std::vector<double>& e) {
    const std::size_t n = a.rows();
    for (std::size_t i = n - 1; i >= 1; --i) {
        const std::size_t l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (std::size_t k = 0; k <= l; ++k) scale += std::fabs(a(i, k));
            if (scale == 0.0) {
                e[i] = a(i, l);
            } else {
                for (std::size_t k = 0; k <= l; ++k) {
                    a(i, k) /= scale;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a(i, l) = f - g;
                // p = A u over the lower triangle, row sweeps only
                const double* u = a.data() + i * n;
                for (std::size_t j = 0; j <= l; ++j) e[j] = 0.0;
                for (std::size_t k = 0; k <= l; ++k) {
                    const double uk = u[k];
                    const double* arow = a.data() + k * n;
                    double sdot = 0.0;
                    for (std::size_t cidx = 0; cidx < k; ++cidx) {
                        sdot += arow[cidx] * u[cidx];
                        e[cidx] += arow[cidx] * uk;
                    }
                    e[k] += sdot + arow[k] * uk;
                }
                f = 0.0;
                for (std::size_t j = 0; j <= l; ++j) {
                    a(j, i) = a(i, j) / h;
                    e[j] /= h;
                    f += e[j] * a(i, j);
                }
                const double hh = f / (h + h);
                for (std::size_t j = 0; j <= l; ++j) {
                    f = a(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (std::size_t k = 0; k <= j; ++k) a(j, k) -= f * e[k] + g * a(i, k);
                }
            }
        } else {
            e[i] = a(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    std::vector<double> gv(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] != 0.0) {
            // gv = u^T Q_sub, then the rank-1 update, all row sweeps
            for (std::size_t j = 0; j < i; ++j) gv[j] = 0.0;
            for (std::size_t k = 0; k < i; ++k) {
                const double f = a(i, k);
                const double* arow = a.data() + k * n;
                for (std::size_t j = 0; j < i; ++j) gv[j] += f * arow[j];
            }
            for (std::size_t k = 0; k < i; ++k) {
                const double s = a(k, i);
                double* arow = a.data() + k * n;
                for (std::size_t j = 0; j < i; ++j) arow[j] -= gv[j] * s;
            }
        }
        d[i] = a(i, i);
        a(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) a(j, i) = a(i, j) = 0.0;
    }
}

// Applies a recorded Givens chain (rotation t acts on rows top-t and top-t+1)
// as one streaming pass; consecutive rotations reuse the shared row while it
// is still in cache.
void apply_rotation_chain(DenseMatrix& zt, std::size_t top, const std::vector<double>& cs,
                          const std::vector<double>& ss, std::size_t count) {
    const std::size_t n = zt.cols();
    for (std::size_t t = 0; t < count; ++t) {
        const std::size_t ii = top - t;
        const double c = cs[t], s = ss[t];
        double* lo = zt.data() + ii * n;
        double* hi = lo + n;
        for (std::size_t j = 0; j < n; ++j) {
            const double f = hi[j];
            hi[j] = s * lo[j] + c * f;
            lo[j] = c * lo[j] - s * f;
        }
    }
}

// Implicit-shift QL iteration on the tridiagonal (d, e) with eigenvector
// accumulation. Classic tql2, held transposed (row ii = vector ii); each
// sweep's scalar recurrence runs first and the rotations are applied as one
// blocked pass.
void tql2(std::vector<double>& d, std::vector<double>& e, DenseMatrix& zt) {
    const std::size_t n = d.size();
    if (n == 1) return;
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    std::vector<double> rot_c(n), rot_s(n);
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= DBL_EPSILON * dd) break;
            }
            if (m != l) {
                if (iter++ == 60) throw numeric_error("sym_eig: QL iteration did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                std::size_t count = 0;
                bool underflow = false;
                for (std::size_t ii = m; ii-- > l;) {
                    double f = s * e[ii];
                    const double b = c * e[ii];
                    r = std::hypot(f, g);
                    e[ii + 1] = r;
                    if (r == 0.0) {
                        d[ii + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[ii + 1] - p;
                    r = (d[ii] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[ii + 1] = g + p;
                    g = c * r - b;
                    rot_c[count] = c;
                    rot_s[count] = s;
                    ++count;
                }
                apply_rotation_chain(zt, m - 1, rot_c, rot_s, count);
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

} // namespace

EigenDecomposition sym_eig(const DenseMatrix& s) {
    if (s.rows() != s.cols())
        throw std::invalid_argument("sym_eig: matrix is not square (" + std::to_string(s.rows()) + "x" +
                                    std::to_string(s.cols()) + ")");
    const std::size_t n = s.rows();
    const double scale = max_abs(s);
    double asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) asym = std::max(asym, std::fabs(s(i, j) - s(j, i)));
    if (asym > 1e-10 * std::max(scale, 1e-300))
        throw std::invalid_argument("sym_eig: input asymmetric beyond tolerance (max deviation " +
                                    std::to_string(asym) + ")");

    DenseMatrix z = s;
    std::vector<double> d(n, 0.0), e(n, 0.0);
    DenseMatrix zt(n, n);
    if (n == 1) {
        d[0] = s(0, 0);
        zt(0, 0) = 1.0;
    } else {
        tred2(z, d, e);
        zt = transpose(z);  // tql2 rotates rows
        tql2(d, e, zt);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });

    EigenDecomposition out{DenseMatrix(n, n), std::vector<double>(n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = d[order[k]];
        const double* row = zt.data() + order[k] * n;
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = row[i];
    }
    return out;
}

LuFactors lu_factor(const DenseMatrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("lu_factor: matrix is not square");
    const std::size_t n = a.rows();
    LuFactors f{a, std::vector<std::size_t>(n)};
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
    DenseMatrix& lu = f.lu;
    const double tol = 8.0 * DBL_EPSILON * static_cast<double>(n) * std::max(max_abs(a), DBL_MIN);

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::fabs(lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::fabs(lu(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best <= tol) throw numeric_error("lu_factor: matrix is singular to working precision");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
        }
        const double pivot = lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double mult = lu(i, k) / pivot;
            lu(i, k) = mult;
            for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= mult * lu(k, j);
        }
    }
    return f;
}

std::vector<double> lu_solve(const LuFactors& f, const std::vector<double>& rhs) {
    const std::size_t n = f.lu.rows();
    if (rhs.size() != n) throw std::invalid_argument("lu_solve: rhs length mismatch");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[f.perm[i]];
    for (std::size_t i = 1; i < n; ++i) {
        double s = x[i];
        for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * x[j];
        x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
        x[i] = s / f.lu(i, i);
    }
    return x;
}

DenseMatrix lu_solve(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("lu_solve: dimension mismatch");
    const LuFactors f = lu_factor(a);
    DenseMatrix x(b.rows(), b.cols());
    std::vector<double> col(b.rows());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
        const std::vector<double> sol = lu_solve(f, col);
        for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = sol[i];
    }
    return x;
}

} // namespace pairkrr
