#include "sfl/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sfl {

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const Vector& x, Vector& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: dimension mismatch");
    Matrix c(a.rows(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            double* crow = c.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Matrix gram_style(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("gram_style: dimension mismatch");
    Matrix c(a.cols(), b.cols(), 0.0);
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* crow = c.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aki * brow[j];
        }
    }
    return c;
}

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += arow[j] * x[j];
        y[i] = s;
    }
    return y;
}

double frobenius(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

double frobenius_diff(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        double d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    return std::sqrt(s);
}

namespace {

// Householder reduction of a symmetric matrix to tridiagonal form, JAMA tred2
// lineage. The transform is kept TRANSPOSED (w = V^T, eigenvector directions
// in rows) so the hot inner loops walk contiguous memory; callers re-transpose
// when extracting columns. d holds the diagonal, e the subdiagonal in
// e[1..n-1] on exit.
void tridiagonalize(Matrix& w, Vector& d, Vector& e) {
    const std::size_t n = w.rows();
    for (std::size_t j = 0; j < n; ++j) d[j] = w(j, n - 1);

    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t l = i - 1;
        double scale = 0.0, h = 0.0;
        for (std::size_t k = 0; k < i; ++k) scale += std::fabs(d[k]);
        if (scale == 0.0) {
            e[i] = d[l];
            for (std::size_t j = 0; j < i; ++j) {
                d[j] = w(j, l);
                w(j, i) = 0.0;
                w(i, j) = 0.0;
            }
        } else {
            for (std::size_t k = 0; k < i; ++k) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[l];
            double g = (f > 0.0) ? -std::sqrt(h) : std::sqrt(h);
            e[i] = scale * g;
            h -= f * g;
            d[l] = f - g;
            for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                w(i, j) = f;
                g = e[j] + w(j, j) * f;
                const double* wrow = w.row(j);
                for (std::size_t k = j + 1; k <= l; ++k) {
                    g += wrow[k] * d[k];
                    e[k] += wrow[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            const double hh = f / (h + h);
            for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                g = e[j];
                double* wrow = w.row(j);
                for (std::size_t k = j; k <= l; ++k) wrow[k] -= f * e[k] + g * d[k];
                d[j] = w(j, l);
                w(j, i) = 0.0;
            }
        }
        d[i] = h;
    }

    // accumulate transformations
    for (std::size_t i = 0; i + 1 < n; ++i) {
        w(i, n - 1) = w(i, i);
        w(i, i) = 1.0;
        const double h = d[i + 1];
        const double* wnext = w.row(i + 1);
        if (h != 0.0) {
            for (std::size_t k = 0; k <= i; ++k) d[k] = wnext[k] / h;
            for (std::size_t j = 0; j <= i; ++j) {
                double g = 0.0;
                double* wrow = w.row(j);
                for (std::size_t k = 0; k <= i; ++k) g += wnext[k] * wrow[k];
                for (std::size_t k = 0; k <= i; ++k) wrow[k] -= g * d[k];
            }
        }
        for (std::size_t k = 0; k <= i; ++k) w(i + 1, k) = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
        d[j] = w(j, n - 1);
        w(j, n - 1) = 0.0;
    }
    w(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

// Implicit-shift QL on a symmetric tridiagonal, rotations accumulated into the
// transposed transform (Numerical Recipes tqli lineage). A rotation touches
// two adjacent rows of w, both contiguous.
void ql_implicit(Matrix& w, Vector& d, Vector& e) {
    const std::size_t n = w.rows();
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
        std::size_t iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 50) throw std::runtime_error("symmetric_eigen: QL failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i = m; i-- > l;) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    double* lo = w.row(i);
                    double* hi = w.row(i + 1);
                    for (std::size_t k = 0; k < n; ++k) {
                        f = hi[k];
                        hi[k] = s * lo[k] + c * f;
                        lo[k] = c * lo[k] - s * f;
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace

EigenResult symmetric_eigen(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("symmetric_eigen: not square");
    const std::size_t n = a.rows();
    EigenResult res;
    res.values.assign(n, 0.0);
    res.vectors = a;
    if (n == 0) return res;
    if (n == 1) {
        res.values[0] = a(0, 0);
        res.vectors(0, 0) = 1.0;
        return res;
    }

    // the workers keep the transform transposed (rows are eigenvectors);
    // the symmetric input is its own transpose so no pre-pass is needed
    Vector d(n, 0.0), e(n, 0.0);
    tridiagonalize(res.vectors, d, e);
    ql_implicit(res.vectors, d, e);

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return d[i] < d[j]; });

    Matrix sorted(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        res.values[j] = d[idx[j]];
        for (std::size_t i = 0; i < n; ++i) sorted(i, j) = res.vectors(idx[j], i);
    }

    // sign convention: first entry above 1e-12 * max|u| made positive
    for (std::size_t j = 0; j < n; ++j) {
        double amax = 0.0;
        for (std::size_t i = 0; i < n; ++i) amax = std::max(amax, std::fabs(sorted(i, j)));
        const double thresh = 1e-12 * amax;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::fabs(sorted(i, j)) > thresh) {
                if (sorted(i, j) < 0.0)
                    for (std::size_t k = 0; k < n; ++k) sorted(k, j) = -sorted(k, j);
                break;
            }
        }
    }
    res.vectors = std::move(sorted);
    return res;
}

Vector solve_linear(Matrix a, Vector b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_linear: dimension mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::fabs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::fabs(a(r, col));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) throw std::runtime_error("solve_linear: singular matrix");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            std::swap(b[col], b[piv]);
        }
        const double apc = a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / apc;
            if (f == 0.0) continue;
            a(r, col) = 0.0;
            for (std::size_t j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    Vector x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

Vector solve_least_squares(const Matrix& a, const Vector& b) {
    Matrix ata = gram_style(a, a);
    Vector atb(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) atb[j] += arow[j] * b[i];
    }
    return solve_linear(std::move(ata), std::move(atb));
}

}  // namespace sfl
