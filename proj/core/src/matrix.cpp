#include "ddlab/matrix.hpp"

#include <cmath>
#include <string>

#include "ddlab/error.hpp"

namespace ddlab {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("from_rows: ragged rows");
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

static std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: " + shape_str(a) + " * " + shape_str(b));
    const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
    Matrix c(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = c.data() + i * p;
        const double* ai = a.data() + i * m;
        for (std::size_t k = 0; k < m; ++k) {
            const double aik = ai[k];
            const double* bk = b.data() + k * p;
            for (std::size_t j = 0; j < p; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw DimensionError("matmul_tn: " + shape_str(a) + "^T * " + shape_str(b));
    const std::size_t n = a.cols(), m = a.rows(), p = b.cols();
    Matrix c(n, p);
    for (std::size_t k = 0; k < m; ++k) {
        const double* ak = a.data() + k * n;
        const double* bk = b.data() + k * p;
        for (std::size_t i = 0; i < n; ++i) {
            const double aki = ak[i];
            double* ci = c.data() + i * p;
            for (std::size_t j = 0; j < p; ++j) ci[j] += aki * bk[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw DimensionError("matmul_nt: " + shape_str(a) + " * " + shape_str(b) + "^T");
    const std::size_t n = a.rows(), m = a.cols(), p = b.rows();
    Matrix c(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.data() + i * m;
        double* ci = c.data() + i * p;
        for (std::size_t j = 0; j < p; ++j) ci[j] = dot({ai, m}, b.row(j));
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Matrix outer(std::span<const double> u, std::span<const double> v) {
    if (u.empty() || v.empty()) throw ValueError("outer: empty vector");
    Matrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        double* mi = m.data() + i * v.size();
        for (std::size_t j = 0; j < v.size(); ++j) mi[j] = u[i] * v[j];
    }
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

double cosine_similarity(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b))
        throw DimensionError("cosine_similarity: " + shape_str(a) + " vs " + shape_str(b));
    const double na = norm2(a.flat());
    const double nb = norm2(b.flat());
    if (na == 0.0 || nb == 0.0)
        throw ValueError("cosine_similarity: all-zero operand has no defined similarity");
    double s = dot(a.flat(), b.flat()) / (na * nb);
    if (s > 1.0) s = 1.0;
    if (s < -1.0) s = -1.0;
    return s;
}

}  // namespace ddlab
