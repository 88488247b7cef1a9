// Minimal dense row-major matrix of doubles. The models here are small
// (hundreds by hundreds at most), so plain loops are fast enough and keep
// the numerics easy to audit.

#ifndef MIMAX_MATRIX_HPP
#define MIMAX_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace mimax {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double &operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    double *row(std::size_t i) { return a.data() + i * cols; }
    const double *row(std::size_t i) const { return a.data() + i * cols; }

    std::size_t size() const { return a.size(); }

    void fill(double v) { a.assign(rows * cols, v); }

    bool same_shape(const Matrix &o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const Matrix &o) const {
        return rows == o.rows && cols == o.cols && a == o.a;
    }
};

// out[0..rows) += M v  (v has length cols)
inline void matvec_acc(const Matrix &m, const double *v, double *out) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double *r = m.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) s += r[j] * v[j];
        out[i] += s;
    }
}

// out[0..cols) += M^T v  (v has length rows)
inline void matvec_t_acc(const Matrix &m, const double *v, double *out) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double *r = m.row(i);
        const double vi = v[i];
        if (vi == 0.0) continue;
        for (std::size_t j = 0; j < m.cols; ++j) out[j] += vi * r[j];
    }
}

// M += u v^T  (u has length rows, v has length cols)
inline void outer_acc(Matrix &m, const double *u, const double *v) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        double *r = m.row(i);
        const double ui = u[i];
        if (ui == 0.0) continue;
        for (std::size_t j = 0; j < m.cols; ++j) r[j] += ui * v[j];
    }
}

inline double l2_norm_sq(const Matrix &m) {
    double s = 0.0;
    for (double v : m.a) s += v * v;
    return s;
}

inline double max_abs(const Matrix &m) {
    double s = 0.0;
    for (double v : m.a) s = std::max(s, std::fabs(v));
    return s;
}

}  // namespace mimax

#endif  // MIMAX_MATRIX_HPP
