#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "xaudit/error.hpp"

namespace xaudit {

// Row-major dense matrix, just big enough for the weighted least-squares
// solves in the explainers (k is the feature count, never more than a few
// dozen).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Solves A x = b in place via Gaussian elimination with partial pivoting.
// Throws InvalidArgument on a numerically singular system.
inline std::vector<double> solve_linear(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw InvalidArgument("solve_linear: shape mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::fabs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::fabs(a(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best < 1e-13) throw InvalidArgument("solve_linear: singular system");
        if (pivot != col) {
            for (std::size_t c = col; c < n; ++c) std::swap(a(col, c), a(pivot, c));
            std::swap(b[col], b[pivot]);
        }
        const double inv = 1.0 / a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a(r, col) * inv;
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a(r, c) -= factor * a(col, c);
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= a(ri, c) * x[c];
        x[ri] = acc / a(ri, ri);
    }
    return x;
}

// Weighted ridge regression: minimizes sum_i w_i (y_i - x_i . beta)^2 +
// ridge * |beta|^2 over the columns of the design matrix. The intercept, if
// wanted, must be a column of ones (and is then also ridge-penalized only
// if penalize_all is set).
inline std::vector<double> weighted_ridge(const Matrix& design, const std::vector<double>& y,
                                          const std::vector<double>& w, double ridge,
                                          bool penalize_intercept_col0 = true) {
    const std::size_t m = design.rows();
    const std::size_t k = design.cols();
    if (y.size() != m || w.size() != m) throw InvalidArgument("weighted_ridge: shape mismatch");
    Matrix ata(k, k);
    std::vector<double> atb(k, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double wi = w[i];
        if (wi == 0.0) continue;
        for (std::size_t a = 0; a < k; ++a) {
            const double va = design(i, a) * wi;
            atb[a] += va * y[i];
            for (std::size_t b = a; b < k; ++b) ata(a, b) += va * design(i, b);
        }
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < a; ++b) ata(a, b) = ata(b, a);
        if (penalize_intercept_col0 || a != 0) ata(a, a) += ridge;
    }
    return solve_linear(ata, atb);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l1_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::fabs(x);
    return s;
}

inline double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace xaudit
