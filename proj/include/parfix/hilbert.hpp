#pragma once

// Dense vectors and matrices over R^n with the Euclidean inner product.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parfix/errors.hpp"

namespace parfix {

namespace detail {

inline void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw non_finite_error(std::string(what) + ": non-finite coordinate");
        }
    }
}

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw dimension_error(std::string(what) + ": dimension mismatch (" +
                              std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

} // namespace detail

/// A point of R^n. Immutable after construction; every coordinate is finite.
class Vector {
public:
    Vector() = default;

    explicit Vector(std::vector<double> coords) : coords_(std::move(coords)) {
        detail::require_finite(coords_, "Vector");
    }

    Vector(std::initializer_list<double> coords) : Vector(std::vector<double>(coords)) {}

    static Vector zeros(std::size_t dim) { return Vector(std::vector<double>(dim, 0.0)); }

    std::size_t dim() const noexcept { return coords_.size(); }
    bool empty() const noexcept { return coords_.empty(); }

    double operator[](std::size_t i) const noexcept { return coords_[i]; }
    std::span<const double> coords() const noexcept { return coords_; }
    const std::vector<double>& values() const noexcept { return coords_; }

    auto begin() const noexcept { return coords_.begin(); }
    auto end() const noexcept { return coords_.end(); }

    friend bool operator==(const Vector&, const Vector&) = default;

private:
    std::vector<double> coords_;
};

inline double inner(const Vector& a, const Vector& b) {
    detail::require_same_dim(a.dim(), b.dim(), "inner");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_squared(const Vector& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

inline double norm(const Vector& a) { return std::sqrt(norm_squared(a)); }

/// alpha*a + beta*b, componentwise.
inline Vector axpby(double alpha, const Vector& a, double beta, const Vector& b) {
    detail::require_same_dim(a.dim(), b.dim(), "axpby");
    std::vector<double> out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) out[i] = alpha * a[i] + beta * b[i];
    return Vector(std::move(out));
}

inline Vector operator+(const Vector& a, const Vector& b) { return axpby(1.0, a, 1.0, b); }
inline Vector operator-(const Vector& a, const Vector& b) { return axpby(1.0, a, -1.0, b); }

inline Vector operator*(double s, const Vector& a) {
    std::vector<double> out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) out[i] = s * a[i];
    return Vector(std::move(out));
}

inline double distance(const Vector& a, const Vector& b) {
    detail::require_same_dim(a.dim(), b.dim(), "distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
    detail::require_same_dim(a.dim(), b.dim(), "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Dense row-major real matrix.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw dimension_error("Matrix: data size does not match rows*cols");
        }
        detail::require_finite(data_, "Matrix");
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r ? rows.front().size() : 0;
        std::vector<double> data;
        data.reserve(r * c);
        for (const auto& row : rows) {
            if (row.size() != c) throw dimension_error("Matrix: ragged rows");
            data.insert(data.end(), row.begin(), row.end());
        }
        return Matrix(r, c, std::move(data));
    }

    static Matrix identity(std::size_t n) {
        std::vector<double> data(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) data[i * n + i] = 1.0;
        return Matrix(n, n, std::move(data));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::vector<std::vector<double>> to_rows() const {
        std::vector<std::vector<double>> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            out[r].assign(data_.begin() + r * cols_, data_.begin() + (r + 1) * cols_);
        }
        return out;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Vector operator*(const Matrix& m, const Vector& x) {
    detail::require_same_dim(m.cols(), x.dim(), "Matrix*Vector");
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) s += m(r, c) * x[c];
        out[r] = s;
    }
    return Vector(std::move(out));
}

/// Largest singular value by power iteration on A^T A.
inline double spectral_norm(const Matrix& m, double tol = 1e-12, int max_iters = 10000) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    // Deterministic start with every coordinate nonzero.
    std::vector<double> v(m.cols());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i);
    double sigma2 = 0.0;
    std::vector<double> av(m.rows());
    for (int it = 0; it < max_iters; ++it) {
        double vn = 0.0;
        for (double c : v) vn += c * c;
        vn = std::sqrt(vn);
        if (vn == 0.0) return 0.0;
        for (double& c : v) c /= vn;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < m.cols(); ++c) s += m(r, c) * v[c];
            av[r] = s;
        }
        std::vector<double> w(m.cols(), 0.0);
        for (std::size_t c = 0; c < m.cols(); ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, c) * av[r];
            w[c] = s;
        }
        double next = 0.0;
        for (std::size_t c = 0; c < w.size(); ++c) next += w[c] * v[c];
        v = std::move(w);
        if (std::abs(next - sigma2) <= tol * std::max(1.0, next)) {
            sigma2 = next;
            break;
        }
        sigma2 = next;
    }
    return std::sqrt(std::max(sigma2, 0.0));
}

} // namespace parfix
