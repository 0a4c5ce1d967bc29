#pragma once

#include <algorithm>
#include <initializer_list>
#include <ostream>
#include <vector>

#include "rational.hpp"

namespace sforms {

// Dense rational matrix, row-major.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : r_(rows), c_(cols), a_(rows * cols) {}
    Matrix(std::initializer_list<std::initializer_list<Rational>> rows) {
        r_ = rows.size();
        c_ = r_ ? rows.begin()->size() : 0;
        for (const auto& row : rows) {
            if (row.size() != c_) throw DimensionError("ragged matrix literal");
            for (const auto& x : row) a_.push_back(x);
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    static Matrix diagonal(const Vector& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    static Matrix from_columns(const std::vector<Vector>& cols) {
        if (cols.empty()) return {};
        Matrix m(cols[0].size(), cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (cols[j].size() != m.r_) throw DimensionError("column length mismatch");
            for (std::size_t i = 0; i < m.r_; ++i) m(i, j) = cols[j][i];
        }
        return m;
    }

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }
    bool empty() const { return a_.empty(); }
    bool square() const { return r_ == c_; }

    Rational& operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }

    Vector column(std::size_t j) const {
        Vector v(r_);
        for (std::size_t i = 0; i < r_; ++i) v[i] = (*this)(i, j);
        return v;
    }

    void set_column(std::size_t j, const Vector& v) {
        for (std::size_t i = 0; i < r_; ++i) (*this)(i, j) = v[i];
    }

    Vector row(std::size_t i) const { return Vector(a_.begin() + i * c_, a_.begin() + (i + 1) * c_); }

    const std::vector<Rational>& data() const { return a_; }

    Matrix transpose() const {
        Matrix t(c_, r_);
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend Matrix operator*(const Matrix& x, const Matrix& y) {
        if (x.c_ != y.r_) throw DimensionError("matrix product shape mismatch");
        Matrix z(x.r_, y.c_);
        Rational t;
        for (std::size_t i = 0; i < x.r_; ++i)
            for (std::size_t k = 0; k < x.c_; ++k) {
                const Rational& xik = x(i, k);
                if (xik == 0) continue;
                for (std::size_t j = 0; j < y.c_; ++j) {
                    t = xik * y(k, j);
                    z(i, j) += t;
                }
            }
        return z;
    }

    friend Vector operator*(const Matrix& x, const Vector& v) {
        if (x.c_ != v.size()) throw DimensionError("matrix-vector shape mismatch");
        Vector w(x.r_);
        for (std::size_t i = 0; i < x.r_; ++i)
            for (std::size_t k = 0; k < x.c_; ++k) w[i] += x(i, k) * v[k];
        return w;
    }

    friend Matrix operator+(const Matrix& x, const Matrix& y) {
        if (x.r_ != y.r_ || x.c_ != y.c_) throw DimensionError("matrix sum shape mismatch");
        Matrix z = x;
        for (std::size_t i = 0; i < z.a_.size(); ++i) z.a_[i] += y.a_[i];
        return z;
    }

    friend Matrix operator-(const Matrix& x, const Matrix& y) {
        if (x.r_ != y.r_ || x.c_ != y.c_) throw DimensionError("matrix difference shape mismatch");
        Matrix z = x;
        for (std::size_t i = 0; i < z.a_.size(); ++i) z.a_[i] -= y.a_[i];
        return z;
    }

    friend Matrix operator*(const Rational& s, const Matrix& x) {
        Matrix z = x;
        for (auto& e : z.a_) e *= s;
        return z;
    }

    Matrix operator-() const { return Rational(-1) * (*this); }

    friend bool operator==(const Matrix& x, const Matrix& y) {
        return x.r_ == y.r_ && x.c_ == y.c_ && x.a_ == y.a_;
    }
    friend bool operator!=(const Matrix& x, const Matrix& y) { return !(x == y); }

    // lexicographic, for use as a map key
    friend bool operator<(const Matrix& x, const Matrix& y) {
        if (x.r_ != y.r_) return x.r_ < y.r_;
        if (x.c_ != y.c_) return x.c_ < y.c_;
        return std::lexicographical_compare(x.a_.begin(), x.a_.end(), y.a_.begin(), y.a_.end());
    }

    bool is_integral() const {
        return std::all_of(a_.begin(), a_.end(), [](const Rational& q) { return q.get_den() == 1; });
    }

    bool is_symmetric() const {
        if (!square()) return false;
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t j = i + 1; j < c_; ++j)
                if ((*this)(i, j) != (*this)(j, i)) return false;
        return true;
    }

    Rational det() const {
        if (!square()) throw DimensionError("determinant of a non-square matrix");
        Matrix m = *this;
        Rational d = 1;
        for (std::size_t k = 0; k < r_; ++k) {
            std::size_t piv = k;
            while (piv < r_ && m(piv, k) == 0) ++piv;
            if (piv == r_) return 0;
            if (piv != k) {
                for (std::size_t j = 0; j < c_; ++j) std::swap(m(k, j), m(piv, j));
                d = -d;
            }
            d *= m(k, k);
            for (std::size_t i = k + 1; i < r_; ++i) {
                if (m(i, k) == 0) continue;
                Rational f = m(i, k) / m(k, k);
                for (std::size_t j = k; j < c_; ++j) m(i, j) -= f * m(k, j);
            }
        }
        return d;
    }

    std::size_t rank() const {
        Matrix m = *this;
        std::size_t rk = 0;
        for (std::size_t col = 0; col < c_ && rk < r_; ++col) {
            std::size_t piv = rk;
            while (piv < r_ && m(piv, col) == 0) ++piv;
            if (piv == r_) continue;
            for (std::size_t j = 0; j < c_; ++j) std::swap(m(rk, j), m(piv, j));
            for (std::size_t i = 0; i < r_; ++i) {
                if (i == rk || m(i, col) == 0) continue;
                Rational f = m(i, col) / m(rk, col);
                for (std::size_t j = col; j < c_; ++j) m(i, j) -= f * m(rk, j);
            }
            ++rk;
        }
        return rk;
    }

    Matrix inverse() const {
        if (!square()) throw DimensionError("inverse of a non-square matrix");
        const std::size_t n = r_;
        Matrix m = *this, inv = identity(n);
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t piv = k;
            while (piv < n && m(piv, k) == 0) ++piv;
            if (piv == n) throw SingularMatrix("matrix is singular");
            if (piv != k)
                for (std::size_t j = 0; j < n; ++j) {
                    std::swap(m(k, j), m(piv, j));
                    std::swap(inv(k, j), inv(piv, j));
                }
            Rational s = 1 / m(k, k);
            for (std::size_t j = 0; j < n; ++j) {
                m(k, j) *= s;
                inv(k, j) *= s;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (i == k || m(i, k) == 0) continue;
                Rational f = m(i, k);
                for (std::size_t j = 0; j < n; ++j) {
                    m(i, j) -= f * m(k, j);
                    inv(i, j) -= f * inv(k, j);
                }
            }
        }
        return inv;
    }

    // block diagonal x ⊕ y
    friend Matrix direct_sum(const Matrix& x, const Matrix& y) {
        Matrix z(x.r_ + y.r_, x.c_ + y.c_);
        for (std::size_t i = 0; i < x.r_; ++i)
            for (std::size_t j = 0; j < x.c_; ++j) z(i, j) = x(i, j);
        for (std::size_t i = 0; i < y.r_; ++i)
            for (std::size_t j = 0; j < y.c_; ++j) z(x.r_ + i, x.c_ + j) = y(i, j);
        return z;
    }

private:
    std::size_t r_ = 0, c_ = 0;
    std::vector<Rational> a_;
};

inline std::ostream& operator<<(std::ostream& os, const Matrix& m) {
    os << '[';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        os << (i ? ", [" : "[");
        for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << to_string(m(i, j));
        os << ']';
    }
    return os << ']';
}

inline Rational dot(const Vector& x, const Vector& y) {
    if (x.size() != y.size()) throw DimensionError("dot product length mismatch");
    Rational s;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

// xᵀ G y
inline Rational bilinear(const Matrix& g, const Vector& x, const Vector& y) { return dot(x, g * y); }

inline Matrix congruence(const Matrix& g, const Matrix& t) { return t.transpose() * g * t; }

}  // namespace sforms
