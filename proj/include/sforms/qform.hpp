#pragma once

#include <map>
#include <string>
#include <tuple>
#include <utility>

#include "arith.hpp"
#include "matrix.hpp"

namespace sforms {

struct Signature {
    int pos = 0, neg = 0, null = 0;
    friend bool operator==(const Signature&, const Signature&) = default;
};

// Congruence diagonalization over Q: returns D and invertible B with Bᵀ·G·B = diag(D).
struct Diagonalization {
    Vector diag;
    Matrix basis;
};

inline Diagonalization rational_diagonalize(const Matrix& g0) {
    if (!g0.is_symmetric()) throw DimensionError("gram matrix must be square and symmetric");
    const std::size_t n = g0.rows();
    Matrix g = g0, b = Matrix::identity(n);
    auto swap_idx = [&](std::size_t i, std::size_t j) {
        if (i == j) return;
        for (std::size_t t = 0; t < n; ++t) std::swap(g(i, t), g(j, t));
        for (std::size_t t = 0; t < n; ++t) std::swap(g(t, i), g(t, j));
        for (std::size_t t = 0; t < n; ++t) std::swap(b(t, i), b(t, j));
    };
    Vector d;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = n;
        for (std::size_t i = k; i < n && piv == n; ++i)
            if (g(i, i) != 0) piv = i;
        if (piv == n) {
            // all remaining diagonal entries vanish: e_i <- e_i + e_j
            std::size_t ii = n, jj = n;
            for (std::size_t i = k; i < n && ii == n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (g(i, j) != 0) {
                        ii = i;
                        jj = j;
                        break;
                    }
            if (ii == n) {
                for (std::size_t i = k; i < n; ++i) d.push_back(0);
                break;
            }
            for (std::size_t t = 0; t < n; ++t) g(ii, t) += g(jj, t);
            for (std::size_t t = 0; t < n; ++t) g(t, ii) += g(t, jj);
            for (std::size_t t = 0; t < n; ++t) b(t, ii) += b(t, jj);
            piv = ii;
        }
        swap_idx(k, piv);
        const Rational p = g(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            if (g(k, i) == 0) continue;
            Rational f = g(k, i) / p;
            for (std::size_t t = 0; t < n; ++t) g(t, i) -= f * g(t, k);
            for (std::size_t t = 0; t < n; ++t) g(i, t) -= f * g(k, t);
            for (std::size_t t = 0; t < n; ++t) b(t, i) -= f * b(t, k);
        }
        d.push_back(p);
    }
    return {d, b};
}

class QuadraticForm {
public:
    QuadraticForm() = default;

    // from a symmetric gram matrix b_Q
    static QuadraticForm from_gram(const Matrix& g) {
        if (!g.is_symmetric()) throw DimensionError("gram matrix must be square and symmetric");
        QuadraticForm q;
        q.gram_ = g;
        return q;
    }

    // from polynomial coefficients a_ij (0-based, i <= j)
    static QuadraticForm from_coeffs(std::size_t d, const std::map<std::pair<std::size_t, std::size_t>, Rational>& a) {
        Matrix g(d, d);
        for (const auto& [ij, v] : a) {
            auto [i, j] = ij;
            if (i > j) std::swap(i, j);
            if (j >= d) throw DimensionError("coefficient index out of range");
            if (i == j) {
                g(i, i) += v;
            } else {
                g(i, j) += v / 2;
                g(j, i) += v / 2;
            }
        }
        return from_gram(g);
    }

    static QuadraticForm diagonal(const Vector& a) { return from_gram(Matrix::diagonal(a)); }

    std::size_t dim() const { return gram_.rows(); }
    const Matrix& gram() const { return gram_; }

    Rational coeff(std::size_t i, std::size_t j) const {
        return i == j ? gram_(i, i) : Rational(2 * gram_(i, j));
    }

    std::vector<Rational> coefficients() const {
        std::vector<Rational> out;
        for (std::size_t i = 0; i < dim(); ++i)
            for (std::size_t j = i; j < dim(); ++j) out.push_back(coeff(i, j));
        return out;
    }

    Rational det() const { return dim() ? gram_.det() : Rational(1); }
    bool nondegenerate() const { return det() != 0; }

    Rational evaluate(const Vector& v) const {
        if (v.size() != dim()) throw DimensionError("vector length does not match form dimension");
        Rational s;
        for (std::size_t i = 0; i < dim(); ++i) {
            if (v[i] == 0) continue;
            s += gram_(i, i) * v[i] * v[i];
            for (std::size_t j = i + 1; j < dim(); ++j) s += 2 * gram_(i, j) * v[i] * v[j];
        }
        return s;
    }

    // Q∘g
    QuadraticForm act(const Matrix& g) const {
        if (g.rows() != dim() || g.cols() != dim()) throw DimensionError("transform shape mismatch");
        if (g.det() == 0) throw SingularMatrix("acting matrix is singular");
        return from_gram(congruence(gram_, g));
    }

    Rational coefficient_norm(const Place& v) const {
        if (dim() == 0) return 0;
        Rational m = 0;
        for (const auto& c : coefficients()) m = std::max(m, abs_nu(c, v));
        return m;
    }

    bool is_integral() const {
        for (const auto& c : coefficients())
            if (!is_integer(c)) return false;
        return true;
    }

    Signature signature() const {
        Signature s;
        if (dim() == 0) return s;
        for (const auto& x : rational_diagonalize(gram_).diag) {
            if (x > 0) ++s.pos;
            else if (x < 0) ++s.neg;
            else ++s.null;
        }
        return s;
    }

    bool is_positive_definite() const { return signature().pos == static_cast<int>(dim()); }
    bool is_definite() const {
        auto s = signature();
        return s.null == 0 && (s.pos == 0 || s.neg == 0);
    }

    std::string str() const;

    friend bool operator==(const QuadraticForm& a, const QuadraticForm& b) { return a.gram_ == b.gram_; }
    friend bool operator!=(const QuadraticForm& a, const QuadraticForm& b) { return !(a == b); }

    friend QuadraticForm direct_sum(const QuadraticForm& a, const QuadraticForm& b) {
        return from_gram(direct_sum(a.gram_, b.gram_));
    }

private:
    Matrix gram_;
};

// polynomial rendering, variables x1..xd
inline std::string QuadraticForm::str() const {
    std::string s;
    for (std::size_t i = 0; i < dim(); ++i)
        for (std::size_t j = i; j < dim(); ++j) {
            Rational c = coeff(i, j);
            if (c == 0) continue;
            std::string mono = "x" + std::to_string(i + 1) + (i == j ? "^2" : "*x" + std::to_string(j + 1));
            bool neg = c < 0;
            Rational a = rabs(c);
            std::string lead = a == 1 ? "" : to_string(a) + "*";
            if (s.empty()) s = (neg ? "-" : "") + lead + mono;
            else s += (neg ? " - " : " + ") + lead + mono;
        }
    return s.empty() ? "0" : s;
}

}  // namespace sforms
