#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "arith.hpp"
#include "local.hpp"
#include "qform.hpp"

namespace sforms {

// A_p (Fact 2.4 slack): 2 at p = 2, else 1
inline Integer A_const(const Place& v) { return v.is_finite() && v.p == 2 ? 2 : 1; }

// B_ν bound for coset representatives
inline Rational B_const(const Place& v) {
    if (v.is_infinite()) return 1;
    return v.p == 2 ? Rational(4) : Rational(v.p);
}

// 𝔞_{d,ν}²: A_p²·p at finite places, d² at ∞
inline Rational frak_a_squared(int d, const Place& v) {
    if (v.is_infinite()) return Rational(d * d);
    Integer a = A_const(v);
    return Rational(a * a * v.p);
}

struct PadicDiagonalization {
    Vector diag;
    Matrix k;  // diag-form ∘ k = Q
};

// Q = kᵀ·diag·k with k, k⁻¹ integral at odd p; at p = 2, ‖k‖₂ ≤ 1 and ‖k⁻¹‖₂ ≤ 2.
inline PadicDiagonalization diagonalize_padic(const QuadraticForm& q, const Integer& p) {
    if (!is_prime(p)) throw InvalidPlace("not a prime: " + p.get_str());
    if (!q.nondegenerate()) throw DegenerateError("cannot diagonalize a degenerate form");
    const std::size_t n = q.dim();
    Matrix g = q.gram(), t = Matrix::identity(n);
    auto swap_idx = [&](std::size_t i, std::size_t j) {
        if (i == j) return;
        for (std::size_t c = 0; c < n; ++c) std::swap(g(i, c), g(j, c));
        for (std::size_t c = 0; c < n; ++c) std::swap(g(c, i), g(c, j));
        for (std::size_t c = 0; c < n; ++c) std::swap(t(c, i), t(c, j));
    };
    // e_col -= f·e_src, applied as a congruence
    auto axpy = [&](std::size_t col, std::size_t src, const Rational& f) {
        if (f == 0) return;
        for (std::size_t c = 0; c < n; ++c) g(c, col) -= f * g(c, src);
        for (std::size_t c = 0; c < n; ++c) g(col, c) -= f * g(src, c);
        for (std::size_t c = 0; c < n; ++c) t(c, col) -= f * t(c, src);
    };
    std::vector<std::size_t> block_at;  // start indices of 2×2 blocks (p = 2)
    std::size_t k = 0;
    while (k < n) {
        long best = kInfVal;
        std::size_t bi = k, bj = k;
        for (std::size_t i = k; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                long v = padic_valuation(g(i, j), p);
                // a diagonal pivot wins ties
                if (v < best || (v == best && i == j && bi != bj)) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        if (bi != bj && p != 2) {
            // odd p: e_i + e_j has value of valuation v(g_ij)
            axpy(bi, bj, -1);
            bj = bi;
        }
        if (bi == bj) {
            swap_idx(k, bi);
            for (std::size_t c = k + 1; c < n; ++c) axpy(c, k, g(k, c) / g(k, k));
            ++k;
            continue;
        }
        swap_idx(k, bi);
        swap_idx(k + 1, bj);
        const Rational a = g(k, k), b = g(k, k + 1), c = g(k + 1, k + 1);
        const Rational det = a * c - b * b;
        for (std::size_t col = k + 2; col < n; ++col) {
            Rational x = g(k, col), y = g(k + 1, col);
            axpy(col, k, (c * x - b * y) / det);
            axpy(col, k + 1, (a * y - b * x) / det);
        }
        block_at.push_back(k);
        k += 2;
    }
    // split each 2×2 block with columns N/2, N = (n1, J·B·n1), v₂(B'(n1)) = 1
    Matrix s = Matrix::identity(n);
    for (std::size_t k0 : block_at) {
        Rational a = g(k0, k0), b = g(k0, k0 + 1), c = g(k0 + 1, k0 + 1);
        Rational scale = rpow(Rational(2), padic_valuation(b, 2));
        Rational a1 = a / scale, b1 = b / scale, c1 = c / scale;
        auto val = [&](const Rational& x, const Rational& y) -> Rational { return a1 * x * x + 2 * b1 * x * y + c1 * y * y; };
        Vector n1;
        for (const Vector& cand : {Vector{1, 0}, Vector{0, 1}, Vector{1, 1}})
            if (padic_valuation(val(cand[0], cand[1]), 2) == 1) {
                n1 = cand;
                break;
            }
        if (n1.empty()) throw InternalError("2-adic block split failed");
        Vector n2 = {b1 * n1[0] + c1 * n1[1], -(a1 * n1[0] + b1 * n1[1])};
        s(k0, k0) = n1[0] / 2;
        s(k0 + 1, k0) = n1[1] / 2;
        s(k0, k0 + 1) = n2[0] / 2;
        s(k0 + 1, k0 + 1) = n2[1] / 2;
    }
    Matrix tt = t * s;
    Matrix dg = congruence(q.gram(), tt);
    PadicDiagonalization out;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && dg(i, j) != 0) throw InternalError("p-adic diagonalization left off-diagonal terms");
        out.diag.push_back(dg(i, i));
    }
    out.k = tt.inverse();
    return out;
}

// a = b·c² with b a product of distinct primes (trial division to 1000, plus p) times a leftover non-square
struct SquareSplit {
    Rational b, c;
};

inline SquareSplit split_square(const Rational& a, const Integer& p) {
    if (a == 0) throw DegenerateError("square split of zero");
    Integer n = a.get_num() * a.get_den();
    Rational c(1, a.get_den());
    auto strip = [&](const Integer& f) {
        Integer f2 = f * f;
        while (n % f2 == 0) {
            n /= f2;
            c *= f;
        }
    };
    if (p > 1) strip(p);
    for (long f = 2; f < 1000; ++f)
        if (is_prime(f)) strip(f);
    Integer an = abs(n), r;
    if (mpz_perfect_square_p(an.get_mpz_t())) {
        mpz_sqrt(r.get_mpz_t(), an.get_mpz_t());
        n /= r * r;
        c *= r;
    }
    return {Rational(n), c};
}

// P∘g = Q with g = S·diag(√r)·M; every r_k is a square in Q_ν.
struct StandardizationWitness {
    StandardForm standard;
    Place place;
    Matrix S;
    Vector r;
    Matrix M;
    std::optional<Matrix> g;  // set when every r_k is a rational square
    Rational norm_sq;         // upper bound for ‖g‖_ν², exact when S has one nonzero per row
    Rational bound_sq;        // (𝔞_{d,ν}·‖Q‖_ν^{1/2})²
    bool approximate = false;
    std::vector<double> g_float;  // row-major, approximate ∞ path only
    double residual = 0;

    bool within_bound() const { return norm_sq <= bound_sq; }
};

inline Rational witness_norm_sq(const Matrix& S, const Vector& r, const Matrix& M, const Place& v) {
    Rational best = 0;
    for (std::size_t i = 0; i < S.rows(); ++i)
        for (std::size_t k = 0; k < S.cols(); ++k) {
            if (S(i, k) == 0) continue;
            Rational sk = abs_nu(S(i, k), v);
            for (std::size_t j = 0; j < M.cols(); ++j) {
                Rational m = abs_nu(M(k, j), v);
                best = std::max(best, Rational(sk * sk * abs_nu(r[k], v) * m * m));
            }
        }
    return best;
}

// exact check of P∘(S·diag(√r)·M) = Q together with the square conditions on r
inline bool verify_witness(const StandardizationWitness& w, const QuadraticForm& q) {
    if (w.approximate) return false;
    Matrix sps = congruence(w.standard.form().gram(), w.S);
    const std::size_t n = q.dim();
    Vector b(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && sps(i, j) != 0) return false;
        if (w.r[i] == 0 || !is_square_in(w.r[i], w.place)) return false;
        b[i] = w.r[i] * sps(i, i);
    }
    if (congruence(Matrix::diagonal(b), w.M) != q.gram()) return false;
    if (w.g && q.gram() != congruence(w.standard.form().gram(), *w.g)) return false;
    return true;
}

namespace detail {

inline void fill_rational_g(StandardizationWitness& w) {
    const std::size_t n = w.r.size();
    Vector roots(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto s = rational_sqrt(w.r[k]);
        if (!s) return;
        roots[k] = *s;
    }
    w.g = w.S * Matrix::diagonal(roots) * w.M;
}

// integer vectors of max-norm exactly R, fewest nonzeros first
inline std::vector<std::vector<long>> shell(std::size_t d, long R) {
    std::vector<std::vector<long>> out;
    std::vector<long> x(d, -R);
    for (;;) {
        long m = 0;
        for (long e : x) m = std::max(m, std::labs(e));
        if (m == R) out.push_back(x);
        std::size_t i = 0;
        while (i < d && x[i] == R) x[i++] = -R;
        if (i == d) break;
        ++x[i];
    }
    auto nnz = [](const std::vector<long>& v) { return std::count_if(v.begin(), v.end(), [](long e) { return e != 0; }); };
    std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
        auto na = nnz(a), nb = nnz(b);
        if (na != nb) return na < nb;
        // positive leading entries first, for readable witnesses
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] != b[i]) {
                if ((a[i] > 0) != (b[i] > 0)) return a[i] > 0;
                return std::labs(a[i]) < std::labs(b[i]);
            }
        return false;
    });
    return out;
}

struct IsometrySearch {
    Vector pdiag, b;
    Place v;
    std::vector<Rational> row_cap;  // per column: bound_sq / max_j |M_kj|²
    long rmax = 1;
    std::vector<std::vector<std::vector<long>>> shells;
    long budget;
    long used = 0;
    std::vector<Vector> chosen;
    Vector r;

    Rational P(const Vector& x) const {
        Rational s;
        for (std::size_t i = 0; i < x.size(); ++i) s += pdiag[i] * x[i] * x[i];
        return s;
    }
    Rational B(const Vector& x, const Vector& y) const {
        Rational s;
        for (std::size_t i = 0; i < x.size(); ++i) s += pdiag[i] * x[i] * y[i];
        return s;
    }

    bool run(std::size_t k) {
        if (k == b.size()) return true;
        const std::size_t n = b.size();
        const Rational inv_p = v.is_finite() ? Rational(1) / Rational(v.p) : Rational(1);
        for (long R = 1; R <= rmax; ++R) {
            if (shells.size() < static_cast<std::size_t>(R)) shells.push_back(shell(n, R));
            for (int e = 0; e < 2; ++e)
            for (const auto& xi : shells[R - 1]) {
                if (++used > budget) throw BudgetExceeded("standardization search exhausted its candidate budget");
                Vector s(n);
                for (std::size_t i = 0; i < n; ++i) s[i] = e ? Rational(xi[i]) * inv_p : Rational(xi[i]);
                for (const auto& c : chosen) {
                    Rational f = B(s, c) / P(c);
                    if (f == 0) continue;
                    for (std::size_t i = 0; i < s.size(); ++i) s[i] -= f * c[i];
                }
                Rational ps = P(s);
                if (ps == 0) continue;
                Rational rk = b[k] / ps;
                if (!is_square_in(rk, v)) continue;
                Rational ns = nu_norm(s, v);
                if (ns * ns * abs_nu(rk, v) > row_cap[k]) continue;
                chosen.push_back(s);
                r.push_back(rk);
                if (run(k + 1)) return true;
                chosen.pop_back();
                r.pop_back();
            }
        }
        return false;
    }
};

inline StandardizationWitness standardize_infinity(const QuadraticForm& q) {
    const std::size_t n = q.dim();
    StandardizationWitness w;
    w.place = Place::infinity();
    w.standard = standard_form_of(q, w.place);
    w.bound_sq = frak_a_squared(static_cast<int>(n), w.place) * q.coefficient_norm(w.place);
    // exact LDLᵀ with largest-|pivot| choice
    Matrix g = q.gram(), t = Matrix::identity(n);
    Vector dvals;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = n;
        for (std::size_t i = k; i < n; ++i)
            if (g(i, i) != 0 && (piv == n || rabs(g(i, i)) > rabs(g(piv, piv)))) piv = i;
        if (piv == n) {
            std::size_t ii = n, jj = n;
            for (std::size_t i = k; i < n && ii == n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (g(i, j) != 0) {
                        ii = i;
                        jj = j;
                        break;
                    }
            if (ii == n) throw DegenerateError("degenerate form");
            for (std::size_t c = 0; c < n; ++c) g(ii, c) += g(jj, c);
            for (std::size_t c = 0; c < n; ++c) g(c, ii) += g(c, jj);
            for (std::size_t c = 0; c < n; ++c) t(c, ii) += t(c, jj);
            piv = ii;
        }
        if (piv != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(g(k, c), g(piv, c));
            for (std::size_t c = 0; c < n; ++c) std::swap(g(c, k), g(c, piv));
            for (std::size_t c = 0; c < n; ++c) std::swap(t(c, k), t(c, piv));
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            Rational f = g(k, i) / g(k, k);
            if (f == 0) continue;
            for (std::size_t c = 0; c < n; ++c) g(c, i) -= f * g(c, k);
            for (std::size_t c = 0; c < n; ++c) g(i, c) -= f * g(k, c);
            for (std::size_t c = 0; c < n; ++c) t(c, i) -= f * t(c, k);
        }
        dvals.push_back(g(k, k));
    }
    // route positive pivots to +1 slots of P, negative to −1 slots
    Matrix S(n, n);
    std::vector<bool> used(n, false);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (!used[i] && (w.standard.diag[i] > 0) == (dvals[k] > 0)) {
                used[i] = true;
                S(i, k) = 1;
                break;
            }
    w.S = S;
    for (const auto& x : dvals) w.r.push_back(rabs(x));
    w.M = t.inverse();
    w.norm_sq = witness_norm_sq(w.S, w.r, w.M, w.place);
    fill_rational_g(w);
    if (w.within_bound()) return w;

    // spectral fallback: g = Π·diag(√|λ|)·Vᵀ in double precision
    Eigen::MatrixXd G(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) G(i, j) = q.gram()(i, j).get_d();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    Eigen::MatrixXd gf = Eigen::MatrixXd::Zero(n, n);
    std::fill(used.begin(), used.end(), false);
    for (std::size_t k = 0; k < n; ++k) {
        double lam = es.eigenvalues()(k);
        for (std::size_t i = 0; i < n; ++i)
            if (!used[i] && (w.standard.diag[i] > 0) == (lam > 0)) {
                used[i] = true;
                gf.row(i) = std::sqrt(std::fabs(lam)) * es.eigenvectors().col(k).transpose();
                break;
            }
    }
    Eigen::MatrixXd Pd = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) Pd(i, i) = w.standard.diag[i].get_d();
    w.approximate = true;
    w.residual = (gf.transpose() * Pd * gf - G).cwiseAbs().maxCoeff();
    w.g_float.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w.g_float[i * n + j] = gf(i, j);
    double nmax = gf.cwiseAbs().maxCoeff();
    w.norm_sq = Rational(nmax * nmax);
    w.g.reset();
    if (w.residual > 1e-9 * std::max(1.0, G.cwiseAbs().maxCoeff()))
        throw InternalError("floating standardization residual above tolerance");
    return w;
}

}  // namespace detail

// Witness for Lemma-style standardization with ‖g‖_ν ≤ 𝔞_{d,ν}‖Q‖_ν^{1/2}
inline StandardizationWitness standardize(const QuadraticForm& q, const Place& v, long budget = 1000000) {
    if (!q.nondegenerate()) throw DegenerateError("cannot standardize a degenerate form");
    if (v.is_infinite()) return detail::standardize_infinity(q);
    const std::size_t n = q.dim();
    StandardizationWitness w;
    w.place = v;
    w.standard = standard_form_of(q, v);
    w.bound_sq = frak_a_squared(static_cast<int>(n), v) * q.coefficient_norm(v);

    auto dg = diagonalize_padic(q, v.p);
    Vector b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto sp = split_square(dg.diag[i], v.p);
        b[i] = sp.b;
        c[i] = sp.c;
    }
    w.M = Matrix::diagonal(c) * dg.k;

    detail::IsometrySearch srch;
    srch.pdiag = w.standard.diag;
    srch.b = b;
    srch.v = v;
    srch.budget = budget;
    // box radius: enough for the Fact 2.4 vectors, capped so the box stays within the budget
    srch.rmax = std::max<long>(5, 2 * v.p.get_si() + 1);
    while (srch.rmax > 1 && std::pow(2.0 * srch.rmax + 1, double(n)) > 4.0 * double(budget)) --srch.rmax;
    // At p = 2 a 2×2 block split can cost a factor 2 in ‖g‖; the cap is then relaxed and
    // the witness reports within_bound() = false.
    bool found = false;
    for (int slack : {1, 4, 16}) {
        if (slack > 1 && v.p != 2) break;
        srch.row_cap.clear();
        srch.chosen.clear();
        srch.r.clear();
        srch.used = 0;
        for (std::size_t k = 0; k < n; ++k) {
            Rational mk = nu_norm(w.M.row(k), v);
            srch.row_cap.push_back(slack * w.bound_sq / (mk * mk));
        }
        try {
            found = srch.run(0);
        } catch (const BudgetExceeded&) {
            if (slack == 16 || v.p != 2) throw;
        }
        if (found) break;
    }
    if (!found) throw BudgetExceeded("no isometry within the candidate box");
    w.S = Matrix::from_columns(srch.chosen);
    w.r = srch.r;
    w.norm_sq = witness_norm_sq(w.S, w.r, w.M, v);
    detail::fill_rational_g(w);
    if (w.g) {
        Rational ng = nu_norm(*w.g, v);
        w.norm_sq = ng * ng;
    }
    if (!verify_witness(w, q)) throw InternalError("standardization witness failed verification");
    return w;
}

// t with t₁² − t₂² = a and ‖t‖_p ≤ A_p
inline Vector represent_binary_hyperbolic(const Rational& a, const Integer& p) {
    if (abs_nu(a, Place::prime(p)) > 1) throw PreconditionError("|a|_p must be at most 1");
    return {(a + 1) / 2, (a - 1) / 2};
}

inline Rational form_value_diag(const Vector& pd, const Vector& x) {
    Rational s;
    for (std::size_t i = 0; i < x.size(); ++i) s += pd[i] * x[i] * x[i];
    return s;
}

struct SpinorResult {
    SquareClass spinor;
    int det = 1;
    std::vector<Vector> reflections;  // h = r_{v1}·r_{v2}·…
};

// reflection matrix r_v for the diagonal form pd
inline Matrix reflection(const Vector& pd, const Vector& v) {
    const std::size_t n = v.size();
    Rational pv = form_value_diag(pd, v);
    if (pv == 0) throw DegenerateError("reflection in an isotropic vector");
    Matrix r = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) -= 2 * v[i] * pd[j] * v[j] / pv;
    return r;
}

// Cartan–Dieudonné factorization of h ∈ O(P), P diagonal
inline SpinorResult spinor_norm(const Matrix& h, const Vector& pd, const Place& v) {
    const std::size_t n = pd.size();
    Matrix P = Matrix::diagonal(pd);
    if (h.rows() != n || h.cols() != n) throw DimensionError("isometry shape mismatch");
    if (congruence(P, h) != P) throw PreconditionError("matrix is not an isometry of P");
    Matrix cur = h;
    SpinorResult out;
    std::vector<Vector> applied;
    for (std::size_t i = 0; i < n; ++i) {
        Vector e(n);
        e[i] = 1;
        Vector w = cur.column(i);
        if (w == e) continue;
        Vector d(n);
        for (std::size_t t = 0; t < n; ++t) d[t] = w[t] - e[t];
        if (form_value_diag(pd, d) != 0) {
            applied.push_back(d);
            cur = reflection(pd, d) * cur;
        } else {
            Vector s(n);
            for (std::size_t t = 0; t < n; ++t) s[t] = w[t] + e[t];
            applied.push_back(s);
            cur = reflection(pd, s) * cur;
            applied.push_back(e);
            cur = reflection(pd, e) * cur;
        }
    }
    if (cur != Matrix::identity(n)) throw InternalError("reflection factorization did not terminate at I");
    // r_k⋯r_1·h = I, so h = r_1⋯r_k
    Rational prod = 1;
    for (const auto& x : applied) prod *= form_value_diag(pd, x);
    out.spinor = square_class(prod, v);
    out.det = applied.size() % 2 ? -1 : 1;
    out.reflections = applied;
    return out;
}

struct CosetRep {
    Matrix eta;
    Place place;
    SquareClass spinor_class;
    int det_sign = 1;
};

// v_c with v₁² − v₂² = c
inline Vector hyperbolic_vector(const Rational& c, const Place& v) {
    if (v.is_infinite()) return c > 0 ? Vector{1, 0} : Vector{0, 1};
    if (v.p == 2) {
        Rational ac = rabs(c);
        Vector base;
        if (ac == 1) base = {1, 0};
        else if (ac == 3) base = {2, 1};
        else if (ac == 2) base = {Rational(3, 2), Rational(1, 2)};
        else if (ac == 6) base = {Rational(5, 2), Rational(1, 2)};
        else throw PreconditionError("not a representative of 𝒞_2");
        return c > 0 ? base : Vector{base[1], base[0]};
    }
    return {(c + 1) / 2, (c - 1) / 2};
}

inline Matrix h_matrix(const Vector& vc) {
    Rational a = vc[0], b = vc[1], c = a * a - b * b;
    return Matrix{{-(a * a + b * b) / c, 2 * a * b / c}, {-2 * a * b / c, (a * a + b * b) / c}};
}

inline std::vector<CosetRep> coset_reps(const Vector& pd, const Place& v) {
    if (pd.size() < 2 || pd[0] != 1 || pd[1] != -1) throw PreconditionError("P must start with x1^2 - x2^2");
    const std::size_t n = pd.size();
    std::vector<CosetRep> out;
    Matrix h1 = h_matrix(hyperbolic_vector(1, v));
    for (const auto& c : class_representatives(v)) {
        Matrix hc = h_matrix(hyperbolic_vector(c, v));
        for (const Matrix& eta2 : {hc, h1 * hc}) {
            Matrix eta = direct_sum(eta2, Matrix::identity(n - 2));
            auto sp = spinor_norm(eta, pd, v);
            CosetRep rep{eta, v, sp.spinor, sp.det};
            if (nu_norm(eta, v) > B_const(v)) throw InternalError("coset representative exceeds B_ν");
            out.push_back(rep);
        }
    }
    return out;
}

// explicit covering SL(2) → SO(P), P = x1² − x2² + a3 x3² + …
inline Matrix rho_P(const Matrix& g, const Vector& pd) {
    if (g.rows() != 2 || g.cols() != 2) throw DimensionError("rho_P expects a 2x2 matrix");
    if (g.det() != 1) throw PreconditionError("rho_P requires det g = 1");
    if (pd.size() < 3 || pd[0] != 1 || pd[1] != -1 || pd[2] == 0)
        throw PreconditionError("P must be x1^2 - x2^2 + a3 x3^2 + ... with a3 != 0");
    const Rational &a = g(0, 0), &b = g(0, 1), &c = g(1, 0), &d = g(1, 1);
    const Rational a3 = pd[2], ia3 = 1 / a3;
    Matrix r = Matrix::identity(pd.size());
    r(0, 0) = (a * a - a3 * b * b - ia3 * c * c + d * d) / 2;
    r(0, 1) = (-a * a - a3 * b * b + ia3 * c * c + d * d) / 2;
    r(0, 2) = -a3 * a * b + c * d;
    r(1, 0) = (-a * a + a3 * b * b - ia3 * c * c + d * d) / 2;
    r(1, 1) = (a * a + a3 * b * b + ia3 * c * c + d * d) / 2;
    r(1, 2) = a3 * a * b + c * d;
    r(2, 0) = -ia3 * a * c + b * d;
    r(2, 1) = ia3 * a * c + b * d;
    r(2, 2) = a * d + b * c;
    return r;
}

// a_{p,t} = diag(p^{-t}, p^t); at ∞ the rational point diag(s, 1/s) stands for e^{t/2} = s
inline Matrix a_matrix(const Rational& s) { return Matrix{{s, 0}, {0, 1 / s}}; }

// b for a = diag(s, 1/s)
inline Matrix b_matrix(const Rational& s) {
    Rational s2 = s * s, is2 = 1 / s2;
    return Matrix{{(s2 + is2) / 2, (is2 - s2) / 2}, {(is2 - s2) / 2, (s2 + is2) / 2}};
}

struct DepthReport {
    bool ok = false;          // ‖ρ(g) − I‖_p ≤ p^{-(n-1)}
    bool proof_bound = false;  // the sharper p^{-n}
    Rational distance;
};

inline DepthReport congruence_depth_check(const Matrix& g, const Vector& pd, const Integer& p, long n) {
    Place v = Place::prime(p);
    if (n <= 1) throw PreconditionError("depth n must exceed 1");
    if (pd.size() < 3) throw PreconditionError("P needs at least three variables");
    Rational a3 = abs_nu(pd[2], v);
    if (a3 > 1 || a3 < Rational(1) / Rational(p)) throw PreconditionError("need 1/p <= |a3|_p <= 1");
    Matrix gi = g - Matrix::identity(2);
    for (const auto& x : gi.data())
        if (x != 0 && padic_valuation(x, p) < n + 1) throw PreconditionError("g is not congruent to I mod p^(n+1)");
    Matrix diff = rho_P(g, pd) - Matrix::identity(pd.size());
    DepthReport rep;
    rep.distance = std::all_of(diff.data().begin(), diff.data().end(), [](const Rational& x) { return x == 0; })
                       ? Rational(0)
                       : nu_norm(diff, v);
    rep.ok = rep.distance <= rpow(Rational(p), -(n - 1));
    rep.proof_bound = rep.distance <= rpow(Rational(p), -n);
    return rep;
}

}  // namespace sforms
