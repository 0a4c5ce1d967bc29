#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "arith.hpp"
#include "bounds.hpp"
#include "reduce.hpp"

namespace sforms {

// Δ = g·ℤ_S^d, g rational and embedded diagonally in every place of S
struct SLattice {
    PlaceSet S;
    Matrix basis;
    Rational covolume;

    SLattice(PlaceSet s, Matrix b) : S(std::move(s)), basis(std::move(b)) {
        if (!basis.square() || basis.empty()) throw DimensionError("lattice basis must be square");
        Rational det = basis.det();
        if (det == 0) throw SingularMatrix("lattice basis is singular");
        covolume = height_S(det, S);
    }

    std::size_t dim() const { return basis.rows(); }

    // x ∈ Δ  iff  g⁻¹x ∈ ℤ_S^d
    bool contains(const Vector& x) const {
        Vector c = basis.inverse() * x;
        for (const auto& e : c)
            if (e != 0 && !is_S_unit(Rational(e.get_den()), S)) return false;
        return true;
    }
};

inline Rational covolume(const SLattice& L) { return L.covolume; }

inline bool in_gl_zp(const Matrix& h, const Integer& p) {
    for (const auto& e : h.data())
        if (e != 0 && padic_valuation(e, p) < 0) return false;
    return padic_valuation(h.det(), p) == 0;
}

// γ ∈ GL(d,ℤ_S): S-integral entries, det an S-unit
inline bool in_gl_zs(const Matrix& g, const PlaceSet& S) {
    for (const auto& e : g.data())
        if (e != 0 && !is_S_unit(Rational(e.get_den()), S)) return false;
    return is_S_unit(g.det(), S);
}

// Unimodular U with G·U lower triangular (G integral, full row rank on the leading rows).
inline Matrix column_hnf(Matrix& G) {
    const std::size_t r = G.rows(), c = G.cols();
    Matrix U = Matrix::identity(c);
    auto combine = [&](std::size_t i, std::size_t a, std::size_t b) {
        // columns a, b → (g, 0) in row i
        Integer x = G(i, a).get_num(), y = G(i, b).get_num(), g, s, t;
        mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
        Rational xs(x / g), ys(y / g), rs(s), rt(t);
        for (Matrix* m : {&G, &U})
            for (std::size_t k = 0; k < m->rows(); ++k) {
                Rational ca = (*m)(k, a), cb = (*m)(k, b);
                (*m)(k, a) = rs * ca + rt * cb;
                (*m)(k, b) = -ys * ca + xs * cb;
            }
    };
    for (std::size_t i = 0; i < std::min(r, c); ++i) {
        for (std::size_t j = i + 1; j < c; ++j)
            if (G(i, j) != 0) combine(i, i, j);
        if (G(i, i) < 0)
            for (Matrix* m : {&G, &U})
                for (std::size_t k = 0; k < m->rows(); ++k) (*m)(k, i) = -(*m)(k, i);
    }
    return U;
}

// γ ∈ GL(d,ℤ[1/p]) with h·γ ∈ GL(d,ℤ_p)
inline Matrix padic_normalizer(const Matrix& h, const Integer& p) {
    const std::size_t d = h.rows();
    Integer N = 1;
    for (const auto& e : h.data()) mpz_lcm(N.get_mpz_t(), N.get_mpz_t(), e.get_den_mpz_t());
    Matrix K = Rational(N) * h;
    Matrix V = column_hnf(K);
    auto scale_col = [&](std::size_t j, const Rational& s) {
        for (Matrix* m : {&K, &V})
            for (std::size_t k = 0; k < d; ++k) (*m)(k, j) *= s;
    };
    for (std::size_t i = 0; i < d; ++i) scale_col(i, rpow(Rational(p), -padic_valuation(K(i, i), p)));
    // clear p-denominators below the diagonal, right to left
    for (std::size_t i = d; i-- > 0;)
        for (std::size_t j = i + 1; j < d; ++j) {
            long v = padic_valuation(K(j, i), p);
            if (K(j, i) == 0 || v >= 0) continue;
            Integer pk = ipow(p, static_cast<unsigned long>(-v));
            Integer a = Rational(K(j, i) * pk).get_num(), u = K(j, j).get_num(), inv;
            mpz_invert(inv.get_mpz_t(), u.get_mpz_t(), pk.get_mpz_t());
            Rational c = make_rational(mod_floor(a * inv, pk), pk);
            for (Matrix* m : {&K, &V})
                for (std::size_t k = 0; k < d; ++k) (*m)(k, i) -= c * (*m)(k, j);
        }
    Rational s = rpow(Rational(p), valuation_int(N, p));
    V = s * V;
    return V;
}

struct UnimodularBasis {
    Matrix basis;  // h = g·γ, h ∈ GL(d,ℤ_p) for every p ∈ S
    Matrix gamma;
};

inline UnimodularBasis unimodular_basis(const SLattice& L) {
    Matrix h = L.basis, gamma = Matrix::identity(L.dim());
    for (const auto& p : L.S.finite) {
        Matrix v = padic_normalizer(h, p);
        h = h * v;
        gamma = gamma * v;
    }
    for (const auto& p : L.S.finite)
        if (!in_gl_zp(h, p)) throw InternalError("p-adic normalization failed at " + p.get_str());
    if (!in_gl_zs(gamma, L.S)) throw InternalError("normalizing change of basis is not in GL(d, Z_S)");
    return {h, gamma};
}

// k-th compound matrix: minors indexed by k-subsets in lexicographic order
inline std::vector<std::vector<std::size_t>> k_subsets(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (cur.size() == k) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            cur.push_back(i);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

inline Matrix compound(const Matrix& g, std::size_t k) {
    auto rs = k_subsets(g.rows(), k), cs = k_subsets(g.cols(), k);
    Matrix out(rs.size(), cs.size());
    for (std::size_t a = 0; a < rs.size(); ++a)
        for (std::size_t b = 0; b < cs.size(); ++b) {
            Matrix m(k, k);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) m(i, j) = g(rs[a][i], cs[b][j]);
            out(a, b) = m.det();
        }
    return out;
}

// wedge coordinates of v₁ ∧ ⋯ ∧ v_k
inline Vector wedge(const std::vector<Vector>& vs) { return compound(Matrix::from_columns(vs), vs.size()).column(0); }

// ‖(v₁∧⋯∧v_k)_∞‖_euc · ∏_p ‖…‖_p; squared value exact
inline SHeight submodule_covolume(const SLattice& L, const std::vector<Vector>& vs) {
    if (vs.empty()) throw DimensionError("no vectors");
    for (const auto& v : vs) {
        if (v.size() != L.dim()) throw DimensionError("vector length does not match the lattice");
        if (!L.contains(v)) throw PreconditionError("vector is not in the lattice");
    }
    Vector w = wedge(vs);
    if (std::all_of(w.begin(), w.end(), [](const Rational& e) { return e == 0; }))
        throw DegenerateError("vectors are linearly dependent");
    return s_height(w, L.S, HeightMode::Euclidean);
}

struct Systole {
    Rational alpha1_sq;
    std::optional<Rational> alpha1;
    Vector witness;
    bool certified = false;
    std::size_t enumerated = 0;
};

namespace detail {

inline bool primitive(const IntVec& x) {
    Integer g = 0;
    for (const auto& e : x) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), e.get_mpz_t());
    return g == 1;
}

inline IntVec sign_normalize(IntVec x) {
    for (const auto& e : x)
        if (e != 0) {
            if (e < 0)
                for (auto& y : x) y = -y;
            break;
        }
    return x;
}

}  // namespace detail

// Euclidean height at ∞. After normalization every primitive coefficient vector has p-norms 1,
// so α₁ is the real minimum of hᵀh over ℤ^d; the radius (least LLL diagonal) always reaches it.
inline Systole systole(const SLattice& L, std::size_t budget = 1000000) {
    auto [h, gamma] = unimodular_basis(L);
    const std::size_t d = L.dim();
    Matrix G = congruence(Matrix::identity(d), h);
    Matrix u = lll_gram(G);
    Matrix R = congruence(G, u);
    IntVec best(d);
    Rational best_v = -1;
    for (std::size_t j = 0; j < d; ++j)
        if (best_v < 0 || R(j, j) < best_v) {
            best_v = R(j, j);
            for (std::size_t i = 0; i < d; ++i) best[i] = u(i, j).get_num();
        }
    best = detail::sign_normalize(best);
    Systole out;
    try {
        auto xs = short_vectors(G, best_v, budget);
        out.enumerated = xs.size();
        for (auto& x : xs) {
            Rational v = gram_value(G, x);
            x = detail::sign_normalize(x);
            if (v < best_v || (v == best_v && canonical_less(x, best))) {
                best_v = v;
                best = x;
            }
        }
        out.certified = true;
    } catch (const BudgetExceeded&) {
        out.certified = false;
    }
    out.alpha1_sq = best_v;
    out.witness = h * to_vector(best);
    auto lead = std::find_if(out.witness.begin(), out.witness.end(), [](const Rational& e) { return e != 0; });
    if (*lead < 0)
        for (auto& e : out.witness) e = -e;
    out.alpha1 = s_height(out.witness, L.S, HeightMode::Euclidean).exact;
    return out;
}

struct MahlerBasis {
    Matrix basis;
    Matrix gamma;  // basis = g·γ, γ ∈ GL(d,ℤ_S)
    Rational norm_inf;  // max-entry norm of the ∞-part
    Rational alpha1_sq;
    Magnitude bound;
    bool p_unimodular = false;
    bool within_bound = false;
};

// p-parts made unimodular, then an exact LLL pass with δ = 1 lands in the (2/√3, 1/2) Siegel set at ∞.
inline MahlerBasis mahler_basis(const SLattice& L) {
    if (L.covolume != 1) throw PreconditionError("mahler_basis needs covolume 1, got " + to_string(L.covolume));
    const std::size_t d = L.dim();
    if (d < 2) throw DimensionError("mahler_basis needs d >= 2");
    auto [h, gamma] = unimodular_basis(L);
    Matrix u = lll_gram(congruence(Matrix::identity(d), h), Rational(1));
    h = h * u;
    gamma = gamma * u;
    auto sys = systole(L);
    if (!sys.certified) throw BudgetExceeded("systole not certified");
    MahlerBasis out{h, gamma, nu_norm(h, Place::infinity()), sys.alpha1_sq, mahler_bound(static_cast<int>(d), sys.alpha1_sq)};
    out.p_unimodular = std::all_of(L.S.finite.begin(), L.S.finite.end(), [&](const Integer& p) { return in_gl_zp(h, p); });
    out.within_bound = compare(Magnitude(out.norm_inf), out.bound) <= 0;
    return out;
}

struct Submodule {
    std::vector<Vector> basis;
    SHeight covolume;
};

// Rank-k primitive ℤ_S-submodules of covolume < 1 (d ≤ 3, where every primitive wedge is decomposable).
inline std::vector<Submodule> submodules_below_one(const SLattice& L, std::size_t k, std::size_t budget = 1000000) {
    const std::size_t d = L.dim();
    if (d > 3) throw PreconditionError("submodules_below_one is limited to d <= 3");
    if (k < 1 || k > d) throw DimensionError("rank out of range");
    auto [h, gamma] = unimodular_basis(L);
    std::vector<Submodule> out;
    if (k == d) {
        if (L.covolume < 1) {
            Submodule s{{}, s_height(Vector{L.basis.det()}, L.S, HeightMode::Euclidean)};
            for (std::size_t j = 0; j < d; ++j) s.basis.push_back(L.basis.column(j));
            out.push_back(std::move(s));
        }
        return out;
    }
    Matrix M = k == 1 ? h : compound(h, 2);
    Matrix G = congruence(Matrix::identity(M.rows()), M);
    std::vector<IntVec> ws;
    for (auto& x : short_vectors(G, 1, budget)) {
        if (gram_value(G, x) >= 1 || !detail::primitive(x)) continue;
        x = detail::sign_normalize(x);
        if (std::find(ws.begin(), ws.end(), x) == ws.end()) ws.push_back(x);
    }
    std::sort(ws.begin(), ws.end(), [&](const IntVec& a, const IntVec& b) {
        Rational va = gram_value(G, a), vb = gram_value(G, b);
        return va != vb ? va < vb : canonical_less(a, b);
    });
    for (const auto& w : ws) {
        Submodule s;
        if (k == 1) {
            s.basis.push_back(h * to_vector(w));
        } else {
            // w = (w01, w02, w12); the plane is the integer kernel of n = (w12, -w02, w01)
            Matrix n(1, 3);
            n(0, 0) = w[2];
            n(0, 1) = -w[1];
            n(0, 2) = w[0];
            Matrix U = column_hnf(n);
            s.basis.push_back(h * U.column(1));
            s.basis.push_back(h * U.column(2));
        }
        s.covolume = submodule_covolume(L, s.basis);
        out.push_back(std::move(s));
    }
    return out;
}

// ---- (C, θ)-goodness of p-adic polynomials ----

using Poly = std::vector<Rational>;  // ascending coefficients

inline std::size_t degree(const Poly& q) {
    for (std::size_t i = q.size(); i-- > 0;)
        if (q[i] != 0) return i;
    throw DegenerateError("zero polynomial");
}

// multiply by p^{-min v} so that the coefficients are p-integral with one unit; goodness is scale invariant
inline Poly p_integral_rescale(const Poly& q, const Integer& p) {
    long m = kInfVal;
    for (const auto& c : q)
        if (c != 0) m = std::min(m, padic_valuation(c, p));
    if (m == kInfVal) throw DegenerateError("zero polynomial");
    Poly out;
    Rational s = rpow(Rational(p), -m);
    for (const auto& c : q) out.push_back(c * s);
    return out;
}

// one (ball, ε) pair: B = a + p^jℤ_p, ε = p^{-k}; rel = λ(B(q,ε))/λ(B), m = -log_p ‖q‖_B
struct GoodnessCell {
    long j;
    std::int64_t a;
    long k;
    Rational rel;
    long m;
};

struct GoodnessReport {
    std::size_t d0 = 0;
    Integer p;
    Integer C;
    Rational theta;
    long max_depth = 0;
    std::size_t balls = 0;
    std::size_t checks = 0;
    std::size_t violations = 0;
    double worst_ratio = 0;
    bool passed = false;
    std::vector<GoodnessCell> cells;  // filled on request
};

namespace detail {

// q(a + m·s) as a polynomial in s
inline std::vector<Integer> taylor_shift(const std::vector<Integer>& c, const Integer& a, const Integer& m) {
    std::vector<Integer> out(c.size());
    // Horner in the shifted variable
    for (std::size_t i = c.size(); i-- > 0;) {
        // out ← out·(a + m s) + c_i
        std::vector<Integer> nxt(c.size());
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (out[k] == 0) continue;
            nxt[k] += out[k] * a;
            if (k + 1 < c.size()) nxt[k + 1] += out[k] * m;
        }
        nxt[0] += c[i];
        out.swap(nxt);
    }
    return out;
}

// min over s ∈ ℤ_p of v_p(c(s)); pruned by Gauss norms
inline long min_valuation(const std::vector<Integer>& c, const Integer& p) {
    long best = kInfVal;
    auto val = [&](const Integer& x) { return valuation_int(x, p); };
    const unsigned long pu = p.get_ui();
    for (unsigned long s = 0; s <= c.size(); ++s) {
        Integer v = 0;
        for (std::size_t i = c.size(); i-- > 0;) v = v * s + c[i];
        best = std::min(best, val(v));
    }
    std::function<void(const std::vector<Integer>&)> rec = [&](const std::vector<Integer>& h) {
        long gauss = kInfVal;
        for (const auto& e : h) gauss = std::min(gauss, val(e));
        if (gauss >= best) return;
        std::vector<std::vector<Integer>> kids;
        for (unsigned long r = 0; r < pu; ++r) {
            kids.push_back(taylor_shift(h, Integer(r), p));
            best = std::min(best, val(kids.back()[0]));
        }
        for (const auto& k : kids) rec(k);
    };
    rec(c);
    return best;
}

}  // namespace detail

// Checks λ(B(q,ε)) ≤ C·(ε/‖q‖_B)^θ·λ(B) for all balls a + p^jℤ_p (j ≤ K) and ε = p^{-k} (k ≤ K),
// C = d₀²p, θ = 1/d₀. B(q,ε) = {t ∈ B : |q(t)|_p < ε}, counted exactly mod p^{k+1}.
inline GoodnessReport good_check(const Poly& q, const Integer& p, long K = 6, bool record = false) {
    if (!is_prime(p)) throw InvalidPlace("not a prime: " + p.get_str());
    if (K < 0) throw PreconditionError("depth must be nonnegative");
    for (const auto& c : q)
        if (c != 0 && padic_valuation(c, p) < 0) throw PreconditionError("coefficients must be p-integral");
    const std::size_t deg = degree(q);
    Integer top = ipow(p, static_cast<unsigned long>(K + 1));
    if (top > Integer(1) << 26) throw PreconditionError("p^(K+1) too large for residue counting");
    // clear p-prime denominators: a p-adic unit factor changes nothing
    Integer den = 1;
    for (const auto& c : q) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.get_den_mpz_t());
    std::vector<Integer> c;
    for (std::size_t i = 0; i <= deg; ++i) c.push_back(Rational(q[i] * den).get_num());

    GoodnessReport rep;
    rep.d0 = std::max<std::size_t>(deg, 1);
    rep.p = p;
    rep.C = Integer(rep.d0 * rep.d0) * p;
    rep.theta = make_rational(1, rep.d0);
    rep.max_depth = K;
    const std::int64_t P = p.get_si();
    std::vector<std::int64_t> pw(K + 2, 1);
    for (long i = 1; i <= K + 1; ++i) pw[i] = pw[i - 1] * P;

    // zero[k][t]: q(t) ≡ 0 mod p^{k+1}, t mod p^{k+1}
    std::vector<std::vector<char>> zero(K + 1);
    for (long k = 0; k <= K; ++k) {
        const std::int64_t M = pw[k + 1];
        std::vector<std::int64_t> cm;
        for (const auto& e : c) cm.push_back(mod_floor(e, Integer(static_cast<long>(M))).get_si());
        zero[k].assign(M, 0);
        for (std::int64_t t = 0; t < M; ++t) {
            std::int64_t v = 0;
            for (std::size_t i = cm.size(); i-- > 0;) v = (v * t + cm[i]) % M;
            zero[k][t] = v == 0;
        }
    }
    // count[k][j][a]: zeros mod p^{k+1} lying over a mod p^j (j ≤ k+1)
    std::vector<std::vector<std::vector<std::int64_t>>> cnt(K + 1);
    for (long k = 0; k <= K; ++k) {
        cnt[k].resize(std::min(K, k + 1) + 1);
        for (long j = 0; j < static_cast<long>(cnt[k].size()); ++j) {
            cnt[k][j].assign(pw[j], 0);
            for (std::int64_t t = 0; t < pw[k + 1]; ++t)
                if (zero[k][t]) ++cnt[k][j][t % pw[j]];
        }
    }
    bool ok = true;
    for (long j = 0; j <= K; ++j)
        for (std::int64_t a = 0; a < pw[j]; ++a) {
            ++rep.balls;
            // measure of B(q, p^{-k}) relative to λ(B)
            std::vector<Rational> rel(K + 1);
            long inside = 0;  // number of k with B ⊂ B(q, p^{-k})
            for (long k = 0; k <= K; ++k) {
                if (j <= k + 1)
                    rel[k] = make_rational(Integer(static_cast<long>(cnt[k][j][a])), Integer(static_cast<long>(pw[k + 1 - j])));
                else
                    rel[k] = zero[k][a % pw[k + 1]] ? 1 : 0;
                if (rel[k] == 1) ++inside;
            }
            // sup-norm valuation on B
            long m = inside;
            if (inside == K + 1) m = detail::min_valuation(detail::taylor_shift(c, Integer(static_cast<long>(a)), Integer(static_cast<long>(pw[j]))), p);
            for (long k = 0; k <= K; ++k) {
                ++rep.checks;
                if (record) rep.cells.push_back({j, a, k, rel[k], m});
                if (rel[k] == 0) continue;
                // (rel/C)^{d₀} ≤ p^{m-k}
                Rational lhs = rpow(rel[k] / Rational(rep.C), static_cast<long>(rep.d0));
                Rational rhs = rpow(Rational(p), m - k);
                double ratio = Rational(rel[k] / Rational(rep.C)).get_d() / std::pow(p.get_d(), static_cast<double>(m - k) / rep.d0);
                rep.worst_ratio = std::max(rep.worst_ratio, ratio);
                if (lhs > rhs) {
                    ++rep.violations;
                    ok = false;
                }
            }
        }
    rep.passed = ok;
    return rep;
}

}  // namespace sforms
