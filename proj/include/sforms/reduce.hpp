#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <vector>

#include "arith.hpp"
#include "local.hpp"
#include "qform.hpp"

namespace sforms {

// α is stored through its square
struct SiegelParams {
    Rational alpha_sq;
    Rational beta;

    SiegelParams(Rational a2, Rational b) : alpha_sq(std::move(a2)), beta(std::move(b)) {
        if (alpha_sq < Rational(4, 3)) throw PreconditionError("Siegel parameter alpha must be at least 2/sqrt(3)");
        if (beta < Rational(1, 2)) throw PreconditionError("Siegel parameter beta must be at least 1/2");
    }
};

// G = nᵀ·diag(D)·n with n unit upper triangular (G positive definite)
struct LDL {
    Vector D;
    Matrix n;
};

inline LDL ldl_upper(const Matrix& g) {
    const std::size_t d = g.rows();
    LDL out{Vector(d), Matrix::identity(d)};
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            Rational s = g(i, j);
            for (std::size_t k = 0; k < i; ++k) s -= out.D[k] * out.n(k, i) * out.n(k, j);
            out.n(i, j) = s / out.D[i];
        }
        Rational s = g(j, j);
        for (std::size_t k = 0; k < j; ++k) s -= out.D[k] * out.n(k, j) * out.n(k, j);
        if (s <= 0) throw PreconditionError("form is not positive definite");
        out.D[j] = s;
    }
    return out;
}

inline void require_positive_definite(const QuadraticForm& q) {
    if (!q.is_positive_definite()) throw PreconditionError("form must be positive definite");
}

inline bool is_reduced_definite(const QuadraticForm& r, const SiegelParams& sp) {
    require_positive_definite(r);
    auto l = ldl_upper(r.gram());
    const std::size_t d = r.dim();
    for (std::size_t i = 0; i + 1 < d; ++i)
        if (l.D[i] > sp.alpha_sq * l.D[i + 1]) return false;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (rabs(l.n(i, j)) > sp.beta) return false;
    return true;
}

// Exact LLL on a positive definite gram matrix; returns unimodular U with Uᵀ·G·U reduced.
inline Matrix lll_gram(const Matrix& g0, const Rational& delta = Rational(3, 4)) {
    const std::size_t d = g0.rows();
    Matrix u = Matrix::identity(d), g = g0;
    auto gso = [&](Matrix& mu, Vector& bstar) {
        mu = Matrix(d, d);
        bstar.assign(d, 0);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                Rational s = g(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= mu(j, k) * mu(i, k) * bstar[k];
                mu(i, j) = s / bstar[j];
            }
            Rational s = g(i, i);
            for (std::size_t k = 0; k < i; ++k) s -= mu(i, k) * mu(i, k) * bstar[k];
            bstar[i] = s;
        }
    };
    // b_k -= q·b_j
    auto reduce_col = [&](std::size_t k, std::size_t j, const Integer& q) {
        Rational qq(q);
        for (std::size_t c = 0; c < d; ++c) u(c, k) -= qq * u(c, j);
        for (std::size_t c = 0; c < d; ++c) g(c, k) -= qq * g(c, j);
        for (std::size_t c = 0; c < d; ++c) g(k, c) -= qq * g(j, c);
    };
    auto swap_cols = [&](std::size_t a, std::size_t b) {
        for (std::size_t c = 0; c < d; ++c) std::swap(u(c, a), u(c, b));
        for (std::size_t c = 0; c < d; ++c) std::swap(g(c, a), g(c, b));
        for (std::size_t c = 0; c < d; ++c) std::swap(g(a, c), g(b, c));
    };
    Matrix mu;
    Vector bs;
    gso(mu, bs);
    std::size_t k = 1;
    while (k < d) {
        for (std::size_t jj = k; jj-- > 0;) {
            Integer q = round_of(mu(k, jj));
            if (q != 0) {
                reduce_col(k, jj, q);
                gso(mu, bs);
            }
        }
        if (bs[k] >= (delta - mu(k, k - 1) * mu(k, k - 1)) * bs[k - 1]) {
            ++k;
        } else {
            swap_cols(k, k - 1);
            gso(mu, bs);
            k = std::max<std::size_t>(k - 1, 1);
        }
    }
    return u;
}

using IntVec = std::vector<Integer>;

inline Vector to_vector(const IntVec& x) { return Vector(x.begin(), x.end()); }

inline Rational gram_value(const Matrix& g, const IntVec& x) {
    Rational s;
    const std::size_t d = x.size();
    for (std::size_t i = 0; i < d; ++i) {
        if (x[i] == 0) continue;
        s += g(i, i) * x[i] * x[i];
        for (std::size_t j = i + 1; j < d; ++j)
            if (x[j] != 0) s += 2 * g(i, j) * x[i] * x[j];
    }
    return s;
}

inline Rational gram_inner(const Matrix& g, const IntVec& x, const IntVec& y) {
    Rational s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0) continue;
        for (std::size_t j = 0; j < y.size(); ++j)
            if (y[j] != 0) s += g(i, j) * x[i] * y[j];
    }
    return s;
}

// All nonzero x ∈ ℤ^d with xᵀGx ≤ C (G positive definite), exact Fincke–Pohst.
inline std::vector<IntVec> short_vectors_raw(const Matrix& g, const Rational& C, std::size_t limit) {
    const std::size_t d = g.rows();
    auto l = ldl_upper(g);
    std::vector<IntVec> out;
    IntVec x(d);
    std::function<void(std::size_t, const Rational&)> rec = [&](std::size_t i1, const Rational& rem) {
        std::size_t i = i1 - 1;
        Rational c = 0;
        for (std::size_t j = i + 1; j < d; ++j) c -= l.n(i, j) * x[j];
        Rational t = rem / l.D[i];
        Integer s;
        Integer ft = floor_of(t);
        mpz_sqrt(s.get_mpz_t(), ft.get_mpz_t());
        Integer lo = ceil_of(c - s - 1), hi = floor_of(c + s + 1);
        for (Integer v = lo; v <= hi; ++v) {
            Rational dx = v - c;
            Rational used = l.D[i] * dx * dx;
            if (used > rem) continue;
            x[i] = v;
            if (i == 0) {
                bool zero = std::all_of(x.begin(), x.end(), [](const Integer& e) { return e == 0; });
                if (!zero) {
                    out.push_back(x);
                    if (out.size() > limit) throw BudgetExceeded("short-vector enumeration exceeded its limit");
                }
            } else {
                rec(i, rem - used);
            }
        }
        x[i] = 0;
    };
    if (d) rec(d, C);
    return out;
}

// Same, run in an LLL basis and mapped back (faster on skewed forms).
inline std::vector<IntVec> short_vectors(const Matrix& g, const Rational& C, std::size_t limit = 2000000) {
    const std::size_t d = g.rows();
    Matrix u = lll_gram(g);
    auto ys = short_vectors_raw(congruence(g, u), C, limit);
    std::vector<IntVec> out;
    out.reserve(ys.size());
    for (const auto& y : ys) {
        IntVec x(d);
        for (std::size_t i = 0; i < d; ++i) {
            Rational s;
            for (std::size_t j = 0; j < d; ++j) s += u(i, j) * y[j];
            x[i] = s.get_num();
        }
        out.push_back(std::move(x));
    }
    return out;
}

inline std::size_t nnz(const IntVec& x) {
    return static_cast<std::size_t>(std::count_if(x.begin(), x.end(), [](const Integer& e) { return e != 0; }));
}

// canonical order among vectors of equal norm: fewer nonzeros, earlier nonzeros, smaller |entries|, positive first
inline bool canonical_less(const IntVec& a, const IntVec& b) {
    auto na = nnz(a), nb = nnz(b);
    if (na != nb) return na < nb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        bool za = a[i] == 0, zb = b[i] == 0;
        if (za != zb) return !za;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        if (abs(a[i]) != abs(b[i])) return abs(a[i]) < abs(b[i]);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] > b[i];
    return false;
}

// gcd of the k×k minors of the d×k matrix with the given columns
inline Integer minors_gcd(const std::vector<IntVec>& cols) {
    const std::size_t d = cols[0].size(), k = cols.size();
    Integer g = 0;
    std::vector<std::size_t> rows(k);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t start) {
        if (g == 1) return;
        if (pos == k) {
            Matrix m(k, k);
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = 0; b < k; ++b) m(a, b) = cols[b][rows[a]];
            Integer det = m.det().get_num();
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), det.get_mpz_t());
            return;
        }
        for (std::size_t r = start; r < d; ++r) {
            rows[pos] = r;
            rec(pos + 1, r + 1);
        }
    };
    rec(0, 0);
    return g;
}

inline Matrix matrix_from_intcols(const std::vector<IntVec>& cols) {
    std::vector<Vector> vs;
    for (const auto& c : cols) vs.push_back(to_vector(c));
    return Matrix::from_columns(vs);
}

struct Reduction {
    QuadraticForm reduced;
    Matrix gamma;
};

// Greedy successive-minima basis (Minkowski reduction for d ≤ 4).
inline Reduction minkowski_reduce(const QuadraticForm& r) {
    require_positive_definite(r);
    const std::size_t d = r.dim();
    const Matrix& g = r.gram();
    Rational C = g(0, 0);
    for (std::size_t i = 1; i < d; ++i) C = std::min(C, g(i, i));
    std::vector<IntVec> chosen;
    std::vector<std::pair<Rational, IntVec>> pool;
    Rational pool_c = -1;
    while (chosen.size() < d) {
        if (pool_c != C) {
            pool.clear();
            for (auto& x : short_vectors(g, C)) {
                // one representative per ±pair: first nonzero positive
                auto it = std::find_if(x.begin(), x.end(), [](const Integer& e) { return e != 0; });
                if (*it < 0) continue;
                Rational val = gram_value(g, x);
                pool.emplace_back(val, std::move(x));
            }
            std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first < b.first;
                return canonical_less(a.second, b.second);
            });
            pool_c = C;
        }
        bool found = false;
        for (const auto& [val, x] : pool) {
            auto cols = chosen;
            cols.push_back(x);
            if (minors_gcd(cols) == 1) {
                chosen.push_back(x);
                found = true;
                break;
            }
        }
        if (!found) C *= 2;
    }
    Matrix gamma = matrix_from_intcols(chosen);
    return {r.act(gamma), gamma};
}

// α, β that the reduced form actually satisfies (each at least 1)
struct EffectiveParams {
    Rational alpha_sq, beta;
};

inline EffectiveParams effective_params(const QuadraticForm& r) {
    auto l = ldl_upper(r.gram());
    EffectiveParams e{1, 1};
    for (std::size_t i = 0; i + 1 < l.D.size(); ++i) e.alpha_sq = std::max(e.alpha_sq, Rational(l.D[i] / l.D[i + 1]));
    for (std::size_t i = 0; i < l.D.size(); ++i)
        for (std::size_t j = i + 1; j < l.D.size(); ++j) e.beta = std::max(e.beta, rabs(l.n(i, j)));
    return e;
}

// 𝓛'_d = d^{d/2}(d+1)^{d²} d!^{2d+1}; squared to stay rational
inline Rational Lprime_sq(int d) {
    Integer v = ipow(d, d) * ipow(Integer(d + 1), 2 * d * d) * ipow(factorial(d), 2 * (2 * d + 1));
    return Rational(v);
}

// ‖Q‖ ≤ 𝓛'_d α^{d²} β^{2d²} |det Q|^{2d}, compared after squaring
inline bool within_reduced_norm_cap(const QuadraticForm& r) {
    const int d = static_cast<int>(r.dim());
    auto e = effective_params(r);
    Rational lhs = r.coefficient_norm(Place::infinity());
    lhs *= lhs;
    Rational rhs = Lprime_sq(d) * rpow(e.alpha_sq, d * d) * rpow(e.beta, 4 * d * d) * rpow(rabs(r.det()), 4 * d);
    return lhs <= rhs;
}

// successive minima by brute force: smallest r with k independent vectors of value ≤ r
inline Vector successive_minima(const QuadraticForm& r) {
    require_positive_definite(r);
    const std::size_t d = r.dim();
    Rational C = r.gram()(0, 0);
    for (std::size_t i = 1; i < d; ++i) C = std::min(C, r.gram()(i, i));
    for (;; C *= 2) {
        auto vs = short_vectors(r.gram(), C);
        std::vector<std::pair<Rational, IntVec>> sorted;
        for (auto& x : vs) sorted.emplace_back(gram_value(r.gram(), x), x);
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        Vector mins;
        std::vector<Vector> span;
        for (const auto& [val, x] : sorted) {
            auto trial = span;
            trial.push_back(to_vector(x));
            if (Matrix::from_columns(trial).rank() == trial.size()) {
                span = trial;
                mins.push_back(val);
                if (mins.size() == d) return mins;
            }
        }
    }
}

// Minkowski constants with a11···add ≤ λ_d·det for reduced forms, d ≤ 4
inline Rational minkowski_lambda(std::size_t d) {
    switch (d) {
        case 1: return 1;
        case 2: return Rational(4, 3);
        case 3: return 2;
        case 4: return 4;
        default: throw BudgetExceeded("reduced-form enumeration is limited to d <= 4");
    }
}

// ---- isometry search -------------------------------------------------------

enum class EquivStatus { Equivalent, NotEquivalent, Inconclusive };

inline const char* to_string(EquivStatus s) {
    switch (s) {
        case EquivStatus::Equivalent: return "equivalent";
        case EquivStatus::NotEquivalent: return "not-equivalent";
        default: return "inconclusive";
    }
}

struct EquivCertificate {
    Matrix gamma;
    std::optional<PlaceSet> ring;  // empty: ℤ
    Integer denominator = 1;       // gamma = gamma'/denominator
    bool verified = false;
};

struct EquivResult {
    EquivStatus status = EquivStatus::Inconclusive;
    std::optional<EquivCertificate> cert;
    std::string reason;
    Integer searched_bound = 0;
};

// All integral τ with τᵀ·A·τ = T (A positive definite); stops after max_count if nonzero.
inline std::vector<Matrix> definite_isometries(const Matrix& A, const Matrix& T, std::size_t max_count) {
    const std::size_t d = A.rows();
    Rational C = 0;
    for (std::size_t j = 0; j < d; ++j) C = std::max(C, T(j, j));
    auto vs = short_vectors(A, C);
    std::map<Rational, std::vector<IntVec>> by_val;
    for (auto& x : vs) by_val[gram_value(A, x)].push_back(x);
    for (auto& [val, lst] : by_val) std::sort(lst.begin(), lst.end(), canonical_less);
    std::vector<const std::vector<IntVec>*> cand(d, nullptr);
    static const std::vector<IntVec> kEmpty;
    for (std::size_t j = 0; j < d; ++j) {
        auto it = by_val.find(T(j, j));
        cand[j] = it == by_val.end() ? &kEmpty : &it->second;
    }
    std::vector<Matrix> out;
    std::vector<IntVec> cols(d);
    std::function<bool(std::size_t)> rec = [&](std::size_t j) -> bool {
        if (j == d) {
            out.push_back(matrix_from_intcols(cols));
            return max_count && out.size() >= max_count;
        }
        for (const auto& x : *cand[j]) {
            bool ok = true;
            for (std::size_t i = 0; i < j && ok; ++i) ok = gram_inner(A, cols[i], x) == T(i, j);
            if (!ok) continue;
            cols[j] = x;
            if (rec(j + 1)) return true;
        }
        return false;
    };
    rec(0);
    return out;
}

// Solve Q(u + t·w) = target for integer t with |t| ≤ B.
inline std::vector<Integer> solve_quadratic_int(const Rational& a, const Rational& b, const Rational& c, const Integer& B) {
    std::vector<Integer> out;
    auto push = [&](const Rational& t) {
        if (is_integer(t) && abs(t.get_num()) <= B) out.push_back(t.get_num());
    };
    if (a == 0) {
        if (b == 0) {
            if (c == 0)
                for (Integer t = -B; t <= B; ++t) out.push_back(t);
            return out;
        }
        push(-c / b);
        return out;
    }
    Rational disc = b * b - 4 * a * c;
    if (disc < 0) return out;
    auto s = rational_sqrt(disc);
    if (!s) return out;
    Rational t1 = (-b - *s) / (2 * a), t2 = (-b + *s) / (2 * a);
    push(t1);
    if (t2 != t1) push(t2);
    std::sort(out.begin(), out.end());
    return out;
}

struct IndefiniteSearch {
    Matrix G1, G2;  // find integral x-columns with γᵀ·G1·γ = G2
    Integer B;      // ‖γ‖_∞ ≤ B
    std::function<bool(const IntVec&, std::size_t)> column_filter;  // optional extra pruning
    std::vector<std::size_t> order;  // column processing order
    std::atomic<long>* best = nullptr;
    long current = 0;
    std::size_t nodes = 0;

    // integral x with x·G1·c_i = G2(order_i, col) for the chosen columns and Q1(x) = G2(col, col)
    template <class F>
    bool for_each_candidate(const std::vector<IntVec>& chosen, std::size_t col, F&& f) {
        const std::size_t d = G1.rows(), k = chosen.size();
        // linear system rows: (c_iᵀ·G1)·x = G2(order_i, col)
        Matrix A(k, d + 1);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                Rational s;
                for (std::size_t t = 0; t < d; ++t) s += chosen[i][t] * G1(t, j);
                A(i, j) = s;
            }
            A(i, d) = G2(order[i], col);
        }
        // reduced row echelon form
        std::vector<std::size_t> pivots;
        std::size_t row = 0;
        for (std::size_t c = 0; c < d && row < k; ++c) {
            std::size_t p = row;
            while (p < k && A(p, c) == 0) ++p;
            if (p == k) continue;
            for (std::size_t j = 0; j <= d; ++j) std::swap(A(row, j), A(p, j));
            Rational inv = 1 / A(row, c);
            for (std::size_t j = 0; j <= d; ++j) A(row, j) *= inv;
            for (std::size_t r = 0; r < k; ++r) {
                if (r == row || A(r, c) == 0) continue;
                Rational f2 = A(r, c);
                for (std::size_t j = 0; j <= d; ++j) A(r, j) -= f2 * A(row, j);
            }
            pivots.push_back(c);
            ++row;
        }
        for (std::size_t r = row; r < k; ++r)
            if (A(r, d) != 0) return false;
        std::vector<std::size_t> frees;
        for (std::size_t c = 0; c < d; ++c)
            if (std::find(pivots.begin(), pivots.end(), c) == pivots.end()) frees.push_back(c);
        if (frees.empty()) return false;
        const std::size_t nf = frees.size();
        const Rational target = G2(col, col);
        // x = base(z) + t·w, z = first nf-1 free values, t = last free value
        Vector w(d);
        w[frees[nf - 1]] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r) w[pivots[r]] = -A(r, frees[nf - 1]);
        Rational qa = bilinear(G1, w, w);
        IntVec z(nf - 1, -B);
        for (;;) {
            ++nodes;
            Vector u(d);
            for (std::size_t t = 0; t + 1 < nf; ++t) u[frees[t]] = z[t];
            for (std::size_t r = 0; r < pivots.size(); ++r) {
                Rational s = A(r, d);
                for (std::size_t t = 0; t + 1 < nf; ++t) s -= A(r, frees[t]) * z[t];
                u[pivots[r]] = s;
            }
            Vector Gw = G1 * w;
            Rational qb = 2 * dot(u, Gw), qc = bilinear(G1, u, u) - target;
            for (const auto& t : solve_quadratic_int(qa, qb, qc, B)) {
                IntVec x(d);
                bool ok = true;
                for (std::size_t i = 0; i < d && ok; ++i) {
                    Rational xi = u[i] + t * w[i];
                    if (!is_integer(xi) || abs(xi.get_num()) > B) ok = false;
                    else x[i] = xi.get_num();
                }
                if (!ok) continue;
                if (column_filter && !column_filter(x, col)) continue;
                if (f(x)) return true;
            }
            std::size_t i = 0;
            while (i < z.size() && z[i] == B) z[i++] = -B;
            if (i == z.size()) break;
            ++z[i];
        }
        return false;
    }

    bool extend(std::vector<IntVec>& chosen, Matrix& out) {
        const std::size_t d = G1.rows();
        if (best && current > best->load()) return false;
        if (chosen.size() == d) {
            std::vector<IntVec> cols(d);
            for (std::size_t i = 0; i < d; ++i) cols[order[i]] = chosen[i];
            out = matrix_from_intcols(cols);
            return true;
        }
        std::size_t col = order[chosen.size()];
        return for_each_candidate(chosen, col, [&](const IntVec& x) {
            chosen.push_back(x);
            bool done = extend(chosen, out);
            chosen.pop_back();
            return done;
        });
    }
};

inline unsigned default_threads() {
    if (const char* e = std::getenv("SFORMS_THREADS")) {
        int n = std::atoi(e);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
}

// first certificate (by column-1 candidate index) with ‖γ‖_∞ ≤ B
inline std::optional<Matrix> search_isometry_bounded(const Matrix& G1, const Matrix& G2, const Integer& B,
                                                     unsigned threads,
                                                     std::function<bool(const IntVec&, std::size_t)> filter = {}) {
    const std::size_t d = G1.rows();
    IndefiniteSearch base;
    base.G1 = G1;
    base.G2 = G2;
    base.B = B;
    base.column_filter = filter;
    base.order.resize(d);
    for (std::size_t i = 0; i < d; ++i) base.order[i] = i;
    std::stable_sort(base.order.begin(), base.order.end(),
                     [&](std::size_t a, std::size_t b) { return rabs(G2(a, a)) < rabs(G2(b, b)); });
    std::vector<IntVec> firsts;
    base.for_each_candidate({}, base.order[0], [&](const IntVec& x) {
        firsts.push_back(x);
        return false;
    });
    std::stable_sort(firsts.begin(), firsts.end(), [](const IntVec& a, const IntVec& b) {
        Integer na = 0, nb = 0;
        for (const auto& e : a) na = std::max(na, Integer(abs(e)));
        for (const auto& e : b) nb = std::max(nb, Integer(abs(e)));
        if (na != nb) return na < nb;
        return canonical_less(a, b);
    });
    std::atomic<long> best{static_cast<long>(firsts.size())};
    std::vector<std::optional<Matrix>> found(firsts.size());
    auto worker = [&](unsigned tid, unsigned nt) {
        IndefiniteSearch s = base;
        s.best = &best;
        for (std::size_t i = tid; i < firsts.size(); i += nt) {
            if (static_cast<long>(i) > best.load()) break;
            s.current = static_cast<long>(i);
            std::vector<IntVec> chosen{firsts[i]};
            Matrix out;
            if (s.extend(chosen, out)) {
                found[i] = out;
                long cur = best.load();
                while (static_cast<long>(i) < cur && !best.compare_exchange_weak(cur, static_cast<long>(i))) {
                }
                break;
            }
        }
    };
    unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, firsts.size()))));
    if (nt == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker, t, nt);
        for (auto& th : pool) th.join();
    }
    long b = best.load();
    if (b < static_cast<long>(firsts.size())) return found[b];
    return std::nullopt;
}

// primes dividing 2·num·den of the given rationals (trial division; large cofactors kept if prime)
inline std::vector<Integer> relevant_primes(const std::vector<Rational>& qs) {
    std::set<Integer> ps{2};
    for (const auto& q : qs)
        for (Integer n : {Integer(abs(q.get_num())), Integer(q.get_den())}) {
            for (long f = 2; f < 100000 && Integer(f) * f <= n; ++f)
                if (n % f == 0) {
                    ps.insert(f);
                    while (n % f == 0) n /= f;
                }
            if (n > 1 && is_prime(n)) ps.insert(n);
        }
    return {ps.begin(), ps.end()};
}

inline std::optional<std::string> local_obstruction(const QuadraticForm& a, const QuadraticForm& b,
                                                     const std::vector<Integer>& primes) {
    if (a.signature() != b.signature()) return "signatures differ";
    for (const auto& p : primes)
        if (!equivalent_local(a, b, Place{p})) return "local invariants differ at " + p.get_str();
    return std::nullopt;
}

inline EquivCertificate make_certificate(const QuadraticForm& q1, const QuadraticForm& q2, const Matrix& gamma,
                                         std::optional<PlaceSet> ring = std::nullopt, Integer den = 1) {
    EquivCertificate c{gamma, std::move(ring), std::move(den), false};
    c.verified = congruence(q1.gram(), gamma) == q2.gram();
    if (!c.verified) throw InternalError("certificate failed exact verification");
    return c;
}

// ℤ-equivalence: complete for definite forms, bounded search (‖γ‖_∞ ≤ B) otherwise
inline EquivResult z_equivalent(const QuadraticForm& q1, const QuadraticForm& q2, const Integer& B,
                                unsigned threads = default_threads()) {
    if (q1.dim() != q2.dim()) throw DimensionError("forms of different dimension");
    if (!q1.nondegenerate() || !q2.nondegenerate()) throw DegenerateError("forms must be nondegenerate");
    EquivResult res;
    if (q1.det() != q2.det()) {
        res.status = EquivStatus::NotEquivalent;
        res.reason = "determinants differ";
        return res;
    }
    if (auto why = local_obstruction(q1, q2, relevant_primes({q1.det()}))) {
        res.status = EquivStatus::NotEquivalent;
        res.reason = *why;
        return res;
    }
    if (q1.is_definite()) {
        bool neg = q1.signature().pos == 0;
        QuadraticForm a = neg ? QuadraticForm::from_gram(-q1.gram()) : q1;
        QuadraticForm b = neg ? QuadraticForm::from_gram(-q2.gram()) : q2;
        auto r1 = minkowski_reduce(a), r2 = minkowski_reduce(b);
        auto taus = definite_isometries(r1.reduced.gram(), r2.reduced.gram(), 1);
        if (taus.empty()) {
            res.status = EquivStatus::NotEquivalent;
            res.reason = "no isometry between reduced forms";
            return res;
        }
        Matrix gamma = r1.gamma * taus[0] * r2.gamma.inverse();
        res.status = EquivStatus::Equivalent;
        res.cert = make_certificate(q1, q2, gamma);
        res.reason = "definite: complete search";
        return res;
    }
    for (Integer b = 1;; b = std::min(Integer(2 * b), B)) {
        auto g = search_isometry_bounded(q1.gram(), q2.gram(), b, threads);
        if (g) {
            res.status = EquivStatus::Equivalent;
            res.cert = make_certificate(q1, q2, *g);
            res.searched_bound = b;
            return res;
        }
        if (b >= B) break;
    }
    res.status = EquivStatus::Inconclusive;
    res.reason = "no certificate with entries bounded by the budget";
    res.searched_bound = B;
    return res;
}

// true iff q is a ± product of primes in S
inline bool is_S_unit(const Rational& q, const PlaceSet& S) {
    if (q == 0) return false;
    Integer n = abs(q.get_num()), d = q.get_den();
    for (const auto& p : S.finite) {
        Integer r;
        mpz_remove(n.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
        mpz_remove(d.get_mpz_t(), d.get_mpz_t(), p.get_mpz_t());
    }
    return n == 1 && d == 1;
}

struct ZSBudget {
    Integer B_inf = 100;
    long k_max = 2;
};

// Finite-place ceilings for ‖γ‖_p (Theorem-level, used only as pruning when they apply)
inline Rational zs_place_ceiling(const QuadraticForm& q1, const Integer& p) {
    const long d = static_cast<long>(q1.dim());
    Rational dv = abs_nu(q1.det(), Place{p});
    // ceiling² = base² / |det|_p
    Rational base = p == 2 ? rpow(Rational(2), d + 2) : Rational(p);
    return base * base / dv;
}

// ℤ_S-equivalence: γ = γ'/p_S^k, k increasing, ‖γ‖_∞ ≤ B_inf
inline EquivResult zs_equivalent(const QuadraticForm& q1, const QuadraticForm& q2, const PlaceSet& S,
                                 const ZSBudget& budget, unsigned threads = default_threads()) {
    if (q1.dim() != q2.dim()) throw DimensionError("forms of different dimension");
    if (!q1.nondegenerate() || !q2.nondegenerate()) throw DegenerateError("forms must be nondegenerate");
    EquivResult res;
    const std::size_t d = q1.dim();
    Rational ratio = q2.det() / q1.det();
    auto root = rational_sqrt(ratio);
    if (!root || !is_S_unit(*root, S)) {
        res.status = EquivStatus::NotEquivalent;
        res.reason = "det Q2 / det Q1 is not the square of an S-unit";
        return res;
    }
    std::vector<Integer> primes = relevant_primes({q1.det(), q2.det()});
    for (const auto& p : S.finite) primes.push_back(p);
    std::sort(primes.begin(), primes.end());
    primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
    if (auto why = local_obstruction(q1, q2, primes)) {
        res.status = EquivStatus::NotEquivalent;
        res.reason = *why;
        return res;
    }
    // theorem ceilings apply to integral forms with d ≥ 3 and R-isotropic Q1
    bool prune = d >= 3 && q1.is_integral() && q2.is_integral() && !q1.is_definite();
    for (long k = 0; k <= budget.k_max; ++k) {
        Integer m = ipow(S.p_S, static_cast<unsigned long>(k));
        Matrix target = Rational(m * m) * q2.gram();
        std::function<bool(const IntVec&, std::size_t)> filter;
        if (prune && k > 0)
            filter = [&, m](const IntVec& x, std::size_t) {
                for (const auto& p : S.finite) {
                    Rational cap = zs_place_ceiling(q1, p);
                    for (const auto& e : x) {
                        Rational a = abs_nu(make_rational(e, m), Place{p});
                        if (a * a > cap) return false;
                    }
                }
                return true;
            };
        Integer bound = budget.B_inf * m;
        std::optional<Matrix> g;
        if (q1.is_definite()) {
            bool neg = q1.signature().pos == 0;
            Matrix A = neg ? Matrix(-q1.gram()) : q1.gram();
            Matrix T = neg ? Matrix(-target) : target;
            auto taus = definite_isometries(A, T, 0);
            for (const auto& t : taus) {
                bool ok = nu_norm(t, Place::infinity()) <= Rational(bound);
                if (ok && filter)
                    for (std::size_t j = 0; j < d && ok; ++j) {
                        IntVec col(d);
                        for (std::size_t i = 0; i < d; ++i) col[i] = t(i, j).get_num();
                        ok = filter(col, j);
                    }
                if (ok) {
                    g = t;
                    break;
                }
            }
        } else {
            g = search_isometry_bounded(q1.gram(), target, bound, threads, filter);
        }
        if (g) {
            Matrix gamma = make_rational(1, m) * *g;
            res.status = EquivStatus::Equivalent;
            res.cert = make_certificate(q1, q2, gamma, S, m);
            res.searched_bound = bound;
            return res;
        }
    }
    res.status = EquivStatus::Inconclusive;
    res.reason = "no certificate within the denominator and norm budget";
    res.searched_bound = budget.B_inf;
    return res;
}

// ---- automorphisms and generators -----------------------------------------

// closure of a set of matrices under multiplication
inline std::set<Matrix> group_closure(const std::vector<Matrix>& gens, std::size_t limit = 100000) {
    if (gens.empty()) return {};
    std::set<Matrix> seen{Matrix::identity(gens[0].rows())};
    std::vector<Matrix> frontier(seen.begin(), seen.end());
    while (!frontier.empty()) {
        std::vector<Matrix> next;
        for (const auto& a : frontier)
            for (const auto& g : gens) {
                Matrix p = a * g;
                if (seen.insert(p).second) {
                    next.push_back(p);
                    if (seen.size() > limit) throw BudgetExceeded("group closure too large");
                }
            }
        frontier = std::move(next);
    }
    return seen;
}

struct AutomorphismGroup {
    std::vector<Matrix> elements;    // full O(Q, ℤ)
    std::vector<Matrix> generators;  // closed under inversion
    std::size_t order = 0;
    Rational bound_sq;  // (d^{d+1}·d!·‖Q‖^{d/2})²
    bool all_within_bound = false;
};

inline Rational aut_bound_sq(const QuadraticForm& q) {
    const int d = static_cast<int>(q.dim());
    Integer c = ipow(Integer(d), d + 1) * factorial(d);
    return Rational(c * c) * rpow(q.coefficient_norm(Place::infinity()), d);
}

inline AutomorphismGroup automorphism_generators(const QuadraticForm& q) {
    if (!q.is_definite()) throw PreconditionError("automorphism groups are computed for definite forms only");
    if (!q.is_integral()) throw PreconditionError("form must be integral");
    if (q.dim() > 4) throw BudgetExceeded("automorphism enumeration is limited to d <= 4");
    bool neg = q.signature().pos == 0;
    QuadraticForm a = neg ? QuadraticForm::from_gram(-q.gram()) : q;
    auto red = minkowski_reduce(a);
    Matrix gi = red.gamma.inverse();
    AutomorphismGroup out;
    for (const auto& t : definite_isometries(red.reduced.gram(), red.reduced.gram(), 0))
        out.elements.push_back(red.gamma * t * gi);
    std::sort(out.elements.begin(), out.elements.end(), [](const Matrix& x, const Matrix& y) {
        Rational nx = nu_norm(x, Place::infinity()), ny = nu_norm(y, Place::infinity());
        if (nx != ny) return nx < ny;
        return x < y;
    });
    out.order = out.elements.size();
    std::set<Matrix> span;
    const Matrix I = Matrix::identity(q.dim());
    for (const auto& e : out.elements) {
        if (e == I || span.count(e)) continue;
        out.generators.push_back(e);
        span = group_closure(out.generators);
        if (span.size() == out.order) break;
    }
    std::vector<Matrix> with_inv = out.generators;
    for (const auto& g : out.generators) {
        Matrix inv = g.inverse();
        if (std::find(with_inv.begin(), with_inv.end(), inv) == with_inv.end()) with_inv.push_back(inv);
    }
    out.generators = with_inv;
    out.bound_sq = aut_bound_sq(q);
    out.all_within_bound = true;
    for (const auto& e : out.elements) {
        if (congruence(q.gram(), e) != q.gram()) throw InternalError("automorphism does not preserve the form");
        Rational n = nu_norm(e, Place::infinity());
        if (n * n > out.bound_sq) out.all_within_bound = false;
    }
    return out;
}

// {u1⁻¹·m·u2} ∩ Γ, deduplicated, in input order
inline std::vector<Matrix> assemble_generators(const std::vector<Matrix>& U, const std::vector<Matrix>& M,
                                               const std::function<bool(const Matrix&)>& member) {
    std::vector<Matrix> out;
    std::set<Matrix> seen;
    for (const auto& u1 : U) {
        Matrix u1i = u1.inverse();
        for (const auto& m : M)
            for (const auto& u2 : U) {
                Matrix x = u1i * m * u2;
                if (member(x) && seen.insert(x).second) out.push_back(x);
            }
    }
    return out;
}

// Coefficient-integral positive definite forms of the given gram determinant, one per ℤ-class.
inline std::vector<QuadraticForm> enumerate_reduced_definite(std::size_t d, const Rational& det_value,
                                                             std::size_t max_box = 5000000) {
    if (d == 0) throw DimensionError("dimension must be positive");
    if (det_value <= 0) throw PreconditionError("determinant must be positive");
    const Rational cap = minkowski_lambda(d) * det_value;
    // diagonal tuples a1 ≤ … ≤ ad with product ≤ cap
    std::vector<std::vector<Integer>> diags;
    std::vector<Integer> cur;
    std::function<void(const Integer&, const Rational&)> rec = [&](const Integer& lo, const Rational& prod) {
        if (cur.size() == d) {
            diags.push_back(cur);
            return;
        }
        const std::size_t left = d - cur.size();
        for (Integer a = lo; Rational(prod * rpow(Rational(a), static_cast<long>(left))) <= cap; ++a) {
            cur.push_back(a);
            rec(a, prod * a);
            cur.pop_back();
        }
    };
    rec(1, 1);
    std::size_t box = 0;
    for (const auto& dg : diags) {
        std::size_t n = 1;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) n *= 2 * dg[i].get_ui() + 1;
        box += n;
        if (box > max_box) throw BudgetExceeded("coefficient box too large for enumeration");
    }
    std::vector<QuadraticForm> reps;
    std::vector<std::pair<std::size_t, std::size_t>> offs;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) offs.emplace_back(i, j);
    for (const auto& dg : diags) {
        std::vector<Integer> c(offs.size());
        for (std::size_t k = 0; k < offs.size(); ++k) c[k] = -dg[offs[k].first];
        for (;;) {
            Matrix g(d, d);
            for (std::size_t i = 0; i < d; ++i) g(i, i) = dg[i];
            for (std::size_t k = 0; k < offs.size(); ++k) {
                g(offs[k].first, offs[k].second) = make_rational(c[k], 2);
                g(offs[k].second, offs[k].first) = make_rational(c[k], 2);
            }
            if (g.det() == det_value) {
                auto q = QuadraticForm::from_gram(g);
                if (q.is_positive_definite()) {
                    auto r = minkowski_reduce(q).reduced;
                    bool dup = false;
                    for (const auto& x : reps) {
                        if (x == r) { dup = true; break; }
                        Vector dx, dr;
                        for (std::size_t i = 0; i < d; ++i) dx.push_back(x.gram()(i, i)), dr.push_back(r.gram()(i, i));
                        if (dx != dr) continue;
                        if (!definite_isometries(x.gram(), r.gram(), 1).empty()) { dup = true; break; }
                    }
                    if (!dup) reps.push_back(r);
                }
            }
            std::size_t k = 0;
            while (k < c.size() && c[k] == dg[offs[k].first]) {
                c[k] = -dg[offs[k].first];
                ++k;
            }
            if (k == c.size()) break;
            ++c[k];
        }
    }
    std::sort(reps.begin(), reps.end(), [](const QuadraticForm& a, const QuadraticForm& b) { return a.gram() < b.gram(); });
    return reps;
}

// 𝓛_d = 2^{d(d−1)} d^{3d/2} (d+1)^{d²} d!^{d+1}, returned squared
inline Rational L_sq(int d) {
    Integer v = ipow(2, 2 * d * (d - 1)) * ipow(Integer(d), 3 * d) * ipow(Integer(d + 1), 2 * d * d) *
                ipow(factorial(d), 2 * (d + 1));
    return Rational(v);
}

// 𝓛_d·|det b|^{2d}; exact when d is even, else returned through its square
struct TranslateBound {
    Rational value_sq;
    std::optional<Rational> value;
};

inline TranslateBound translate_bound(const Matrix& b) {
    if (!b.square()) throw DimensionError("translate_bound needs a square matrix");
    if (!b.is_integral()) throw PreconditionError("b must be integral");
    Rational det = b.det();
    if (det == 0) throw SingularMatrix("b is singular");
    const int d = static_cast<int>(b.rows());
    TranslateBound t;
    t.value_sq = L_sq(d) * rpow(rabs(det), 4 * d);
    t.value = rational_sqrt(t.value_sq);
    return t;
}

}  // namespace sforms
