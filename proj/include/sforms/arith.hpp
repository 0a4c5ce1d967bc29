#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "matrix.hpp"
#include "rational.hpp"

namespace sforms {

constexpr long kInfVal = LONG_MAX;

inline bool is_prime(const Integer& p) { return p >= 2 && mpz_probab_prime_p(p.get_mpz_t(), 40) > 0; }

// A place of Q. p == 0 encodes the archimedean place.
struct Place {
    Integer p = 0;

    static Place infinity() { return {}; }
    static Place prime(const Integer& q) {
        if (!is_prime(q)) throw InvalidPlace("not a prime: " + q.get_str());
        return Place{q};
    }
    bool is_infinite() const { return p == 0; }
    bool is_finite() const { return p != 0; }

    std::string str() const { return is_infinite() ? "inf" : p.get_str(); }

    friend bool operator==(const Place& a, const Place& b) { return a.p == b.p; }
    friend bool operator!=(const Place& a, const Place& b) { return a.p != b.p; }
    friend bool operator<(const Place& a, const Place& b) { return a.p < b.p; }
};

inline Place parse_place(const std::string& s) {
    if (s == "inf" || s == "oo" || s == "infinity") return Place::infinity();
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) throw InvalidPlace("bad place '" + s + "'");
    if (s.empty()) throw InvalidPlace("empty place");
    return Place::prime(Integer(s));
}

// S = {inf} ∪ S_f
struct PlaceSet {
    std::vector<Integer> finite;
    Integer p_S = 1;

    PlaceSet() = default;
    explicit PlaceSet(std::vector<Integer> primes) {
        for (const auto& q : primes)
            if (!is_prime(q)) throw InvalidPlace("not a prime: " + q.get_str());
        std::sort(primes.begin(), primes.end());
        primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
        finite = std::move(primes);
        for (const auto& q : finite) p_S *= q;
    }

    std::vector<Place> places() const {
        std::vector<Place> out{Place::infinity()};
        for (const auto& q : finite) out.push_back(Place{q});
        return out;
    }

    bool contains(const Integer& q) const { return std::binary_search(finite.begin(), finite.end(), q); }

    std::string str() const {
        std::string s = "inf";
        for (const auto& q : finite) s += "," + q.get_str();
        return s;
    }
};

// accepts "inf,2,17" (inf optional)
inline PlaceSet parse_place_set(const std::string& s) {
    std::vector<Integer> primes;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto comma = s.find(',', pos);
        std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!tok.empty()) {
            Place v = parse_place(tok);
            if (v.is_finite()) primes.push_back(v.p);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return PlaceSet(primes);
}

inline long valuation_int(const Integer& n, const Integer& p) {
    if (n == 0) return kInfVal;
    Integer rest;
    return static_cast<long>(mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t()));
}

inline long padic_valuation(const Rational& q, const Integer& p) {
    if (!is_prime(p)) throw InvalidPlace("not a prime: " + p.get_str());
    if (q == 0) return kInfVal;
    return valuation_int(q.get_num(), p) - valuation_int(q.get_den(), p);
}

// |q|_ν, exact
inline Rational abs_nu(const Rational& q, const Place& v) {
    if (v.is_infinite()) return rabs(q);
    if (q == 0) return 0;
    return rpow(Rational(v.p), -padic_valuation(q, v.p));
}

inline Rational nu_norm(const Vector& x, const Place& v) {
    if (x.empty()) throw DimensionError("norm of an empty vector");
    Rational m = 0;
    for (const auto& e : x) m = std::max(m, abs_nu(e, v));
    return m;
}

inline Rational nu_norm(const Matrix& g, const Place& v) {
    if (g.empty()) throw DimensionError("norm of an empty matrix");
    return nu_norm(g.data(), v);
}

inline Rational s_norm(const Matrix& g, const PlaceSet& S) {
    Rational m = 0;
    for (const auto& v : S.places()) m = std::max(m, nu_norm(g, v));
    return m;
}

enum class HeightMode { MaxNorm, Euclidean };

struct SHeight {
    Rational squared;  // exact square of the height
    double value = 0;
    std::optional<Rational> exact;  // set whenever the height itself is rational
};

// product over S of per-place norms; the ∞ factor is max or euclidean
inline SHeight s_height(const Vector& x, const PlaceSet& S, HeightMode mode) {
    if (x.empty()) throw DimensionError("height of an empty vector");
    Rational fin = 1;
    for (const auto& q : S.finite) fin *= nu_norm(x, Place{q});
    SHeight h;
    if (mode == HeightMode::MaxNorm) {
        Rational e = nu_norm(x, Place::infinity()) * fin;
        h.exact = e;
        h.squared = e * e;
        h.value = e.get_d();
        return h;
    }
    Rational s2 = dot(x, x);
    h.squared = s2 * fin * fin;
    h.value = std::sqrt(s2.get_d()) * fin.get_d();
    Integer rn, rd;
    if (mpz_perfect_square_p(h.squared.get_num_mpz_t()) && mpz_perfect_square_p(h.squared.get_den_mpz_t())) {
        mpz_sqrt(rn.get_mpz_t(), h.squared.get_num_mpz_t());
        mpz_sqrt(rd.get_mpz_t(), h.squared.get_den_mpz_t());
        h.exact = Rational(rn, rd);
        h.value = h.exact->get_d();
    }
    return h;
}

inline int legendre(const Integer& a, const Integer& p) {
    Integer r = a % p;
    if (r < 0) r += p;
    return mpz_legendre(r.get_mpz_t(), p.get_mpz_t());
}

// smallest positive quadratic nonresidue mod an odd prime
inline Integer nonresidue(const Integer& p) {
    if (p == 2) throw InvalidPlace("no nonresidue convention at 2");
    for (Integer n = 2;; ++n)
        if (legendre(n, p) == -1) return n;
}

// 𝒞_ν
inline std::vector<Rational> class_representatives(const Place& v) {
    if (v.is_infinite()) return {1, -1};
    if (v.p == 2) return {1, -1, 3, -3, 2, -2, 6, -6};
    Integer n = nonresidue(v.p);
    return {1, Rational(n), Rational(v.p), Rational(n * v.p)};
}

// exact rational square root if one exists
inline std::optional<Rational> rational_sqrt(const Rational& q) {
    if (q < 0) return std::nullopt;
    if (!mpz_perfect_square_p(q.get_num_mpz_t()) || !mpz_perfect_square_p(q.get_den_mpz_t())) return std::nullopt;
    Integer a, b;
    mpz_sqrt(a.get_mpz_t(), q.get_num_mpz_t());
    mpz_sqrt(b.get_mpz_t(), q.get_den_mpz_t());
    return Rational(a, b);
}

struct SquareClass {
    Place place;
    Rational rep;
    std::optional<Rational> witness;  // a = rep·t² with t rational, when such t exists

    friend bool operator==(const SquareClass& a, const SquareClass& b) {
        return a.place == b.place && a.rep == b.rep;
    }
};

inline Integer mod_floor(const Integer& a, const Integer& m) {
    Integer r = a % m;
    if (r < 0) r += m;
    return r;
}

// odd part of a rational unit at p, reduced mod m (den inverted mod m)
inline Integer unit_residue(const Rational& u, const Integer& m) {
    Integer inv;
    Integer d = mod_floor(u.get_den(), m);
    if (!mpz_invert(inv.get_mpz_t(), d.get_mpz_t(), m.get_mpz_t())) throw InternalError("non-unit denominator");
    return mod_floor(u.get_num() * inv, m);
}

inline Rational class_rep_of(const Rational& a, const Place& v) {
    if (a == 0) throw DegenerateError("square class of zero");
    if (v.is_infinite()) return a > 0 ? 1 : -1;
    long e = padic_valuation(a, v.p);
    Rational u = a / rpow(Rational(v.p), e);
    if (v.p == 2) {
        long r = unit_residue(u, 8).get_si();
        Rational c = r == 1 ? 1 : r == 3 ? 3 : r == 5 ? -3 : -1;
        return e % 2 ? c * 2 : c;
    }
    Rational c = legendre(u.get_num() * u.get_den(), v.p) == 1 ? Rational(1) : Rational(nonresidue(v.p));
    return e % 2 ? c * v.p : c;
}

inline SquareClass square_class(const Rational& a, const Place& v) {
    SquareClass s{v, class_rep_of(a, v), std::nullopt};
    s.witness = rational_sqrt(a / s.rep);
    return s;
}

inline bool is_square_in(const Rational& a, const Place& v) { return a != 0 && class_rep_of(a, v) == 1; }

inline int hilbert_symbol(const Rational& a, const Rational& b, const Place& v) {
    if (a == 0 || b == 0) throw DegenerateError("Hilbert symbol of zero");
    if (v.is_infinite()) return (a < 0 && b < 0) ? -1 : 1;
    const Integer& p = v.p;
    long al = padic_valuation(a, p), be = padic_valuation(b, p);
    Rational u = a / rpow(Rational(p), al), w = b / rpow(Rational(p), be);
    if (p == 2) {
        long ur = unit_residue(u, 8).get_si(), wr = unit_residue(w, 8).get_si();
        auto eps = [](long x) { return ((x - 1) / 2) & 1; };
        auto omega = [](long x) { return ((x * x - 1) / 8) & 1; };
        long s = eps(ur) * eps(wr) + ((al & 1) ? omega(wr) : 0) + ((be & 1) ? omega(ur) : 0);
        return (s & 1) ? -1 : 1;
    }
    int sign = 1;
    long ep = Integer((p - 1) / 2).get_si() & 1;
    if ((al & 1) && (be & 1) && ep) sign = -sign;
    if (be & 1) sign *= legendre(u.get_num() * u.get_den(), p);
    if (al & 1) sign *= legendre(w.get_num() * w.get_den(), p);
    return sign;
}

inline int hilbert_symbol(const Rational& a, const Rational& b, const Integer& p) {
    return hilbert_symbol(a, b, Place::prime(p));
}

// Residue search for a primitive zero of a x² + b y² + c z² over Q_p with a Hensel certificate.
inline bool isotropy_oracle_ternary(const Rational& a, const Rational& b, const Rational& c, const Integer& p) {
    if (a == 0 || b == 0 || c == 0) throw DegenerateError("degenerate ternary form");
    if (!is_prime(p)) throw InvalidPlace("not a prime: " + p.get_str());
    Integer l = 1;
    for (const auto* q : {&a, &b, &c}) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q->get_den_mpz_t());
    Integer A[3] = {Integer(a * l), Integer(b * l), Integer(c * l)};
    long vmin = kInfVal, vmax = 0;
    for (auto& x : A) {
        long e = valuation_int(x, p);
        vmin = std::min(vmin, e);
        vmax = std::max(vmax, e);
    }
    Integer pv = ipow(p, vmin);
    for (auto& x : A) x /= pv;
    const long m = 2 * (vmax - vmin) + 3;

    // a primitive zero can be scaled so its first unit coordinate equals 1
    for (int lead = 0; lead < 3; ++lead) {
        // depth-first over p-adic digits of the other coordinates
        struct Frame {
            Integer x[3];
            long j;
        };
        std::vector<Frame> stack;
        Frame root;
        for (int i = 0; i < 3; ++i) root.x[i] = (i == lead) ? Integer(1) : Integer(0);
        root.j = 0;
        stack.push_back(root);
        while (!stack.empty()) {
            Frame f = stack.back();
            stack.pop_back();
            Integer F = A[0] * f.x[0] * f.x[0] + A[1] * f.x[1] * f.x[1] + A[2] * f.x[2] * f.x[2];
            Integer pj = ipow(p, f.j);
            if (f.j > 0 && F % pj != 0) continue;
            for (int i = 0; i < 3; ++i) {
                long k = valuation_int(2 * A[i] * f.x[i], p);
                if (k != kInfVal && 2 * k < f.j) return true;
            }
            if (f.j >= m) throw InternalError("isotropy oracle exceeded its proven depth");
            // extend by the next digit; coordinates before lead must stay divisible by p
            std::vector<int> free;
            for (int i = 0; i < 3; ++i)
                if (i != lead) free.push_back(i);
            long n = p.get_si();
            for (long d0 = 0; d0 < n; ++d0)
                for (long d1 = 0; d1 < n; ++d1) {
                    Frame g = f;
                    g.j = f.j + 1;
                    long ds[2] = {d0, d1};
                    bool ok = true;
                    for (int t = 0; t < 2; ++t) {
                        int i = free[t];
                        if (f.j == 0 && i < lead && ds[t] != 0) ok = false;
                        g.x[i] += ds[t] * pj;
                    }
                    if (ok) stack.push_back(g);
                }
        }
    }
    return false;
}

}  // namespace sforms
