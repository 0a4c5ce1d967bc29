#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arith.hpp"
#include "construct.hpp"
#include "local.hpp"
#include "qform.hpp"

namespace sforms {

// Positive quantity ∏ b_i^{e_i} · D1^{x} · Vinf^{y} with pairwise coprime integer bases and rational exponents.
class Magnitude {
public:
    Magnitude() = default;
    Magnitude(const Rational& q) {  // NOLINT: implicit by design
        if (q <= 0) throw PreconditionError("magnitudes are positive");
        insert(q.get_num(), 1);
        insert(q.get_den(), -1);
    }
    Magnitude(long v) : Magnitude(Rational(v)) {}  // NOLINT

    static Magnitude power(const Rational& base, const Rational& e) { return Magnitude(base).pow(e); }
    static Magnitude D1(const Rational& e = 1) {
        Magnitude m;
        m.d1_ = e;
        return m;
    }
    static Magnitude Vinf(const Rational& e = 1) {
        Magnitude m;
        m.vinf_ = e;
        return m;
    }

    Magnitude pow(const Rational& e) const {
        Magnitude m;
        if (e == 0) return m;
        for (const auto& [b, x] : f_) m.f_[b] = x * e;
        m.d1_ = d1_ * e;
        m.vinf_ = vinf_ * e;
        return m;
    }
    friend Magnitude operator*(const Magnitude& a, const Magnitude& b) {
        Magnitude m = a;
        for (const auto& [k, e] : b.f_) m.insert(k, e);
        m.d1_ += b.d1_;
        m.vinf_ += b.vinf_;
        return m;
    }
    friend Magnitude operator/(const Magnitude& a, const Magnitude& b) { return a * b.pow(-1); }
    friend bool operator==(const Magnitude& a, const Magnitude& b) {
        return a.f_ == b.f_ && a.d1_ == b.d1_ && a.vinf_ == b.vinf_;
    }

    const std::map<Integer, Rational>& factors() const { return f_; }
    const Rational& d1_exponent() const { return d1_; }
    const Rational& vinf_exponent() const { return vinf_; }
    bool parametric() const { return d1_ != 0 || vinf_ != 0; }

    // log₂ with the parametric factors evaluated at the given values
    double log2(double d1 = 1.0, double vinf = 1.0) const {
        long double s = 0;
        for (const auto& [b, e] : f_) s += static_cast<long double>(e.get_d()) * log2_int(b);
        s += d1_.get_d() * std::log2(static_cast<long double>(d1));
        s += vinf_.get_d() * std::log2(static_cast<long double>(vinf));
        return static_cast<double>(s);
    }
    double log10(double d1 = 1.0, double vinf = 1.0) const { return log2(d1, vinf) * std::log10(2.0); }

    // exact value of the non-parametric part when all exponents are integers
    std::optional<Rational> numeric_exact(std::size_t max_bits = 1u << 24) const {
        Integer num = 1, den = 1;
        double bits = 0;
        for (const auto& [b, e] : f_) {
            if (!is_integer(e)) return std::nullopt;
            bits += std::abs(e.get_d()) * static_cast<double>(mpz_sizeinbase(b.get_mpz_t(), 2));
        }
        if (bits > static_cast<double>(max_bits)) return std::nullopt;
        for (const auto& [b, e] : f_) {
            Integer x = ipow(b, Integer(abs(e.get_num())).get_ui());
            if (e > 0) num *= x;
            else den *= x;
        }
        return make_rational(num, den);
    }

    // ∏ b^{e·N}: exact numeric part raised to N (N chosen to clear exponent denominators)
    Rational numeric_power(long N) const {
        Integer num = 1, den = 1;
        for (const auto& [b, e] : f_) {
            Rational en = e * N;
            if (!is_integer(en)) throw PreconditionError("power does not clear exponent denominators");
            Integer x = ipow(b, Integer(abs(en.get_num())).get_ui());
            if (en > 0) num *= x;
            else den *= x;
        }
        return make_rational(num, den);
    }

    std::string str() const {
        std::string s;
        auto term = [&](const std::string& base, const Rational& e) {
            if (e == 0) return;
            if (!s.empty()) s += " * ";
            s += base;
            if (e != 1) s += is_integer(e) ? "^" + e.get_str() : "^(" + e.get_str() + ")";
        };
        for (const auto& [b, e] : f_) term(b.get_str(), e);
        term("D1", d1_);
        term("Vinf", vinf_);
        return s.empty() ? "1" : s;
    }

    // exact three-way comparison; throws if the parametric exponents differ
    friend int compare(const Magnitude& a, const Magnitude& b) {
        if (a.d1_ != b.d1_ || a.vinf_ != b.vinf_)
            throw PreconditionError("comparison of magnitudes with different parametric factors");
        Magnitude r = a / b;
        if (r.f_.empty()) return 0;
        long double s = 0, scale = 0;
        for (const auto& [bb, e] : r.f_) {
            long double t = static_cast<long double>(e.get_d()) * log2_int(bb);
            s += t;
            scale += std::fabs(t);
        }
        if (std::fabs(s) > 1e-9L * (1 + scale)) return s > 0 ? 1 : -1;
        Integer L = 1;
        for (const auto& [bb, e] : r.f_) mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), e.get_den_mpz_t());
        Rational v = r.numeric_power(L.get_si());
        return v > 1 ? 1 : v < 1 ? -1 : 0;
    }
    friend bool operator<=(const Magnitude& a, const Magnitude& b) { return compare(a, b) <= 0; }
    friend bool operator<(const Magnitude& a, const Magnitude& b) { return compare(a, b) < 0; }

private:
    std::map<Integer, Rational> f_;
    Rational d1_ = 0, vinf_ = 0;

    static long double log2_int(const Integer& b) {
        long ex = 0;
        double m = mpz_get_d_2exp(&ex, b.get_mpz_t());
        return std::log2(static_cast<long double>(m)) + ex;
    }

    // insert b^e keeping the bases pairwise coprime
    void insert_raw(const Integer& b, const Rational& e) {
        if (b == 1 || e == 0) return;
        for (auto it = f_.begin(); it != f_.end(); ++it) {
            const Integer k = it->first;
            if (k == b) {
                it->second += e;
                if (it->second == 0) f_.erase(it);
                return;
            }
            Integer g;
            mpz_gcd(g.get_mpz_t(), k.get_mpz_t(), b.get_mpz_t());
            if (g > 1) {
                Rational ek = it->second;
                f_.erase(it);
                insert_raw(g, ek);
                insert_raw(Integer(k / g), ek);
                insert_raw(g, e);
                insert_raw(Integer(b / g), e);
                return;
            }
        }
        f_[b] = e;
    }

    void insert(Integer n, const Rational& e) {
        if (e == 0) return;
        n = abs(n);
        for (unsigned long p = 2; p < 10000 && Integer(p) * p <= n; ++p) {
            if (n % p != 0) continue;
            long k = 0;
            while (n % p == 0) {
                n /= p;
                ++k;
            }
            insert_raw(Integer(p), e * k);
        }
        insert_raw(n, e);
    }
};

// ---- Appendix constants (primary path: factored magnitudes) ----------------

inline void require_dim_at_least(int d, int m) {
    if (d < m) throw DimensionError("dimension must be at least " + std::to_string(m));
}

inline long c_d(int d) { return static_cast<long>(d) * (d + 1) / 2 - 1; }
inline Rational theta_d(int d) {
    require_dim_at_least(d, 2);
    return make_rational(1, Integer((d - 1) * (d - 1)));
}

namespace constants {

inline Magnitude fact(int d) { return Magnitude(Rational(factorial(d))); }
inline Magnitude M(long v) { return Magnitude(Rational(v)); }
inline Magnitude P(long b, const Rational& e) { return Magnitude::power(Rational(b), e); }

// 𝓛_d (translates of Siegel sets)
inline Magnitude L(int d) {
    return P(2, d * (d - 1)) * P(d, make_rational(3 * d, 2)) * P(d + 1, d * d) * fact(d).pow(d + 1);
}
// 𝓛'_d (reduced integral forms are small)
inline Magnitude Lprime(int d) { return P(d, make_rational(d, 2)) * P(d + 1, d * d) * fact(d).pow(2 * d + 1); }
// 𝒲_d (change of basis of reduced forms)
inline Magnitude W(int d) { return P(d, make_rational(3 * d, 2)) * P(d + 1, d * d) * fact(d).pow(d + 1); }
// extremal vectors bound
inline Magnitude extremal(int d) { return P(d, Rational(3, 2)) * P(d + 1, d) * fact(d); }
// 𝔟_d, 𝔟'_d (smooth bump functions)
inline Magnitude b(int d) { return P(10, d * d) * P(d, make_rational((d + 2) * (d + 2), 4)); }
inline Magnitude b_bis(int d) { return M(5) * P(d, 3) * P(20 * d, make_rational(d * (d - 1), 4) + 1); }
// 𝒮_d
inline Magnitude S(int d) {
    return M(3) * Magnitude(Rational(3 * d * d) * factorial(d)).pow(make_rational(d * (d - 1), 4) + 1) * b(d);
}
// 𝒟 = 5·𝒟₁^{1/2}
inline Magnitude Dcal() { return M(5) * Magnitude::D1(Rational(1, 2)); }
inline Magnitude Cprime_i(int d) { return M(12) * P(2, 3 * d * d * (d - 1)) * P(d, 2) * Dcal().pow(6) * S(d).pow(12); }
inline Magnitude Cprime_a(int d) {
    return M(10000) * P(2, 2 * d * d * d) * Magnitude(Rational(9 * d * d * d) * factorial(d)).pow(2 * d * (d - 1));
}
inline Magnitude V(int d) {
    long d3 = d * d * d, d4 = d3 * d;
    return (P(2, 2 * d3 + 5) * P(3, 4 * d4) * P(d, 6 * d3 + 1)).pow(c_d(d)) * Magnitude::Vinf();
}
inline Magnitude K(int d) {
    long d3 = d * d * d;
    return P(2, d3) * P(3, 2 * d3 * d) * P(d, 3 * d3);
}
inline Magnitude C_rec(int d, const Place& v) {
    if (v.is_infinite()) return P(2, d + 2) * P(3, 2 * d) * P(d, 3);
    return P(3, 2 * d) * P(d, 3) * Magnitude::power(Rational(v.p), 2 * d + 1);
}
inline Magnitude CT(int d) { return M(8) * Magnitude::Vinf(c_d(d)) / M(d * (d - 1)); }
inline Magnitude N(int d) { return Magnitude(make_rational(4, Integer(d * (d - 1)))).pow(c_d(d)) * Magnitude::Vinf(); }
inline Magnitude Cr(int d) { return M(2) * Magnitude::Vinf(make_rational(1, c_d(d))) / M(d * (d - 1)); }
inline Magnitude w_minus(int d) { return P(2, d - 1) / P(d, 2 * c_d(d)); }
inline Magnitude w_plus(int d) { return P(2, d * d - 1); }
inline Magnitude v_minus(int d) { return Magnitude(make_rational(1, Integer(3 * d))).pow(make_rational(d * (d - 1), 2)); }
inline Magnitude v_plus(int d) { return Magnitude(make_rational(20 * d, 3)).pow(make_rational(d * (d - 1), 2)); }
inline Magnitude C_i(int d) {
    long d3 = d * d * d;
    return P(2, 6 * d3) * P(d, 4 * d3) * fact(d).pow(2 * d * d + 1) * Cprime_i(d) * V(d).pow(6);
}
inline Magnitude C_a(int d) {
    long d3 = d * d * d;
    return P(2, 2 * d3 + 7 * d) * P(d, 2 * d3) * fact(d).pow(7) * Cprime_a(d) * V(d).pow(4);
}
inline Magnitude T_i(int d) {
    long d3 = d * d * d, d4 = d3 * d, d5 = d4 * d;
    return P(2, 2 * d5) * fact(d).pow(4 * d4) * C_i(d) * Lprime(d).pow(2 * d3);
}
inline Magnitude T_a(int d) {
    long d3 = d * d * d, d4 = d3 * d, d5 = d4 * d;
    return P(2, d5) * fact(d).pow(2 * d4) * C_a(d) * Lprime(d).pow(d3);
}
inline Magnitude Cgen_i(int d) { return P(2, 2 * d * d) * M(d) * fact(d).pow(d + 1) * T_i(d).pow(d) * L(d); }
inline Magnitude Cgen_a(int d) { return M(2) * T_a(d).pow(d); }
// A_p, 𝙱_ν, 𝔞_{d,ν}, 𝙲_p
inline Magnitude A(const Place& v) { return Magnitude(Rational(A_const(v))); }
inline Magnitude B(const Place& v) { return Magnitude(B_const(v)); }
inline Magnitude frak_a(int d, const Place& v) { return Magnitude(frak_a_squared(d, v)).pow(Rational(1, 2)); }
inline Magnitude Cgen_place(const Place& v) {
    if (v.is_infinite()) throw InvalidPlace("defined at finite places only");
    return v.p == 2 ? M(8) : Magnitude(Rational(v.p));
}

}  // namespace constants

struct LedgerEntry {
    std::string name;
    std::string formula;
    Magnitude value;
    bool parametric() const { return value.parametric(); }
};

// All explicit constants for a dimension (recurrence constants at ∞ and the primes in `primes`).
inline std::vector<LedgerEntry> constants_ledger(int d, const std::vector<Integer>& primes = {2}) {
    require_dim_at_least(d, 2);
    namespace c = constants;
    std::vector<LedgerEntry> out = {
        {"c_d", "d(d+1)/2 - 1", Magnitude(Rational(c_d(d)))},
        {"theta_d", "1/(d-1)^2", Magnitude(theta_d(d))},
        {"L_d", "2^{d(d-1)} d^{3d/2} (d+1)^{d^2} d!^{d+1}", c::L(d)},
        {"L'_d", "d^{d/2} (d+1)^{d^2} d!^{2d+1}", c::Lprime(d)},
        {"W_d", "d^{3d/2} (d+1)^{d^2} d!^{d+1}", c::W(d)},
        {"E_d", "d^{3/2} (d+1)^d d!", c::extremal(d)},
        {"b_d", "10^{d^2} d^{(d+2)^2/4}", c::b(d)},
        {"b'_d", "5 d^3 (20d)^{d(d-1)/4 + 1}", c::b_bis(d)},
        {"S_d", "3 (3d^2 d!)^{d(d-1)/4 + 1} b_d", c::S(d)},
        {"D", "5 D1^{1/2}", c::Dcal()},
        {"C'_i", "12 2^{3d^2(d-1)} d^2 D^6 S_d^12", c::Cprime_i(d)},
        {"C'_a", "10^4 2^{2d^3} (9d^3 d!)^{2d(d-1)}", c::Cprime_a(d)},
        {"V_d", "(2^{2d^3+5} 3^{4d^4} d^{6d^3+1})^{c_d} Vinf", c::V(d)},
        {"K_d", "2^{d^3} 3^{2d^4} d^{3d^3}", c::K(d)},
        {"C_T", "2^3 Vinf^{c_d} / (d(d-1))", c::CT(d)},
        {"N_d", "(4/(d(d-1)))^{c_d} Vinf", c::N(d)},
        {"C_r", "2 Vinf^{1/c_d} / (d(d-1))", c::Cr(d)},
        {"w-_d", "2^{d-1} / d^{2 c_d}", c::w_minus(d)},
        {"w+_d", "2^{d^2-1}", c::w_plus(d)},
        {"v-_d", "(1/(3d))^{d(d-1)/2}", c::v_minus(d)},
        {"v+_d", "(20d/3)^{d(d-1)/2}", c::v_plus(d)},
        {"C_i", "2^{6d^3} d^{4d^3} d!^{2d^2+1} C'_i V_d^6", c::C_i(d)},
        {"C_a", "2^{2d^3+7d} d^{2d^3} d!^7 C'_a V_d^4", c::C_a(d)},
        {"T_i", "2^{2d^5} d!^{4d^4} C_i L'_d^{2d^3}", c::T_i(d)},
        {"T_a", "2^{d^5} d!^{2d^4} C_a L'_d^{d^3}", c::T_a(d)},
        {"Cgen_i", "2^{2d^2} d d!^{d+1} T_i^d L_d", c::Cgen_i(d)},
        {"Cgen_a", "2 T_a^d", c::Cgen_a(d)},
        {"C_inf", "2^{d+2} 3^{2d} d^3", c::C_rec(d, Place::infinity())},
        {"a_inf", "d", c::frak_a(d, Place::infinity())},
    };
    for (const auto& p : primes) {
        Place v = Place::prime(p);
        out.push_back({"C_" + p.get_str(), "3^{2d} d^3 p^{2d+1}", c::C_rec(d, v)});
        out.push_back({"A_" + p.get_str(), "2 if p = 2 else 1", c::A(v)});
        out.push_back({"B_" + p.get_str(), "4 if p = 2 else p", c::B(v)});
        out.push_back({"a_" + p.get_str(), "A_p sqrt(p)", c::frak_a(d, v)});
        out.push_back({"Cgen_" + p.get_str(), "8 if p = 2 else p", c::Cgen_place(v)});
    }
    return out;
}

// ---- second path: exact fourth powers by direct big-integer arithmetic ------

struct FourthPower {
    Rational value;  // numeric part to the 4th power
    Rational d1 = 0, vinf = 0;  // parametric exponents of the constant itself
};

namespace recompute {

inline Rational Z(long b, long e) {
    if (e >= 0) return Rational(ipow(Integer(b), static_cast<unsigned long>(e)));
    return make_rational(1, ipow(Integer(b), static_cast<unsigned long>(-e)));
}
inline Rational F(int d, long e) { return Rational(ipow(factorial(d), static_cast<unsigned long>(e))); }
inline Rational pw(const Rational& q, long e) { return rpow(q, e); }

inline FourthPower fourth(const std::string& name, int d) {
    const long d2 = d * d, d3 = d2 * d, d4 = d3 * d, d5 = d4 * d, c = c_d(d);
    auto Lp4 = [&]() -> Rational { return Z(d, 2 * d) * Z(d + 1, 4 * d2) * F(d, 8 * d + 4); };
    auto L4 = [&]() -> Rational { return Z(2, 4 * d * (d - 1)) * Z(d, 6 * d) * Z(d + 1, 4 * d2) * F(d, 4 * d + 4); };
    auto b4 = [&]() -> Rational { return Z(10, 4 * d2) * Z(d, (d + 2) * (d + 2)); };
    // (3d²·d!)^{4(d(d−1)/4 + 1)} = (3d²·d!)^{d(d−1)+4}
    auto S4 = [&]() -> Rational { return Z(3, 4) * pw(Rational(3 * d2) * factorial(d), d * (d - 1) + 4) * b4(); };
    auto Cpi4 = [&]() -> Rational { return Z(12, 4) * Z(2, 12 * d2 * (d - 1)) * Z(d, 8) * Z(5, 24) * pw(S4(), 12); };
    auto Cpa4 = [&]() -> Rational {
        return Z(10, 16) * Z(2, 8 * d3) * pw(Rational(9 * d3) * factorial(d), 8 * d * (d - 1));
    };
    auto V4 = [&]() -> Rational { return pw(Z(2, 2 * d3 + 5) * Z(3, 4 * d4) * Z(d, 6 * d3 + 1), 4 * c); };
    auto Ci4 = [&]() -> Rational { return Z(2, 24 * d3) * Z(d, 16 * d3) * F(d, 4 * (2 * d2 + 1)) * Cpi4() * pw(V4(), 6); };
    auto Ca4 = [&]() -> Rational { return Z(2, 4 * (2 * d3 + 7 * d)) * Z(d, 8 * d3) * F(d, 28) * Cpa4() * pw(V4(), 4); };
    auto Ti4 = [&]() -> Rational { return Z(2, 8 * d5) * F(d, 16 * d4) * Ci4() * pw(Lp4(), 2 * d3); };
    auto Ta4 = [&]() -> Rational { return Z(2, 4 * d5) * F(d, 8 * d4) * Ca4() * pw(Lp4(), d3); };
    Rational dd(d);
    Rational base4 = Rational(d * (d - 1)) * Rational(d * (d - 1));
    base4 *= base4;
    if (name == "c_d") return {pw(Rational(c), 4)};
    if (name == "theta_d") return {make_rational(1, ipow(Integer(d - 1), 8))};
    if (name == "L_d") return {L4()};
    if (name == "L'_d") return {Lp4()};
    if (name == "W_d") return {Z(d, 6 * d) * Z(d + 1, 4 * d2) * F(d, 4 * d + 4)};
    if (name == "E_d") return {Z(d, 6) * Z(d + 1, 4 * d) * F(d, 4)};
    if (name == "b_d") return {b4()};
    if (name == "b'_d") return {Z(5, 4) * Z(d, 12) * Z(20 * d, d * (d - 1) + 4)};
    if (name == "S_d") return {S4()};
    if (name == "D") return {Z(5, 4), Rational(1, 2)};
    if (name == "C'_i") return {Cpi4(), 3};
    if (name == "C'_a") return {Cpa4()};
    if (name == "V_d") return {V4(), 0, 1};
    if (name == "K_d") return {Z(2, 4 * d3) * Z(3, 8 * d4) * Z(d, 12 * d3)};
    if (name == "C_T") return {Z(2, 12) / base4, 0, Rational(c)};
    if (name == "N_d") return {pw(make_rational(4, Integer(d * (d - 1))), 4 * c), 0, 1};
    if (name == "C_r") return {Z(2, 4) / base4, 0, make_rational(1, c)};
    if (name == "w-_d") return {Z(2, 4 * (d - 1)) / Z(d, 8 * c)};
    if (name == "w+_d") return {Z(2, 4 * (d2 - 1))};
    if (name == "v-_d") return {pw(make_rational(1, Integer(3 * d)), 2 * d * (d - 1))};
    if (name == "v+_d") return {pw(make_rational(20 * d, 3), 2 * d * (d - 1))};
    if (name == "C_i") return {Ci4(), 3, 6};
    if (name == "C_a") return {Ca4(), 0, 4};
    if (name == "T_i") return {Ti4(), 3, 6};
    if (name == "T_a") return {Ta4(), 0, 4};
    if (name == "Cgen_i") return {Z(2, 8 * d2) * Z(d, 4) * F(d, 4 * d + 4) * pw(Ti4(), d) * L4(), Rational(3 * d), Rational(6 * d)};
    if (name == "Cgen_a") return {Z(2, 4) * pw(Ta4(), d), 0, Rational(4 * d)};
    if (name == "C_inf") return {Z(2, 4 * d + 8) * Z(3, 8 * d) * Z(d, 12)};
    if (name == "a_inf") return {Z(d, 4)};
    auto place_of = [&](const std::string& pre) -> std::optional<Integer> {
        if (name.rfind(pre, 0) != 0) return std::nullopt;
        return Integer(name.substr(pre.size()));
    };
    if (auto p = place_of("Cgen_")) return {pw(Rational(*p == 2 ? Integer(8) : *p), 4)};
    if (auto p = place_of("C_")) return {Z(3, 8 * d) * Z(d, 12) * pw(Rational(*p), 8 * d + 4)};
    if (auto p = place_of("A_")) return {Rational(*p == 2 ? 16 : 1)};
    if (auto p = place_of("B_")) return {pw(Rational(*p == 2 ? Integer(4) : *p), 4)};
    if (auto p = place_of("a_")) {
        Rational a = *p == 2 ? Rational(4) : Rational(1);
        return {a * a * Rational(*p) * Rational(*p)};
    }
    throw PreconditionError("unknown constant " + name);
}

}  // namespace recompute

struct LedgerCheck {
    std::string name;
    bool agree;
};

// Both paths agree on the exact 4th power and on the parametric exponents.
inline std::vector<LedgerCheck> check_ledger(int d, const std::vector<Integer>& primes = {2}) {
    std::vector<LedgerCheck> out;
    for (const auto& e : constants_ledger(d, primes)) {
        auto r = recompute::fourth(e.name, d);
        bool ok = e.value.numeric_power(4) == r.value && e.value.d1_exponent() == r.d1 &&
                  e.value.vinf_exponent() == r.vinf;
        out.push_back({e.name, ok});
    }
    return out;
}

// ---- theorem bounds --------------------------------------------------------

enum class IsoCase { RIsotropic, RAnisotropic };

struct PlaceBound {
    Place place;
    Magnitude value;
    bool strict = false;  // the bound is a strict inequality
};

struct BoundTable {
    std::vector<PlaceBound> rows;
    bool parametric() const {
        for (const auto& r : rows)
            if (r.value.parametric()) return true;
        return false;
    }
    const PlaceBound& at(const Place& v) const {
        for (const auto& r : rows)
            if (r.place == v) return r;
        throw InvalidPlace("place not in table: " + v.str());
    }
};

inline Magnitude inv_sqrt_abs(const Rational& det, const Integer& p) {
    return Magnitude(abs_nu(det, Place::prime(p))).pow(Rational(-1, 2));
}

inline Magnitude pS_mag(const PlaceSet& S) { return Magnitude(Rational(S.p_S)); }

// Equivalence search bounds from norms and det Q1 (norms are coefficient norms at ∞).
inline BoundTable bound_equiv_raw(int d, const PlaceSet& S, const Rational& n1, const Rational& n2, const Rational& det1,
                                  IsoCase c, std::optional<Integer> p0 = std::nullopt) {
    require_dim_at_least(d, 3);
    if (n1 <= 0 || n2 <= 0 || det1 == 0) throw PreconditionError("norms must be positive and det nonzero");
    BoundTable t;
    const long d3 = static_cast<long>(d) * d * d, d6 = d3 * d3;
    Magnitude nn = Magnitude(n1) * Magnitude(n2);
    auto finite = [&](const Integer& p) -> Magnitude {
        if (p == 2) return Magnitude::power(2, d + 2) * inv_sqrt_abs(det1, p);
        return Magnitude(Rational(p)) * inv_sqrt_abs(det1, p);
    };
    if (c == IsoCase::RIsotropic) {
        t.rows.push_back({Place::infinity(), constants::C_i(d) * pS_mag(S).pow(19 * d6) * nn.pow(2 * d3), true});
        for (const auto& p : S.finite) t.rows.push_back({Place::prime(p), finite(p), false});
        return t;
    }
    if (!p0 || !S.contains(*p0)) throw PreconditionError("anisotropic case needs p0 in S");
    for (const auto& p : S.finite) {
        if (p == *p0)
            t.rows.push_back({Place::prime(p),
                              constants::C_a(d) * pS_mag(S).pow(13 * d6) * nn.pow(make_rational(d3, 2) + 3 * d), true});
        else
            t.rows.push_back({Place::prime(p), finite(p), false});
    }
    Magnitude inf = Magnitude(Rational(ipow(Integer(d), d + 1) * factorial(d))) * Magnitude(n1).pow(make_rational(d - 1, 2)) *
                    Magnitude(n2).pow(Rational(1, 2));
    t.rows.insert(t.rows.begin(), {Place::infinity(), inf, false});
    return t;
}

inline void check_case(const QuadraticForm& q, const PlaceSet& S, IsoCase c, const std::optional<Integer>& p0) {
    if (!q.is_integral() || !q.nondegenerate()) throw PreconditionError("form must be integral and nondegenerate");
    bool r_iso = !q.is_definite();
    if (c == IsoCase::RIsotropic && !r_iso) throw PreconditionError("form is R-anisotropic");
    if (c == IsoCase::RAnisotropic) {
        if (r_iso) throw PreconditionError("form is R-isotropic");
        if (!p0 || !S.contains(*p0)) throw PreconditionError("anisotropic case needs p0 in S");
        if (!is_isotropic(q, Place::prime(*p0))) throw PreconditionError("form is anisotropic at p0");
    }
}

inline BoundTable bound_equiv(const QuadraticForm& q1, const QuadraticForm& q2, const PlaceSet& S, IsoCase c,
                              std::optional<Integer> p0 = std::nullopt) {
    if (q1.dim() != q2.dim()) throw DimensionError("forms of different dimension");
    check_case(q1, S, c, p0);
    check_case(q2, S, c, p0);
    return bound_equiv_raw(static_cast<int>(q1.dim()), S, q1.coefficient_norm(Place::infinity()),
                           q2.coefficient_norm(Place::infinity()), q1.det(), c, p0);
}

inline BoundTable bound_generators_raw(int d, const PlaceSet& S, const Rational& n, const Rational& det, IsoCase c,
                                       std::optional<Integer> p0 = std::nullopt) {
    require_dim_at_least(d, 3);
    if (n <= 0 || det == 0) throw PreconditionError("norm must be positive and det nonzero");
    BoundTable t;
    const long d6 = static_cast<long>(d) * d * d * d * d * d, d7 = d6 * d;
    auto finite = [&](const Integer& p) -> Magnitude {
        if (p == 2) return Magnitude::power(2, d * d + 3 * d + 3) * inv_sqrt_abs(det, p);
        return Magnitude(Rational(p)).pow(2 * d + 2) * inv_sqrt_abs(det, p);
    };
    if (c == IsoCase::RIsotropic) {
        t.rows.push_back({Place::infinity(), constants::Cgen_i(d) * pS_mag(S).pow(20 * d7) * Magnitude(n).pow(5 * d6), false});
        for (const auto& p : S.finite) t.rows.push_back({Place::prime(p), finite(p), false});
        return t;
    }
    if (!p0 || !S.contains(*p0)) throw PreconditionError("anisotropic case needs p0 in S");
    t.rows.push_back({Place::infinity(),
                      Magnitude(Rational(ipow(Integer(d), d + 1) * factorial(d))) * Magnitude(n).pow(make_rational(d, 2)),
                      false});
    for (const auto& p : S.finite) {
        if (p == *p0)
            t.rows.push_back({Place::prime(p),
                              constants::Cgen_a(d) * pS_mag(S).pow(14 * d7) * Magnitude(n).pow(3 * d6) * inv_sqrt_abs(det, p),
                              false});
        else
            t.rows.push_back({Place::prime(p), finite(p), false});
    }
    return t;
}

inline BoundTable bound_generators(const QuadraticForm& q, const PlaceSet& S, IsoCase c,
                                   std::optional<Integer> p0 = std::nullopt) {
    check_case(q, S, c, p0);
    return bound_generators_raw(static_cast<int>(q.dim()), S, q.coefficient_norm(Place::infinity()), q.det(), c, p0);
}

// ℋ_S(x) = |x|_∞ ∏_{p ∈ S_f} |x|_p
inline Rational height_S(const Rational& x, const PlaceSet& S) {
    Rational h = rabs(x);
    for (const auto& p : S.finite) h *= abs_nu(x, Place::prime(p));
    return h;
}

inline Magnitude volume_orbit_bound_raw(int d, const PlaceSet& S, const Rational& det) {
    require_dim_at_least(d, 3);
    if (det == 0) throw DegenerateError("det must be nonzero");
    const long d6 = static_cast<long>(d) * d * d * d * d * d;
    Rational e = make_rational(d + 1, 2);
    if (S.finite.empty()) return constants::V(d) * Magnitude::power(2, 2 * d6) * Magnitude(rabs(det)).pow(e);
    return constants::V(d) * pS_mag(S).pow(3 * d6) * Magnitude(height_S(det, S)).pow(e);
}

// Q_S is ℚ_S-isotropic iff Q is isotropic at some place of S
inline Magnitude volume_orbit_bound(const QuadraticForm& q, const PlaceSet& S) {
    if (!q.is_integral() || !q.nondegenerate()) throw PreconditionError("form must be integral and nondegenerate");
    bool iso = false;
    for (const auto& v : S.places()) iso = iso || is_isotropic(q, v);
    if (!iso) throw PreconditionError("form is anisotropic over Q_S");
    return volume_orbit_bound_raw(static_cast<int>(q.dim()), S, q.det());
}

// ---- counting and volumes ---------------------------------------------------

inline void require_prime(const Integer& p) {
    if (!is_prime(p)) throw InvalidPlace("not a prime: " + p.get_str());
}

inline Rational vol_gl_zp(int d, const Integer& p) {
    require_dim_at_least(d, 1);
    require_prime(p);
    Rational v = 1;
    for (int j = 1; j <= d; ++j) v *= 1 - make_rational(1, ipow(p, j));
    return v;
}

inline Integer card_sl2(const Integer& p, unsigned long n) {
    require_prime(p);
    if (n < 1) throw PreconditionError("n must be positive");
    return ipow(p, 3 * n) - ipow(p, 3 * n - 2);
}

inline Integer card_gl(int d, const Integer& p, unsigned long n) {
    if (n < 1) throw PreconditionError("n must be positive");
    Rational v = Rational(ipow(p, static_cast<unsigned long>(d) * d * n)) * vol_gl_zp(d, p);
    return v.get_num();
}

// number of complete flags of (ℤ/pⁿ)^d
inline Integer flag_count(int d, const Integer& p, unsigned long n) {
    if (n < 1) throw PreconditionError("n must be positive");
    Integer phi = ipow(p, n) - ipow(p, n - 1);
    Rational v = make_rational(ipow(p, static_cast<unsigned long>(d) * (d + 1) / 2 * n), ipow(phi, d)) * vol_gl_zp(d, p);
    if (!is_integer(v)) throw InternalError("flag count is not an integer");
    return v.get_num();
}

inline Rational xi_p(const Integer& p, long m) {
    require_prime(p);
    if (m < 0) throw PreconditionError("m must be nonnegative");
    return make_rational(1, ipow(p, m)) / (p + 1) * (Rational(2 * m + 1) * (p - 1) + 2);
}

inline Rational partition_measure(const Integer& p, long n) {
    require_prime(p);
    return make_rational(p - 1, p + 1) / ipow(p, std::labs(n));
}

// Ξ_p(a_{p,m}) summed cell by cell: ‖a_{p,m} k e₁‖⁻¹ is constant on each cell, tails are geometric
inline Rational xi_p_by_partition(const Integer& p, long m) {
    require_prime(p);
    auto cell = [&](long n) -> Rational {
        // k e₁ = (k11, k21): |k11| = p^{-max(n,0)}, |k21| = p^{-max(-n,0)}
        Rational a11 = make_rational(1, ipow(p, std::max(n, 0L))), a21 = make_rational(1, ipow(p, std::max(-n, 0L)));
        Rational pm = Rational(ipow(p, m));
        Rational norm = std::max(Rational(a11 * pm), Rational(a21 / pm));
        return 1 / norm;
    };
    const long K = 2 * m + 1;
    Rational s = 0;
    for (long n = -K; n <= K; ++n) s += partition_measure(p, n) * cell(n);
    // Σ_{|n|>K} p^{-|n|} on each side = p^{-K}/(p-1)
    Rational tail = make_rational(p - 1, p + 1) * make_rational(1, ipow(p, K)) / (p - 1);
    s += tail * cell(K + 1) + tail * cell(-K - 1);
    return s;
}

// 10·p^{-m/2}
inline Magnitude xi_decay_bound(const Integer& p, long m) {
    require_prime(p);
    return Magnitude(10) * Magnitude(Rational(p)).pow(make_rational(-m, 2));
}

// 𝒟_P · p^{-d(d-1)n/2}
inline Rational vol_orthogonal_ball_padic(const Vector& diag, const Integer& p, long n) {
    require_prime(p);
    if (n < 3) throw PreconditionError("n must be at least 3");
    const long d = static_cast<long>(diag.size());
    Rational D = 1;
    for (long i = 0; i < d; ++i)
        for (long j = i + 1; j < d; ++j) {
            if (diag[i] == 0 || diag[j] == 0) throw DegenerateError("degenerate diagonal form");
            D *= std::min(Rational(1), abs_nu(diag[i] / diag[j], Place::prime(p)));
        }
    return D / ipow(p, static_cast<unsigned long>(d * (d - 1) / 2 * n));
}

inline std::pair<Rational, Rational> vol_orthogonal_ball_real_bounds(int d, const Rational& r) {
    require_dim_at_least(d, 3);
    if (r <= 0 || r > make_rational(2, Integer(5 * d))) throw PreconditionError("r must lie in (0, 2/(5d)]");
    long e = static_cast<long>(d) * (d - 1) / 2;
    Rational rp = rpow(r, e);
    Rational lo = rpow(make_rational(1, Integer(3 * d)), e) * rp, hi = rpow(make_rational(20 * d, 3), e) * rp;
    return {lo, hi};
}

inline Rational vol_w_ball(int d, const Integer& p, long n) {
    require_prime(p);
    if (n < 3) throw PreconditionError("n must be at least 3");
    return make_rational(1, ipow(p, static_cast<unsigned long>((c_d(d) + 1) * n)));
}

inline Magnitude vol_x1(int d, const PlaceSet& S) {
    Magnitude v = Magnitude::Vinf();
    for (const auto& p : S.finite) v = v * Magnitude(vol_gl_zp(d, p));
    return v;
}

// √d (2/√3)^{(d−1)²/2} max{1, α₁^{−(d−1)}}, α₁ given by its square
inline Magnitude mahler_bound(int d, const Rational& alpha1_sq) {
    require_dim_at_least(d, 2);
    if (alpha1_sq <= 0) throw PreconditionError("alpha1 must be positive");
    Magnitude m = Magnitude(Rational(d)).pow(Rational(1, 2)) * Magnitude(Rational(4, 3)).pow(make_rational((d - 1) * (d - 1), 4));
    if (alpha1_sq < 1) m = m * Magnitude(alpha1_sq).pow(make_rational(-(d - 1), 2));
    return m;
}

// (C_{ν,d}, θ_d) of the recurrence statement
inline std::pair<Integer, Rational> recurrence_constants(int d, const Place& v) {
    auto c = constants::C_rec(d, v).numeric_exact();
    return {c->get_num(), theta_d(d)};
}

// goodness constant used inside the recurrence proof: (d−1)²p, or 4(d−1)² at ∞
inline Integer recurrence_goodness_constant(int d, const Place& v) {
    Integer s = Integer(d - 1) * (d - 1);
    return v.is_infinite() ? Integer(4 * s) : Integer(s * v.p);
}

}  // namespace sforms
