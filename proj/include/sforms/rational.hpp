#pragma once

#include <gmpxx.h>

#include <cctype>
#include <string>
#include <vector>

#include "errors.hpp"

namespace sforms {

using Integer = mpz_class;
using Rational = mpq_class;
using Vector = std::vector<Rational>;

inline Rational make_rational(const Integer& num, const Integer& den) {
    if (den == 0) throw DegenerateError("zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

// "a/b", with "/b" dropped when b = 1
inline std::string to_string(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline std::string to_string(const Integer& z) { return z.get_str(); }

inline Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw std::invalid_argument("empty rational");
    auto slash = s.find('/');
    auto check = [](const std::string& part) {
        std::size_t i = (!part.empty() && (part[0] == '-' || part[0] == '+')) ? 1 : 0;
        if (i >= part.size()) throw std::invalid_argument("malformed rational");
        for (; i < part.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(part[i])))
                throw std::invalid_argument("malformed rational '" + part + "'");
    };
    std::string a = s.substr(0, slash);
    std::string b = slash == std::string::npos ? "1" : s.substr(slash + 1);
    check(a);
    check(b);
    if (a[0] == '+') a.erase(0, 1);
    if (b[0] == '+') b.erase(0, 1);
    return make_rational(Integer(a), Integer(b));
}

inline Integer ipow(const Integer& base, unsigned long e) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

inline Rational rpow(const Rational& q, long e) {
    if (e >= 0) return Rational(ipow(q.get_num(), e), ipow(q.get_den(), e));
    if (q == 0) throw DegenerateError("zero to a negative power");
    Rational r(ipow(q.get_den(), -e), ipow(q.get_num(), -e));
    r.canonicalize();
    return r;
}

inline Rational rabs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline Integer floor_of(const Rational& q) {
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Integer ceil_of(const Rational& q) {
    Integer r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

// nearest integer, ties toward +inf
inline Integer round_of(const Rational& q) { return floor_of(q + Rational(1, 2)); }

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

inline Integer factorial(unsigned long n) {
    Integer r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

}  // namespace sforms
