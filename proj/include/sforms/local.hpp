#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "arith.hpp"
#include "qform.hpp"

namespace sforms {

struct LocalInvariants {
    Place place;
    int dim = 0;
    Rational disc = 1;  // representative in 𝒞_ν
    int hasse = 1;      // finite places only
    Signature sig;      // ∞ only

    friend bool operator==(const LocalInvariants& a, const LocalInvariants& b) {
        if (a.place != b.place || a.dim != b.dim || a.disc != b.disc) return false;
        return a.place.is_infinite() ? a.sig == b.sig : a.hasse == b.hasse;
    }
    friend bool operator!=(const LocalInvariants& a, const LocalInvariants& b) { return !(a == b); }
};

inline LocalInvariants invariants_of_diagonal(const Vector& a, const Place& v) {
    LocalInvariants inv;
    inv.place = v;
    inv.dim = static_cast<int>(a.size());
    Rational prod = 1;
    for (const auto& x : a) {
        if (x == 0) throw DegenerateError("degenerate form has no local invariants");
        prod *= x;
        if (x > 0) ++inv.sig.pos;
        else ++inv.sig.neg;
    }
    inv.disc = class_rep_of(prod, v);
    if (v.is_finite())
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = i + 1; j < a.size(); ++j) inv.hasse *= hilbert_symbol(a[i], a[j], v);
    return inv;
}

inline LocalInvariants local_invariants(const QuadraticForm& q, const Place& v) {
    if (!q.nondegenerate()) throw DegenerateError("degenerate form has no local invariants");
    return invariants_of_diagonal(rational_diagonalize(q.gram()).diag, v);
}

struct StandardForm {
    Place place;
    Vector diag;
    bool isotropic = false;
    int hyperbolic_planes = 0;
    Vector kernel;
    LocalInvariants inv;

    QuadraticForm form() const { return QuadraticForm::diagonal(diag); }
};

// Anisotropic kernels of dimension k at ν (k = 0 gives the empty form).
inline std::vector<Vector> anisotropic_kernels(const Place& v, int k) {
    if (k == 0) return {Vector{}};
    if (v.is_infinite()) return {Vector(k, Rational(1)), Vector(k, Rational(-1))};
    std::vector<Vector> out;
    if (k == 1) {
        for (const auto& c : class_representatives(v)) out.push_back({c});
        return out;
    }
    const Rational p(v.p);
    if (v.p == 2) {
        if (k == 2)
            return {{1, 1}, {-1, -1}, {1, 3}, {2, 6}, {1, -3}, {-1, 3}, {1, 2},
                    {-1, -2}, {1, -2}, {3, -6}, {1, 6}, {2, 3}, {1, -6}, {-1, 6}};
        if (k == 3) {
            for (const auto& c : class_representatives(v)) out.push_back({c, c, c});
            return out;
        }
        if (k == 4) return {{1, 1, 1, 1}};
        return {};
    }
    const Rational n(nonresidue(v.p));
    if (k == 2) return {{1, -n}, {p, -p * n}, {1, -p}, {n, -p * n}, {1, -p * n}, {n, -p}};
    if (k == 3) return {{1, -n, p}, {1, -n, n * p}, {1, p, -n * p}, {n, p, -n * p}};
    if (k == 4) return {{1, -n, p, -n * p}};
    return {};
}

inline std::vector<StandardForm> build_catalog(const Place& v, int d) {
    std::vector<StandardForm> out;
    for (int m = 0; 2 * m <= d; ++m)
        for (const auto& ker : anisotropic_kernels(v, d - 2 * m)) {
            StandardForm s;
            s.place = v;
            s.hyperbolic_planes = m;
            s.isotropic = m > 0;
            s.kernel = ker;
            for (int i = 0; i < m; ++i) {
                s.diag.push_back(1);
                s.diag.push_back(-1);
            }
            s.diag.insert(s.diag.end(), ker.begin(), ker.end());
            s.inv = invariants_of_diagonal(s.diag, v);
            out.push_back(std::move(s));
        }
    return out;
}

using Catalog = std::shared_ptr<const std::vector<StandardForm>>;

inline Catalog catalog(const Place& v, int d) {
    if (d < 1) throw DimensionError("catalog dimension must be at least 1");
    static std::mutex mu;
    static std::map<std::pair<Integer, int>, Catalog> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(v.p, d);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto c = std::make_shared<const std::vector<StandardForm>>(build_catalog(v, d));
    cache.emplace(key, c);
    return c;
}

// empty when the invariant tuple is not realized in this dimension
inline std::optional<StandardForm> standard_form_for_invariants(const LocalInvariants& inv) {
    for (const auto& s : *catalog(inv.place, inv.dim))
        if (s.inv == inv) return s;
    return std::nullopt;
}

inline StandardForm standard_form_of(const QuadraticForm& q, const Place& v) {
    auto s = standard_form_for_invariants(local_invariants(q, v));
    if (!s) throw InternalError("no standard form matches the invariants of a realized form");
    return *s;
}

inline bool is_isotropic(const QuadraticForm& q, const Place& v) {
    if (!q.nondegenerate()) throw DegenerateError("isotropy of a degenerate form");
    if (v.is_infinite()) {
        auto s = q.signature();
        return s.pos > 0 && s.neg > 0;
    }
    if (q.dim() >= 5) return true;
    return standard_form_of(q, v).isotropic;
}

inline bool equivalent_local(const QuadraticForm& a, const QuadraticForm& b, const Place& v) {
    if (a.dim() != b.dim()) throw DimensionError("forms of different dimension");
    return local_invariants(a, v) == local_invariants(b, v);
}

inline bool equivalent_QS(const QuadraticForm& a, const QuadraticForm& b, const PlaceSet& S) {
    for (const auto& v : S.places())
        if (!equivalent_local(a, b, v)) return false;
    return true;
}

}  // namespace sforms
