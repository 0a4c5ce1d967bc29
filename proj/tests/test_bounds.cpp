#include <gtest/gtest.h>

#include <set>

#include "sforms/bounds.hpp"

using namespace sforms;

namespace {

// exhaustive matrix counts over ℤ/N
long brute_gl(int d, long N, bool sl) {
    const long cells = d * d;
    long total = 0;
    std::vector<long> a(cells, 0);
    for (;;) {
        Matrix m(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(i, j) = a[i * d + j];
        Integer det = mod_floor(m.det().get_num(), N);
        Integer g;
        mpz_gcd(g.get_mpz_t(), det.get_mpz_t(), Integer(N).get_mpz_t());
        if (sl ? det == 1 % N : g == 1) ++total;
        long k = 0;
        while (k < cells && a[k] == N - 1) a[k++] = 0;
        if (k == cells) break;
        ++a[k];
    }
    return total;
}

// complete flags of (ℤ/p)^d for d = 2: lines; d = 3: (line ⊂ plane) pairs
long brute_flags(int d, long p) {
    auto normalize = [&](std::vector<long> v) {
        for (long x : v)
            if (x % p) {
                long inv = 1;
                while ((inv * x) % p != 1) ++inv;
                for (auto& y : v) y = (y * inv) % p;
                break;
            }
        return v;
    };
    std::set<std::vector<long>> lines;
    std::vector<long> v(d, 0);
    for (;;) {
        if (std::any_of(v.begin(), v.end(), [](long x) { return x != 0; })) lines.insert(normalize(v));
        int k = 0;
        while (k < d && v[k] == p - 1) v[k++] = 0;
        if (k == d) break;
        ++v[k];
    }
    if (d == 2) return static_cast<long>(lines.size());
    // each line lies in (p^{d-1}-1)/(p-1) hyperplanes for d = 3: count flags via planes containing it
    long planes_per_line = (p * p - 1) / (p - 1);
    return static_cast<long>(lines.size()) * planes_per_line;
}

const std::vector<std::string> kParametric = {"D", "C'_i", "V_d", "C_T", "N_d", "C_r", "C_i", "C_a", "T_i", "T_a", "Cgen_i", "Cgen_a"};

}  // namespace

TEST(Bounds, MagnitudeBasics) {
    Magnitude a(Rational(12)), b = Magnitude::power(2, 2) * Magnitude(3);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.str(), "2^2 * 3");
    EXPECT_EQ(*Magnitude(Rational(3, 8)).numeric_exact(), Rational(3, 8));
    EXPECT_EQ(compare(Magnitude(2).pow(Rational(1, 2)), Magnitude(Rational(3, 2))), -1);
    EXPECT_EQ(compare(Magnitude(8).pow(Rational(1, 3)), Magnitude(2)), 0);
    EXPECT_THROW(compare(Magnitude::D1(), Magnitude(1)), PreconditionError);
    EXPECT_THROW(Magnitude(Rational(0)), PreconditionError);
    // composite cofactors beyond trial division stay coprime
    Integer big("1000000007");
    Magnitude m = Magnitude(Rational(big * 1000000009)) * Magnitude(Rational(big));
    EXPECT_EQ(m.numeric_power(1), Rational(big * big * 1000000009));
}

TEST(Bounds, CountingFormulas) {
    EXPECT_EQ(card_sl2(2, 1), 6);
    EXPECT_EQ(card_sl2(2, 2), 48);
    EXPECT_EQ(card_sl2(3, 1), 24);
    EXPECT_EQ(card_gl(2, 2, 1), 6);
    EXPECT_EQ(flag_count(2, 2, 1), 3);
    EXPECT_EQ(vol_gl_zp(2, 2), Rational(3, 8));
    EXPECT_EQ(vol_gl_zp(3, 3), Rational(416, 729));
    EXPECT_EQ(vol_gl_zp(1, 7), Rational(6, 7));
    for (int d = 1; d <= 3; ++d)
        for (int p : {2, 3, 5})
            for (unsigned long n = 1; n <= 3; ++n)
                EXPECT_EQ(Rational(card_gl(d, p, n)), Rational(ipow(Integer(p), d * d * n)) * vol_gl_zp(d, p));
}

TEST(Bounds, CountingAgainstBruteForce) {
    EXPECT_EQ(card_sl2(2, 1), brute_gl(2, 2, true));
    EXPECT_EQ(card_sl2(2, 2), brute_gl(2, 4, true));
    EXPECT_EQ(card_sl2(3, 1), brute_gl(2, 3, true));
    EXPECT_EQ(card_gl(2, 2, 1), brute_gl(2, 2, false));
    EXPECT_EQ(card_gl(2, 2, 2), brute_gl(2, 4, false));
    EXPECT_EQ(card_gl(2, 3, 1), brute_gl(2, 3, false));
    EXPECT_EQ(card_gl(3, 2, 1), brute_gl(3, 2, false));
    EXPECT_EQ(flag_count(2, 2, 1), brute_flags(2, 2));
    EXPECT_EQ(flag_count(2, 3, 1), brute_flags(2, 3));
    EXPECT_EQ(flag_count(3, 2, 1), brute_flags(3, 2));
}

TEST(Bounds, XiP) {
    EXPECT_EQ(xi_p(2, 0), 1);
    EXPECT_EQ(xi_p(7, 0), 1);
    EXPECT_EQ(xi_p(2, 1), Rational(5, 6));
    for (int p : {2, 3, 5})
        for (long m = 0; m <= 4; ++m) EXPECT_EQ(xi_p(p, m), xi_p_by_partition(p, m)) << p << " " << m;
    for (int p : {2, 3, 5, 7})
        for (long m = 1; m <= 10; ++m) EXPECT_TRUE(Magnitude(xi_p(p, m)) < xi_decay_bound(p, m));
}

TEST(Bounds, PartitionMeasureSumsToOne) {
    for (int p : {2, 3, 5}) {
        // Σ_{|n|≤K} + two geometric tails
        const long K = 6;
        Rational s = 0;
        for (long n = -K; n <= K; ++n) s += partition_measure(p, n);
        s += 2 * make_rational(p - 1, p + 1) * make_rational(1, ipow(Integer(p), K)) / (p - 1);
        EXPECT_EQ(s, 1);
    }
}

TEST(Bounds, Volumes) {
    // standard form: 𝒟_P = 1
    EXPECT_EQ(vol_orthogonal_ball_padic({1, 1, -1}, 3, 3), make_rational(1, ipow(Integer(3), 9)));
    EXPECT_EQ(vol_orthogonal_ball_padic({3, 1}, 3, 3), make_rational(1, ipow(Integer(3), 3) * 3));
    EXPECT_EQ(vol_w_ball(2, 3, 3), make_rational(1, ipow(Integer(3), 9)));
    EXPECT_THROW(vol_w_ball(2, 3, 2), PreconditionError);
    auto x = vol_x1(2, PlaceSet({2}));
    EXPECT_EQ(x, Magnitude::Vinf() * Magnitude(Rational(3, 8)));
    auto [lo, hi] = vol_orthogonal_ball_real_bounds(3, Rational(1, 10));
    EXPECT_EQ(lo, rpow(Rational(1, 90), 3));
    EXPECT_EQ(hi, 8);
    EXPECT_THROW(vol_orthogonal_ball_real_bounds(3, Rational(1, 2)), PreconditionError);
}

TEST(Bounds, MahlerAndRecurrence) {
    auto m = mahler_bound(2, 1);
    EXPECT_EQ(m, Magnitude(2).pow(Rational(1, 2)) * Magnitude(Rational(4, 3)).pow(Rational(1, 4)));
    EXPECT_EQ(mahler_bound(2, 4), m);
    EXPECT_EQ(mahler_bound(3, Rational(1, 4)), mahler_bound(3, 1) * Magnitude(4));
    auto [C, th] = recurrence_constants(3, Place::prime(2));
    EXPECT_EQ(C, ipow(Integer(3), 6) * 27 * 128);
    EXPECT_EQ(th, Rational(1, 4));
    EXPECT_EQ(recurrence_constants(3, Place::infinity()).first, Integer(32) * 729 * 27);
    EXPECT_EQ(recurrence_goodness_constant(3, Place::prime(5)), 20);
}

TEST(Bounds, PaperExamples) {
    PlaceSet S({2, 3});
    auto t = bound_equiv_raw(3, S, 1, 1, 1, IsoCase::RIsotropic);
    EXPECT_EQ(t.at(Place::prime(3)).value, Magnitude(3));
    EXPECT_EQ(t.at(Place::prime(2)).value, Magnitude(32));
    EXPECT_TRUE(t.at(Place::infinity()).value.parametric());
    auto a = bound_equiv_raw(3, S, 1, 1, 1, IsoCase::RAnisotropic, Integer(3));
    EXPECT_EQ(a.at(Place::infinity()).value, Magnitude(486));
    auto g = bound_generators_raw(3, S, 1, 1, IsoCase::RIsotropic);
    EXPECT_EQ(g.at(Place::prime(3)).value, Magnitude(ipow(Integer(3), 8)));
    EXPECT_EQ(g.at(Place::prime(2)).value, Magnitude::power(2, 21));
    auto ga = bound_generators_raw(3, S, 2, 1, IsoCase::RAnisotropic, Integer(3));
    EXPECT_EQ(ga.at(Place::infinity()).value, Magnitude(486) * Magnitude(2).pow(Rational(3, 2)));
    // |det|_p < 1 raises the finite bound
    auto t9 = bound_equiv_raw(3, S, 1, 1, 9, IsoCase::RIsotropic);
    EXPECT_EQ(t9.at(Place::prime(3)).value, Magnitude(9));
    // volume: height-1 determinant
    EXPECT_EQ(volume_orbit_bound_raw(3, S, 6), constants::V(3) * Magnitude(6).pow(3 * 729));
    EXPECT_EQ(volume_orbit_bound_raw(3, PlaceSet(std::vector<Integer>{}), 4),
              constants::V(3) * Magnitude::power(2, 2 * 729) * Magnitude(16));
}

TEST(Bounds, FormChecks) {
    auto iso = QuadraticForm::diagonal({1, 1, -1});
    auto def = QuadraticForm::diagonal({1, 1, 1});
    PlaceSet S({2});
    EXPECT_NO_THROW(bound_equiv(iso, iso, S, IsoCase::RIsotropic));
    EXPECT_THROW(bound_equiv(def, def, S, IsoCase::RIsotropic), PreconditionError);
    // x²+y²+z² is anisotropic at 2 only
    EXPECT_THROW(bound_equiv(def, def, S, IsoCase::RAnisotropic, Integer(2)), PreconditionError);
    EXPECT_NO_THROW(bound_generators(def, PlaceSet({3}), IsoCase::RAnisotropic, Integer(3)));
    EXPECT_THROW(volume_orbit_bound(def, PlaceSet({2})), PreconditionError);
    EXPECT_NO_THROW(volume_orbit_bound(def, PlaceSet({2, 3})));
}

TEST(Bounds, LedgerTwoPathsAgree) {
    for (int d = 2; d <= 4; ++d)
        for (const auto& c : check_ledger(d, {2, 3, 5})) EXPECT_TRUE(c.agree) << d << " " << c.name;
}

TEST(Bounds, LedgerKnownValues) {
    auto find = [](int d, const std::string& n) {
        for (const auto& e : constants_ledger(d))
            if (e.name == n) return e.value;
        throw std::runtime_error(n);
    };
    EXPECT_EQ(*find(2, "L_d").numeric_exact(), 20736);
    EXPECT_EQ(*find(3, "c_d").numeric_exact(), 5);
    EXPECT_EQ(*find(3, "theta_d").numeric_exact(), Rational(1, 4));
    EXPECT_EQ(*find(3, "w+_d").numeric_exact(), 256);
    EXPECT_EQ(*find(2, "w-_d").numeric_exact(), Rational(1, 8));
    EXPECT_EQ(*find(3, "C_2").numeric_exact(), Integer(729) * 27 * 128);
}

TEST(Bounds, ParametricTags) {
    for (int d = 2; d <= 4; ++d)
        for (const auto& e : constants_ledger(d)) {
            bool expect = std::find(kParametric.begin(), kParametric.end(), e.name) != kParametric.end();
            EXPECT_EQ(e.parametric(), expect) << e.name;
        }
}

TEST(Bounds, Monotone) {
    // norms on a grid; determinants along a divisibility chain (finite-place bounds depend on |det|_p)
    const std::vector<Rational> norms = {1, 2, 3, 5, 8};
    const std::vector<Rational> dets = {1, 2, 6, 12, 60};
    PlaceSet S({2, 3});
    for (auto c : {IsoCase::RIsotropic, IsoCase::RAnisotropic}) {
        std::optional<Integer> p0;
        if (c == IsoCase::RAnisotropic) p0 = Integer(3);
        for (std::size_t i = 0; i < norms.size(); ++i)
            for (std::size_t j = 0; j < dets.size(); ++j) {
                auto t = bound_equiv_raw(3, S, norms[i], norms[i], dets[j], c, p0);
                auto g = bound_generators_raw(3, S, norms[i], dets[j], c, p0);
                if (i + 1 < norms.size()) {
                    auto t2 = bound_equiv_raw(3, S, norms[i + 1], norms[i + 1], dets[j], c, p0);
                    auto g2 = bound_generators_raw(3, S, norms[i + 1], dets[j], c, p0);
                    for (std::size_t r = 0; r < t.rows.size(); ++r) EXPECT_TRUE(t.rows[r].value <= t2.rows[r].value);
                    for (std::size_t r = 0; r < g.rows.size(); ++r) EXPECT_TRUE(g.rows[r].value <= g2.rows[r].value);
                }
                if (j + 1 < dets.size()) {
                    auto t2 = bound_equiv_raw(3, S, norms[i], norms[i], dets[j + 1], c, p0);
                    auto g2 = bound_generators_raw(3, S, norms[i], dets[j + 1], c, p0);
                    for (std::size_t r = 0; r < t.rows.size(); ++r) EXPECT_TRUE(t.rows[r].value <= t2.rows[r].value);
                    for (std::size_t r = 0; r < g.rows.size(); ++r) EXPECT_TRUE(g.rows[r].value <= g2.rows[r].value);
                    EXPECT_TRUE(volume_orbit_bound_raw(3, S, dets[j]) <= volume_orbit_bound_raw(3, S, dets[j + 1]));
                }
            }
    }
}
