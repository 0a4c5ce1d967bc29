#include <gtest/gtest.h>

#include <random>

#include "sforms/arith.hpp"

using namespace sforms;

namespace {

// a/c is a square in Q_p iff even valuation and a square unit part mod p (mod 8 at 2)
bool brute_is_square(const Rational& q, const Integer& p) {
    long v = padic_valuation(q, p);
    if (v % 2) return false;
    Rational u = q / rpow(Rational(p), v);
    Integer m = p == 2 ? Integer(8) : p * p * p;
    Integer r = unit_residue(u, m);
    for (Integer x = 0; x < m; ++x)
        if (x % p != 0 && mod_floor(x * x, m) == r) return true;
    return false;
}

const std::vector<Rational> kSmall = {1, -1, 2, -2, 3, -3, 5, -5, 6, -6, 10, -10};

}  // namespace

TEST(Arith, Valuation) {
    EXPECT_EQ(padic_valuation(24, 2), 3);
    EXPECT_EQ(padic_valuation(Rational(1, 9), 3), -2);
    EXPECT_EQ(padic_valuation(0, 5), kInfVal);
    EXPECT_THROW(padic_valuation(3, 4), InvalidPlace);
    EXPECT_THROW(Place::prime(1), InvalidPlace);
}

TEST(Arith, AbsoluteValueIdentity) {
    for (int n = -40; n <= 40; ++n)
        for (int d = 1; d <= 12; ++d) {
            Rational q = make_rational(n, d);
            if (q == 0) continue;
            for (int p : {2, 3, 5, 7}) {
                long v = padic_valuation(q, p);
                EXPECT_EQ(abs_nu(q, Place::prime(p)) * rpow(Rational(p), v), 1);
            }
        }
}

TEST(Arith, ProductFormula) {
    std::mt19937 rng(7);
    for (int it = 0; it < 200; ++it) {
        Rational q = make_rational(Integer(int(rng() % 20000) - 10000), Integer(int(rng() % 999) + 1));
        if (q == 0) continue;
        Rational prod = rabs(q);
        Integer nd = q.get_num() * q.get_den();
        for (int p = 2; p < 10000; ++p)
            if (is_prime(p) && nd % p == 0) prod *= abs_nu(q, Place::prime(p));
        EXPECT_EQ(prod, 1);
    }
}

TEST(Arith, NuNorm) {
    Matrix a{{1, Rational(1, 2)}, {4, 3}};
    EXPECT_EQ(nu_norm(a, Place::prime(2)), 2);
    EXPECT_EQ(nu_norm(Matrix::identity(2), Place::infinity()), 1);
    EXPECT_EQ(nu_norm(Matrix{{6, 9}}, Place::prime(3)), Rational(1, 3));
    EXPECT_THROW(nu_norm(Matrix{}, Place::infinity()), DimensionError);
    EXPECT_EQ(s_norm(a, PlaceSet({2})), 4);
}

TEST(Arith, Height) {
    auto h = s_height({3, 4}, PlaceSet(), HeightMode::Euclidean);
    ASSERT_TRUE(h.exact);
    EXPECT_EQ(*h.exact, 5);
    EXPECT_EQ(h.squared, 25);
    EXPECT_EQ(*s_height({2, 0}, PlaceSet({2}), HeightMode::MaxNorm).exact, 1);
    EXPECT_EQ(*s_height({1, 1}, PlaceSet({2, 3, 5}), HeightMode::MaxNorm).exact, 1);
    auto e = s_height({1, 1}, PlaceSet(), HeightMode::Euclidean);
    EXPECT_FALSE(e.exact);
    EXPECT_EQ(e.squared, 2);
}

TEST(Arith, NonresidueConvention) {
    EXPECT_EQ(nonresidue(3), 2);
    EXPECT_EQ(nonresidue(5), 2);
    EXPECT_EQ(nonresidue(7), 3);
    EXPECT_EQ(nonresidue(17), 3);
    EXPECT_EQ(nonresidue(41), 3);
}

TEST(Arith, SquareClassExamples) {
    auto s = square_class(18, Place::prime(2));
    EXPECT_EQ(s.rep, 2);
    ASSERT_TRUE(s.witness);
    EXPECT_EQ(*s.witness, 3);
    EXPECT_EQ(square_class(-1, Place::infinity()).rep, -1);
    auto t = square_class(50, Place::prime(5));
    EXPECT_EQ(t.rep, 2);  // 50 = 2·5², 2 a nonresidue mod 5
    EXPECT_EQ(*t.witness, 5);
    EXPECT_THROW(square_class(0, Place::prime(3)), DegenerateError);
}

TEST(Arith, SquareClassAgreesWithResidueSearch) {
    for (int p : {2, 3, 5, 7}) {
        Place v = Place::prime(p);
        auto reps = class_representatives(v);
        for (int n = -60; n <= 60; ++n)
            for (int d : {1, 2, 3, 4, 5, 7, 9, 12}) {
                if (n == 0) continue;
                Rational a = make_rational(n, d);
                auto s = square_class(a, v);
                EXPECT_TRUE(std::find(reps.begin(), reps.end(), s.rep) != reps.end());
                EXPECT_TRUE(brute_is_square(a / s.rep, p)) << to_string(a) << " at " << p;
                int hits = 0;
                for (const auto& c : reps) hits += brute_is_square(a / c, p);
                EXPECT_EQ(hits, 1);
                if (s.witness) EXPECT_EQ(s.rep * *s.witness * *s.witness, a);
            }
    }
}

TEST(Arith, HilbertExamples) {
    EXPECT_EQ(hilbert_symbol(-1, -1, 2), -1);
    for (int p : {2, 3, 5, 7})
        for (const auto& b : kSmall) EXPECT_EQ(hilbert_symbol(1, b, p), 1);
    EXPECT_EQ(hilbert_symbol(2, 3, 5), 1);
    EXPECT_THROW(hilbert_symbol(0, 1, 3), DegenerateError);
}

TEST(Arith, HilbertAlgebraicProperties) {
    for (int p : {2, 3, 5, 7}) {
        auto reps = class_representatives(Place::prime(p));
        for (const auto& a : reps) {
            EXPECT_EQ(hilbert_symbol(a, -a, p), 1);
            for (const auto& b : reps) {
                EXPECT_EQ(hilbert_symbol(a, b, p), hilbert_symbol(b, a, p));
                for (const auto& c : reps)
                    EXPECT_EQ(hilbert_symbol(a, b * c, p), hilbert_symbol(a, b, p) * hilbert_symbol(a, c, p));
            }
        }
    }
}

TEST(Arith, HilbertReciprocity) {
    for (const auto& a : kSmall)
        for (const auto& b : kSmall) {
            int prod = hilbert_symbol(a, b, Place::infinity());
            for (int p : {2, 3, 5}) prod *= hilbert_symbol(a, b, p);
            EXPECT_EQ(prod, 1);
        }
}

TEST(Arith, HilbertAgreesWithIsotropyOracle) {
    for (int p : {2, 3, 5})
        for (const auto& a : kSmall)
            for (const auto& b : kSmall)
                EXPECT_EQ(hilbert_symbol(a, b, p) == 1, isotropy_oracle_ternary(a, b, -1, p))
                    << to_string(a) << "," << to_string(b) << " p=" << p;
}

TEST(Arith, IsotropyOracleExamples) {
    EXPECT_FALSE(isotropy_oracle_ternary(1, 1, 1, 2));
    for (int p : {2, 3, 5, 7, 11}) EXPECT_TRUE(isotropy_oracle_ternary(1, -1, 1, p));
    // x² − 2y² + 5z² over Q_5: (−5, 10)_5 = −1, frozen from the residue search
    EXPECT_FALSE(isotropy_oracle_ternary(1, -2, 5, 5));
    EXPECT_THROW(isotropy_oracle_ternary(1, 0, 1, 3), DegenerateError);
}

TEST(Arith, ParseAndPrint) {
    EXPECT_EQ(to_string(parse_rational(" -6/4 ")), "-3/2");
    EXPECT_EQ(to_string(parse_rational("7")), "7");
    EXPECT_THROW(parse_rational("1/0"), DegenerateError);
    EXPECT_THROW(parse_rational("x"), std::invalid_argument);
    EXPECT_EQ(parse_place_set("inf,17,2,2").str(), "inf,2,17");
    EXPECT_EQ(parse_place_set("inf,2,17").p_S, 34);
}
