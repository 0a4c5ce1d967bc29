#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <set>

#include "sforms/local.hpp"

using namespace sforms;

namespace {

QuadraticForm dickson1() { return QuadraticForm::from_coeffs(3, {{{0, 0}, 1}, {{1, 1}, -3}, {{1, 2}, -2}, {{2, 2}, -23}}); }
QuadraticForm dickson2() { return QuadraticForm::from_coeffs(3, {{{0, 0}, 1}, {{1, 1}, -7}, {{1, 2}, -6}, {{2, 2}, -11}}); }

int count_isotropic(const Place& v, int d) {
    int n = 0;
    for (const auto& s : *catalog(v, d)) n += s.isotropic;
    return n;
}

const std::vector<Place> kPlaces = {Place::infinity(), Place::prime(2), Place::prime(3), Place::prime(5), Place::prime(7)};

}  // namespace

TEST(Local, InvariantExamples) {
    auto inv = local_invariants(QuadraticForm::diagonal({1, -1}), Place::prime(3));
    EXPECT_EQ(inv.disc, Rational(nonresidue(3)));  // −1 is a nonresidue mod 3
    EXPECT_EQ(inv.hasse, 1);
    auto r = local_invariants(QuadraticForm::diagonal({1, 1, 1}), Place::infinity());
    EXPECT_EQ(r.sig, (Signature{3, 0, 0}));
    auto q4 = QuadraticForm::diagonal({1, 1, 1, 1});
    auto s = standard_form_of(q4, Place::prime(2));
    EXPECT_FALSE(s.isotropic);
    EXPECT_EQ(s.diag, (Vector{1, 1, 1, 1}));
    EXPECT_THROW(local_invariants(QuadraticForm::diagonal({1, 0}), Place::prime(3)), DegenerateError);
}

TEST(Local, CatalogCounts) {
    auto t0 = std::chrono::steady_clock::now();
    EXPECT_EQ(count_isotropic(Place::prime(2), 4), 15);
    for (int p : {3, 5, 7, 11}) EXPECT_EQ(count_isotropic(Place::prime(p), 4), 7);
    EXPECT_EQ(count_isotropic(Place::infinity(), 4), 3);
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);

    EXPECT_EQ(catalog(Place::prime(2), 3)->size() - count_isotropic(Place::prime(2), 3), 8u);
    auto inf2 = catalog(Place::infinity(), 2);
    ASSERT_EQ(inf2->size(), 3u);
    std::set<Vector> diags;
    for (const auto& s : *inf2) diags.insert(s.diag);
    EXPECT_EQ(diags, (std::set<Vector>{{1, 1}, {-1, -1}, {1, -1}}));
}

TEST(Local, TableOneAnisotropy) {
    // every anisotropic catalog entry is anisotropic by independent residue search (ternary sub-forms)
    for (int p : {2, 3, 5, 7}) {
        Place v = Place::prime(p);
        for (const auto& s : *catalog(v, 3))
            if (!s.isotropic) EXPECT_FALSE(isotropy_oracle_ternary(s.diag[0], s.diag[1], s.diag[2], p));
        for (const auto& s : *catalog(v, 2))
            if (!s.isotropic) EXPECT_NE(class_rep_of(-s.diag[0] * s.diag[1], v), 1);
    }
}

TEST(Local, CatalogInvariantsDistinct) {
    for (const auto& v : kPlaces)
        for (int d = 1; d <= 6; ++d) {
            auto c = catalog(v, d);
            for (std::size_t i = 0; i < c->size(); ++i)
                for (std::size_t j = i + 1; j < c->size(); ++j) EXPECT_NE((*c)[i].inv, (*c)[j].inv);
            for (const auto& s : *c) EXPECT_EQ(local_invariants(s.form(), v), s.inv);
        }
}

TEST(Local, CatalogCompleteForDimensionThreeUp) {
    // every (disc, hasse) pair is realized once d >= 3: |𝒞_p| · 2 entries
    for (int p : {2, 3, 5})
        for (int d = 3; d <= 5; ++d) {
            std::size_t classes = class_representatives(Place::prime(p)).size();
            EXPECT_EQ(catalog(Place::prime(p), d)->size(), 2 * classes);
        }
}

TEST(Local, StandardFormOf) {
    auto q = QuadraticForm::diagonal({1, 1, 1});
    EXPECT_EQ(standard_form_of(q, Place::infinity()).diag, (Vector{1, 1, 1}));
    for (const auto& v : kPlaces) EXPECT_EQ(standard_form_of(QuadraticForm::diagonal({4, -1}), v).diag, (Vector{1, -1}));
    auto s = standard_form_of(dickson1(), Place::prime(17));
    EXPECT_EQ(s.inv, local_invariants(dickson1(), Place::prime(17)));
    // rational diagonalization of the Dickson form is (1, −3, −68/3)
    EXPECT_EQ(s.isotropic, isotropy_oracle_ternary(1, -3, Rational(-68, 3), 17));
}

TEST(Local, NotRepresentableInLowDimension) {
    // d = 1: disc 1 with hasse −1 cannot occur
    LocalInvariants inv;
    inv.place = Place::prime(3);
    inv.dim = 1;
    inv.disc = 1;
    inv.hasse = -1;
    EXPECT_FALSE(standard_form_for_invariants(inv));
}

TEST(Local, Isotropy) {
    for (int p : {2, 3, 5, 7}) EXPECT_TRUE(is_isotropic(QuadraticForm::diagonal({1, 1, 1, 1, 1}), Place::prime(p)));
    for (int p : {2, 3, 5, 7}) EXPECT_TRUE(catalog(Place::prime(p), 5)->front().isotropic);
    EXPECT_FALSE(is_isotropic(QuadraticForm::diagonal({1, 1}), Place::infinity()));
    EXPECT_FALSE(is_isotropic(QuadraticForm::diagonal({1, 1, 1, 1}), Place::prime(2)));
}

TEST(Local, IsotropyAgreesWithOracle) {
    const std::vector<Rational> e = {1, -1, 2, -2, 3, -3, 5, -5};
    for (int p : {2, 3, 5})
        for (const auto& a : e)
            for (const auto& b : e)
                for (const auto& c : e)
                    EXPECT_EQ(is_isotropic(QuadraticForm::diagonal({a, b, c}), Place::prime(p)),
                              isotropy_oracle_ternary(a, b, c, p));
}

TEST(Local, Equivalence) {
    std::mt19937 rng(5);
    for (const auto& v : {Place::infinity(), Place::prime(2), Place::prime(3), Place::prime(5)})
        for (int it = 0; it < 100; ++it) {
            std::size_t d = 1 + rng() % 4;
            Matrix g(d, d), t(d, d);
            do {
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = i; j < d; ++j) {
                        g(i, j) = make_rational(int(rng() % 11) - 5, j == i ? 1 : 2);
                        g(j, i) = g(i, j);
                    }
            } while (g.det() == 0);
            do {
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < d; ++j) t(i, j) = make_rational(int(rng() % 9) - 4, int(rng() % 4) + 1);
            } while (t.det() == 0);
            auto q = QuadraticForm::from_gram(g);
            EXPECT_TRUE(equivalent_local(q, q.act(t), v));
        }
    EXPECT_FALSE(equivalent_local(QuadraticForm::diagonal({1, 1}), QuadraticForm::diagonal({-1, -1}), Place::infinity()));
    EXPECT_TRUE(equivalent_QS(dickson1(), dickson2(), PlaceSet({2, 17})));
    EXPECT_THROW(equivalent_local(dickson1(), QuadraticForm::diagonal({1}), Place::prime(2)), DimensionError);
}
