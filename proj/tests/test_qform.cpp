#include <gtest/gtest.h>

#include <random>

#include "sforms/qform.hpp"

using namespace sforms;

namespace {

QuadraticForm dickson1() { return QuadraticForm::from_coeffs(3, {{{0, 0}, 1}, {{1, 1}, -3}, {{1, 2}, -2}, {{2, 2}, -23}}); }

Matrix random_invertible(std::mt19937& rng, std::size_t d, int range, bool rational) {
    for (;;) {
        Matrix g(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                Integer n = int(rng() % (2 * range + 1)) - range;
                Integer den = rational ? Integer(int(rng() % 3) + 1) : Integer(1);
                g(i, j) = make_rational(n, den);
            }
        if (g.det() != 0) return g;
    }
}

QuadraticForm random_form(std::mt19937& rng, std::size_t d) {
    for (;;) {
        Matrix g(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) {
                g(i, j) = make_rational(int(rng() % 13) - 6, j == i ? 1 : 2);
                g(j, i) = g(i, j);
            }
        if (g.det() != 0) return QuadraticForm::from_gram(g);
    }
}

}  // namespace

TEST(QForm, Evaluate) {
    EXPECT_EQ(dickson1().evaluate({1, 0, 0}), 1);
    EXPECT_EQ(dickson1().evaluate({0, 0, 0}), 0);
    EXPECT_EQ(dickson1().evaluate({0, 1, 1}), -3 - 2 - 23);
    EXPECT_EQ(QuadraticForm::diagonal({1, -1}).evaluate({3, 2}), 5);
    EXPECT_THROW(dickson1().evaluate({1, 2}), DimensionError);
}

TEST(QForm, GramConvention) {
    auto q = dickson1();
    EXPECT_EQ(q.gram()(1, 2), -1);
    EXPECT_EQ(q.coeff(1, 2), -2);
    EXPECT_EQ(q.det(), 68);
}

TEST(QForm, Act) {
    auto q = dickson1();
    EXPECT_EQ(q.act(Matrix::identity(3)), q);
    auto h = QuadraticForm::diagonal({1, -1});
    EXPECT_EQ(h.act(Matrix{{0, 1}, {1, 0}}), QuadraticForm::diagonal({-1, 1}));
    EXPECT_EQ(QuadraticForm::diagonal({1, 1}).act(Matrix::diagonal({2, 1})), QuadraticForm::diagonal({4, 1}));
    EXPECT_THROW(h.act(Matrix{{1, 1}, {1, 1}}), SingularMatrix);
}

TEST(QForm, Norms) {
    EXPECT_EQ(dickson1().coefficient_norm(Place::infinity()), 23);
    EXPECT_EQ(QuadraticForm::diagonal({1, 1}).coefficient_norm(Place::prime(7)), 1);
    EXPECT_EQ(dickson1().coefficient_norm(Place::prime(2)), 1);
    // gram entry -1/2 would give 2 at p = 2, the coefficient is 1
    auto q = QuadraticForm::from_coeffs(2, {{{0, 1}, 1}});
    EXPECT_EQ(q.coefficient_norm(Place::prime(2)), 1);
    EXPECT_EQ(nu_norm(q.gram(), Place::prime(2)), 2);
}

TEST(QForm, Integrality) {
    EXPECT_TRUE(dickson1().is_integral());
    EXPECT_FALSE(QuadraticForm::from_coeffs(2, {{{0, 0}, 1}, {{0, 1}, Rational(1, 2)}}).is_integral());
    EXPECT_TRUE(QuadraticForm::from_gram(Matrix(2, 2)).is_integral());
    EXPECT_TRUE(QuadraticForm::from_coeffs(2, {{{0, 1}, 1}}).is_integral());
}

TEST(QForm, Signature) {
    EXPECT_EQ(QuadraticForm::diagonal({1, 1, 1}).signature(), (Signature{3, 0, 0}));
    EXPECT_EQ(QuadraticForm::diagonal({1, -1}).signature(), (Signature{1, 1, 0}));
    EXPECT_EQ(dickson1().signature(), (Signature{1, 2, 0}));
    EXPECT_EQ(QuadraticForm::from_coeffs(2, {{{0, 1}, 2}}).signature(), (Signature{1, 1, 0}));
    EXPECT_EQ(QuadraticForm::from_coeffs(3, {{{0, 1}, 2}}).signature(), (Signature{1, 1, 1}));
}

TEST(QForm, DirectSum) {
    auto s = direct_sum(QuadraticForm::diagonal({1, -1}), QuadraticForm::diagonal({1}));
    EXPECT_EQ(s, QuadraticForm::diagonal({1, -1, 1}));
    EXPECT_EQ(direct_sum(dickson1(), QuadraticForm()), dickson1());
    EXPECT_EQ(direct_sum(QuadraticForm::diagonal({1}), QuadraticForm::diagonal({-1})), QuadraticForm::diagonal({1, -1}));
}

TEST(QForm, ActionProperties) {
    std::mt19937 rng(11);
    for (int it = 0; it < 60; ++it) {
        std::size_t d = 1 + rng() % 5;
        auto q = random_form(rng, d);
        auto g = random_invertible(rng, d, 3, true);
        auto h = random_invertible(rng, d, 3, true);
        EXPECT_EQ(q.act(g).act(h), q.act(g * h));
        EXPECT_EQ(q.act(g).det(), g.det() * g.det() * q.det());
        EXPECT_EQ(q.act(g).signature(), q.signature());
        Vector v(d);
        for (auto& x : v) x = int(rng() % 9) - 4;
        EXPECT_EQ(q.act(g).evaluate(v), q.evaluate(g * v));
    }
}

TEST(QForm, IntegralityPreservedByUnimodular) {
    std::mt19937 rng(12);
    for (int it = 0; it < 60; ++it) {
        std::size_t d = 2 + rng() % 3;
        auto q = random_form(rng, d);
        if (!q.is_integral()) continue;
        // product of elementary integer matrices has det 1
        Matrix u = Matrix::identity(d);
        for (int k = 0; k < 6; ++k) {
            Matrix e = Matrix::identity(d);
            std::size_t i = rng() % d, j = rng() % d;
            if (i == j) continue;
            e(i, j) = int(rng() % 5) - 2;
            u = u * e;
        }
        EXPECT_TRUE(q.act(u).is_integral());
    }
}

TEST(QForm, Render) {
    EXPECT_EQ(dickson1().str(), "x1^2 - 3*x2^2 - 2*x2*x3 - 23*x3^2");
}
