#include <gtest/gtest.h>

#include <random>
#include <set>

#include "sforms/construct.hpp"

using namespace sforms;

namespace {

Rational rnd_rat(std::mt19937& rng, int num, int den) {
    return make_rational(int(rng() % (2 * num + 1)) - num, int(rng() % den) + 1);
}

Matrix random_sl2(std::mt19937& rng) {
    for (;;) {
        Rational a = rnd_rat(rng, 6, 4), b = rnd_rat(rng, 6, 4), c = rnd_rat(rng, 6, 4);
        if (a == 0) continue;
        return Matrix{{a, b}, {c, (1 + b * c) / a}};
    }
}

QuadraticForm random_form(std::mt19937& rng, std::size_t d, int range) {
    for (;;) {
        Matrix g(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) {
                g(i, j) = make_rational(int(rng() % (2 * range + 1)) - range, j == i ? 1 : 2);
                g(j, i) = g(i, j);
            }
        if (g.det() != 0) return QuadraticForm::from_gram(g);
    }
}

// random element of O(P): product of reflections in anisotropic integer vectors
Matrix random_isometry(std::mt19937& rng, const Vector& pd, int nrefl) {
    Matrix h = Matrix::identity(pd.size());
    for (int t = 0; t < nrefl; ++t) {
        Vector v(pd.size());
        do {
            for (auto& x : v) x = int(rng() % 5) - 2;
        } while (form_value_diag(pd, v) == 0);
        h = h * reflection(pd, v);
    }
    return h;
}

}  // namespace

TEST(Construct, DiagonalizeExamples) {
    auto d1 = diagonalize_padic(QuadraticForm::diagonal({1, -1}), 3);
    EXPECT_EQ(d1.k, Matrix::identity(2));
    EXPECT_EQ(d1.diag, (Vector{1, -1}));

    auto hyp = QuadraticForm::from_coeffs(2, {{{0, 1}, 2}});  // 2xy
    auto d3 = diagonalize_padic(hyp, 3);
    EXPECT_EQ(congruence(Matrix::diagonal(d3.diag), d3.k), hyp.gram());
    EXPECT_LE(nu_norm(d3.k, Place::prime(3)), 1);
    EXPECT_LE(nu_norm(d3.k.inverse(), Place::prime(3)), 1);
    EXPECT_EQ(abs_nu(d3.k.det(), Place::prime(3)), 1);

    auto d2 = diagonalize_padic(hyp, 2);
    EXPECT_EQ(congruence(Matrix::diagonal(d2.diag), d2.k), hyp.gram());
    EXPECT_LE(nu_norm(d2.k, Place::prime(2)), 1);
    EXPECT_EQ(nu_norm(d2.k.inverse(), Place::prime(2)), 2);
    // 2xy = ½(x+y)² − ½(x−y)² up to 2-adic unit squares
    EXPECT_EQ(class_rep_of(d2.diag[0] * d2.diag[1], Place::prime(2)), -1);
}

TEST(Construct, DiagonalizeRandom) {
    std::mt19937 rng(21);
    for (int p : {2, 3, 5})
        for (int it = 0; it < 60; ++it) {
            auto q = random_form(rng, 1 + rng() % 4, 8);
            auto dg = diagonalize_padic(q, p);
            EXPECT_EQ(congruence(Matrix::diagonal(dg.diag), dg.k), q.gram());
            Place v = Place::prime(p);
            EXPECT_LE(nu_norm(dg.k, v), 1);
            EXPECT_LE(nu_norm(dg.k.inverse(), v), p == 2 ? 2 : 1);
        }
}

TEST(Construct, SquareSplit) {
    auto s = split_square(Rational(50, 9), 5);
    EXPECT_EQ(s.b, 2);
    EXPECT_EQ(s.c * s.c * s.b, Rational(50, 9));
    auto t = split_square(Rational(-12), 2);
    EXPECT_EQ(t.b, -3);
}

TEST(Construct, StandardizeExamples) {
    for (const auto& v : {Place::infinity(), Place::prime(2), Place::prime(3)}) {
        auto w = standardize(QuadraticForm::diagonal({1, -1}), v);
        ASSERT_TRUE(w.g);
        EXPECT_EQ(*w.g, Matrix::identity(2));
    }
    auto w = standardize(QuadraticForm::diagonal({9, -1}), Place::prime(5));
    EXPECT_EQ(w.standard.diag, (Vector{1, -1}));
    ASSERT_TRUE(w.g);
    EXPECT_EQ(*w.g, Matrix::diagonal({3, 1}));
    EXPECT_EQ(nu_norm(*w.g, Place::prime(5)), 1);

    auto q = QuadraticForm::diagonal({5, 1});
    auto w5 = standardize(q, Place::prime(5));
    EXPECT_TRUE(verify_witness(w5, q));
    EXPECT_TRUE(w5.within_bound());
    EXPECT_EQ(w5.bound_sq, 5);
    EXPECT_EQ(local_invariants(w5.standard.form(), Place::prime(5)), local_invariants(q, Place::prime(5)));
}

TEST(Construct, StandardizeDiagonalSweep) {
    const std::vector<Rational> e = {1, -1, 2, -2, 3, -3, 5, -5, 6, -6};
    for (int p : {2, 3, 5}) {
        Place v = Place::prime(p);
        for (const auto& a : e)
            for (const auto& b : e) {
                auto q2 = QuadraticForm::diagonal({a, b});
                auto w2 = standardize(q2, v);
                EXPECT_TRUE(verify_witness(w2, q2));
                EXPECT_TRUE(w2.within_bound());
                for (const auto& c : e) {
                    auto q3 = QuadraticForm::diagonal({a, b, c});
                    auto w3 = standardize(q3, v);
                    EXPECT_TRUE(verify_witness(w3, q3));
                    EXPECT_TRUE(w3.within_bound()) << q3.str() << " p=" << p;
                }
            }
    }
}

TEST(Construct, StandardizeRandomForms) {
    std::mt19937 rng(22);
    int over = 0, total = 0;
    for (int p : {2, 3, 5, 7})
        for (int it = 0; it < 40; ++it) {
            auto q = random_form(rng, 2 + rng() % 3, 6);
            auto w = standardize(q, Place::prime(p));
            EXPECT_TRUE(verify_witness(w, q));
            ++total;
            if (!w.within_bound()) {
                ++over;
                // the only slack is the 2-adic block split, at most a factor 2 in ‖g‖
                EXPECT_EQ(p, 2);
                EXPECT_LE(w.norm_sq, 4 * w.bound_sq);
            }
        }
    EXPECT_LT(over, total);
}

TEST(Construct, StandardizeInfinity) {
    std::mt19937 rng(23);
    for (int it = 0; it < 40; ++it) {
        auto q = random_form(rng, 2 + rng() % 3, 6);
        auto w = standardize(q, Place::infinity());
        if (w.approximate) {
            EXPECT_LT(w.residual, 1e-9 * 100);
        } else {
            EXPECT_TRUE(verify_witness(w, q));
        }
        EXPECT_TRUE(w.within_bound());
    }
}

TEST(Construct, BinaryHyperbolic) {
    for (int p : {2, 3, 5}) EXPECT_EQ(represent_binary_hyperbolic(1, p), (Vector{1, 0}));
    auto t = represent_binary_hyperbolic(2, 2);
    EXPECT_EQ(t, (Vector{Rational(3, 2), Rational(1, 2)}));
    EXPECT_EQ(nu_norm(t, Place::prime(2)), 2);
    EXPECT_EQ(represent_binary_hyperbolic(3, 7), (Vector{2, 1}));
    EXPECT_THROW(represent_binary_hyperbolic(Rational(1, 3), 3), PreconditionError);
    for (int a = -20; a <= 20; ++a) {
        auto s = represent_binary_hyperbolic(a, 3);
        EXPECT_EQ(s[0] * s[0] - s[1] * s[1], a);
    }
}

TEST(Construct, SpinorExamples) {
    Vector pd = {3, -5, 7};
    auto r = spinor_norm(reflection(pd, {1, 0, 0}), pd, Place::prime(5));
    EXPECT_EQ(r.spinor.rep, class_rep_of(3, Place::prime(5)));
    EXPECT_EQ(r.det, -1);
    auto id = spinor_norm(Matrix::identity(3), pd, Place::prime(5));
    EXPECT_EQ(id.spinor.rep, 1);
    EXPECT_EQ(id.det, 1);
    auto h2 = h_matrix(hyperbolic_vector(2, Place::prime(2)));
    EXPECT_EQ(spinor_norm(h2, {1, -1}, Place::prime(2)).spinor.rep, 2);
    EXPECT_THROW(spinor_norm(Matrix{{2, 0}, {0, 1}}, {1, -1}, Place::prime(3)), PreconditionError);
}

TEST(Construct, SpinorMultiplicative) {
    std::mt19937 rng(24);
    const std::vector<Vector> forms = {{1, -1, 2}, {1, 1, 1}, {1, -3, 5}, {2, 3}, {1, -1, 1, -1}};
    int n = 0;
    for (const auto& pd : forms)
        for (const auto& v : {Place::prime(2), Place::prime(3), Place::prime(5), Place::infinity()})
            for (int it = 0; it < 5; ++it, ++n) {
                Matrix h1 = random_isometry(rng, pd, 1 + rng() % 3), h2 = random_isometry(rng, pd, 1 + rng() % 3);
                auto s1 = spinor_norm(h1, pd, v), s2 = spinor_norm(h2, pd, v), s12 = spinor_norm(h1 * h2, pd, v);
                EXPECT_EQ(s12.spinor.rep, class_rep_of(s1.spinor.rep * s2.spinor.rep, v));
                EXPECT_EQ(s12.det, s1.det * s2.det);
            }
    EXPECT_EQ(n, 100);
}

TEST(Construct, CosetReps) {
    for (const auto& v : {Place::prime(2), Place::prime(3), Place::prime(5), Place::prime(7), Place::infinity()})
        for (const Vector& pd : {Vector{1, -1}, Vector{1, -1, 3}, Vector{1, -1, 1, 2}}) {
            auto reps = coset_reps(pd, v);
            std::set<std::pair<Rational, int>> seen;
            for (const auto& r : reps) {
                EXPECT_EQ(congruence(Matrix::diagonal(pd), r.eta), Matrix::diagonal(pd));
                EXPECT_LE(nu_norm(r.eta, v), B_const(v));
                seen.insert({r.spinor_class.rep, r.det_sign});
            }
            EXPECT_EQ(seen.size(), 2 * class_representatives(v).size());
            EXPECT_EQ(reps.size(), seen.size());
        }
    for (int c : {2, -2, 6, -6}) EXPECT_EQ(nu_norm(h_matrix(hyperbolic_vector(c, Place::prime(2))), Place::prime(2)), 4);
    EXPECT_EQ(coset_reps({1, -1}, Place::prime(5)).size(), 8u);
    EXPECT_THROW(coset_reps({1, 1}, Place::prime(3)), PreconditionError);
}

TEST(Construct, RhoBasic) {
    Vector pd = {1, -1, 3, 5};
    EXPECT_EQ(rho_P(Matrix::identity(2), pd), Matrix::identity(4));
    EXPECT_EQ(rho_P(-Matrix::identity(2), pd), Matrix::identity(4));
    Matrix b21 = direct_sum(Matrix{{Rational(17, 8), Rational(15, 8)}, {Rational(15, 8), Rational(17, 8)}}, Matrix::identity(2));
    EXPECT_EQ(rho_P(a_matrix(Rational(1, 2)), pd), b21);
    EXPECT_THROW(rho_P(Matrix{{2, 0}, {0, 1}}, pd), PreconditionError);
}

TEST(Construct, RhoIsometryAndHomomorphism) {
    std::mt19937 rng(25);
    for (int it = 0; it < 100; ++it) {
        Vector pd = {1, -1, rnd_rat(rng, 5, 3)};
        if (pd[2] == 0) pd[2] = 2;
        if (it % 2) pd.push_back(7);
        Matrix g = random_sl2(rng), h = random_sl2(rng);
        Matrix P = Matrix::diagonal(pd);
        EXPECT_EQ(congruence(P, rho_P(g, pd)), P);
        EXPECT_EQ(rho_P(g, pd) * rho_P(h, pd), rho_P(g * h, pd));
        EXPECT_EQ(rho_P(g, pd).det(), 1);
    }
}

TEST(Construct, RhoSendsAtoB) {
    Vector pd = {1, -1, 2};
    for (int t = 0; t <= 2; ++t) {
        for (int p : {2, 3}) {
            // a_{p,t} = diag(p^{-t}, p^t)
            Rational s = rpow(Rational(p), -t);
            Rational x = rpow(Rational(p), 2 * t), y = rpow(Rational(p), -2 * t);
            Matrix b{{(x + y) / 2, (x - y) / 2}, {(x - y) / 2, (x + y) / 2}};
            EXPECT_EQ(rho_P(a_matrix(s), pd), direct_sum(b, Matrix::identity(1)));
        }
        for (const Rational& s : {Rational(1), Rational(2), Rational(3, 2)})
            EXPECT_EQ(rho_P(a_matrix(s), pd), direct_sum(b_matrix(s), Matrix::identity(1)));
    }
}

TEST(Construct, CongruenceDepth) {
    EXPECT_TRUE(congruence_depth_check(Matrix::identity(2), {1, -1, 1}, 3, 2).ok);
    Matrix g{{1, 27}, {0, 1}};
    auto rep = congruence_depth_check(g, {1, -1, 1}, 3, 2);
    EXPECT_TRUE(rep.ok);
    EXPECT_EQ(rep.distance, Rational(1, 27));
    std::mt19937 rng(26);
    for (int it = 0; it < 50; ++it) {
        const Integer p = 5;
        const long n = 3;
        Integer pk = ipow(p, n + 1);
        Rational g11 = 1 + pk * (int(rng() % 11) - 5), g12 = pk * (int(rng() % 11) - 5), g21 = pk * (int(rng() % 11) - 5);
        Matrix gg{{g11, g12}, {g21, (1 + g12 * g21) / g11}};
        Rational a3 = (it % 2) ? Rational(5 * (1 + int(rng() % 4))) : Rational(1 + int(rng() % 4));
        auto r = congruence_depth_check(gg, {1, -1, a3}, p, n);
        EXPECT_TRUE(r.ok);
        EXPECT_TRUE(r.proof_bound);
    }
    EXPECT_THROW(congruence_depth_check(Matrix{{1, 3}, {0, 1}}, {1, -1, 1}, 3, 2), PreconditionError);
}
