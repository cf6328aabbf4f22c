#include <gtest/gtest.h>

#include <random>
#include <set>

#include "prchains/scalar.hpp"

using namespace prc;

namespace {

// Independent oracle: evaluate a polynomial with F_p coefficients at a field element by Horner.
Scalar eval_int_poly(const FieldCtx& K, const std::vector<int>& coeffs, const Scalar& x) {
    Scalar r = Scalar::zero(K);
    for (std::size_t i = coeffs.size(); i-- > 0;) r = r * x + Scalar::from_int(K, coeffs[i]);
    return r;
}

Scalar random_scalar(const FieldCtx& K, std::mt19937& rng) {
    const FieldCtx& F = K.finite();
    std::uniform_int_distribution<int> code(0, F.q() - 1), deg(0, 3);
    if (K.is_finite()) return Scalar::constant(K, code(rng));
    Poly n(deg(rng) + 1), d(deg(rng) + 1);
    for (auto& c : n) c = code(rng);
    for (auto& c : d) c = code(rng);
    if (K.kind() == FieldKind::truncated_t) return Scalar::series(K, n);
    d.back() = 1;
    return Scalar::rational(K, n, d);
}

std::vector<const FieldCtx*> all_contexts() {
    const FieldCtx& F2 = FieldCtx::prime(2);
    const FieldCtx& F3 = FieldCtx::prime(3);
    const FieldCtx& F4 = FieldCtx::galois(2, 2);
    const FieldCtx& F9 = FieldCtx::galois(3, 2);
    return {&F2, &F3, &F4, &F9, &FieldCtx::prime(7), &FieldCtx::rational_t(F2), &FieldCtx::rational_t(F4),
            &FieldCtx::rational_t(F3), &FieldCtx::truncated_t(F2, 8), &FieldCtx::truncated_t(F9, 5)};
}

} // namespace

TEST(Scalar, FrobeniusFixesPrimeField) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    EXPECT_EQ(frobenius(Scalar::one(F2)), Scalar::one(F2));
}

TEST(Scalar, FrobeniusOnF4IsTheOtherRoot) {
    const FieldCtx& F4 = FieldCtx::extension(2, {1, 1, 1});
    const Scalar x = Scalar::from_coeffs(F4, {0, 1});
    // oracle: the roots of x^2 + x + 1 found by brute force
    std::vector<Scalar> roots;
    for (const auto& y : field_elements(F4))
        if (eval_int_poly(F4, {1, 1, 1}, y).is_zero()) roots.push_back(y);
    ASSERT_EQ(roots.size(), 2u);
    const Scalar other = roots[0] == x ? roots[1] : roots[0];
    EXPECT_EQ(frobenius(x), other);
    EXPECT_EQ(frobenius(x), Scalar::from_coeffs(F4, {1, 1}));
}

TEST(Scalar, FrobeniusOnRationalFunctions) {
    const FieldCtx& K = FieldCtx::rational_t(FieldCtx::prime(2));
    const Scalar t = Scalar::t(K);
    const Scalar one = Scalar::one(K);
    EXPECT_EQ(frobenius(t + one), t * t + one);
}

TEST(Scalar, SpecializeAtZero) {
    const FieldCtx& F3 = FieldCtx::prime(3);
    const FieldCtx& K = FieldCtx::rational_t(F3);
    const Scalar t = Scalar::t(K), one = Scalar::one(K);
    EXPECT_EQ(specialize_at_zero((t * t + one) / (t + one)), Scalar::one(F3));

    const FieldCtx& S = FieldCtx::truncated_t(FieldCtx::prime(2), 4);
    EXPECT_EQ(specialize_at_zero(Scalar::t(S)), Scalar::zero(FieldCtx::prime(2)));

    const FieldCtx& R2 = FieldCtx::rational_t(FieldCtx::prime(2));
    try {
        specialize_at_zero(Scalar::one(R2) / Scalar::t(R2));
        FAIL() << "expected a pole";
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::pole_at_zero);
    }
}

TEST(Scalar, FieldElementsOrder) {
    auto e2 = field_elements(FieldCtx::prime(2));
    ASSERT_EQ(e2.size(), 2u);
    EXPECT_TRUE(e2[0].is_zero());
    EXPECT_TRUE(e2[1].is_one());
    auto e3 = field_elements(FieldCtx::prime(3));
    ASSERT_EQ(e3.size(), 3u);
    EXPECT_EQ(e3[2], Scalar::from_int(FieldCtx::prime(3), 2));
    auto e4 = field_elements(FieldCtx::galois(2, 2));
    ASSERT_EQ(e4.size(), 4u);
    EXPECT_TRUE(e4[0].is_zero());
    EXPECT_THROW(field_elements(FieldCtx::galois(2, 8), 128), Error);
}

TEST(Scalar, DefaultModuli) {
    EXPECT_EQ(FieldCtx::galois(2, 2).modulus(), (std::vector<int>{1, 1, 1}));
    EXPECT_EQ(FieldCtx::galois(2, 3).modulus(), (std::vector<int>{1, 1, 0, 1}));
    EXPECT_EQ(FieldCtx::galois(3, 2).modulus(), (std::vector<int>{1, 0, 1}));
    EXPECT_EQ(&FieldCtx::of_order(8), &FieldCtx::galois(2, 3));
}

TEST(Scalar, RejectsBadContexts) {
    EXPECT_THROW(FieldCtx::prime(4), Error);
    EXPECT_THROW(FieldCtx::extension(2, {1, 0, 1}), Error); // (x+1)^2
    EXPECT_THROW(FieldCtx::rational_t(FieldCtx::rational_t(FieldCtx::prime(2))), Error);
    EXPECT_THROW(FieldCtx::of_order(6), Error);
}

TEST(Scalar, MixedContextsRejected) {
    const Scalar a = Scalar::one(FieldCtx::prime(2)), b = Scalar::one(FieldCtx::prime(3));
    EXPECT_THROW(a + b, Error);
}

TEST(Scalar, DivisionByNonUnitInSeries) {
    const FieldCtx& S = FieldCtx::truncated_t(FieldCtx::prime(2), 6);
    EXPECT_THROW(Scalar::one(S) / Scalar::t(S), Error);
    const Scalar u = Scalar::one(S) + Scalar::t(S);
    EXPECT_TRUE((u * u.inverse()).is_one());
}

TEST(Scalar, FieldAxiomsRandomized) {
    std::mt19937 rng(0);
    for (const FieldCtx* K : all_contexts()) {
        for (int trial = 0; trial < 60; ++trial) {
            const Scalar a = random_scalar(*K, rng), b = random_scalar(*K, rng), c = random_scalar(*K, rng);
            EXPECT_EQ((a + b) + c, a + (b + c)) << K->describe();
            EXPECT_EQ((a * b) * c, a * (b * c)) << K->describe();
            EXPECT_EQ(a * (b + c), a * b + a * c) << K->describe();
            EXPECT_EQ(a + b, b + a);
            EXPECT_TRUE((a - a).is_zero());
            if (a.is_unit()) EXPECT_TRUE((a * a.inverse()).is_one()) << K->describe() << " " << a.to_string();
            EXPECT_EQ(frobenius(a + b), frobenius(a) + frobenius(b));
            EXPECT_EQ(frobenius(a * b), frobenius(a) * frobenius(b));
        }
    }
}

TEST(Scalar, FrobeniusInjectiveOnFiniteFields) {
    for (const FieldCtx* K : all_contexts()) {
        if (!K->is_finite()) continue;
        std::set<std::uint32_t> images;
        for (const auto& x : field_elements(*K)) images.insert(frobenius(x).code());
        EXPECT_EQ(static_cast<int>(images.size()), K->q());
    }
}

TEST(Scalar, FrobeniusCommutesWithSpecialization) {
    std::mt19937 rng(0);
    for (const FieldCtx* K : all_contexts()) {
        if (K->is_finite()) continue;
        for (int trial = 0; trial < 50; ++trial) {
            const Scalar a = random_scalar(*K, rng);
            if (a.has_pole_at_zero()) continue;
            EXPECT_EQ(specialize_at_zero(frobenius(a)), frobenius(specialize_at_zero(a)));
        }
    }
}

TEST(Scalar, RationalReductionIsCanonical) {
    const FieldCtx& K = FieldCtx::rational_t(FieldCtx::prime(3));
    const Scalar t = Scalar::t(K), one = Scalar::one(K), two = Scalar::from_int(K, 2);
    const Scalar a = (t * t - one) / (t - one);
    const Scalar b = (two * t + two) / two;
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.den(), (Poly{1}));
    const Scalar c = one / (two * t);
    EXPECT_EQ(c.den().back(), 1u);
}

TEST(Scalar, SeriesFrobeniusTruncates) {
    const FieldCtx& S = FieldCtx::truncated_t(FieldCtx::prime(2), 4);
    const Scalar t = Scalar::t(S);
    EXPECT_TRUE(frobenius(t * t).is_zero());
    EXPECT_EQ(frobenius(Scalar::one(S) + t), Scalar::one(S) + t * t);
}
