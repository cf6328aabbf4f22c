#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracle.hpp"
#include "prchains/umodule.hpp"

using namespace prc;

namespace {

UVec mono(const FieldCtx& K, int N, int coord, int deg) { return UVec::monomial(K, N, coord, deg); }

UVec random_vec(const FieldCtx& K, int N, std::mt19937& rng) {
    const auto elems = field_elements(K);
    std::uniform_int_distribution<std::size_t> pick(0, elems.size() - 1);
    Row r;
    for (int i = 0; i < 2 * N; ++i) r.push_back(elems[pick(rng)]);
    return UVec::from_row(K, N, r);
}

Subspace random_subspace(const FieldCtx& K, int N, std::mt19937& rng, int gens) {
    std::vector<UVec> vs;
    for (int i = 0; i < gens; ++i) vs.push_back(random_vec(K, N, rng));
    return Subspace::span(K, N, vs);
}

Subspace u_closure(const Subspace& W) {
    Subspace s = W;
    for (;;) {
        Subspace n = sum(s, u_image(s));
        if (n == s) return s;
        s = n;
    }
}

} // namespace

TEST(Span, EmptyHasDimensionZero) {
    EXPECT_EQ(Subspace::span(FieldCtx::prime(2), 4, {}).dim(), 0);
}

TEST(Span, IndependentMonomials) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    EXPECT_EQ(Subspace::span(F2, 4, {mono(F2, 4, 0, 2), mono(F2, 4, 0, 3)}).dim(), 2);
}

TEST(Span, DependencyDetected) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    const UVec e1 = mono(F2, 4, 0, 0), e2 = mono(F2, 4, 1, 0);
    EXPECT_EQ(Subspace::span(F2, 4, {e1 + e2, e1, e2}).dim(), 2);
}

TEST(Span, MixedContextsRejected) {
    EXPECT_THROW(Subspace::span(FieldCtx::prime(2), 4, {mono(FieldCtx::prime(3), 4, 0, 0)}), Error);
    EXPECT_THROW(Subspace::span(FieldCtx::prime(2), 4, {mono(FieldCtx::prime(2), 3, 0, 0)}), Error);
}

TEST(Span, CanonicalUnderShuffleAndScaling) {
    std::mt19937 rng(0);
    for (const FieldCtx* K : {&FieldCtx::prime(2), &FieldCtx::prime(3), &FieldCtx::galois(2, 2)}) {
        for (int trial = 0; trial < 40; ++trial) {
            std::vector<UVec> vs;
            for (int i = 0; i < 4; ++i) vs.push_back(random_vec(*K, 3, rng));
            const Subspace W = Subspace::span(*K, 3, vs);
            auto ws = vs;
            std::shuffle(ws.begin(), ws.end(), rng);
            const Scalar g = primitive_element(*K);
            for (std::size_t i = 1; i < ws.size(); ++i) ws[i] = g * ws[i] + ws[0];
            const Subspace W2 = Subspace::span(*K, 3, ws);
            EXPECT_EQ(W, W2);
            EXPECT_EQ(W.key(), W2.key());
        }
    }
}

TEST(Span, RrefMatchesBruteForceElementSets) {
    const oracle::Model M{3, 2};
    const FieldCtx& F3 = FieldCtx::prime(3);
    std::mt19937 rng(0);
    for (int trial = 0; trial < 60; ++trial) {
        const Subspace W = random_subspace(F3, 2, rng, 1 + trial % 3);
        std::vector<std::uint32_t> gens;
        for (const auto& v : W.basis()) gens.push_back(M.from_uvec(v));
        const auto elems = oracle::span(M, gens);
        EXPECT_EQ(oracle::dim_of(M, elems), W.dim());
        for (std::uint32_t x = 0; x < M.count(); ++x) EXPECT_EQ(W.contains(M.to_uvec(F3, x)), elems.count(x) > 0);
    }
}

TEST(SubspaceAlgebra, IntersectionIsIdempotent) {
    std::mt19937 rng(0);
    const FieldCtx& F2 = FieldCtx::prime(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Subspace W = random_subspace(F2, 4, rng, 3);
        EXPECT_EQ(intersect(W, W), W);
    }
}

TEST(SubspaceAlgebra, SumOfTwoLines) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    const Subspace a = Subspace::span(F2, 4, {mono(F2, 4, 0, 3)}), b = Subspace::span(F2, 4, {mono(F2, 4, 1, 3)});
    EXPECT_EQ(sum(a, b).dim(), 2);
}

TEST(SubspaceAlgebra, TorsionContainsTopLine) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    const oracle::Model M{2, 4};
    // oracle: u * u^3 e1 is zero in E_4
    EXPECT_EQ(M.times_u(M.from_uvec(mono(F2, 4, 0, 3))), 0u);
    EXPECT_TRUE(contains(Subspace::u_torsion(F2, 4, 1), Subspace::span(F2, 4, {mono(F2, 4, 0, 3)})));
}

TEST(SubspaceAlgebra, DimensionFormulaAgainstOracle) {
    const oracle::Model M{2, 3};
    const FieldCtx& F2 = FieldCtx::prime(2);
    std::mt19937 rng(0);
    for (int trial = 0; trial < 80; ++trial) {
        const Subspace a = random_subspace(F2, 3, rng, 1 + trial % 4), b = random_subspace(F2, 3, rng, 1 + trial % 3);
        const Subspace s = sum(a, b), i = intersect(a, b);
        EXPECT_EQ(a.dim() + b.dim(), s.dim() + i.dim());
        const auto ea = oracle::elements(M, a), eb = oracle::elements(M, b);
        oracle::Set common;
        std::set_intersection(ea.begin(), ea.end(), eb.begin(), eb.end(), std::inserter(common, common.end()));
        EXPECT_EQ(oracle::elements(M, i), common);
        EXPECT_EQ(contains(a, b), oracle::subset(eb, ea));
        EXPECT_EQ(a == b, ea == eb);
    }
}

TEST(UImage, OfWholeModule) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    const Subspace img = u_image(Subspace::whole(F2, 4));
    EXPECT_EQ(img.dim(), 6);
    EXPECT_EQ(img, Subspace::u_multiples(F2, 4, 1));
}

TEST(UPreimage, OfZeroIsKernel) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    const Subspace k = u_preimage(Subspace::zero(F2, 4));
    EXPECT_EQ(k.dim(), 2);
    EXPECT_EQ(k, Subspace::u_torsion(F2, 4, 1));
}

TEST(UPreimage, OfTopLineMatchesBruteForce) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    const oracle::Model M{2, 4};
    const Subspace W = Subspace::span(F2, 4, {mono(F2, 4, 0, 3)});
    const auto ew = oracle::elements(M, W);
    oracle::Set pre;
    for (std::uint32_t x = 0; x < M.count(); ++x)
        if (ew.count(M.times_u(x))) pre.insert(x);
    const Subspace P = u_preimage(W);
    EXPECT_EQ(P.dim(), 3);
    EXPECT_EQ(oracle::elements(M, P), pre);
    EXPECT_EQ(P, Subspace::span(F2, 4, {mono(F2, 4, 0, 2), mono(F2, 4, 0, 3), mono(F2, 4, 1, 3)}));
}

TEST(UPreimage, CompositionIdentities) {
    std::mt19937 rng(0);
    for (const FieldCtx* K : {&FieldCtx::prime(2), &FieldCtx::prime(3)}) {
        for (int trial = 0; trial < 60; ++trial) {
            Subspace W = random_subspace(*K, 4, rng, 1 + trial % 4);
            if (trial % 2) W = u_closure(W);
            const Subspace uE = Subspace::u_multiples(*K, 4, 1), tor = Subspace::u_torsion(*K, 4, 1);
            EXPECT_EQ(u_image(u_preimage(W)), intersect(W, uE));
            EXPECT_EQ(u_preimage(u_image(W)), sum(W, tor));
            EXPECT_EQ(u_preimage(W).dim(), intersect(W, uE).dim() + 2);
        }
    }
}

TEST(FrobeniusTwist, TrivialOverPrimeField) {
    std::mt19937 rng(0);
    const FieldCtx& F2 = FieldCtx::prime(2);
    for (int trial = 0; trial < 10; ++trial) {
        const Subspace W = random_subspace(F2, 3, rng, 3);
        EXPECT_EQ(frobenius_twist(W), W);
    }
}

TEST(FrobeniusTwist, OnF4Line) {
    const FieldCtx& F4 = FieldCtx::extension(2, {1, 1, 1});
    const Scalar x = Scalar::from_coeffs(F4, {0, 1});
    // oracle: the conjugate root found by brute force
    Scalar conj = x;
    for (const auto& y : field_elements(F4))
        if (y != x && (y * y + y + Scalar::one(F4)).is_zero()) conj = y;
    const UVec e1 = mono(F4, 2, 0, 0), e2 = mono(F4, 2, 1, 0);
    EXPECT_EQ(frobenius_twist(Subspace::span(F4, 2, {e1 + x * e2})), Subspace::span(F4, 2, {e1 + conj * e2}));
}

TEST(FrobeniusTwist, KernelIsStable) {
    for (const FieldCtx* K : {&FieldCtx::prime(2), &FieldCtx::galois(3, 2)}) {
        const Subspace k = Subspace::u_torsion(*K, 4, 1);
        EXPECT_EQ(frobenius_twist(k), k);
    }
}

TEST(FrobeniusTwist, BijectiveOnLinesOverF4) {
    const FieldCtx& F4 = FieldCtx::galois(2, 2);
    std::set<std::string> lines, images;
    for (const auto& a : field_elements(F4))
        for (const auto& b : field_elements(F4)) {
            const UVec v = a * mono(F4, 1, 0, 0) + b * mono(F4, 1, 1, 0);
            if (v.is_zero()) continue;
            const Subspace L = Subspace::span(F4, 1, {v});
            lines.insert(L.key());
            images.insert(frobenius_twist(L).key());
        }
    EXPECT_EQ(lines.size(), 5u);
    EXPECT_EQ(images, lines);
}

TEST(Linalg, NonUnitPivotOverTruncatedSeries) {
    const FieldCtx& S = FieldCtx::truncated_t(FieldCtx::prime(2), 8);
    const UVec v = Scalar::t(S) * mono(S, 2, 0, 0);
    try {
        Subspace::span(S, 2, {v});
        FAIL() << "expected NonUnitPivot";
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::non_unit_pivot);
    }
    std::vector<Row> rows{v.entries()};
    EXPECT_EQ(linalg::certified_rank(rows, S), 1);
}

TEST(Linalg, RationalFunctionSpan) {
    const FieldCtx& K = FieldCtx::rational_t(FieldCtx::prime(2));
    const Scalar t = Scalar::t(K);
    const UVec e1 = mono(K, 2, 0, 0), e2 = mono(K, 2, 1, 0);
    EXPECT_EQ(Subspace::span(K, 2, {e1 + t * e2, t * e1 + t * t * e2}).dim(), 1);
    EXPECT_EQ(Subspace::span(K, 2, {e1 + t * e2, e1}).dim(), 2);
}

TEST(Linalg, CoordinatesSolveExactly) {
    std::mt19937 rng(0);
    const FieldCtx& F3 = FieldCtx::prime(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<UVec> gens;
        for (int i = 0; i < 3; ++i) gens.push_back(random_vec(F3, 3, rng));
        const Scalar c0 = Scalar::from_int(F3, trial), c2 = Scalar::from_int(F3, trial + 1);
        const UVec target = c0 * gens[0] + c2 * gens[2];
        auto x = coordinates(gens, target);
        ASSERT_TRUE(x.has_value());
        UVec back = UVec(F3, 3);
        for (std::size_t i = 0; i < gens.size(); ++i) back = back + (*x)[i] * gens[i];
        EXPECT_EQ(back, target);
    }
}
