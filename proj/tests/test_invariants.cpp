#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "prchains/invariants.hpp"

using namespace prc;

namespace {

UVec mono(const FieldCtx& K, int N, int coord, int deg) { return UVec::monomial(K, N, coord, deg); }

Subspace span_of(const FieldCtx& K, int N, std::initializer_list<std::pair<int, int>> monos) {
    std::vector<UVec> g;
    for (auto [c, d] : monos) g.push_back(mono(K, N, c, d));
    return Subspace::span(K, N, g);
}

// Independent oracle for the block structure: dims of u^k W from brute-force element sets.
std::vector<int> oracle_blocks(const oracle::Model& M, const oracle::Set& W) {
    std::vector<int> dims;
    oracle::Set cur = W;
    for (;;) {
        dims.push_back(oracle::dim_of(M, cur));
        if (dims.back() == 0) break;
        oracle::Set next;
        for (auto x : cur) next.insert(M.times_u(x));
        cur = next;
    }
    // number of blocks of size > k is dims[k] - dims[k+1]; sizes by conjugation
    std::vector<int> parts;
    for (int j = 1;; ++j) {
        int c = 0;
        for (std::size_t k = 0; k + 1 < dims.size(); ++k)
            if (dims[k] - dims[k + 1] >= j) ++c;
        if (!c) break;
        parts.push_back(c);
    }
    return parts;
}

} // namespace

TEST(BlockPartition, WholeModule) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    EXPECT_EQ(block_partition(Subspace::zero(F2, 4), Subspace::whole(F2, 4)), (std::vector<int>{4, 4}));
}

TEST(BlockPartition, SquareTorsion) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    EXPECT_EQ(block_partition(Subspace::zero(F2, 4), Subspace::u_torsion(F2, 4, 2)), (std::vector<int>{2, 2}));
}

TEST(BlockPartition, ThirdLatticeOfWorkedExample) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    const Subspace W = span_of(F2, 3, {{0, 2}, {1, 1}, {1, 2}});
    EXPECT_EQ(block_partition(Subspace::zero(F2, 3), W), (std::vector<int>{2, 1}));
    EXPECT_EQ(hodge(W), (HodgePair{2, 1}));
}

TEST(BlockPartition, InvariantUnderBasisChangeOracle) {
    const FieldCtx& F3 = FieldCtx::prime(3);
    const oracle::Model M{3, 3};
    std::mt19937 rng(0);
    const auto chains = enumerate_chains(3, F3);
    std::uniform_int_distribution<std::size_t> pick(0, chains.size() - 1);
    const auto elems = field_elements(F3);
    std::uniform_int_distribution<std::size_t> pe(0, elems.size() - 1);
    for (int trial = 0; trial < 40; ++trial) {
        const Subspace W = chains[pick(rng)].levels[pick(rng) % 3];
        std::array<std::array<Row, 2>, 2> m;
        for (;;) {
            for (auto& r : m)
                for (auto& x : r) {
                    x.clear();
                    for (int k = 0; k < 3; ++k) x.push_back(elems[pe(rng)]);
                }
            if (!(m[0][0][0] * m[1][1][0] - m[0][1][0] * m[1][0][0]).is_zero()) break;
        }
        const Subspace gW = act(TruncatedGroupElement(F3, 3, m), W);
        const auto expect = oracle_blocks(M, oracle::elements(M, W));
        EXPECT_EQ(block_partition(Subspace::zero(F3, 3), W), expect);
        EXPECT_EQ(block_partition(Subspace::zero(F3, 3), gW), expect);
    }
}

TEST(BlockPartition, RejectsNonNested) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    EXPECT_THROW(block_partition(span_of(F2, 3, {{0, 2}}), span_of(F2, 3, {{1, 2}})), Error);
    EXPECT_THROW(block_partition(Subspace::zero(F2, 3), span_of(F2, 3, {{0, 0}})), Error);
}

TEST(Hodge, WorkedExampleLattices) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    // images in E_3 of <u^2 e1, u^3 e2> and <u^2 e1, u^2 e2>
    EXPECT_EQ(hodge(span_of(F2, 3, {{0, 2}})), (HodgePair{3, 2}));
    EXPECT_EQ(hodge(span_of(F2, 3, {{0, 2}, {1, 2}})), (HodgePair{2, 2}));
    EXPECT_EQ(hodge(span_of(F2, 3, {{0, 2}, {1, 1}, {1, 2}})), (HodgePair{2, 1}));
}

TEST(Hodge, ZeroSubspace) {
    EXPECT_EQ(hodge(Subspace::zero(FieldCtx::prime(2), 5)), (HodgePair{5, 5}));
}

TEST(Hodge, RejectsNonStable) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    try {
        hodge(span_of(F2, 3, {{0, 0}}));
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::not_u_stable);
    }
}

TEST(Hodge, DominanceRejectsUnequalSums) {
    EXPECT_THROW(dominance_leq({3, 1}, {2, 1}), Error);
    EXPECT_TRUE(dominance_leq({2, 2}, {3, 1}));
    EXPECT_FALSE(dominance_leq({4, 0}, {3, 1}));
}

TEST(Nilpotency, Basics) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    EXPECT_EQ(nilpotency_index(Subspace::zero(F2, 4)), 0);
    EXPECT_EQ(nilpotency_index(Subspace::whole(F2, 4)), 4);
    EXPECT_EQ(nilpotency_index(Subspace::u_torsion(F2, 4, 2)), 2);
}

TEST(Nilpotency, AgreesWithHodge) {
    for (const auto& c : enumerate_chains(4, FieldCtx::prime(2)))
        for (const auto& W : c.levels) EXPECT_EQ(nilpotency_index(W), 4 - hodge(W).b);
}

TEST(PartialHasse, FreeChainHasNoVanishing) {
    const PRChain c = standard_free_chain(FieldCtx::prime(2), 4);
    for (int i = 2; i <= 4; ++i) EXPECT_FALSE(mi_vanishes(c, i));
}

TEST(PartialHasse, SecondLevelKernel) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    int found = 0;
    for (const auto& c : enumerate_chains(4, F2)) {
        if (c.level(2) != Subspace::u_torsion(F2, 4, 1)) continue;
        EXPECT_TRUE(mi_vanishes(c, 2));
        ++found;
    }
    EXPECT_GT(found, 0);
}

TEST(PartialHasse, E2KilledByU) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    const PRChain c = make_chain(F2, 2, {span_of(F2, 2, {{0, 1}}), span_of(F2, 2, {{0, 1}, {1, 1}})});
    EXPECT_TRUE(mi_vanishes(c, 2));
    EXPECT_THROW(mi_vanishes(c, 1), Error);
    EXPECT_THROW(mi_vanishes(c, 3), Error);
}

TEST(Label, FreeChain) {
    const StratumLabel L = stratum_label(standard_free_chain(FieldCtx::prime(2), 4));
    EXPECT_EQ(L.lambda, (HodgePair{4, 0}));
    EXPECT_TRUE(L.T.empty());
    EXPECT_EQ(L.m1, M1::unknown);
}

TEST(Label, NormalFormFiltration) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    const PRChain c = make_chain(F2, 4,
                                 {span_of(F2, 4, {{1, 3}}), span_of(F2, 4, {{0, 3}, {1, 3}}),
                                  span_of(F2, 4, {{0, 3}, {1, 2}, {1, 3}}), span_of(F2, 4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}})});
    const StratumLabel L = stratum_label(c);
    EXPECT_EQ(L.lambda, (HodgePair{2, 2}));
    EXPECT_EQ(L.T, (std::set<int>{2, 3, 4}));
}

TEST(Label, TwoAndFourForceSquareTorsion) {
    for (int q : {2, 3})
        for (const auto& c : enumerate_chains(4, FieldCtx::prime(q))) {
            const StratumLabel L = stratum_label(c);
            if (L.T.count(2) && L.T.count(4)) EXPECT_EQ(L.lambda, (HodgePair{2, 2}));
        }
}

TEST(Label, ParseAndPrint) {
    const StratumLabel L = StratumLabel::parse("lambda=(3,1);T={3}");
    EXPECT_EQ(L.lambda, (HodgePair{3, 1}));
    EXPECT_EQ(L.T, (std::set<int>{3}));
    EXPECT_EQ(L.m1, M1::unknown);
    EXPECT_EQ(L.to_string(), "lambda=(3,1);T={3};m1=?");
    EXPECT_EQ(StratumLabel::parse("lambda=(2,2);T={2,3,4};m1=0").m1, M1::zero);
    EXPECT_EQ(StratumLabel::parse("lambda=(4,0);T={}").T.size(), 0u);
    EXPECT_THROW(StratumLabel::parse("lambda=(1,3);T={}"), Error);
    EXPECT_THROW(StratumLabel::parse("garbage"), Error);
}

TEST(Label, NaiveOrder) {
    const auto a = StratumLabel::parse("lambda=(3,1);T={2,3}"), b = StratumLabel::parse("lambda=(3,1);T={3}");
    EXPECT_TRUE(naive_leq(a, b));
    EXPECT_FALSE(naive_leq(b, a));
    const auto c = StratumLabel::parse("lambda=(2,2);T={3};m1=0"), d = StratumLabel::parse("lambda=(2,2);T={3};m1=1");
    EXPECT_TRUE(naive_leq(c, d));
    EXPECT_FALSE(naive_leq(d, c));
}

TEST(Vanishing, HodgeDropsAtVanishingIndices) {
    for (int q : {2, 3}) {
        bool converse_fails = false;
        for (const auto& c : enumerate_chains(4, FieldCtx::prime(q)))
            for (int i = 2; i <= 4; ++i) {
                const HodgePair hi = hodge(c.level(i)), hl = hodge(c.level(i - 2));
                const bool drop = hi == HodgePair{hl.a - 1, hl.b - 1};
                if (mi_vanishes(c, i)) EXPECT_TRUE(drop) << c.to_string();
                else if (drop) converse_fails = true;
            }
        EXPECT_TRUE(converse_fails);
    }
}

TEST(Vanishing, ThreeWayEquivalence) {
    for (int q : {2, 3})
        for (int e = 1; e <= 4; ++e)
            for (const auto& c : enumerate_chains(e, FieldCtx::prime(q))) {
                const StratumLabel L = stratum_label(c);
                const bool top = L.lambda == HodgePair{e, 0};
                EXPECT_EQ(top, L.T.empty());
                EXPECT_EQ(top, is_free_rank_one(c.top()));
            }
}

TEST(AdmPoset, E4Elements) {
    const AdmPoset P = adm_poset(4);
    ASSERT_EQ(P.elements.size(), 3u);
    EXPECT_EQ(P.elements[0], (HodgePair{2, 2}));
    EXPECT_EQ(P.elements[1], (HodgePair{3, 1}));
    EXPECT_EQ(P.elements[2], (HodgePair{4, 0}));
    EXPECT_TRUE(P.leq(P.elements[0], P.elements[1]));
    EXPECT_TRUE(P.leq(P.elements[1], P.elements[2]));
}

TEST(AdmPoset, DimensionFunctionals) {
    for (int e = 1; e <= 6; ++e)
        for (const auto& l : adm_poset(e).elements) {
            EXPECT_EQ(AdmPoset::dim_X(l), e - l.b);
            EXPECT_EQ(AdmPoset::dim_gr(l), e - 2 * l.b);
            EXPECT_EQ(AdmPoset::dim_X(l), AdmPoset::dim_gr(l) + AdmPoset::dim_fiber(l));
        }
    EXPECT_EQ(AdmPoset::dim_X({3, 1}), 3);
}

TEST(AdmPoset, Product) {
    const ProductPoset P = product_poset({adm_poset(2), adm_poset(3)});
    ASSERT_EQ(P.elements.size(), 4u);
    for (const auto& x : P.elements) {
        EXPECT_EQ(P.dim_X(x), AdmPoset::dim_X(x[0]) + AdmPoset::dim_X(x[1]));
        for (const auto& y : P.elements)
            EXPECT_EQ(P.leq(x, y), dominance_leq(x[0], y[0]) && dominance_leq(x[1], y[1]));
    }
}
