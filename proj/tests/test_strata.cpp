#include <gtest/gtest.h>

#include "prchains/io.hpp"

using namespace prc;

namespace {

const std::map<HodgePair, std::set<std::set<int>>> kReferenceE4{
    {{4, 0}, {{}}},
    {{3, 1}, {{2}, {3}, {4}, {2, 3}, {3, 4}}},
    {{2, 2}, {{3}, {2, 4}, {4}, {2, 3, 4}}},
};

long power(long b, int n) {
    long r = 1;
    while (n-- > 0) r *= b;
    return r;
}

} // namespace

TEST(Census, SingleLevel) {
    const Census c = census(1, FieldCtx::prime(2));
    ASSERT_EQ(c.counts.size(), 1u);
    EXPECT_EQ(c.counts.begin()->first.to_string(), "lambda=(1,0);T={};m1=?");
    EXPECT_EQ(c.counts.begin()->second, 3);
    EXPECT_EQ(census_csv({c}), "e,q,lambda,T,m1,count\n1,2,\"(1,0)\",{},?,3\n");
}

TEST(Census, TotalsAreProjectiveLinePowers) {
    for (int q : {2, 3, 4, 5, 7})
        for (int e = 1; e <= 4; ++e) {
            const Census c = census(e, FieldCtx::of_order(q), 4);
            EXPECT_EQ(c.total, power(q + 1, e)) << "e=" << e << " q=" << q;
            long s = 0;
            for (const auto& [L, n] : c.counts) {
                s += n;
                if (L.lambda == HodgePair{e, 0}) EXPECT_TRUE(L.T.empty());
            }
            EXPECT_EQ(s, c.total);
        }
}

TEST(Census, EmptinessTableAtE4) {
    for (int q : {2, 3}) EXPECT_EQ(census(4, FieldCtx::of_order(q)).nonempty_T(), kReferenceE4) << "q=" << q;
}

TEST(Census, LabelSetIndependentOfField) {
    const Census a = census(4, FieldCtx::prime(2)), b = census(4, FieldCtx::prime(3));
    EXPECT_EQ(a.labels(), b.labels());
    EXPECT_NE(a.counts, b.counts);
}

TEST(Census, ParallelMatchesSerial) {
    const FieldCtx& F3 = FieldCtx::prime(3);
    EXPECT_EQ(census(4, F3, 1).counts, census(4, F3, 8).counts);
}

TEST(DegreeFit, RecoversKnownPolynomial) {
    std::map<int, long> m;
    for (int q : {2, 3, 4, 5, 7}) m[q] = 3 * q * q * q - q + 5;
    const DegreeFit f = degree_fit(m);
    EXPECT_EQ(f.degree, 3);
    EXPECT_FALSE(f.extra_roots);
    EXPECT_EQ(f.coeffs, (std::vector<Rational>{5, -1, 0, 3}));
    EXPECT_EQ(f.to_string(), "3*q^3 - q + 5");
}

TEST(DegreeFit, FreeLatticeCounts) {
    std::map<int, long> m;
    for (int q : {2, 3, 4, 5, 7, 8}) {
        const auto lc = lattice_counts(enumerate_chains(4, FieldCtx::of_order(q)));
        m[q] = lc.at({4, 0});
        EXPECT_EQ(m[q], power(q, 3) * (q + 1));
    }
    EXPECT_EQ(m[2], 24);
    const DegreeFit f = degree_fit(m);
    EXPECT_EQ(f.degree, AdmPoset::dim_gr({4, 0}));
    EXPECT_FALSE(f.extra_roots);
}

TEST(DegreeFit, SquareTorsionStratum) {
    std::map<int, long> chains, lattices;
    for (int q : {2, 3, 4, 5, 7}) {
        const FieldCtx& K = FieldCtx::of_order(q);
        const auto cs = enumerate_chains(4, K);
        chains[q] = census_of(4, K, cs).count_lambda({2, 2});
        lattices[q] = lattice_counts(cs).at({2, 2});
    }
    EXPECT_EQ(degree_fit(chains).degree, 2);
    const DegreeFit l = degree_fit(lattices);
    EXPECT_EQ(l.degree, 0);
    EXPECT_EQ(l.coeffs, (std::vector<Rational>{1}));
}

TEST(DegreeFit, NonPolynomialFlagged) {
    std::map<int, long> m;
    for (int q : {2, 3, 4, 5, 7}) m[q] = power(2, q);
    EXPECT_TRUE(degree_fit(m).extra_roots);
}

TEST(DegreeFit, TooFewSamples) {
    try {
        degree_fit({{2, 5}});
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::invalid_input);
    }
}

TEST(Fibers, FreeLatticeFiberIsAPoint) {
    const FiberReport r = fiber_constancy(4, FieldCtx::prime(2));
    EXPECT_EQ(r.sizes.at({4, 0}), (std::set<long>{1}));
    EXPECT_TRUE(r.constant());
}

TEST(Fibers, SquareTorsionConstantWithQuadraticGrowth) {
    std::map<int, long> v;
    for (int q : {2, 3, 4, 5}) {
        const FiberReport r = fiber_constancy(4, FieldCtx::of_order(q), 4);
        ASSERT_EQ(r.sizes.at({2, 2}).size(), 1u);
        v[q] = *r.sizes.at({2, 2}).begin();
    }
    const DegreeFit f = degree_fit(v);
    EXPECT_EQ(f.degree, AdmPoset::dim_fiber({2, 2}));
    EXPECT_FALSE(f.extra_roots);
}

TEST(Fibers, LengthThree) {
    std::map<int, long> v;
    for (int q : {2, 3, 4, 5}) {
        const FiberReport r = fiber_constancy(3, FieldCtx::of_order(q));
        ASSERT_TRUE(r.constant());
        v[q] = r.value({2, 1});
    }
    EXPECT_EQ(degree_fit(v).degree, 1);
}

TEST(Poset, LambdaOnlyAtE3) {
    PosetOptions o;
    o.lambda_only = true;
    const PosetReport p = build_poset(census(3, FieldCtx::prime(2)), o);
    ASSERT_EQ(p.edges.size(), 1u);
    const EdgeCertificate& E = p.edges[0];
    EXPECT_EQ(E.lower.lambda, (HodgePair{2, 1}));
    EXPECT_EQ(E.upper.lambda, (HodgePair{3, 0}));
    EXPECT_EQ(E.points, census(3, FieldCtx::prime(2)).count_lambda({2, 1}));
    EXPECT_EQ(E.certified, E.points);
    EXPECT_EQ(E.methods.at("hodge-raise"), E.points);
    EXPECT_TRUE(p.ok());
}

TEST(Poset, EmptyCensus) {
    const PosetReport p = build_poset(Census{});
    EXPECT_TRUE(p.nodes.empty());
    EXPECT_TRUE(p.edges.empty());
    EXPECT_TRUE(p.ok());
}

TEST(Poset, FullE4OverF2) {
    PosetOptions o;
    o.jobs = 4;
    const Census c = census(4, FieldCtx::prime(2));
    const PosetReport p = build_poset(c, o);
    EXPECT_TRUE(p.ok());
    int linear = 0, layered = 0;
    for (const auto& E : p.edges) {
        EXPECT_TRUE(E.not_found.empty()) << E.lower.to_string() << " -> " << E.upper.to_string();
        EXPECT_EQ(E.audit_failures, 0);
        if (E.lower.m1 == M1::unknown) {
            ++linear;
            EXPECT_TRUE(E.realizable);
            EXPECT_EQ(E.points, c.counts.at(E.lower));
            EXPECT_EQ(E.certified, E.points);
        } else {
            ++layered;
        }
        if (E.lower.to_string() == "lambda=(2,2);T={2,3,4};m1=?" && E.upper.to_string() == "lambda=(2,2);T={3};m1=?")
            EXPECT_EQ(E.methods.at("linear-1"), E.points);
        if (E.lower.to_string() == "lambda=(2,2);T={3};m1=?" && E.upper.to_string() == "lambda=(3,1);T={3};m1=?")
            EXPECT_EQ(E.methods.at("linear-2"), E.points);
        if (E.lower.to_string() == "lambda=(2,2);T={2,3,4};m1=0" && E.upper.to_string() == "lambda=(2,2);T={3};m1=0")
            EXPECT_EQ(E.methods.at("sigma-1"), E.points);
        if (E.lower.m1 == M1::zero && E.upper.m1 == M1::nonzero && E.points > 0)
            EXPECT_EQ(E.methods.at("invert-m1"), E.points);
    }
    EXPECT_EQ(linear, 14);
    EXPECT_EQ(layered, 37);
}

TEST(Poset, CoveringEdgesOfTheNaiveOrder) {
    const auto nodes = census(4, FieldCtx::prime(2)).labels();
    const auto edges = covering_edges({nodes.begin(), nodes.end()});
    // oracle: a < b is a cover iff no chain a < c < b of length two exists in the transitive order
    int n = 0;
    for (const auto& a : nodes)
        for (const auto& b : nodes) {
            if (a == b || !naive_leq(a, b)) continue;
            int between = 0;
            for (const auto& c : nodes) between += c != a && c != b && naive_leq(a, c) && naive_leq(c, b);
            n += between == 0;
        }
    EXPECT_EQ(static_cast<int>(edges.size()), n);
    EXPECT_EQ(n, 14);
}

TEST(Poset, DotIsStable) {
    const Census c = census(4, FieldCtx::prime(2));
    PosetOptions a, b;
    a.jobs = 1;
    b.jobs = 6;
    const std::string x = poset_dot(build_poset(c, a)), y = poset_dot(build_poset(c, b));
    EXPECT_EQ(x, y);
    EXPECT_NE(x.find("λ=(2,2) T={2,3,4} m1=0"), std::string::npos);
}

TEST(Product, TrivialFactors) {
    const Census c = census(1, FieldCtx::prime(2));
    const ProductCensus p = product_census({c, c});
    EXPECT_EQ(p.total, 9);
    EXPECT_EQ(p.counts.size(), 1u);
}

TEST(Product, TotalsMultiplyAndDimsAdd) {
    const FieldCtx& F2 = FieldCtx::prime(2);
    const Census a = census(2, F2), b = census(3, F2);
    const ProductCensus p = product_census({a, b});
    EXPECT_EQ(p.total, 243);
    for (const auto& [L, n] : p.counts) {
        EXPECT_EQ(n, a.counts.at(L[0]) * b.counts.at(L[1]));
        EXPECT_EQ(ProductCensus::dim(p.es, L), AdmPoset::dim_X(L[0].lambda) + AdmPoset::dim_X(L[1].lambda));
    }
}

TEST(Product, ComponentwiseOrderOnTwoFactors) {
    const AdmPoset e2 = adm_poset(2);
    const ProductPoset P = product_poset({e2, e2});
    EXPECT_EQ(P.elements.size(), 4u);
    const StratumLabel lo = StratumLabel::parse("lambda=(1,1);T={2}"), hi = StratumLabel::parse("lambda=(2,0);T={}");
    EXPECT_TRUE(ProductCensus::leq({lo, lo}, {hi, lo}));
    EXPECT_FALSE(ProductCensus::leq({hi, lo}, {lo, hi}));
}

TEST(Product, MixedFieldsRejected) {
    try {
        product_census({census(1, FieldCtx::prime(2)), census(1, FieldCtx::prime(3))});
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::mixed_contexts);
    }
}

TEST(Io, ChainRoundTrip) {
    for (int q : {2, 4, 9})
        for (const auto& c : enumerate_chains(3, FieldCtx::of_order(q)))
            EXPECT_EQ(io::chain_from_json(io::json::parse(io::to_json(c).dump())), c);
}

TEST(Io, FamilyRoundTrip) {
    const FieldCtx& F3 = FieldCtx::prime(3);
    for (const auto& c : enumerate_chains(3, F3)) {
        if (hodge(c.top()) == HodgePair{3, 0}) continue;
        const FamilyChain f = hodge_raise(c).family;
        const FamilyChain g = io::family_from_json(io::json::parse(io::to_json(f).dump()));
        EXPECT_EQ(g.generic(), f.generic());
        EXPECT_EQ(specialize(g), c);
    }
    const AgWitness w = ag_witness(FieldCtx::prime(2), 3, Scalar::one(FieldCtx::prime(2)));
    const FamilyChain t = invert_m1(w.model, w.chain);
    const FamilyChain u = io::family_from_json(io::json::parse(io::to_json(t).dump()));
    EXPECT_EQ(generic_label(u).label, generic_label(t).label);
}

TEST(Io, RejectsMalformedChain) {
    io::json j = io::to_json(standard_free_chain(FieldCtx::prime(2), 2));
    j["levels"] = io::json::array({j["levels"][1], j["levels"][0]});
    EXPECT_THROW(io::chain_from_json(j), Error);
    j = io::to_json(standard_free_chain(FieldCtx::prime(2), 2));
    j["levels"][0][0]["e1"][0] = 7;
    EXPECT_THROW(io::chain_from_json(j), Error);
}
