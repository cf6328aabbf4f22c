#pragma once

// Mod-p Dieudonné models: a sigma-semilinear Frobenius on E_e given by a 2x2
// matrix over K[u]/(u^e), the subspace F^(1) and the vanishing of m1.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "invariants.hpp"

namespace prc {

/// F(v) = F_matrix * frobenius(v), with v as a column (a, b).
struct DieudonneModel {
    const FieldCtx* ctx = nullptr;
    int e = 0;
    std::array<std::array<Row, 2>, 2> F;

    const FieldCtx& field() const { return *ctx; }

    static DieudonneModel make(const FieldCtx& K, int e, std::array<std::array<Row, 2>, 2> F) {
        require(e >= 1, ErrorKind::invalid_input, "e must be positive");
        for (auto& r : F)
            for (auto& x : r) {
                require(static_cast<int>(x.size()) <= e, ErrorKind::invalid_input, "F entry longer than e");
                for (const auto& s : x) require(&s.field() == &K, ErrorKind::mixed_contexts, "F entry context");
                x.resize(e, Scalar::zero(K));
            }
        return DieudonneModel{&K, e, std::move(F)};
    }

    static DieudonneModel zero(const FieldCtx& K, int e) {
        const Row z(e, Scalar::zero(K));
        return make(K, e, {{{z, z}, {z, z}}});
    }

    UVec apply(const UVec& v) const {
        require(&v.field() == ctx && v.length() == e, ErrorKind::mixed_contexts, "vector and model differ");
        const UVec s = v.frobenius();
        const Row a(s.entries().begin(), s.entries().begin() + e);
        const Row b(s.entries().begin() + e, s.entries().end());
        using G = TruncatedGroupElement;
        return UVec::from_ab(*ctx, G::add_entry(G::mul_entry(F[0][0], a), G::mul_entry(F[0][1], b)),
                             G::add_entry(G::mul_entry(F[1][0], a), G::mul_entry(F[1][1], b)));
    }

    /// The same matrix with entries embedded as constants in a t-extension.
    DieudonneModel base_change(const FieldCtx& L) const {
        if (&L == ctx) return *this;
        require(&L.finite() == ctx, ErrorKind::mixed_contexts, "base change needs the matching finite base");
        DieudonneModel m{&L, e, {}};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (const auto& s : F[i][j]) m.F[i][j].push_back(Scalar::constant(L, s.code()));
        return m;
    }
};

/// F applied to the Frobenius twist of u^{-1}(omega^(e-1)); apply() already twists its input.
inline Subspace f_one(const DieudonneModel& model, const PRChain& c) {
    require(c.e == model.e, ErrorKind::mixed_contexts, "model and chain have different e");
    const DieudonneModel M = model.base_change(c.field());
    std::vector<UVec> img;
    const Subspace pre = u_preimage(c.level(c.e - 1));
    for (const auto& v : pre.basis()) img.push_back(M.apply(v));
    return Subspace::span(c.field(), c.e, img);
}

inline bool m1_vanishes(const DieudonneModel& model, const PRChain& c) {
    const Subspace F1 = f_one(model, c);
    require(F1.dim() == 1, ErrorKind::degenerate_f,
            "F^(1) has dimension " + std::to_string(F1.dim()) + ", m1 is undefined");
    return F1 == c.level(1);
}

/// Label with the m1 flag filled in from the model.
inline StratumLabel full_label(const DieudonneModel& model, const PRChain& c) {
    StratumLabel L = stratum_label(c);
    L.m1 = m1_vanishes(model, c) ? M1::zero : M1::nonzero;
    return L;
}

/// F = (u^m, c u^2; u^2, 0) over K[u]/(u^e).
inline DieudonneModel ag_normal_form(const FieldCtx& K, int m, const Scalar& c, int e = 4) {
    require(m >= 2, ErrorKind::precondition, "normal form needs m >= 2");
    require(&c.field() == &K && !c.is_zero(), ErrorKind::precondition, "normal form needs a unit c");
    Row z(e, Scalar::zero(K));
    Row um = z, cu2 = z, u2 = z;
    if (m < e) um[m] = Scalar::one(K);
    if (2 < e) {
        cu2[2] = c;
        u2[2] = Scalar::one(K);
    }
    return DieudonneModel::make(K, e, {{{um, cu2}, {u2, z}}});
}

/// omega^(1) = <u^3 x>, omega^(2) = E[u], omega^(3) = u^{-1}(omega^(1)), omega^(4) = E[u^2].
inline PRChain ag_chain(const FieldCtx& K, const UVec& x) {
    const int e = 4;
    const Subspace l = Subspace::span(K, e, {x.times_u_power(3)});
    return make_chain(K, e, {l, Subspace::u_torsion(K, e, 1), u_preimage(l), Subspace::u_torsion(K, e, 2)});
}

/// The filtration with omega^(1) = <u^3 e2>.
inline PRChain ag_printed_chain(const FieldCtx& K) { return ag_chain(K, UVec::monomial(K, 4, 1, 0)); }

struct AgWitness {
    DieudonneModel model;
    PRChain chain;
    bool printed_line = false; // omega^(1) = <u^3 e2>
};

/// A K-rational point of the (2,2), {2,3,4} stratum with m1 = 0 for the normal-form model.
/// Tries <u^3 e2> first, then <u^3 (e1 + a e2)> for a in code order.
inline AgWitness ag_witness(const FieldCtx& K, int m, const Scalar& c, int e = 4) {
    require(e == 4, ErrorKind::precondition, "the normal-form witness lives at e = 4");
    const DieudonneModel model = ag_normal_form(K, m, c, e);
    std::vector<UVec> lines{UVec::monomial(K, e, 1, 0)};
    for (const auto& a : field_elements(K, FieldCtx::max_table_order))
        lines.push_back(UVec::monomial(K, e, 0, 0) + a * UVec::monomial(K, e, 1, 0));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const PRChain ch = ag_chain(K, lines[i]);
        const Subspace F1 = f_one(model, ch);
        if (F1.dim() != 1 || F1 != ch.level(1)) continue;
        const StratumLabel L = stratum_label(ch);
        require(L.lambda == HodgePair{2, 2} && L.T == std::set<int>{2, 3, 4}, ErrorKind::internal,
                "witness left its stratum");
        return AgWitness{model, ch, i == 0};
    }
    const PRChain printed = ag_printed_chain(K);
    fail(ErrorKind::no_rational_witness,
         "no " + K.describe() + "-rational point of the (2,2),{2,3,4} stratum has m1 = 0 for m = " +
             std::to_string(m) + ", c = " + c.to_string() + "; on <u^3 e2> one gets F^(1) = " +
             f_one(model, printed).to_string());
}

} // namespace prc
