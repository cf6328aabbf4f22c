#pragma once

// One-parameter families of chains over K(t) or K[t]/(t^N), generic-fiber
// certification, and the deformation constructions: Hodge raising, the linear
// and sigma-linear e = 4 recipes, m1 inversion and a first-order witness search.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dieudonne.hpp"

namespace prc {

enum class FamilyMode { exact, truncated };

inline const char* mode_name(FamilyMode m) { return m == FamilyMode::exact ? "exact" : "truncated"; }

/// Level i is spanned by gens[i-1] over ctx; specialization is taken generator by generator.
struct FamilyChain {
    FamilyMode mode = FamilyMode::exact;
    const FieldCtx* base = nullptr;
    const FieldCtx* ctx = nullptr;
    int e = 0;
    std::vector<std::vector<UVec>> gens;
    std::optional<DieudonneModel> model; // over base, constant in t
    std::vector<UVec> pre;               // generators of u^{-1}(omega^(e-1)) when supplied by a recipe
    std::string recipe;

    int precision() const { return mode == FamilyMode::truncated ? ctx->precision() : 0; }
    Subspace level(int i) const {
        if (i == 0) return Subspace::zero(*ctx, e);
        return Subspace::span(*ctx, e, gens[static_cast<std::size_t>(i - 1)]);
    }
    PRChain generic() const {
        PRChain c{e, ctx, {}};
        for (int i = 1; i <= e; ++i) c.levels.push_back(level(i));
        return c;
    }
};

/// The chain c as a family that does not depend on t.
inline FamilyChain constant_family(const PRChain& c, FamilyMode mode = FamilyMode::exact, int prec = 16) {
    const FieldCtx& K = c.field();
    require(K.is_finite(), ErrorKind::invalid_input, "families start from a chain over a finite field");
    FamilyChain f;
    f.mode = mode;
    f.base = &K;
    f.ctx = mode == FamilyMode::exact ? &FieldCtx::rational_t(K) : &FieldCtx::truncated_t(K, prec);
    f.e = c.e;
    for (const auto& W : c.levels) {
        std::vector<UVec> g;
        for (const auto& v : W.basis()) g.push_back(v.base_change(*f.ctx));
        f.gens.push_back(std::move(g));
    }
    f.recipe = "constant";
    return f;
}

inline PRChain specialize(const FamilyChain& f) {
    PRChain c{f.e, f.base, {}};
    for (int i = 1; i <= f.e; ++i) {
        std::vector<UVec> g;
        for (const auto& v : f.gens[static_cast<std::size_t>(i - 1)]) g.push_back(v.specialize_at_zero());
        Subspace W = Subspace::span(*f.base, f.e, g);
        require(W.dim() == i, ErrorKind::invalid_input,
                "generators of level " + std::to_string(i) + " become dependent at t = 0");
        c.levels.push_back(std::move(W));
    }
    const ChainReport r = validate(c);
    require(r.ok, ErrorKind::invalid_input, "special fiber is not a chain at level " + std::to_string(r.level) + ": " + r.reason);
    return c;
}

inline ChainReport validate_family(const FamilyChain& f) {
    if (!f.base || !f.ctx || static_cast<int>(f.gens.size()) != f.e) return {false, 0, "incomplete family"};
    try {
        (void)specialize(f);
        // element-wise: u-images of a moving level need not span a free summand mod t^N
        Subspace prev = f.level(0);
        for (int i = 1; i <= f.e; ++i) {
            const Subspace W = f.level(i);
            if (W.dim() != i) return {false, i, "dimension " + std::to_string(W.dim()) + " instead of " + std::to_string(i)};
            for (const auto& v : prev.basis())
                if (!W.contains(v)) return {false, i, "does not contain the previous level"};
            for (const auto& v : W.basis())
                if (!prev.contains(v.times_u())) return {false, i, "u maps it outside the previous level"};
            prev = W;
        }
        return {};
    } catch (const Error& err) {
        return {false, 0, err.what()};
    }
}

namespace detail {

inline std::set<StratumLabel> linear_labels(int e, const FieldCtx& K) {
    static std::mutex mu;
    static std::map<std::pair<int, const FieldCtx*>, std::set<StratumLabel>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({e, &K});
    if (it != cache.end()) return it->second;
    std::set<StratumLabel> s;
    for (const auto& c : enumerate_chains(e, K)) s.insert(stratum_label(c));
    return cache[{e, &K}] = s;
}

inline std::vector<Row> rows_of(const std::vector<UVec>& vs) {
    std::vector<Row> r;
    for (const auto& v : vs) r.push_back(v.entries());
    return r;
}

} // namespace detail

/// Generic-fiber invariants. Exact families give exact values; truncated families give
/// certified bounds, pinned relations (holding mod t^N) and the stratum singled out by them.
struct GenericCertificate {
    bool exact = true;
    int precision = 0;
    StratumLabel label;
    HodgePair lambda_lower, lambda_upper;
    std::set<int> T_pinned, T_upper;
    std::vector<std::string> excluded;
    bool determined = true;
};

/// nonempty: labels (m1 ignored) known to occur; defaults to the census over the base field.
inline GenericCertificate generic_label(const FamilyChain& f, const std::set<StratumLabel>* nonempty = nullptr) {
    GenericCertificate g;
    const FieldCtx& L = *f.ctx;
    if (f.mode == FamilyMode::exact) {
        const PRChain c = f.generic();
        g.label = stratum_label(c);
        if (f.model) g.label.m1 = m1_vanishes(f.model->base_change(L), c) ? M1::zero : M1::nonzero;
        g.lambda_lower = g.lambda_upper = g.label.lambda;
        g.T_pinned = g.T_upper = g.label.T;
        return g;
    }
    g.exact = false;
    g.precision = L.precision();
    const int e = f.e;
    std::vector<Subspace> lv;
    for (int i = 0; i <= e; ++i) lv.push_back(f.level(i));

    // nilpotency of the top level: certified from below, pinned from above
    std::vector<UVec> img = lv[e].basis();
    int s_lower = 0, s_upper = -1;
    for (int k = 0; k <= e; ++k) {
        bool all_zero = true;
        for (const auto& v : img) all_zero = all_zero && v.is_zero();
        if (all_zero) {
            s_upper = k;
            break;
        }
        if (linalg::certified_rank(detail::rows_of(img), L) > 0) s_lower = k + 1;
        for (auto& v : img) v = v.times_u();
    }
    require(s_upper >= 0, ErrorKind::internal, "u is not nilpotent on the top level");
    g.lambda_lower = {s_lower, e - s_lower};
    g.lambda_upper = {s_upper, e - s_upper};

    for (int i = 2; i <= e; ++i) {
        std::vector<UVec> rows = lv[i - 2].basis();
        bool pinned = true;
        for (const auto& v : lv[i].basis()) {
            const UVec w = v.times_u();
            rows.push_back(w);
            pinned = pinned && lv[i - 2].contains(w);
        }
        const bool nonzero = linalg::certified_rank(detail::rows_of(rows), L) > i - 2;
        if (pinned) g.T_pinned.insert(i);
        if (!nonzero) g.T_upper.insert(i);
    }

    M1 m1 = M1::unknown;
    if (f.model) {
        std::vector<UVec> pre = f.pre;
        if (pre.empty()) {
            for (const auto& v : f.gens[static_cast<std::size_t>(e - 2)])
                require(v.specialize_at_zero().base_change(L) == v, ErrorKind::precondition,
                        "truncated m1 certificate needs preimage generators for a moving omega^(e-1)");
            const Subspace W = Subspace::span(*f.base, e, [&] {
                std::vector<UVec> s;
                for (const auto& v : f.gens[static_cast<std::size_t>(e - 2)]) s.push_back(v.specialize_at_zero());
                return s;
            }());
            const Subspace P = u_preimage(W);
            for (const auto& v : P.basis()) pre.push_back(v.base_change(L));
        }
        const DieudonneModel M = f.model->base_change(L);
        std::vector<UVec> ims;
        std::vector<UVec> ims0;
        for (const auto& p : pre) {
            ims.push_back(M.apply(p));
            ims0.push_back(ims.back().specialize_at_zero());
        }
        require(linalg::certified_rank(detail::rows_of(ims), L) <= 1, ErrorKind::degenerate_f,
                "F^(1) is generically of dimension > 1");
        require(Subspace::span(*f.base, e, ims0).dim() == 1, ErrorKind::degenerate_f, "F^(1) at t = 0 is not a line");
        bool pinned = true;
        for (const auto& w : ims) pinned = pinned && lv[1].contains(w);
        std::vector<UVec> rows = lv[1].basis();
        rows.insert(rows.end(), ims.begin(), ims.end());
        if (pinned)
            m1 = M1::zero;
        else if (linalg::certified_rank(detail::rows_of(rows), L) >= 2)
            m1 = M1::nonzero;
    }

    const std::set<StratumLabel> table = nonempty ? *nonempty : detail::linear_labels(e, *f.base);
    std::vector<StratumLabel> cand;
    for (StratumLabel x : table) {
        x.m1 = M1::unknown;
        std::string why;
        auto add = [&](const std::string& r) { why += (why.empty() ? "" : "; ") + r; };
        if (!dominance_leq(g.lambda_lower, x.lambda)) add("hodge below the certified bound " + g.lambda_lower.to_string());
        if (!dominance_leq(x.lambda, g.lambda_upper)) add("hodge above the pinned bound " + g.lambda_upper.to_string());
        for (int i : g.T_pinned)
            if (!x.T.count(i)) add("m" + std::to_string(i) + " vanishes mod t^" + std::to_string(g.precision));
        for (int i : x.T)
            if (!g.T_upper.count(i)) add("m" + std::to_string(i) + " certified nonzero");
        if (why.empty())
            cand.push_back(x);
        else
            g.excluded.push_back(x.to_string() + ": " + why);
    }
    g.determined = cand.size() == 1 && (!f.model || m1 != M1::unknown);
    if (cand.size() == 1) {
        g.label = cand[0];
        g.label.m1 = m1;
    } else {
        g.label.lambda = g.lambda_lower;
        g.label.T = g.T_upper;
        g.label.m1 = m1;
    }
    return g;
}

/// As generic_label, but an undetermined truncated certificate raises AllMinorsVanish.
inline GenericCertificate certified_generic_label(const FamilyChain& f, const std::set<StratumLabel>* nonempty = nullptr) {
    GenericCertificate g = generic_label(f, nonempty);
    require(g.determined, ErrorKind::all_minors_vanish,
            "generic stratum not determined at precision " + std::to_string(g.precision));
    return g;
}

struct SemicontinuityAudit {
    bool ok = true;
    StratumLabel special, generic;
    std::string detail;
};

/// Hodge can only rise and vanishing sets only shrink from t = 0 to the generic point.
inline SemicontinuityAudit semicontinuity_audit(const FamilyChain& f) {
    SemicontinuityAudit a;
    const PRChain c = specialize(f);
    a.special = f.model ? full_label(*f.model, c) : stratum_label(c);
    a.generic = generic_label(f).label;
    if (!dominance_leq(a.special.lambda, a.generic.lambda)) {
        a.ok = false;
        a.detail = "hodge drops under generization";
    }
    for (int i : a.generic.T)
        if (!a.special.T.count(i)) {
            a.ok = false;
            a.detail = "m" + std::to_string(i) + " vanishes generically but not at t = 0";
        }
    if (a.special.m1 == M1::nonzero && a.generic.m1 == M1::zero) {
        a.ok = false;
        a.detail = "m1 vanishes generically but not at t = 0";
    }
    return a;
}

// ---------------------------------------------------------------------------------------------
// Hodge raising

/// A pair of polynomials in u (no truncation) over a coefficient context.
class PolyVec {
public:
    PolyVec() = default;
    PolyVec(const FieldCtx& K) : ctx_(&K) {}

    /// Polynomial representative of degree < N, with constants embedded into L.
    static PolyVec lift(const UVec& v, const FieldCtx& L) {
        PolyVec r(L);
        const UVec w = v.base_change(L);
        for (int k = 0; k < v.length(); ++k) {
            r.c_[0].push_back(w.a(k));
            r.c_[1].push_back(w.b(k));
        }
        r.trim();
        return r;
    }

    const FieldCtx& field() const { return *ctx_; }
    int degree() const { return std::max(static_cast<int>(c_[0].size()), static_cast<int>(c_[1].size())) - 1; }
    Scalar coeff(int coord, int k) const {
        const auto& p = c_[coord];
        return k < static_cast<int>(p.size()) ? p[k] : Scalar::zero(*ctx_);
    }

    friend PolyVec operator+(const PolyVec& x, const PolyVec& y) {
        require(x.ctx_ == y.ctx_, ErrorKind::mixed_contexts, "polynomial vectors over different rings");
        PolyVec r(*x.ctx_);
        for (int h = 0; h < 2; ++h) {
            const std::size_t n = std::max(x.c_[h].size(), y.c_[h].size());
            for (std::size_t k = 0; k < n; ++k) r.c_[h].push_back(x.coeff(h, static_cast<int>(k)) + y.coeff(h, static_cast<int>(k)));
        }
        r.trim();
        return r;
    }
    friend PolyVec operator*(const Scalar& s, const PolyVec& x) {
        PolyVec r = x;
        for (auto& p : r.c_)
            for (auto& a : p) a = s * a;
        r.trim();
        return r;
    }
    friend PolyVec operator-(const PolyVec& x, const PolyVec& y) { return x + (-Scalar::one(*y.ctx_)) * y; }

    PolyVec times_u_power(int k) const {
        PolyVec r = *this;
        for (auto& p : r.c_)
            if (!p.empty()) p.insert(p.begin(), static_cast<std::size_t>(k), Scalar::zero(*ctx_));
        return r;
    }
    /// Exact division by u; a nonzero constant term means the quotient leaves Λ0.
    PolyVec divided_by_u() const {
        PolyVec r = *this;
        for (auto& p : r.c_) {
            if (p.empty()) continue;
            require(p[0].is_zero(), ErrorKind::containment_violated,
                    "division by u leaves the standard lattice: " + to_string());
            p.erase(p.begin());
        }
        return r;
    }
    UVec reduce(int N) const {
        Row a, b;
        for (int k = 0; k < N; ++k) {
            a.push_back(coeff(0, k));
            b.push_back(coeff(1, k));
        }
        return UVec::from_ab(*ctx_, a, b);
    }
    std::string to_string() const { return reduce(degree() + 1 > 0 ? degree() + 1 : 1).to_string(); }

private:
    void trim() {
        for (auto& p : c_)
            while (!p.empty() && p.back().is_zero()) p.pop_back();
    }
    const FieldCtx* ctx_ = nullptr;
    std::array<std::vector<Scalar>, 2> c_;
};

/// Basis (e1', e2') of Λ0 with Λ = <u^big e1', u^small e2'> + u^N Λ0, where Λ corresponds to W.
struct AdaptedBasis {
    UVec e1, e2;
    int big = 0, small = 0;
};

namespace detail {

inline int u_valuation(const Row& r) {
    for (std::size_t k = 0; k < r.size(); ++k)
        if (!r[k].is_zero()) return static_cast<int>(k);
    return static_cast<int>(r.size());
}

inline Row shift_down(const Row& r, int v) {
    Row s(r.size(), Scalar::zero(r[0].field()));
    for (std::size_t k = static_cast<std::size_t>(v); k < r.size(); ++k) s[k - static_cast<std::size_t>(v)] = r[k];
    return s;
}

/// Inverse of a unit of K[u]/(u^N).
inline Row unit_inverse(const Row& r) {
    const std::size_t N = r.size();
    Row inv(N, Scalar::zero(r[0].field()));
    const Scalar c0 = r[0].inverse();
    inv[0] = c0;
    for (std::size_t k = 1; k < N; ++k) {
        Scalar acc = Scalar::zero(r[0].field());
        for (std::size_t j = 1; j <= k; ++j) acc = acc + r[j] * inv[k - j];
        inv[k] = -(c0 * acc);
    }
    return inv;
}

} // namespace detail

/// Smith form over K[u]/(u^N) of the coordinate matrix of a u-stable W.
inline AdaptedBasis adapted_basis(const Subspace& W) {
    require(is_u_stable(W), ErrorKind::not_u_stable, "adapted basis needs a u-stable subspace");
    const FieldCtx& K = W.field();
    const int N = W.length();
    using G = TruncatedGroupElement;
    std::array<std::vector<Row>, 2> M;
    for (const auto& v : W.basis()) {
        M[0].emplace_back(v.entries().begin(), v.entries().begin() + N);
        M[1].emplace_back(v.entries().begin() + N, v.entries().end());
    }
    const Row one = G::constant_entry(K, N, Scalar::one(K)), zero(N, Scalar::zero(K));
    std::array<std::array<Row, 2>, 2> Linv{{{one, zero}, {zero, one}}};
    int best = N, bi = 0;
    std::size_t bj = 0;
    for (int i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < M[i].size(); ++j) {
            const int v = detail::u_valuation(M[i][j]);
            if (v < best) {
                best = v;
                bi = i;
                bj = j;
            }
        }
    int d1 = N, d2 = N;
    if (best < N) {
        if (bi == 1) {
            std::swap(M[0], M[1]);
            for (auto& r : Linv) std::swap(r[0], r[1]);
        }
        d1 = best;
        const Row unit_inv = detail::unit_inverse(detail::shift_down(M[0][bj], best));
        const Row f = G::mul_entry(detail::shift_down(M[1][bj], best), unit_inv);
        for (std::size_t j = 0; j < M[1].size(); ++j) {
            Row fm = G::mul_entry(f, M[0][j]);
            for (auto& x : fm) x = -x;
            M[1][j] = G::add_entry(M[1][j], fm);
        }
        for (int r = 0; r < 2; ++r) Linv[r][0] = G::add_entry(Linv[r][0], G::mul_entry(f, Linv[r][1]));
        for (const auto& x : M[1]) d2 = std::min(d2, detail::u_valuation(x));
    }
    AdaptedBasis ab;
    ab.big = d2;
    ab.small = d1;
    ab.e1 = UVec::from_ab(K, Linv[0][1], Linv[1][1]);
    ab.e2 = UVec::from_ab(K, Linv[0][0], Linv[1][0]);
    std::vector<UVec> g;
    for (int k = ab.big; k < N; ++k) g.push_back(ab.e1.times_u_power(k));
    for (int k = ab.small; k < N; ++k) g.push_back(ab.e2.times_u_power(k));
    const Subspace check = Subspace::span(K, N, g);
    require(check == W, ErrorKind::internal, "adapted basis does not reproduce the lattice");
    return ab;
}

struct DeformationTrace {
    std::vector<int> s; // s[0..e]
    int k0 = 0;
    int a = 0, b = 0; // Hodge(Λ_{k0})
    AdaptedBasis basis;
    std::vector<UVec> v;                    // v_{k0+n}, n = 0.. (mod u^e)
    std::vector<UVec> w;                    // w_n, n = 1.. (mod u^e)
    std::vector<std::vector<Scalar>> x;     // x[n-1][l] = x_{n,l}
    std::set<int> J;
    std::vector<UVec> v_tilde;              // deformed generators over K(t), mod u^e
    int s_tilde_e = 0;
};

struct HodgeRaise {
    FamilyChain family;
    DeformationTrace trace;
};

inline HodgeRaise hodge_raise(const PRChain& c) {
    const FieldCtx& K = c.field();
    require(K.is_finite(), ErrorKind::invalid_input, "hodge_raise needs a chain over a finite field");
    require(validate(c).ok, ErrorKind::invalid_input, "hodge_raise needs a valid chain");
    const int e = c.e;
    const HodgePair lam = hodge(c.top());
    require(lam != HodgePair{e, 0}, ErrorKind::not_deformable, "hodge " + lam.to_string() + " is already maximal");
    const FieldCtx& L = FieldCtx::rational_t(K);
    const Scalar t = Scalar::t(L);

    DeformationTrace tr;
    tr.s.push_back(0);
    for (int k = 1; k <= e; ++k) tr.s.push_back(nilpotency_index(c.level(k)));
    for (int k = 1; k <= e; ++k) {
        require(tr.s[k] - tr.s[k - 1] == 0 || tr.s[k] - tr.s[k - 1] == 1, ErrorKind::internal, "s_k jumps");
        if (tr.s[k] == tr.s[k - 1]) tr.k0 = k;
    }
    require(tr.k0 >= 2, ErrorKind::internal, "no index with s_k = s_{k-1}");
    const int k0 = tr.k0;
    const Subspace& W = c.level(k0 - 1);
    tr.basis = adapted_basis(W);
    tr.a = tr.basis.big - 1;
    tr.b = tr.basis.small;
    require(hodge(c.level(k0)) == (HodgePair{tr.a, tr.b}), ErrorKind::internal, "Hodge(Λ_k0) mismatch");
    require(tr.b >= 1, ErrorKind::containment_violated, "b = 0 at the first deformed level");

    std::vector<PolyVec> vs{PolyVec::lift(tr.basis.e1, K).times_u_power(tr.a)};
    std::vector<PolyVec> vt{PolyVec::lift(tr.basis.e1, L).times_u_power(tr.a) +
                            t * PolyVec::lift(tr.basis.e2, L).times_u_power(tr.b - 1)};
    require(sum(W, vs[0].reduce(e)) == c.level(k0), ErrorKind::internal, "u^a e1' does not generate Λ_k0 over Λ_{k0-1}");
    tr.v.push_back(vs[0].reduce(e));

    for (int n = 1; k0 + n <= e; ++n) {
        const std::optional<UVec> vn = complement_vector(c.level(k0 + n - 1), c.level(k0 + n));
        require(vn.has_value(), ErrorKind::internal, "missing complement");
        const PolyVec pv = PolyVec::lift(*vn, K);
        std::vector<UVec> gens = W.basis();
        for (const auto& p : vs) gens.push_back(p.reduce(e));
        const auto co = coordinates(gens, vn->times_u());
        require(co.has_value(), ErrorKind::internal, "u v does not lie in the previous level");
        std::vector<Scalar> xs(co->begin() + W.dim(), co->end());
        PolyVec wn = pv.times_u_power(1);
        for (int l = 0; l < n; ++l) wn = wn - xs[static_cast<std::size_t>(l)] * vs[static_cast<std::size_t>(l)];
        require(W.contains(wn.reduce(e)), ErrorKind::internal, "w_n outside Λ_{k0-1}");
        const bool inJ = xs[static_cast<std::size_t>(n - 1)].is_zero();
        if (inJ) tr.J.insert(n);
        PolyVec num(L);
        num = PolyVec::lift(wn.reduce(wn.degree() + 1 > e ? wn.degree() + 1 : e), L);
        for (int l = 0; l < n; ++l)
            num = num + Scalar::constant(L, xs[static_cast<std::size_t>(l)]) * vt[static_cast<std::size_t>(l)];
        if (inJ) num = num + t * vt[static_cast<std::size_t>(n - 1)];
        vt.push_back(num.divided_by_u());
        vs.push_back(pv);
        tr.v.push_back(vn->base_change(K));
        tr.w.push_back(wn.reduce(e));
        tr.x.push_back(xs);
    }

    FamilyChain f;
    f.mode = FamilyMode::exact;
    f.base = &K;
    f.ctx = &L;
    f.e = e;
    f.recipe = "hodge-raise";
    for (int k = 1; k <= e; ++k) {
        std::vector<UVec> g;
        if (k < k0) {
            for (const auto& v : c.level(k).basis()) g.push_back(v.base_change(L));
        } else {
            for (const auto& v : W.basis()) g.push_back(v.base_change(L));
            for (int l = 0; l <= k - k0; ++l) g.push_back(vt[static_cast<std::size_t>(l)].reduce(e));
        }
        f.gens.push_back(std::move(g));
    }
    for (const auto& p : vt) tr.v_tilde.push_back(p.reduce(e));

    require(specialize(f) == c, ErrorKind::internal, "hodge_raise does not specialize to its input");
    const PRChain gen = f.generic();
    const ChainReport r = validate(gen);
    require(r.ok, ErrorKind::internal, "deformed chain invalid at level " + std::to_string(r.level) + ": " + r.reason);
    tr.s_tilde_e = nilpotency_index(gen.top());
    require(tr.s_tilde_e == tr.s[e] + 1, ErrorKind::internal, "generic nilpotency did not rise by one");
    require(hodge(gen.top()) == (HodgePair{lam.a + 1, lam.b - 1}), ErrorKind::internal, "generic hodge is not λ + (1,-1)");
    return {std::move(f), std::move(tr)};
}

// ---------------------------------------------------------------------------------------------
// e = 4 recipes

namespace detail {

inline std::vector<UVec> lifted(const std::vector<UVec>& vs, const FieldCtx& L) {
    std::vector<UVec> r;
    for (const auto& v : vs) r.push_back(v.base_change(L));
    return r;
}

inline FamilyChain family_shell(const PRChain& c, FamilyMode mode, const FieldCtx& L, const std::string& name) {
    FamilyChain f;
    f.mode = mode;
    f.base = &c.field();
    f.ctx = &L;
    f.e = c.e;
    f.recipe = name;
    return f;
}

inline void require_label(const PRChain& c, const HodgePair& lam, const std::set<int>& T, const std::string& what) {
    require(c.e == 4, ErrorKind::precondition, what + " lives at e = 4");
    const StratumLabel L = stratum_label(c);
    require(L.lambda == lam && L.T == T, ErrorKind::precondition,
            what + " needs lambda=" + lam.to_string() + " and T=" + StratumLabel{lam, T, M1::unknown}.T_string() +
                ", got " + L.to_string());
}

} // namespace detail

/// Variant 1 moves ((2,2),{2,3,4}) into ((2,2),{3}); variant 2 moves ((2,2),{3}) into ((3,1),{3}).
inline FamilyChain linear_recipe(const PRChain& c, int variant) {
    require(variant == 1 || variant == 2, ErrorKind::invalid_input, "linear recipe variant must be 1 or 2");
    const FieldCtx& K = c.field();
    const FieldCtx& L = FieldCtx::rational_t(K);
    const Scalar t = Scalar::t(L);
    FamilyChain f = detail::family_shell(c, FamilyMode::exact, L, "linear-" + std::to_string(variant));
    const Subspace E1 = Subspace::u_torsion(K, 4, 1), E2 = Subspace::u_torsion(K, 4, 2);
    if (variant == 1) {
        detail::require_label(c, {2, 2}, {2, 3, 4}, "linear recipe 1");
        const Subspace pre = u_preimage(c.level(1));
        std::optional<UVec> v;
        for (const auto& x : pre.basis())
            if (!E1.contains(x)) {
                v = x;
                break;
            }
        require(v.has_value(), ErrorKind::no_valid_aux_vector, "u^{-1}(omega^(1)) lies inside E[u]");
        const UVec v2 = *complement_vector(c.level(1), c.level(2));
        const auto l1 = detail::lifted(c.level(1).basis(), L);
        f.gens.push_back(l1);
        auto g2 = l1;
        g2.push_back(v2.base_change(L) + t * v->base_change(L));
        f.gens.push_back(g2);
        f.gens.push_back(detail::lifted(pre.basis(), L));
        f.gens.push_back(detail::lifted(E2.basis(), L));
    } else {
        detail::require_label(c, {2, 2}, {3}, "linear recipe 2");
        const Subspace pre = u_preimage(c.level(3));
        std::optional<UVec> v;
        for (const auto& x : pre.basis())
            if (!E2.contains(x)) {
                v = x;
                break;
            }
        require(v.has_value(), ErrorKind::no_valid_aux_vector, "u^{-1}(omega^(3)) lies inside E[u^2]");
        const UVec v4 = *complement_vector(c.level(3), c.level(4));
        for (int i = 1; i <= 3; ++i) f.gens.push_back(detail::lifted(c.level(i).basis(), L));
        auto g4 = detail::lifted(c.level(3).basis(), L);
        g4.push_back(v4.base_change(L) + t * v->base_change(L));
        f.gens.push_back(g4);
    }
    const ChainReport r = validate_family(f);
    require(r.ok, ErrorKind::internal, "linear recipe produced an invalid family: " + r.reason);
    require(specialize(f) == c, ErrorKind::internal, "linear recipe does not specialize to its input");
    return f;
}

/// Trace of the sigma-linear induction: omega^(1) is replaced by F^(1) until it stabilizes.
struct SigmaRecipe {
    FamilyChain family;
    GenericCertificate certificate;
    int steps = 0;
};

namespace detail {

inline UVec normalized_line(const UVec& y) {
    const Subspace W = Subspace::span(y.field(), y.length(), {y});
    require(W.dim() == 1, ErrorKind::degenerate_f, "F^(1) is not a free line");
    return W.basis()[0];
}

inline SigmaRecipe build_sigma(const DieudonneModel& model, const PRChain& c, int variant, int prec) {
    const int e = 4;
    const FieldCtx& K = c.field();
    const FieldCtx& S = FieldCtx::truncated_t(K, prec);
    const Scalar t = Scalar::t(S);
    const DieudonneModel M = model.base_change(S);
    const Subspace E1 = Subspace::u_torsion(S, e, 1), E2 = Subspace::u_torsion(S, e, 2);

    const UVec y0 = c.level(1).basis()[0].base_change(S);
    UVec y = y0;
    int steps = 0;
    for (; steps <= prec; ++steps) {
        require(E1.contains(y), ErrorKind::precondition, "F^(1) left E[u]");
        std::vector<UVec> pre{y.shift_down().shift_down()};
        for (const auto& v : E2.basis()) pre.push_back(v);
        std::optional<UVec> lead;
        std::vector<UVec> ims;
        for (const auto& p : pre) {
            ims.push_back(M.apply(p));
            if (!lead && !ims.back().specialize_at_zero().is_zero()) lead = ims.back();
        }
        require(lead.has_value(), ErrorKind::degenerate_f, "F^(1) vanishes at t = 0");
        const UVec next = normalized_line(*lead);
        const Subspace line = Subspace::span(S, e, {next});
        for (const auto& w : ims) require(line.contains(w), ErrorKind::degenerate_f, "F^(1) is not a line");
        if (next == y) break;
        y = next;
    }
    require(steps <= prec, ErrorKind::internal, "sigma induction did not stabilize");

    const UVec y1 = y.shift_down(), y2 = y1.shift_down();
    const UVec y01 = y0.shift_down(), y02 = y01.shift_down();
    FamilyChain f = family_shell(c, FamilyMode::truncated, S, "sigma-" + std::to_string(variant));
    f.model = model;
    f.gens.push_back({y});
    std::vector<UVec> g3{y1};
    for (const auto& v : E1.basis()) g3.push_back(v);
    const UVec v2 = complement_vector(c.level(1), c.level(2))->base_change(S);
    if (variant == 1) {
        f.gens.push_back({y, v2 + t * y1});
        f.gens.push_back(g3);
        f.gens.push_back(E2.basis());
    } else {
        // v2 = a y0/u + (E[u]-part); the same decomposition with y in place of y0
        const UVec x0 = c.level(1).basis()[0];
        std::vector<UVec> g3_0{x0.shift_down()};
        const Subspace E1k = Subspace::u_torsion(K, e, 1);
        for (const auto& v : E1k.basis()) g3_0.push_back(v);
        const UVec v2k = *complement_vector(c.level(1), c.level(2));
        const auto co0 = coordinates(g3_0, v2k);
        require(co0.has_value(), ErrorKind::internal, "omega^(2) not inside u^{-1}(omega^(1))");
        const UVec v2t = v2 + Scalar::constant(S, (*co0)[0]) * (y1 - y01);
        f.gens.push_back({y, v2t});
        f.gens.push_back(g3);
        const UVec v4k = *complement_vector(c.level(3), c.level(4));
        const auto c4 = coordinates(g3_0, v4k.times_u());
        require(c4.has_value(), ErrorKind::internal, "u v4 outside omega^(3)");
        const UVec v4t = v4k.base_change(S) + Scalar::constant(S, (*c4)[0]) * (y2 - y02) + t * y2;
        auto g4 = g3;
        g4.push_back(v4t);
        f.gens.push_back(g4);
    }
    f.pre = {y2};
    for (const auto& v : E2.basis()) f.pre.push_back(v);
    const ChainReport r = validate_family(f);
    require(r.ok, ErrorKind::internal, "sigma recipe produced an invalid family: " + r.reason);
    require(specialize(f) == c, ErrorKind::internal, "sigma recipe does not specialize to its input");
    return {f, GenericCertificate{}, steps};
}

} // namespace detail

/// Sigma-linear analogues of the linear recipes, keeping omega^(1) = F^(1) along the family.
/// Precision doubles from prec up to 128 until the generic stratum is certified.
inline SigmaRecipe sigma_recipe(const DieudonneModel& model, const PRChain& c, int variant, int prec = 16) {
    require(variant == 1 || variant == 2, ErrorKind::invalid_input, "sigma recipe variant must be 1 or 2");
    require(model.e == 4, ErrorKind::precondition, "sigma recipes live at e = 4");
    require(&model.field() == &c.field(), ErrorKind::mixed_contexts, "model and chain over different fields");
    if (variant == 1)
        detail::require_label(c, {2, 2}, {2, 3, 4}, "sigma recipe 1");
    else
        detail::require_label(c, {2, 2}, {3}, "sigma recipe 2");
    require(m1_vanishes(model, c), ErrorKind::precondition, "sigma recipes need m1 = 0");
    for (int N = prec; N <= 128; N *= 2) {
        SigmaRecipe r = detail::build_sigma(model, c, variant, N);
        r.certificate = generic_label(r.family);
        if (r.certificate.determined) return r;
    }
    fail(ErrorKind::all_minors_vanish, "sigma recipe certificate inconclusive up to precision 128");
}

/// Transport by h = Id + t X with X off-diagonal, moving omega^(1) off F^(1) at first order.
inline FamilyChain invert_m1(const DieudonneModel& model, const PRChain& c, int prec = 16) {
    const FieldCtx& K = c.field();
    require(&model.field() == &K && model.e == c.e, ErrorKind::mixed_contexts, "model and chain differ");
    require(m1_vanishes(model, c), ErrorKind::precondition, "m1 is already nonzero");
    require(prec >= 2, ErrorKind::invalid_input, "precision must be at least 2");
    const int e = c.e;
    const UVec x = c.level(1).basis()[0];
    const bool first = !x.a(e - 1).is_zero();
    auto build = [&](const FieldCtx& L) {
        const auto h = TruncatedGroupElement::elementary(L, e, first ? 1 : 0, first ? 0 : 1, Scalar::t(L), 0);
        FamilyChain f = detail::family_shell(c, L.kind() == FieldKind::rational_t ? FamilyMode::exact : FamilyMode::truncated,
                                             L, "invert-m1");
        f.model = model;
        for (const auto& W : c.levels) {
            std::vector<UVec> g;
            for (const auto& v : W.basis()) g.push_back(h.apply(v.base_change(L)));
            f.gens.push_back(std::move(g));
        }
        const Subspace P = u_preimage(c.level(e - 1));
        for (const auto& v : P.basis()) f.pre.push_back(h.apply(v.base_change(L)));
        return f;
    };
    FamilyChain f = build(FieldCtx::truncated_t(K, prec));
    require(specialize(f) == c, ErrorKind::internal, "m1 inversion does not specialize to its input");
    const StratumLabel lin = stratum_label(c);
    const GenericCertificate g = generic_label(f);
    require(g.determined && g.label.lambda == lin.lambda && g.label.T == lin.T && g.label.m1 == M1::nonzero,
            ErrorKind::internal, "m1 inversion failed to certify m1 != 0 with constant linear invariants");
    const GenericCertificate g2 = generic_label(build(FieldCtx::truncated_t(K, 2)));
    require(g2.label.m1 == M1::nonzero, ErrorKind::internal, "m1 is not already nonzero mod t^2");
    const FamilyChain exact = build(FieldCtx::rational_t(K));
    const GenericCertificate ge = generic_label(exact);
    require(ge.label.lambda == lin.lambda && ge.label.T == lin.T && ge.label.m1 == M1::nonzero, ErrorKind::internal,
            "exact m1 inversion check failed");
    return f;
}

// ---------------------------------------------------------------------------------------------
// Witness search

struct SearchResult {
    std::optional<FamilyChain> family;
    int tried = 0;
    int level = 0; // perturbed level of the family found
};

namespace detail {

/// v_j completes omega^(j-1) to omega^(j); u v_j = sum_{i<j} cu[j-1][i] v_i.
struct AdaptedFlag {
    std::vector<UVec> v;
    std::vector<std::vector<Scalar>> cu;
};

inline AdaptedFlag adapted_flag(const PRChain& c) {
    AdaptedFlag a;
    for (int j = 1; j <= c.e; ++j) a.v.push_back(*complement_vector(c.level(j - 1), c.level(j)));
    a.cu.resize(static_cast<std::size_t>(c.e));
    for (int j = 2; j <= c.e; ++j) {
        const std::vector<UVec> prev(a.v.begin(), a.v.begin() + (j - 1));
        const auto co = coordinates(prev, a.v[static_cast<std::size_t>(j - 1)].times_u());
        require(co.has_value(), ErrorKind::internal, "u v_j outside the previous level");
        a.cu[static_cast<std::size_t>(j - 1)] = *co;
    }
    return a;
}

/// Candidates (k, w) with w in u^{-1}(omega^(k-1)) \ omega^(k), levels from k_min upward,
/// coefficient vectors in code order. fn returns true to stop. Returns the number tried.
template <class Fn>
int for_each_perturbation(const PRChain& c, int k_min, int budget, Fn&& fn) {
    const FieldCtx& K = c.field();
    const auto elems = field_elements(K);
    const std::size_t q = elems.size();
    int tried = 0;
    for (int k = k_min; k <= c.e; ++k) {
        const Subspace pre = u_preimage(c.level(k - 1));
        const std::vector<UVec>& P = pre.basis();
        std::vector<std::size_t> digit(P.size(), 0);
        for (;;) {
            std::size_t i = 0;
            while (i < digit.size() && ++digit[i] == q) digit[i++] = 0;
            if (i == digit.size()) break;
            UVec w(K, c.e);
            for (std::size_t j = 0; j < P.size(); ++j) w = w + elems[digit[j]] * P[j];
            if (c.level(k).contains(w)) continue;
            if (tried >= budget) return tried;
            ++tried;
            if (fn(k, w)) return tried;
        }
    }
    return tried;
}

inline StratumLabel check_target(const PRChain& c, const StratumLabel& target, const std::optional<DieudonneModel>& model) {
    const bool use_m1 = target.m1 != M1::unknown;
    require(!use_m1 || model.has_value(), ErrorKind::invalid_input, "an m1 target needs a Dieudonné model");
    const StratumLabel here = use_m1 ? full_label(*model, c) : stratum_label(c);
    require(target.lambda.sum() == here.lambda.sum() && naive_leq(here, target) && here != target, ErrorKind::invalid_input,
            "target " + target.to_string() + " is not strictly above " + here.to_string());
    return here;
}

} // namespace detail

/// First-order perturbations v_k -> v_k + t w, w in u^{-1}(omega^(k-1)), propagated upward.
/// The target's m1 is compared only when it is not unknown, which needs a model.
inline SearchResult search_witness(const PRChain& c, const StratumLabel& target, int budget = 4096,
                                   const std::optional<DieudonneModel>& model = std::nullopt) {
    const FieldCtx& K = c.field();
    const int e = c.e;
    const bool use_m1 = target.m1 != M1::unknown;
    detail::check_target(c, target, model);
    const FieldCtx& L = FieldCtx::rational_t(K);
    const Scalar t = Scalar::t(L);
    const detail::AdaptedFlag af = detail::adapted_flag(c);

    SearchResult res;
    res.tried = detail::for_each_perturbation(c, 1, budget, [&](int k, const UVec& w) {
        std::vector<UVec> d(static_cast<std::size_t>(e), UVec(K, e));
        d[static_cast<std::size_t>(k - 1)] = w;
        for (int j = k + 1; j <= e; ++j) {
            UVec z(K, e);
            for (int l = 0; l < j - 1; ++l)
                z = z + af.cu[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(l)] * d[static_cast<std::size_t>(l)];
            if (!z.in_u_multiples()) return false;
            d[static_cast<std::size_t>(j - 1)] = z.shift_down();
        }
        FamilyChain f = detail::family_shell(c, FamilyMode::exact, L, "search");
        if (model) f.model = *model;
        std::vector<UVec> g;
        for (int j = 1; j <= e; ++j) {
            g.push_back(af.v[static_cast<std::size_t>(j - 1)].base_change(L) + t * d[static_cast<std::size_t>(j - 1)].base_change(L));
            f.gens.push_back(g);
        }
        if (!validate(f.generic()).ok) return false;
        StratumLabel got;
        try {
            got = generic_label(f).label;
        } catch (const Error& err) {
            if (err.kind() == ErrorKind::degenerate_f) return false;
            throw;
        }
        if (!use_m1) got.m1 = M1::unknown;
        if (got != target) return false;
        res.family = std::move(f);
        res.level = k;
        return true;
    });
    return res;
}

namespace detail {

/// The perturbation (k, w) with omega^(1) pinned to F^(1) order by order; nullopt when a
/// correction leaves u E or F^(1) stops being a line.
inline std::optional<FamilyChain> sigma_pinned_family(const DieudonneModel& model, const PRChain& c, const AdaptedFlag& af,
                                                      int k, const UVec& w, int prec) {
    const int e = c.e;
    const FieldCtx& K = c.field();
    const FieldCtx& S = FieldCtx::truncated_t(K, prec);
    const Scalar t = Scalar::t(S);
    const DieudonneModel M = model.base_change(S);
    auto sc = [&](const Scalar& x) { return Scalar::constant(S, x); };
    const std::vector<UVec> lower(af.v.begin(), af.v.begin() + (k - 1));
    const auto a = coordinates(lower, w.times_u());
    require(a.has_value(), ErrorKind::internal, "perturbation outside u^{-1}(omega^(k-1))");
    const Subspace P = u_preimage(c.level(e - 1));
    std::vector<std::vector<Scalar>> b;
    const std::vector<UVec> below(af.v.begin(), af.v.begin() + (e - 1));
    for (const auto& p : P.basis()) b.push_back(*coordinates(below, p.times_u()));

    std::vector<UVec> vS;
    for (const auto& v : af.v) vS.push_back(v.base_change(S));
    const UVec wS = w.base_change(S);
    UVec y = vS[0];
    std::vector<UVec> delta, pre;
    for (int step = 0;; ++step) {
        if (step > prec + 1) return std::nullopt;
        delta.assign(static_cast<std::size_t>(e), UVec(S, e));
        delta[0] = y - vS[0];
        for (int j = 2; j <= e; ++j) {
            UVec z(S, e);
            for (int i = 0; i < j - 1; ++i) {
                Scalar coef = sc(af.cu[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(i)]);
                if (j == k) coef = coef + t * sc((*a)[static_cast<std::size_t>(i)]);
                z = z + coef * delta[static_cast<std::size_t>(i)];
            }
            if (!z.in_u_multiples()) return std::nullopt;
            delta[static_cast<std::size_t>(j - 1)] = z.shift_down();
            if (j == k) delta[static_cast<std::size_t>(j - 1)] = delta[static_cast<std::size_t>(j - 1)] + t * wS;
        }
        pre.clear();
        for (std::size_t r = 0; r < P.basis().size(); ++r) {
            UVec z(S, e);
            for (int i = 0; i < e - 1; ++i) z = z + sc(b[r][static_cast<std::size_t>(i)]) * delta[static_cast<std::size_t>(i)];
            if (!z.in_u_multiples()) return std::nullopt;
            pre.push_back(P.basis()[r].base_change(S) + z.shift_down());
        }
        std::optional<UVec> lead;
        std::vector<UVec> ims;
        for (const auto& p : pre) {
            ims.push_back(M.apply(p));
            if (!lead && !ims.back().specialize_at_zero().is_zero()) lead = ims.back();
        }
        if (!lead) return std::nullopt;
        const UVec next = normalized_line(*lead);
        const Subspace line = Subspace::span(S, e, {next});
        for (const auto& im : ims)
            if (!line.contains(im)) return std::nullopt;
        if (next == y) break;
        y = next;
    }
    FamilyChain f = family_shell(c, FamilyMode::truncated, S, "sigma-search");
    f.model = model;
    std::vector<UVec> g;
    for (int j = 1; j <= e; ++j) {
        g.push_back(vS[static_cast<std::size_t>(j - 1)] + delta[static_cast<std::size_t>(j - 1)]);
        f.gens.push_back(g);
    }
    f.pre = pre;
    if (!validate_family(f).ok) return std::nullopt;
    return f;
}

} // namespace detail

/// As search_witness for targets with m1 = 0, in truncated mode: each candidate is corrected
/// so that omega^(1) = F^(1) holds to precision prec (doubling up to 128 when inconclusive).
inline SearchResult sigma_search_witness(const DieudonneModel& model, const PRChain& c, const StratumLabel& target,
                                         int budget = 4096, int prec = 16) {
    require(target.m1 == M1::zero, ErrorKind::invalid_input, "sigma search keeps m1 = 0");
    require(&model.field() == &c.field() && model.e == c.e, ErrorKind::mixed_contexts, "model and chain differ");
    const StratumLabel here = detail::check_target(c, target, model);
    require(here.m1 == M1::zero, ErrorKind::precondition, "sigma search starts from a point with m1 = 0");
    const detail::AdaptedFlag af = detail::adapted_flag(c);
    SearchResult res;
    res.tried = detail::for_each_perturbation(c, 2, budget, [&](int k, const UVec& w) {
        for (int N = prec; N <= 128; N *= 2) {
            std::optional<FamilyChain> f = detail::sigma_pinned_family(model, c, af, k, w, N);
            if (!f) return false;
            GenericCertificate g;
            try {
                g = generic_label(*f);
            } catch (const Error& err) {
                if (err.kind() == ErrorKind::degenerate_f) return false;
                throw;
            }
            if (!g.determined) continue;
            if (g.label != target) return false;
            res.family = std::move(*f);
            res.level = k;
            return true;
        }
        return false;
    });
    return res;
}

} // namespace prc
