#pragma once

// Pappas-Rapoport chains in E_e, their enumeration, the convolution
// presentation, the GL_2(K[u]/(u^e)) action, orbits and fibers.

#include <array>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "umodule.hpp"

namespace prc {

/// The zero subspace of E_N, shared per (context, N).
inline const Subspace& zero_level(const FieldCtx& K, int N) {
    static std::mutex mu;
    static std::map<std::pair<const FieldCtx*, int>, std::unique_ptr<Subspace>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{&K, N}];
    if (!slot) slot = std::make_unique<Subspace>(Subspace::zero(K, N));
    return *slot;
}

/// omega^(1) ⊂ ... ⊂ omega^(e) inside E_e; levels[i-1] holds omega^(i).
struct PRChain {
    int e = 0;
    const FieldCtx* ctx = nullptr;
    std::vector<Subspace> levels;

    const FieldCtx& field() const { return *ctx; }
    /// omega^(i) for 0 <= i <= e, with omega^(0) = 0.
    const Subspace& level(int i) const {
        require(i >= 0 && i <= static_cast<int>(levels.size()), ErrorKind::invalid_input,
                "level index " + std::to_string(i) + " out of range");
        return i == 0 ? zero_level(*ctx, e) : levels[i - 1];
    }
    const Subspace& top() const { return levels.back(); }
    std::string key() const {
        std::string k;
        for (const auto& W : levels) k += W.key();
        return k;
    }
    friend bool operator==(const PRChain& a, const PRChain& b) {
        return a.e == b.e && a.ctx == b.ctx && a.levels == b.levels;
    }
    std::string to_string() const {
        std::string s;
        for (std::size_t i = 0; i < levels.size(); ++i)
            s += "w" + std::to_string(i + 1) + "=" + levels[i].to_string() + (i + 1 < levels.size() ? " " : "");
        return s;
    }
};

struct ChainReport {
    bool ok = true;
    int level = 0;
    std::string reason;
};

inline ChainReport validate(const PRChain& c) {
    if (c.e < 1 || !c.ctx) return {false, 0, "chain needs e >= 1 and a context"};
    for (int i = 1; i <= static_cast<int>(c.levels.size()); ++i) {
        const Subspace& W = c.levels[i - 1];
        if (&W.field() != c.ctx || W.length() != c.e)
            return {false, i, "level lives in a different module"};
        if (W.dim() != i)
            return {false, i, "dimension " + std::to_string(W.dim()) + " instead of " + std::to_string(i)};
        const Subspace prev = c.level(i - 1);
        if (!contains(W, prev)) return {false, i, "does not contain the previous level"};
        if (!contains(prev, u_image(W))) return {false, i, "u maps it outside the previous level"};
    }
    if (static_cast<int>(c.levels.size()) != c.e)
        return {false, static_cast<int>(c.levels.size()) + 1, "missing level"};
    return {};
}

inline PRChain make_chain(const FieldCtx& K, int e, std::vector<Subspace> levels) {
    PRChain c{e, &K, std::move(levels)};
    const ChainReport r = validate(c);
    require(r.ok, ErrorKind::invalid_input, "invalid chain at level " + std::to_string(r.level) + ": " + r.reason);
    return c;
}

/// Chain from per-level generators, each level spanned by its own list.
inline PRChain chain_from_generators(const FieldCtx& K, int e, const std::vector<std::vector<UVec>>& gens) {
    std::vector<Subspace> levels;
    for (const auto& g : gens) levels.push_back(Subspace::span(K, e, g));
    return make_chain(K, e, std::move(levels));
}

/// omega^(i) = <u^{e-1} e1, ..., u^{e-i} e1>.
inline PRChain standard_free_chain(const FieldCtx& K, int e) {
    std::vector<Subspace> levels;
    std::vector<UVec> g;
    for (int i = 1; i <= e; ++i) {
        g.push_back(UVec::monomial(K, e, 0, e - i));
        levels.push_back(Subspace::span(K, e, g));
    }
    return make_chain(K, e, std::move(levels));
}

namespace detail {

// Representatives of the lines in big / small (big ⊇ small, quotient of dim 2).
inline std::vector<UVec> projective_line(const Subspace& small, const Subspace& big) {
    std::vector<UVec> q;
    Subspace acc = small;
    for (const auto& v : big.basis()) {
        if (acc.contains(v)) continue;
        q.push_back(v);
        acc = sum(acc, v);
    }
    require(q.size() == 2, ErrorKind::internal, "quotient is not a plane");
    std::vector<UVec> lines;
    for (const auto& a : field_elements(small.field(), FieldCtx::max_table_order)) lines.push_back(q[0] + a * q[1]);
    lines.push_back(q[1]);
    return lines;
}

inline long checked_power(long base, int exp, long bound) {
    long r = 1;
    for (int i = 0; i < exp; ++i) {
        r *= base;
        if (r > bound) return bound + 1;
    }
    return r;
}

} // namespace detail

/// All chains over a finite field, sorted by canonical serialization.
inline std::vector<PRChain> enumerate_chains(int e, const FieldCtx& K, long bound = 1000000) {
    require(K.is_finite(), ErrorKind::invalid_input, "enumeration needs a finite field");
    require(e >= 1, ErrorKind::invalid_input, "e must be positive");
    const long expected = detail::checked_power(K.q() + 1, e, bound);
    require(expected <= bound, ErrorKind::bound_exceeded,
            "(q+1)^e exceeds the enumeration bound " + std::to_string(bound));
    std::vector<PRChain> out;
    out.reserve(static_cast<std::size_t>(expected));
    std::vector<Subspace> stack;
    stack.reserve(static_cast<std::size_t>(e));
    std::function<void(const Subspace&)> rec = [&](const Subspace& prev) {
        if (static_cast<int>(stack.size()) == e) {
            out.push_back(PRChain{e, &K, stack});
            return;
        }
        const Subspace pre = u_preimage(prev);
        for (const auto& v : detail::projective_line(prev, pre)) {
            stack.push_back(sum(prev, v));
            rec(stack.back());
            stack.pop_back();
        }
    };
    rec(Subspace::zero(K, e));
    std::sort(out.begin(), out.end(), [](const PRChain& a, const PRChain& b) { return a.key() < b.key(); });
    return out;
}

/// The convolution presentation Lambda'_i = u^{-(e-i)} omega^(i), i = 1..e.
struct ConvChain {
    int e = 0;
    const FieldCtx* ctx = nullptr;
    std::vector<Subspace> levels;
    friend bool operator==(const ConvChain& a, const ConvChain& b) {
        return a.e == b.e && a.ctx == b.ctx && a.levels == b.levels;
    }
};

inline ChainReport validate(const ConvChain& cc) {
    Subspace prev = Subspace::whole(*cc.ctx, cc.e);
    for (int i = 1; i <= cc.e; ++i) {
        const Subspace& L = cc.levels.at(i - 1);
        if (L.dim() != 2 * cc.e - i) return {false, i, "wrong dimension"};
        if (!contains(prev, L)) return {false, i, "not contained in the previous lattice"};
        if (!contains(L, u_image(prev))) return {false, i, "does not contain u times the previous lattice"};
        prev = L;
    }
    return {};
}

inline ConvChain conv_normalize(const PRChain& c) {
    const ChainReport r = validate(c);
    require(r.ok, ErrorKind::invalid_input, "invalid chain: " + r.reason);
    ConvChain cc{c.e, c.ctx, {}};
    for (int i = 1; i <= c.e; ++i) cc.levels.push_back(u_power_preimage(c.levels[i - 1], c.e - i));
    return cc;
}

inline PRChain conv_denormalize(const ConvChain& cc) {
    const ChainReport r = validate(cc);
    require(r.ok, ErrorKind::invalid_input, "invalid convolution chain: " + r.reason);
    PRChain c{cc.e, cc.ctx, {}};
    for (int i = 1; i <= cc.e; ++i) c.levels.push_back(u_power_image(cc.levels[i - 1], cc.e - i));
    return c;
}

/// A 2x2 matrix over K[u]/(u^e) with unit determinant; entries are u-coefficient rows of length e.
class TruncatedGroupElement {
public:
    using Entry = Row;

    TruncatedGroupElement(const FieldCtx& K, int e, std::array<std::array<Entry, 2>, 2> m)
        : ctx_(&K), e_(e), m_(std::move(m)) {
        for (auto& r : m_)
            for (auto& x : r) {
                require(static_cast<int>(x.size()) <= e, ErrorKind::invalid_input, "entry longer than e");
                x.resize(e, Scalar::zero(K));
            }
        const Scalar d0 = m_[0][0][0] * m_[1][1][0] - m_[0][1][0] * m_[1][0][0];
        require(!d0.is_zero(), ErrorKind::invalid_input, "group element is not invertible");
    }

    static Entry constant_entry(const FieldCtx& K, int e, const Scalar& c) {
        Entry x(e, Scalar::zero(K));
        x[0] = c;
        return x;
    }
    static TruncatedGroupElement identity(const FieldCtx& K, int e) {
        const Entry one = constant_entry(K, e, Scalar::one(K)), zero(e, Scalar::zero(K));
        return TruncatedGroupElement(K, e, {{{one, zero}, {zero, one}}});
    }
    /// Id + c u^k E_{ij}, i != j.
    static TruncatedGroupElement elementary(const FieldCtx& K, int e, int i, int j, const Scalar& c, int k) {
        require(i != j, ErrorKind::invalid_input, "elementary matrix needs i != j");
        auto g = identity(K, e).m_;
        Entry x(e, Scalar::zero(K));
        if (k < e) x[k] = c;
        g[i][j] = x;
        return TruncatedGroupElement(K, e, g);
    }
    static TruncatedGroupElement diagonal(const FieldCtx& K, int e, const Entry& d1, const Entry& d2) {
        const Entry zero(e, Scalar::zero(K));
        return TruncatedGroupElement(K, e, {{{d1, zero}, {zero, d2}}});
    }

    const FieldCtx& field() const { return *ctx_; }
    int e() const { return e_; }
    const Entry& entry(int i, int j) const { return m_[i][j]; }

    static Entry mul_entry(const Entry& x, const Entry& y) {
        const int e = static_cast<int>(x.size());
        Entry r(e, Scalar::zero(x[0].field()));
        for (int i = 0; i < e; ++i) {
            if (x[i].is_zero()) continue;
            for (int j = 0; i + j < e; ++j) r[i + j] = r[i + j] + x[i] * y[j];
        }
        return r;
    }
    static Entry add_entry(const Entry& x, const Entry& y) {
        Entry r = x;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = x[i] + y[i];
        return r;
    }

    UVec apply(const UVec& v) const {
        require(&v.field() == ctx_ && v.length() == e_, ErrorKind::mixed_contexts, "vector from another module");
        const Entry a(v.entries().begin(), v.entries().begin() + e_);
        const Entry b(v.entries().begin() + e_, v.entries().end());
        return UVec::from_ab(*ctx_, add_entry(mul_entry(m_[0][0], a), mul_entry(m_[0][1], b)),
                             add_entry(mul_entry(m_[1][0], a), mul_entry(m_[1][1], b)));
    }

    friend TruncatedGroupElement operator*(const TruncatedGroupElement& g, const TruncatedGroupElement& h) {
        require(g.ctx_ == h.ctx_ && g.e_ == h.e_, ErrorKind::mixed_contexts, "group elements of different rings");
        std::array<std::array<Entry, 2>, 2> r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                r[i][j] = add_entry(mul_entry(g.m_[i][0], h.m_[0][j]), mul_entry(g.m_[i][1], h.m_[1][j]));
        return TruncatedGroupElement(*g.ctx_, g.e_, r);
    }

private:
    const FieldCtx* ctx_;
    int e_;
    std::array<std::array<Entry, 2>, 2> m_;
};

inline Subspace act(const TruncatedGroupElement& g, const Subspace& W) {
    std::vector<UVec> vs;
    for (const auto& v : W.basis()) vs.push_back(g.apply(v));
    return Subspace::span(W.field(), W.length(), vs);
}

inline PRChain act(const TruncatedGroupElement& g, const PRChain& c) {
    require(&g.field() == c.ctx && g.e() == c.e, ErrorKind::mixed_contexts, "group element and chain differ");
    PRChain r{c.e, c.ctx, {}};
    for (const auto& W : c.levels) r.levels.push_back(act(g, W));
    return r;
}

/// |GL_2(F_q)| q^{4(e-1)}.
inline std::uint64_t truncated_group_order(int q, int e) {
    std::uint64_t Q = static_cast<std::uint64_t>(q);
    std::uint64_t r = (Q * Q - 1) * (Q * Q - Q);
    for (int i = 0; i < 4 * (e - 1); ++i) r *= Q;
    return r;
}

/// Elementary matrices over an F_p-basis of K at every u-degree, a primitive diagonal unit
/// and the diagonal u-shears 1 + c u^k.
inline std::vector<TruncatedGroupElement> group_generators(const FieldCtx& K, int e) {
    std::vector<TruncatedGroupElement> gens;
    std::vector<Scalar> basis;
    std::uint32_t code = 1;
    for (int i = 0; i < K.f(); ++i) {
        basis.push_back(Scalar::constant(K, code));
        code *= static_cast<std::uint32_t>(K.p());
    }
    for (int k = 0; k < e; ++k)
        for (const auto& c : basis) {
            gens.push_back(TruncatedGroupElement::elementary(K, e, 0, 1, c, k));
            gens.push_back(TruncatedGroupElement::elementary(K, e, 1, 0, c, k));
        }
    const auto one = TruncatedGroupElement::constant_entry(K, e, Scalar::one(K));
    gens.push_back(
        TruncatedGroupElement::diagonal(K, e, TruncatedGroupElement::constant_entry(K, e, primitive_element(K)), one));
    for (int k = 1; k < e; ++k)
        for (const auto& c : basis) {
            auto d = one;
            d[k] = c;
            gens.push_back(TruncatedGroupElement::diagonal(K, e, d, one));
        }
    return gens;
}

struct OrbitClass {
    PRChain representative;
    std::size_t size = 0;
    std::vector<std::size_t> members; // indices into the enumeration
};

/// Orbits of GL_2(K[u]/(u^e)) on the chains, by closure under generators.
inline std::vector<OrbitClass> orbits(int e, const FieldCtx& K, long bound = 1000000) {
    const auto chains = enumerate_chains(e, K, bound);
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(chains.size() * 2);
    for (std::size_t i = 0; i < chains.size(); ++i) index.emplace(chains[i].key(), i);
    std::vector<std::size_t> parent(chains.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    const auto gens = group_generators(K, e);
    for (std::size_t i = 0; i < chains.size(); ++i)
        for (const auto& g : gens) {
            auto it = index.find(act(g, chains[i]).key());
            require(it != index.end(), ErrorKind::internal, "group image is not an enumerated chain");
            std::size_t a = find(i), b = find(it->second);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    std::map<std::size_t, OrbitClass> classes;
    for (std::size_t i = 0; i < chains.size(); ++i) {
        auto& oc = classes[find(i)];
        if (oc.members.empty()) oc.representative = chains[i];
        oc.members.push_back(i);
        ++oc.size;
    }
    std::vector<OrbitClass> out;
    for (auto& kv : classes) out.push_back(std::move(kv.second));
    return out;
}

/// All chains with omega^(e) = W, by downward recursion through hyperplanes containing u * level.
inline std::vector<PRChain> fiber_chains(const Subspace& W, int e) {
    const FieldCtx& K = W.field();
    require(W.length() == e && W.dim() == e, ErrorKind::invalid_input, "fiber needs a dimension-e subspace of E_e");
    require(is_u_stable(W), ErrorKind::not_u_stable, "fiber base is not u-stable");
    std::vector<PRChain> out;
    std::vector<Subspace> levels(e);
    levels[e - 1] = W;
    std::function<void(int)> rec = [&](int i) { // levels[i-1] filled, choose omega^(i-1)
        if (i == 1) {
            if (u_image(levels[0]).dim() == 0) out.push_back(PRChain{e, &K, levels});
            return;
        }
        const Subspace& Wi = levels[i - 1];
        const Subspace U = u_image(Wi);
        std::vector<UVec> comp;
        Subspace acc = U;
        for (const auto& v : Wi.basis()) {
            if (acc.contains(v)) continue;
            comp.push_back(v);
            acc = sum(acc, v);
        }
        std::vector<Subspace> hyper;
        if (comp.size() == 1) {
            hyper.push_back(U);
        } else {
            require(comp.size() == 2, ErrorKind::internal, "more than two u-blocks");
            for (const auto& a : field_elements(K, FieldCtx::max_table_order)) hyper.push_back(sum(U, comp[0] + a * comp[1]));
            hyper.push_back(sum(U, comp[1]));
        }
        for (auto& H : hyper) {
            if (H.dim() != i - 1) continue;
            levels[i - 2] = H;
            rec(i - 1);
        }
    };
    rec(e);
    std::sort(out.begin(), out.end(), [](const PRChain& a, const PRChain& b) { return a.key() < b.key(); });
    return out;
}

/// Distinct tops omega^(e) of the given chains, sorted canonically.
inline std::vector<Subspace> lattice_tops(const std::vector<PRChain>& chains) {
    std::map<std::string, Subspace> tops;
    for (const auto& c : chains) tops.emplace(c.top().key(), c.top());
    std::vector<Subspace> out;
    for (auto& kv : tops) out.push_back(kv.second);
    return out;
}

inline std::ostream& operator<<(std::ostream& os, const PRChain& c) { return os << c.to_string(); }

} // namespace prc
