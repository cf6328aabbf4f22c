#pragma once

// Linear invariants of subspaces and chains: u-block partitions, Hodge pairs,
// nilpotency, vanishing of the partial Hasse invariants m_i (i >= 2), labels
// and the admissible poset.

#include <optional>
#include <regex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "chains.hpp"

namespace prc {

struct HodgePair {
    int a = 0;
    int b = 0;
    int sum() const { return a + b; }
    friend bool operator==(const HodgePair& x, const HodgePair& y) { return x.a == y.a && x.b == y.b; }
    friend bool operator!=(const HodgePair& x, const HodgePair& y) { return !(x == y); }
    /// Lexicographic, for use as a map key only; see dominance_leq for the order.
    friend bool operator<(const HodgePair& x, const HodgePair& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); }
    std::string to_string() const { return "(" + std::to_string(a) + "," + std::to_string(b) + ")"; }
};

/// x <= y in dominance order; pairs of different sums are incomparable and rejected.
inline bool dominance_leq(const HodgePair& x, const HodgePair& y) {
    require(x.sum() == y.sum(), ErrorKind::invalid_input,
            "dominance between " + x.to_string() + " and " + y.to_string() + " of different sums");
    return x.a <= y.a;
}

/// Cyclic u-block sizes of big/small, descending.
inline std::vector<int> block_partition(const Subspace& small, const Subspace& big) {
    require(contains(big, small), ErrorKind::invalid_input, "block_partition needs small ⊆ big");
    require(is_u_stable(small) && is_u_stable(big), ErrorKind::not_u_stable, "block_partition needs u-stable inputs");
    // d_k = dim (u^k big + small) / small
    std::vector<int> d;
    Subspace img = big;
    for (;;) {
        const int dk = sum(img, small).dim() - small.dim();
        d.push_back(dk);
        if (dk == 0) break;
        img = u_image(img);
    }
    // r_k = #{blocks of size > k}; sizes are the conjugate partition.
    std::vector<int> r;
    for (std::size_t k = 0; k + 1 < d.size(); ++k) r.push_back(d[k] - d[k + 1]);
    std::vector<int> parts;
    for (int j = 1; !r.empty() && j <= r[0]; ++j) {
        int c = 0;
        for (int x : r)
            if (x >= j) ++c;
        parts.push_back(c);
    }
    return parts;
}

inline int nilpotency_index(const Subspace& W) {
    require(is_u_stable(W), ErrorKind::not_u_stable, "nilpotency index needs a u-stable subspace");
    int s = 0;
    Subspace img = W;
    while (img.dim() > 0) {
        img = u_image(img);
        ++s;
    }
    return s;
}

/// (N - c2, N - c1) from the block partition [c1 >= c2] of W.
inline HodgePair hodge(const Subspace& W) {
    require(is_u_stable(W), ErrorKind::not_u_stable, "hodge needs a u-stable subspace");
    const int N = W.length();
    auto blocks = block_partition(Subspace::zero(W.field(), N), W);
    require(blocks.size() <= 2, ErrorKind::internal, "more than two u-blocks in E_N");
    blocks.resize(2, 0);
    const HodgePair h{N - blocks[1], N - blocks[0]};
    Subspace img = W;
    for (int k = 0; k <= N; ++k) {
        const int expect = std::max(N - h.a - k, 0) + std::max(N - h.b - k, 0);
        require(img.dim() == expect, ErrorKind::internal, "hodge postcondition failed");
        img = u_image(img);
    }
    return h;
}

inline bool mi_vanishes(const PRChain& c, int i) {
    require(i >= 2 && i <= c.e, ErrorKind::invalid_input, "m_i index must lie in 2..e");
    return contains(c.level(i - 2), u_image(c.level(i)));
}

enum class M1 { zero, nonzero, unknown };

inline const char* m1_token(M1 m) { return m == M1::zero ? "0" : m == M1::nonzero ? "1" : "?"; }

struct StratumLabel {
    HodgePair lambda;
    std::set<int> T;
    M1 m1 = M1::unknown;

    std::string T_string() const {
        std::string s = "{";
        bool first = true;
        for (int i : T) {
            if (!first) s += ",";
            s += std::to_string(i);
            first = false;
        }
        return s + "}";
    }
    std::string to_string() const {
        return "lambda=" + lambda.to_string() + ";T=" + T_string() + ";m1=" + m1_token(m1);
    }
    /// Vanishing set including index 1 when m1 vanishes.
    std::set<int> full_T() const {
        std::set<int> s = T;
        if (m1 == M1::zero) s.insert(1);
        return s;
    }
    friend bool operator==(const StratumLabel& x, const StratumLabel& y) {
        return x.lambda == y.lambda && x.T == y.T && x.m1 == y.m1;
    }
    friend bool operator!=(const StratumLabel& x, const StratumLabel& y) { return !(x == y); }
    friend bool operator<(const StratumLabel& x, const StratumLabel& y) {
        return std::tie(x.lambda, x.T, x.m1) < std::tie(y.lambda, y.T, y.m1);
    }

    /// Parses "lambda=(i,j);T={...}" with an optional ";m1=0|1|?".
    static StratumLabel parse(const std::string& s) {
        static const std::regex re(R"(\s*lambda=\((\d+),(\d+)\)\s*;\s*T=\{([0-9,\s]*)\}\s*(?:;\s*m1=([01?])\s*)?)");
        std::smatch m;
        require(std::regex_match(s, m, re), ErrorKind::invalid_input, "cannot parse label '" + s + "'");
        StratumLabel L;
        L.lambda = {std::stoi(m[1]), std::stoi(m[2])};
        require(L.lambda.a >= L.lambda.b, ErrorKind::invalid_input, "Hodge pair must satisfy a >= b");
        const std::string ts = m[3];
        std::size_t pos = 0;
        while (pos < ts.size()) {
            const std::size_t comma = ts.find(',', pos);
            std::string tok = ts.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            tok.erase(0, tok.find_first_not_of(" \t"));
            if (!tok.empty()) L.T.insert(std::stoi(tok));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (m[4].matched) {
            const std::string t = m[4];
            L.m1 = t == "0" ? M1::zero : t == "1" ? M1::nonzero : M1::unknown;
        }
        return L;
    }
};

/// lower <= upper in the naive order: lambda <= lambda', T ⊇ T' (m1 = 0 counts as index 1).
inline bool naive_leq(const StratumLabel& lower, const StratumLabel& upper) {
    if (!dominance_leq(lower.lambda, upper.lambda)) return false;
    const auto lo = lower.full_T(), up = upper.full_T();
    for (int i : up)
        if (!lo.count(i)) return false;
    return true;
}

inline bool is_free_rank_one(const Subspace& W) {
    auto blocks = block_partition(Subspace::zero(W.field(), W.length()), W);
    return blocks.size() == 1 && blocks[0] == W.length();
}

/// (hodge omega^(e), {i >= 2 : m_i vanishes}); m1 left unknown.
inline StratumLabel stratum_label(const PRChain& c) {
    StratumLabel L;
    L.lambda = hodge(c.top());
    for (int i = 2; i <= c.e; ++i)
        if (mi_vanishes(c, i)) L.T.insert(i);
    const bool top = L.lambda == HodgePair{c.e, 0};
    require(top == L.T.empty(), ErrorKind::internal, "maximal Hodge pair must coincide with empty vanishing set");
    return L;
}

/// Orbit signature: hodge of omega^(e), hodge of omega^(e-1), blocks of omega^(e)/omega^(1).
struct ChainSignature {
    HodgePair top, below;
    std::vector<int> blocks;
    friend bool operator<(const ChainSignature& x, const ChainSignature& y) {
        return std::tie(x.top, x.below, x.blocks) < std::tie(y.top, y.below, y.blocks);
    }
    friend bool operator==(const ChainSignature& x, const ChainSignature& y) {
        return x.top == y.top && x.below == y.below && x.blocks == y.blocks;
    }
};

inline ChainSignature chain_signature(const PRChain& c) {
    require(c.e >= 2, ErrorKind::invalid_input, "signature needs e >= 2");
    return {hodge(c.top()), hodge(c.level(c.e - 1)), block_partition(c.level(1), c.top())};
}

/// {(i, e-i) : ceil(e/2) <= i <= e}, ascending.
struct AdmPoset {
    int e = 0;
    std::vector<HodgePair> elements;

    static int dim_gr(const HodgePair& l) { return l.a - l.b; }
    static int dim_X(const HodgePair& l) { return (l.sum() + l.a - l.b) / 2; }
    static int dim_fiber(const HodgePair& l) { return (l.sum() - l.a + l.b) / 2; }
    bool leq(const HodgePair& x, const HodgePair& y) const { return dominance_leq(x, y); }
};

inline AdmPoset adm_poset(int e) {
    require(e >= 1, ErrorKind::invalid_input, "e must be positive");
    AdmPoset P{e, {}};
    for (int i = (e + 1) / 2; i <= e; ++i) P.elements.push_back({i, e - i});
    return P;
}

struct ProductPoset {
    std::vector<AdmPoset> factors;
    std::vector<std::vector<HodgePair>> elements;

    bool leq(const std::vector<HodgePair>& x, const std::vector<HodgePair>& y) const {
        for (std::size_t k = 0; k < factors.size(); ++k)
            if (!dominance_leq(x[k], y[k])) return false;
        return true;
    }
    int dim_X(const std::vector<HodgePair>& x) const {
        int d = 0;
        for (const auto& l : x) d += AdmPoset::dim_X(l);
        return d;
    }
    int dim_gr(const std::vector<HodgePair>& x) const {
        int d = 0;
        for (const auto& l : x) d += AdmPoset::dim_gr(l);
        return d;
    }
};

inline ProductPoset product_poset(const std::vector<AdmPoset>& factors) {
    ProductPoset P{factors, {{}}};
    for (const auto& f : factors) {
        std::vector<std::vector<HodgePair>> next;
        for (const auto& prefix : P.elements)
            for (const auto& l : f.elements) {
                auto t = prefix;
                t.push_back(l);
                next.push_back(std::move(t));
            }
        P.elements = std::move(next);
    }
    return P;
}

} // namespace prc
