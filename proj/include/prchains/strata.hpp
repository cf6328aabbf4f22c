#pragma once

// Censuses of chains by stratum, exact degree fitting of point counts, fiber
// constancy, the witness-certified stratification poset and products.

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "deformation.hpp"
#include "parallel.hpp"

namespace prc {

using Rational = boost::multiprecision::cpp_rational;

struct Census {
    int e = 0;
    const FieldCtx* ctx = nullptr;
    std::map<StratumLabel, long> counts;
    long total = 0;

    int q() const { return ctx ? ctx->q() : 0; }
    /// Nonempty vanishing sets per Hodge pair.
    std::map<HodgePair, std::set<std::set<int>>> nonempty_T() const {
        std::map<HodgePair, std::set<std::set<int>>> r;
        for (const auto& [L, n] : counts)
            if (n > 0) r[L.lambda].insert(L.T);
        return r;
    }
    std::set<StratumLabel> labels() const {
        std::set<StratumLabel> s;
        for (const auto& [L, n] : counts)
            if (n > 0) s.insert(L);
        return s;
    }
    long count_lambda(const HodgePair& l) const {
        long n = 0;
        for (const auto& [L, c] : counts)
            if (L.lambda == l) n += c;
        return n;
    }
    long count_T(const std::set<int>& T) const {
        long n = 0;
        for (const auto& [L, c] : counts)
            if (L.T == T) n += c;
        return n;
    }
};

inline Census census_of(int e, const FieldCtx& K, const std::vector<PRChain>& chains, int jobs = 1) {
    std::vector<StratumLabel> labels(chains.size());
    parallel_for(chains.size(), jobs, [&](std::size_t i) { labels[i] = stratum_label(chains[i]); });
    Census c;
    c.e = e;
    c.ctx = &K;
    for (const auto& L : labels) ++c.counts[L];
    c.total = static_cast<long>(chains.size());
    for (const auto& [L, n] : c.counts)
        require(L.lambda != HodgePair{e, 0} || L.T.empty(), ErrorKind::internal, "maximal stratum with vanishing m_i");
    return c;
}

inline Census census(int e, const FieldCtx& K, int jobs = 1, long bound = 1000000) {
    require(K.is_finite(), ErrorKind::invalid_input, "census needs a finite field");
    return census_of(e, K, enumerate_chains(e, K, bound), jobs);
}

/// Number of lattices (tops of chains) per Hodge pair.
inline std::map<HodgePair, long> lattice_counts(const std::vector<PRChain>& chains) {
    std::map<HodgePair, long> r;
    for (const auto& W : lattice_tops(chains)) ++r[hodge(W)];
    return r;
}

// ---------------------------------------------------------------------------------------------
// Degree fitting

struct DegreeFit {
    std::vector<Rational> coeffs; // lowest degree first
    int degree = -1;              // -1 for the zero polynomial
    bool extra_roots = false;     // dropping a sample changes the interpolant
    std::vector<int> qs;

    Rational eval(const Rational& x) const {
        Rational r = 0;
        for (std::size_t i = coeffs.size(); i-- > 0;) r = r * x + coeffs[i];
        return r;
    }
    std::string to_string() const {
        std::string s;
        for (std::size_t i = coeffs.size(); i-- > 0;) {
            if (coeffs[i] == 0) continue;
            std::string c = coeffs[i].str();
            if (!s.empty()) s += c[0] == '-' ? " - " : " + ";
            else if (c[0] == '-') s += "-";
            if (c[0] == '-') c.erase(0, 1);
            if (i == 0 || c != "1") s += c;
            if (i > 0) s += (i == 0 || c != "1" ? "*" : "") + std::string("q") + (i > 1 ? "^" + std::to_string(i) : "");
        }
        return s.empty() ? "0" : s;
    }
};

namespace detail {

/// Interpolating polynomial through (x_i, y_i), lowest degree first, via Newton divided differences.
inline std::vector<Rational> interpolate(const std::vector<Rational>& xs, const std::vector<Rational>& ys) {
    const std::size_t n = xs.size();
    std::vector<Rational> dd = ys;
    for (std::size_t j = 1; j < n; ++j)
        for (std::size_t i = n - 1; i >= j; --i) {
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - j]);
            if (i == j) break;
        }
    std::vector<Rational> poly{dd[n - 1]};
    for (std::size_t k = n - 1; k-- > 0;) {
        // poly = poly * (x - xs[k]) + dd[k]
        std::vector<Rational> next(poly.size() + 1, Rational(0));
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i + 1] += poly[i];
            next[i] -= poly[i] * xs[k];
        }
        next[0] += dd[k];
        poly = std::move(next);
    }
    while (!poly.empty() && poly.back() == 0) poly.pop_back();
    return poly;
}

} // namespace detail

inline DegreeFit degree_fit(const std::map<int, long>& counts) {
    require(counts.size() >= 2, ErrorKind::invalid_input, "degree fitting needs at least two sample points");
    std::vector<Rational> xs, ys;
    DegreeFit f;
    for (const auto& [q, n] : counts) {
        xs.emplace_back(q);
        ys.emplace_back(n);
        f.qs.push_back(q);
    }
    f.coeffs = detail::interpolate(xs, ys);
    f.degree = static_cast<int>(f.coeffs.size()) - 1;
    for (std::size_t drop = 0; drop < xs.size(); ++drop) {
        std::vector<Rational> x2, y2;
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (i != drop) {
                x2.push_back(xs[i]);
                y2.push_back(ys[i]);
            }
        if (detail::interpolate(x2, y2) != f.coeffs) f.extra_roots = true;
    }
    return f;
}

// ---------------------------------------------------------------------------------------------
// Fibers of the convolution map

struct FiberReport {
    int e = 0;
    int q = 0;
    std::map<HodgePair, std::set<long>> sizes; // fiber sizes seen per Hodge pair
    std::map<HodgePair, long> lattices;
    bool constant() const {
        for (const auto& [l, s] : sizes)
            if (s.size() != 1) return false;
        return true;
    }
    long value(const HodgePair& l) const { return *sizes.at(l).begin(); }
};

inline FiberReport fiber_constancy(int e, const FieldCtx& K, int jobs = 1) {
    const auto chains = enumerate_chains(e, K);
    const auto tops = lattice_tops(chains);
    std::vector<long> n(tops.size());
    std::vector<HodgePair> h(tops.size());
    parallel_for(tops.size(), jobs, [&](std::size_t i) {
        n[i] = static_cast<long>(fiber_chains(tops[i], e).size());
        h[i] = hodge(tops[i]);
    });
    FiberReport r;
    r.e = e;
    r.q = K.q();
    for (std::size_t i = 0; i < tops.size(); ++i) {
        r.sizes[h[i]].insert(n[i]);
        ++r.lattices[h[i]];
    }
    return r;
}

// ---------------------------------------------------------------------------------------------
// Stratification poset

struct EdgeCertificate {
    StratumLabel lower, upper;
    int points = 0;
    int certified = 0;
    bool realizable = true; // false: no model-compatible point in the upper stratum
    std::map<std::string, int> methods;
    std::vector<std::string> not_found;
    int audit_failures = 0;
    std::vector<std::string> audit_notes;
    bool ok() const { return not_found.empty() && audit_failures == 0 && (!realizable || certified == points); }
};

struct PosetReport {
    int e = 0;
    int q = 0;
    bool lambda_only = false;
    std::string model; // description of the Dieudonné model used for the m1 layer
    std::vector<StratumLabel> nodes;
    std::map<StratumLabel, long> node_points;
    std::vector<EdgeCertificate> edges;
    std::map<HodgePair, std::set<std::set<int>>> emptiness;
    std::map<HodgePair, int> dim_X;
    bool ok() const {
        for (const auto& e : edges)
            if (!e.ok()) return false;
        return true;
    }
};

/// Covering pairs (a, b): a < b with nothing strictly between, in input order.
inline std::vector<std::pair<StratumLabel, StratumLabel>> covering_edges(const std::vector<StratumLabel>& nodes) {
    std::vector<std::pair<StratumLabel, StratumLabel>> out;
    for (const auto& a : nodes)
        for (const auto& b : nodes) {
            if (a == b || !naive_leq(a, b)) continue;
            bool cover = true;
            for (const auto& m : nodes)
                if (m != a && m != b && naive_leq(a, m) && naive_leq(m, b)) {
                    cover = false;
                    break;
                }
            if (cover) out.emplace_back(a, b);
        }
    return out;
}

struct PosetOptions {
    int jobs = 1;
    int budget = 4096;
    int prec = 16;
    bool lambda_only = false;
    bool m1_layer = true;   // at e = 4
    int model_m = 3;        // normal-form exponent of the m1-layer model
};

namespace detail {

struct Witness {
    std::optional<FamilyChain> family;
    std::string method;
};

inline bool label_matches(const StratumLabel& got, const StratumLabel& want) {
    return got.lambda == want.lambda && got.T == want.T && (want.m1 == M1::unknown || got.m1 == want.m1);
}

inline std::optional<StratumLabel> safe_generic(const FamilyChain& f) {
    try {
        const GenericCertificate g = generic_label(f);
        if (!g.determined) return std::nullopt;
        return g.label;
    } catch (const Error& err) {
        if (err.kind() == ErrorKind::degenerate_f || err.kind() == ErrorKind::all_minors_vanish) return std::nullopt;
        throw;
    }
}

/// Named constructions first, then Hodge raising, then the searches.
inline Witness find_witness(const PRChain& c, const StratumLabel& lo, const StratumLabel& up,
                            const std::optional<DieudonneModel>& model, const PosetOptions& opt) {
    auto try_family = [&](FamilyChain f, const std::string& how) -> Witness {
        if (model) f.model = *model;
        const auto g = safe_generic(f);
        if (g && label_matches(*g, up)) return {std::move(f), how};
        return {};
    };
    const bool use_m1 = up.m1 != M1::unknown;
    const bool same_linear = lo.lambda == up.lambda && lo.T == up.T;
    if (use_m1 && same_linear && lo.m1 == M1::zero && up.m1 == M1::nonzero)
        return {invert_m1(*model, c, opt.prec), "invert-m1"};
    const bool v1 = lo.lambda == HodgePair{2, 2} && lo.T == std::set<int>{2, 3, 4} && up.lambda == HodgePair{2, 2} &&
                    up.T == std::set<int>{3};
    const bool v2 = lo.lambda == HodgePair{2, 2} && lo.T == std::set<int>{3} && up.lambda == HodgePair{3, 1} &&
                    up.T == std::set<int>{3};
    if (c.e == 4 && (v1 || v2)) {
        if (use_m1 && up.m1 == M1::zero) {
            SigmaRecipe r = sigma_recipe(*model, c, v1 ? 1 : 2, opt.prec);
            if (label_matches(r.certificate.label, up)) return {std::move(r.family), v1 ? "sigma-1" : "sigma-2"};
        } else {
            Witness w = try_family(linear_recipe(c, v1 ? 1 : 2), v1 ? "linear-1" : "linear-2");
            if (w.family) return w;
        }
    }
    if (up.lambda != lo.lambda) {
        Witness w = try_family(hodge_raise(c).family, "hodge-raise");
        if (w.family) return w;
    }
    if (use_m1 && up.m1 == M1::zero) {
        SearchResult s = sigma_search_witness(*model, c, up, opt.budget, opt.prec);
        if (s.family) return {std::move(s.family), "sigma-search"};
        return {};
    }
    SearchResult s = search_witness(c, up, opt.budget, use_m1 ? model : std::nullopt);
    if (s.family) return {std::move(s.family), "search"};
    return {};
}

inline void certify_edges(std::vector<EdgeCertificate>& edges, const std::vector<std::vector<const PRChain*>>& points,
                          const std::optional<DieudonneModel>& model, const PosetOptions& opt) {
    struct Job {
        std::size_t edge;
        const PRChain* chain;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        edges[i].points = static_cast<int>(points[i].size());
        if (!edges[i].realizable) continue;
        for (const PRChain* c : points[i]) jobs.push_back({i, c});
    }
    struct Outcome {
        std::string method;
        bool audit_ok = true;
        std::string note;
    };
    std::vector<Outcome> out(jobs.size());
    parallel_for(jobs.size(), opt.jobs, [&](std::size_t j) {
        const EdgeCertificate& E = edges[jobs[j].edge];
        const PRChain& c = *jobs[j].chain;
        Witness w = find_witness(c, E.lower, E.upper, model, opt);
        if (!w.family) {
            out[j].note = c.key();
            return;
        }
        out[j].method = w.method;
        require(specialize(*w.family) == c, ErrorKind::internal, "witness does not specialize to its point");
        const SemicontinuityAudit a = semicontinuity_audit(*w.family);
        out[j].audit_ok = a.ok;
        if (!a.ok) out[j].note = a.detail;
    });
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        EdgeCertificate& E = edges[jobs[j].edge];
        if (out[j].method.empty()) {
            E.not_found.push_back(out[j].note);
            continue;
        }
        ++E.certified;
        ++E.methods[out[j].method];
        if (!out[j].audit_ok) {
            ++E.audit_failures;
            E.audit_notes.push_back(out[j].note);
        }
    }
}

} // namespace detail

/// Nodes are the nonempty labels of the census; every covering edge of the naive order is
/// certified by a witness family from every point of its lower stratum. At e = 4 an m1 layer
/// is added for the normal-form model, over the chains where its F^(1) is a line.
inline PosetReport build_poset(const Census& cen, const PosetOptions& opt = {}) {
    PosetReport rep;
    rep.e = cen.e;
    rep.q = cen.q();
    rep.lambda_only = opt.lambda_only;
    if (cen.total == 0 || !cen.ctx) return rep;
    const FieldCtx& K = *cen.ctx;
    const int e = cen.e;
    rep.emptiness = cen.nonempty_T();
    for (const auto& [l, ts] : rep.emptiness) rep.dim_X[l] = e - l.b;
    const auto chains = enumerate_chains(e, K);
    std::vector<StratumLabel> lin(chains.size());
    parallel_for(chains.size(), opt.jobs, [&](std::size_t i) { lin[i] = stratum_label(chains[i]); });

    if (opt.lambda_only) {
        std::map<HodgePair, std::vector<const PRChain*>> by;
        for (std::size_t i = 0; i < chains.size(); ++i) by[lin[i].lambda].push_back(&chains[i]);
        for (const auto& [l, v] : by) {
            StratumLabel L{l, {}, M1::unknown};
            rep.nodes.push_back(L);
            rep.node_points[L] = static_cast<long>(v.size());
        }
        std::vector<std::vector<const PRChain*>> pts;
        for (const auto& [l, v] : by) {
            const HodgePair up{l.a + 1, l.b - 1};
            if (l.b == 0 || !by.count(up)) continue;
            EdgeCertificate E;
            E.lower = {l, {}, M1::unknown};
            E.upper = {up, {}, M1::unknown};
            rep.edges.push_back(E);
            pts.push_back(v);
        }
        struct Out {
            bool ok = false;
            bool audit = true;
        };
        std::vector<std::pair<std::size_t, const PRChain*>> jobs;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (const PRChain* c : pts[i]) jobs.emplace_back(i, c);
        std::vector<Out> out(jobs.size());
        parallel_for(jobs.size(), opt.jobs, [&](std::size_t j) {
            const HodgeRaise r = hodge_raise(*jobs[j].second);
            out[j].ok = hodge(r.family.generic().top()) == rep.edges[jobs[j].first].upper.lambda &&
                        specialize(r.family) == *jobs[j].second;
            out[j].audit = semicontinuity_audit(r.family).ok;
        });
        for (std::size_t i = 0; i < pts.size(); ++i) rep.edges[i].points = static_cast<int>(pts[i].size());
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            EdgeCertificate& E = rep.edges[jobs[j].first];
            if (out[j].ok) {
                ++E.certified;
                ++E.methods["hodge-raise"];
            } else {
                E.not_found.push_back(jobs[j].second->key());
            }
            if (!out[j].audit) ++E.audit_failures;
        }
        return rep;
    }

    // linear layer
    const std::set<StratumLabel> nodes = cen.labels();
    const std::vector<StratumLabel> nv(nodes.begin(), nodes.end());
    for (const auto& L : nv) {
        rep.nodes.push_back(L);
        rep.node_points[L] = cen.counts.at(L);
    }
    std::vector<std::vector<const PRChain*>> pts;
    for (const auto& [a, b] : covering_edges(nv)) {
        EdgeCertificate E;
        E.lower = a;
        E.upper = b;
        rep.edges.push_back(E);
        std::vector<const PRChain*> v;
        for (std::size_t i = 0; i < chains.size(); ++i)
            if (lin[i] == a) v.push_back(&chains[i]);
        pts.push_back(std::move(v));
    }

    // m1 layer
    std::optional<DieudonneModel> model;
    std::vector<EdgeCertificate> m1_edges;
    std::vector<std::vector<const PRChain*>> m1_pts;
    if (e == 4 && opt.m1_layer) {
        model = ag_normal_form(K, opt.model_m, Scalar::one(K));
        rep.model = "F = (u^" + std::to_string(opt.model_m) + ", u^2; u^2, 0)";
        std::vector<std::optional<StratumLabel>> full(chains.size());
        parallel_for(chains.size(), opt.jobs, [&](std::size_t i) {
            try {
                full[i] = full_label(*model, chains[i]);
            } catch (const Error& err) {
                if (err.kind() != ErrorKind::degenerate_f) throw;
            }
        });
        std::vector<StratumLabel> mv;
        for (const auto& L : nv)
            for (M1 m : {M1::zero, M1::nonzero}) mv.push_back({L.lambda, L.T, m});
        std::map<StratumLabel, long> realized;
        for (const auto& f : full)
            if (f) ++realized[*f];
        for (const auto& L : mv) {
            rep.nodes.push_back(L);
            rep.node_points[L] = realized.count(L) ? realized[L] : 0;
        }
        for (const auto& [a, b] : covering_edges(mv)) {
            EdgeCertificate E;
            E.lower = a;
            E.upper = b;
            E.realizable = realized.count(b) > 0;
            std::vector<const PRChain*> v;
            for (std::size_t i = 0; i < chains.size(); ++i)
                if (full[i] && *full[i] == a) v.push_back(&chains[i]);
            m1_edges.push_back(E);
            m1_pts.push_back(std::move(v));
        }
    }
    detail::certify_edges(rep.edges, pts, std::nullopt, opt);
    if (model) {
        detail::certify_edges(m1_edges, m1_pts, model, opt);
        rep.edges.insert(rep.edges.end(), m1_edges.begin(), m1_edges.end());
    }
    return rep;
}

inline std::string node_name(const StratumLabel& L) {
    return "λ=" + L.lambda.to_string() + " T=" + L.T_string() + " m1=" + m1_token(L.m1);
}

/// Hasse diagram; edges point from the closure member to the generic stratum.
inline std::string poset_dot(const PosetReport& rep) {
    std::string s = "digraph strata {\n  rankdir=BT;\n";
    std::map<StratumLabel, int> id;
    for (const auto& L : rep.nodes) {
        const int i = static_cast<int>(id.size());
        id[L] = i;
        s += "  n" + std::to_string(i) + " [label=\"" + node_name(L) + "\\npoints=" +
             std::to_string(rep.node_points.count(L) ? rep.node_points.at(L) : 0) + "\"];\n";
    }
    for (const auto& E : rep.edges) {
        std::string attr = E.realizable ? (E.ok() ? "certified " : "FAILED ") : "unrealizable ";
        attr += std::to_string(E.certified) + "/" + std::to_string(E.points);
        s += "  n" + std::to_string(id.at(E.lower)) + " -> n" + std::to_string(id.at(E.upper)) + " [label=\"" + attr + "\"" +
             (E.realizable ? "" : ", style=dashed") + "];\n";
    }
    return s + "}\n";
}

// ---------------------------------------------------------------------------------------------
// Products over several places

struct ProductCensus {
    std::vector<int> es;
    const FieldCtx* ctx = nullptr;
    std::map<std::vector<StratumLabel>, long> counts;
    long total = 0;

    static int dim(const std::vector<int>& es, const std::vector<StratumLabel>& L) {
        int d = 0;
        for (std::size_t i = 0; i < L.size(); ++i) d += es[i] - L[i].lambda.b;
        return d;
    }
    /// Componentwise naive order.
    static bool leq(const std::vector<StratumLabel>& x, const std::vector<StratumLabel>& y) {
        require(x.size() == y.size(), ErrorKind::invalid_input, "labels with different numbers of factors");
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!naive_leq(x[i], y[i])) return false;
        return true;
    }
};

inline ProductCensus product_census(const std::vector<Census>& factors) {
    require(!factors.empty(), ErrorKind::invalid_input, "product of no factors");
    ProductCensus p;
    p.ctx = factors[0].ctx;
    std::map<std::vector<StratumLabel>, long> acc{{{}, 1}};
    for (const auto& f : factors) {
        require(f.ctx == p.ctx, ErrorKind::mixed_contexts, "factors over different fields");
        p.es.push_back(f.e);
        std::map<std::vector<StratumLabel>, long> next;
        for (const auto& [k, n] : acc)
            for (const auto& [L, m] : f.counts) {
                auto key = k;
                key.push_back(L);
                next[key] += n * m;
            }
        acc = std::move(next);
    }
    p.counts = std::move(acc);
    for (const auto& [k, n] : p.counts) p.total += n;
    return p;
}

// ---------------------------------------------------------------------------------------------
// CSV

namespace detail {
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string r = "\"";
    for (char c : s) {
        if (c == '"') r += '"';
        r += c;
    }
    return r + "\"";
}
} // namespace detail

inline std::string census_csv(const std::vector<Census>& cs) {
    std::string s = "e,q,lambda,T,m1,count\n";
    for (const auto& c : cs)
        for (const auto& [L, n] : c.counts)
            s += std::to_string(c.e) + "," + std::to_string(c.q()) + "," + detail::csv_field(L.lambda.to_string()) + "," +
                 detail::csv_field(L.T_string()) + "," + m1_token(L.m1) + "," + std::to_string(n) + "\n";
    return s;
}

inline std::string fibers_csv(const std::vector<FiberReport>& rs) {
    std::string s = "e,q,lambda,lattices,fiber_sizes,constant\n";
    for (const auto& r : rs)
        for (const auto& [l, sz] : r.sizes) {
            std::string v;
            for (long n : sz) v += (v.empty() ? "" : ";") + std::to_string(n);
            s += std::to_string(r.e) + "," + std::to_string(r.q) + "," + detail::csv_field(l.to_string()) + "," +
                 std::to_string(r.lattices.at(l)) + "," + v + "," + (sz.size() == 1 ? "yes" : "no") + "\n";
        }
    return s;
}

} // namespace prc
