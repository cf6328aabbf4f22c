#pragma once

// Verification suites over exhaustive censuses: Hodge invariants and raising,
// partial Hasse emptiness and vanishing-index checks, fiber constancy, witnessed closure relations.

#include <functional>

#include "io.hpp"

namespace prc::verify {

struct Check {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<Check> checks;
    io::json data = io::json::object();

    bool ok() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    void add(std::string name, bool pass, std::string detail = {}) {
        checks.push_back({std::move(name), pass, std::move(detail)});
    }
    void merge(const SuiteReport& o) {
        for (const auto& c : o.checks) checks.push_back({o.suite + "/" + c.name, c.pass, c.detail});
        data[o.suite] = o.data;
    }
    io::json to_json() const {
        io::json cs = io::json::array();
        for (const auto& c : checks) cs.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        return {{"suite", suite}, {"ok", ok()}, {"checks", cs}, {"data", data}};
    }
};

struct Options {
    int e = 4;
    std::vector<int> qs{2};
    std::vector<int> fit_qs{2, 3, 4, 5, 7, 8, 9};
    int jobs = 1;
    PosetOptions poset;
};

/// Nonempty vanishing sets per Hodge pair at e = 4.
inline const std::map<HodgePair, std::set<std::set<int>>>& reference_emptiness_e4() {
    static const std::map<HodgePair, std::set<std::set<int>>> t{
        {{4, 0}, {{}}},
        {{3, 1}, {{2}, {3}, {4}, {2, 3}, {3, 4}}},
        {{2, 2}, {{3}, {2, 4}, {4}, {2, 3, 4}}},
    };
    return t;
}

inline std::string t_family_string(const std::set<std::set<int>>& ts) {
    std::string s = "{";
    bool first = true;
    for (const auto& T : ts) {
        StratumLabel L;
        L.T = T;
        s += (first ? "" : ", ") + L.T_string();
        first = false;
    }
    return s + "}";
}

namespace detail {

inline std::map<int, Census> censuses(int e, const std::vector<int>& qs, int jobs) {
    std::map<int, Census> r;
    for (int q : qs) r.emplace(q, census(e, FieldCtx::of_order(q), jobs));
    return r;
}

inline std::string fit_detail(const DegreeFit& f, int want) {
    return "fit " + f.to_string() + " degree " + std::to_string(f.degree) + " expected " + std::to_string(want) +
           (f.extra_roots ? " (unstable under dropping a sample)" : "");
}

} // namespace detail

// ---- hodge ----------------------------------------------------------------------------------

inline SuiteReport hodge_suite(const Options& o) {
    SuiteReport r{"hodge", {}, {}};
    {
        const FieldCtx& F2 = FieldCtx::prime(2);
        auto m = [&](int c, int d) { return UVec::monomial(F2, 3, c, d); };
        const HodgePair h1 = hodge(Subspace::span(F2, 3, {m(0, 2)}));
        const HodgePair h2 = hodge(Subspace::span(F2, 3, {m(0, 2), m(1, 2)}));
        const HodgePair h3 = hodge(Subspace::span(F2, 3, {m(0, 2), m(1, 1), m(1, 2)}));
        r.add("worked-lattices", h1 == HodgePair{3, 2} && h2 == HodgePair{2, 2} && h3 == HodgePair{2, 1},
              h1.to_string() + " " + h2.to_string() + " " + h3.to_string());
    }
    {
        const FieldCtx& F2 = FieldCtx::prime(2);
        const FieldCtx& L = FieldCtx::rational_t(F2);
        auto m = [&](int c, int d) { return UVec::monomial(F2, 3, c, d); };
        auto ml = [&](int c, int d, const Scalar& s) { return UVec::monomial(L, 3, c, d, s); };
        const PRChain c = make_chain(F2, 3,
                                     {Subspace::span(F2, 3, {m(1, 2)}), Subspace::span(F2, 3, {m(1, 2), m(0, 2)}),
                                      Subspace::span(F2, 3, {m(1, 1), m(0, 2), m(1, 2)})});
        const HodgeRaise h = hodge_raise(c);
        const Scalar one = Scalar::one(L), t = Scalar::t(L);
        const UVec want2 = ml(0, 2, one) + ml(1, 1, t);
        const UVec want3 = ml(0, 1, t) + ml(1, 0, t * t) + ml(1, 1, one);
        const bool pass = h.trace.k0 == 2 && h.trace.J == std::set<int>{1} && h.trace.v_tilde.size() == 2 &&
                          h.trace.v_tilde[0] == want2 && h.trace.v_tilde[1] == want3;
        std::string d = "k0=" + std::to_string(h.trace.k0);
        for (const auto& v : h.trace.v_tilde) d += " " + v.to_string();
        r.add("worked-deformation", pass, d);
    }
    for (int e = 2; e <= std::max(2, o.e); ++e)
        for (int q : o.qs) {
            const FieldCtx& K = FieldCtx::of_order(q);
            const auto chains = enumerate_chains(e, K);
            std::vector<char> ok(chains.size(), 1);
            std::vector<std::string> why(chains.size());
            parallel_for(chains.size(), o.jobs, [&](std::size_t i) {
                const PRChain& c = chains[i];
                const HodgePair l = hodge(c.top());
                if (l == HodgePair{e, 0}) return;
                try {
                    const HodgeRaise h = hodge_raise(c);
                    const bool good = hodge(h.family.generic().top()) == HodgePair{l.a + 1, l.b - 1} &&
                                      specialize(h.family) == c && semicontinuity_audit(h.family).ok;
                    if (!good) {
                        ok[i] = 0;
                        why[i] = c.to_string();
                    }
                } catch (const Error& err) {
                    ok[i] = 0;
                    why[i] = c.to_string() + ": " + err.what();
                }
            });
            long n = 0, bad = 0;
            std::string first;
            for (std::size_t i = 0; i < chains.size(); ++i) {
                if (hodge(chains[i].top()) == HodgePair{e, 0}) continue;
                ++n;
                if (!ok[i]) {
                    if (!bad) first = why[i];
                    ++bad;
                }
            }
            r.add("hodge-raise-total e=" + std::to_string(e) + " q=" + std::to_string(q), bad == 0,
                  std::to_string(n - bad) + "/" + std::to_string(n) + " chains raised" + (bad ? "; first failure " + first : ""));
        }
    for (int q : o.qs) {
        PosetOptions po = o.poset;
        po.lambda_only = true;
        po.jobs = o.jobs;
        const PosetReport p = build_poset(census(o.e, FieldCtx::of_order(q), o.jobs), po);
        r.add("lambda-poset q=" + std::to_string(q), p.ok(), std::to_string(p.edges.size()) + " covering edges");
        r.data["lambda_poset_q" + std::to_string(q)] = io::to_json(p);
    }
    // dimension formulas by exact interpolation
    if (o.fit_qs.size() >= 2) {
        std::map<HodgePair, std::map<int, long>> chain_counts, lattice_count;
        for (int q : o.fit_qs) {
            const FieldCtx& K = FieldCtx::of_order(q);
            const auto chains = enumerate_chains(o.e, K);
            const Census c = census_of(o.e, K, chains, o.jobs);
            const auto lc = lattice_counts(chains);
            for (const auto& l : adm_poset(o.e).elements) {
                chain_counts[l][q] = c.count_lambda(l);
                lattice_count[l][q] = lc.count(l) ? lc.at(l) : 0;
            }
        }
        io::json fits = io::json::array();
        for (const auto& l : adm_poset(o.e).elements) {
            const DegreeFit fc = degree_fit(chain_counts[l]);
            const DegreeFit fl = degree_fit(lattice_count[l]);
            const int wc = AdmPoset::dim_X(l), wl = AdmPoset::dim_gr(l);
            r.add("chain-degree " + l.to_string(), fc.degree == wc && !fc.extra_roots, detail::fit_detail(fc, wc));
            r.add("lattice-degree " + l.to_string(), fl.degree == wl && !fl.extra_roots, detail::fit_detail(fl, wl));
            fits.push_back({{"lambda", {l.a, l.b}}, {"chains", io::to_json(fc)}, {"lattices", io::to_json(fl)}});
        }
        r.data["degree_fits"] = fits;
    }
    return r;
}

// ---- hasse ----------------------------------------------------------------------------------

inline SuiteReport hasse_suite(const Options& o) {
    SuiteReport r{"hasse", {}, {}};
    const int e = o.e;
    for (int q : o.qs) {
        const FieldCtx& K = FieldCtx::of_order(q);
        const auto chains = enumerate_chains(e, K);
        const Census c = census_of(e, K, chains, o.jobs);
        const std::string at = " q=" + std::to_string(q);
        long expect = 1;
        for (int i = 0; i < e; ++i) expect *= q + 1;
        r.add("census-total" + at, c.total == expect, std::to_string(c.total) + " chains, expected " + std::to_string(expect));
        r.data["census_q" + std::to_string(q)] = io::to_json(c);

        if (e == 4) {
            const auto got = c.nonempty_T();
            for (const auto& [l, want] : reference_emptiness_e4()) {
                const auto have = got.count(l) ? got.at(l) : std::set<std::set<int>>{};
                r.add("emptiness " + l.to_string() + at, have == want,
                      "nonempty over the tested field " + t_family_string(have) + ", reference " + t_family_string(want));
            }
        }

        long violations = 0, converse = 0, equiv_fail = 0;
        std::string first;
        for (const auto& ch : chains) {
            const StratumLabel L = stratum_label(ch);
            for (int i = 2; i <= e; ++i) {
                const HodgePair hi = hodge(ch.level(i)), hl = hodge(ch.level(i - 2));
                const bool drop = hi == HodgePair{hl.a - 1, hl.b - 1};
                if (L.T.count(i) && !drop) {
                    if (!violations) first = ch.to_string() + " at " + std::to_string(i);
                    ++violations;
                }
                if (!L.T.count(i) && drop) ++converse;
            }
            const bool top = L.lambda == HodgePair{e, 0};
            if (top != L.T.empty() || top != is_free_rank_one(ch.top())) ++equiv_fail;
        }
        r.add("hodge-drop-at-vanishing" + at, violations == 0,
              std::to_string(violations) + " violations" + (violations ? "; first " + first : ""));
        r.add("hodge-drop-converse-fails" + at, converse > 0, std::to_string(converse) + " (chain, index) counterexamples");
        r.add("free-iff-no-vanishing" + at, equiv_fail == 0, std::to_string(equiv_fail) + " exceptions");
    }
    if (o.fit_qs.size() >= 2) {
        std::map<std::set<int>, std::map<int, long>> counts;
        std::vector<std::set<int>> subsets;
        for (int mask = 0; mask < (1 << (e - 1)); ++mask) {
            std::set<int> T;
            for (int i = 2; i <= e; ++i)
                if (mask & (1 << (i - 2))) T.insert(i);
            subsets.push_back(T);
        }
        for (int q : o.fit_qs) {
            const Census c = census(e, FieldCtx::of_order(q), o.jobs);
            for (const auto& T : subsets) counts[T][q] = c.count_T(T);
        }
        io::json fits = io::json::array();
        for (const auto& T : subsets) {
            StratumLabel L;
            L.T = T;
            const DegreeFit f = degree_fit(counts[T]);
            const int want = e - static_cast<int>(T.size());
            bool nonempty = true;
            for (const auto& [q, n] : counts[T]) nonempty = nonempty && n > 0;
            r.add("T-degree " + L.T_string(), nonempty && f.degree == want && !f.extra_roots,
                  (nonempty ? "" : "empty for some tested field; ") + detail::fit_detail(f, want));
            fits.push_back({{"T", T}, {"fit", io::to_json(f)}});
        }
        r.data["T_degree_fits"] = fits;
    }
    return r;
}

// ---- flatness -------------------------------------------------------------------------------

inline SuiteReport flatness_suite(const Options& o) {
    SuiteReport r{"flatness", {}, {}};
    const int e = o.e;
    for (int q : o.qs) {
        const FiberReport f = fiber_constancy(e, FieldCtx::of_order(q), o.jobs);
        std::string d;
        for (const auto& [l, s] : f.sizes) {
            d += l.to_string() + ":";
            for (long n : s) d += " " + std::to_string(n);
            d += "; ";
        }
        r.add("fiber-constant q=" + std::to_string(q), f.constant(), d);
        const HodgePair top{e, 0};
        r.add("free-fiber-is-point q=" + std::to_string(q), f.sizes.count(top) && f.sizes.at(top) == std::set<long>{1});
        r.data["fibers_q" + std::to_string(q)] = io::to_json(f);
    }
    if (o.fit_qs.size() >= 2) {
        std::map<HodgePair, std::map<int, long>> vals;
        bool constant = true;
        for (int q : o.fit_qs) {
            const FiberReport f = fiber_constancy(e, FieldCtx::of_order(q), o.jobs);
            constant = constant && f.constant();
            for (const auto& [l, s] : f.sizes) vals[l][q] = *s.begin();
        }
        r.add("fiber-constant on fit fields", constant);
        for (const auto& [l, m] : vals) {
            const DegreeFit f = degree_fit(m);
            const int want = AdmPoset::dim_fiber(l);
            r.add("fiber-degree " + l.to_string(), f.degree == want && !f.extra_roots, detail::fit_detail(f, want));
        }
    }
    return r;
}

// ---- closure --------------------------------------------------------------------------------

inline SuiteReport closure_suite(const Options& o) {
    SuiteReport r{"closure", {}, {}};
    for (int q : o.qs) {
        PosetOptions po = o.poset;
        po.jobs = o.jobs;
        const PosetReport p = build_poset(census(o.e, FieldCtx::of_order(q), o.jobs), po);
        int certified = 0, unrealizable = 0;
        for (const auto& E : p.edges) {
            const std::string name = "edge " + E.lower.to_string() + " -> " + E.upper.to_string() + " q=" + std::to_string(q);
            if (!E.realizable) {
                ++unrealizable;
                r.add(name, E.ok(), "no point of the upper stratum is compatible with the model; " +
                                         std::to_string(E.points) + " lower points");
                continue;
            }
            std::string how;
            for (const auto& [m, n] : E.methods) how += " " + m + ":" + std::to_string(n);
            if (!E.not_found.empty()) how += "; not found from " + std::to_string(E.not_found.size()) + " points";
            if (E.audit_failures) how += "; " + std::to_string(E.audit_failures) + " audit failures";
            r.add(name, E.ok(), std::to_string(E.certified) + "/" + std::to_string(E.points) + how);
            if (E.ok()) ++certified;
        }
        r.add("poset q=" + std::to_string(q), p.ok(),
              std::to_string(p.edges.size()) + " covering edges, " + std::to_string(certified) + " certified, " +
                  std::to_string(unrealizable) + " without model-compatible upper points; upper bounds by semicontinuity");
        r.data["poset_q" + std::to_string(q)] = io::to_json(p);
    }
    return r;
}

inline SuiteReport run_suite(const std::string& name, const Options& o) {
    if (name == "hodge") return hodge_suite(o);
    if (name == "hasse") return hasse_suite(o);
    if (name == "flatness") return flatness_suite(o);
    if (name == "closure") return closure_suite(o);
    require(name == "all", ErrorKind::invalid_input, "unknown suite '" + name + "'");
    SuiteReport all{"all", {}, {}};
    for (const char* s : {"hodge", "hasse", "flatness", "closure"}) all.merge(run_suite(s, o));
    return all;
}

} // namespace prc::verify
