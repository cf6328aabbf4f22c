#pragma once

// JSON encodings. Finite-field elements are integer codes whose base-p digits are the
// coefficients of x (lowest first); K(t) elements are {"num","den"} code lists and
// K[t]/(t^N) elements are {"series"} code lists. Vectors store the e1 and e2 columns.

#include <json.hpp>

#include "strata.hpp"

namespace prc::io {

using json = nlohmann::json;

// ---- contexts and scalars -------------------------------------------------------------------

inline json to_json(const FieldCtx& K) {
    json j;
    const FieldCtx& F = K.finite();
    j["p"] = F.p();
    j["f"] = F.f();
    if (F.kind() == FieldKind::extension) j["modulus"] = F.modulus();
    switch (K.kind()) {
    case FieldKind::prime:
    case FieldKind::extension: j["kind"] = "finite"; break;
    case FieldKind::rational_t: j["kind"] = "rational_t"; break;
    case FieldKind::truncated_t:
        j["kind"] = "truncated_t";
        j["precision"] = K.precision();
        break;
    }
    j["name"] = K.describe();
    return j;
}

inline const FieldCtx& field_from_json(const json& j) {
    require(j.is_object() && j.contains("p"), ErrorKind::invalid_input, "field needs at least p");
    const int p = j.at("p").get<int>();
    const int f = j.value("f", 1);
    const FieldCtx* F = nullptr;
    if (j.contains("modulus"))
        F = &FieldCtx::extension(p, j.at("modulus").get<std::vector<int>>());
    else
        F = f == 1 ? &FieldCtx::prime(p) : &FieldCtx::galois(p, f);
    const std::string kind = j.value("kind", "finite");
    if (kind == "finite") return *F;
    if (kind == "rational_t") return FieldCtx::rational_t(*F);
    if (kind == "truncated_t") return FieldCtx::truncated_t(*F, j.value("precision", 16));
    fail(ErrorKind::invalid_input, "unknown field kind '" + kind + "'");
}

inline json to_json(const Scalar& s) {
    const FieldCtx& K = s.field();
    if (K.is_finite()) return s.code();
    if (K.kind() == FieldKind::rational_t) return json{{"num", s.num()}, {"den", s.den()}};
    return json{{"series", s.num()}};
}

inline Scalar scalar_from_json(const FieldCtx& K, const json& j) {
    if (K.is_finite()) {
        require(j.is_number_integer(), ErrorKind::invalid_input, "finite-field element must be an integer code");
        const long c = j.get<long>();
        require(c >= 0 && c < K.q(), ErrorKind::invalid_input, "element code out of range");
        return Scalar::constant(K, static_cast<std::uint32_t>(c));
    }
    if (j.is_number_integer()) {
        const long c = j.get<long>();
        require(c >= 0 && c < K.finite().q(), ErrorKind::invalid_input, "element code out of range");
        return Scalar::constant(K, static_cast<std::uint32_t>(c));
    }
    if (K.kind() == FieldKind::rational_t) {
        Poly den = j.contains("den") ? j.at("den").get<Poly>() : Poly{1};
        return Scalar::rational(K, j.at("num").get<Poly>(), std::move(den));
    }
    return Scalar::series(K, j.at("series").get<Poly>());
}

// ---- vectors, subspaces, chains -------------------------------------------------------------

inline json to_json(const UVec& v) {
    json a = json::array(), b = json::array();
    for (int k = 0; k < v.length(); ++k) {
        a.push_back(to_json(v.a(k)));
        b.push_back(to_json(v.b(k)));
    }
    return json{{"e1", a}, {"e2", b}};
}

inline UVec uvec_from_json(const FieldCtx& K, int N, const json& j) {
    const json& a = j.at("e1");
    const json& b = j.at("e2");
    require(a.is_array() && b.is_array() && static_cast<int>(a.size()) <= N && static_cast<int>(b.size()) <= N,
            ErrorKind::invalid_input, "vector coordinates must be arrays of length at most " + std::to_string(N));
    Row ra(N, Scalar::zero(K)), rb(N, Scalar::zero(K));
    for (std::size_t k = 0; k < a.size(); ++k) ra[k] = scalar_from_json(K, a[k]);
    for (std::size_t k = 0; k < b.size(); ++k) rb[k] = scalar_from_json(K, b[k]);
    return UVec::from_ab(K, ra, rb);
}

inline json to_json(const Subspace& W) {
    json g = json::array();
    for (const auto& v : W.basis()) g.push_back(to_json(v));
    return g;
}

inline Subspace subspace_from_json(const FieldCtx& K, int N, const json& j) {
    require(j.is_array(), ErrorKind::invalid_input, "subspace must be a list of generators");
    std::vector<UVec> g;
    for (const auto& v : j) g.push_back(uvec_from_json(K, N, v));
    return Subspace::span(K, N, g);
}

inline json to_json(const PRChain& c) {
    json lv = json::array();
    for (const auto& W : c.levels) lv.push_back(to_json(W));
    const FieldCtx& K = c.field();
    json j{{"p", K.p()}, {"f", K.f()}};
    if (K.kind() == FieldKind::extension) j["modulus"] = K.modulus();
    j["e"] = c.e;
    j["levels"] = lv;
    return j;
}

// Accepts the flat {"p","f","modulus"} header or a nested "field" object.
inline PRChain chain_from_json(const json& j) {
    require(j.is_object(), ErrorKind::invalid_input, "chain must be an object");
    const FieldCtx& K = field_from_json(j.contains("field") ? j.at("field") : j);
    require(K.is_finite(), ErrorKind::invalid_input, "chains live over a finite field");
    const int e = j.at("e").get<int>();
    require(e >= 1, ErrorKind::invalid_input, "e must be positive");
    const json& lv = j.at("levels");
    require(lv.is_array() && static_cast<int>(lv.size()) == e, ErrorKind::invalid_input,
            "a chain needs exactly e levels");
    PRChain c{e, &K, {}};
    for (const auto& W : lv) c.levels.push_back(subspace_from_json(K, e, W));
    const ChainReport r = validate(c);
    require(r.ok, ErrorKind::invalid_input, "not a chain at level " + std::to_string(r.level) + ": " + r.reason);
    return c;
}

// ---- labels, models, families ---------------------------------------------------------------

inline json to_json(const StratumLabel& L) {
    return json{{"lambda", {L.lambda.a, L.lambda.b}}, {"T", L.T}, {"m1", m1_token(L.m1)}, {"label", L.to_string()}};
}

inline StratumLabel label_from_json(const json& j) {
    if (j.is_string()) return StratumLabel::parse(j.get<std::string>());
    StratumLabel L;
    const auto l = j.at("lambda").get<std::vector<int>>();
    require(l.size() == 2, ErrorKind::invalid_input, "lambda needs two entries");
    L.lambda = {l[0], l[1]};
    L.T = j.value("T", std::set<int>{});
    const std::string m = j.value("m1", "?");
    L.m1 = m == "0" ? M1::zero : m == "1" ? M1::nonzero : M1::unknown;
    return L;
}

inline json to_json(const DieudonneModel& M) {
    json F = json::array();
    for (const auto& row : M.F) {
        json r = json::array();
        for (const auto& entry : row) {
            json x = json::array();
            for (const auto& s : entry) x.push_back(to_json(s));
            r.push_back(x);
        }
        F.push_back(r);
    }
    return json{{"field", to_json(M.field())}, {"e", M.e}, {"F", F}};
}

inline DieudonneModel model_from_json(const json& j) {
    const FieldCtx& K = field_from_json(j.at("field"));
    const int e = j.at("e").get<int>();
    const json& F = j.at("F");
    require(F.is_array() && F.size() == 2 && F[0].size() == 2 && F[1].size() == 2, ErrorKind::invalid_input,
            "F must be a 2x2 matrix of coefficient lists");
    std::array<std::array<Row, 2>, 2> m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            for (const auto& s : F[r][c]) m[r][c].push_back(scalar_from_json(K, s));
    return DieudonneModel::make(K, e, std::move(m));
}

inline json to_json(const FamilyChain& f) {
    json gens = json::array();
    for (const auto& lv : f.gens) {
        json g = json::array();
        for (const auto& v : lv) g.push_back(to_json(v));
        gens.push_back(g);
    }
    json j{{"mode", mode_name(f.mode)}, {"base", to_json(*f.base)}, {"ring", to_json(*f.ctx)},
           {"e", f.e}, {"recipe", f.recipe}, {"generators", gens}};
    if (f.mode == FamilyMode::truncated) j["precision"] = f.precision();
    if (f.model) j["model"] = to_json(*f.model);
    if (!f.pre.empty()) {
        json p = json::array();
        for (const auto& v : f.pre) p.push_back(to_json(v));
        j["preimage"] = p;
    }
    return j;
}

inline FamilyChain family_from_json(const json& j) {
    FamilyChain f;
    const std::string mode = j.at("mode").get<std::string>();
    require(mode == "exact" || mode == "truncated", ErrorKind::invalid_input, "mode must be exact or truncated");
    f.mode = mode == "exact" ? FamilyMode::exact : FamilyMode::truncated;
    f.ctx = &field_from_json(j.at("ring"));
    f.base = &f.ctx->finite();
    require(f.ctx->has_t() && (f.mode == FamilyMode::exact) == (f.ctx->kind() == FieldKind::rational_t),
            ErrorKind::invalid_input, "ring does not match the family mode");
    f.e = j.at("e").get<int>();
    f.recipe = j.value("recipe", "");
    for (const auto& lv : j.at("generators")) {
        std::vector<UVec> g;
        for (const auto& v : lv) g.push_back(uvec_from_json(*f.ctx, f.e, v));
        f.gens.push_back(std::move(g));
    }
    if (j.contains("model")) f.model = model_from_json(j.at("model"));
    if (j.contains("preimage"))
        for (const auto& v : j.at("preimage")) f.pre.push_back(uvec_from_json(*f.ctx, f.e, v));
    const ChainReport r = validate_family(f);
    require(r.ok, ErrorKind::invalid_input, "not a family of chains: " + r.reason);
    return f;
}

inline json to_json(const DeformationTrace& t) {
    json j{{"s", t.s}, {"k0", t.k0}, {"hodge_k0", {t.a, t.b}}, {"J", t.J}, {"s_tilde_e", t.s_tilde_e}};
    j["adapted_basis"] = {{"e1", to_json(t.basis.e1)}, {"e2", to_json(t.basis.e2)}, {"big", t.basis.big},
                          {"small", t.basis.small}};
    auto list = [](const std::vector<UVec>& vs) {
        json a = json::array();
        for (const auto& v : vs) a.push_back(to_json(v));
        return a;
    };
    j["v"] = list(t.v);
    j["w"] = list(t.w);
    j["v_tilde"] = list(t.v_tilde);
    json x = json::array();
    for (const auto& row : t.x) {
        json r = json::array();
        for (const auto& s : row) r.push_back(to_json(s));
        x.push_back(r);
    }
    j["x"] = x;
    return j;
}

inline json to_json(const GenericCertificate& g) {
    json j{{"exact", g.exact}, {"label", to_json(g.label)}, {"determined", g.determined}};
    if (!g.exact) {
        j["precision"] = g.precision;
        j["lambda_lower"] = {g.lambda_lower.a, g.lambda_lower.b};
        j["lambda_upper"] = {g.lambda_upper.a, g.lambda_upper.b};
        j["T_pinned"] = g.T_pinned;
        j["T_upper"] = g.T_upper;
        j["excluded"] = g.excluded;
    }
    return j;
}

inline json to_json(const SemicontinuityAudit& a) {
    return json{{"ok", a.ok}, {"special", to_json(a.special)}, {"generic", to_json(a.generic)}, {"detail", a.detail}};
}

// ---- reports --------------------------------------------------------------------------------

inline json to_json(const Census& c) {
    json rows = json::array();
    for (const auto& [L, n] : c.counts) {
        json r = to_json(L);
        r["count"] = n;
        rows.push_back(r);
    }
    return json{{"e", c.e}, {"q", c.q()}, {"total", c.total}, {"strata", rows}};
}

inline json to_json(const DegreeFit& f) {
    json c = json::array();
    for (const auto& x : f.coeffs) c.push_back(x.str());
    return json{{"degree", f.degree}, {"coefficients", c}, {"polynomial", f.to_string()}, {"extra_roots", f.extra_roots},
                {"samples", f.qs}};
}

inline json to_json(const FiberReport& r) {
    json rows = json::array();
    for (const auto& [l, s] : r.sizes)
        rows.push_back({{"lambda", {l.a, l.b}}, {"lattices", r.lattices.at(l)}, {"fiber_sizes", s}, {"constant", s.size() == 1}});
    return json{{"e", r.e}, {"q", r.q}, {"constant", r.constant()}, {"lambdas", rows}};
}

inline json to_json(const EdgeCertificate& E) {
    return json{{"lower", to_json(E.lower)},       {"upper", to_json(E.upper)},   {"points", E.points},
                {"certified", E.certified},        {"realizable", E.realizable},  {"methods", E.methods},
                {"not_found", E.not_found},        {"audit_failures", E.audit_failures},
                {"audit_notes", E.audit_notes},    {"ok", E.ok()}};
}

inline json to_json(const PosetReport& p) {
    json nodes = json::array();
    for (const auto& L : p.nodes) {
        json n = to_json(L);
        n["points"] = p.node_points.count(L) ? p.node_points.at(L) : 0;
        nodes.push_back(n);
    }
    json edges = json::array();
    for (const auto& E : p.edges) edges.push_back(to_json(E));
    json empt = json::array();
    for (const auto& [l, ts] : p.emptiness) empt.push_back({{"lambda", {l.a, l.b}}, {"nonempty_T", ts}, {"dim_X", p.dim_X.at(l)}});
    json j{{"e", p.e}, {"q", p.q}, {"lambda_only", p.lambda_only}, {"ok", p.ok()},
           {"nodes", nodes}, {"edges", edges}, {"nonempty", empt}};
    if (!p.model.empty()) j["m1_model"] = p.model;
    return j;
}

} // namespace prc::io
