// Batch command surface: censuses, verification suites, posets, deformations,
// fibers, orbits and the m1 = 0 witness.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "prchains/verify.hpp"

using namespace prc;
using json = io::json;

namespace {

constexpr int kOk = 0, kFailed = 1, kInvalid = 2;

struct Common {
    int e = 4;
    std::vector<int> q{2};
    int p = 0, f = 1;
    std::vector<int> modulus;
    std::string out;
    std::string format;
    int jobs = default_jobs();
    unsigned seed = 0;
    int precision = 16;
    int budget = 4096;
};

const FieldCtx& single_field(const Common& c) {
    if (!c.modulus.empty()) return FieldCtx::extension(c.p, c.modulus);
    if (c.p) return c.f == 1 ? FieldCtx::prime(c.p) : FieldCtx::galois(c.p, c.f);
    require(c.q.size() == 1, ErrorKind::invalid_input, "this subcommand takes a single field");
    return FieldCtx::of_order(c.q[0]);
}

std::vector<const FieldCtx*> fields(const Common& c) {
    if (c.p || !c.modulus.empty()) return {&single_field(c)};
    std::vector<const FieldCtx*> r;
    for (int q : c.q) r.push_back(&FieldCtx::of_order(q));
    return r;
}

void validate(const Common& c) {
    require(c.e >= 1 && c.e <= 8, ErrorKind::invalid_input, "--e must lie in 1..8");
    require(!c.q.empty(), ErrorKind::invalid_input, "--q needs at least one field size");
    require(c.jobs >= 1, ErrorKind::invalid_input, "--jobs must be positive");
    require(c.precision >= 2 && c.precision <= 128, ErrorKind::invalid_input, "--precision must lie in 2..128");
    require(c.budget >= 1, ErrorKind::invalid_input, "--budget must be positive");
    require(c.f >= 1, ErrorKind::invalid_input, "--f must be positive");
}

void emit(const Common& c, const std::string& data, const std::string& cmd) {
    if (c.out.empty()) {
        std::cout << data;
        return;
    }
    std::ofstream os(c.out, std::ios::binary);
    require(static_cast<bool>(os), ErrorKind::invalid_input, "cannot write " + c.out);
    os << data;
    std::ofstream meta(c.out + ".meta.json", std::ios::binary);
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    meta << json{{"command", cmd},
                 {"seed", c.seed},
                 {"jobs", c.jobs},
                 {"unix_time", std::chrono::duration_cast<std::chrono::seconds>(now).count()}}
                .dump(2)
         << "\n";
}

json read_json(const std::string& path) {
    std::ifstream is(path);
    require(static_cast<bool>(is), ErrorKind::invalid_input, "cannot read " + path);
    try {
        return json::parse(is);
    } catch (const json::exception& err) {
        fail(ErrorKind::invalid_input, path + ": " + err.what());
    }
}

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::all_minors_vanish:
    case ErrorKind::no_rational_witness:
    case ErrorKind::internal: return kFailed;
    default: return kInvalid;
    }
}

void add_common(CLI::App* app, Common& c, bool multi_q) {
    app->add_option("--e", c.e, "Chain length e")->capture_default_str();
    if (multi_q)
        app->add_option("--q", c.q, "Field sizes, comma separated")->delimiter(',')->capture_default_str();
    else
        app->add_option("--q", c.q, "Field size")->expected(1)->capture_default_str();
    app->add_option("--p", c.p, "Characteristic (overrides --q)");
    app->add_option("--f", c.f, "Degree over the prime field, with --p");
    app->add_option("--modulus", c.modulus, "Defining polynomial coefficients, lowest first, with --p")->delimiter(',');
    app->add_option("--out", c.out, "Output file (default: standard output)");
    app->add_option("--jobs", c.jobs, "Parallel workers")->capture_default_str();
    app->add_option("--seed", c.seed, "Seed recorded with the run")->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact computations with lattice chains in the truncated affine Grassmannian of GL2"};
    app.set_config("--config", "", "Key-value configuration file; flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    Common c;
    std::string suite = "all";
    std::vector<int> fit_q{2, 3, 4, 5, 7, 8, 9};
    bool lambda_only = false, no_m1 = false;
    std::string chain_path, recipe, target, model_path;
    int model_m = 3, model_c = 1;

    auto* census_cmd = app.add_subcommand(
        "census", "Counts chains per stratum (Hodge pair of the top level, vanishing partial Hasse invariants); CSV");
    add_common(census_cmd, c, true);
    census_cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    auto* verify_cmd = app.add_subcommand(
        "verify", "Runs verification suites: hodge (Hodge invariant, raising deformation, dimension fits), hasse "
                  "(emptiness tables of the partial Hasse strata, vanishing-index checks), flatness (fiber constancy of the "
                  "convolution map), closure (witness-certified covering edges of the naive order)");
    add_common(verify_cmd, c, true);
    verify_cmd->add_option("--suite", suite, "all, hodge, hasse, flatness or closure")
        ->check(CLI::IsMember({"all", "hodge", "hasse", "flatness", "closure"}))
        ->capture_default_str();
    verify_cmd->add_option("--fit-q", fit_q, "Field sizes for degree fitting")->delimiter(',');
    verify_cmd->add_option("--precision", c.precision, "Truncation order for sigma-linear families")->capture_default_str();
    verify_cmd->add_option("--budget", c.budget, "Perturbations tried per witness search")->capture_default_str();

    auto* poset_cmd = app.add_subcommand(
        "poset", "Builds the stratification poset with a deformation witness for every covering edge and every point "
                 "of its lower stratum; DOT or JSON");
    add_common(poset_cmd, c, false);
    poset_cmd->add_option("--format", c.format, "dot or json")->check(CLI::IsMember({"dot", "json"}));
    poset_cmd->add_flag("--lambda-only", lambda_only, "Hodge strata only, certified by Hodge raising");
    poset_cmd->add_flag("--no-m1", no_m1, "Skip the layer refined by the Frobenius invariant m1");
    poset_cmd->add_option("--model-m", model_m, "Exponent m of the normal-form Frobenius for the m1 layer")->capture_default_str();
    poset_cmd->add_option("--precision", c.precision, "Truncation order for sigma-linear families")->capture_default_str();
    poset_cmd->add_option("--budget", c.budget, "Perturbations tried per witness search")->capture_default_str();

    auto* deform_cmd = app.add_subcommand(
        "deform", "Deforms a chain over K(t) or K[t]/(t^N): Hodge raising, the linear and sigma-linear e = 4 recipes, "
                  "m1 inversion or a first-order witness search; writes the family and its generic certificate");
    deform_cmd->add_option("--chain", chain_path, "Chain JSON")->required();
    deform_cmd->add_option("--recipe", recipe, "Construction")
        ->required()
        ->check(CLI::IsMember({"hodge-raise", "linear-1", "linear-2", "sigma-1", "sigma-2", "invert-m1", "search", "sigma-search"}));
    deform_cmd->add_option("--target", target, "Target stratum, e.g. \"lambda=(3,1);T={3}\"");
    deform_cmd->add_option("--model", model_path, "Frobenius model JSON (default: normal form with --m, --c)");
    deform_cmd->add_option("--m", model_m, "Normal-form exponent")->capture_default_str();
    deform_cmd->add_option("--c", model_c, "Normal-form unit, as an element code")->capture_default_str();
    deform_cmd->add_option("--precision", c.precision, "Truncation order")->capture_default_str();
    deform_cmd->add_option("--budget", c.budget, "Search budget")->capture_default_str();
    deform_cmd->add_option("--out", c.out, "Output file (default: standard output)");
    deform_cmd->add_option("--seed", c.seed, "Seed recorded with the run")->capture_default_str();

    auto* fibers_cmd = app.add_subcommand(
        "fibers", "Fiber sizes of the convolution map over every lattice, grouped by Hodge pair (flatness check); CSV");
    add_common(fibers_cmd, c, true);
    fibers_cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    auto* orbits_cmd = app.add_subcommand(
        "orbits", "Orbits of GL2(K[u]/u^e) on chains, compared with the signature (Hodge of the top two levels, blocks "
                  "of the top over the first); JSON");
    add_common(orbits_cmd, c, false);

    auto* witness_cmd = app.add_subcommand(
        "witness", "Builds a rational point with m1 = 0 in the most special e = 4 stratum for the normal-form Frobenius "
                   "with exponent m and unit c, and inverts m1 along a first-order family; JSON");
    witness_cmd->add_option("--m", model_m, "Exponent m >= 2")->capture_default_str();
    witness_cmd->add_option("--c", model_c, "Unit c, as an element code")->capture_default_str();
    witness_cmd->add_option("--q", c.q, "Field size")->expected(1)->capture_default_str();
    witness_cmd->add_option("--out", c.out, "Output file (default: standard output)");
    witness_cmd->add_option("--seed", c.seed, "Seed recorded with the run")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kOk : kInvalid;
    }

    std::string cmd;
    for (int i = 0; i < argc; ++i) cmd += (i ? " " : "") + std::string(argv[i]);

    try {
        validate(c);
        if (census_cmd->parsed()) {
            std::vector<Census> cs;
            for (const FieldCtx* K : fields(c)) cs.push_back(census(c.e, *K, c.jobs));
            if (c.format == "json") {
                json a = json::array();
                for (const auto& x : cs) a.push_back(io::to_json(x));
                emit(c, a.dump(2) + "\n", cmd);
            } else {
                emit(c, census_csv(cs), cmd);
            }
            return kOk;
        }
        if (verify_cmd->parsed()) {
            verify::Options o;
            o.e = c.e;
            o.qs = c.q;
            o.fit_qs = fit_q;
            o.jobs = c.jobs;
            o.poset.prec = c.precision;
            o.poset.budget = c.budget;
            const verify::SuiteReport r = verify::run_suite(suite, o);
            for (const auto& ch : r.checks)
                std::cerr << (ch.pass ? "PASS " : "FAIL ") << ch.name << (ch.detail.empty() ? "" : "  " + ch.detail) << "\n";
            emit(c, r.to_json().dump(2) + "\n", cmd);
            return r.ok() ? kOk : kFailed;
        }
        if (poset_cmd->parsed()) {
            PosetOptions o;
            o.jobs = c.jobs;
            o.lambda_only = lambda_only;
            o.m1_layer = !no_m1;
            o.model_m = model_m;
            o.prec = c.precision;
            o.budget = c.budget;
            const PosetReport p = build_poset(census(c.e, single_field(c), c.jobs), o);
            emit(c, c.format == "json" ? io::to_json(p).dump(2) + "\n" : poset_dot(p), cmd);
            for (const auto& E : p.edges)
                if (!E.ok())
                    std::cerr << "uncertified edge " << E.lower.to_string() << " -> " << E.upper.to_string() << "\n";
            return p.ok() ? kOk : kFailed;
        }
        if (deform_cmd->parsed()) {
            const PRChain ch = io::chain_from_json(read_json(chain_path));
            const FieldCtx& K = ch.field();
            auto model = [&] {
                if (!model_path.empty()) return io::model_from_json(read_json(model_path));
                require(model_c > 0 && model_c < K.q(), ErrorKind::invalid_input, "--c must be a nonzero element code");
                return ag_normal_form(K, model_m, Scalar::constant(K, static_cast<std::uint32_t>(model_c)), ch.e);
            };
            std::optional<StratumLabel> want;
            if (!target.empty()) want = StratumLabel::parse(target);
            json out;
            std::optional<FamilyChain> fam;
            if (recipe == "hodge-raise") {
                HodgeRaise h = hodge_raise(ch);
                out["trace"] = io::to_json(h.trace);
                fam = std::move(h.family);
            } else if (recipe == "linear-1" || recipe == "linear-2") {
                fam = linear_recipe(ch, recipe.back() - '0');
            } else if (recipe == "sigma-1" || recipe == "sigma-2") {
                SigmaRecipe s = sigma_recipe(model(), ch, recipe.back() - '0', c.precision);
                out["steps"] = s.steps;
                fam = std::move(s.family);
            } else if (recipe == "invert-m1") {
                fam = invert_m1(model(), ch, c.precision);
            } else {
                require(want.has_value(), ErrorKind::invalid_input, "--target is required for searches");
                SearchResult s = recipe == "search"
                                     ? search_witness(ch, *want, c.budget,
                                                      want->m1 == M1::unknown ? std::nullopt
                                                                              : std::optional<DieudonneModel>(model()))
                                     : sigma_search_witness(model(), ch, *want, c.budget, c.precision);
                out["tried"] = s.tried;
                if (!s.family) {
                    std::cerr << "NotFound: no witness into " << want->to_string() << " within " << s.tried
                              << " perturbations\n";
                    emit(c, out.dump(2) + "\n", cmd);
                    return kFailed;
                }
                out["level"] = s.level;
                fam = std::move(s.family);
            }
            out["family"] = io::to_json(*fam);
            const GenericCertificate g = generic_label(*fam);
            out["generic"] = io::to_json(g);
            const SemicontinuityAudit a = semicontinuity_audit(*fam);
            out["audit"] = io::to_json(a);
            emit(c, out.dump(2) + "\n", cmd);
            bool ok = g.determined && a.ok;
            if (want) {
                const bool match = g.label.lambda == want->lambda && g.label.T == want->T &&
                                   (want->m1 == M1::unknown || want->m1 == g.label.m1);
                if (!match) std::cerr << "generic stratum " << g.label.to_string() << " differs from the target\n";
                ok = ok && match;
            }
            if (!g.determined) std::cerr << "generic stratum not determined at this precision\n";
            if (!a.ok) std::cerr << "semicontinuity audit failed: " << a.detail << "\n";
            return ok ? kOk : kFailed;
        }
        if (fibers_cmd->parsed()) {
            std::vector<FiberReport> rs;
            for (const FieldCtx* K : fields(c)) rs.push_back(fiber_constancy(c.e, *K, c.jobs));
            bool ok = true;
            json a = json::array();
            for (const auto& r : rs) {
                ok = ok && r.constant();
                a.push_back(io::to_json(r));
            }
            emit(c, c.format == "json" ? a.dump(2) + "\n" : fibers_csv(rs), cmd);
            if (!ok) std::cerr << "fiber sizes vary within a Hodge class\n";
            return ok ? kOk : kFailed;
        }
        if (orbits_cmd->parsed()) {
            const FieldCtx& K = single_field(c);
            const auto os = orbits(c.e, K);
            json list = json::array();
            std::set<ChainSignature> sigs;
            bool separated = true;
            std::map<ChainSignature, int> seen;
            for (const auto& o : os) {
                json j{{"size", o.size}, {"representative", io::to_json(o.representative)},
                       {"label", io::to_json(stratum_label(o.representative))}};
                if (c.e >= 2) {
                    const ChainSignature s = chain_signature(o.representative);
                    j["signature"] = {{"top", s.top.to_string()}, {"below", s.below.to_string()}, {"blocks", s.blocks}};
                    if (++seen[s] > 1) separated = false;
                    sigs.insert(s);
                }
                list.push_back(j);
            }
            json out{{"e", c.e}, {"q", K.q()}, {"orbits", os.size()}, {"classes", list}};
            if (c.e >= 2) {
                out["signatures"] = sigs.size();
                out["signatures_separate_orbits"] = separated;
            }
            emit(c, out.dump(2) + "\n", cmd);
            return separated ? kOk : kFailed;
        }
        if (witness_cmd->parsed()) {
            const FieldCtx& K = FieldCtx::of_order(c.q.at(0));
            require(model_c > 0 && model_c < K.q(), ErrorKind::invalid_input, "--c must be a nonzero element code");
            const AgWitness w = ag_witness(K, model_m, Scalar::constant(K, static_cast<std::uint32_t>(model_c)));
            const StratumLabel L = full_label(w.model, w.chain);
            const FamilyChain inv = invert_m1(w.model, w.chain);
            const GenericCertificate g = generic_label(inv);
            json out{{"model", io::to_json(w.model)},
                     {"chain", io::to_json(w.chain)},
                     {"label", io::to_json(L)},
                     {"F1", io::to_json(f_one(w.model, w.chain))},
                     {"omega1_is_u3e2", w.printed_line},
                     {"invert_m1", {{"family", io::to_json(inv)}, {"generic", io::to_json(g)}}}};
            emit(c, out.dump(2) + "\n", cmd);
            return g.determined && g.label.m1 == M1::nonzero ? kOk : kFailed;
        }
    } catch (const Error& err) {
        std::cerr << err.what() << "\n";
        return exit_code(err.kind());
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kInvalid;
    }
    return kInvalid;
}
