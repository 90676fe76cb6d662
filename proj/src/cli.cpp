#include "bivar/cli.hpp"

#include "bivar/cooperational.hpp"
#include "bivar/errors.hpp"
#include "bivar/instance_io.hpp"
#include "bivar/instances.hpp"
#include "bivar/operational.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include <chrono>
#include <functional>
#include <optional>

namespace bivar {

namespace {

using ordered_json = nlohmann::ordered_json;

struct Outcome {
    ordered_json inputs = ordered_json::object();
    ordered_json result = ordered_json::object();
    std::vector<std::string> lines;
    ValidationReport violations;
};

ordered_json integers_json(const IntVector& v)
{
    ordered_json out = ordered_json::array();
    for (const auto& x : v)
        out.push_back(x.fits_slong_p() ? ordered_json(x.get_si()) : ordered_json(x.get_str()));
    return out;
}

ordered_json matrix_json(const IntMatrix& m)
{
    ordered_json out = ordered_json::array();
    for (std::size_t r = 0; r < m.rows(); ++r)
        out.push_back(integers_json(m.row(r)));
    return out;
}

ordered_json group_json(const FgAbGroup& g)
{
    return {{"free_rank", g.free_rank()}, {"torsion", integers_json(g.torsion())}};
}

template <Variance V>
ordered_json family_json(const Site& s, const Family<V>& c)
{
    ordered_json comps = ordered_json::array();
    for (const auto& [key, h] : c.components) {
        if (h.is_zero())
            continue;
        comps.push_back({{"morphism", s.morphism_name(key.first)},
                         {"grade", key.second},
                         {"matrix", matrix_json(h.canonical_matrix())}});
    }
    return comps;
}

template <typename T>
std::shared_ptr<const T> named(const std::map<std::string, std::shared_ptr<const T>>& m, const std::string& name,
                               const char* flag, const char* what)
{
    auto it = m.find(name);
    if (it == m.end())
        throw SchemaError(flag, fmt::format("no {} named '{}' in the instance", what, name));
    return it->second;
}

MorId morphism_arg(const Site& s, const std::string& name)
{
    auto m = s.find_morphism(name);
    if (!m)
        throw SchemaError("--morphism", fmt::format("no morphism named '{}' in the instance", name));
    return *m;
}

std::string verdict(const ValidationReport& r) { return r.ok() ? "PASS" : "FAIL"; }

/// Site and functor problems make every later computation meaningless.
bool prevalidate(Outcome& o, const Site& s, const std::vector<const GradedFunctor*>& functors)
{
    o.violations.merge(validate_site(s));
    for (const auto* f : functors)
        o.violations.merge(validate_functor(*f));
    return o.violations.ok();
}

template <Variance V>
void family_command(Outcome& o, const std::string& file, const std::string& fname, const std::string& mname, int degree)
{
    const InstanceBundle b = load_instance(file);
    auto F = named(b.functors, fname, "--functor", "functor");
    if (F->variance() != V)
        throw SchemaError("--functor",
                          fmt::format("functor '{}' is {}", fname, V == Variance::contra ? "covariant" : "contravariant"));
    const Site& s = *b.site;
    const MorId f = morphism_arg(s, mname);
    o.inputs = {{"file", file}, {"functor", fname}, {"morphism", mname}, {"degree", degree}};
    if (!prevalidate(o, s, {F.get()}))
        return;

    FamilyTheory<V> theory(F);
    const FamilyGroup<V>& g = theory.group(f, degree);
    const FgAbGroup& grp = g.group();
    ordered_json gens = ordered_json::array();
    for (std::size_t k = 0; k < grp.rank(); ++k) {
        const Family<V> c = g.decode(grp.from_canonical(unit_vector(grp.rank(), k)));
        o.violations.merge(theory.compatibility(c));
        gens.push_back({{"order", grp.orders()[k].get_str()}, {"components", family_json(s, c)}});
    }
    o.result["group"] = group_json(grp);
    o.result["generators"] = std::move(gens);
    o.lines.push_back(fmt::format("group: {}", grp.describe()));
    o.lines.push_back(fmt::format("generators: {}", grp.rank()));
}

void validate_command(Outcome& o, const std::string& file)
{
    const InstanceBundle b = load_instance(file);
    o.inputs = {{"file", file}};
    auto check = [&](const std::string& label, const ValidationReport& r) {
        o.result[label] = verdict(r);
        o.lines.push_back(fmt::format("{}: {}", label, verdict(r)));
        o.violations.merge(r);
    };
    check("site", validate_site(*b.site));
    for (const auto& [name, f] : b.functors)
        check("functor " + name, validate_functor(*f));
    for (const auto& [name, t] : b.transformations)
        check("transformation " + name, validate_natural(*t));
    for (const auto& [name, t] : b.theories)
        check("theory " + name, validate_axioms(*t));
    for (const auto& [name, g] : b.groth)
        check("groth " + name, validate_groth(*g));
}

void axioms_command(Outcome& o, const std::string& file, const std::string& tname)
{
    const InstanceBundle b = load_instance(file);
    auto t = named(b.theories, tname, "--theory", "theory");
    o.inputs = {{"file", file}, {"theory", tname}};
    if (!prevalidate(o, *b.site, {}))
        return;
    const ValidationReport r = validate_axioms(*t);
    o.violations.merge(r);
    o.result["clauses"] = ordered_json::array();
    for (const char* c : kAxiomClauses)
        o.result["clauses"].push_back({{"clause", c}, {"status", r.has_clause(c) ? "FAIL" : "PASS"}});
    o.lines.push_back("7 axioms + Units: " + verdict(r));
}

void groth_command(Outcome& o, const std::string& file, const std::string& gname)
{
    const InstanceBundle b = load_instance(file);
    auto g = named(b.groth, gname, "--map", "Grothendieck transformation");
    o.inputs = {{"file", file}, {"map", gname}};
    if (!prevalidate(o, *b.site, {}))
        return;
    const ValidationReport r = validate_groth(*g);
    o.violations.merge(r);
    o.result["status"] = verdict(r);
    o.lines.push_back("product, pushforward, pullback: " + verdict(r));
}

void bcoopt_command(Outcome& o, const std::string& file, const std::string& tname, const std::string& mname, int degree)
{
    const InstanceBundle b = load_instance(file);
    auto t = named(b.transformations, tname, "--nat", "natural transformation");
    if (t->src().variance() != Variance::contra || t->tgt().variance() != Variance::contra)
        throw SchemaError("--nat", fmt::format("transformation '{}' is not between contravariant functors", tname));
    const Site& s = *b.site;
    const MorId f = morphism_arg(s, mname);
    o.inputs = {{"file", file}, {"nat", tname}, {"morphism", mname}, {"degree", degree}};
    if (!prevalidate(o, s, {&t->src(), &t->tgt()}))
        return;
    o.violations.merge(validate_natural(*t));
    if (!o.violations.ok())
        return;

    BCoopT bt(t);
    const BCoopT::Slice& sl = bt.at(f, degree);
    const CoopGroup& ambient = bt.source().group(f, degree);
    const FgAbGroup& mg = sl.members.group();
    ordered_json gens = ordered_json::array();
    for (std::size_t k = 0; k < mg.rank(); ++k) {
        const IntVector x = sl.members.inclusion().apply(mg.from_canonical(unit_vector(mg.rank(), k)));
        gens.push_back({{"order", mg.orders()[k].get_str()}, {"components", family_json(s, ambient.decode(x))}});
    }
    const bool surjective = bt.componentwise_surjective();
    o.result["members"] = group_json(mg);
    o.result["generators"] = std::move(gens);
    o.result["homogeneous"] = group_json(sl.homogeneous->group());
    o.result["componentwise_surjective"] = surjective;
    o.lines.push_back(fmt::format("members: {}", mg.describe()));
    o.lines.push_back(fmt::format("homogeneous solutions: {}", sl.homogeneous->group().describe()));
    o.lines.push_back(fmt::format("componentwise surjective: {}", surjective ? "yes" : "no"));

    const ValidationReport closure = bt.closure();
    o.violations.merge(closure);
    o.result["closure"] = verdict(closure);
    o.lines.push_back("closure: " + verdict(closure));
    if (surjective) {
        const ValidationReport transfer = bt.transfer();
        o.violations.merge(transfer);
        o.result["transfer"] = verdict(transfer);
        o.lines.push_back("transfer: " + verdict(transfer));
    }
}

void demo_command(Outcome& o, int n)
{
    o.inputs = {{"instance", "subsets"}, {"n", n}};
    const InstanceBundle b = build_subsets_instance(n);
    const Site& s = *b.site;
    auto check = [&](const std::string& label, const std::function<ValidationReport()>& fn) {
        ValidationReport r = fn();
        o.result[label] = verdict(r);
        o.lines.push_back(fmt::format("{}: {}", label, verdict(r)));
        o.violations.merge(r);
    };
    auto B = b.theories.at("B");
    const GrothTransf& reduce = *b.groth.at("reduce");

    check("site", [&] { return validate_site(s); });
    check("functors and transformations", [&] {
        ValidationReport r;
        for (const auto& [name, f] : b.functors)
            r.merge(validate_functor(*f));
        for (const auto& [name, t] : b.transformations)
            r.merge(validate_natural(*t));
        return r;
    });
    check("7 axioms + Units", [&] {
        ValidationReport r;
        for (const auto& [name, t] : b.theories)
            r.merge(validate_axioms(*t));
        return r;
    });
    check("mod-2 reduction", [&] { return validate_groth(reduce); });

    const CoopTheory coop_F(b.functors.at("F"));
    const OpTheory op_h(b.functors.at("h"));
    check("co-operational theory of F", [&] { return validate_axioms(*coop_F.tabulate()); });
    check("operational theory of h", [&] { return validate_axioms(*op_h.tabulate()); });

    const OpTheory op(homology_functor(*B));
    const CoopTheory coop(cohomology_functor(*B));
    check("operational identities", [&] { return op_identities(*B, op); });
    check("co-operational identities", [&] { return coop_identities(*B, coop); });
    check("point isomorphisms", [&] {
        ValidationReport r = op_point_isomorphism(*B, op);
        r.merge(coop_point_isomorphism(*B, coop));
        return r;
    });
    check("hat transformations", [&] {
        ValidationReport r;
        for (HatTarget mode : {HatTarget::image, HatTarget::full}) {
            r.merge(hat_gamma_op(reduce, mode).report);
            r.merge(hat_gamma_coop(reduce, mode).report);
        }
        return r;
    });

    const BCoopT bt(b.transformations.at("T"));
    check("B^coop_T closure", [&] { return bt.closure(); });
    check("B^coop_T transfer", [&] {
        ValidationReport r;
        if (!bt.componentwise_surjective())
            r.add("transfer", "reduction is not componentwise surjective");
        r.merge(bt.transfer());
        return r;
    });
    check("cup products", [&] {
        ValidationReport r = ring_structure(*B);
        for (ObjId x = 0; x < s.object_count(); ++x) {
            const FgAbGroup& g = B->group(s.identity(x), 0);
            for (std::size_t k = 0; k < g.ngens(); ++k)
                r.merge(check_cup(*B, coop, x, 0, unit_vector(g.ngens(), k)));
        }
        r.merge(cup_transfer(reduce));
        return r;
    });
    check("square operation", [&] {
        const ObjId top = s.object_count() - 1;
        const MapFamily sq = power_family(*B, coop, top, 2);
        ValidationReport r = map_family_naturality(coop, sq);
        if (!non_additivity_witness(coop, sq))
            r.add("non-additivity", "x -> x^2 is additive on every generator pair");
        return r;
    });
    check("Adams-like family", [&] {
        ValidationReport r;
        for (int k = 1; k <= 3; ++k) {
            const GradedInstance gi = build_graded_instance(k);
            if (!gi.theory->group(gi.psi.base, 0).encode(gi.psi))
                r.add("psi", fmt::format("k = {}: family is not a class over id", k));
            r.merge(gi.theory->compatibility(gi.psi));
            Integer scale = 1;
            for (int m = 0; m <= 4; m += 2) {
                const GroupHom c = gi.theory->component(gi.psi, gi.psi.base, m);
                if (!(c.canonical_matrix() == GroupHom::scalar(c.src(), scale).canonical_matrix()))
                    r.add("psi", fmt::format("k = {}: grade {} component is not {}", k, m, scale.get_str()));
                scale *= k;
            }
        }
        return r;
    });
}

int emit(const std::string& command, const Outcome& o, bool as_json, std::optional<double> ms, std::ostream& out)
{
    if (as_json) {
        ordered_json j;
        j["command"] = command;
        j["inputs"] = o.inputs;
        j["result"] = o.result;
        j["violations"] = ordered_json::array();
        for (const auto& v : o.violations.violations())
            j["violations"].push_back({{"clause", v.clause}, {"witness", v.witness}});
        j["timing_ms"] = ms ? ordered_json(*ms) : ordered_json(nullptr);
        out << j.dump(2) << "\n";
    } else {
        for (const auto& l : o.lines)
            out << l << "\n";
        for (const auto& v : o.violations.violations())
            out << "violation " << v.clause << ": " << v.witness << "\n";
        out << (o.violations.ok() ? "result: PASS" : fmt::format("result: FAIL ({} violations)", o.violations.size()))
            << "\n";
        if (ms)
            out << fmt::format("timing: {:.3f} ms\n", *ms);
    }
    return o.violations.ok() ? kExitOk : kExitViolation;
}

}  // namespace

int cli_run(std::span<const std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Bivariant theory workbench", "bivar"};
    app.require_subcommand(1);
    app.fallthrough();
    bool as_json = false;
    bool timing = false;
    app.add_flag("--json", as_json, "Machine-readable report");
    app.add_flag("--timing", timing, "Report wall-clock time");

    std::string file, functor, morphism, theory, map, nat, instance, mutate;
    int degree = 0;
    int n = 2;

    auto* validate = app.add_subcommand("validate", "Check every component of an instance file");
    validate->add_option("file", file)->required();

    auto* coop = app.add_subcommand("coop", "Co-operational group over a morphism");
    coop->add_option("file", file)->required();
    coop->add_option("--functor", functor)->required();
    coop->add_option("--morphism", morphism)->required();
    coop->add_option("--degree", degree)->required();

    auto* op = app.add_subcommand("op", "Operational group over a morphism");
    op->add_option("file", file)->required();
    op->add_option("--functor", functor)->required();
    op->add_option("--morphism", morphism)->required();
    op->add_option("--degree", degree)->required();

    auto* axioms = app.add_subcommand("axioms", "Check the seven axioms and units of a theory");
    axioms->add_option("file", file)->required();
    axioms->add_option("--theory", theory)->required();

    auto* groth = app.add_subcommand("groth", "Check a Grothendieck transformation");
    groth->add_option("file", file)->required();
    groth->add_option("--map", map)->required();

    auto* bcoopt = app.add_subcommand("bcoopt", "Classes that descend along a natural transformation");
    bcoopt->add_option("file", file)->required();
    bcoopt->add_option("--nat", nat)->required();
    bcoopt->add_option("--morphism", morphism)->required();
    bcoopt->add_option("--degree", degree)->required();

    auto* demo = app.add_subcommand("demo", "Run the bundled suite");
    demo->add_option("instance", instance)->required()->check(CLI::IsMember({"subsets"}));
    demo->add_option("--n", n, "Size of the base set")->check(CLI::Range(1, 3));

    auto* exp = app.add_subcommand("export", "Write a bundled instance as an instance file");
    exp->add_option("instance", instance)->required()->check(CLI::IsMember({"subsets", "terminal"}));
    exp->add_option("--n", n, "Size of the base set")->check(CLI::Range(1, 3));
    exp->add_option("--mutate", mutate, "Break one clause of theory B");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        if (sub == exp) {
            InstanceBundle b;
            if (instance == "terminal") {
                b = build_terminal_instance();
            } else {
                b = build_subsets_instance(n);
                if (!mutate.empty()) {
                    b.theories = {{"B", mutate_subsets_theory(*b.theories.at("B"), mutate)}};
                    b.groth.clear();
                }
            }
            out << serialize_instance(b);
            return kExitOk;
        }
        if (sub == validate)
            validate_command(o, file);
        else if (sub == coop)
            family_command<Variance::contra>(o, file, functor, morphism, degree);
        else if (sub == op)
            family_command<Variance::cov>(o, file, functor, morphism, degree);
        else if (sub == axioms)
            axioms_command(o, file, theory);
        else if (sub == groth)
            groth_command(o, file, map);
        else if (sub == bcoopt)
            bcoopt_command(o, file, nat, morphism, degree);
        else if (sub == demo)
            demo_command(o, n);
    } catch (const SchemaError& e) {
        err << "schema error at " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
    std::optional<double> ms;
    if (timing)
        ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return emit(command, o, as_json, ms, out);
}

}  // namespace bivar
