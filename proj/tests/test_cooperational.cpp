#include "bivar/cooperational.hpp"
#include "bivar/errors.hpp"
#include "bivar/instances.hpp"
#include "family_oracle.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace bivar;
using namespace bivar::testing;

namespace {

CoopClass random_class(const CoopTheory& t, MorId f, std::mt19937_64& rng)
{
    const CoopGroup& g = t.group(f, 0);
    return g.decode(random_vector(rng, g.group().ngens()));
}

std::shared_ptr<GrothTransf> scalar_transf(std::shared_ptr<const TabulatedBivTheory> b, long k)
{
    auto g = std::make_shared<GrothTransf>(b, b);
    for (MorId f = 0; f < b->site()->morphism_count(); ++f)
        g->set_component(f, 0, GroupHom::scalar(b->group(f, 0), k));
    return g;
}

/// Same groups and maps as F, on another site with the same ids.
std::shared_ptr<GradedFunctor> rehome(const GradedFunctor& F, std::shared_ptr<const Site> site)
{
    auto G = std::make_shared<GradedFunctor>(site, F.variance(), F.window());
    for (ObjId x = 0; x < site->object_count(); ++x)
        for (int m = F.window().lo; m <= F.window().hi; ++m)
            G->set_group(x, m, F.group(x, m));
    for (MorId g = 0; g < site->morphism_count(); ++g)
        for (int m = F.window().lo; m <= F.window().hi; ++m)
            if (F.has_map(g, m))
                G->set_map(g, m, F.map(g, m));
    return G;
}

std::shared_ptr<NaturalTransf> identity_transf(std::shared_ptr<const GradedFunctor> F)
{
    auto t = std::make_shared<NaturalTransf>(F, F);
    for (ObjId x = 0; x < F->site()->object_count(); ++x)
        t->set_component(x, 0, GroupHom::identity(F->group(x, 0)));
    return t;
}

/// Every element of a finite group given by its canonical coordinates.
std::vector<IntVector> all_elements(const FgAbGroup& g)
{
    REQUIRE(g.is_finite());
    std::vector<IntVector> out{IntVector{}};
    for (std::size_t k = 0; k < g.rank(); ++k) {
        std::vector<IntVector> next;
        for (const auto& v : out)
            for (Integer a = 0; a < g.orders()[k]; ++a) {
                IntVector w = v;
                w.push_back(a);
                next.push_back(w);
            }
        out = std::move(next);
    }
    for (auto& v : out)
        v = g.from_canonical(v);
    return out;
}

IntVector pointwise(const IntVector& a, const IntVector& b)
{
    IntVector out;
    for (std::size_t k = 0; k < a.size(); ++k)
        out.push_back(a[k] * b[k]);
    return out;
}

}  // namespace

TEST_CASE("co-operational group on the terminal site is Z")
{
    const InstanceBundle t = build_terminal_instance();
    CoopTheory coop(t.functors.at("F"));
    const FgAbGroup& g = coop_group(coop, 0, 0).group();
    CHECK(g.free_rank() == 1);
    CHECK(g.torsion().empty());
}

TEST_CASE("the constant presheaf gives Z over id_U")
{
    auto s = subsets_site(2);
    auto F = std::make_shared<GradedFunctor>(s, Variance::contra, GradeWindow{0, 0});
    for (ObjId x = 0; x < s->object_count(); ++x)
        F->set_group(x, 0, FgAbGroup::free(1));
    for (MorId g = 0; g < s->morphism_count(); ++g)
        F->set_map(g, 0, GroupHom::identity(FgAbGroup::free(1)));
    REQUIRE(validate_functor(*F).ok());
    CoopTheory coop(F);
    const FgAbGroup& g = coop.group(s->identity(3), 0).group();
    CHECK(g.free_rank() == 1);
    CHECK(g.torsion().empty());
}

TEST_CASE("co-operational groups match the brute-force constraint kernel")
{
    for (int n = 1; n <= 2; ++n) {
        const InstanceBundle b = build_subsets_instance(n);
        const Site& s = *b.site;
        CoopTheory coop(b.functors.at("F"));
        for (MorId f = 0; f < s.morphism_count(); ++f) {
            INFO(s.describe(f));
            const OracleSystem sys = oracle_system(s, f, true);
            const std::size_t dim = sys.unknowns - rational_rank(sys.rows, sys.unknowns);
            const CoopGroup& G = coop.group(f, 0);
            CHECK(G.group().free_rank() == dim);
            CHECK(G.group().torsion().empty());

            std::vector<std::vector<Integer>> gens;
            for (std::size_t k = 0; k < G.group().ngens(); ++k) {
                const CoopClass c = G.generator(k);
                CHECK(coop.compatibility(c).ok());
                gens.push_back(flatten(sys, c));
                CHECK(satisfies(sys, gens.back()));
            }
            if (gens.size() == dim)
                CHECK(maximal_minor_gcd(gens) == 1);

            for (const auto& v : rational_kernel(sys.rows, sys.unknowns)) {
                const auto x = G.encode(unflatten(coop, sys, f, v));
                REQUIRE(x);
                CHECK(flatten(sys, G.decode(*x)) == v);
            }
        }
    }
}

TEST_CASE("named groups on SUBSETS(2)")
{
    const InstanceBundle b = build_subsets_instance(2);
    CoopTheory coop(b.functors.at("F"));
    const FgAbGroup& over_inc = coop.group(inclusion(*b.site, 1, 3), 0).group();
    CHECK(over_inc.free_rank() == 1);
    const FgAbGroup& over_id = coop.group(b.site->identity(3), 0).group();
    CHECK(over_id.free_rank() == 2);
    CHECK(over_id.torsion().empty());
}

TEST_CASE("operations on co-operational classes")
{
    std::mt19937_64 rng(17);
    const InstanceBundle b = build_subsets_instance(3);
    const Site& s = *b.site;
    CoopTheory coop(b.functors.at("F"));
    for (int trial = 0; trial < 40; ++trial) {
        const MorId f = std::uniform_int_distribution<MorId>(0, s.morphism_count() - 1)(rng);
        const CoopClass c = random_class(coop, f, rng);
        CHECK(coop.equal(coop.product(c, coop.unit(s.tgt(f))), c));
        CHECK(coop.equal(coop.product(coop.unit(s.src(f)), c), c));
        CHECK(coop.equal(coop.pushforward(s.identity(s.src(f)), f, c), c));
        CHECK(coop.equal(coop.pullback(s.identity(s.tgt(f)), c), c));

        // (c . d) . e = c . (d . e) for all generator triples on a random chain.
        const auto& gs = s.morphisms_from(s.tgt(f));
        const MorId g = gs[rng() % gs.size()];
        const auto& hs = s.morphisms_from(s.tgt(g));
        const MorId h = hs[rng() % hs.size()];
        const CoopGroup& Gf = coop.group(f, 0);
        const CoopGroup& Gg = coop.group(g, 0);
        const CoopGroup& Gh = coop.group(h, 0);
        for (std::size_t p = 0; p < Gf.group().ngens(); ++p)
            for (std::size_t q = 0; q < Gg.group().ngens(); ++q)
                for (std::size_t r = 0; r < Gh.group().ngens(); ++r) {
                    const CoopClass cp = Gf.generator(p), dq = Gg.generator(q), er = Gh.generator(r);
                    CHECK(coop.equal(coop.product(coop.product(cp, dq), er), coop.product(cp, coop.product(dq, er))));
                }
    }
}

TEST_CASE("co-operational pushforward does not need confined morphisms")
{
    const InstanceBundle b = build_subsets_instance(2);
    SiteData d = b.site->data();
    for (MorId m = 0; m < d.morphisms.size(); ++m)
        d.confined[m] = d.identities[d.morphisms[m].src] == m;
    auto s = std::make_shared<const Site>(d);
    CoopTheory coop(rehome(*b.functors.at("F"), s));
    const MorId inc = inclusion(*s, 1, 3);
    const CoopClass c = coop.group(inc, 0).generator(0);
    const CoopClass pushed = coop.pushforward(inc, s->identity(3), c);
    CHECK(coop.compatibility(pushed).ok());
    CHECK(coop.group(s->identity(3), 0).encode(pushed));

    TabulatedBivTheory zero(s, {0, 0});
    CHECK_THROWS_AS(make_coop_bridge(std::make_shared<const TabulatedBivTheory>(zero)), NotConfined);
}

TEST_CASE("products leaving the degree window are rejected")
{
    const GradedInstance gi = build_graded_instance(2);
    const Site& s = *gi.bundle.site;
    CoopClass c, d;
    c.base = d.base = s.identity(3);
    c.degree = 3;
    d.degree = 2;
    CHECK_THROWS_AS(gi.theory->product(c, d), DegreeOverflow);
    d.degree = -1;
    CHECK_NOTHROW(gi.theory->product(c, d));
}

TEST_CASE("coop of a bivariant class")
{
    std::mt19937_64 rng(23);
    const InstanceBundle bundle = build_subsets_instance(2);
    const TabulatedBivTheory& B = *bundle.theories.at("B");
    const Site& s = *bundle.site;
    CoopTheory coop(cohomology_functor(B));
    for (ObjId x = 0; x < s.object_count(); ++x) {
        const CoopClass u = coop_from_bivariant(B, coop, s.identity(x), 0, B.unit(x));
        CHECK(coop.equal(u, coop.unit(x)));
    }
    const MorId idU = s.identity(3);
    const CoopClass zero = coop_from_bivariant(B, coop, idU, 0, {Integer(0), Integer(0)});
    for (const auto& [key, h] : zero.components)
        CHECK(h.is_zero());

    const IntVector e0{Integer(1), Integer(0)};
    const CoopClass c = coop_from_bivariant(B, coop, idU, 0, e0);
    for (MorId g : s.morphisms_into(3)) {
        const unsigned Y = static_cast<unsigned>(s.src(g));
        const std::vector<unsigned> el = elements(Y);
        IntVector restricted;
        for (unsigned k : el)
            restricted.push_back(k == 0 ? Integer(1) : Integer(0));
        const IntVector x = random_vector(rng, el.size());
        CHECK(coop.component(c, g, 0).apply(x) == pointwise(x, restricted));
    }
}

TEST_CASE("coop identities and the point isomorphism on bundled instances")
{
    for (int n = 1; n <= 2; ++n) {
        const InstanceBundle bundle = build_subsets_instance(n);
        for (const auto& [name, Bp] : bundle.theories) {
            INFO(name << " n=" << n);
            CoopTheory coop(cohomology_functor(*Bp));
            const ValidationReport ids = coop_identities(*Bp, coop);
            CHECK_MESSAGE(ids.ok(), ids.to_text());
            const ValidationReport pt = coop_point_isomorphism(*Bp, coop);
            CHECK_MESSAGE(pt.ok(), pt.to_text());
        }
    }
}

TEST_CASE("tabulated co-operational theories satisfy the axioms")
{
    const InstanceBundle b = build_subsets_instance(2);
    for (const char* name : {"F", "F2"}) {
        INFO(name);
        CoopTheory coop(b.functors.at(name));
        const ValidationReport r = validate_axioms(*coop.tabulate());
        CHECK_MESSAGE(r.ok(), r.to_text());
    }
}

TEST_CASE("induced maps on hat-coop")
{
    const InstanceBundle b = build_subsets_instance(2);
    auto B = b.theories.at("B");
    const HatGammaResult id = hat_gamma_coop(*scalar_transf(B, 1));
    CHECK(id.report.ok());
    REQUIRE(id.map);
    for (MorId f = 0; f < b.site->morphism_count(); ++f) {
        const GroupHom c = id.map->component(f, 0);
        CHECK(c.canonical_matrix() == GroupHom::identity(c.src()).canonical_matrix());
    }
    for (HatTarget mode : {HatTarget::image, HatTarget::full}) {
        const HatGammaResult red = hat_gamma_coop(*b.groth.at("reduce"), mode);
        CHECK_MESSAGE(red.report.ok(), red.report.to_text());
        REQUIRE(red.map);
        CHECK(validate_groth(*red.map).ok());
    }
    CHECK_THROWS_AS(hat_gamma_coop(*scalar_transf(B, 2)), InvalidTransformation);

    auto zero = std::make_shared<const TabulatedBivTheory>(b.site, GradeWindow{0, 0});
    CHECK(hat_gamma_coop(GrothTransf(zero, B), HatTarget::full).report.has_clause("contravariant-surjective"));
}

TEST_CASE("B^coop_T for the identity and for a map into zero")
{
    std::mt19937_64 rng(29);
    const InstanceBundle b = build_subsets_instance(2);
    const Site& s = *b.site;
    auto F = b.functors.at("F");

    BCoopT id(identity_transf(F));
    auto Z = std::make_shared<GradedFunctor>(b.site, Variance::contra, GradeWindow{0, 0});
    BCoopT to_zero(std::make_shared<NaturalTransf>(F, Z));
    for (MorId f = 0; f < s.morphism_count(); ++f) {
        const FgAbGroup& full = id.source().group(f, 0).group();
        CHECK(id.at(f, 0).members.group().isomorphic(full));
        CHECK(to_zero.at(f, 0).members.group().isomorphic(full));
        const CoopClass c = random_class(id.source(), f, rng);
        CHECK(id.is_member(c));
        const TransferSolutions sol = id.gamma_T(c);
        REQUIRE(sol.unique());
        CHECK(id.target().equal(id.target().group(f, 0).decode(sol.particular), c));

        const TransferSolutions z = to_zero.gamma_T(c);
        CHECK(z.unique());
        CHECK(is_zero(z.particular));
    }
    CHECK(id.closure().ok());
    CHECK(id.transfer().ok());
}

TEST_CASE("B^coop_T for mod-2 reduction agrees with a brute-force joint solve")
{
    std::mt19937_64 rng(31);
    const InstanceBundle b = build_subsets_instance(2);
    const Site& s = *b.site;
    BCoopT bt(b.transformations.at("T"));
    CHECK(bt.componentwise_surjective());
    for (MorId f = 0; f < s.morphism_count(); ++f) {
        INFO(s.describe(f));
        const CoopGroup& GF = bt.source().group(f, 0);
        const CoopGroup& GG = bt.target().group(f, 0);
        const std::vector<IntVector> targets = all_elements(GG.group());
        auto agrees_mod2 = [&](const CoopClass& c, const CoopClass& d) {
            for (MorId g : s.morphisms_into(s.tgt(f))) {
                const IntMatrix a = bt.source().component(c, g, 0).matrix();
                const IntMatrix e = bt.target().component(d, g, 0).matrix();
                for (std::size_t r = 0; r < a.rows(); ++r)
                    for (std::size_t q = 0; q < a.cols(); ++q) {
                        const Integer diff = a(r, q) - e(r, q);
                        if (diff % 2 != 0)
                            return false;
                    }
            }
            return true;
        };
        std::vector<IntVector> samples;
        for (std::size_t k = 0; k < GF.group().ngens(); ++k)
            samples.push_back(unit_vector(GF.group().ngens(), k));
        for (int t = 0; t < 5; ++t)
            samples.push_back(random_vector(rng, GF.group().ngens()));
        for (const auto& x : samples) {
            const CoopClass c = GF.decode(x);
            std::vector<IntVector> sols;
            for (const auto& y : targets)
                if (agrees_mod2(c, GG.decode(y)))
                    sols.push_back(y);
            CHECK(bt.is_member(c) == !sols.empty());
            const TransferSolutions sol = bt.gamma_T(c);
            CHECK(sol.exists == !sols.empty());
            if (sol.exists) {
                CHECK(sol.unique());
                REQUIRE(sols.size() == 1);
                CHECK(GG.group().equal(sol.particular, sols.front()));
                CHECK(bt.intertwines(c, GG.decode(sols.front())));
            }
        }
    }
    const ValidationReport closure = bt.closure();
    CHECK_MESSAGE(closure.ok(), closure.to_text());
    const ValidationReport transfer = bt.transfer();
    CHECK_MESSAGE(transfer.ok(), transfer.to_text());
}

TEST_CASE("cup classes")
{
    const InstanceBundle b = build_subsets_instance(2);
    const TabulatedBivTheory& B = *b.theories.at("B");
    const Site& s = *b.site;
    CoopTheory coop(cohomology_functor(B));
    CHECK(ring_structure(B).ok());

    for (ObjId x = 0; x < s.object_count(); ++x) {
        CHECK(coop.equal(cup_class(B, coop, x, 0, B.unit(x)), coop.unit(x)));
        for (std::size_t k = 0; k < B.group(s.identity(x), 0).ngens(); ++k)
            CHECK(check_cup(B, coop, x, 0, unit_vector(B.group(s.identity(x), 0).ngens(), k)).ok());
    }
    const IntVector e0{Integer(1), Integer(0)};
    const CoopClass c = cup_class(B, coop, 3, 0, e0);
    CHECK(coop.component(c, s.identity(3), 0).apply(e0) == e0);

    const ValidationReport t = cup_transfer(*b.groth.at("reduce"));
    CHECK_MESSAGE(t.ok(), t.to_text());

    auto broken = mutate_subsets_theory(B, "Units");
    CHECK(ring_structure(*broken).has_clause("ring-unit"));
    CoopTheory coop_broken(cohomology_functor(*broken));
    CHECK_THROWS_AS(cup_class(*broken, coop_broken, 3, 0, e0), MissingRingStructure);
}

TEST_CASE("the square operation is natural but not additive")
{
    const InstanceBundle b = build_subsets_instance(2);
    const TabulatedBivTheory& B = *b.theories.at("B");
    CoopTheory coop(cohomology_functor(B));

    const MapFamily sq = power_family(B, coop, 3, 2);
    CHECK(map_family_naturality(coop, sq).ok());
    const auto w = non_additivity_witness(coop, sq);
    REQUIRE(w);
    const IntVector sum = w->x + w->y;
    CHECK(w->of_sum == pointwise(sum, sum));
    CHECK(w->sum_of == pointwise(w->x, w->x) + pointwise(w->y, w->y));
    CHECK(w->of_sum != w->sum_of);

    const MapFamily one = power_family(B, coop, 3, 1);
    CHECK(map_family_naturality(coop, one).ok());
    CHECK_FALSE(non_additivity_witness(coop, one));

    // x = y = e0: (2 e0)^2 = 4 e0 but e0^2 + e0^2 = 2 e0.
    const auto& c = sq.components.at({b.site->identity(3), 0});
    const IntVector e0{Integer(1), Integer(0)};
    CHECK(c(e0 + e0) == IntVector{Integer(4), Integer(0)});
    CHECK(c(e0) + c(e0) == IntVector{Integer(2), Integer(0)});
}
