#include "bivar/instances.hpp"

#include "bivar/errors.hpp"

#include <fmt/core.h>

#include <bit>

namespace bivar {

namespace {

std::vector<unsigned> elements_of(unsigned mask)
{
    std::vector<unsigned> out;
    for (unsigned k = 0; mask >> k; ++k)
        if (mask >> k & 1u)
            out.push_back(k);
    return out;
}

std::size_t size_of(unsigned mask) { return static_cast<std::size_t>(std::popcount(mask)); }

/// Position of element k inside the sorted elements of mask.
std::size_t slot_of(unsigned mask, unsigned k) { return static_cast<std::size_t>(std::popcount(mask & ((1u << k) - 1))); }

/// Z^big -> Z^small (or its mod-2 version) keeping the coordinates of small.
IntMatrix restriction(unsigned big, unsigned small)
{
    IntMatrix m(size_of(small), size_of(big));
    for (unsigned k : elements_of(small))
        m(slot_of(small, k), slot_of(big, k)) = 1;
    return m;
}

IntMatrix extension(unsigned small, unsigned big) { return restriction(big, small).transpose(); }

FgAbGroup coefficient_group(unsigned mask, int modulus)
{
    const std::size_t n = size_of(mask);
    if (modulus == 0)
        return FgAbGroup::free(n);
    return FgAbGroup::from_invariants(0, std::vector<Integer>(n, Integer(modulus)));
}

struct SubsetsIndex {
    std::shared_ptr<const Site> site;
    std::vector<unsigned> src_mask;
    std::vector<unsigned> tgt_mask;
};

SubsetsIndex index_of(std::shared_ptr<const Site> site)
{
    SubsetsIndex ix{std::move(site), {}, {}};
    // Object x has bitmask x by construction.
    for (MorId m = 0; m < ix.site->morphism_count(); ++m) {
        ix.src_mask.push_back(static_cast<unsigned>(ix.site->src(m)));
        ix.tgt_mask.push_back(static_cast<unsigned>(ix.site->tgt(m)));
    }
    return ix;
}

std::shared_ptr<GradedFunctor> presheaf(const SubsetsIndex& ix, int modulus, GradeWindow window,
                                        const std::vector<int>& grades)
{
    auto F = std::make_shared<GradedFunctor>(ix.site, Variance::contra, window);
    for (ObjId x = 0; x < ix.site->object_count(); ++x)
        for (int m : grades)
            F->set_group(x, m, coefficient_group(static_cast<unsigned>(x), modulus));
    for (MorId g = 0; g < ix.site->morphism_count(); ++g)
        for (int m : grades)
            F->set_map(g, m,
                       GroupHom(F->group(ix.tgt_mask[g], m), F->group(ix.src_mask[g], m),
                                restriction(ix.tgt_mask[g], ix.src_mask[g])));
    return F;
}

std::shared_ptr<GradedFunctor> copresheaf(const SubsetsIndex& ix, int modulus)
{
    auto h = std::make_shared<GradedFunctor>(ix.site, Variance::cov, GradeWindow{0, 0});
    for (ObjId x = 0; x < ix.site->object_count(); ++x)
        h->set_group(x, 0, coefficient_group(static_cast<unsigned>(x), modulus));
    for (MorId k = 0; k < ix.site->morphism_count(); ++k)
        h->set_map(k, 0,
                   GroupHom(h->group(ix.src_mask[k], 0), h->group(ix.tgt_mask[k], 0),
                            extension(ix.src_mask[k], ix.tgt_mask[k])));
    return h;
}

std::shared_ptr<TabulatedBivTheory> pointwise_theory(const SubsetsIndex& ix, int modulus)
{
    const Site& s = *ix.site;
    auto b = std::make_shared<TabulatedBivTheory>(ix.site, GradeWindow{0, 0});
    const std::size_t nm = s.morphism_count();
    for (MorId f = 0; f < nm; ++f)
        b->set_group(f, 0, coefficient_group(ix.src_mask[f], modulus));

    // e_s . e_t = e_s when s = t, for e_s in Z^S and e_t in Z^T with S in T.
    for (MorId f = 0; f < nm; ++f)
        for (MorId g : s.morphisms_from(s.tgt(f))) {
            const unsigned S = ix.src_mask[f];
            const unsigned T = ix.src_mask[g];
            const std::size_t nb = size_of(T);
            IntMatrix table(size_of(S), size_of(S) * nb);
            for (unsigned k : elements_of(S))
                table(slot_of(S, k), slot_of(S, k) * nb + slot_of(T, k)) = 1;
            b->set_product(f, g, 0, 0, std::move(table));
        }
    for (MorId f = 0; f < nm; ++f)
        for (MorId ctx : s.morphisms_from(s.tgt(f))) {
            const MorId cf = s.compose(ctx, f);
            b->set_pushforward(f, ctx, 0,
                               GroupHom(b->group(cf, 0), b->group(ctx, 0), extension(ix.src_mask[f], ix.tgt_mask[f])));
        }
    for (MorId f = 0; f < nm; ++f)
        for (MorId g : s.morphisms_into(s.tgt(f))) {
            const MorId fp = s.pullback(f, g).f_prime;
            b->set_pullback(f, g, 0,
                            GroupHom(b->group(f, 0), b->group(fp, 0), restriction(ix.src_mask[f], ix.src_mask[fp])));
        }
    for (ObjId x = 0; x < s.object_count(); ++x) {
        IntVector one(size_of(static_cast<unsigned>(x)), Integer(1));
        b->set_unit(x, std::move(one));
    }
    return b;
}

MorId find_or_throw(const Site& s, const std::string& name)
{
    auto m = s.find_morphism(name);
    if (!m)
        throw Error("missing morphism " + name);
    return *m;
}

}  // namespace

std::string subset_name(unsigned mask)
{
    std::string out = "{";
    bool first = true;
    for (unsigned k : elements_of(mask)) {
        if (!first)
            out += ",";
        out += std::to_string(k);
        first = false;
    }
    return out + "}";
}

std::shared_ptr<const Site> subsets_site(int n)
{
    if (n < 0 || n > 4)
        throw Error(fmt::format("subset lattice of size {} is out of range", n));
    const unsigned count = 1u << n;
    SiteData d;
    for (unsigned x = 0; x < count; ++x)
        d.objects.push_back(subset_name(x));
    std::map<std::pair<unsigned, unsigned>, MorId> inc;
    d.identities.resize(count);
    for (unsigned S = 0; S < count; ++S)
        for (unsigned T = 0; T < count; ++T) {
            if ((S & T) != S)
                continue;
            const MorId id = d.morphisms.size();
            const std::string name = S == T ? "id_" + subset_name(S) : subset_name(S) + "->" + subset_name(T);
            d.morphisms.push_back({name, S, T});
            inc[{S, T}] = id;
            if (S == T)
                d.identities[S] = id;
        }
    for (const auto& [st, f] : inc)
        for (const auto& [tw, g] : inc)
            if (st.second == tw.first)
                d.composition[{g, f}] = inc.at({st.first, tw.second});
    d.confined.assign(d.morphisms.size(), true);
    for (const auto& [st, f] : inc)
        for (const auto& [ut, g] : inc) {
            if (st.second != ut.second)
                continue;
            const unsigned apex = st.first & ut.first;
            d.pullbacks[{f, g}] = PullbackSquare{f, g, apex, inc.at({apex, st.first}), inc.at({apex, ut.first})};
        }
    d.final_object = count - 1;
    return std::make_shared<const Site>(std::move(d));
}

InstanceBundle build_subsets_instance(int n)
{
    if (n < 1 || n > 3)
        throw Error(fmt::format("SUBSETS({}) is out of range; use 1, 2 or 3", n));
    InstanceBundle out;
    out.site = subsets_site(n);
    const SubsetsIndex ix = index_of(out.site);

    auto F = presheaf(ix, 0, {0, 0}, {0});
    auto F2 = presheaf(ix, 2, {0, 0}, {0});
    auto h = copresheaf(ix, 0);
    auto h2 = copresheaf(ix, 2);
    out.functors = {{"F", F}, {"F2", F2}, {"h", h}, {"h2", h2}};

    auto T = std::make_shared<NaturalTransf>(F, F2);
    auto Th = std::make_shared<NaturalTransf>(h, h2);
    for (ObjId x = 0; x < out.site->object_count(); ++x) {
        const std::size_t k = size_of(static_cast<unsigned>(x));
        T->set_component(x, 0, GroupHom(F->group(x, 0), F2->group(x, 0), IntMatrix::identity(k)));
        Th->set_component(x, 0, GroupHom(h->group(x, 0), h2->group(x, 0), IntMatrix::identity(k)));
    }
    out.transformations = {{"T", T}, {"Th", Th}};

    auto B = pointwise_theory(ix, 0);
    auto B2 = pointwise_theory(ix, 2);
    out.theories = {{"B", B}, {"B2", B2}};

    auto reduce = std::make_shared<GrothTransf>(B, B2);
    for (MorId f = 0; f < out.site->morphism_count(); ++f)
        reduce->set_component(f, 0, GroupHom(B->group(f, 0), B2->group(f, 0), IntMatrix::identity(B->group(f, 0).ngens())));
    out.groth = {{"reduce", reduce}};
    return out;
}

InstanceBundle build_terminal_instance()
{
    SiteData d;
    d.objects = {"pt"};
    d.morphisms = {{"id_pt", 0, 0}};
    d.identities = {0};
    d.composition[{0, 0}] = 0;
    d.confined = {true};
    d.pullbacks[{0, 0}] = PullbackSquare{0, 0, 0, 0, 0};
    d.final_object = 0;
    InstanceBundle out;
    out.site = std::make_shared<const Site>(std::move(d));

    auto F = std::make_shared<GradedFunctor>(out.site, Variance::contra, GradeWindow{0, 0});
    F->set_group(0, 0, FgAbGroup::free(1));
    auto h = std::make_shared<GradedFunctor>(out.site, Variance::cov, GradeWindow{0, 0});
    h->set_group(0, 0, FgAbGroup::free(1));
    out.functors = {{"F", F}, {"h", h}};

    auto B = std::make_shared<TabulatedBivTheory>(out.site, GradeWindow{0, 0});
    B->set_group(0, 0, FgAbGroup::free(1));
    B->set_product(0, 0, 0, 0, IntMatrix{{1}});
    B->set_unit(0, {Integer(1)});
    out.theories = {{"B", B}};
    return out;
}

std::shared_ptr<TabulatedBivTheory> mutate_subsets_theory(const TabulatedBivTheory& b, const std::string& clause)
{
    const Site& s = *b.site();
    auto out = std::make_shared<TabulatedBivTheory>(b);
    auto mor = [&](const std::string& name) { return find_or_throw(s, name); };
    auto twice = [](const GroupHom& h) { return compose(GroupHom::scalar(h.tgt(), 2), h); };
    const MorId id0 = mor("id_{0}");
    const MorId idU = mor("id_{0,1}");
    const MorId inc0 = mor("{0}->{0,1}");

    if (clause == "Units") {
        const ObjId u = *s.find_object("{0,1}");
        out->set_unit(u, zero_vector(b.group(idU, 0).ngens()));
    } else if (clause == "A1") {
        const IntMatrix t = b.product_table(id0, id0, 0, 0);
        out->set_product(id0, id0, 0, 0, t + t);
    } else if (clause == "A2") {
        out->set_pushforward(id0, id0, 0, twice(b.pushforward(id0, id0, 0)));
    } else if (clause == "A3") {
        out->set_pullback(id0, id0, 0, twice(b.pullback(id0, id0, 0)));
    } else if (clause == "A12") {
        out->set_pushforward(id0, inc0, 0, twice(b.pushforward(id0, inc0, 0)));
    } else if (clause == "A13") {
        out->set_pullback(idU, inc0, 0, twice(b.pullback(idU, inc0, 0)));
    } else if (clause == "A23") {
        out->set_pullback(inc0, inc0, 0, twice(b.pullback(inc0, inc0, 0)));
    } else if (clause == "A123") {
        out->set_pushforward(inc0, idU, 0, twice(b.pushforward(inc0, idU, 0)));
    } else {
        throw Error("unknown axiom clause '" + clause + "'");
    }
    return out;
}

GradedInstance build_graded_instance(int k)
{
    GradedInstance out;
    out.k = k;
    out.bundle.site = subsets_site(2);
    const SubsetsIndex ix = index_of(out.bundle.site);
    auto F = presheaf(ix, 0, {0, 4}, {0, 2, 4});
    out.bundle.functors = {{"F", F}};
    auto theory = std::make_shared<CoopTheory>(F);
    out.theory = theory;

    const Site& s = *out.bundle.site;
    const ObjId U = s.object_count() - 1;
    const MorId id = s.identity(U);
    out.psi.base = id;
    out.psi.degree = 0;
    for (MorId g : s.morphisms_into(U)) {
        const PullbackSquare& sq = s.pullback(id, g);
        const MorId back = s.factor(sq, g, s.identity(s.src(g)));
        Integer scale = 1;
        for (int m = 0; m <= 4; ++m) {
            const GroupHom move = F->map(back, m);
            out.psi.components.emplace(std::pair{g, m}, compose(GroupHom::scalar(move.tgt(), scale), move));
            if (m % 2 == 1)
                scale *= k;
        }
    }
    return out;
}

}  // namespace bivar
