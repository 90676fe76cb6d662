#include "bivar/families.hpp"

#include "bivar/errors.hpp"

#include <fmt/core.h>

namespace bivar {

namespace {

// One compatibility equation: (g, h, m) with the transition t: D -> X'_g.
struct Constraint {
    MorId g;
    MorId gh;
    MorId h;
    MorId t;
    int grade;
};

}  // namespace

// ---------------------------------------------------------------------------
// FamilyTheory: slots and components

template <Variance V>
FamilyTheory<V>::FamilyTheory(std::shared_ptr<const GradedFunctor> functor)
    : functor_(std::move(functor))
{
    if (!functor_)
        throw Error("family theory needs a functor");
    if (functor_->variance() != V)
        throw InvalidTransformation(V == Variance::contra ? "co-operational classes need a contravariant functor"
                                                          : "operational classes need a covariant functor");
    const int span = functor_->window().span();
    degrees_ = {-span, span};
}

template <Variance V>
const FgAbGroup& FamilyTheory<V>::component_src(MorId f, int /*i*/, MorId g, int m) const
{
    if constexpr (V == Variance::contra)
        return functor_->group(site().pullback(f, g).apex, m);
    else
        return functor_->group(site().src(g), m);
}

template <Variance V>
const FgAbGroup& FamilyTheory<V>::component_tgt(MorId f, int i, MorId g, int m) const
{
    if constexpr (V == Variance::contra)
        return functor_->group(site().src(g), m + i);
    else
        return functor_->group(site().pullback(f, g).apex, m - i);
}

template <Variance V>
GroupHom FamilyTheory<V>::component(const Family<V>& c, MorId g, int m) const
{
    auto it = c.components.find({g, m});
    if (it != c.components.end())
        return it->second;
    return GroupHom::zero(component_src(c.base, c.degree, g, m), component_tgt(c.base, c.degree, g, m));
}

template <Variance V>
const FamilyGroup<V>& FamilyTheory<V>::group(MorId f, int i) const
{
    std::lock_guard lock(mutex_);
    auto& slot = cache_[{f, i}];
    if (!slot)
        slot = std::make_unique<FamilyGroup<V>>(*this, f, i);
    return *slot;
}

// ---------------------------------------------------------------------------
// FamilyGroup

template <Variance V>
FamilyGroup<V>::FamilyGroup(const FamilyTheory<V>& theory, MorId f, int i)
    : theory_(&theory), base_(f), degree_(i)
{
    const Site& s = theory.site();
    const GradedFunctor& F = theory.functor();
    const GradeWindow w = F.window();
    const bool in_range = theory.degrees().contains(i);

    std::vector<FgAbGroup> factors;
    for (MorId g : s.morphisms_into(s.tgt(f))) {
        if (!in_range)
            break;
        for (int m = w.lo; m <= w.hi; ++m) {
            const int m2 = theory.target_grade(m, i);
            if (!w.contains(m2))
                continue;
            const ObjId apex = s.pullback(f, g).apex;
            Block b{g, m, 0, 0, m, m2, HomGroup(theory.component_src(f, i, g, m), theory.component_tgt(f, i, g, m))};
            if constexpr (V == Variance::contra) {
                b.from = apex;
                b.to = s.src(g);
            } else {
                b.from = s.src(g);
                b.to = apex;
            }
            if (b.hom.group().is_trivial())
                continue;
            block_index_[{g, m}] = blocks_.size();
            factors.push_back(b.hom.group());
            blocks_.push_back(std::move(b));
        }
    }
    ambient_ = std::make_shared<DirectSum>(std::move(factors));

    // Constraint equations. Contravariant: for every h into src(g),
    //   c_{g o h} o F(t) - F(h) o c_g : F^m(X'_g) -> F^{m+i}(Y'').
    // Covariant: for every confined k into src(g),
    //   t_* o c_{g o k} - c_g o k_*   : h_m(Y'') -> h_{m-i}(X'_g).
    std::vector<Constraint> cons;
    std::vector<HomGroup> con_homs;
    for (const Block& b : blocks_) {
        const MorId g = b.g;
        const PullbackSquare& s1 = s.pullback(f, g);
        for (MorId h : s.morphisms_into(s.src(g))) {
            if constexpr (V == Variance::cov) {
                if (!s.is_confined(h))
                    continue;
            }
            const MorId gh = s.compose(g, h);
            const PullbackSquare& d = s.pullback(f, gh);
            const MorId t = s.factor(s1, d.g_prime, s.compose(h, d.f_prime));
            if (s.is_identity(h) && s.is_identity(t))
                continue;
            const int m = b.grade;
            HomGroup hg = V == Variance::contra
                ? HomGroup(F.group(s1.apex, m), F.group(s.src(h), m + i))
                : HomGroup(F.group(s.src(h), m), F.group(s1.apex, m - i));
            if (hg.group().is_trivial())
                continue;
            cons.push_back({g, gh, h, t, m});
            con_homs.push_back(std::move(hg));
        }
    }
    std::vector<FgAbGroup> con_factors;
    for (const auto& hg : con_homs)
        con_factors.push_back(hg.group());
    DirectSum target(std::move(con_factors));

    // Which constraints each block enters, and with which sign.
    std::vector<std::vector<std::pair<std::size_t, bool>>> uses(blocks_.size());
    for (std::size_t c = 0; c < cons.size(); ++c) {
        auto lhs = block_index_.find({cons[c].gh, cons[c].grade});
        if (lhs != block_index_.end())
            uses[lhs->second].push_back({c, true});
        uses[block_index_.at({cons[c].g, cons[c].grade})].push_back({c, false});
    }

    IntMatrix mat(target.group().ngens(), ambient_->group().ngens());
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& b = blocks_[bi];
        const std::size_t ng = b.hom.group().ngens();
        for (std::size_t k = 0; k < ng; ++k) {
            const GroupHom comp = b.hom.decode(unit_vector(ng, k));
            for (auto [c, is_lhs] : uses[bi]) {
                const Constraint& e = cons[c];
                const int m = e.grade;
                GroupHom term = [&] {
                    if constexpr (V == Variance::contra) {
                        return is_lhs ? compose(comp, F.map(e.t, m)) : negate(compose(F.map(e.h, m + i), comp));
                    } else {
                        return is_lhs ? compose(F.map(e.t, m - i), comp) : negate(compose(comp, F.map(e.h, m)));
                    }
                }();
                const IntVector coords = con_homs[c].encode(term);
                const std::size_t off = target.offset(c);
                const std::size_t col = ambient_->offset(bi) + k;
                for (std::size_t r = 0; r < coords.size(); ++r)
                    mat(off + r, col) += coords[r];
            }
        }
    }
    constraint_ = std::make_shared<GroupHom>(ambient_->group(), target.group(), std::move(mat));
    solutions_ = std::make_shared<Subgroup>(kernel(*constraint_));
}

template <Variance V>
Family<V> FamilyGroup<V>::decode(const IntVector& x) const
{
    Family<V> c;
    c.base = base_;
    c.degree = degree_;
    const IntVector y = solutions_->inclusion().apply(x);
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi)
        c.components.emplace(std::pair{blocks_[bi].g, blocks_[bi].grade}, blocks_[bi].hom.decode(ambient_->part(y, bi)));
    return c;
}

template <Variance V>
IntVector FamilyGroup<V>::ambient_coords(const Family<V>& c) const
{
    std::vector<IntVector> parts;
    parts.reserve(blocks_.size());
    for (const Block& b : blocks_) {
        auto it = c.components.find({b.g, b.grade});
        parts.push_back(it == c.components.end() ? zero_vector(b.hom.group().ngens()) : b.hom.encode(it->second));
    }
    return ambient_->join(parts);
}

template <Variance V>
std::optional<IntVector> FamilyGroup<V>::encode(const Family<V>& c) const
{
    if (c.base != base_ || c.degree != degree_)
        return std::nullopt;
    for (const auto& [key, hom] : c.components)
        if (!block_index_.count(key) && !hom.is_zero())
            return std::nullopt;
    return solutions_->preimage(ambient_coords(c));
}

// ---------------------------------------------------------------------------
// Operations

namespace {

void check_degree(const GradeWindow& w, int i)
{
    if (!w.contains(i))
        throw DegreeOverflow(fmt::format("degree {} outside [{}, {}]", i, w.lo, w.hi));
}

}  // namespace

template <Variance V>
Family<V> FamilyTheory<V>::product(const Family<V>& c, const Family<V>& d) const
{
    const Site& s = site();
    const MorId f = c.base;
    const MorId g = d.base;
    if (s.tgt(f) != s.src(g))
        throw CospanMismatch(fmt::format("cannot multiply over {} and {}", s.describe(f), s.describe(g)));
    const int i = c.degree;
    const int j = d.degree;
    check_degree(degrees_, i + j);

    Family<V> out;
    out.base = s.compose(g, f);
    out.degree = i + j;
    const GradeWindow w = functor_->window();
    for (MorId h : s.morphisms_into(s.tgt(g))) {
        const PullbackSquare& s1 = s.pullback(g, h);
        const MorId hp = s1.g_prime;
        const PasteComparison pc = s.paste_vertical(f, g, h);
        for (int m = w.lo; m <= w.hi; ++m) {
            if (!w.contains(target_grade(m, i + j)))
                continue;
            GroupHom v = [&] {
                if constexpr (V == Variance::contra)
                    return compose(compose(component(d, h, m + i), component(c, hp, m)), fmap(pc.from_pasted, m));
                else
                    return compose(fmap(pc.from_pasted, m - i - j), compose(component(c, hp, m - j), component(d, h, m)));
            }();
            out.components.emplace(std::pair{h, m}, std::move(v));
        }
    }
    return out;
}

template <Variance V>
Family<V> FamilyTheory<V>::pushforward(MorId f, MorId ctx, const Family<V>& c) const
{
    const Site& s = site();
    const MorId cf = s.compose(ctx, f);
    if (c.base != cf)
        throw CospanMismatch(fmt::format("class lives over {}, not over {}", s.describe(c.base), s.describe(cf)));
    if (V == Variance::cov && !s.is_confined(f))
        throw NotConfined(fmt::format("pushforward along non-confined {}", s.describe(f)));

    Family<V> out;
    out.base = ctx;
    out.degree = c.degree;
    const int i = c.degree;
    const GradeWindow w = functor_->window();
    for (MorId h : s.morphisms_into(s.tgt(ctx))) {
        const PullbackSquare& s1 = s.pullback(ctx, h);
        const PasteComparison pc = s.paste_vertical(f, ctx, h);
        const MorId fp = s.compose(s.pullback(f, s1.g_prime).f_prime, pc.to_pasted);
        for (int m = w.lo; m <= w.hi; ++m) {
            if (!w.contains(target_grade(m, i)))
                continue;
            GroupHom v = [&] {
                if constexpr (V == Variance::contra)
                    return compose(component(c, h, m), fmap(fp, m));
                else
                    return compose(fmap(fp, m - i), component(c, h, m));
            }();
            out.components.emplace(std::pair{h, m}, std::move(v));
        }
    }
    return out;
}

template <Variance V>
Family<V> FamilyTheory<V>::pullback(MorId g, const Family<V>& c) const
{
    const Site& s = site();
    const MorId f = c.base;
    const PullbackSquare& s1 = s.pullback(f, g);

    Family<V> out;
    out.base = s1.f_prime;
    out.degree = c.degree;
    const int i = c.degree;
    const GradeWindow w = functor_->window();
    for (MorId k : s.morphisms_into(s.src(g))) {
        const MorId gk = s.compose(g, k);
        const PasteComparison pc = s.paste_horizontal(f, g, k);
        for (int m = w.lo; m <= w.hi; ++m) {
            if (!w.contains(target_grade(m, i)))
                continue;
            GroupHom v = [&] {
                if constexpr (V == Variance::contra)
                    return compose(component(c, gk, m), fmap(pc.to_pasted, m));
                else
                    return compose(fmap(pc.to_pasted, m - i), component(c, gk, m));
            }();
            out.components.emplace(std::pair{k, m}, std::move(v));
        }
    }
    return out;
}

template <Variance V>
Family<V> FamilyTheory<V>::unit(ObjId x) const
{
    const Site& s = site();
    const MorId id = s.identity(x);
    Family<V> out;
    out.base = id;
    out.degree = 0;
    const GradeWindow w = functor_->window();
    for (MorId g : s.morphisms_into(x)) {
        const PullbackSquare& sq = s.pullback(id, g);
        const MorId back = s.factor(sq, g, s.identity(s.src(g)));
        for (int m = w.lo; m <= w.hi; ++m)
            out.components.emplace(std::pair{g, m}, fmap(back, m));
    }
    return out;
}

template <Variance V>
ValidationReport FamilyTheory<V>::compatibility(const Family<V>& c) const
{
    ValidationReport rep;
    const Site& s = site();
    const MorId f = c.base;
    const int i = c.degree;
    const GradeWindow w = functor_->window();
    for (MorId g : s.morphisms_into(s.tgt(f))) {
        const PullbackSquare& s1 = s.pullback(f, g);
        for (MorId h : s.morphisms_into(s.src(g))) {
            if (V == Variance::cov && !s.is_confined(h))
                continue;
            const MorId gh = s.compose(g, h);
            const PullbackSquare& d = s.pullback(f, gh);
            const MorId t = s.factor(s1, d.g_prime, s.compose(h, d.f_prime));
            for (int m = w.lo; m <= w.hi; ++m) {
                if (!w.contains(target_grade(m, i)))
                    continue;
                bool ok;
                if constexpr (V == Variance::contra)
                    ok = is_equal(compose(component(c, gh, m), fmap(t, m)), compose(fmap(h, m + i), component(c, g, m)));
                else
                    ok = is_equal(compose(fmap(t, m - i), component(c, gh, m)), compose(component(c, g, m), fmap(h, m)));
                if (!ok)
                    rep.add("compatibility", fmt::format("g = {}, h = {}, grade {}", s.morphism_name(g), s.morphism_name(h), m));
            }
        }
    }
    return rep;
}

template <Variance V>
bool FamilyTheory<V>::equal(const Family<V>& a, const Family<V>& b) const
{
    if (a.base != b.base || a.degree != b.degree)
        return false;
    const Site& s = site();
    const GradeWindow w = functor_->window();
    for (MorId g : s.morphisms_into(s.tgt(a.base)))
        for (int m = w.lo; m <= w.hi; ++m)
            if (w.contains(target_grade(m, a.degree)) && !is_equal(component(a, g, m), component(b, g, m)))
                return false;
    return true;
}

template <Variance V>
std::shared_ptr<TabulatedBivTheory> FamilyTheory<V>::tabulate() const
{
    const Site& s = site();
    auto out = std::make_shared<TabulatedBivTheory>(functor_->site(), degrees_, V == Variance::contra);
    const std::size_t nm = s.morphism_count();

    auto need = [](const std::optional<IntVector>& x, const char* what) {
        if (!x)
            throw Error(fmt::format("{} left the compatible families", what));
        return *x;
    };

    for (MorId f = 0; f < nm; ++f)
        for (int i = degrees_.lo; i <= degrees_.hi; ++i)
            out->set_group(f, i, group(f, i).group());

    for (MorId f = 0; f < nm; ++f) {
        for (MorId g : s.morphisms_from(s.tgt(f))) {
            const MorId gf = s.compose(g, f);
            for (int i = degrees_.lo; i <= degrees_.hi; ++i) {
                const auto& a = group(f, i);
                for (int j = degrees_.lo; j <= degrees_.hi; ++j) {
                    if (!degrees_.contains(i + j))
                        continue;
                    const auto& b = group(g, j);
                    const auto& ab = group(gf, i + j);
                    const std::size_t na = a.group().ngens();
                    const std::size_t nb = b.group().ngens();
                    IntMatrix table(ab.group().ngens(), na * nb);
                    for (std::size_t p = 0; p < na; ++p) {
                        const Family<V> cp = a.generator(p);
                        for (std::size_t q = 0; q < nb; ++q)
                            table.set_column(p * nb + q, need(ab.encode(product(cp, b.generator(q))), "product"));
                    }
                    out->set_product(f, g, i, j, std::move(table));
                }
            }
        }
    }

    for (MorId f = 0; f < nm; ++f) {
        if (!out->allows_pushforward(f))
            continue;
        for (MorId ctx : s.morphisms_from(s.tgt(f))) {
            const MorId cf = s.compose(ctx, f);
            for (int i = degrees_.lo; i <= degrees_.hi; ++i) {
                const auto& a = group(cf, i);
                const auto& b = group(ctx, i);
                const std::size_t na = a.group().ngens();
                IntMatrix mat(b.group().ngens(), na);
                for (std::size_t p = 0; p < na; ++p)
                    mat.set_column(p, need(b.encode(pushforward(f, ctx, a.generator(p))), "pushforward"));
                out->set_pushforward(f, ctx, i, GroupHom(a.group(), b.group(), std::move(mat)));
            }
        }
    }

    for (MorId f = 0; f < nm; ++f) {
        for (MorId g : s.morphisms_into(s.tgt(f))) {
            const MorId fp = s.pullback(f, g).f_prime;
            for (int i = degrees_.lo; i <= degrees_.hi; ++i) {
                const auto& a = group(f, i);
                const auto& b = group(fp, i);
                const std::size_t na = a.group().ngens();
                IntMatrix mat(b.group().ngens(), na);
                for (std::size_t p = 0; p < na; ++p)
                    mat.set_column(p, need(b.encode(pullback(g, a.generator(p))), "pullback"));
                out->set_pullback(f, g, i, GroupHom(a.group(), b.group(), std::move(mat)));
            }
        }
    }

    for (ObjId x = 0; x < s.object_count(); ++x)
        out->set_unit(x, need(group(s.identity(x), 0).encode(unit(x)), "unit"));
    return out;
}

// ---------------------------------------------------------------------------
// Lifting maps and hat theories

template <Variance V>
ValidationReport grothendieck_identities(const TabulatedBivTheory& b, const FamilyTheory<V>& t, const Lift<V>& lift)
{
    ValidationReport rep;
    const Site& s = *b.site();
    const GradeWindow w = b.degrees();
    const std::size_t nm = s.morphism_count();
    auto gens = [&](MorId f, int i) { return b.group(f, i).ngens(); };

    for (MorId f = 0; f < nm; ++f)
        for (MorId g : s.morphisms_from(s.tgt(f)))
            for (int i = w.lo; i <= w.hi; ++i)
                for (int j = w.lo; j <= w.hi; ++j) {
                    if (!w.contains(i + j))
                        continue;
                    const MorId gf = s.compose(g, f);
                    for (std::size_t p = 0; p < gens(f, i); ++p) {
                        const IntVector a = unit_vector(gens(f, i), p);
                        const Family<V> la = lift(f, i, a);
                        for (std::size_t q = 0; q < gens(g, j); ++q) {
                            const IntVector c = unit_vector(gens(g, j), q);
                            if (!t.equal(lift(gf, i + j, b.product(f, g, i, j, a, c)), t.product(la, lift(g, j, c))))
                                rep.add("product", fmt::format("generator {} of B^{}({}) times generator {} of B^{}({})", p, i,
                                                               s.morphism_name(f), q, j, s.morphism_name(g)));
                        }
                    }
                }

    for (MorId f = 0; f < nm; ++f) {
        if (!b.allows_pushforward(f) || (V == Variance::cov && !s.is_confined(f)))
            continue;
        for (MorId ctx : s.morphisms_from(s.tgt(f)))
            for (int i = w.lo; i <= w.hi; ++i) {
                const MorId cf = s.compose(ctx, f);
                const GroupHom push = b.pushforward(f, ctx, i);
                for (std::size_t p = 0; p < gens(cf, i); ++p) {
                    const IntVector a = unit_vector(gens(cf, i), p);
                    if (!t.equal(lift(ctx, i, push.apply(a)), t.pushforward(f, ctx, lift(cf, i, a))))
                        rep.add("pushforward", fmt::format("generator {} of B^{}({}) pushed along {}", p, i,
                                                           s.morphism_name(cf), s.morphism_name(f)));
                }
            }
    }

    for (MorId f = 0; f < nm; ++f)
        for (MorId g : s.morphisms_into(s.tgt(f)))
            for (int i = w.lo; i <= w.hi; ++i) {
                const MorId fp = s.pullback(f, g).f_prime;
                const GroupHom pull = b.pullback(f, g, i);
                for (std::size_t p = 0; p < gens(f, i); ++p) {
                    const IntVector a = unit_vector(gens(f, i), p);
                    if (!t.equal(lift(fp, i, pull.apply(a)), t.pullback(g, lift(f, i, a))))
                        rep.add("pullback", fmt::format("generator {} of B^{}({}) pulled back along {}", p, i,
                                                        s.morphism_name(f), s.morphism_name(g)));
                }
            }
    return rep;
}

template <Variance V>
HatBridge make_bridge(std::shared_ptr<const TabulatedBivTheory> b, const FamilyTheory<V>& t, const Lift<V>& lift)
{
    HatBridge out;
    out.bivariant = b;
    out.families = t.tabulate();
    auto tr = std::make_shared<GrothTransf>(b, out.families);
    const Site& s = *b->site();
    const GradeWindow w = b->degrees();
    for (MorId f = 0; f < s.morphism_count(); ++f)
        for (int i = w.lo; i <= w.hi; ++i) {
            if (!t.degrees().contains(i))
                continue;
            const FgAbGroup& src = b->group(f, i);
            const FamilyGroup<V>& fg = t.group(f, i);
            IntMatrix mat(fg.group().ngens(), src.ngens());
            for (std::size_t p = 0; p < src.ngens(); ++p) {
                auto x = fg.encode(lift(f, i, unit_vector(src.ngens(), p)));
                if (!x)
                    throw Error(fmt::format("lift of generator {} of B^{}({}) is not a compatible family", p, i,
                                            s.morphism_name(f)));
                mat.set_column(p, *x);
            }
            tr->set_component(f, i, GroupHom(src, fg.group(), std::move(mat)));
        }
    out.lift = tr;
    out.hat = image_subtheory(*tr);
    return out;
}

HatGammaResult hat_between(const HatBridge& a, const HatBridge& b, const GrothTransf& gamma)
{
    HatGammaResult out;
    out.src = a;
    out.tgt = b;
    const Site& s = *a.bivariant->site();
    const GradeWindow w = a.hat.theory->degrees();
    auto map = std::make_shared<GrothTransf>(a.hat.theory, b.hat.theory);
    bool well_defined = true;
    for (MorId f = 0; f < s.morphism_count(); ++f)
        for (int i = w.lo; i <= w.hi; ++i) {
            const Subgroup& from = a.hat.subgroups.at({f, i});
            const Subgroup& to = b.hat.subgroups.at({f, i});
            const IntMatrix& reps = a.bivariant->group(f, i).canonical_representatives();
            const GroupHom g = gamma.component(f, i);
            const GroupHom lb = b.lift->component(f, i);
            IntMatrix mat(to.group().ngens(), from.group().ngens());
            bool ok = true;
            for (std::size_t k = 0; k < from.group().ngens(); ++k) {
                auto y = to.preimage(lb.apply(g.apply(reps.column(k))));
                if (!y) {
                    ok = false;
                    out.report.add("hat-target", fmt::format("image of generator {} over {} in degree {} leaves the target",
                                                             k, s.morphism_name(f), i));
                    break;
                }
                mat.set_column(k, *y);
            }
            if (!ok) {
                well_defined = false;
                continue;
            }
            if (!GroupHom::is_well_defined(from.group(), to.group(), mat)) {
                well_defined = false;
                out.report.add("well-defined", fmt::format("classes with equal lifts over {} in degree {} have different images",
                                                           s.morphism_name(f), i));
                continue;
            }
            map->set_component(f, i, GroupHom(from.group(), to.group(), std::move(mat)));
        }
    if (!well_defined)
        return out;
    out.report.merge(validate_groth(*map));
    out.map = map;
    return out;
}

template ValidationReport grothendieck_identities(const TabulatedBivTheory&, const FamilyTheory<Variance::cov>&,
                                                  const Lift<Variance::cov>&);
template ValidationReport grothendieck_identities(const TabulatedBivTheory&, const FamilyTheory<Variance::contra>&,
                                                  const Lift<Variance::contra>&);
template HatBridge make_bridge(std::shared_ptr<const TabulatedBivTheory>, const FamilyTheory<Variance::cov>&,
                               const Lift<Variance::cov>&);
template HatBridge make_bridge(std::shared_ptr<const TabulatedBivTheory>, const FamilyTheory<Variance::contra>&,
                               const Lift<Variance::contra>&);

template class FamilyGroup<Variance::cov>;
template class FamilyGroup<Variance::contra>;
template class FamilyTheory<Variance::cov>;
template class FamilyTheory<Variance::contra>;

}  // namespace bivar
