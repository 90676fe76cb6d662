#include "bivar/site.hpp"

#include "bivar/errors.hpp"

#include <fmt/core.h>

#include <set>

namespace bivar {

namespace {

constexpr MorId kNone = static_cast<MorId>(-1);

}  // namespace

Site::Site(SiteData data) : d_(std::move(data))
{
    const std::size_t nobj = d_.objects.size();
    const std::size_t nmor = d_.morphisms.size();

    std::set<std::string> names;
    for (const auto& o : d_.objects)
        if (!names.insert(o).second)
            throw SiteError(fmt::format("duplicate object name '{}'", o));
    names.clear();
    for (const auto& m : d_.morphisms) {
        if (!names.insert(m.name).second)
            throw SiteError(fmt::format("duplicate morphism name '{}'", m.name));
        if (m.src >= nobj || m.tgt >= nobj)
            throw SiteError(fmt::format("morphism '{}' has an endpoint outside the object list", m.name));
    }
    if (d_.identities.size() != nobj)
        throw SiteError(fmt::format("{} identities given for {} objects", d_.identities.size(), nobj));
    for (std::size_t x = 0; x < nobj; ++x) {
        const MorId id = d_.identities[x];
        if (id >= nmor || d_.morphisms[id].src != x || d_.morphisms[id].tgt != x)
            throw SiteError(fmt::format("identity of '{}' is not an endomorphism of it", d_.objects[x]));
    }
    if (d_.confined.empty())
        d_.confined.assign(nmor, false);
    if (d_.confined.size() != nmor)
        throw SiteError("confined flags do not cover every morphism");
    for (const auto& [key, gf] : d_.composition)
        if (key.first >= nmor || key.second >= nmor || gf >= nmor)
            throw SiteError("composition table refers to an unknown morphism");
    for (const auto& [key, sq] : d_.pullbacks) {
        if (key.first >= nmor || key.second >= nmor || sq.g_prime >= nmor || sq.f_prime >= nmor || sq.apex >= nobj)
            throw SiteError("pullback table refers to an unknown object or morphism");
        if (sq.f != key.first || sq.g != key.second)
            throw SiteError("pullback entry is filed under the wrong cospan");
    }
    if (d_.final_object && *d_.final_object >= nobj)
        throw SiteError("final object is not in the object list");

    homs_.assign(nobj * nobj, {});
    into_.assign(nobj, {});
    from_.assign(nobj, {});
    for (MorId m = 0; m < nmor; ++m) {
        homs_[d_.morphisms[m].src * nobj + d_.morphisms[m].tgt].push_back(m);
        into_[d_.morphisms[m].tgt].push_back(m);
        from_[d_.morphisms[m].src].push_back(m);
    }
    comp_.assign(nmor * nmor, kNone);
    for (const auto& [key, gf] : d_.composition)
        comp_[key.first * nmor + key.second] = gf;
    pb_.assign(nmor * nmor, kNone);
    for (const auto& [key, sq] : d_.pullbacks) {
        pb_[key.first * nmor + key.second] = squares_.size();
        squares_.push_back(sq);
    }
}

std::optional<ObjId> Site::find_object(const std::string& name) const
{
    for (ObjId x = 0; x < d_.objects.size(); ++x)
        if (d_.objects[x] == name)
            return x;
    return std::nullopt;
}

std::optional<MorId> Site::find_morphism(const std::string& name) const
{
    for (MorId m = 0; m < d_.morphisms.size(); ++m)
        if (d_.morphisms[m].name == name)
            return m;
    return std::nullopt;
}

MorId Site::compose(MorId g, MorId f) const
{
    if (tgt(f) != src(g))
        throw CospanMismatch(fmt::format("cannot compose {} after {}", describe(g), describe(f)));
    const MorId gf = comp_[g * morphism_count() + f];
    if (gf == kNone)
        throw SiteError(fmt::format("composition table lacks {} o {}", morphism_name(g), morphism_name(f)));
    return gf;
}

const PullbackSquare& Site::pullback(MorId f, MorId g) const
{
    if (tgt(f) != tgt(g))
        throw CospanMismatch(fmt::format("{} and {} do not share a target", describe(f), describe(g)));
    const std::size_t k = pb_[f * morphism_count() + g];
    if (k == kNone)
        throw SiteError(fmt::format("pullback table lacks the cospan ({}, {})", morphism_name(f), morphism_name(g)));
    return squares_[k];
}

MorId Site::factor(const PullbackSquare& sq, MorId a, MorId b) const
{
    const ObjId w = src(a);
    if (src(b) != w || tgt(a) != tgt(sq.g_prime) || tgt(b) != tgt(sq.f_prime))
        throw CospanMismatch("factor: legs do not form a cone over the square");
    MorId found = kNone;
    for (MorId c : hom(w, sq.apex)) {
        if (compose(sq.g_prime, c) == a && compose(sq.f_prime, c) == b) {
            if (found != kNone)
                throw SiteError(fmt::format("square over ({}, {}) admits two factorizations of ({}, {})",
                                            morphism_name(sq.f), morphism_name(sq.g), morphism_name(a),
                                            morphism_name(b)));
            found = c;
        }
    }
    if (found == kNone)
        throw SiteError(fmt::format("square over ({}, {}) admits no factorization of ({}, {})", morphism_name(sq.f),
                                    morphism_name(sq.g), morphism_name(a), morphism_name(b)));
    return found;
}

PasteComparison Site::paste_horizontal(MorId f, MorId g, MorId h) const
{
    const PullbackSquare& s1 = pullback(f, g);
    const PullbackSquare& s2 = pullback(s1.f_prime, h);
    const PullbackSquare& d = pullback(f, compose(g, h));
    PasteComparison pc;
    pc.direct_apex = d.apex;
    pc.pasted_apex = s2.apex;
    pc.from_pasted = factor(d, compose(s1.g_prime, s2.g_prime), s2.f_prime);
    const MorId inner = factor(s1, d.g_prime, compose(h, d.f_prime));
    pc.to_pasted = factor(s2, inner, d.f_prime);
    pc.is_identity = pc.direct_apex == pc.pasted_apex && is_identity(pc.to_pasted);
    return pc;
}

PasteComparison Site::paste_vertical(MorId f, MorId g, MorId h) const
{
    const PullbackSquare& s1 = pullback(g, h);
    const PullbackSquare& s2 = pullback(f, s1.g_prime);
    const PullbackSquare& d = pullback(compose(g, f), h);
    PasteComparison pc;
    pc.direct_apex = d.apex;
    pc.pasted_apex = s2.apex;
    pc.from_pasted = factor(d, s2.g_prime, compose(s1.f_prime, s2.f_prime));
    const MorId inner = factor(s1, compose(f, d.g_prime), d.f_prime);
    pc.to_pasted = factor(s2, d.g_prime, inner);
    pc.is_identity = pc.direct_apex == pc.pasted_apex && is_identity(pc.to_pasted);
    return pc;
}

ObjId Site::require_final_object() const
{
    if (!d_.final_object)
        throw MissingFinalObject("site has no final object");
    return *d_.final_object;
}

MorId Site::to_final(ObjId x) const
{
    const ObjId pt = require_final_object();
    const auto& hs = hom(x, pt);
    if (hs.size() != 1)
        throw SiteError(fmt::format("'{}' has {} morphisms to the final object", object_name(x), hs.size()));
    return hs.front();
}

std::string Site::describe(MorId m) const
{
    const Morphism& mm = d_.morphisms.at(m);
    return fmt::format("{}: {} -> {}", mm.name, d_.objects[mm.src], d_.objects[mm.tgt]);
}

// ---------------------------------------------------------------------------
// validate_site

namespace {

class SiteChecker {
public:
    explicit SiteChecker(const Site& s) : s_(s), d_(s.data()) {}

    ValidationReport run()
    {
        check_composition();
        check_confined();
        check_pullbacks();
        check_final();
        return std::move(r_);
    }

private:
    std::optional<MorId> comp(MorId g, MorId f) const
    {
        auto it = d_.composition.find({g, f});
        if (it == d_.composition.end())
            return std::nullopt;
        return it->second;
    }
    const std::string& name(MorId m) const { return s_.morphism_name(m); }

    void check_composition()
    {
        const std::size_t n = s_.morphism_count();
        for (const auto& [key, gf] : d_.composition) {
            const auto [g, f] = key;
            if (s_.tgt(f) != s_.src(g))
                r_.add("composition-endpoints", fmt::format("entry for {} o {} on a non-composable pair", name(g),
                                                             name(f)));
            else if (s_.src(gf) != s_.src(f) || s_.tgt(gf) != s_.tgt(g))
                r_.add("composition-endpoints",
                       fmt::format("{} o {} = {} has the wrong endpoints", name(g), name(f), name(gf)));
        }
        for (MorId f = 0; f < n; ++f)
            for (MorId g : s_.morphisms_from(s_.tgt(f)))
                if (!comp(g, f))
                    r_.add("composition-total", fmt::format("missing {} o {}", name(g), name(f)));

        for (MorId f = 0; f < n; ++f) {
            const MorId ix = s_.identity(s_.src(f));
            const MorId iy = s_.identity(s_.tgt(f));
            auto a = comp(iy, f);
            auto b = comp(f, ix);
            if ((a && *a != f) || (b && *b != f))
                r_.add("identity-neutral", fmt::format("identity does not fix {}", name(f)));
        }

        for (MorId f = 0; f < n; ++f)
            for (MorId g : s_.morphisms_from(s_.tgt(f)))
                for (MorId h : s_.morphisms_from(s_.tgt(g))) {
                    auto gf = comp(g, f);
                    auto hg = comp(h, g);
                    if (!gf || !hg)
                        continue;
                    auto left = comp(h, *gf);
                    auto right = comp(*hg, f);
                    if (left && right && *left != *right)
                        r_.add("associativity",
                               fmt::format("({} o {}) o {} != {} o ({} o {})", name(h), name(g), name(f), name(h),
                                           name(g), name(f)));
                }
    }

    void check_confined()
    {
        for (ObjId x = 0; x < s_.object_count(); ++x)
            if (!s_.is_confined(s_.identity(x)))
                r_.add("confined-identities", fmt::format("identity of {} is not confined", s_.object_name(x)));
        for (const auto& [key, gf] : d_.composition) {
            const auto [g, f] = key;
            if (s_.tgt(f) == s_.src(g) && s_.is_confined(g) && s_.is_confined(f) && !s_.is_confined(gf))
                r_.add("confined-composition",
                       fmt::format("{} o {} = {} is not confined", name(g), name(f), name(gf)));
        }
    }

    void check_pullbacks()
    {
        for (ObjId y = 0; y < s_.object_count(); ++y)
            for (MorId f : s_.morphisms_into(y))
                for (MorId g : s_.morphisms_into(y))
                    check_square(f, g);
    }

    void check_square(MorId f, MorId g)
    {
        auto it = d_.pullbacks.find({f, g});
        if (it == d_.pullbacks.end()) {
            r_.add("pullback-total", fmt::format("no chosen square over ({}, {})", name(f), name(g)));
            return;
        }
        const PullbackSquare& sq = it->second;
        const std::string label = fmt::format("square over ({}, {})", name(f), name(g));
        if (s_.src(sq.g_prime) != sq.apex || s_.tgt(sq.g_prime) != s_.src(f) || s_.src(sq.f_prime) != sq.apex ||
            s_.tgt(sq.f_prime) != s_.src(g)) {
            r_.add("pullback-endpoints", label + " has legs with the wrong endpoints");
            return;
        }

        if (s_.is_identity(g) &&
            (sq.apex != s_.src(f) || !s_.is_identity(sq.g_prime) || sq.f_prime != f))
            r_.add("pullback-degenerate", label + " is not (X, id_X, f)");
        if (s_.is_identity(f) && (sq.apex != s_.src(g) || sq.g_prime != g || !s_.is_identity(sq.f_prime)))
            r_.add("pullback-degenerate", label + " is not (Y', g, id_Y')");

        if (s_.is_confined(f) && !s_.is_confined(sq.f_prime))
            r_.add("confined-base-change", fmt::format("{} is confined but its base change {} is not", name(f),
                                                       name(sq.f_prime)));
        if (s_.is_confined(g) && !s_.is_confined(sq.g_prime))
            r_.add("confined-base-change", fmt::format("{} is confined but its base change {} is not", name(g),
                                                       name(sq.g_prime)));

        auto fg = comp(f, sq.g_prime);
        auto gf = comp(g, sq.f_prime);
        if (!fg || !gf)
            return;  // already reported as composition-total
        if (*fg != *gf) {
            r_.add("pullback-commutes", label + fmt::format(": {} != {}", name(*fg), name(*gf)));
            return;
        }

        for (ObjId w = 0; w < s_.object_count(); ++w)
            for (MorId a : s_.hom(w, s_.src(f)))
                for (MorId b : s_.hom(w, s_.src(g))) {
                    auto fa = comp(f, a);
                    auto gb = comp(g, b);
                    if (!fa || !gb || *fa != *gb)
                        continue;
                    std::size_t count = 0;
                    for (MorId c : s_.hom(w, sq.apex)) {
                        auto ac = comp(sq.g_prime, c);
                        auto bc = comp(sq.f_prime, c);
                        if (ac && bc && *ac == a && *bc == b)
                            ++count;
                    }
                    if (count != 1)
                        r_.add("pullback-universal",
                               label + fmt::format(": cone ({}, {}) from {} has {} factorizations", name(a), name(b),
                                                   s_.object_name(w), count));
                }
    }

    void check_final()
    {
        if (!d_.final_object)
            return;
        const ObjId pt = *d_.final_object;
        for (ObjId x = 0; x < s_.object_count(); ++x) {
            const std::size_t n = s_.hom(x, pt).size();
            if (n != 1)
                r_.add("final-object", fmt::format("{} has {} morphisms to {}", s_.object_name(x), n,
                                                   s_.object_name(pt)));
        }
    }

    const Site& s_;
    const SiteData& d_;
    ValidationReport r_;
};

}  // namespace

ValidationReport validate_site(const Site& s) { return SiteChecker(s).run(); }

// ---------------------------------------------------------------------------
// GradedFunctor

GradedFunctor::GradedFunctor(std::shared_ptr<const Site> site, Variance variance, GradeWindow window)
    : site_(std::move(site)), variance_(variance), window_(window)
{
    if (!site_)
        throw SiteError("functor needs a site");
    if (window_.lo > window_.hi)
        throw DegreeOverflow(fmt::format("empty grade window [{}, {}]", window_.lo, window_.hi));
}

void GradedFunctor::set_group(ObjId x, int grade, FgAbGroup g)
{
    if (x >= site_->object_count())
        throw SiteError("set_group: unknown object");
    if (!window_.contains(grade))
        throw DegreeOverflow(fmt::format("grade {} outside window [{}, {}]", grade, window_.lo, window_.hi));
    groups_[{x, grade}] = std::move(g);
}

const FgAbGroup& GradedFunctor::group(ObjId x, int grade) const
{
    auto it = groups_.find({x, grade});
    return it == groups_.end() ? zero_ : it->second;
}

void GradedFunctor::set_map(MorId m, int grade, GroupHom hom)
{
    if (m >= site_->morphism_count())
        throw SiteError("set_map: unknown morphism");
    if (!window_.contains(grade))
        throw DegreeOverflow(fmt::format("grade {} outside window [{}, {}]", grade, window_.lo, window_.hi));
    if (variance_ == Variance::cov && !site_->is_confined(m))
        throw NotConfined(fmt::format("covariant map on non-confined {}", site_->describe(m)));
    const ObjId from = variance_ == Variance::contra ? site_->tgt(m) : site_->src(m);
    const ObjId to = variance_ == Variance::contra ? site_->src(m) : site_->tgt(m);
    if (!hom.src().same_presentation(group(from, grade)) || !hom.tgt().same_presentation(group(to, grade)))
        throw ShapeError(fmt::format("map for {} in grade {} has the wrong groups", site_->describe(m), grade));
    maps_.insert_or_assign({m, grade}, std::move(hom));
}

GroupHom GradedFunctor::map(MorId m, int grade) const
{
    if (variance_ == Variance::cov && !site_->is_confined(m))
        throw NotConfined(fmt::format("no pushforward along non-confined {}", site_->describe(m)));
    auto it = maps_.find({m, grade});
    if (it != maps_.end())
        return it->second;
    const ObjId from = variance_ == Variance::contra ? site_->tgt(m) : site_->src(m);
    const ObjId to = variance_ == Variance::contra ? site_->src(m) : site_->tgt(m);
    if (site_->is_identity(m))
        return GroupHom::identity(group(from, grade));
    return GroupHom::zero(group(from, grade), group(to, grade));
}

ValidationReport validate_functor(const GradedFunctor& F)
{
    ValidationReport r;
    const Site& s = *F.site();
    const bool cov = F.variance() == Variance::cov;
    for (int m = F.window().lo; m <= F.window().hi; ++m) {
        for (ObjId x = 0; x < s.object_count(); ++x) {
            const GroupHom id = F.map(s.identity(x), m);
            if (!is_equal(id, GroupHom::identity(F.group(x, m))))
                r.add("functor-identity", fmt::format("grade {}: identity of {} is not sent to the identity", m,
                                                      s.object_name(x)));
        }
        for (const auto& [key, gf] : s.data().composition) {
            const auto [g, f] = key;
            if (s.tgt(f) != s.src(g))
                continue;
            if (cov && !(s.is_confined(f) && s.is_confined(g) && s.is_confined(gf)))
                continue;
            const GroupHom whole = F.map(gf, m);
            const GroupHom parts = cov ? compose(F.map(g, m), F.map(f, m)) : compose(F.map(f, m), F.map(g, m));
            if (!is_equal(whole, parts))
                r.add("functor-composition",
                      fmt::format("grade {}: {} o {} is not sent to the composite", m, s.morphism_name(g),
                                  s.morphism_name(f)));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// NaturalTransf

NaturalTransf::NaturalTransf(std::shared_ptr<const GradedFunctor> src, std::shared_ptr<const GradedFunctor> tgt)
    : src_(std::move(src)), tgt_(std::move(tgt))
{
    if (!src_ || !tgt_)
        throw ShapeError("natural transformation needs two functors");
    if (src_->site() != tgt_->site())
        throw SiteError("natural transformation between functors on different sites");
    if (src_->variance() != tgt_->variance())
        throw ShapeError("natural transformation between functors of different variance");
}

GradeWindow NaturalTransf::grades() const
{
    return {std::min(src_->window().lo, tgt_->window().lo), std::max(src_->window().hi, tgt_->window().hi)};
}

void NaturalTransf::set_component(ObjId x, int grade, GroupHom hom)
{
    if (!hom.src().same_presentation(src_->group(x, grade)) || !hom.tgt().same_presentation(tgt_->group(x, grade)))
        throw ShapeError(fmt::format("component at {} grade {} has the wrong groups",
                                     src_->site()->object_name(x), grade));
    components_.insert_or_assign({x, grade}, std::move(hom));
}

GroupHom NaturalTransf::component(ObjId x, int grade) const
{
    auto it = components_.find({x, grade});
    if (it != components_.end())
        return it->second;
    return GroupHom::zero(src_->group(x, grade), tgt_->group(x, grade));
}

ValidationReport validate_natural(const NaturalTransf& t)
{
    ValidationReport r;
    const Site& s = *t.src().site();
    const bool cov = t.src().variance() == Variance::cov;
    const GradeWindow w = t.grades();
    for (int m = w.lo; m <= w.hi; ++m)
        for (MorId k = 0; k < s.morphism_count(); ++k) {
            if (cov && !s.is_confined(k))
                continue;
            const ObjId x = s.src(k);
            const ObjId y = s.tgt(k);
            const GroupHom lhs = cov ? compose(t.component(y, m), t.src().map(k, m))
                                     : compose(t.component(x, m), t.src().map(k, m));
            const GroupHom rhs = cov ? compose(t.tgt().map(k, m), t.component(x, m))
                                     : compose(t.tgt().map(k, m), t.component(y, m));
            if (!is_equal(lhs, rhs))
                r.add("naturality", fmt::format("grade {}: square for {} does not commute", m, s.describe(k)));
        }
    return r;
}

}  // namespace bivar
