#include "bivar/cooperational.hpp"

#include "bivar/errors.hpp"

#include <fmt/core.h>

#include <random>

namespace bivar {

std::shared_ptr<const GradedFunctor> cohomology_functor(const TabulatedBivTheory& b)
{
    const Site& s = *b.site();
    const GradeWindow d = b.degrees();
    auto F = std::make_shared<GradedFunctor>(b.site(), Variance::contra, d);
    for (ObjId x = 0; x < s.object_count(); ++x)
        for (int m = d.lo; m <= d.hi; ++m)
            F->set_group(x, m, b.group(s.identity(x), m));
    for (MorId g = 0; g < s.morphism_count(); ++g) {
        const ObjId y = s.tgt(g);
        const PullbackSquare& sq = s.pullback(s.identity(y), g);
        for (int m = d.lo; m <= d.hi; ++m) {
            GroupHom pull = b.pullback(s.identity(y), g, m);
            if (!s.is_identity(sq.f_prime))
                pull = compose(b.pushforward(sq.f_prime, s.identity(s.src(g)), m), pull);
            F->set_map(g, m, std::move(pull));
        }
    }
    return F;
}

CoopClass coop_from_bivariant(const TabulatedBivTheory& b, const CoopTheory& coop, MorId f, int i,
                              const IntVector& alpha)
{
    const Site& s = *b.site();
    const GradeWindow w = coop.functor().window();
    CoopClass c;
    c.base = f;
    c.degree = i;
    for (MorId g : s.morphisms_into(s.tgt(f))) {
        const PullbackSquare& sq = s.pullback(f, g);
        const IntVector beta = b.pullback(f, g, i).apply(alpha);
        const MorId ida = s.identity(sq.apex);
        for (int m = w.lo; m <= w.hi; ++m) {
            if (!w.contains(m + i))
                continue;
            const GroupHom push = b.pushforward(sq.f_prime, s.identity(s.src(g)), m + i);
            const FgAbGroup& src = coop.component_src(f, i, g, m);
            const FgAbGroup& tgt = coop.component_tgt(f, i, g, m);
            IntMatrix mat(tgt.ngens(), src.ngens());
            for (std::size_t p = 0; p < src.ngens(); ++p)
                mat.set_column(p, push.apply(b.product(ida, sq.f_prime, m, i, unit_vector(src.ngens(), p), beta)));
            c.components.emplace(std::pair{g, m}, GroupHom(src, tgt, std::move(mat)));
        }
    }
    return c;
}

GroupHom coop_map(const TabulatedBivTheory& b, const CoopTheory& coop, MorId f, int i)
{
    const FgAbGroup& src = b.group(f, i);
    const CoopGroup& tgt = coop.group(f, i);
    IntMatrix mat(tgt.group().ngens(), src.ngens());
    for (std::size_t p = 0; p < src.ngens(); ++p) {
        auto x = tgt.encode(coop_from_bivariant(b, coop, f, i, unit_vector(src.ngens(), p)));
        if (!x)
            throw Error(fmt::format("coop of generator {} of B^{}({}) is not compatible", p, i, b.site()->morphism_name(f)));
        mat.set_column(p, *x);
    }
    return GroupHom(src, tgt.group(), std::move(mat));
}

IntVector coop_eval(const TabulatedBivTheory& b, const CoopTheory& coop, const CoopClass& c)
{
    const Site& s = *b.site();
    if (!s.is_identity(c.base))
        throw CospanMismatch(fmt::format("evaluation needs a class over an identity, got {}", s.describe(c.base)));
    const ObjId x = s.src(c.base);
    const int i = c.degree;
    const GradeWindow w = coop.functor().window();
    if (!w.contains(0) || !w.contains(i))
        return zero_vector(b.group(c.base, i).ngens());
    const PullbackSquare& sq = s.pullback(c.base, c.base);
    return coop.component(c, s.identity(x), 0).apply(b.unit(sq.apex));
}

ValidationReport coop_identities(const TabulatedBivTheory& b, const CoopTheory& coop)
{
    return grothendieck_identities<Variance::contra>(
        b, coop, [&](MorId f, int i, const IntVector& a) { return coop_from_bivariant(b, coop, f, i, a); });
}

ValidationReport coop_point_isomorphism(const TabulatedBivTheory& b, const CoopTheory& coop)
{
    ValidationReport rep;
    const Site& s = *b.site();
    const GradeWindow w = b.degrees();
    for (ObjId x = 0; x < s.object_count(); ++x) {
        const MorId id = s.identity(x);
        for (int i = w.lo; i <= w.hi; ++i) {
            const std::string where = fmt::format("object {}, degree {}", s.object_name(x), i);
            const GroupHom m = coop_map(b, coop, id, i);
            if (!m.is_injective())
                rep.add("coop-injective", where);
            if (!image(m).group().isomorphic(m.src()))
                rep.add("coop-image", where);
            const CoopGroup& grp = coop.group(id, i);
            for (std::size_t p = 0; p < m.src().ngens(); ++p) {
                const IntVector a = unit_vector(m.src().ngens(), p);
                const CoopClass c = coop_from_bivariant(b, coop, id, i, a);
                auto code = grp.encode(c);
                if (!code || !coop.equal(grp.decode(*code), c))
                    rep.add("coop-codec", fmt::format("{}, generator {}", where, p));
                if (!m.src().equal(coop_eval(b, coop, c), a))
                    rep.add("coop-evaluation", fmt::format("{}, generator {}", where, p));
            }
        }
    }
    return rep;
}

HatBridge make_coop_bridge(std::shared_ptr<const TabulatedBivTheory> b)
{
    const Site& s = *b->site();
    for (MorId f = 0; f < s.morphism_count(); ++f)
        if (!b->allows_pushforward(f))
            throw NotConfined(fmt::format("coop needs pushforward along {}", s.describe(f)));
    auto coop = std::make_shared<CoopTheory>(cohomology_functor(*b));
    const TabulatedBivTheory& bb = *b;
    return make_bridge<Variance::contra>(
        std::move(b), *coop, [&](MorId f, int i, const IntVector& a) { return coop_from_bivariant(bb, *coop, f, i, a); });
}

HatGammaResult hat_gamma_coop(const GrothTransf& gamma, HatTarget mode)
{
    if (mode == HatTarget::image) {
        const ImageSubtheory img = image_subtheory(gamma);
        return hat_between(make_coop_bridge(gamma.src_ptr()), make_coop_bridge(img.theory), *img.corestriction);
    }
    HatGammaResult out;
    const TabulatedBivTheory& tgt = gamma.tgt();
    const Site& s = *tgt.site();
    for (ObjId x = 0; x < s.object_count(); ++x)
        for (int i = tgt.degrees().lo; i <= tgt.degrees().hi; ++i)
            if (!gamma.component(s.identity(x), i).is_surjective())
                out.report.add("contravariant-surjective", fmt::format("object {}, degree {}", s.object_name(x), i));
    if (!out.report.ok())
        return out;
    return hat_between(make_coop_bridge(gamma.src_ptr()), make_coop_bridge(gamma.tgt_ptr()), gamma);
}

// ---------------------------------------------------------------------------
// BCoopT

BCoopT::BCoopT(std::shared_ptr<const NaturalTransf> t)
    : t_(std::move(t))
{
    if (t_->src().variance() != Variance::contra || t_->tgt().variance() != Variance::contra)
        throw InvalidTransformation("descent needs a transformation of contravariant functors");
    if (t_->src().site() != t_->tgt().site())
        throw SiteError("transformation between functors on different sites");
    src_ = std::make_unique<CoopTheory>(t_->src_ptr());
    tgt_ = std::make_unique<CoopTheory>(t_->tgt_ptr());
}

namespace {

struct EquationSlot {
    MorId g;
    int grade;
    HomGroup hom;
};

}  // namespace

const BCoopT::Slice& BCoopT::at(MorId f, int i) const
{
    std::lock_guard lock(mutex_);
    auto& slot = cache_[{f, i}];
    if (slot)
        return *slot;

    const Site& s = src_->site();
    const GradeWindow w = t_->grades();
    const CoopGroup& kf = src_->group(f, i);
    const CoopGroup& kg = tgt_->group(f, i);

    // T o c_g - d_g o T : F^m(X'_g) -> G^{m+i}(Y') for every slot.
    std::vector<EquationSlot> eqs;
    for (MorId g : s.morphisms_into(s.tgt(f)))
        for (int m = w.lo; m <= w.hi; ++m) {
            HomGroup hg(t_->src().group(s.pullback(f, g).apex, m), t_->tgt().group(s.src(g), m + i));
            if (!hg.group().is_trivial())
                eqs.push_back({g, m, std::move(hg)});
        }
    std::vector<FgAbGroup> parts;
    for (const auto& e : eqs)
        parts.push_back(e.hom.group());
    const DirectSum target(std::move(parts));

    auto column = [&](auto&& term) {
        std::vector<IntVector> blocks;
        for (const auto& e : eqs)
            blocks.push_back(e.hom.encode(term(e)));
        return target.join(blocks);
    };
    const std::size_t nf = kf.group().ngens();
    const std::size_t ng = kg.group().ngens();
    IntMatrix phi(target.group().ngens(), nf);
    for (std::size_t k = 0; k < nf; ++k) {
        const CoopClass c = kf.generator(k);
        phi.set_column(k, column([&](const EquationSlot& e) {
            return compose(t_->component(s.src(e.g), e.grade + i), src_->component(c, e.g, e.grade));
        }));
    }
    IntMatrix psi(target.group().ngens(), ng);
    for (std::size_t k = 0; k < ng; ++k) {
        const CoopClass d = kg.generator(k);
        psi.set_column(k, column([&](const EquationSlot& e) {
            return compose(tgt_->component(d, e.g, e.grade), t_->component(s.pullback(f, e.g).apex, e.grade));
        }));
    }
    GroupHom phi_h(kf.group(), target.group(), phi);
    GroupHom psi_h(kg.group(), target.group(), psi);

    const DirectSum joint({kf.group(), kg.group()});
    const GroupHom joint_h(joint.group(), target.group(), hstack(phi, -psi));
    const std::size_t first[] = {0};
    Subgroup members = project(kernel(joint_h), joint, first);
    auto homogeneous = std::make_shared<const Subgroup>(kernel(psi_h));
    Subgroup psi_image = image(psi_h);
    slot = std::make_unique<Slice>(Slice{std::move(members), std::move(homogeneous), std::move(phi_h), std::move(psi_h),
                                         std::move(psi_image)});
    return *slot;
}

bool BCoopT::is_member(const CoopClass& c) const
{
    auto x = src_->group(c.base, c.degree).encode(c);
    return x && at(c.base, c.degree).members.contains(*x);
}

TransferSolutions BCoopT::gamma_T(const CoopClass& c) const
{
    auto x = src_->group(c.base, c.degree).encode(c);
    if (!x)
        throw InvalidTransformation("gamma_T needs a compatible family");
    const Slice& sl = at(c.base, c.degree);
    const FgAbGroup& kg = tgt_->group(c.base, c.degree).group();
    TransferSolutions out;
    out.homogeneous = sl.homogeneous;
    auto z = sl.psi_image.preimage(sl.phi.apply(*x));
    if (!z)
        return out;
    out.exists = true;
    out.particular = kg.reduce(kg.from_canonical(*z));
    return out;
}

bool BCoopT::intertwines(const CoopClass& c, const CoopClass& d) const
{
    if (c.base != d.base || c.degree != d.degree)
        return false;
    const Site& s = src_->site();
    const GradeWindow w = t_->grades();
    const int i = c.degree;
    for (MorId g : s.morphisms_into(s.tgt(c.base))) {
        const ObjId apex = s.pullback(c.base, g).apex;
        for (int m = w.lo; m <= w.hi; ++m)
            if (!is_equal(compose(t_->component(s.src(g), m + i), src_->component(c, g, m)),
                          compose(tgt_->component(d, g, m), t_->component(apex, m))))
                return false;
    }
    return true;
}

bool BCoopT::componentwise_surjective() const
{
    const Site& s = src_->site();
    const GradeWindow w = t_->grades();
    for (ObjId x = 0; x < s.object_count(); ++x)
        for (int m = w.lo; m <= w.hi; ++m)
            if (!t_->component(x, m).is_surjective())
                return false;
    return true;
}

std::vector<CoopClass> BCoopT::member_generators(MorId f, int i) const
{
    const Slice& sl = at(f, i);
    const CoopGroup& kf = src_->group(f, i);
    std::vector<CoopClass> out;
    for (std::size_t k = 0; k < sl.members.group().ngens(); ++k)
        out.push_back(kf.decode(sl.members.inclusion().matrix().column(k)));
    return out;
}

namespace {

template <typename Fn>
void for_degree_pairs(const GradeWindow& w, Fn&& fn)
{
    for (int i = w.lo; i <= w.hi; ++i)
        for (int j = w.lo; j <= w.hi; ++j)
            if (w.contains(i + j))
                fn(i, j);
}

}  // namespace

ValidationReport BCoopT::closure() const
{
    ValidationReport rep;
    const Site& s = src_->site();
    const GradeWindow w = src_->degrees();
    const std::size_t nm = s.morphism_count();
    for (MorId f = 0; f < nm; ++f)
        for (MorId g : s.morphisms_from(s.tgt(f)))
            for_degree_pairs(w, [&](int i, int j) {
                const auto cs = member_generators(f, i);
                const auto ds = member_generators(g, j);
                for (std::size_t p = 0; p < cs.size(); ++p)
                    for (std::size_t q = 0; q < ds.size(); ++q)
                        if (!is_member(src_->product(cs[p], ds[q])))
                            rep.add("closure-product", fmt::format("member {} over {} times member {} over {}", p,
                                                                   s.morphism_name(f), q, s.morphism_name(g)));
            });
    for (MorId f = 0; f < nm; ++f)
        for (MorId ctx : s.morphisms_from(s.tgt(f)))
            for (int i = w.lo; i <= w.hi; ++i) {
                const auto cs = member_generators(s.compose(ctx, f), i);
                for (std::size_t p = 0; p < cs.size(); ++p)
                    if (!is_member(src_->pushforward(f, ctx, cs[p])))
                        rep.add("closure-pushforward",
                                fmt::format("member {} pushed along {}, degree {}", p, s.morphism_name(f), i));
            }
    for (MorId f = 0; f < nm; ++f)
        for (MorId g : s.morphisms_into(s.tgt(f)))
            for (int i = w.lo; i <= w.hi; ++i) {
                const auto cs = member_generators(f, i);
                for (std::size_t p = 0; p < cs.size(); ++p)
                    if (!is_member(src_->pullback(g, cs[p])))
                        rep.add("closure-pullback", fmt::format("member {} over {} pulled back along {}, degree {}", p,
                                                                s.morphism_name(f), s.morphism_name(g), i));
            }
    return rep;
}

ValidationReport BCoopT::transfer() const
{
    ValidationReport rep;
    const Site& s = src_->site();
    const GradeWindow w = src_->degrees();
    const std::size_t nm = s.morphism_count();

    auto lift = [&](const CoopClass& c, const std::string& where) -> std::optional<CoopClass> {
        const TransferSolutions sol = gamma_T(c);
        if (!sol.exists) {
            rep.add("transfer-exists", where);
            return std::nullopt;
        }
        if (!sol.unique())
            rep.add("transfer-unique", where);
        return tgt_->group(c.base, c.degree).decode(sol.particular);
    };

    for (MorId f = 0; f < nm; ++f)
        for (MorId g : s.morphisms_from(s.tgt(f)))
            for_degree_pairs(w, [&](int i, int j) {
                const auto cs = member_generators(f, i);
                const auto ds = member_generators(g, j);
                for (std::size_t p = 0; p < cs.size(); ++p)
                    for (std::size_t q = 0; q < ds.size(); ++q) {
                        const std::string where = fmt::format("member {} over {} times member {} over {}", p,
                                                              s.morphism_name(f), q, s.morphism_name(g));
                        auto ct = lift(cs[p], where);
                        auto dt = lift(ds[q], where);
                        if (ct && dt && !intertwines(src_->product(cs[p], ds[q]), tgt_->product(*ct, *dt)))
                            rep.add("transfer-product", where);
                    }
            });
    for (MorId f = 0; f < nm; ++f)
        for (MorId ctx : s.morphisms_from(s.tgt(f)))
            for (int i = w.lo; i <= w.hi; ++i) {
                const auto cs = member_generators(s.compose(ctx, f), i);
                for (std::size_t p = 0; p < cs.size(); ++p) {
                    const std::string where = fmt::format("member {} pushed along {}, degree {}", p, s.morphism_name(f), i);
                    auto ct = lift(cs[p], where);
                    if (ct && !intertwines(src_->pushforward(f, ctx, cs[p]), tgt_->pushforward(f, ctx, *ct)))
                        rep.add("transfer-pushforward", where);
                }
            }
    for (MorId f = 0; f < nm; ++f)
        for (MorId g : s.morphisms_into(s.tgt(f)))
            for (int i = w.lo; i <= w.hi; ++i) {
                const auto cs = member_generators(f, i);
                for (std::size_t p = 0; p < cs.size(); ++p) {
                    const std::string where = fmt::format("member {} over {} pulled back along {}, degree {}", p,
                                                          s.morphism_name(f), s.morphism_name(g), i);
                    auto ct = lift(cs[p], where);
                    if (ct && !intertwines(src_->pullback(g, cs[p]), tgt_->pullback(g, *ct)))
                        rep.add("transfer-pullback", where);
                }
            }
    return rep;
}

// ---------------------------------------------------------------------------
// Cup products and powers

namespace {

IntVector cup(const TabulatedBivTheory& b, ObjId x, int i, int j, const IntVector& u, const IntVector& v)
{
    const MorId id = b.site()->identity(x);
    return b.product(id, id, i, j, u, v);
}

void require_ring(const TabulatedBivTheory& b)
{
    const ValidationReport r = ring_structure(b);
    if (!r.ok())
        throw MissingRingStructure(r.violations().front().clause + ": " + r.violations().front().witness);
}

}  // namespace

ValidationReport ring_structure(const TabulatedBivTheory& b)
{
    ValidationReport rep;
    const Site& s = *b.site();
    const GradeWindow w = b.degrees();
    if (!w.contains(0)) {
        rep.add("ring-unit", "degree 0 lies outside the window");
        return rep;
    }
    for (ObjId x = 0; x < s.object_count(); ++x) {
        const MorId id = s.identity(x);
        const IntVector one = b.unit(x);
        for (int i = w.lo; i <= w.hi; ++i) {
            const FgAbGroup& gi = b.group(id, i);
            for (std::size_t p = 0; p < gi.ngens(); ++p) {
                const IntVector a = unit_vector(gi.ngens(), p);
                if (!gi.equal(cup(b, x, 0, i, one, a), a) || !gi.equal(cup(b, x, i, 0, a, one), a))
                    rep.add("ring-unit", fmt::format("object {}, generator {} of degree {}", s.object_name(x), p, i));
            }
        }
        for_degree_pairs(w, [&](int i, int j) {
            const FgAbGroup& gi = b.group(id, i);
            const FgAbGroup& gj = b.group(id, j);
            const FgAbGroup& gij = b.group(id, i + j);
            const Integer sign = (i * j) % 2 == 0 ? 1 : -1;
            for (std::size_t p = 0; p < gi.ngens(); ++p)
                for (std::size_t q = 0; q < gj.ngens(); ++q) {
                    const IntVector a = unit_vector(gi.ngens(), p);
                    const IntVector c = unit_vector(gj.ngens(), q);
                    if (!gij.equal(cup(b, x, i, j, a, c), sign * cup(b, x, j, i, c, a)))
                        rep.add("ring-commutative", fmt::format("object {}, generators {} (degree {}) and {} (degree {})",
                                                                s.object_name(x), p, i, q, j));
                }
        });
    }
    return rep;
}

CoopClass cup_class(const TabulatedBivTheory& b, const CoopTheory& coop, ObjId x, int i, const IntVector& alpha)
{
    require_ring(b);
    return coop_from_bivariant(b, coop, b.site()->identity(x), i, alpha);
}

ValidationReport check_cup(const TabulatedBivTheory& b, const CoopTheory& coop, ObjId x, int i, const IntVector& alpha)
{
    ValidationReport rep;
    const Site& s = *b.site();
    const MorId id = s.identity(x);
    const CoopClass c = cup_class(b, coop, x, i, alpha);
    const GradeWindow w = coop.functor().window();
    for (MorId g : s.morphisms_into(x)) {
        const ObjId y = s.src(g);
        const PullbackSquare& sq = s.pullback(id, g);
        const MorId back = s.factor(sq, g, s.identity(y));
        IntVector ga = b.pullback(id, g, i).apply(alpha);
        if (!s.is_identity(sq.f_prime))
            ga = b.pushforward(sq.f_prime, s.identity(y), i).apply(ga);
        for (int m = w.lo; m <= w.hi; ++m) {
            if (!w.contains(m + i))
                continue;
            const GroupHom comp = coop.component(c, g, m);
            const GroupHom move = coop.functor().map(back, m);
            for (std::size_t p = 0; p < comp.src().ngens(); ++p) {
                const IntVector e = unit_vector(comp.src().ngens(), p);
                if (!comp.tgt().equal(comp.apply(e), cup(b, y, m, i, move.apply(e), ga)))
                    rep.add("cup", fmt::format("g = {}, generator {} of degree {}", s.morphism_name(g), p, m));
            }
        }
    }
    return rep;
}

ValidationReport cup_transfer(const GrothTransf& t)
{
    ValidationReport rep;
    const TabulatedBivTheory& A = t.src();
    const TabulatedBivTheory& B = t.tgt();
    require_ring(A);
    require_ring(B);
    const Site& s = *A.site();
    const GradeWindow w = A.degrees();

    for (ObjId x = 0; x < s.object_count(); ++x) {
        const MorId id = s.identity(x);
        for (MorId g : s.morphisms_into(x)) {
            const ObjId y = s.src(g);
            const MorId idy = s.identity(y);
            if (!s.is_identity(s.pullback(id, g).f_prime))
                continue;
            for_degree_pairs(w, [&](int i, int m) {
                const FgAbGroup& ga = A.group(id, i);
                const FgAbGroup& gx = A.group(idy, m);
                for (std::size_t a = 0; a < ga.ngens(); ++a) {
                    const IntVector alpha = unit_vector(ga.ngens(), a);
                    const IntVector pa = A.pullback(id, g, i).apply(alpha);
                    const IntVector tpa = B.pullback(id, g, i).apply(t.component(id, i).apply(alpha));
                    for (std::size_t p = 0; p < gx.ngens(); ++p) {
                        const IntVector e = unit_vector(gx.ngens(), p);
                        const IntVector lhs = t.component(idy, m + i).apply(cup(A, y, m, i, e, pa));
                        const IntVector rhs = cup(B, y, m, i, t.component(idy, m).apply(e), tpa);
                        if (!B.group(idy, m + i).equal(lhs, rhs))
                            rep.add("cup-transfer", fmt::format("object {}, g = {}, alpha generator {}, x generator {}",
                                                                s.object_name(x), s.morphism_name(g), a, p));
                    }
                }
            });
        }
    }

    const HatGammaResult hat = hat_gamma_coop(t, HatTarget::full);
    rep.merge(hat.report);
    if (!hat.map)
        return rep;
    const HatBridge& hs = *hat.src;
    const HatBridge& ht = *hat.tgt;
    for (ObjId x = 0; x < s.object_count(); ++x) {
        const MorId id = s.identity(x);
        for (int i = w.lo; i <= w.hi; ++i) {
            const GroupHom core_a = hs.hat.corestriction->component(id, i);
            const GroupHom core_b = ht.hat.corestriction->component(id, i);
            if (!core_b.is_injective())
                rep.add("cup-point-isomorphism", fmt::format("object {}, degree {}", s.object_name(x), i));
            const GroupHom lhs = compose(hat.map->component(id, i), core_a);
            const GroupHom rhs = compose(core_b, t.component(id, i));
            if (!is_equal(lhs, rhs))
                rep.add("cup-hat-transfer", fmt::format("object {}, degree {}", s.object_name(x), i));
        }
    }
    return rep;
}

MapFamily power_family(const TabulatedBivTheory& b, const CoopTheory& coop, ObjId x, int k)
{
    if (k < 1)
        throw Error("power needs k >= 1");
    require_ring(b);
    const Site& s = *b.site();
    const MorId id = s.identity(x);
    const GradeWindow w = coop.functor().window();
    MapFamily out;
    out.base = id;
    out.grade_factor = k;
    const TabulatedBivTheory* bp = &b;
    for (MorId g : s.morphisms_into(x)) {
        const PullbackSquare& sq = s.pullback(id, g);
        const ObjId apex = sq.apex;
        const MorId back = s.factor(sq, g, s.identity(s.src(g)));
        for (int m = w.lo; m <= w.hi; ++m) {
            if (!w.contains(k * m))
                continue;
            const GroupHom mv = coop.functor().map(back, k * m);
            out.components.emplace(std::pair{g, m}, [bp, apex, m, k, mv](const IntVector& v) {
                IntVector acc = v;
                for (int e = 1; e < k; ++e)
                    acc = cup(*bp, apex, e * m, m, acc, v);
                return mv.apply(acc);
            });
        }
    }
    return out;
}

namespace {

std::vector<IntVector> sample_elements(const FgAbGroup& g, std::mt19937_64& rng)
{
    const std::size_t n = g.ngens();
    std::vector<IntVector> out;
    std::size_t box = 1;
    for (std::size_t k = 0; k < n && box <= 625; ++k)
        box *= 5;
    if (box <= 625) {
        for (std::size_t idx = 0; idx < box; ++idx) {
            IntVector v(n);
            std::size_t r = idx;
            for (std::size_t k = 0; k < n; ++k, r /= 5)
                v[k] = static_cast<long>(r % 5) - 2;
            out.push_back(std::move(v));
        }
        return out;
    }
    std::uniform_int_distribution<int> dist(-2, 2);
    for (int t = 0; t < 200; ++t) {
        IntVector v(n);
        for (auto& e : v)
            e = dist(rng);
        out.push_back(std::move(v));
    }
    return out;
}

IntVector apply_map(const MapFamily& c, const FgAbGroup& tgt, MorId g, int m, const IntVector& v)
{
    auto it = c.components.find({g, m});
    if (it == c.components.end())
        return zero_vector(tgt.ngens());
    return it->second(v);
}

}  // namespace

ValidationReport map_family_naturality(const CoopTheory& coop, const MapFamily& c, std::uint64_t seed)
{
    ValidationReport rep;
    std::mt19937_64 rng(seed);
    const Site& s = coop.site();
    const GradedFunctor& F = coop.functor();
    const MorId f = c.base;
    const GradeWindow w = F.window();
    for (MorId g : s.morphisms_into(s.tgt(f))) {
        const PullbackSquare& s1 = s.pullback(f, g);
        for (MorId h : s.morphisms_into(s.src(g))) {
            const MorId gh = s.compose(g, h);
            const PullbackSquare& d = s.pullback(f, gh);
            const MorId t = s.factor(s1, d.g_prime, s.compose(h, d.f_prime));
            for (int m = w.lo; m <= w.hi; ++m) {
                const int m2 = c.grade_factor * m;
                const FgAbGroup& out = F.group(s.src(h), m2);
                for (const IntVector& v : sample_elements(F.group(s1.apex, m), rng)) {
                    const IntVector lhs = apply_map(c, out, gh, m, F.map(t, m).apply(v));
                    const IntVector rhs = F.map(h, m2).apply(apply_map(c, F.group(s.src(g), m2), g, m, v));
                    if (!out.equal(lhs, rhs)) {
                        rep.add("naturality", fmt::format("g = {}, h = {}, grade {}, x = {}", s.morphism_name(g),
                                                          s.morphism_name(h), m, to_string(v)));
                        break;
                    }
                }
            }
        }
    }
    return rep;
}

std::optional<AdditivityWitness> non_additivity_witness(const CoopTheory& coop, const MapFamily& c)
{
    const Site& s = coop.site();
    const GradedFunctor& F = coop.functor();
    for (const auto& [key, fn] : c.components) {
        const auto [g, m] = key;
        const FgAbGroup& src = F.group(s.pullback(c.base, g).apex, m);
        const FgAbGroup& tgt = F.group(s.src(g), c.grade_factor * m);
        const std::size_t n = src.ngens();
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p; q < n; ++q) {
                const IntVector x = unit_vector(n, p);
                const IntVector y = unit_vector(n, q);
                IntVector of_sum = fn(x + y);
                IntVector sum_of = fn(x) + fn(y);
                if (!tgt.equal(of_sum, sum_of))
                    return AdditivityWitness{g, m, x, y, tgt.reduce(of_sum), tgt.reduce(sum_of)};
            }
    }
    return std::nullopt;
}

}  // namespace bivar
