#include "bivar/operational.hpp"

#include "bivar/errors.hpp"

#include <fmt/core.h>

namespace bivar {

std::shared_ptr<const GradedFunctor> homology_functor(const TabulatedBivTheory& b)
{
    const Site& s = *b.site();
    const GradeWindow d = b.degrees();
    auto h = std::make_shared<GradedFunctor>(b.site(), Variance::cov, GradeWindow{-d.hi, -d.lo});
    for (ObjId x = 0; x < s.object_count(); ++x)
        for (int m = -d.hi; m <= -d.lo; ++m)
            h->set_group(x, m, b.group(s.to_final(x), -m));
    for (MorId k = 0; k < s.morphism_count(); ++k) {
        if (!s.is_confined(k) || !b.allows_pushforward(k))
            continue;
        const MorId py = s.to_final(s.tgt(k));
        for (int m = -d.hi; m <= -d.lo; ++m)
            h->set_map(k, m, b.pushforward(k, py, -m));
    }
    return h;
}

OpClass op_from_bivariant(const TabulatedBivTheory& b, const OpTheory& op, MorId f, int i, const IntVector& alpha)
{
    const Site& s = *b.site();
    const GradeWindow w = op.functor().window();
    OpClass c;
    c.base = f;
    c.degree = i;
    for (MorId g : s.morphisms_into(s.tgt(f))) {
        const PullbackSquare& sq = s.pullback(f, g);
        const IntVector beta = b.pullback(f, g, i).apply(alpha);
        const MorId py = s.to_final(s.src(g));
        for (int m = w.lo; m <= w.hi; ++m) {
            if (!w.contains(m - i))
                continue;
            const FgAbGroup& src = op.component_src(f, i, g, m);
            const FgAbGroup& tgt = op.component_tgt(f, i, g, m);
            IntMatrix mat(tgt.ngens(), src.ngens());
            for (std::size_t q = 0; q < src.ngens(); ++q)
                mat.set_column(q, b.product(sq.f_prime, py, i, -m, beta, unit_vector(src.ngens(), q)));
            c.components.emplace(std::pair{g, m}, GroupHom(src, tgt, std::move(mat)));
        }
    }
    return c;
}

GroupHom op_map(const TabulatedBivTheory& b, const OpTheory& op, MorId f, int i)
{
    const FgAbGroup& src = b.group(f, i);
    const OpGroup& tgt = op.group(f, i);
    IntMatrix mat(tgt.group().ngens(), src.ngens());
    for (std::size_t p = 0; p < src.ngens(); ++p) {
        auto x = tgt.encode(op_from_bivariant(b, op, f, i, unit_vector(src.ngens(), p)));
        if (!x)
            throw Error(fmt::format("op of generator {} of B^{}({}) is not compatible", p, i, b.site()->morphism_name(f)));
        mat.set_column(p, *x);
    }
    return GroupHom(src, tgt.group(), std::move(mat));
}

IntVector ev(const TabulatedBivTheory& b, const OpTheory& op, const OpClass& c)
{
    const Site& s = *b.site();
    const ObjId pt = s.require_final_object();
    if (s.tgt(c.base) != pt)
        throw CospanMismatch(fmt::format("evaluation needs a class over a map to the final object, got {}",
                                         s.describe(c.base)));
    const ObjId x = s.src(c.base);
    const MorId px = s.to_final(x);
    const int i = c.degree;
    const MorId idpt = s.identity(pt);
    const PullbackSquare& sq = s.pullback(c.base, idpt);
    if (!op.functor().window().contains(0) || !op.functor().window().contains(-i))
        return zero_vector(b.group(px, i).ngens());
    const IntVector y = op.component(c, idpt, 0).apply(b.unit(pt));
    if (s.is_identity(sq.g_prime))
        return y;
    return b.pushforward(sq.g_prime, px, i).apply(y);
}

ValidationReport op_identities(const TabulatedBivTheory& b, const OpTheory& op)
{
    return grothendieck_identities<Variance::cov>(
        b, op, [&](MorId f, int i, const IntVector& a) { return op_from_bivariant(b, op, f, i, a); });
}

ValidationReport op_point_isomorphism(const TabulatedBivTheory& b, const OpTheory& op)
{
    ValidationReport rep;
    const Site& s = *b.site();
    const GradeWindow w = b.degrees();
    for (ObjId x = 0; x < s.object_count(); ++x) {
        const MorId px = s.to_final(x);
        for (int i = w.lo; i <= w.hi; ++i) {
            const std::string where = fmt::format("object {}, degree {}", s.object_name(x), i);
            const GroupHom m = op_map(b, op, px, i);
            if (!m.is_injective())
                rep.add("op-injective", where);
            if (!image(m).group().isomorphic(m.src()))
                rep.add("op-image", where);
            const OpGroup& grp = op.group(px, i);
            for (std::size_t p = 0; p < m.src().ngens(); ++p) {
                const IntVector a = unit_vector(m.src().ngens(), p);
                const OpClass c = op_from_bivariant(b, op, px, i, a);
                auto code = grp.encode(c);
                if (!code || !op.equal(grp.decode(*code), c))
                    rep.add("op-codec", fmt::format("{}, generator {}", where, p));
                if (!m.src().equal(ev(b, op, c), a))
                    rep.add("op-evaluation", fmt::format("{}, generator {}", where, p));
            }
        }
    }
    return rep;
}

HatBridge make_op_bridge(std::shared_ptr<const TabulatedBivTheory> b)
{
    auto op = std::make_shared<OpTheory>(homology_functor(*b));
    const TabulatedBivTheory& bb = *b;
    return make_bridge<Variance::cov>(
        std::move(b), *op, [&](MorId f, int i, const IntVector& a) { return op_from_bivariant(bb, *op, f, i, a); });
}

HatGammaResult hat_gamma_op(const GrothTransf& gamma, HatTarget mode)
{
    if (mode == HatTarget::image) {
        const ImageSubtheory img = image_subtheory(gamma);
        return hat_between(make_op_bridge(gamma.src_ptr()), make_op_bridge(img.theory), *img.corestriction);
    }
    HatGammaResult out;
    const TabulatedBivTheory& tgt = gamma.tgt();
    const Site& s = *tgt.site();
    for (ObjId x = 0; x < s.object_count(); ++x)
        for (int i = tgt.degrees().lo; i <= tgt.degrees().hi; ++i)
            if (!gamma.component(s.to_final(x), i).is_surjective())
                out.report.add("covariant-surjective", fmt::format("object {}, degree {}", s.object_name(x), i));
    if (!out.report.ok())
        return out;
    return hat_between(make_op_bridge(gamma.src_ptr()), make_op_bridge(gamma.tgt_ptr()), gamma);
}

}  // namespace bivar
