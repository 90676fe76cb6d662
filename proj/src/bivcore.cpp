#include "bivar/bivcore.hpp"

#include "bivar/errors.hpp"

#include <fmt/core.h>

#include <functional>

namespace bivar {

// ---------------------------------------------------------------------------
// TabulatedBivTheory

TabulatedBivTheory::TabulatedBivTheory(std::shared_ptr<const Site> site, GradeWindow degrees, bool pushforward_all)
    : site_(std::move(site)), degrees_(degrees), pushforward_all_(pushforward_all)
{
    if (!site_)
        throw SiteError("theory needs a site");
    if (degrees_.lo > degrees_.hi)
        throw DegreeOverflow(fmt::format("empty degree window [{}, {}]", degrees_.lo, degrees_.hi));
}

void TabulatedBivTheory::set_group(MorId f, int i, FgAbGroup g)
{
    if (f >= site_->morphism_count())
        throw SiteError("set_group: unknown morphism");
    if (!degrees_.contains(i))
        throw DegreeOverflow(fmt::format("degree {} outside window [{}, {}]", i, degrees_.lo, degrees_.hi));
    groups_[{f, i}] = std::move(g);
}

const FgAbGroup& TabulatedBivTheory::group(MorId f, int i) const
{
    auto it = groups_.find({f, i});
    return it == groups_.end() ? zero_ : it->second;
}

void TabulatedBivTheory::set_product(MorId f, MorId g, int i, int j, IntMatrix table)
{
    const MorId gf = site_->compose(g, f);
    const std::size_t na = group(f, i).ngens();
    const std::size_t nb = group(g, j).ngens();
    const std::size_t nc = group(gf, i + j).ngens();
    if (table.rows() != nc || table.cols() != na * nb)
        throw ShapeError(fmt::format("product table for ({}, {}) in degrees ({}, {}) is {}x{}, expected {}x{}",
                                     site_->morphism_name(f), site_->morphism_name(g), i, j, table.rows(),
                                     table.cols(), nc, na * nb));
    products_.insert_or_assign({f, g, i, j}, std::move(table));
}

void TabulatedBivTheory::set_pushforward(MorId f, MorId ctx, int i, GroupHom hom)
{
    if (!allows_pushforward(f))
        throw NotConfined(fmt::format("pushforward along non-confined {}", site_->describe(f)));
    const MorId whole = site_->compose(ctx, f);
    if (!hom.src().same_presentation(group(whole, i)) || !hom.tgt().same_presentation(group(ctx, i)))
        throw ShapeError(fmt::format("pushforward along {} in context {} has the wrong groups",
                                     site_->morphism_name(f), site_->morphism_name(ctx)));
    pushforwards_.insert_or_assign({f, ctx, i}, std::move(hom));
}

void TabulatedBivTheory::set_pullback(MorId f, MorId g, int i, GroupHom hom)
{
    const PullbackSquare& sq = site_->pullback(f, g);
    if (!hom.src().same_presentation(group(f, i)) || !hom.tgt().same_presentation(group(sq.f_prime, i)))
        throw ShapeError(fmt::format("pullback over ({}, {}) has the wrong groups", site_->morphism_name(f),
                                     site_->morphism_name(g)));
    pullbacks_.insert_or_assign({f, g, i}, std::move(hom));
}

void TabulatedBivTheory::set_unit(ObjId x, IntVector coords)
{
    const FgAbGroup& g = group(site_->identity(x), 0);
    if (coords.size() != g.ngens())
        throw ShapeError(fmt::format("unit of {} has {} coordinates, group has {} generators",
                                     site_->object_name(x), coords.size(), g.ngens()));
    units_[x] = std::move(coords);
}

IntMatrix TabulatedBivTheory::product_table(MorId f, MorId g, int i, int j) const
{
    auto it = products_.find({f, g, i, j});
    if (it != products_.end())
        return it->second;
    const MorId gf = site_->compose(g, f);
    return IntMatrix(group(gf, i + j).ngens(), group(f, i).ngens() * group(g, j).ngens());
}

IntVector TabulatedBivTheory::product(MorId f, MorId g, int i, int j, const IntVector& a, const IntVector& b) const
{
    const MorId gf = site_->compose(g, f);
    const FgAbGroup& tgt = group(gf, i + j);
    const std::size_t na = group(f, i).ngens();
    const std::size_t nb = group(g, j).ngens();
    if (a.size() != na || b.size() != nb)
        throw ShapeError("product: factor has the wrong length");
    IntVector out = zero_vector(tgt.ngens());
    auto it = products_.find({f, g, i, j});
    if (it == products_.end())
        return out;
    const IntMatrix& t = it->second;
    for (std::size_t p = 0; p < na; ++p) {
        if (a[p] == 0)
            continue;
        for (std::size_t q = 0; q < nb; ++q) {
            if (b[q] == 0)
                continue;
            const Integer w = a[p] * b[q];
            for (std::size_t r = 0; r < t.rows(); ++r)
                out[r] += w * t(r, p * nb + q);
        }
    }
    return tgt.reduce(out);
}

GroupHom TabulatedBivTheory::pushforward(MorId f, MorId ctx, int i) const
{
    if (!allows_pushforward(f))
        throw NotConfined(fmt::format("pushforward along non-confined {}", site_->describe(f)));
    const MorId whole = site_->compose(ctx, f);
    auto it = pushforwards_.find({f, ctx, i});
    if (it != pushforwards_.end())
        return it->second;
    if (site_->is_identity(f))
        return GroupHom::identity(group(ctx, i));
    return GroupHom::zero(group(whole, i), group(ctx, i));
}

GroupHom TabulatedBivTheory::pullback(MorId f, MorId g, int i) const
{
    const PullbackSquare& sq = site_->pullback(f, g);
    auto it = pullbacks_.find({f, g, i});
    if (it != pullbacks_.end())
        return it->second;
    if (site_->is_identity(g) && sq.f_prime == f)
        return GroupHom::identity(group(f, i));
    return GroupHom::zero(group(f, i), group(sq.f_prime, i));
}

IntVector TabulatedBivTheory::unit(ObjId x) const
{
    auto it = units_.find(x);
    if (it != units_.end())
        return it->second;
    return zero_vector(group(site_->identity(x), 0).ngens());
}

// ---------------------------------------------------------------------------
// validate_axioms

namespace {

class AxiomChecker {
public:
    explicit AxiomChecker(const TabulatedBivTheory& b) : b_(b), s_(*b.site())
    {
        for (int i = b.degrees().lo; i <= b.degrees().hi; ++i)
            degs_.push_back(i);
    }

    ValidationReport run()
    {
        guarded("product-well-defined", [&] { well_defined(); });
        guarded("A1", [&] { a1(); });
        guarded("A2", [&] { a2(); });
        guarded("A3", [&] { a3(); });
        guarded("A12", [&] { a12(); });
        guarded("A13", [&] { a13(); });
        guarded("A23", [&] { a23(); });
        guarded("A123", [&] { a123(); });
        guarded("Units", [&] { units(); });
        return std::move(r_);
    }

private:
    void guarded(const char* clause, const std::function<void()>& body)
    {
        try {
            body();
        } catch (const Error& e) {
            r_.add(clause, fmt::format("check aborted: {}", e.what()));
        }
    }

    // Each tuple is checked independently so one bad square does not hide others.
    void tuple(const char* clause, const std::function<void()>& body)
    {
        try {
            body();
        } catch (const Error& e) {
            r_.add(clause, e.what());
        }
    }

    const std::string& name(MorId m) const { return s_.morphism_name(m); }
    std::size_t ngens(MorId f, int i) const { return b_.group(f, i).ngens(); }
    static IntVector gen(std::size_t n, std::size_t k) { return unit_vector(n, k); }

    // B^i(p o u) -> B^i(p) along a comparison isomorphism u.
    GroupHom transport(MorId u, MorId p, int i) const
    {
        if (s_.is_identity(u))
            return GroupHom::identity(b_.group(p, i));
        if (!b_.allows_pushforward(u))
            throw NotConfined(fmt::format("comparison isomorphism {} is not confined", s_.describe(u)));
        return b_.pushforward(u, p, i);
    }

    void well_defined()
    {
        for (MorId f = 0; f < s_.morphism_count(); ++f)
            for (MorId g : s_.morphisms_from(s_.tgt(f)))
                for (int i : degs_)
                    for (int j : degs_)
                        tuple("product-well-defined", [&] {
                            const FgAbGroup& A = b_.group(f, i);
                            const FgAbGroup& B = b_.group(g, j);
                            const FgAbGroup& C = b_.group(s_.compose(g, f), i + j);
                            for (std::size_t c = 0; c < A.relations().cols(); ++c)
                                for (std::size_t q = 0; q < B.ngens(); ++q)
                                    if (!C.is_zero(b_.product(f, g, i, j, A.relations().column(c), gen(B.ngens(), q)))) {
                                        r_.add("product-well-defined",
                                               fmt::format("({}, {}) degrees ({}, {}): relation {} of the left factor "
                                                           "times generator {} is nonzero",
                                                           name(f), name(g), i, j, c, q));
                                        return;
                                    }
                            for (std::size_t p = 0; p < A.ngens(); ++p)
                                for (std::size_t c = 0; c < B.relations().cols(); ++c)
                                    if (!C.is_zero(b_.product(f, g, i, j, gen(A.ngens(), p), B.relations().column(c)))) {
                                        r_.add("product-well-defined",
                                               fmt::format("({}, {}) degrees ({}, {}): generator {} times relation {} "
                                                           "of the right factor is nonzero",
                                                           name(f), name(g), i, j, p, c));
                                        return;
                                    }
                        });
    }

    // (a . b) . c = a . (b . c)
    void a1()
    {
        for (MorId f = 0; f < s_.morphism_count(); ++f)
            for (MorId g : s_.morphisms_from(s_.tgt(f)))
                for (MorId h : s_.morphisms_from(s_.tgt(g)))
                    for (int i : degs_)
                        for (int j : degs_)
                            for (int k : degs_)
                                tuple("A1", [&] { a1_tuple(f, g, h, i, j, k); });
    }

    void a1_tuple(MorId f, MorId g, MorId h, int i, int j, int k)
    {
        const std::size_t na = ngens(f, i), nb = ngens(g, j), nc = ngens(h, k);
        if (na == 0 || nb == 0 || nc == 0)
            return;
        const MorId gf = s_.compose(g, f);
        const MorId hg = s_.compose(h, g);
        const MorId hgf = s_.compose(h, gf);
        if (hgf != s_.compose(hg, f))
            throw SiteError("composition is not associative here");
        const FgAbGroup& tgt = b_.group(hgf, i + j + k);
        for (std::size_t p = 0; p < na; ++p)
            for (std::size_t q = 0; q < nb; ++q)
                for (std::size_t r = 0; r < nc; ++r) {
                    const IntVector lhs =
                        b_.product(gf, h, i + j, k, b_.product(f, g, i, j, gen(na, p), gen(nb, q)), gen(nc, r));
                    const IntVector rhs =
                        b_.product(f, hg, i, j + k, gen(na, p), b_.product(g, h, j, k, gen(nb, q), gen(nc, r)));
                    if (!tgt.equal(lhs, rhs)) {
                        r_.add("A1", fmt::format("({}, {}, {}) degrees ({}, {}, {}) generators ({}, {}, {}): "
                                                 "(a.b).c = {} but a.(b.c) = {}",
                                                 name(f), name(g), name(h), i, j, k, p, q, r, to_string(lhs),
                                                 to_string(rhs)));
                        return;
                    }
                }
    }

    // (g o f)_* = g_* f_*
    void a2()
    {
        for (MorId f = 0; f < s_.morphism_count(); ++f) {
            if (!b_.allows_pushforward(f))
                continue;
            for (MorId g : s_.morphisms_from(s_.tgt(f))) {
                if (!b_.allows_pushforward(g))
                    continue;
                for (MorId h : s_.morphisms_from(s_.tgt(g)))
                    for (int i : degs_)
                        tuple("A2", [&] {
                            const MorId gf = s_.compose(g, f);
                            const MorId hg = s_.compose(h, g);
                            if (!b_.allows_pushforward(gf))
                                throw NotConfined(fmt::format("{} is not confined", s_.describe(gf)));
                            const GroupHom lhs = b_.pushforward(gf, h, i);
                            const GroupHom rhs = compose(b_.pushforward(g, h, i), b_.pushforward(f, hg, i));
                            if (!is_equal(lhs, rhs))
                                r_.add("A2", fmt::format("f = {}, g = {}, context {}, degree {}: (g o f)_* != g_* f_*",
                                                         name(f), name(g), name(h), i));
                        });
            }
        }
    }

    // (g o h)^* = h^* g^*
    void a3()
    {
        for (MorId f = 0; f < s_.morphism_count(); ++f)
            for (MorId g : s_.morphisms_into(s_.tgt(f)))
                for (MorId h : s_.morphisms_into(s_.src(g)))
                    for (int i : degs_)
                        tuple("A3", [&] {
                            if (ngens(f, i) == 0)
                                return;
                            const PullbackSquare& s1 = s_.pullback(f, g);
                            const PullbackSquare& d = s_.pullback(f, s_.compose(g, h));
                            const PasteComparison pc = s_.paste_horizontal(f, g, h);
                            const GroupHom lhs = b_.pullback(f, s_.compose(g, h), i);
                            const GroupHom rhs = compose(transport(pc.from_pasted, d.f_prime, i),
                                                         compose(b_.pullback(s1.f_prime, h, i), b_.pullback(f, g, i)));
                            if (!is_equal(lhs, rhs))
                                r_.add("A3", fmt::format("f = {}, g = {}, h = {}, degree {}: (g o h)^* != h^* g^*",
                                                         name(f), name(g), name(h), i));
                        });
    }

    // f_*(a . b) = (f_* a) . b
    void a12()
    {
        for (MorId f = 0; f < s_.morphism_count(); ++f) {
            if (!b_.allows_pushforward(f))
                continue;
            for (MorId g : s_.morphisms_from(s_.tgt(f)))
                for (MorId h : s_.morphisms_from(s_.tgt(g)))
                    for (int i : degs_)
                        for (int j : degs_)
                            tuple("A12", [&] {
                                const MorId gf = s_.compose(g, f);
                                const MorId hg = s_.compose(h, g);
                                const std::size_t na = ngens(gf, i), nb = ngens(h, j);
                                if (na == 0 || nb == 0)
                                    return;
                                const GroupHom fa = b_.pushforward(f, g, i);
                                const GroupHom fab = b_.pushforward(f, hg, i + j);
                                const FgAbGroup& tgt = b_.group(hg, i + j);
                                for (std::size_t p = 0; p < na; ++p)
                                    for (std::size_t q = 0; q < nb; ++q) {
                                        const IntVector lhs = fab.apply(b_.product(gf, h, i, j, gen(na, p), gen(nb, q)));
                                        const IntVector rhs = b_.product(g, h, i, j, fa.apply(gen(na, p)), gen(nb, q));
                                        if (!tgt.equal(lhs, rhs)) {
                                            r_.add("A12",
                                                   fmt::format("f = {}, g = {}, h = {}, degrees ({}, {}), generators "
                                                               "({}, {}): f_*(a.b) = {} but (f_*a).b = {}",
                                                               name(f), name(g), name(h), i, j, p, q, to_string(lhs),
                                                               to_string(rhs)));
                                            return;
                                        }
                                    }
                            });
        }
    }

    // h^*(a . b) = h'^* a . h^* b
    void a13()
    {
        for (MorId f = 0; f < s_.morphism_count(); ++f)
            for (MorId g : s_.morphisms_from(s_.tgt(f)))
                for (MorId h : s_.morphisms_into(s_.tgt(g)))
                    for (int i : degs_)
                        for (int j : degs_)
                            tuple("A13", [&] {
                                const std::size_t na = ngens(f, i), nb = ngens(g, j);
                                if (na == 0 || nb == 0)
                                    return;
                                const MorId gf = s_.compose(g, f);
                                const PullbackSquare& s1 = s_.pullback(g, h);
                                const PullbackSquare& s2 = s_.pullback(f, s1.g_prime);
                                const PullbackSquare& d = s_.pullback(gf, h);
                                const PasteComparison pc = s_.paste_vertical(f, g, h);
                                const GroupHom hab = b_.pullback(gf, h, i + j);
                                const GroupHom ha = b_.pullback(f, s1.g_prime, i);
                                const GroupHom hb = b_.pullback(g, h, j);
                                const GroupHom move = transport(pc.from_pasted, d.f_prime, i + j);
                                const FgAbGroup& tgt = b_.group(d.f_prime, i + j);
                                for (std::size_t p = 0; p < na; ++p)
                                    for (std::size_t q = 0; q < nb; ++q) {
                                        const IntVector lhs = hab.apply(b_.product(f, g, i, j, gen(na, p), gen(nb, q)));
                                        const IntVector rhs = move.apply(b_.product(
                                            s2.f_prime, s1.f_prime, i, j, ha.apply(gen(na, p)), hb.apply(gen(nb, q))));
                                        if (!tgt.equal(lhs, rhs)) {
                                            r_.add("A13",
                                                   fmt::format("f = {}, g = {}, h = {}, degrees ({}, {}), generators "
                                                               "({}, {}): h^*(a.b) = {} but h'^*a.h^*b = {}",
                                                               name(f), name(g), name(h), i, j, p, q, to_string(lhs),
                                                               to_string(rhs)));
                                            return;
                                        }
                                    }
                            });
    }

    // f'_* h^* = h^* f_*
    void a23()
    {
        for (MorId f = 0; f < s_.morphism_count(); ++f) {
            if (!b_.allows_pushforward(f))
                continue;
            for (MorId g : s_.morphisms_from(s_.tgt(f)))
                for (MorId h : s_.morphisms_into(s_.tgt(g)))
                    for (int i : degs_)
                        tuple("A23", [&] {
                            const MorId gf = s_.compose(g, f);
                            if (ngens(gf, i) == 0)
                                return;
                            const PullbackSquare& s1 = s_.pullback(g, h);
                            const PullbackSquare& s2 = s_.pullback(f, s1.g_prime);
                            const PasteComparison pc = s_.paste_vertical(f, g, h);
                            const MorId pasted_leg = s_.compose(s1.f_prime, s2.f_prime);
                            if (!b_.allows_pushforward(s2.f_prime))
                                throw NotConfined(fmt::format("base change {} of {} is not confined",
                                                              s_.describe(s2.f_prime), name(f)));
                            const GroupHom lhs = compose(b_.pushforward(s2.f_prime, s1.f_prime, i),
                                                         compose(transport(pc.to_pasted, pasted_leg, i),
                                                                 b_.pullback(gf, h, i)));
                            const GroupHom rhs = compose(b_.pullback(g, h, i), b_.pushforward(f, g, i));
                            if (!is_equal(lhs, rhs))
                                r_.add("A23", fmt::format("f = {}, g = {}, h = {}, degree {}: f'_* h^* != h^* f_*",
                                                          name(f), name(g), name(h), i));
                        });
        }
    }

    // g'_*(g^* a . b) = a . g_* b
    void a123()
    {
        for (MorId f = 0; f < s_.morphism_count(); ++f)
            for (MorId g : s_.morphisms_into(s_.tgt(f))) {
                if (!b_.allows_pushforward(g))
                    continue;
                for (MorId h : s_.morphisms_from(s_.tgt(f)))
                    for (int i : degs_)
                        for (int j : degs_)
                            tuple("A123", [&] {
                                const MorId hg = s_.compose(h, g);
                                const MorId hf = s_.compose(h, f);
                                const std::size_t na = ngens(f, i), nb = ngens(hg, j);
                                if (na == 0 || nb == 0)
                                    return;
                                const PullbackSquare& sq = s_.pullback(f, g);
                                if (s_.compose(hg, sq.f_prime) != s_.compose(hf, sq.g_prime))
                                    throw SiteError("chosen square does not commute");
                                if (!b_.allows_pushforward(sq.g_prime))
                                    throw NotConfined(fmt::format("base change {} of {} is not confined",
                                                                  s_.describe(sq.g_prime), name(g)));
                                const GroupHom ga = b_.pullback(f, g, i);
                                const GroupHom push = b_.pushforward(sq.g_prime, hf, i + j);
                                const GroupHom gb = b_.pushforward(g, h, j);
                                const FgAbGroup& tgt = b_.group(hf, i + j);
                                for (std::size_t p = 0; p < na; ++p)
                                    for (std::size_t q = 0; q < nb; ++q) {
                                        const IntVector lhs = push.apply(
                                            b_.product(sq.f_prime, hg, i, j, ga.apply(gen(na, p)), gen(nb, q)));
                                        const IntVector rhs = b_.product(f, h, i, j, gen(na, p), gb.apply(gen(nb, q)));
                                        if (!tgt.equal(lhs, rhs)) {
                                            r_.add("A123",
                                                   fmt::format("f = {}, g = {}, h = {}, degrees ({}, {}), generators "
                                                               "({}, {}): g'_*(g^*a.b) = {} but a.g_*b = {}",
                                                               name(f), name(g), name(h), i, j, p, q, to_string(lhs),
                                                               to_string(rhs)));
                                            return;
                                        }
                                    }
                            });
            }
    }

    void units()
    {
        for (MorId f = 0; f < s_.morphism_count(); ++f) {
            const ObjId x = s_.src(f);
            const ObjId y = s_.tgt(f);
            for (int i : degs_)
                tuple("Units", [&] {
                    const std::size_t n = ngens(f, i);
                    const FgAbGroup& G = b_.group(f, i);
                    for (std::size_t p = 0; p < n; ++p) {
                        const IntVector right = b_.product(f, s_.identity(y), i, 0, gen(n, p), b_.unit(y));
                        if (!G.equal(right, gen(n, p))) {
                            r_.add("Units", fmt::format("object {}: a.1_{} != a for generator {} of B^{}({})",
                                                        s_.object_name(y), s_.object_name(y), p, i, s_.describe(f)));
                            return;
                        }
                        const IntVector left = b_.product(s_.identity(x), f, 0, i, b_.unit(x), gen(n, p));
                        if (!G.equal(left, gen(n, p))) {
                            r_.add("Units", fmt::format("object {}: 1_{}.a != a for generator {} of B^{}({})",
                                                        s_.object_name(x), s_.object_name(x), p, i, s_.describe(f)));
                            return;
                        }
                    }
                });
        }
        for (ObjId x = 0; x < s_.object_count(); ++x)
            for (MorId g : s_.morphisms_into(x))
                tuple("Units", [&] {
                    const PullbackSquare& sq = s_.pullback(s_.identity(x), g);
                    const ObjId xp = s_.src(g);
                    if (sq.f_prime != s_.identity(xp))
                        throw SiteError(fmt::format("square over (id, {}) is not degenerate", name(g)));
                    const IntVector pulled = b_.pullback(s_.identity(x), g, 0).apply(b_.unit(x));
                    if (!b_.group(sq.f_prime, 0).equal(pulled, b_.unit(xp)))
                        r_.add("Units", fmt::format("object {}: g^*1_{} != 1_{} for g = {}", s_.object_name(x),
                                                    s_.object_name(x), s_.object_name(xp), s_.describe(g)));
                });
    }

    const TabulatedBivTheory& b_;
    const Site& s_;
    std::vector<int> degs_;
    ValidationReport r_;
};

}  // namespace

ValidationReport validate_axioms(const TabulatedBivTheory& b) { return AxiomChecker(b).run(); }

// ---------------------------------------------------------------------------
// GrothTransf

GrothTransf::GrothTransf(std::shared_ptr<const TabulatedBivTheory> src, std::shared_ptr<const TabulatedBivTheory> tgt)
    : src_(std::move(src)), tgt_(std::move(tgt))
{
    if (!src_ || !tgt_)
        throw ShapeError("transformation needs two theories");
    if (src_->site() != tgt_->site())
        throw SiteError("transformation between theories on different sites");
}

void GrothTransf::set_component(MorId f, int i, GroupHom hom)
{
    if (!hom.src().same_presentation(src_->group(f, i)) || !hom.tgt().same_presentation(tgt_->group(f, i)))
        throw ShapeError(fmt::format("component at {} degree {} has the wrong groups",
                                     src_->site()->morphism_name(f), i));
    components_.insert_or_assign({f, i}, std::move(hom));
}

GroupHom GrothTransf::component(MorId f, int i) const
{
    auto it = components_.find({f, i});
    if (it != components_.end())
        return it->second;
    return GroupHom::zero(src_->group(f, i), tgt_->group(f, i));
}

namespace {

std::vector<int> union_degrees(const TabulatedBivTheory& a, const TabulatedBivTheory& b)
{
    std::vector<int> d;
    for (int i = std::min(a.degrees().lo, b.degrees().lo); i <= std::max(a.degrees().hi, b.degrees().hi); ++i)
        d.push_back(i);
    return d;
}

}  // namespace

ValidationReport validate_groth(const GrothTransf& gamma)
{
    ValidationReport r;
    const TabulatedBivTheory& A = gamma.src();
    const TabulatedBivTheory& B = gamma.tgt();
    const Site& s = *A.site();
    const std::vector<int> degs = union_degrees(A, B);
    auto guarded = [&](const char* clause, const std::function<void()>& body) {
        try {
            body();
        } catch (const Error& e) {
            r.add(clause, e.what());
        }
    };

    for (MorId f = 0; f < s.morphism_count(); ++f)
        for (MorId g : s.morphisms_from(s.tgt(f)))
            for (int i : degs)
                for (int j : degs)
                    guarded("groth-product", [&] {
                        const std::size_t na = A.group(f, i).ngens(), nb = A.group(g, j).ngens();
                        const MorId gf = s.compose(g, f);
                        const GroupHom ga = gamma.component(f, i), gb = gamma.component(g, j);
                        const GroupHom gab = gamma.component(gf, i + j);
                        for (std::size_t p = 0; p < na; ++p)
                            for (std::size_t q = 0; q < nb; ++q) {
                                const IntVector lhs = gab.apply(A.product(f, g, i, j, unit_vector(na, p), unit_vector(nb, q)));
                                const IntVector rhs =
                                    B.product(f, g, i, j, ga.apply(unit_vector(na, p)), gb.apply(unit_vector(nb, q)));
                                if (!B.group(gf, i + j).equal(lhs, rhs)) {
                                    r.add("groth-product",
                                          fmt::format("({}, {}) degrees ({}, {}) generators ({}, {}): gamma(a.b) = {} "
                                                      "but gamma(a).gamma(b) = {}",
                                                      s.morphism_name(f), s.morphism_name(g), i, j, p, q, to_string(lhs),
                                                      to_string(rhs)));
                                    return;
                                }
                            }
                    });

    for (MorId f = 0; f < s.morphism_count(); ++f) {
        if (!A.allows_pushforward(f) || !B.allows_pushforward(f))
            continue;
        for (MorId ctx : s.morphisms_from(s.tgt(f)))
            for (int i : degs)
                guarded("groth-pushforward", [&] {
                    const MorId whole = s.compose(ctx, f);
                    const GroupHom lhs = compose(gamma.component(ctx, i), A.pushforward(f, ctx, i));
                    const GroupHom rhs = compose(B.pushforward(f, ctx, i), gamma.component(whole, i));
                    if (!is_equal(lhs, rhs))
                        r.add("groth-pushforward", fmt::format("f = {}, context {}, degree {}: gamma f_* != f_* gamma",
                                                               s.morphism_name(f), s.morphism_name(ctx), i));
                });
    }

    for (MorId f = 0; f < s.morphism_count(); ++f)
        for (MorId g : s.morphisms_into(s.tgt(f)))
            for (int i : degs)
                guarded("groth-pullback", [&] {
                    const PullbackSquare& sq = s.pullback(f, g);
                    const GroupHom lhs = compose(gamma.component(sq.f_prime, i), A.pullback(f, g, i));
                    const GroupHom rhs = compose(B.pullback(f, g, i), gamma.component(f, i));
                    if (!is_equal(lhs, rhs))
                        r.add("groth-pullback", fmt::format("f = {}, g = {}, degree {}: gamma g^* != g^* gamma",
                                                            s.morphism_name(f), s.morphism_name(g), i));
                });
    return r;
}

// ---------------------------------------------------------------------------
// Image subtheory

namespace {

IntVector preimage_or_throw(const Subgroup& sub, const IntVector& y, const std::string& what)
{
    auto x = sub.preimage(y);
    if (!x)
        throw InvalidTransformation("image is not closed under " + what);
    return *x;
}

}  // namespace

ImageSubtheory image_subtheory(const GrothTransf& gamma)
{
    const ValidationReport rep = validate_groth(gamma);
    if (!rep.ok())
        throw InvalidTransformation("not a Grothendieck transformation: " + rep.violations().front().clause + ": " +
                                    rep.violations().front().witness);
    const TabulatedBivTheory& A = gamma.src();
    const TabulatedBivTheory& B = gamma.tgt();
    const Site& s = *B.site();
    const GradeWindow w = B.degrees();
    auto theory = std::make_shared<TabulatedBivTheory>(B.site(), w, A.pushforward_all() && B.pushforward_all());

    ImageSubtheory out;
    for (MorId f = 0; f < s.morphism_count(); ++f)
        for (int i = w.lo; i <= w.hi; ++i) {
            Subgroup sub = image(gamma.component(f, i));
            theory->set_group(f, i, sub.group());
            out.subgroups.emplace(std::make_pair(f, i), std::move(sub));
        }
    auto sub = [&](MorId f, int i) -> const Subgroup& { return out.subgroups.at({f, i}); };
    auto inc = [&](MorId f, int i, std::size_t k) { return sub(f, i).inclusion().matrix().column(k); };

    for (MorId f = 0; f < s.morphism_count(); ++f)
        for (MorId g : s.morphisms_from(s.tgt(f)))
            for (int i = w.lo; i <= w.hi; ++i)
                for (int j = w.lo; j <= w.hi; ++j) {
                    if (!w.contains(i + j))
                        continue;
                    const MorId gf = s.compose(g, f);
                    const std::size_t na = sub(f, i).group().ngens(), nb = sub(g, j).group().ngens();
                    IntMatrix table(sub(gf, i + j).group().ngens(), na * nb);
                    for (std::size_t p = 0; p < na; ++p)
                        for (std::size_t q = 0; q < nb; ++q)
                            table.set_column(p * nb + q,
                                             preimage_or_throw(sub(gf, i + j),
                                                               B.product(f, g, i, j, inc(f, i, p), inc(g, j, q)),
                                                               "products"));
                    theory->set_product(f, g, i, j, std::move(table));
                }

    for (MorId f = 0; f < s.morphism_count(); ++f) {
        if (!theory->allows_pushforward(f))
            continue;
        for (MorId ctx : s.morphisms_from(s.tgt(f)))
            for (int i = w.lo; i <= w.hi; ++i) {
                const MorId whole = s.compose(ctx, f);
                const GroupHom push = B.pushforward(f, ctx, i);
                const Subgroup& from = sub(whole, i);
                IntMatrix m(sub(ctx, i).group().ngens(), from.group().ngens());
                for (std::size_t k = 0; k < from.group().ngens(); ++k)
                    m.set_column(k, preimage_or_throw(sub(ctx, i), push.apply(inc(whole, i, k)), "pushforward"));
                theory->set_pushforward(f, ctx, i, GroupHom(from.group(), sub(ctx, i).group(), m));
            }
    }

    for (MorId f = 0; f < s.morphism_count(); ++f)
        for (MorId g : s.morphisms_into(s.tgt(f)))
            for (int i = w.lo; i <= w.hi; ++i) {
                const PullbackSquare& sq = s.pullback(f, g);
                const GroupHom pull = B.pullback(f, g, i);
                IntMatrix m(sub(sq.f_prime, i).group().ngens(), sub(f, i).group().ngens());
                for (std::size_t k = 0; k < sub(f, i).group().ngens(); ++k)
                    m.set_column(k, preimage_or_throw(sub(sq.f_prime, i), pull.apply(inc(f, i, k)), "pullback"));
                theory->set_pullback(f, g, i, GroupHom(sub(f, i).group(), sub(sq.f_prime, i).group(), m));
            }

    if (w.contains(0))
        for (ObjId x = 0; x < s.object_count(); ++x) {
            const MorId id = s.identity(x);
            const IntVector gu = gamma.component(id, 0).apply(A.unit(x));
            theory->set_unit(x, preimage_or_throw(sub(id, 0), gu, "units"));
        }

    std::shared_ptr<const TabulatedBivTheory> img = theory;
    auto core = std::make_shared<GrothTransf>(gamma.src_ptr(), img);
    auto incl = std::make_shared<GrothTransf>(img, gamma.tgt_ptr());
    for (MorId f = 0; f < s.morphism_count(); ++f)
        for (int i = w.lo; i <= w.hi; ++i) {
            const Subgroup& sg = sub(f, i);
            const GroupHom c = gamma.component(f, i);
            IntMatrix m(sg.group().ngens(), c.src().ngens());
            for (std::size_t k = 0; k < c.src().ngens(); ++k)
                m.set_column(k, preimage_or_throw(sg, c.apply(unit_vector(c.src().ngens(), k)), "corestriction"));
            core->set_component(f, i, GroupHom(c.src(), sg.group(), m));
            incl->set_component(f, i, sg.inclusion());
        }
    out.theory = img;
    out.corestriction = core;
    out.inclusion = incl;
    return out;
}

}  // namespace bivar
