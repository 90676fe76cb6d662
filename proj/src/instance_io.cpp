#include "bivar/instance_io.hpp"

#include "bivar/errors.hpp"

#include <fmt/core.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

namespace bivar {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& ptr, const std::string& what) { throw SchemaError(ptr.empty() ? "/" : ptr, what); }

std::string escape(const std::string& key)
{
    std::string out;
    for (char c : key) {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

std::string at_key(const std::string& ptr, const std::string& key) { return ptr + "/" + escape(key); }
std::string at_index(const std::string& ptr, std::size_t k) { return ptr + "/" + std::to_string(k); }

const json& require(const json& j, const std::string& ptr, const char* key)
{
    if (!j.is_object())
        fail(ptr, "expected an object");
    auto it = j.find(key);
    if (it == j.end())
        fail(ptr, fmt::format("missing key '{}'", key));
    return *it;
}

const json* optional_key(const json& j, const std::string& ptr, const char* key)
{
    if (!j.is_object())
        fail(ptr, "expected an object");
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& require_array(const json& j, const std::string& ptr)
{
    if (!j.is_array())
        fail(ptr, "expected an array");
    return j;
}

std::string to_str(const json& j, const std::string& ptr)
{
    if (!j.is_string())
        fail(ptr, "expected a string");
    return j.get<std::string>();
}

Integer to_integer(const json& j, const std::string& ptr)
{
    if (j.is_number_integer())
        return j.is_number_unsigned() ? Integer(std::to_string(j.get<std::uint64_t>())) : Integer(std::to_string(j.get<std::int64_t>()));
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        Integer v;
        if (s.empty() || v.set_str(s, 10) != 0)
            fail(ptr, "'" + s + "' is not a decimal integer");
        return v;
    }
    fail(ptr, "expected an integer");
}

int to_int(const json& j, const std::string& ptr)
{
    if (!j.is_number_integer())
        fail(ptr, "expected a small integer");
    const auto v = j.get<std::int64_t>();
    if (v < -100000 || v > 100000)
        fail(ptr, "integer out of range");
    return static_cast<int>(v);
}

IntVector to_vector(const json& j, const std::string& ptr, std::size_t n)
{
    require_array(j, ptr);
    if (j.size() != n)
        fail(ptr, fmt::format("expected {} entries, found {}", n, j.size()));
    IntVector v;
    for (std::size_t k = 0; k < n; ++k)
        v.push_back(to_integer(j[k], at_index(ptr, k)));
    return v;
}

IntMatrix to_matrix(const json& j, const std::string& ptr, std::size_t rows, std::size_t cols)
{
    require_array(j, ptr);
    if (j.size() != rows)
        fail(ptr, fmt::format("expected {} rows, found {}", rows, j.size()));
    IntMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const IntVector row = to_vector(j[r], at_index(ptr, r), cols);
        for (std::size_t c = 0; c < cols; ++c)
            m(r, c) = row[c];
    }
    return m;
}

FgAbGroup to_group(const json& j, const std::string& ptr)
{
    const json& fr = require(j, ptr, "free_rank");
    const int r = to_int(fr, at_key(ptr, "free_rank"));
    if (r < 0)
        fail(at_key(ptr, "free_rank"), "negative rank");
    const std::string tp = at_key(ptr, "torsion");
    const json& tj = require_array(require(j, ptr, "torsion"), tp);
    std::vector<Integer> torsion;
    for (std::size_t k = 0; k < tj.size(); ++k) {
        Integer d = to_integer(tj[k], at_index(tp, k));
        if (d < 2)
            fail(at_index(tp, k), "torsion coefficients must be at least 2");
        torsion.push_back(d);
    }
    const std::size_t n = static_cast<std::size_t>(r) + torsion.size();
    IntMatrix rel(n, torsion.size());
    for (std::size_t k = 0; k < torsion.size(); ++k)
        rel(static_cast<std::size_t>(r) + k, k) = torsion[k];
    return FgAbGroup(n, std::move(rel));
}

GroupHom to_hom(const json& j, const std::string& ptr, const FgAbGroup& src, const FgAbGroup& tgt)
{
    IntMatrix m = to_matrix(j, ptr, tgt.ngens(), src.ngens());
    if (!GroupHom::is_well_defined(src, tgt, m))
        fail(ptr, "matrix does not define a homomorphism between the declared groups");
    return GroupHom(src, tgt, std::move(m));
}

template <typename Fn>
auto guarded(const std::string& ptr, Fn&& fn)
{
    try {
        return fn();
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        fail(ptr, e.what());
    }
}

struct Names {
    const Site* site;
    ObjId object(const json& j, const std::string& ptr) const
    {
        auto x = site->find_object(to_str(j, ptr));
        if (!x)
            fail(ptr, "unknown object '" + j.get<std::string>() + "'");
        return *x;
    }
    MorId morphism(const json& j, const std::string& ptr) const
    {
        auto m = site->find_morphism(to_str(j, ptr));
        if (!m)
            fail(ptr, "unknown morphism '" + j.get<std::string>() + "'");
        return *m;
    }
};

std::shared_ptr<const Site> parse_site(const json& doc)
{
    SiteData d;
    std::map<std::string, ObjId> objs;
    const json& oj = require_array(require(doc, "", "objects"), "/objects");
    for (std::size_t k = 0; k < oj.size(); ++k) {
        const std::string name = to_str(oj[k], at_index("/objects", k));
        if (!objs.emplace(name, k).second)
            fail(at_index("/objects", k), "duplicate object '" + name + "'");
        d.objects.push_back(name);
    }
    auto obj = [&](const json& j, const std::string& ptr) {
        auto it = objs.find(to_str(j, ptr));
        if (it == objs.end())
            fail(ptr, "unknown object '" + j.get<std::string>() + "'");
        return it->second;
    };

    std::map<std::string, MorId> mors;
    const json& mj = require_array(require(doc, "", "morphisms"), "/morphisms");
    for (std::size_t k = 0; k < mj.size(); ++k) {
        const std::string p = at_index("/morphisms", k);
        const std::string name = to_str(require(mj[k], p, "name"), at_key(p, "name"));
        if (!mors.emplace(name, k).second)
            fail(at_key(p, "name"), "duplicate morphism '" + name + "'");
        d.morphisms.push_back(
            {name, obj(require(mj[k], p, "src"), at_key(p, "src")), obj(require(mj[k], p, "tgt"), at_key(p, "tgt"))});
    }
    auto mor = [&](const json& j, const std::string& ptr) {
        auto it = mors.find(to_str(j, ptr));
        if (it == mors.end())
            fail(ptr, "unknown morphism '" + j.get<std::string>() + "'");
        return it->second;
    };

    const json& ij = require(doc, "", "identities");
    if (!ij.is_object())
        fail("/identities", "expected an object");
    d.identities.assign(d.objects.size(), 0);
    std::vector<bool> seen(d.objects.size(), false);
    for (const auto& [key, val] : ij.items()) {
        const std::string p = at_key("/identities", key);
        auto it = objs.find(key);
        if (it == objs.end())
            fail(p, "unknown object '" + key + "'");
        d.identities[it->second] = mor(val, p);
        seen[it->second] = true;
    }
    for (std::size_t x = 0; x < seen.size(); ++x)
        if (!seen[x])
            fail("/identities", "no identity for object '" + d.objects[x] + "'");

    const json& cj = require_array(require(doc, "", "composition"), "/composition");
    for (std::size_t k = 0; k < cj.size(); ++k) {
        const std::string p = at_index("/composition", k);
        require_array(cj[k], p);
        if (cj[k].size() != 3)
            fail(p, "expected [g, f, g o f]");
        const MorId g = mor(cj[k][0], at_index(p, 0));
        const MorId f = mor(cj[k][1], at_index(p, 1));
        if (!d.composition.emplace(std::pair{g, f}, mor(cj[k][2], at_index(p, 2))).second)
            fail(p, "duplicate composite");
    }

    d.confined.assign(d.morphisms.size(), false);
    if (const json* cf = optional_key(doc, "", "confined")) {
        require_array(*cf, "/confined");
        for (std::size_t k = 0; k < cf->size(); ++k)
            d.confined[mor((*cf)[k], at_index("/confined", k))] = true;
    }

    const json& pj = require_array(require(doc, "", "pullbacks"), "/pullbacks");
    for (std::size_t k = 0; k < pj.size(); ++k) {
        const std::string p = at_index("/pullbacks", k);
        PullbackSquare sq;
        sq.f = mor(require(pj[k], p, "f"), at_key(p, "f"));
        sq.g = mor(require(pj[k], p, "g"), at_key(p, "g"));
        sq.apex = obj(require(pj[k], p, "apex"), at_key(p, "apex"));
        sq.g_prime = mor(require(pj[k], p, "g_prime"), at_key(p, "g_prime"));
        sq.f_prime = mor(require(pj[k], p, "f_prime"), at_key(p, "f_prime"));
        if (!d.pullbacks.emplace(std::pair{sq.f, sq.g}, sq).second)
            fail(p, "duplicate square");
    }

    if (const json* fo = optional_key(doc, "", "final_object"); fo && !fo->is_null())
        d.final_object = obj(*fo, "/final_object");

    return guarded("", [&] { return std::make_shared<const Site>(std::move(d)); });
}

std::shared_ptr<const GradedFunctor> parse_functor(const json& j, const std::string& ptr, const std::shared_ptr<const Site>& site)
{
    const Names n{site.get()};
    const std::string vs = to_str(require(j, ptr, "variance"), at_key(ptr, "variance"));
    Variance v;
    if (vs == "contra")
        v = Variance::contra;
    else if (vs == "cov")
        v = Variance::cov;
    else
        fail(at_key(ptr, "variance"), "variance must be 'contra' or 'cov'");
    const std::string wp = at_key(ptr, "window");
    const json& wj = require_array(require(j, ptr, "window"), wp);
    if (wj.size() != 2)
        fail(wp, "expected [lo, hi]");
    const GradeWindow w{to_int(wj[0], at_index(wp, 0)), to_int(wj[1], at_index(wp, 1))};
    if (w.lo > w.hi)
        fail(wp, "empty window");
    auto F = std::make_shared<GradedFunctor>(site, v, w);

    const std::string gp = at_key(ptr, "groups");
    const json& gj = require_array(require(j, ptr, "groups"), gp);
    for (std::size_t k = 0; k < gj.size(); ++k) {
        const std::string p = at_index(gp, k);
        const ObjId x = n.object(require(gj[k], p, "object"), at_key(p, "object"));
        const int m = to_int(require(gj[k], p, "grade"), at_key(p, "grade"));
        if (!w.contains(m))
            fail(at_key(p, "grade"), "grade outside the window");
        F->set_group(x, m, to_group(require(gj[k], p, "group"), at_key(p, "group")));
    }
    const std::string mp = at_key(ptr, "maps");
    const json& mj = require_array(require(j, ptr, "maps"), mp);
    for (std::size_t k = 0; k < mj.size(); ++k) {
        const std::string p = at_index(mp, k);
        const MorId m = n.morphism(require(mj[k], p, "morphism"), at_key(p, "morphism"));
        const int grade = to_int(require(mj[k], p, "grade"), at_key(p, "grade"));
        const ObjId from = v == Variance::contra ? site->tgt(m) : site->src(m);
        const ObjId to = v == Variance::contra ? site->src(m) : site->tgt(m);
        GroupHom h = to_hom(require(mj[k], p, "matrix"), at_key(p, "matrix"), F->group(from, grade), F->group(to, grade));
        guarded(p, [&] {
            F->set_map(m, grade, std::move(h));
            return 0;
        });
    }
    return F;
}

std::shared_ptr<const TabulatedBivTheory> parse_theory(const json& j, const std::string& ptr,
                                                       const std::shared_ptr<const Site>& site)
{
    const Names n{site.get()};
    const Site& s = *site;
    const std::string dp = at_key(ptr, "degrees");
    const json& dj = require_array(require(j, ptr, "degrees"), dp);
    if (dj.size() != 2)
        fail(dp, "expected [lo, hi]");
    const GradeWindow w{to_int(dj[0], at_index(dp, 0)), to_int(dj[1], at_index(dp, 1))};
    if (w.lo > w.hi)
        fail(dp, "empty window");
    bool all = false;
    if (const json* pa = optional_key(j, ptr, "pushforward_all")) {
        if (!pa->is_boolean())
            fail(at_key(ptr, "pushforward_all"), "expected a boolean");
        all = pa->get<bool>();
    }
    auto b = std::make_shared<TabulatedBivTheory>(site, w, all);
    auto degree = [&](const json& x, const std::string& p) {
        const int i = to_int(x, p);
        if (!w.contains(i))
            fail(p, "degree outside the window");
        return i;
    };

    const std::string gp = at_key(ptr, "groups");
    const json& gj = require_array(require(j, ptr, "groups"), gp);
    for (std::size_t k = 0; k < gj.size(); ++k) {
        const std::string p = at_index(gp, k);
        const MorId f = n.morphism(require(gj[k], p, "morphism"), at_key(p, "morphism"));
        const int i = degree(require(gj[k], p, "degree"), at_key(p, "degree"));
        b->set_group(f, i, to_group(require(gj[k], p, "group"), at_key(p, "group")));
    }

    if (const json* pj = optional_key(j, ptr, "products")) {
        const std::string pp = at_key(ptr, "products");
        require_array(*pj, pp);
        for (std::size_t k = 0; k < pj->size(); ++k) {
            const std::string p = at_index(pp, k);
            const json& e = (*pj)[k];
            const MorId f = n.morphism(require(e, p, "f"), at_key(p, "f"));
            const MorId g = n.morphism(require(e, p, "g"), at_key(p, "g"));
            if (s.tgt(f) != s.src(g))
                fail(p, "f and g do not compose");
            const int i = degree(require(e, p, "i"), at_key(p, "i"));
            const int jj = degree(require(e, p, "j"), at_key(p, "j"));
            if (!w.contains(i + jj))
                fail(p, "i + j outside the window");
            const MorId gf = s.compose(g, f);
            IntMatrix t = to_matrix(require(e, p, "table"), at_key(p, "table"), b->group(gf, i + jj).ngens(),
                                    b->group(f, i).ngens() * b->group(g, jj).ngens());
            guarded(p, [&] {
                b->set_product(f, g, i, jj, std::move(t));
                return 0;
            });
        }
    }

    if (const json* pj = optional_key(j, ptr, "pushforwards")) {
        const std::string pp = at_key(ptr, "pushforwards");
        require_array(*pj, pp);
        for (std::size_t k = 0; k < pj->size(); ++k) {
            const std::string p = at_index(pp, k);
            const json& e = (*pj)[k];
            const MorId f = n.morphism(require(e, p, "f"), at_key(p, "f"));
            const MorId ctx = n.morphism(require(e, p, "ctx"), at_key(p, "ctx"));
            if (s.tgt(f) != s.src(ctx))
                fail(p, "f and ctx do not compose");
            const int i = degree(require(e, p, "degree"), at_key(p, "degree"));
            GroupHom h = to_hom(require(e, p, "matrix"), at_key(p, "matrix"), b->group(s.compose(ctx, f), i),
                                b->group(ctx, i));
            guarded(p, [&] {
                b->set_pushforward(f, ctx, i, std::move(h));
                return 0;
            });
        }
    }

    if (const json* pj = optional_key(j, ptr, "pullbacks")) {
        const std::string pp = at_key(ptr, "pullbacks");
        require_array(*pj, pp);
        for (std::size_t k = 0; k < pj->size(); ++k) {
            const std::string p = at_index(pp, k);
            const json& e = (*pj)[k];
            const MorId f = n.morphism(require(e, p, "f"), at_key(p, "f"));
            const MorId g = n.morphism(require(e, p, "g"), at_key(p, "g"));
            if (s.tgt(f) != s.tgt(g))
                fail(p, "f and g do not form a cospan");
            const int i = degree(require(e, p, "degree"), at_key(p, "degree"));
            const MorId fp = guarded(p, [&] { return s.pullback(f, g).f_prime; });
            GroupHom h = to_hom(require(e, p, "matrix"), at_key(p, "matrix"), b->group(f, i), b->group(fp, i));
            guarded(p, [&] {
                b->set_pullback(f, g, i, std::move(h));
                return 0;
            });
        }
    }

    if (const json* uj = optional_key(j, ptr, "units")) {
        const std::string up = at_key(ptr, "units");
        if (!uj->is_object())
            fail(up, "expected an object");
        for (const auto& [key, val] : uj->items()) {
            const std::string p = at_key(up, key);
            auto x = s.find_object(key);
            if (!x)
                fail(p, "unknown object '" + key + "'");
            b->set_unit(*x, to_vector(val, p, b->group(s.identity(*x), 0).ngens()));
        }
    }
    return b;
}

template <typename T>
std::shared_ptr<const T> lookup(const std::map<std::string, std::shared_ptr<const T>>& m, const json& j,
                                const std::string& ptr, const char* what)
{
    const std::string name = to_str(j, ptr);
    auto it = m.find(name);
    if (it == m.end())
        fail(ptr, fmt::format("unknown {} '{}'", what, name));
    return it->second;
}

// ---------------------------------------------------------------------------
// Writing

ordered_json integer_json(const Integer& v)
{
    if (v.fits_slong_p())
        return v.get_si();
    return v.get_str();
}

ordered_json vector_json(const IntVector& v)
{
    ordered_json out = ordered_json::array();
    for (const auto& x : v)
        out.push_back(integer_json(x));
    return out;
}

ordered_json matrix_json(const IntMatrix& m)
{
    ordered_json out = ordered_json::array();
    for (std::size_t r = 0; r < m.rows(); ++r)
        out.push_back(vector_json(m.row(r)));
    return out;
}

ordered_json group_json(const FgAbGroup& g)
{
    ordered_json out;
    out["free_rank"] = g.free_rank();
    out["torsion"] = vector_json(g.torsion());
    return out;
}

template <typename T>
std::string name_of(const std::map<std::string, std::shared_ptr<const T>>& m, const T* p, const char* what)
{
    for (const auto& [k, v] : m)
        if (v.get() == p)
            return k;
    throw Error(fmt::format("{} is not part of the bundle", what));
}

ordered_json functor_json(const GradedFunctor& F)
{
    const Site& s = *F.site();
    const GradeWindow w = F.window();
    ordered_json out;
    out["variance"] = F.variance() == Variance::contra ? "contra" : "cov";
    out["window"] = {w.lo, w.hi};
    ordered_json groups = ordered_json::array();
    for (ObjId x = 0; x < s.object_count(); ++x)
        for (int m = w.lo; m <= w.hi; ++m)
            if (!F.group(x, m).is_trivial())
                groups.push_back({{"object", s.object_name(x)}, {"grade", m}, {"group", group_json(F.group(x, m))}});
    out["groups"] = std::move(groups);
    ordered_json maps = ordered_json::array();
    for (MorId g = 0; g < s.morphism_count(); ++g) {
        if (F.variance() == Variance::cov && !s.is_confined(g))
            continue;
        for (int m = w.lo; m <= w.hi; ++m) {
            const GroupHom h = F.map(g, m);
            if (h.src().is_trivial() || h.tgt().is_trivial())
                continue;
            maps.push_back({{"morphism", s.morphism_name(g)}, {"grade", m}, {"matrix", matrix_json(h.canonical_matrix())}});
        }
    }
    out["maps"] = std::move(maps);
    return out;
}

ordered_json theory_json(const TabulatedBivTheory& b)
{
    const Site& s = *b.site();
    const GradeWindow w = b.degrees();
    const std::size_t nm = s.morphism_count();
    ordered_json out;
    out["degrees"] = {w.lo, w.hi};
    out["pushforward_all"] = b.pushforward_all();

    ordered_json groups = ordered_json::array();
    for (MorId f = 0; f < nm; ++f)
        for (int i = w.lo; i <= w.hi; ++i)
            if (!b.group(f, i).is_trivial())
                groups.push_back({{"morphism", s.morphism_name(f)}, {"degree", i}, {"group", group_json(b.group(f, i))}});
    out["groups"] = std::move(groups);

    ordered_json products = ordered_json::array();
    for (MorId f = 0; f < nm; ++f)
        for (MorId g : s.morphisms_from(s.tgt(f)))
            for (int i = w.lo; i <= w.hi; ++i)
                for (int j = w.lo; j <= w.hi; ++j) {
                    if (!w.contains(i + j))
                        continue;
                    const FgAbGroup& a = b.group(f, i);
                    const FgAbGroup& c = b.group(g, j);
                    const FgAbGroup& ac = b.group(s.compose(g, f), i + j);
                    if (a.is_trivial() || c.is_trivial() || ac.is_trivial())
                        continue;
                    const IntMatrix& ra = a.canonical_representatives();
                    const IntMatrix& rc = c.canonical_representatives();
                    IntMatrix table(ac.rank(), a.rank() * c.rank());
                    for (std::size_t p = 0; p < a.rank(); ++p)
                        for (std::size_t q = 0; q < c.rank(); ++q)
                            table.set_column(p * c.rank() + q,
                                             ac.to_canonical(b.product(f, g, i, j, ra.column(p), rc.column(q))));
                    products.push_back({{"f", s.morphism_name(f)},
                                        {"g", s.morphism_name(g)},
                                        {"i", i},
                                        {"j", j},
                                        {"table", matrix_json(table)}});
                }
    out["products"] = std::move(products);

    ordered_json pushes = ordered_json::array();
    for (MorId f = 0; f < nm; ++f) {
        if (!b.allows_pushforward(f))
            continue;
        for (MorId ctx : s.morphisms_from(s.tgt(f)))
            for (int i = w.lo; i <= w.hi; ++i) {
                const GroupHom h = b.pushforward(f, ctx, i);
                if (h.src().is_trivial() || h.tgt().is_trivial())
                    continue;
                pushes.push_back({{"f", s.morphism_name(f)},
                                  {"ctx", s.morphism_name(ctx)},
                                  {"degree", i},
                                  {"matrix", matrix_json(h.canonical_matrix())}});
            }
    }
    out["pushforwards"] = std::move(pushes);

    ordered_json pulls = ordered_json::array();
    for (MorId f = 0; f < nm; ++f)
        for (MorId g : s.morphisms_into(s.tgt(f)))
            for (int i = w.lo; i <= w.hi; ++i) {
                const GroupHom h = b.pullback(f, g, i);
                if (h.src().is_trivial() || h.tgt().is_trivial())
                    continue;
                pulls.push_back({{"f", s.morphism_name(f)},
                                 {"g", s.morphism_name(g)},
                                 {"degree", i},
                                 {"matrix", matrix_json(h.canonical_matrix())}});
            }
    out["pullbacks"] = std::move(pulls);

    ordered_json units = ordered_json::object();
    if (w.contains(0))
        for (ObjId x = 0; x < s.object_count(); ++x) {
            const FgAbGroup& g = b.group(s.identity(x), 0);
            if (!g.is_trivial())
                units[s.object_name(x)] = vector_json(g.to_canonical(b.unit(x)));
        }
    out["units"] = std::move(units);
    return out;
}

}  // namespace

InstanceBundle parse_instance(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        if (auto pos = what.find("while parsing"); pos != std::string::npos)
            what = what.substr(pos);
        throw SchemaError(fmt::format("{}:{}", line, col), "syntax error " + what);
    }
    if (!doc.is_object())
        fail("", "document must be an object");

    InstanceBundle out;
    out.site = parse_site(doc);
    if (const ValidationReport r = validate_site(*out.site); !r.ok())
        fail("", "not a valid site: " + r.violations().front().clause + ": " + r.violations().front().witness);

    if (const json* fj = optional_key(doc, "", "functors")) {
        if (!fj->is_object())
            fail("/functors", "expected an object");
        for (const auto& [name, val] : fj->items())
            out.functors[name] = parse_functor(val, at_key("/functors", name), out.site);
    }
    if (const json* tj = optional_key(doc, "", "transformations")) {
        if (!tj->is_object())
            fail("/transformations", "expected an object");
        for (const auto& [name, val] : tj->items()) {
            const std::string p = at_key("/transformations", name);
            auto src = lookup(out.functors, require(val, p, "src"), at_key(p, "src"), "functor");
            auto tgt = lookup(out.functors, require(val, p, "tgt"), at_key(p, "tgt"), "functor");
            auto t = guarded(p, [&] { return std::make_shared<NaturalTransf>(src, tgt); });
            const std::string cp = at_key(p, "components");
            const json& cj = require_array(require(val, p, "components"), cp);
            const Names n{out.site.get()};
            for (std::size_t k = 0; k < cj.size(); ++k) {
                const std::string q = at_index(cp, k);
                const ObjId x = n.object(require(cj[k], q, "object"), at_key(q, "object"));
                const int m = to_int(require(cj[k], q, "grade"), at_key(q, "grade"));
                GroupHom h = to_hom(require(cj[k], q, "matrix"), at_key(q, "matrix"), src->group(x, m), tgt->group(x, m));
                guarded(q, [&] {
                    t->set_component(x, m, std::move(h));
                    return 0;
                });
            }
            out.transformations[name] = t;
        }
    }
    if (const json* tj = optional_key(doc, "", "theories")) {
        if (!tj->is_object())
            fail("/theories", "expected an object");
        for (const auto& [name, val] : tj->items())
            out.theories[name] = parse_theory(val, at_key("/theories", name), out.site);
    }
    if (const json* gj = optional_key(doc, "", "groth")) {
        if (!gj->is_object())
            fail("/groth", "expected an object");
        for (const auto& [name, val] : gj->items()) {
            const std::string p = at_key("/groth", name);
            auto src = lookup(out.theories, require(val, p, "src"), at_key(p, "src"), "theory");
            auto tgt = lookup(out.theories, require(val, p, "tgt"), at_key(p, "tgt"), "theory");
            auto g = guarded(p, [&] { return std::make_shared<GrothTransf>(src, tgt); });
            const std::string cp = at_key(p, "components");
            const json& cj = require_array(require(val, p, "components"), cp);
            const Names n{out.site.get()};
            for (std::size_t k = 0; k < cj.size(); ++k) {
                const std::string q = at_index(cp, k);
                const MorId f = n.morphism(require(cj[k], q, "morphism"), at_key(q, "morphism"));
                const int i = to_int(require(cj[k], q, "degree"), at_key(q, "degree"));
                GroupHom h = to_hom(require(cj[k], q, "matrix"), at_key(q, "matrix"), src->group(f, i), tgt->group(f, i));
                guarded(q, [&] {
                    g->set_component(f, i, std::move(h));
                    return 0;
                });
            }
            out.groth[name] = g;
        }
    }
    return out;
}

InstanceBundle load_instance(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw SchemaError(path.string(), "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_instance(ss.str());
}

std::string serialize_instance(const InstanceBundle& b)
{
    const Site& s = *b.site;
    ordered_json doc;
    doc["objects"] = ordered_json::array();
    for (ObjId x = 0; x < s.object_count(); ++x)
        doc["objects"].push_back(s.object_name(x));
    doc["morphisms"] = ordered_json::array();
    for (MorId m = 0; m < s.morphism_count(); ++m)
        doc["morphisms"].push_back(
            {{"name", s.morphism_name(m)}, {"src", s.object_name(s.src(m))}, {"tgt", s.object_name(s.tgt(m))}});
    doc["identities"] = ordered_json::object();
    for (ObjId x = 0; x < s.object_count(); ++x)
        doc["identities"][s.object_name(x)] = s.morphism_name(s.identity(x));
    doc["composition"] = ordered_json::array();
    for (const auto& [gf, c] : s.data().composition)
        doc["composition"].push_back({s.morphism_name(gf.first), s.morphism_name(gf.second), s.morphism_name(c)});
    doc["confined"] = ordered_json::array();
    for (MorId m = 0; m < s.morphism_count(); ++m)
        if (s.is_confined(m))
            doc["confined"].push_back(s.morphism_name(m));
    doc["pullbacks"] = ordered_json::array();
    for (const auto& [key, sq] : s.data().pullbacks)
        doc["pullbacks"].push_back({{"f", s.morphism_name(sq.f)},
                                    {"g", s.morphism_name(sq.g)},
                                    {"apex", s.object_name(sq.apex)},
                                    {"g_prime", s.morphism_name(sq.g_prime)},
                                    {"f_prime", s.morphism_name(sq.f_prime)}});
    if (s.final_object())
        doc["final_object"] = s.object_name(*s.final_object());

    doc["functors"] = ordered_json::object();
    for (const auto& [name, F] : b.functors)
        doc["functors"][name] = functor_json(*F);

    doc["transformations"] = ordered_json::object();
    for (const auto& [name, t] : b.transformations) {
        ordered_json tj;
        tj["src"] = name_of(b.functors, &t->src(), "transformation source");
        tj["tgt"] = name_of(b.functors, &t->tgt(), "transformation target");
        tj["components"] = ordered_json::array();
        const GradeWindow w = t->grades();
        for (ObjId x = 0; x < s.object_count(); ++x)
            for (int m = w.lo; m <= w.hi; ++m) {
                const GroupHom h = t->component(x, m);
                if (h.src().is_trivial() || h.tgt().is_trivial())
                    continue;
                tj["components"].push_back(
                    {{"object", s.object_name(x)}, {"grade", m}, {"matrix", matrix_json(h.canonical_matrix())}});
            }
        doc["transformations"][name] = std::move(tj);
    }

    doc["theories"] = ordered_json::object();
    for (const auto& [name, th] : b.theories)
        doc["theories"][name] = theory_json(*th);

    doc["groth"] = ordered_json::object();
    for (const auto& [name, g] : b.groth) {
        ordered_json gj;
        gj["src"] = name_of(b.theories, &g->src(), "Grothendieck source");
        gj["tgt"] = name_of(b.theories, &g->tgt(), "Grothendieck target");
        gj["components"] = ordered_json::array();
        const GradeWindow w = g->src().degrees();
        for (MorId f = 0; f < s.morphism_count(); ++f)
            for (int i = w.lo; i <= w.hi; ++i) {
                const GroupHom h = g->component(f, i);
                if (h.src().is_trivial() || h.tgt().is_trivial())
                    continue;
                gj["components"].push_back(
                    {{"morphism", s.morphism_name(f)}, {"degree", i}, {"matrix", matrix_json(h.canonical_matrix())}});
            }
        doc["groth"][name] = std::move(gj);
    }
    return doc.dump(2) + "\n";
}

}  // namespace bivar
