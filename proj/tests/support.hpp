#pragma once

// Helpers shared by the test suites: hand-built thin sites, subset-lattice
// lookups and random elements.

#include "bivar/instances.hpp"
#include "bivar/site.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace bivar::testing {

/// Thin category on `names` with x -> y whenever leq[x][y]. The apex of a
/// non-degenerate cospan is picked among the greatest lower bounds by `pick`
/// (first one when unset). Throws when some cospan has no lower bound.
struct ThinSpec {
    std::vector<std::string> names;
    std::vector<std::vector<bool>> leq;
    std::function<bool(ObjId, ObjId)> confined = [](ObjId, ObjId) { return true; };
    std::function<ObjId(const std::vector<ObjId>& glbs, ObjId x, ObjId y)> pick;
    std::optional<ObjId> final_object;
};

inline SiteData thin_site_data(const ThinSpec& spec)
{
    SiteData d;
    const std::size_t n = spec.names.size();
    d.objects = spec.names;
    std::vector<std::vector<MorId>> arrow(n, std::vector<MorId>(n, SIZE_MAX));
    for (ObjId x = 0; x < n; ++x)
        for (ObjId y = 0; y < n; ++y)
            if (spec.leq[x][y]) {
                arrow[x][y] = d.morphisms.size();
                d.morphisms.push_back({x == y ? "id_" + spec.names[x] : spec.names[x] + "->" + spec.names[y], x, y});
                d.confined.push_back(x == y || spec.confined(x, y));
            }
    d.identities.resize(n);
    for (ObjId x = 0; x < n; ++x)
        d.identities[x] = arrow[x][x];
    for (ObjId x = 0; x < n; ++x)
        for (ObjId y = 0; y < n; ++y)
            for (ObjId z = 0; z < n; ++z)
                if (spec.leq[x][y] && spec.leq[y][z])
                    d.composition[{arrow[y][z], arrow[x][y]}] = arrow[x][z];
    for (ObjId x = 0; x < n; ++x)
        for (ObjId y2 = 0; y2 < n; ++y2)
            for (ObjId y = 0; y < n; ++y) {
                if (!spec.leq[x][y] || !spec.leq[y2][y])
                    continue;
                PullbackSquare sq{arrow[x][y], arrow[y2][y], 0, 0, 0};
                if (x == y) {
                    sq.apex = y2;
                } else if (y2 == y) {
                    sq.apex = x;
                } else {
                    std::vector<ObjId> lower, glbs;
                    for (ObjId w = 0; w < n; ++w)
                        if (spec.leq[w][x] && spec.leq[w][y2])
                            lower.push_back(w);
                    for (ObjId w : lower) {
                        bool top = true;
                        for (ObjId v : lower)
                            top = top && spec.leq[v][w];
                        if (top)
                            glbs.push_back(w);
                    }
                    if (glbs.empty())
                        throw std::runtime_error("cospan without a meet");
                    sq.apex = spec.pick ? spec.pick(glbs, x, y2) : glbs.front();
                }
                sq.g_prime = arrow[sq.apex][x];
                sq.f_prime = arrow[sq.apex][y2];
                d.pullbacks[{sq.f, sq.g}] = sq;
            }
    d.final_object = spec.final_object;
    return d;
}

/// a <= b <= c.
inline ThinSpec chain3()
{
    ThinSpec s;
    s.names = {"a", "b", "c"};
    s.leq = {{true, true, true}, {false, true, true}, {false, false, true}};
    s.final_object = 2;
    return s;
}

/// Two isomorphic bottoms a, a2 below u. Non-degenerate squares choose
/// the bottom that differs from the source of the second leg, so pasting is
/// not strict.
inline ThinSpec twin_bottoms()
{
    ThinSpec s;
    s.names = {"a", "a2", "u"};
    s.leq = {{true, true, true}, {true, true, true}, {false, false, true}};
    s.pick = [](const std::vector<ObjId>& glbs, ObjId, ObjId y2) {
        for (ObjId g : glbs)
            if (g != y2)
                return g;
        return glbs.front();
    };
    s.final_object = 2;
    return s;
}

/// Inclusion S -> T in subsets_site, objects indexed by bitmask.
inline MorId inclusion(const Site& s, unsigned from, unsigned to)
{
    const std::string name = from == to ? "id_" + subset_name(from) : subset_name(from) + "->" + subset_name(to);
    auto m = s.find_morphism(name);
    if (!m)
        throw std::runtime_error("no morphism " + name);
    return *m;
}

inline IntVector random_vector(std::mt19937_64& rng, std::size_t n, long lo = -3, long hi = 3)
{
    std::uniform_int_distribution<long> dist(lo, hi);
    IntVector v;
    for (std::size_t k = 0; k < n; ++k)
        v.push_back(Integer(dist(rng)));
    return v;
}

/// Popcount-sized bit lists: the elements of S in increasing order.
inline std::vector<unsigned> elements(unsigned mask)
{
    std::vector<unsigned> out;
    for (unsigned b = 0; b < 8; ++b)
        if (mask & (1u << b))
            out.push_back(b);
    return out;
}

}  // namespace bivar::testing
