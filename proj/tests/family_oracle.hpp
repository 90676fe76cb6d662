#pragma once

// Brute-force compatibility systems for families over the subset lattice,
// assembled straight from bitmasks (restriction / extension by zero on Z^S)
// and solved with rational elimination.

#include "bivar/families.hpp"
#include "bivar/instances.hpp"
#include "support.hpp"

#include <gmpxx.h>

#include <map>
#include <numeric>

namespace bivar::testing {

using Rational = mpq_class;

/// Restriction Z^big -> Z^small as a dense matrix (rows small, cols big).
inline std::vector<std::vector<long>> restrict_matrix(unsigned big, unsigned small)
{
    const auto b = elements(big), s = elements(small);
    std::vector<std::vector<long>> m(s.size(), std::vector<long>(b.size(), 0));
    for (std::size_t r = 0; r < s.size(); ++r)
        for (std::size_t c = 0; c < b.size(); ++c)
            m[r][c] = s[r] == b[c] ? 1 : 0;
    return m;
}

inline std::vector<std::vector<long>> extend_matrix(unsigned small, unsigned big)
{
    auto m = restrict_matrix(big, small);
    std::vector<std::vector<long>> t(m.empty() ? elements(big).size() : m[0].size(), std::vector<long>(m.size(), 0));
    for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t c = 0; c < m[r].size(); ++c)
            t[c][r] = m[r][c];
    return t;
}

/// Unknowns: one integer per entry of each component matrix c_g, g running
/// over inclusions into tgt(f) in id order.
struct OracleSystem {
    struct Slot {
        MorId g;
        unsigned from;  // domain mask of c_g
        unsigned to;    // codomain mask of c_g
        std::size_t offset;
    };
    std::vector<Slot> slots;
    std::size_t unknowns = 0;
    std::vector<std::vector<Rational>> rows;  // constraint rows

    std::size_t index(const Slot& s, std::size_t r, std::size_t c) const { return s.offset + r * elements(s.from).size() + c; }
    const Slot& slot(MorId g) const
    {
        for (const auto& s : slots)
            if (s.g == g)
                return s;
        throw std::runtime_error("no slot");
    }
};

/// Contravariant (restriction presheaf) when `contra`, covariant
/// (extension by zero) otherwise; degree 0, single grade.
inline OracleSystem oracle_system(const Site& site, MorId f, bool contra)
{
    OracleSystem sys;
    const unsigned S = static_cast<unsigned>(site.src(f));
    for (MorId g : site.morphisms_into(site.tgt(f))) {
        const unsigned Yp = static_cast<unsigned>(site.src(g));
        const unsigned Xp = S & Yp;
        OracleSystem::Slot sl{g, contra ? Xp : Yp, contra ? Yp : Xp, sys.unknowns};
        sys.unknowns += elements(sl.from).size() * elements(sl.to).size();
        sys.slots.push_back(sl);
    }
    // Entry (r, c) of  L o c_{g h} o R  -  L' o c_g o R'  as a linear form.
    auto add_equation = [&](const OracleSystem::Slot& a, const std::vector<std::vector<long>>& La,
                            const std::vector<std::vector<long>>& Ra, const OracleSystem::Slot& b,
                            const std::vector<std::vector<long>>& Lb, const std::vector<std::vector<long>>& Rb,
                            std::size_t rows, std::size_t cols) {
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                std::vector<Rational> row(sys.unknowns, 0);
                const std::size_t ai = elements(a.to).size(), aj = elements(a.from).size();
                for (std::size_t p = 0; p < ai; ++p)
                    for (std::size_t q = 0; q < aj; ++q)
                        row[sys.index(a, p, q)] += La[r][p] * Ra[q][c];
                const std::size_t bi = elements(b.to).size(), bj = elements(b.from).size();
                for (std::size_t p = 0; p < bi; ++p)
                    for (std::size_t q = 0; q < bj; ++q)
                        row[sys.index(b, p, q)] -= Lb[r][p] * Rb[q][c];
                sys.rows.push_back(std::move(row));
            }
    };
    auto identity = [](unsigned mask) { return restrict_matrix(mask, mask); };

    for (MorId g : site.morphisms_into(site.tgt(f)))
        for (MorId h : site.morphisms_into(site.src(g))) {
            const MorId gh = site.compose(g, h);
            const unsigned Yp = static_cast<unsigned>(site.src(g));
            const unsigned Ypp = static_cast<unsigned>(site.src(h));
            const unsigned Xp = S & Yp, Xpp = S & Ypp;
            const auto& a = sys.slot(gh);
            const auto& b = sys.slot(g);
            if (contra) {
                // c_{gh} o (h')^*  =  h^* o c_g   : F(X') -> F(Y'')
                add_equation(a, identity(Ypp), restrict_matrix(Xp, Xpp), b, restrict_matrix(Yp, Ypp), identity(Xp),
                             elements(Ypp).size(), elements(Xp).size());
            } else {
                // k'_* o c_{gk}  =  c_g o k_*     : h(Y'') -> h(X')
                add_equation(a, extend_matrix(Xpp, Xp), identity(Ypp), b, identity(Xp), extend_matrix(Ypp, Yp),
                             elements(Xp).size(), elements(Ypp).size());
            }
        }
    return sys;
}

/// Rank by fraction-field row reduction.
inline std::size_t rational_rank(std::vector<std::vector<Rational>> m, std::size_t cols)
{
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
        std::size_t p = rank;
        while (p < m.size() && m[p][c] == 0)
            ++p;
        if (p == m.size())
            continue;
        std::swap(m[p], m[rank]);
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (r == rank || m[r][c] == 0)
                continue;
            const Rational k = m[r][c] / m[rank][c];
            for (std::size_t j = c; j < cols; ++j)
                m[r][j] -= k * m[rank][j];
        }
        ++rank;
    }
    return rank;
}

/// Rational kernel basis, each vector scaled to a primitive integer vector.
inline std::vector<std::vector<Integer>> rational_kernel(std::vector<std::vector<Rational>> m, std::size_t cols)
{
    std::vector<std::size_t> pivots;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
        std::size_t p = rank;
        while (p < m.size() && m[p][c] == 0)
            ++p;
        if (p == m.size())
            continue;
        std::swap(m[p], m[rank]);
        const Rational lead = m[rank][c];
        for (std::size_t j = 0; j < cols; ++j)
            m[rank][j] /= lead;
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (r == rank || m[r][c] == 0)
                continue;
            const Rational k = m[r][c];
            for (std::size_t j = 0; j < cols; ++j)
                m[r][j] -= k * m[rank][j];
        }
        pivots.push_back(c);
        ++rank;
    }
    std::vector<std::vector<Integer>> out;
    for (std::size_t free = 0; free < cols; ++free) {
        if (std::find(pivots.begin(), pivots.end(), free) != pivots.end())
            continue;
        std::vector<Rational> v(cols, 0);
        v[free] = 1;
        for (std::size_t k = 0; k < pivots.size(); ++k)
            v[pivots[k]] = -m[k][free];
        Integer den = 1;
        for (const auto& x : v)
            den = lcm(den, Integer(x.get_den()));
        std::vector<Integer> w;
        Integer g = 0;
        for (const auto& x : v) {
            w.push_back(Integer(x.get_num()) * (den / Integer(x.get_den())));
            g = gcd(g, w.back());
        }
        for (auto& x : w)
            x /= g;
        out.push_back(std::move(w));
    }
    return out;
}

/// Unknown vector of a family: the raw component matrices, zero when absent.
template <Variance V>
std::vector<Integer> flatten(const OracleSystem& sys, const Family<V>& c)
{
    std::vector<Integer> v(sys.unknowns, 0);
    for (const auto& sl : sys.slots) {
        auto it = c.components.find({sl.g, 0});
        if (it == c.components.end())
            continue;
        const IntMatrix& m = it->second.matrix();
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t q = 0; q < m.cols(); ++q)
                v[sys.index(sl, r, q)] = m(r, q);
    }
    return v;
}

template <Variance V>
Family<V> unflatten(const FamilyTheory<V>& t, const OracleSystem& sys, MorId f, const std::vector<Integer>& v)
{
    Family<V> c;
    c.base = f;
    c.degree = 0;
    for (const auto& sl : sys.slots) {
        const std::size_t rows = elements(sl.to).size(), cols = elements(sl.from).size();
        if (rows == 0 || cols == 0)
            continue;
        IntMatrix m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t q = 0; q < cols; ++q)
                m(r, q) = v[sys.index(sl, r, q)];
        c.components.emplace(std::pair{sl.g, 0},
                             GroupHom(t.component_src(f, 0, sl.g, 0), t.component_tgt(f, 0, sl.g, 0), std::move(m)));
    }
    return c;
}

inline bool satisfies(const OracleSystem& sys, const std::vector<Integer>& v)
{
    for (const auto& row : sys.rows) {
        Rational acc = 0;
        for (std::size_t k = 0; k < v.size(); ++k)
            acc += row[k] * Rational(v[k]);
        if (acc != 0)
            return false;
    }
    return true;
}

/// gcd of the maximal minors of the columns `cols` (each of length n); one
/// when they span a saturated lattice.
inline Integer maximal_minor_gcd(const std::vector<std::vector<Integer>>& cols)
{
    if (cols.empty())
        return 1;
    const std::size_t n = cols.front().size(), r = cols.size();
    Integer g = 0;
    std::vector<std::size_t> pick(r);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t start) {
        if (pos == r) {
            std::vector<std::vector<Rational>> m(r, std::vector<Rational>(r));
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < r; ++j)
                    m[i][j] = Rational(cols[j][pick[i]]);
            Rational det = 1;
            for (std::size_t c = 0; c < r; ++c) {
                std::size_t p = c;
                while (p < r && m[p][c] == 0)
                    ++p;
                if (p == r) {
                    det = 0;
                    break;
                }
                if (p != c) {
                    std::swap(m[p], m[c]);
                    det = -det;
                }
                det *= m[c][c];
                for (std::size_t i = c + 1; i < r; ++i) {
                    const Rational k = m[i][c] / m[c][c];
                    for (std::size_t j = c; j < r; ++j)
                        m[i][j] -= k * m[c][j];
                }
            }
            g = gcd(g, Integer(det.get_num()));
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            pick[pos] = i;
            rec(pos + 1, i + 1);
        }
    };
    rec(0, 0);
    return g;
}

}  // namespace bivar::testing
