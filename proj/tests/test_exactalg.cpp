#include "bivar/errors.hpp"
#include "bivar/exactalg.hpp"

#include <doctest.h>

#include <functional>
#include <random>
#include <set>

using namespace bivar;

namespace {

IntMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, long lo, long hi)
{
    std::uniform_int_distribution<long> dist(lo, hi);
    IntMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            m(r, c) = dist(rng);
    return m;
}

// Laplace expansion along the first row; independent of the library's Bareiss.
Integer det_by_expansion(const IntMatrix& m)
{
    const std::size_t n = m.rows();
    if (n == 0)
        return 1;
    if (n == 1)
        return m(0, 0);
    Integer acc = 0;
    for (std::size_t c = 0; c < n; ++c) {
        if (m(0, c) == 0)
            continue;
        IntMatrix minor(n - 1, n - 1);
        for (std::size_t r = 1; r < n; ++r)
            for (std::size_t k = 0, kk = 0; k < n; ++k)
                if (k != c)
                    minor(r - 1, kk++) = m(r, k);
        Integer term = m(0, c) * det_by_expansion(minor);
        acc += (c % 2 == 0) ? term : Integer(-term);
    }
    return acc;
}

void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn)
{
    std::vector<std::size_t> idx(k);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t start) {
        if (pos == k) {
            fn(idx);
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            idx[pos] = i;
            rec(pos + 1, i + 1);
        }
    };
    rec(0, 0);
}

// Invariant factors from determinantal divisors: d_k = D_k / D_{k-1}, where
// D_k is the gcd of all k x k minors.
std::vector<Integer> invariant_factors_oracle(const IntMatrix& m)
{
    std::vector<Integer> out;
    Integer prev = 1;
    for (std::size_t k = 1; k <= std::min(m.rows(), m.cols()); ++k) {
        Integer g = 0;
        for_each_subset(m.rows(), k, [&](const std::vector<std::size_t>& rs) {
            for_each_subset(m.cols(), k, [&](const std::vector<std::size_t>& cs) {
                g = gcd(g, det_by_expansion(m.select_rows(rs).select_cols(cs)));
            });
        });
        if (g == 0)
            break;
        out.push_back(g / prev);
        prev = g;
    }
    return out;
}

// Every element of a finite group, in generator coordinates.
std::vector<IntVector> elements(const FgAbGroup& g)
{
    REQUIRE(g.is_finite());
    std::vector<IntVector> out;
    IntVector c = zero_vector(g.rank());
    for (;;) {
        out.push_back(g.from_canonical(c));
        std::size_t k = 0;
        while (k < c.size()) {
            c[k] += 1;
            if (c[k] < g.orders()[k])
                break;
            c[k] = 0;
            ++k;
        }
        if (k == c.size())
            break;
    }
    return out;
}

// Number of homomorphisms between finite groups, counted by trying every
// assignment of generator images that respects the relations.
std::size_t count_homs_brute(const FgAbGroup& src, const FgAbGroup& tgt)
{
    const auto tgt_elems = elements(tgt);
    std::size_t count = 0;
    std::vector<std::size_t> choice(src.ngens(), 0);
    for (;;) {
        IntMatrix m(tgt.ngens(), src.ngens());
        for (std::size_t k = 0; k < src.ngens(); ++k)
            m.set_column(k, tgt_elems[choice[k]]);
        if (GroupHom::is_well_defined(src, tgt, m))
            ++count;
        std::size_t k = 0;
        while (k < choice.size()) {
            if (++choice[k] < tgt_elems.size())
                break;
            choice[k] = 0;
            ++k;
        }
        if (k == choice.size())
            break;
    }
    return count;
}

FgAbGroup random_group(std::mt19937_64& rng, std::size_t max_gens, long bound)
{
    std::uniform_int_distribution<std::size_t> ng(0, max_gens);
    const std::size_t n = ng(rng);
    const std::size_t k = ng(rng);
    return FgAbGroup(n, random_matrix(rng, n, k, -bound, bound));
}

FgAbGroup random_finite_group(std::mt19937_64& rng)
{
    // Square relation matrices with nonzero determinant give finite groups.
    for (;;) {
        std::uniform_int_distribution<std::size_t> ng(1, 3);
        const std::size_t n = ng(rng);
        IntMatrix rel = random_matrix(rng, n, n, -4, 4);
        Integer d = det_by_expansion(rel);
        if (d != 0 && abs(d) <= 48)
            return FgAbGroup(n, rel);
    }
}

}  // namespace

TEST_CASE("snf of a small worked example")
{
    IntMatrix m{{2, 4, 4}, {-6, 6, 12}, {10, -4, -16}};
    SmithForm s = snf(m);
    CHECK(s.d == IntMatrix{{2, 0, 0}, {0, 6, 0}, {0, 0, 12}});
    CHECK(s.rank == 3);
    CHECK(s.u * m * s.v == s.d);
}

TEST_CASE("snf of a zero matrix is trivial")
{
    IntMatrix z(2, 3);
    SmithForm s = snf(z);
    CHECK(s.d == z);
    CHECK(s.u == IntMatrix::identity(2));
    CHECK(s.v == IntMatrix::identity(3));
    CHECK(s.rank == 0);
}

TEST_CASE("snf of empty shapes")
{
    for (auto [r, c] : {std::pair<std::size_t, std::size_t>{0, 0}, {0, 3}, {3, 0}}) {
        SmithForm s = snf(IntMatrix(r, c));
        CHECK(s.rank == 0);
        CHECK(s.u.rows() == r);
        CHECK(s.v.cols() == c);
    }
}

TEST_CASE("snf properties on random matrices agree with determinantal divisors")
{
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<std::size_t> dim(1, 5);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t r = dim(rng);
        const std::size_t c = dim(rng);
        const IntMatrix m = random_matrix(rng, r, c, -9, 9);
        const SmithForm s = snf(m);
        INFO("matrix " << m.to_string());

        REQUIRE(s.u * m * s.v == s.d);
        CHECK(abs(determinant(s.u)) == 1);
        CHECK(abs(determinant(s.v)) == 1);
        CHECK(s.u * s.u_inv == IntMatrix::identity(r));

        std::vector<Integer> diag;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) {
                if (i != j)
                    CHECK(s.d(i, j) == 0);
                else if (s.d(i, i) != 0)
                    diag.push_back(s.d(i, i));
            }
        CHECK(diag.size() == s.rank);
        for (std::size_t k = 0; k < diag.size(); ++k) {
            CHECK(diag[k] > 0);
            if (k > 0)
                CHECK(diag[k] % diag[k - 1] == 0);
        }
        CHECK(diag == invariant_factors_oracle(m));

        const SmithForm again = snf(m);
        CHECK(again.u == s.u);
        CHECK(again.v == s.v);
    }
}

TEST_CASE("determinant agrees with cofactor expansion")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_int_distribution<std::size_t> dim(0, 5);
        const std::size_t n = dim(rng);
        const IntMatrix m = random_matrix(rng, n, n, -5, 5);
        CHECK(determinant(m) == det_by_expansion(m));
    }
}

TEST_CASE("lattice solver")
{
    IntMatrix a{{2, 0}, {0, 3}};
    LatticeSolver ls(a);
    auto x = ls.solve({4, 9});
    REQUIRE(x);
    CHECK(a * *x == IntVector{4, 9});
    CHECK_FALSE(ls.solve({1, 0}));

    IntMatrix b{{1, 2, 3}, {2, 4, 6}};
    LatticeSolver lb(b);
    IntMatrix k = lb.kernel_basis();
    CHECK(k.cols() == 2);
    CHECK((b * k).is_zero());
    CHECK(lb.lattice_basis().cols() == 1);
    CHECK(lb.contains({5, 10}));
    CHECK_FALSE(lb.contains({1, 1}));
}

TEST_CASE("canonical decomposition of presentations")
{
    FgAbGroup g(2, IntMatrix{{2, 0}, {0, 3}});
    CHECK(g.free_rank() == 0);
    CHECK(g.torsion() == std::vector<Integer>{6});
    CHECK(g.describe() == "Z/6");
    CHECK(*g.order() == 6);

    FgAbGroup h(3, IntMatrix{{2}, {4}, {0}});
    CHECK(h.free_rank() == 2);
    CHECK(h.torsion() == std::vector<Integer>{2});
    CHECK(h.describe() == "Z^2 + Z/2");
    CHECK_FALSE(h.order());

    CHECK(FgAbGroup().is_trivial());
    CHECK(FgAbGroup(1, IntMatrix{{1}}).is_trivial());
    CHECK(FgAbGroup::from_invariants(1, {2, 4}).describe() == "Z + Z/2 + Z/4");
    CHECK_THROWS_AS(FgAbGroup::from_invariants(0, {4, 2}), ShapeError);
    CHECK_THROWS_AS(FgAbGroup(2, IntMatrix(3, 1)), ShapeError);
}

TEST_CASE("reduction is a canonical form on random groups")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 150; ++trial) {
        const FgAbGroup g = random_group(rng, 4, 6);
        const IntMatrix x = random_matrix(rng, g.ngens(), 1, -20, 20);
        const IntVector v = x.column(0);
        const IntVector red = g.reduce(v);
        CHECK(g.reduce(red) == red);
        CHECK(g.to_canonical(red) == g.to_canonical(v));
        // v and v + relation have the same reduction
        if (g.relations().cols() > 0)
            CHECK(g.reduce(v + g.relations().column(0)) == red);
        CHECK(g.canonical_projection() * g.canonical_representatives() == IntMatrix::identity(g.rank()));
    }
}

TEST_CASE("hom groups match brute-force counts")
{
    const FgAbGroup z4 = FgAbGroup::cyclic(4);
    const FgAbGroup z6 = FgAbGroup::cyclic(6);
    HomGroup h(z4, z6);
    CHECK(h.group().describe() == "Z/2");
    CHECK(count_homs_brute(z4, z6) == 2);

    CHECK(HomGroup(FgAbGroup::free(1), z6).group().describe() == "Z/6");
    CHECK(HomGroup(FgAbGroup::cyclic(2), FgAbGroup::free(1)).group().is_trivial());
    CHECK(HomGroup(FgAbGroup::free(2), FgAbGroup::free(3)).group().describe() == "Z^6");

    std::mt19937_64 rng(12345);
    for (int trial = 0; trial < 40; ++trial) {
        const FgAbGroup a = random_finite_group(rng);
        const FgAbGroup b = random_finite_group(rng);
        if (*a.order() > 12 || *b.order() > 16)
            continue;
        HomGroup hg(a, b);
        INFO(a.describe() << " -> " << b.describe());
        CHECK(*hg.group().order() == count_homs_brute(a, b));
    }
}

TEST_CASE("hom codec round-trips")
{
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 100; ++trial) {
        const FgAbGroup a = random_group(rng, 3, 5);
        const FgAbGroup b = random_group(rng, 3, 5);
        HomGroup hg(a, b);
        const IntVector c = random_matrix(rng, hg.group().ngens(), 1, -7, 7).column(0);
        const GroupHom f = hg.decode(c);
        CHECK(hg.encode(f) == hg.group().reduce(c));
        CHECK(is_equal(hg.decode(hg.encode(f)), f));
        CHECK(GroupHom::from_canonical(a, b, f.canonical_matrix()).canonical_matrix() == f.canonical_matrix());
    }
}

TEST_CASE("rejects ill-defined homomorphisms")
{
    const FgAbGroup z4 = FgAbGroup::cyclic(4);
    const FgAbGroup z6 = FgAbGroup::cyclic(6);
    CHECK_THROWS_AS(GroupHom(z4, z6, IntMatrix{{1}}), ShapeError);
    CHECK_NOTHROW(GroupHom(z4, z6, IntMatrix{{3}}));
    CHECK_THROWS_AS(GroupHom(z4, z6, IntMatrix{{1, 0}}), ShapeError);
    CHECK_THROWS_AS(compose(GroupHom::identity(z4), GroupHom::identity(z6)), ShapeError);
}

TEST_CASE("kernel of doubling on Z/4")
{
    const FgAbGroup z4 = FgAbGroup::cyclic(4);
    const GroupHom two = GroupHom::scalar(z4, 2);
    const Subgroup k = kernel(two);
    CHECK(k.group().describe() == "Z/2");
    CHECK(k.contains({2}));
    CHECK_FALSE(k.contains({1}));
    const Subgroup im = image(two);
    CHECK(im.group().describe() == "Z/2");
    CHECK_FALSE(two.is_injective());
    CHECK_FALSE(two.is_surjective());
    CHECK(GroupHom::scalar(z4, 3).is_surjective());
    CHECK(GroupHom::scalar(z4, 3).is_injective());
}

TEST_CASE("kernels and images agree with enumeration")
{
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 60; ++trial) {
        const FgAbGroup a = random_finite_group(rng);
        const FgAbGroup b = random_finite_group(rng);
        HomGroup hg(a, b);
        const GroupHom f = hg.decode(random_matrix(rng, hg.group().ngens(), 1, -5, 5).column(0));
        const auto elems = elements(a);
        std::size_t ker_count = 0;
        std::set<IntVector> img;
        const Subgroup k = kernel(f);
        const Subgroup im = image(f);
        for (const auto& x : elems) {
            const IntVector y = f.apply(x);
            img.insert(y);
            const bool in_ker = b.is_zero(y);
            ker_count += in_ker;
            CHECK(k.contains(x) == in_ker);
            CHECK(im.contains(y));
        }
        CHECK(*k.group().order() == ker_count);
        CHECK(*im.group().order() == img.size());
        for (const auto& y : elements(b))
            CHECK(im.contains(y) == (img.count(y) > 0));
        // preimages land on the requested element
        for (const auto& y : img) {
            auto x = im.preimage(y);
            REQUIRE(x);
            CHECK(b.equal(im.inclusion().apply(*x), y));
        }
    }
}

TEST_CASE("kernel of a map between infinite groups")
{
    // Z^3 -> Z^2, (x, y, z) -> (x + y, 2z)
    const GroupHom f(FgAbGroup::free(3), FgAbGroup::free(2), IntMatrix{{1, 1, 0}, {0, 0, 2}});
    const Subgroup k = kernel(f);
    CHECK(k.group().describe() == "Z");
    CHECK(k.contains({1, -1, 0}));
    CHECK_FALSE(k.contains({1, 0, 0}));
    const Subgroup im = image(f);
    CHECK(im.group().describe() == "Z^2");
    CHECK_FALSE(im.contains({0, 1}));
}

TEST_CASE("direct sums")
{
    DirectSum s({FgAbGroup::cyclic(2), FgAbGroup::free(1), FgAbGroup::cyclic(3)});
    CHECK(s.group().describe() == "Z + Z/6");
    const IntVector x = s.join({{1}, {5}, {2}});
    CHECK(s.part(x, 1) == IntVector{5});
    const std::size_t pick[] = {2, 0};
    const GroupHom p = s.projection(pick);
    CHECK(p.tgt().equal(p.apply(x), IntVector{2, 1}));
    CHECK(is_equal(compose(s.projection(std::vector<std::size_t>{1}), s.injection(1)),
                   GroupHom::identity(FgAbGroup::free(1))));

    const Subgroup whole = image(GroupHom::identity(s.group()));
    const Subgroup first = project(whole, s, std::vector<std::size_t>{0});
    CHECK(first.group().describe() == "Z/2");
}
