#pragma once

// Families of homomorphisms indexed by the morphisms into a base, subject to
// compatibility with the functor's maps. Shared by the operational (covariant)
// and co-operational (contravariant) constructions.
//
// For a base f: X -> Y of degree i and g: Y' -> Y with chosen apex X'_g:
//   contra:  c_g : F^m(X'_g) -> F^{m+i}(Y')
//   cov:     c_g : h_m(Y')   -> h_{m-i}(X'_g)

#include "bivar/bivcore.hpp"
#include "bivar/exactalg.hpp"
#include "bivar/report.hpp"
#include "bivar/site.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace bivar {

template <Variance V>
struct Family {
    MorId base = 0;
    int degree = 0;
    /// Keyed by (g, source grade m); absent entries are zero.
    std::map<std::pair<MorId, int>, GroupHom> components;
};

using OpClass = Family<Variance::cov>;
using CoopClass = Family<Variance::contra>;

template <Variance V>
class FamilyTheory;

/// All compatible families over one (base, degree), as the kernel of the
/// linear constraint map on the direct sum of the component Hom groups.
template <Variance V>
class FamilyGroup {
public:
    struct Block {
        MorId g;
        int grade;
        ObjId from;
        ObjId to;
        int from_grade;
        int to_grade;
        HomGroup hom;
    };

    FamilyGroup(const FamilyTheory<V>& theory, MorId f, int i);

    MorId base() const noexcept { return base_; }
    int degree() const noexcept { return degree_; }
    /// The group of compatible families.
    const FgAbGroup& group() const noexcept { return solutions_->group(); }
    const std::vector<Block>& blocks() const noexcept { return blocks_; }
    const DirectSum& ambient() const noexcept { return *ambient_; }
    /// Compatible families inside the ambient direct sum.
    const Subgroup& solutions() const noexcept { return *solutions_; }
    const GroupHom& constraint() const noexcept { return *constraint_; }

    Family<V> decode(const IntVector& x) const;
    /// Coordinates in group(), or nullopt when the family is not compatible
    /// (or has components outside the blocks of this group).
    std::optional<IntVector> encode(const Family<V>& c) const;
    /// Block-wise coordinates without the compatibility requirement.
    IntVector ambient_coords(const Family<V>& c) const;
    Family<V> generator(std::size_t k) const { return decode(unit_vector(group().ngens(), k)); }

private:
    const FamilyTheory<V>* theory_;
    MorId base_;
    int degree_;
    std::vector<Block> blocks_;
    std::map<std::pair<MorId, int>, std::size_t> block_index_;
    std::shared_ptr<DirectSum> ambient_;
    std::shared_ptr<GroupHom> constraint_;
    std::shared_ptr<Subgroup> solutions_;
};

/// The bivariant theory of families over a functor: groups, product,
/// pushforward, pullback and units, following the pasting conventions of the
/// site. Contravariant functors give co-operational classes (pushforward along
/// any morphism); covariant ones give operational classes (pushforward along
/// confined morphisms).
template <Variance V>
class FamilyTheory {
public:
    explicit FamilyTheory(std::shared_ptr<const GradedFunctor> functor);

    const GradedFunctor& functor() const noexcept { return *functor_; }
    const std::shared_ptr<const GradedFunctor>& functor_ptr() const noexcept { return functor_; }
    const Site& site() const noexcept { return *functor_->site(); }
    /// [-span, span] for the functor's grade window span; outside it every
    /// group is zero.
    GradeWindow degrees() const noexcept { return degrees_; }

    const FamilyGroup<V>& group(MorId f, int i) const;

    /// Groups the component g at grade m maps between.
    const FgAbGroup& component_src(MorId f, int i, MorId g, int m) const;
    const FgAbGroup& component_tgt(MorId f, int i, MorId g, int m) const;
    /// Stored component or the zero hom.
    GroupHom component(const Family<V>& c, MorId g, int m) const;

    /// c over f: X -> Y, d over g: Y -> Z gives c . d over g o f. Throws
    /// DegreeOverflow when the degree leaves the window.
    Family<V> product(const Family<V>& c, const Family<V>& d) const;
    /// c over ctx o f gives f_* c over ctx. Throws NotConfined for covariant
    /// functors when f is not confined.
    Family<V> pushforward(MorId f, MorId ctx, const Family<V>& c) const;
    /// c over f, g into the target of f, gives g^* c over the base change f'.
    Family<V> pullback(MorId g, const Family<V>& c) const;
    /// Identity components over id_X.
    Family<V> unit(ObjId x) const;

    /// Checks every compatibility square directly, component by component.
    ValidationReport compatibility(const Family<V>& c) const;
    bool equal(const Family<V>& a, const Family<V>& b) const;

    /// Every group, product, pushforward, pullback and unit written out as a
    /// TabulatedBivTheory in the coordinates of group(f, i).
    std::shared_ptr<TabulatedBivTheory> tabulate() const;

private:
    bool grade_ok(int m) const { return functor_->window().contains(m); }
    int target_grade(int m, int i) const { return V == Variance::contra ? m + i : m - i; }
    GroupHom fmap(MorId m, int grade) const { return functor_->map(m, grade); }

    std::shared_ptr<const GradedFunctor> functor_;
    GradeWindow degrees_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<MorId, int>, std::unique_ptr<FamilyGroup<V>>> cache_;

    friend class FamilyGroup<V>;
};

using OpTheory = FamilyTheory<Variance::cov>;
using CoopTheory = FamilyTheory<Variance::contra>;
using OpGroup = FamilyGroup<Variance::cov>;
using CoopGroup = FamilyGroup<Variance::contra>;

/// A tabulated theory together with its family theory, the lifting map into
/// it and the image subtheory of that map (the hat theory).
struct HatBridge {
    std::shared_ptr<const TabulatedBivTheory> bivariant;
    std::shared_ptr<const TabulatedBivTheory> families;
    std::shared_ptr<const GrothTransf> lift;
    ImageSubtheory hat;
};

enum class HatTarget { image, full };

struct HatGammaResult {
    ValidationReport report;
    std::optional<HatBridge> src;
    std::optional<HatBridge> tgt;
    /// Present when the report is free of well-definedness failures.
    std::shared_ptr<const GrothTransf> map;
};

/// The map on hat theories induced by gamma: a.bivariant -> b.bivariant,
/// sending lift(alpha) to lift(gamma(alpha)). Failures of well-definedness and
/// of the Grothendieck identities are reported, not thrown.
HatGammaResult hat_between(const HatBridge& a, const HatBridge& b, const GrothTransf& gamma);

template <Variance V>
using Lift = std::function<Family<V>(MorId, int, const IntVector&)>;

/// lift(a . b) = lift(a) . lift(b), lift(f_* a) = f_* lift(a) and
/// lift(g^* a) = g^* lift(a), on every generator pair of the tabulated theory.
template <Variance V>
ValidationReport grothendieck_identities(const TabulatedBivTheory& b, const FamilyTheory<V>& t, const Lift<V>& lift);

/// Tabulated copy of `t` and the lifting transformation b -> that copy.
template <Variance V>
HatBridge make_bridge(std::shared_ptr<const TabulatedBivTheory> b, const FamilyTheory<V>& t, const Lift<V>& lift);

extern template class FamilyGroup<Variance::cov>;
extern template class FamilyGroup<Variance::contra>;
extern template class FamilyTheory<Variance::cov>;
extern template class FamilyTheory<Variance::contra>;

}  // namespace bivar
