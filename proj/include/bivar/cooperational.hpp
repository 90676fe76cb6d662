#pragma once

// Co-operational classes over a contravariant functor: the bridge from a
// tabulated theory (coop(alpha) acts by b -> f'_*(b . g^* alpha) on
// F^m(X) = B^m(id_X)), the subtheory of classes that descend along a natural
// transformation, cup-product classes and the non-additive power family.

#include "bivar/bivcore.hpp"
#include "bivar/families.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

namespace bivar {

inline const CoopGroup& coop_group(const CoopTheory& t, MorId f, int i) { return t.group(f, i); }

/// F^m(X) = B^m(id_X), with g^* given by pullback over (id_Y, g).
std::shared_ptr<const GradedFunctor> cohomology_functor(const TabulatedBivTheory& b);

/// `coop` must be built over cohomology_functor(b). Throws NotConfined when a
/// base change of f does not allow pushforward.
CoopClass coop_from_bivariant(const TabulatedBivTheory& b, const CoopTheory& coop, MorId f, int i,
                              const IntVector& alpha);
GroupHom coop_map(const TabulatedBivTheory& b, const CoopTheory& coop, MorId f, int i);

/// c_{id_X}(1_X) in B^i(id_X), for c over id_X.
IntVector coop_eval(const TabulatedBivTheory& b, const CoopTheory& coop, const CoopClass& c);

ValidationReport coop_identities(const TabulatedBivTheory& b, const CoopTheory& coop);
/// B^i(id_X) ~ hat-coop(id_X) for every object and degree.
ValidationReport coop_point_isomorphism(const TabulatedBivTheory& b, const CoopTheory& coop);

/// Requires pushforward along every morphism of the site.
HatBridge make_coop_bridge(std::shared_ptr<const TabulatedBivTheory> b);

/// As hat_gamma_op; full mode needs gamma onto B'(id_X) for every X
/// ("contravariant-surjective").
HatGammaResult hat_gamma_coop(const GrothTransf& gamma, HatTarget mode = HatTarget::image);

// ---------------------------------------------------------------------------
// Classes that descend along T: F -> G

struct TransferSolutions {
    bool exists = false;
    /// Coordinates in coop_group(G, f, i).
    IntVector particular;
    /// { d : d_g o T = 0 for all g }, inside coop_group(G, f, i).
    std::shared_ptr<const Subgroup> homogeneous;

    bool unique() const { return exists && homogeneous->group().is_trivial(); }
};

class BCoopT {
public:
    struct Slice {
        /// Members inside coop_group(F, f, i).
        Subgroup members;
        std::shared_ptr<const Subgroup> homogeneous;
        /// x -> (T o c_g(x))_g and y -> (d_g(y) o T)_g.
        GroupHom phi;
        GroupHom psi;
        Subgroup psi_image;
    };

    explicit BCoopT(std::shared_ptr<const NaturalTransf> t);

    const NaturalTransf& transformation() const noexcept { return *t_; }
    const CoopTheory& source() const noexcept { return *src_; }
    const CoopTheory& target() const noexcept { return *tgt_; }

    const Slice& at(MorId f, int i) const;
    bool is_member(const CoopClass& c) const;
    /// All d in coop_group(G) with T o c_g = d_g o T; c must be compatible.
    TransferSolutions gamma_T(const CoopClass& c) const;
    bool intertwines(const CoopClass& c, const CoopClass& d) const;
    bool componentwise_surjective() const;

    /// Products, pushforwards and pullbacks of member generators are members.
    ValidationReport closure() const;
    /// Solutions are unique and (c . d)^T = c^T . d^T, (f_* c)^T = f_*(c^T),
    /// (g^* c)^T = g^*(c^T) on member generators. Meaningful when T is
    /// componentwise surjective.
    ValidationReport transfer() const;

private:
    std::vector<CoopClass> member_generators(MorId f, int i) const;

    std::shared_ptr<const NaturalTransf> t_;
    std::unique_ptr<CoopTheory> src_;
    std::unique_ptr<CoopTheory> tgt_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<MorId, int>, std::unique_ptr<Slice>> cache_;
};

// ---------------------------------------------------------------------------
// Cup products and powers

/// Commutativity (with the Koszul sign) and two-sided units of the products
/// B(id_X) x B(id_X) -> B(id_X), on generators.
ValidationReport ring_structure(const TabulatedBivTheory& b);

/// coop(alpha) for alpha in B^i(id_X). Throws MissingRingStructure.
CoopClass cup_class(const TabulatedBivTheory& b, const CoopTheory& coop, ObjId x, int i, const IntVector& alpha);
/// c_g(x) = x u g^* alpha for every g into X and every generator x.
ValidationReport check_cup(const TabulatedBivTheory& b, const CoopTheory& coop, ObjId x, int i, const IntVector& alpha);
/// For a Grothendieck transformation t of multiplicative theories:
/// t(x u g^* alpha) = t(x) u g^*(t alpha) on generators, and the induced map
/// on hat-coop(id_X) agrees with t under the point isomorphisms.
ValidationReport cup_transfer(const GrothTransf& t);

/// Like a co-operational class, but components are arbitrary maps of sets
/// F^m(X'_g) -> F^{grade_factor * m}(Y').
struct MapFamily {
    MorId base = 0;
    int grade_factor = 1;
    std::map<std::pair<MorId, int>, std::function<IntVector(const IntVector&)>> components;
};

/// x -> x^k over id_X. Throws MissingRingStructure.
MapFamily power_family(const TabulatedBivTheory& b, const CoopTheory& coop, ObjId x, int k);

/// Compatibility squares on all coordinate vectors with entries in [-2, 2]
/// (a seeded sample when that box is large).
ValidationReport map_family_naturality(const CoopTheory& coop, const MapFamily& c, std::uint64_t seed = 1);

struct AdditivityWitness {
    MorId g;
    int grade;
    IntVector x;
    IntVector y;
    IntVector of_sum;
    IntVector sum_of;
};

/// x, y with c(x + y) != c(x) + c(y), searched over generator pairs.
std::optional<AdditivityWitness> non_additivity_witness(const CoopTheory& coop, const MapFamily& c);

}  // namespace bivar
