#pragma once

// Explicitly tabulated bivariant theories over a finite site, the axiom
// verifier, Grothendieck transformations and their image subtheories.

#include "bivar/exactalg.hpp"
#include "bivar/report.hpp"
#include "bivar/site.hpp"

#include <map>
#include <memory>
#include <tuple>

namespace bivar {

/// Graded groups B^i(f) for every morphism f and degree i in a window, with
///   product     B^i(f: X->Y) x B^j(g: Y->Z) -> B^{i+j}(g o f)
///   pushforward f_*: B^i(ctx o f) -> B^i(ctx)     (f: X->Y, ctx: Y->Z)
///   pullback    g^*: B^i(f) -> B^i(f')            (chosen square over (f, g))
///   units       1_X in B^0(id_X).
/// Anything not tabulated is zero, except that pushforward along an identity
/// and pullback along an identity default to the identity map.
class TabulatedBivTheory {
public:
    /// `pushforward_all` lifts the confinedness requirement on pushforwards.
    TabulatedBivTheory(std::shared_ptr<const Site> site, GradeWindow degrees, bool pushforward_all = false);

    const std::shared_ptr<const Site>& site() const noexcept { return site_; }
    const GradeWindow& degrees() const noexcept { return degrees_; }
    bool pushforward_all() const noexcept { return pushforward_all_; }
    bool allows_pushforward(MorId f) const { return pushforward_all_ || site_->is_confined(f); }

    void set_group(MorId f, int i, FgAbGroup g);
    /// Zero group outside the window or when unset.
    const FgAbGroup& group(MorId f, int i) const;

    /// Column p * nb + q holds generator_p(B^i(f)) . generator_q(B^j(g)) in
    /// generator coordinates of B^{i+j}(g o f).
    void set_product(MorId f, MorId g, int i, int j, IntMatrix table);
    void set_pushforward(MorId f, MorId ctx, int i, GroupHom hom);
    void set_pullback(MorId f, MorId g, int i, GroupHom hom);
    void set_unit(ObjId x, IntVector coords);

    IntVector product(MorId f, MorId g, int i, int j, const IntVector& a, const IntVector& b) const;
    /// The product table as stored (zero when absent).
    IntMatrix product_table(MorId f, MorId g, int i, int j) const;
    /// Throws NotConfined when pushforward along f is not allowed.
    GroupHom pushforward(MorId f, MorId ctx, int i) const;
    GroupHom pullback(MorId f, MorId g, int i) const;
    IntVector unit(ObjId x) const;

private:
    std::shared_ptr<const Site> site_;
    GradeWindow degrees_;
    bool pushforward_all_;
    std::map<std::pair<MorId, int>, FgAbGroup> groups_;
    std::map<std::tuple<MorId, MorId, int, int>, IntMatrix> products_;
    std::map<std::tuple<MorId, MorId, int>, GroupHom> pushforwards_;
    std::map<std::tuple<MorId, MorId, int>, GroupHom> pullbacks_;
    std::map<ObjId, IntVector> units_;
    FgAbGroup zero_;
};

/// Clause names used in reports, in checking order.
inline constexpr const char* kAxiomClauses[] = {"A1", "A2", "A3", "A12", "A13", "A23", "A123", "Units"};

/// Checks product well-definedness, the seven axioms and the unit clause on
/// every generator tuple. Pasted squares are compared through the site's
/// paste comparisons, transported by pushforward along the comparison
/// isomorphism when it is not an identity.
ValidationReport validate_axioms(const TabulatedBivTheory& b);

class GrothTransf {
public:
    GrothTransf(std::shared_ptr<const TabulatedBivTheory> src, std::shared_ptr<const TabulatedBivTheory> tgt);

    const TabulatedBivTheory& src() const noexcept { return *src_; }
    const TabulatedBivTheory& tgt() const noexcept { return *tgt_; }
    const std::shared_ptr<const TabulatedBivTheory>& src_ptr() const noexcept { return src_; }
    const std::shared_ptr<const TabulatedBivTheory>& tgt_ptr() const noexcept { return tgt_; }

    void set_component(MorId f, int i, GroupHom hom);
    /// Zero when unset.
    GroupHom component(MorId f, int i) const;

private:
    std::shared_ptr<const TabulatedBivTheory> src_;
    std::shared_ptr<const TabulatedBivTheory> tgt_;
    std::map<std::pair<MorId, int>, GroupHom> components_;
};

/// Preservation of product, pushforward and pullback on generators.
ValidationReport validate_groth(const GrothTransf& gamma);

struct ImageSubtheory {
    std::shared_ptr<const TabulatedBivTheory> theory;
    /// src(gamma) -> image, surjective componentwise.
    std::shared_ptr<const GrothTransf> corestriction;
    /// image -> tgt(gamma), injective componentwise.
    std::shared_ptr<const GrothTransf> inclusion;
    /// Image subgroup of each component, keyed by (morphism, degree).
    std::map<std::pair<MorId, int>, Subgroup> subgroups;
};

/// Groups Im(gamma) with the operations of tgt(gamma) restricted and units
/// gamma(1_X). Throws InvalidTransformation when validate_groth fails.
ImageSubtheory image_subtheory(const GrothTransf& gamma);

}  // namespace bivar
