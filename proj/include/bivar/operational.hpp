#pragma once

// Operational classes over a covariant functor, and the bridge from a
// tabulated bivariant theory: op(alpha) acts by (g^* alpha) . (-) on
// h_m(X) = B^{-m}(X -> pt).

#include "bivar/bivcore.hpp"
#include "bivar/families.hpp"

#include <memory>

namespace bivar {

inline const OpGroup& op_group(const OpTheory& t, MorId f, int i) { return t.group(f, i); }

/// h_m(X) = B^{-m}(X -> pt) with pushforwards along confined maps. Throws
/// MissingFinalObject.
std::shared_ptr<const GradedFunctor> homology_functor(const TabulatedBivTheory& b);

/// `op` must be built over homology_functor(b).
OpClass op_from_bivariant(const TabulatedBivTheory& b, const OpTheory& op, MorId f, int i, const IntVector& alpha);
/// alpha -> op(alpha) in the coordinates of op_group(f, i).
GroupHom op_map(const TabulatedBivTheory& b, const OpTheory& op, MorId f, int i);

/// c_{id_pt}(1_pt) as an element of B^i(X -> pt), for c over X -> pt.
IntVector ev(const TabulatedBivTheory& b, const OpTheory& op, const OpClass& c);

/// The three identities for op on every generator pair.
ValidationReport op_identities(const TabulatedBivTheory& b, const OpTheory& op);
/// B^i(X -> pt) ~ hat-op(X -> pt) for every object and degree: op is
/// injective there, the image has the same invariants, every op(alpha)
/// round-trips through the codec and ev(op(alpha)) = alpha.
ValidationReport op_point_isomorphism(const TabulatedBivTheory& b, const OpTheory& op);

HatBridge make_op_bridge(std::shared_ptr<const TabulatedBivTheory> b);

/// gamma: B -> B' gives hat-gamma: hat-op(B) -> hat-op(B'). In image mode the
/// target is replaced by the image of gamma. In full mode gamma must be
/// covariant-surjective (onto B'(X -> pt) for every X); failures are reported
/// under "covariant-surjective".
HatGammaResult hat_gamma_op(const GrothTransf& gamma, HatTarget mode = HatTarget::image);

}  // namespace bivar
