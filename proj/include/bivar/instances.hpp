#pragma once

// Bundled instances: the subset-lattice site with its presheaf, covariant
// functor and pointwise theory, their mod-2 companions, a terminal site, and a
// graded instance carrying the Adams-like family x -> k^r x in grade 2r.

#include "bivar/bivcore.hpp"
#include "bivar/cooperational.hpp"
#include "bivar/site.hpp"

#include <map>
#include <memory>
#include <string>

namespace bivar {

struct InstanceBundle {
    std::shared_ptr<const Site> site;
    std::map<std::string, std::shared_ptr<const GradedFunctor>> functors;
    std::map<std::string, std::shared_ptr<const NaturalTransf>> transformations;
    std::map<std::string, std::shared_ptr<const TabulatedBivTheory>> theories;
    std::map<std::string, std::shared_ptr<const GrothTransf>> groth;
};

/// Subsets of {0..n-1} under inclusion. Objects in bitmask order named "{}",
/// "{0}", "{0,1}", ...; morphisms "id_{0}" and "{0}->{0,1}"; pullback is
/// intersection; everything confined; the full set is final.
std::shared_ptr<const Site> subsets_site(int n);
/// Name of the object with the given bitmask.
std::string subset_name(unsigned mask);

/// n in 1..3. Functors "F" (Z^S, restriction), "h" (Z^S, extension by zero),
/// "F2", "h2" (mod 2); transformations "T" (F -> F2) and "Th" (h -> h2);
/// theories "B" (B(S -> T) = Z^S) and "B2"; Grothendieck map "reduce".
/// Throws Error when n is out of range.
InstanceBundle build_subsets_instance(int n);

/// One object, one morphism, F = Z and h = Z in grade 0, theory B = Z.
InstanceBundle build_terminal_instance();

/// Clause names accepted by mutate_subsets_theory: the entries of
/// kAxiomClauses.
/// Copy of "B" from SUBSETS(2) with one table entry broken so that the
/// given clause fails. Throws Error for an unknown clause.
std::shared_ptr<TabulatedBivTheory> mutate_subsets_theory(const TabulatedBivTheory& b, const std::string& clause);

struct GradedInstance {
    InstanceBundle bundle;  // site SUBSETS(2), functor "F" with window [0, 4]
    std::shared_ptr<const CoopTheory> theory;
    /// Over id of the full set, degree 0.
    CoopClass psi;
    int k = 1;
};

/// F^{2r}(S) = Z^S for r = 0, 1, 2 and zero in odd grades; psi acts by k^r
/// in grade 2r.
GradedInstance build_graded_instance(int k);

}  // namespace bivar
