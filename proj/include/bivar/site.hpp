#pragma once

// Finite categories with a confined class and a total table of chosen
// pullback squares, and grade-windowed functors on them.

#include "bivar/exactalg.hpp"
#include "bivar/report.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bivar {

using ObjId = std::size_t;
using MorId = std::size_t;

struct Morphism {
    std::string name;
    ObjId src = 0;
    ObjId tgt = 0;
};

/// Chosen square over the cospan X --f--> Y <--g-- Y':
///
///     X' --g_prime--> X
///     |               |
///  f_prime            f
///     v               v
///     Y' ----g------> Y
struct PullbackSquare {
    MorId f = 0;
    MorId g = 0;
    ObjId apex = 0;
    MorId g_prime = 0;
    MorId f_prime = 0;
};

/// Raw tables a Site is built from.
struct SiteData {
    std::vector<std::string> objects;
    std::vector<Morphism> morphisms;
    std::vector<MorId> identities;                          // indexed by object
    std::map<std::pair<MorId, MorId>, MorId> composition;  // (g, f) -> g o f
    std::vector<bool> confined;                             // indexed by morphism
    std::map<std::pair<MorId, MorId>, PullbackSquare> pullbacks;  // (f, g)
    std::optional<ObjId> final_object;
};

/// Isomorphism between the directly chosen apex of a composite cospan and
/// the apex obtained by pasting two chosen squares.
struct PasteComparison {
    ObjId direct_apex = 0;
    ObjId pasted_apex = 0;
    MorId to_pasted = 0;    // direct -> pasted
    MorId from_pasted = 0;  // pasted -> direct
    bool is_identity = false;
};

class Site {
public:
    /// Throws SiteError on structural defects (dangling indices, duplicate
    /// names, identities with the wrong endpoints). Semantic defects are
    /// reported by validate_site.
    explicit Site(SiteData data);

    const SiteData& data() const noexcept { return d_; }
    std::size_t object_count() const noexcept { return d_.objects.size(); }
    std::size_t morphism_count() const noexcept { return d_.morphisms.size(); }
    const std::string& object_name(ObjId x) const { return d_.objects.at(x); }
    const Morphism& morphism(MorId m) const { return d_.morphisms.at(m); }
    const std::string& morphism_name(MorId m) const { return d_.morphisms.at(m).name; }
    ObjId src(MorId m) const { return d_.morphisms.at(m).src; }
    ObjId tgt(MorId m) const { return d_.morphisms.at(m).tgt; }
    std::optional<ObjId> find_object(const std::string& name) const;
    std::optional<MorId> find_morphism(const std::string& name) const;

    MorId identity(ObjId x) const { return d_.identities.at(x); }
    bool is_identity(MorId m) const { return d_.identities.at(src(m)) == m; }
    /// g o f. Throws CospanMismatch when tgt(f) != src(g), SiteError when the
    /// table lacks the pair.
    MorId compose(MorId g, MorId f) const;
    bool is_confined(MorId m) const { return d_.confined.at(m); }

    /// All morphisms X -> Y, in id order.
    const std::vector<MorId>& hom(ObjId x, ObjId y) const { return homs_.at(x * object_count() + y); }
    const std::vector<MorId>& morphisms_into(ObjId y) const { return into_.at(y); }
    const std::vector<MorId>& morphisms_from(ObjId x) const { return from_.at(x); }

    /// Chosen square over (f, g). Throws CospanMismatch when the targets
    /// differ, SiteError when the table lacks the cospan.
    const PullbackSquare& pullback(MorId f, MorId g) const;
    /// The unique c: W -> apex with g_prime o c = a and f_prime o c = b.
    /// Throws SiteError when the universal property fails.
    MorId factor(const PullbackSquare& sq, MorId a, MorId b) const;

    /// Cospans X --f--> Y <--g-- Y' <--h-- Y''. Pasted: pullback(f', h) on top
    /// of pullback(f, g); direct: pullback(f, g o h).
    PasteComparison paste_horizontal(MorId f, MorId g, MorId h) const;
    /// X --f--> Y --g--> Z <--h-- Z'. Pasted: pullback(f, h') beside
    /// pullback(g, h); direct: pullback(g o f, h).
    PasteComparison paste_vertical(MorId f, MorId g, MorId h) const;

    std::optional<ObjId> final_object() const noexcept { return d_.final_object; }
    /// The unique morphism X -> pt. Throws MissingFinalObject.
    MorId to_final(ObjId x) const;
    ObjId require_final_object() const;

    std::string describe(MorId m) const;

private:
    SiteData d_;
    std::vector<std::vector<MorId>> homs_;
    std::vector<std::vector<MorId>> into_;
    std::vector<std::vector<MorId>> from_;
    std::vector<MorId> comp_;          // dense (g, f) -> g o f
    std::vector<std::size_t> pb_;      // dense (f, g) -> index into squares_
    std::vector<PullbackSquare> squares_;
};

/// Checks every site invariant exhaustively; never throws on semantic defects.
ValidationReport validate_site(const Site& s);

// ---------------------------------------------------------------------------
// Graded functors

enum class Variance { contra, cov };

struct GradeWindow {
    int lo = 0;
    int hi = 0;
    bool contains(int m) const noexcept { return lo <= m && m <= hi; }
    int span() const noexcept { return hi - lo; }
};

/// Contravariant (F^*) or covariant (h_*) functor into finitely generated
/// abelian groups, nonzero only on grades inside the window. A contravariant
/// map for h: X -> Y is F(Y) -> F(X); a covariant one is h(X) -> h(Y) and is
/// only defined for confined h.
class GradedFunctor {
public:
    GradedFunctor(std::shared_ptr<const Site> site, Variance variance, GradeWindow window);

    const std::shared_ptr<const Site>& site() const noexcept { return site_; }
    Variance variance() const noexcept { return variance_; }
    const GradeWindow& window() const noexcept { return window_; }

    void set_group(ObjId x, int grade, FgAbGroup g);
    /// Throws ShapeError when the hom's groups do not match, NotConfined for a
    /// covariant map on a non-confined morphism.
    void set_map(MorId m, int grade, GroupHom hom);

    /// Zero group outside the window or when unset.
    const FgAbGroup& group(ObjId x, int grade) const;
    /// Identity morphisms default to identity homs, others to zero.
    GroupHom map(MorId m, int grade) const;
    bool has_map(MorId m, int grade) const { return maps_.count({m, grade}) > 0; }

private:
    std::shared_ptr<const Site> site_;
    Variance variance_;
    GradeWindow window_;
    std::map<std::pair<ObjId, int>, FgAbGroup> groups_;
    std::map<std::pair<MorId, int>, GroupHom> maps_;
    FgAbGroup zero_;
};

/// Functoriality over every composable pair and every grade.
ValidationReport validate_functor(const GradedFunctor& f);

/// Degree-preserving transformation between two functors of the same variance
/// on the same site.
class NaturalTransf {
public:
    NaturalTransf(std::shared_ptr<const GradedFunctor> src, std::shared_ptr<const GradedFunctor> tgt);

    const GradedFunctor& src() const noexcept { return *src_; }
    const GradedFunctor& tgt() const noexcept { return *tgt_; }
    const std::shared_ptr<const GradedFunctor>& src_ptr() const noexcept { return src_; }
    const std::shared_ptr<const GradedFunctor>& tgt_ptr() const noexcept { return tgt_; }

    void set_component(ObjId x, int grade, GroupHom hom);
    /// Zero when unset.
    GroupHom component(ObjId x, int grade) const;
    /// Union of both windows.
    GradeWindow grades() const;

private:
    std::shared_ptr<const GradedFunctor> src_;
    std::shared_ptr<const GradedFunctor> tgt_;
    std::map<std::pair<ObjId, int>, GroupHom> components_;
};

/// Naturality over every morphism (confined ones for covariant functors) and
/// every grade.
ValidationReport validate_natural(const NaturalTransf& t);

}  // namespace bivar
