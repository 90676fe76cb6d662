#pragma once

// Exact integer linear algebra: matrices over Z, Smith normal form, finitely
// generated abelian groups given by presentations, homomorphisms between them,
// Hom-groups, kernels, images and direct sums.

#include <gmpxx.h>

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bivar {

using Integer = mpz_class;
using IntVector = std::vector<Integer>;

IntVector zero_vector(std::size_t n);
IntVector unit_vector(std::size_t n, std::size_t k);
IntVector operator+(const IntVector& a, const IntVector& b);
IntVector operator-(const IntVector& a, const IntVector& b);
IntVector operator-(const IntVector& a);
IntVector operator*(const Integer& k, const IntVector& a);
bool is_zero(const IntVector& a);
std::string to_string(const IntVector& v);

/// Dense row-major integer matrix.
class IntMatrix {
public:
    IntMatrix() = default;
    IntMatrix(std::size_t rows, std::size_t cols);
    IntMatrix(std::initializer_list<std::initializer_list<long>> rows);

    static IntMatrix identity(std::size_t n);
    static IntMatrix from_rows(const std::vector<IntVector>& rows, std::size_t cols);
    static IntMatrix from_columns(const std::vector<IntVector>& cols, std::size_t rows);
    static IntMatrix diagonal(const IntVector& diag);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    Integer& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Integer& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    IntVector row(std::size_t r) const;
    IntVector column(std::size_t c) const;
    void set_column(std::size_t c, const IntVector& v);

    IntMatrix transpose() const;
    IntMatrix select_rows(std::span<const std::size_t> idx) const;
    IntMatrix select_cols(std::span<const std::size_t> idx) const;
    bool is_zero() const;

    void swap_rows(std::size_t a, std::size_t b);
    void swap_cols(std::size_t a, std::size_t b);
    /// row[dst] += k * row[src]
    void add_row_multiple(std::size_t dst, std::size_t src, const Integer& k);
    /// col[dst] += k * col[src]
    void add_col_multiple(std::size_t dst, std::size_t src, const Integer& k);
    void negate_row(std::size_t r);
    void negate_col(std::size_t c);

    friend bool operator==(const IntMatrix& a, const IntMatrix& b);
    friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b);
    friend IntVector operator*(const IntMatrix& a, const IntVector& x);
    friend IntMatrix operator+(const IntMatrix& a, const IntMatrix& b);
    friend IntMatrix operator-(const IntMatrix& a, const IntMatrix& b);
    friend IntMatrix operator-(const IntMatrix& a);

    std::string to_string() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Integer> data_;
};

IntMatrix hstack(const IntMatrix& a, const IntMatrix& b);
IntMatrix vstack(const IntMatrix& a, const IntMatrix& b);
Integer determinant(const IntMatrix& m);

/// u * m * v == d, with u and v unimodular and d diagonal, non-negative,
/// d(0,0) | d(1,1) | ... ; `u_inv` is the inverse of u.
struct SmithForm {
    IntMatrix d;
    IntMatrix u;
    IntMatrix v;
    IntMatrix u_inv;
    std::size_t rank = 0;

    const Integer& diag(std::size_t k) const { return d(k, k); }
};

/// Pivoting always takes the smallest nonzero absolute value, ties broken by
/// row-major position, so the output is a pure function of the input.
SmithForm snf(const IntMatrix& m);

/// Column lattice of a fixed matrix. Backs every membership question in the
/// library (well-definedness, kernels, preimages, solvability).
class LatticeSolver {
public:
    explicit LatticeSolver(IntMatrix a);

    const IntMatrix& matrix() const noexcept { return a_; }
    /// Some x with A x = b, or nullopt when b is outside the column lattice.
    std::optional<IntVector> solve(const IntVector& b) const;
    bool contains(const IntVector& b) const { return solve(b).has_value(); }
    /// Columns form a basis of { x : A x = 0 }.
    IntMatrix kernel_basis() const;
    /// Columns form a basis of A Z^n.
    IntMatrix lattice_basis() const;

private:
    IntMatrix a_;
    SmithForm s_;
};

/// Finitely generated abelian group Z^ngens / (relations Z^k). Relations are
/// the columns of `relations`. Values are immutable and cheap to copy.
///
/// Every group carries a canonical decomposition Z^r + Z/d_1 + ... + Z/d_t
/// (d_i >= 2, d_i | d_{i+1}); canonical coordinates list the free part first.
class FgAbGroup {
public:
    FgAbGroup();  // zero group
    FgAbGroup(std::size_t ngens, IntMatrix relations);

    static FgAbGroup free(std::size_t rank);
    static FgAbGroup cyclic(const Integer& n);
    /// Diagonal presentation already in canonical form.
    static FgAbGroup from_invariants(std::size_t free_rank, const std::vector<Integer>& torsion);

    std::size_t ngens() const;
    const IntMatrix& relations() const;

    std::size_t free_rank() const;
    const std::vector<Integer>& torsion() const;
    /// Number of canonical generators.
    std::size_t rank() const;
    /// Order of each canonical generator, 0 for free ones.
    const std::vector<Integer>& orders() const;
    bool is_trivial() const { return rank() == 0; }
    bool is_finite() const { return free_rank() == 0; }
    /// Number of elements, nullopt when infinite.
    std::optional<Integer> order() const;

    /// Reduced canonical coordinates of the element with generator coordinates x.
    IntVector to_canonical(const IntVector& x) const;
    /// Generator coordinates of the element with canonical coordinates c.
    IntVector from_canonical(const IntVector& c) const;
    /// Canonical representative (in generator coordinates) of the class of x.
    IntVector reduce(const IntVector& x) const;
    bool is_zero(const IntVector& x) const;
    bool equal(const IntVector& x, const IntVector& y) const;

    /// rank() x ngens(): unreduced canonical coordinates.
    const IntMatrix& canonical_projection() const;
    /// ngens() x rank(): representatives of canonical generators.
    const IntMatrix& canonical_representatives() const;

    /// Same presentation (not merely isomorphic).
    bool same_presentation(const FgAbGroup& other) const;
    bool isomorphic(const FgAbGroup& other) const;
    /// "Z^2 + Z/2 + Z/4", or "0".
    std::string describe() const;

private:
    struct Data;
    std::shared_ptr<const Data> d_;
};

class GroupElement {
public:
    GroupElement(FgAbGroup group, IntVector coords);
    static GroupElement zero(const FgAbGroup& g);

    const FgAbGroup& group() const noexcept { return group_; }
    const IntVector& coords() const noexcept { return coords_; }
    IntVector canonical() const { return group_.to_canonical(coords_); }

    friend GroupElement operator+(const GroupElement& a, const GroupElement& b);
    friend GroupElement operator-(const GroupElement& a, const GroupElement& b);
    friend GroupElement operator-(const GroupElement& a);
    friend bool operator==(const GroupElement& a, const GroupElement& b);

private:
    FgAbGroup group_;
    IntVector coords_;
};

/// Homomorphism src -> tgt given on generators: column k of `matrix` holds the
/// target coordinates of the image of generator k.
class GroupHom {
public:
    /// Throws ShapeError on dimension mismatch or when relations of src are not
    /// sent into the relation lattice of tgt.
    GroupHom(FgAbGroup src, FgAbGroup tgt, IntMatrix matrix);

    static GroupHom zero(const FgAbGroup& src, const FgAbGroup& tgt);
    static GroupHom identity(const FgAbGroup& g);
    static GroupHom scalar(const FgAbGroup& g, const Integer& k);
    /// From a tgt.rank() x src.rank() matrix in canonical coordinates.
    static GroupHom from_canonical(const FgAbGroup& src, const FgAbGroup& tgt, const IntMatrix& canon);
    /// Well-definedness test without constructing.
    static bool is_well_defined(const FgAbGroup& src, const FgAbGroup& tgt, const IntMatrix& matrix);

    const FgAbGroup& src() const noexcept { return src_; }
    const FgAbGroup& tgt() const noexcept { return tgt_; }
    const IntMatrix& matrix() const noexcept { return mat_; }

    /// Reduced target coordinates of the image of x.
    IntVector apply(const IntVector& x) const;
    GroupElement operator()(const GroupElement& x) const;
    /// Reduced tgt.rank() x src.rank() matrix in canonical coordinates.
    IntMatrix canonical_matrix() const;

    bool is_zero() const;
    bool is_injective() const;
    bool is_surjective() const;

private:
    FgAbGroup src_;
    FgAbGroup tgt_;
    IntMatrix mat_;
};

/// g o f
GroupHom compose(const GroupHom& g, const GroupHom& f);
GroupHom add(const GroupHom& a, const GroupHom& b);
GroupHom negate(const GroupHom& a);
GroupHom subtract(const GroupHom& a, const GroupHom& b);
/// Equality modulo the target relations.
bool is_equal(const GroupHom& a, const GroupHom& b);

/// Hom(src, tgt) as a group, with a codec between its elements and GroupHoms.
class HomGroup {
public:
    HomGroup(FgAbGroup src, FgAbGroup tgt);

    const FgAbGroup& src() const noexcept { return src_; }
    const FgAbGroup& tgt() const noexcept { return tgt_; }
    const FgAbGroup& group() const noexcept { return group_; }

    /// Reduced coordinates of hom in group().
    IntVector encode(const GroupHom& hom) const;
    GroupHom decode(const IntVector& coords) const;

private:
    // One generator per (target canonical index, source canonical index) pair
    // whose hom group is nontrivial; `step` is the canonical-matrix entry it
    // contributes.
    struct Entry {
        std::size_t tgt_index;
        std::size_t src_index;
        Integer step;
        Integer order;  // 0 when infinite
    };
    FgAbGroup src_;
    FgAbGroup tgt_;
    FgAbGroup group_;
    std::vector<Entry> entries_;
};

inline HomGroup hom_group(const FgAbGroup& g, const FgAbGroup& h) { return HomGroup(g, h); }

/// A subgroup presented on its own generators with its inclusion map.
class Subgroup {
public:
    Subgroup(FgAbGroup group, GroupHom inclusion);

    const FgAbGroup& group() const noexcept { return group_; }
    const GroupHom& inclusion() const noexcept { return inclusion_; }
    const FgAbGroup& ambient() const noexcept { return inclusion_.tgt(); }

    /// Reduced coordinates x in group() with inclusion(x) == y (ambient
    /// generator coordinates), or nullopt when y is not in the subgroup.
    std::optional<IntVector> preimage(const IntVector& y) const;
    bool contains(const IntVector& y) const { return preimage(y).has_value(); }

private:
    FgAbGroup group_;
    GroupHom inclusion_;
    std::shared_ptr<const LatticeSolver> solver_;
};

/// Subgroup of g generated by elements given in canonical coordinates of g
/// (columns of `canonical_gens`, g.rank() rows).
Subgroup subgroup_generated(const FgAbGroup& g, const IntMatrix& canonical_gens);
Subgroup kernel(const GroupHom& f);
Subgroup image(const GroupHom& f);

class DirectSum {
public:
    explicit DirectSum(std::vector<FgAbGroup> factors);

    const FgAbGroup& group() const noexcept { return group_; }
    std::size_t size() const noexcept { return factors_.size(); }
    const FgAbGroup& factor(std::size_t k) const { return factors_.at(k); }
    std::size_t offset(std::size_t k) const { return offsets_.at(k); }

    GroupHom injection(std::size_t k) const;
    /// Projection onto the listed factors, in the listed order.
    GroupHom projection(std::span<const std::size_t> factors) const;
    IntVector join(const std::vector<IntVector>& parts) const;
    IntVector part(const IntVector& x, std::size_t k) const;

private:
    std::vector<FgAbGroup> factors_;
    std::vector<std::size_t> offsets_;
    FgAbGroup group_;
};

/// Image of a subgroup of a direct sum under a coordinate projection.
Subgroup project(const Subgroup& sub, const DirectSum& sum, std::span<const std::size_t> factors);

}  // namespace bivar
