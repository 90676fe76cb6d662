#include "bivar/exactalg.hpp"

#include "bivar/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cassert>
#include <numeric>
#include <sstream>
#include <utility>

namespace bivar {

// ---------------------------------------------------------------------------
// vectors

IntVector zero_vector(std::size_t n) { return IntVector(n, Integer(0)); }

IntVector unit_vector(std::size_t n, std::size_t k)
{
    IntVector v(n, Integer(0));
    v.at(k) = 1;
    return v;
}

IntVector operator+(const IntVector& a, const IntVector& b)
{
    if (a.size() != b.size())
        throw ShapeError(fmt::format("vector add: lengths {} and {}", a.size(), b.size()));
    IntVector r(a.size());
    for (std::size_t k = 0; k < a.size(); ++k)
        r[k] = a[k] + b[k];
    return r;
}

IntVector operator-(const IntVector& a, const IntVector& b)
{
    if (a.size() != b.size())
        throw ShapeError(fmt::format("vector subtract: lengths {} and {}", a.size(), b.size()));
    IntVector r(a.size());
    for (std::size_t k = 0; k < a.size(); ++k)
        r[k] = a[k] - b[k];
    return r;
}

IntVector operator-(const IntVector& a)
{
    IntVector r(a.size());
    for (std::size_t k = 0; k < a.size(); ++k)
        r[k] = -a[k];
    return r;
}

IntVector operator*(const Integer& k, const IntVector& a)
{
    IntVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        r[i] = k * a[i];
    return r;
}

bool is_zero(const IntVector& a)
{
    return std::all_of(a.begin(), a.end(), [](const Integer& x) { return x == 0; });
}

std::string to_string(const IntVector& v)
{
    std::string s = "[";
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k)
            s += ", ";
        s += v[k].get_str();
    }
    return s + "]";
}

// ---------------------------------------------------------------------------
// IntMatrix

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Integer(0))
{
}

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<long>> rows)
{
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_)
            throw ShapeError("ragged matrix literal");
        for (long x : r)
            data_.emplace_back(x);
    }
}

IntMatrix IntMatrix::identity(std::size_t n)
{
    IntMatrix m(n, n);
    for (std::size_t k = 0; k < n; ++k)
        m(k, k) = 1;
    return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<IntVector>& rows, std::size_t cols)
{
    IntMatrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols)
            throw ShapeError("from_rows: row length mismatch");
        for (std::size_t c = 0; c < cols; ++c)
            m(r, c) = rows[r][c];
    }
    return m;
}

IntMatrix IntMatrix::from_columns(const std::vector<IntVector>& cols, std::size_t rows)
{
    IntMatrix m(rows, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
        m.set_column(c, cols[c]);
    return m;
}

IntMatrix IntMatrix::diagonal(const IntVector& diag)
{
    IntMatrix m(diag.size(), diag.size());
    for (std::size_t k = 0; k < diag.size(); ++k)
        m(k, k) = diag[k];
    return m;
}

IntVector IntMatrix::row(std::size_t r) const
{
    return IntVector(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                     data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
}

IntVector IntMatrix::column(std::size_t c) const
{
    IntVector v(rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        v[r] = (*this)(r, c);
    return v;
}

void IntMatrix::set_column(std::size_t c, const IntVector& v)
{
    if (v.size() != rows_)
        throw ShapeError(fmt::format("set_column: length {} for {} rows", v.size(), rows_));
    for (std::size_t r = 0; r < rows_; ++r)
        (*this)(r, c) = v[r];
}

IntMatrix IntMatrix::transpose() const
{
    IntMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            t(c, r) = (*this)(r, c);
    return t;
}

IntMatrix IntMatrix::select_rows(std::span<const std::size_t> idx) const
{
    IntMatrix m(idx.size(), cols_);
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            m(r, c) = (*this)(idx[r], c);
    return m;
}

IntMatrix IntMatrix::select_cols(std::span<const std::size_t> idx) const
{
    IntMatrix m(rows_, idx.size());
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < idx.size(); ++c)
            m(r, c) = (*this)(r, idx[c]);
    return m;
}

bool IntMatrix::is_zero() const
{
    return std::all_of(data_.begin(), data_.end(), [](const Integer& x) { return x == 0; });
}

void IntMatrix::swap_rows(std::size_t a, std::size_t b)
{
    if (a == b)
        return;
    for (std::size_t c = 0; c < cols_; ++c)
        std::swap((*this)(a, c), (*this)(b, c));
}

void IntMatrix::swap_cols(std::size_t a, std::size_t b)
{
    if (a == b)
        return;
    for (std::size_t r = 0; r < rows_; ++r)
        std::swap((*this)(r, a), (*this)(r, b));
}

void IntMatrix::add_row_multiple(std::size_t dst, std::size_t src, const Integer& k)
{
    if (k == 0)
        return;
    for (std::size_t c = 0; c < cols_; ++c)
        (*this)(dst, c) += k * (*this)(src, c);
}

void IntMatrix::add_col_multiple(std::size_t dst, std::size_t src, const Integer& k)
{
    if (k == 0)
        return;
    for (std::size_t r = 0; r < rows_; ++r)
        (*this)(r, dst) += k * (*this)(r, src);
}

void IntMatrix::negate_row(std::size_t r)
{
    for (std::size_t c = 0; c < cols_; ++c)
        (*this)(r, c) = -(*this)(r, c);
}

void IntMatrix::negate_col(std::size_t c)
{
    for (std::size_t r = 0; r < rows_; ++r)
        (*this)(r, c) = -(*this)(r, c);
}

bool operator==(const IntMatrix& a, const IntMatrix& b)
{
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
}

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b)
{
    if (a.cols_ != b.rows_)
        throw ShapeError(fmt::format("matrix product {}x{} * {}x{}", a.rows_, a.cols_, b.rows_, b.cols_));
    IntMatrix m(a.rows_, b.cols_);
    for (std::size_t r = 0; r < a.rows_; ++r)
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const Integer& x = a(r, k);
            if (x == 0)
                continue;
            for (std::size_t c = 0; c < b.cols_; ++c)
                m(r, c) += x * b(k, c);
        }
    return m;
}

IntVector operator*(const IntMatrix& a, const IntVector& x)
{
    if (a.cols_ != x.size())
        throw ShapeError(fmt::format("matrix-vector product {}x{} * {}", a.rows_, a.cols_, x.size()));
    IntVector y(a.rows_, Integer(0));
    for (std::size_t r = 0; r < a.rows_; ++r)
        for (std::size_t c = 0; c < a.cols_; ++c)
            if (x[c] != 0)
                y[r] += a(r, c) * x[c];
    return y;
}

IntMatrix operator+(const IntMatrix& a, const IntMatrix& b)
{
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
        throw ShapeError("matrix add: shape mismatch");
    IntMatrix m = a;
    for (std::size_t k = 0; k < m.data_.size(); ++k)
        m.data_[k] += b.data_[k];
    return m;
}

IntMatrix operator-(const IntMatrix& a, const IntMatrix& b)
{
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
        throw ShapeError("matrix subtract: shape mismatch");
    IntMatrix m = a;
    for (std::size_t k = 0; k < m.data_.size(); ++k)
        m.data_[k] -= b.data_[k];
    return m;
}

IntMatrix operator-(const IntMatrix& a)
{
    IntMatrix m = a;
    for (auto& x : m.data_)
        x = -x;
    return m;
}

std::string IntMatrix::to_string() const
{
    std::string s = "[";
    for (std::size_t r = 0; r < rows_; ++r) {
        if (r)
            s += ", ";
        s += bivar::to_string(row(r));
    }
    return s + "]";
}

IntMatrix hstack(const IntMatrix& a, const IntMatrix& b)
{
    if (a.rows() != b.rows())
        throw ShapeError("hstack: row mismatch");
    IntMatrix m(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c)
            m(r, c) = a(r, c);
        for (std::size_t c = 0; c < b.cols(); ++c)
            m(r, a.cols() + c) = b(r, c);
    }
    return m;
}

IntMatrix vstack(const IntMatrix& a, const IntMatrix& b)
{
    if (a.cols() != b.cols())
        throw ShapeError("vstack: column mismatch");
    IntMatrix m(a.rows() + b.rows(), a.cols());
    for (std::size_t c = 0; c < a.cols(); ++c) {
        for (std::size_t r = 0; r < a.rows(); ++r)
            m(r, c) = a(r, c);
        for (std::size_t r = 0; r < b.rows(); ++r)
            m(a.rows() + r, c) = b(r, c);
    }
    return m;
}

// Bareiss fraction-free elimination.
Integer determinant(const IntMatrix& m)
{
    if (m.rows() != m.cols())
        throw ShapeError("determinant of non-square matrix");
    const std::size_t n = m.rows();
    if (n == 0)
        return 1;
    IntMatrix a = m;
    Integer sign = 1;
    Integer prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a(k, k) == 0) {
            std::size_t p = k + 1;
            while (p < n && a(p, k) == 0)
                ++p;
            if (p == n)
                return 0;
            a.swap_rows(k, p);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) {
                Integer t = a(i, j) * a(k, k) - a(i, k) * a(k, j);
                mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
                a(i, j) = t;
            }
        prev = a(k, k);
    }
    return sign * a(n - 1, n - 1);
}

// ---------------------------------------------------------------------------
// Smith normal form

namespace {

Integer abs_of(const Integer& x) { return abs(x); }

Integer floor_div(const Integer& a, const Integer& b)
{
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

Integer floor_mod(const Integer& a, const Integer& b)
{
    Integer r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

class SmithWorker {
public:
    explicit SmithWorker(const IntMatrix& m)
        : m_(m), u_(IntMatrix::identity(m.rows())), u_inv_(IntMatrix::identity(m.rows())),
          v_(IntMatrix::identity(m.cols()))
    {
    }

    SmithForm run()
    {
        const std::size_t rows = m_.rows();
        const std::size_t cols = m_.cols();
        std::size_t t = 0;
        for (; t < std::min(rows, cols); ++t) {
            auto piv = smallest_in_block(t);
            if (!piv)
                break;
            swap_rows(t, piv->first);
            swap_cols(t, piv->second);
            settle_pivot(t);
            if (m_(t, t) < 0)
                negate_row(t);
        }
        return SmithForm{std::move(m_), std::move(u_), std::move(v_), std::move(u_inv_), t};
    }

private:
    std::optional<std::pair<std::size_t, std::size_t>> smallest_in_block(std::size_t t) const
    {
        std::optional<std::pair<std::size_t, std::size_t>> best;
        Integer best_abs;
        for (std::size_t i = t; i < m_.rows(); ++i)
            for (std::size_t j = t; j < m_.cols(); ++j) {
                if (m_(i, j) == 0)
                    continue;
                Integer a = abs_of(m_(i, j));
                if (!best || a < best_abs) {
                    best = {i, j};
                    best_abs = a;
                }
            }
        return best;
    }

    // Clears row t and column t and makes the pivot divide the trailing block.
    void settle_pivot(std::size_t t)
    {
        for (;;) {
            for (std::size_t i = t + 1; i < m_.rows(); ++i)
                if (m_(i, t) != 0)
                    add_row(i, t, -floor_div(m_(i, t), m_(t, t)));
            for (std::size_t j = t + 1; j < m_.cols(); ++j)
                if (m_(t, j) != 0)
                    add_col(j, t, -floor_div(m_(t, j), m_(t, t)));

            // Leftover remainders: smallest one (row-major) becomes the pivot.
            std::optional<std::pair<std::size_t, std::size_t>> best;
            Integer best_abs;
            auto consider = [&](std::size_t i, std::size_t j) {
                if (m_(i, j) == 0)
                    return;
                Integer a = abs_of(m_(i, j));
                if (!best || a < best_abs) {
                    best = {i, j};
                    best_abs = a;
                }
            };
            for (std::size_t j = t + 1; j < m_.cols(); ++j)
                consider(t, j);
            for (std::size_t i = t + 1; i < m_.rows(); ++i)
                consider(i, t);
            if (best) {
                if (best->first == t)
                    swap_cols(t, best->second);
                else
                    swap_rows(t, best->first);
                continue;
            }

            bool fixed = false;
            for (std::size_t i = t + 1; i < m_.rows() && !fixed; ++i)
                for (std::size_t j = t + 1; j < m_.cols(); ++j)
                    if (floor_mod(m_(i, j), m_(t, t)) != 0) {
                        add_row(t, i, 1);
                        fixed = true;
                        break;
                    }
            if (!fixed)
                return;
        }
    }

    void swap_rows(std::size_t a, std::size_t b)
    {
        m_.swap_rows(a, b);
        u_.swap_rows(a, b);
        u_inv_.swap_cols(a, b);
    }
    void swap_cols(std::size_t a, std::size_t b)
    {
        m_.swap_cols(a, b);
        v_.swap_cols(a, b);
    }
    // row[dst] += k row[src]
    void add_row(std::size_t dst, std::size_t src, const Integer& k)
    {
        m_.add_row_multiple(dst, src, k);
        u_.add_row_multiple(dst, src, k);
        u_inv_.add_col_multiple(src, dst, -k);
    }
    void add_col(std::size_t dst, std::size_t src, const Integer& k)
    {
        m_.add_col_multiple(dst, src, k);
        v_.add_col_multiple(dst, src, k);
    }
    void negate_row(std::size_t r)
    {
        m_.negate_row(r);
        u_.negate_row(r);
        u_inv_.negate_col(r);
    }

    IntMatrix m_;
    IntMatrix u_;
    IntMatrix u_inv_;
    IntMatrix v_;
};

}  // namespace

SmithForm snf(const IntMatrix& m) { return SmithWorker(m).run(); }

// ---------------------------------------------------------------------------
// LatticeSolver

LatticeSolver::LatticeSolver(IntMatrix a) : a_(std::move(a)), s_(snf(a_)) {}

std::optional<IntVector> LatticeSolver::solve(const IntVector& b) const
{
    if (b.size() != a_.rows())
        throw ShapeError(fmt::format("lattice solve: rhs length {} for {} rows", b.size(), a_.rows()));
    IntVector y = s_.u * b;
    IntVector z = zero_vector(a_.cols());
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (k < s_.rank) {
            if (!mpz_divisible_p(y[k].get_mpz_t(), s_.diag(k).get_mpz_t()))
                return std::nullopt;
            mpz_divexact(z[k].get_mpz_t(), y[k].get_mpz_t(), s_.diag(k).get_mpz_t());
        } else if (y[k] != 0) {
            return std::nullopt;
        }
    }
    return s_.v * z;
}

IntMatrix LatticeSolver::kernel_basis() const
{
    std::vector<std::size_t> idx;
    for (std::size_t k = s_.rank; k < a_.cols(); ++k)
        idx.push_back(k);
    return s_.v.select_cols(idx);
}

IntMatrix LatticeSolver::lattice_basis() const
{
    IntMatrix b(a_.rows(), s_.rank);
    for (std::size_t k = 0; k < s_.rank; ++k)
        for (std::size_t r = 0; r < a_.rows(); ++r)
            b(r, k) = s_.u_inv(r, k) * s_.diag(k);
    return b;
}

// ---------------------------------------------------------------------------
// FgAbGroup

struct FgAbGroup::Data {
    std::size_t ngens = 0;
    IntMatrix relations;
    std::size_t free_rank = 0;
    std::vector<Integer> torsion;
    std::vector<Integer> orders;
    IntMatrix projection;
    IntMatrix representatives;
};

FgAbGroup::FgAbGroup()
{
    static const std::shared_ptr<const Data> zero = [] {
        auto d = std::make_shared<Data>();
        d->relations = IntMatrix(0, 0);
        d->projection = IntMatrix(0, 0);
        d->representatives = IntMatrix(0, 0);
        return d;
    }();
    d_ = zero;
}

FgAbGroup::FgAbGroup(std::size_t ngens, IntMatrix relations)
{
    if (relations.rows() != ngens)
        throw ShapeError(fmt::format("relations have {} rows for {} generators", relations.rows(), ngens));
    auto d = std::make_shared<Data>();
    d->ngens = ngens;
    d->relations = std::move(relations);

    SmithForm s = snf(d->relations);
    std::vector<std::size_t> order;
    for (std::size_t k = s.rank; k < ngens; ++k) {
        order.push_back(k);
        d->orders.emplace_back(0);
    }
    d->free_rank = order.size();
    for (std::size_t k = 0; k < s.rank; ++k) {
        if (s.diag(k) == 1)
            continue;
        order.push_back(k);
        d->orders.push_back(s.diag(k));
        d->torsion.push_back(s.diag(k));
    }
    d->projection = s.u.select_rows(order);
    d->representatives = s.u_inv.select_cols(order);
    d_ = std::move(d);
}

FgAbGroup FgAbGroup::free(std::size_t rank) { return FgAbGroup(rank, IntMatrix(rank, 0)); }

FgAbGroup FgAbGroup::cyclic(const Integer& n)
{
    if (n == 0)
        return free(1);
    IntMatrix rel(1, 1);
    rel(0, 0) = n;
    return FgAbGroup(1, rel);
}

FgAbGroup FgAbGroup::from_invariants(std::size_t free_rank, const std::vector<Integer>& torsion)
{
    const std::size_t n = free_rank + torsion.size();
    IntMatrix rel(n, torsion.size());
    for (std::size_t k = 0; k < torsion.size(); ++k) {
        if (torsion[k] < 2)
            throw ShapeError(fmt::format("torsion coefficient {} must be at least 2", torsion[k].get_str()));
        if (k > 0 && !mpz_divisible_p(torsion[k].get_mpz_t(), torsion[k - 1].get_mpz_t()))
            throw ShapeError("torsion coefficients must form a divisibility chain");
        rel(free_rank + k, k) = torsion[k];
    }
    return FgAbGroup(n, rel);
}

std::size_t FgAbGroup::ngens() const { return d_->ngens; }
const IntMatrix& FgAbGroup::relations() const { return d_->relations; }
std::size_t FgAbGroup::free_rank() const { return d_->free_rank; }
const std::vector<Integer>& FgAbGroup::torsion() const { return d_->torsion; }
std::size_t FgAbGroup::rank() const { return d_->orders.size(); }
const std::vector<Integer>& FgAbGroup::orders() const { return d_->orders; }
const IntMatrix& FgAbGroup::canonical_projection() const { return d_->projection; }
const IntMatrix& FgAbGroup::canonical_representatives() const { return d_->representatives; }

std::optional<Integer> FgAbGroup::order() const
{
    if (d_->free_rank > 0)
        return std::nullopt;
    Integer n = 1;
    for (const auto& t : d_->torsion)
        n *= t;
    return n;
}

IntVector FgAbGroup::to_canonical(const IntVector& x) const
{
    if (x.size() != d_->ngens)
        throw ShapeError(fmt::format("element has {} coordinates, group has {} generators", x.size(), d_->ngens));
    IntVector c = d_->projection * x;
    for (std::size_t k = 0; k < c.size(); ++k)
        if (d_->orders[k] != 0)
            c[k] = floor_mod(c[k], d_->orders[k]);
    return c;
}

IntVector FgAbGroup::from_canonical(const IntVector& c) const
{
    if (c.size() != rank())
        throw ShapeError(fmt::format("canonical vector has {} entries, group rank is {}", c.size(), rank()));
    return d_->representatives * c;
}

IntVector FgAbGroup::reduce(const IntVector& x) const { return from_canonical(to_canonical(x)); }

bool FgAbGroup::is_zero(const IntVector& x) const { return bivar::is_zero(to_canonical(x)); }

bool FgAbGroup::equal(const IntVector& x, const IntVector& y) const { return to_canonical(x) == to_canonical(y); }

bool FgAbGroup::same_presentation(const FgAbGroup& other) const
{
    return d_ == other.d_ || (d_->ngens == other.d_->ngens && d_->relations == other.d_->relations);
}

bool FgAbGroup::isomorphic(const FgAbGroup& other) const
{
    return free_rank() == other.free_rank() && torsion() == other.torsion();
}

std::string FgAbGroup::describe() const
{
    if (rank() == 0)
        return "0";
    std::vector<std::string> parts;
    if (free_rank() == 1)
        parts.emplace_back("Z");
    else if (free_rank() > 1)
        parts.push_back(fmt::format("Z^{}", free_rank()));
    for (const auto& t : torsion())
        parts.push_back("Z/" + t.get_str());
    std::string s;
    for (std::size_t k = 0; k < parts.size(); ++k)
        s += (k ? " + " : "") + parts[k];
    return s;
}

// ---------------------------------------------------------------------------
// GroupElement

GroupElement::GroupElement(FgAbGroup group, IntVector coords)
    : group_(std::move(group)), coords_(group_.reduce(coords))
{
}

GroupElement GroupElement::zero(const FgAbGroup& g) { return GroupElement(g, zero_vector(g.ngens())); }

static void require_same(const FgAbGroup& a, const FgAbGroup& b, const char* what)
{
    if (!a.same_presentation(b))
        throw ShapeError(fmt::format("{}: groups differ ({} vs {})", what, a.describe(), b.describe()));
}

GroupElement operator+(const GroupElement& a, const GroupElement& b)
{
    require_same(a.group_, b.group_, "element add");
    return GroupElement(a.group_, a.coords_ + b.coords_);
}

GroupElement operator-(const GroupElement& a, const GroupElement& b)
{
    require_same(a.group_, b.group_, "element subtract");
    return GroupElement(a.group_, a.coords_ - b.coords_);
}

GroupElement operator-(const GroupElement& a) { return GroupElement(a.group_, -a.coords_); }

bool operator==(const GroupElement& a, const GroupElement& b)
{
    return a.group_.same_presentation(b.group_) && a.coords_ == b.coords_;
}

// ---------------------------------------------------------------------------
// GroupHom

bool GroupHom::is_well_defined(const FgAbGroup& src, const FgAbGroup& tgt, const IntMatrix& matrix)
{
    if (matrix.rows() != tgt.ngens() || matrix.cols() != src.ngens())
        return false;
    const IntMatrix img = matrix * src.relations();
    for (std::size_t c = 0; c < img.cols(); ++c)
        if (!tgt.is_zero(img.column(c)))
            return false;
    return true;
}

GroupHom::GroupHom(FgAbGroup src, FgAbGroup tgt, IntMatrix matrix)
    : src_(std::move(src)), tgt_(std::move(tgt)), mat_(std::move(matrix))
{
    if (mat_.rows() != tgt_.ngens() || mat_.cols() != src_.ngens())
        throw ShapeError(fmt::format("hom matrix is {}x{}, expected {}x{}", mat_.rows(), mat_.cols(), tgt_.ngens(),
                                     src_.ngens()));
    if (!is_well_defined(src_, tgt_, mat_))
        throw ShapeError(fmt::format("matrix {} does not define a homomorphism {} -> {}", mat_.to_string(),
                                     src_.describe(), tgt_.describe()));
}

GroupHom GroupHom::zero(const FgAbGroup& src, const FgAbGroup& tgt)
{
    return GroupHom(src, tgt, IntMatrix(tgt.ngens(), src.ngens()));
}

GroupHom GroupHom::identity(const FgAbGroup& g) { return GroupHom(g, g, IntMatrix::identity(g.ngens())); }

GroupHom GroupHom::scalar(const FgAbGroup& g, const Integer& k)
{
    IntMatrix m(g.ngens(), g.ngens());
    for (std::size_t i = 0; i < g.ngens(); ++i)
        m(i, i) = k;
    return GroupHom(g, g, m);
}

GroupHom GroupHom::from_canonical(const FgAbGroup& src, const FgAbGroup& tgt, const IntMatrix& canon)
{
    if (canon.rows() != tgt.rank() || canon.cols() != src.rank())
        throw ShapeError("canonical hom matrix has the wrong shape");
    return GroupHom(src, tgt, tgt.canonical_representatives() * canon * src.canonical_projection());
}

IntVector GroupHom::apply(const IntVector& x) const
{
    if (x.size() != src_.ngens())
        throw ShapeError(fmt::format("hom applied to vector of length {}, source has {} generators", x.size(),
                                     src_.ngens()));
    return tgt_.reduce(mat_ * x);
}

GroupElement GroupHom::operator()(const GroupElement& x) const
{
    require_same(x.group(), src_, "hom application");
    return GroupElement(tgt_, mat_ * x.coords());
}

IntMatrix GroupHom::canonical_matrix() const
{
    IntMatrix m = tgt_.canonical_projection() * mat_ * src_.canonical_representatives();
    const auto& ord = tgt_.orders();
    for (std::size_t r = 0; r < m.rows(); ++r)
        if (ord[r] != 0)
            for (std::size_t c = 0; c < m.cols(); ++c)
                m(r, c) = floor_mod(m(r, c), ord[r]);
    return m;
}

bool GroupHom::is_zero() const
{
    for (std::size_t c = 0; c < mat_.cols(); ++c)
        if (!tgt_.is_zero(mat_.column(c)))
            return false;
    return true;
}

bool GroupHom::is_injective() const { return kernel(*this).group().is_trivial(); }

bool GroupHom::is_surjective() const
{
    const Subgroup im = image(*this);
    const IntMatrix& reps = tgt_.canonical_representatives();
    for (std::size_t k = 0; k < tgt_.rank(); ++k)
        if (!im.contains(reps.column(k)))
            return false;
    return true;
}

GroupHom compose(const GroupHom& g, const GroupHom& f)
{
    if (!f.tgt().same_presentation(g.src()))
        throw ShapeError(fmt::format("compose: middle groups differ ({} vs {})", f.tgt().describe(),
                                     g.src().describe()));
    return GroupHom(f.src(), g.tgt(), g.matrix() * f.matrix());
}

GroupHom add(const GroupHom& a, const GroupHom& b)
{
    require_same(a.src(), b.src(), "hom add (source)");
    require_same(a.tgt(), b.tgt(), "hom add (target)");
    return GroupHom(a.src(), a.tgt(), a.matrix() + b.matrix());
}

GroupHom negate(const GroupHom& a) { return GroupHom(a.src(), a.tgt(), -a.matrix()); }

GroupHom subtract(const GroupHom& a, const GroupHom& b) { return add(a, negate(b)); }

bool is_equal(const GroupHom& a, const GroupHom& b)
{
    require_same(a.src(), b.src(), "hom equality (source)");
    require_same(a.tgt(), b.tgt(), "hom equality (target)");
    const IntMatrix diff = a.matrix() - b.matrix();
    for (std::size_t c = 0; c < diff.cols(); ++c)
        if (!a.tgt().is_zero(diff.column(c)))
            return false;
    return true;
}

// ---------------------------------------------------------------------------
// HomGroup

HomGroup::HomGroup(FgAbGroup src, FgAbGroup tgt) : src_(std::move(src)), tgt_(std::move(tgt))
{
    const auto& d = src_.orders();
    const auto& e = tgt_.orders();
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < e.size(); ++j) {
            if (d[i] == 0) {
                entries_.push_back({j, i, Integer(1), e[j]});
                continue;
            }
            if (e[j] == 0)
                continue;  // torsion into free: only zero
            Integer g = gcd(d[i], e[j]);
            if (g == 1)
                continue;
            entries_.push_back({j, i, Integer(e[j] / g), g});
        }
    std::size_t ntors = 0;
    for (const auto& en : entries_)
        if (en.order != 0)
            ++ntors;
    IntMatrix rel(entries_.size(), ntors);
    std::size_t col = 0;
    for (std::size_t k = 0; k < entries_.size(); ++k)
        if (entries_[k].order != 0)
            rel(k, col++) = entries_[k].order;
    group_ = FgAbGroup(entries_.size(), rel);
}

IntVector HomGroup::encode(const GroupHom& hom) const
{
    require_same(hom.src(), src_, "hom encode (source)");
    require_same(hom.tgt(), tgt_, "hom encode (target)");
    const IntMatrix c = hom.canonical_matrix();
    IntVector coords(entries_.size());
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        const auto& en = entries_[k];
        const Integer& x = c(en.tgt_index, en.src_index);
        if (!mpz_divisible_p(x.get_mpz_t(), en.step.get_mpz_t()))
            throw ShapeError("hom encode: canonical entry not a multiple of its step");
        mpz_divexact(coords[k].get_mpz_t(), x.get_mpz_t(), en.step.get_mpz_t());
    }
    return group_.reduce(coords);
}

GroupHom HomGroup::decode(const IntVector& coords) const
{
    if (coords.size() != entries_.size())
        throw ShapeError(fmt::format("hom decode: {} coordinates for {} generators", coords.size(), entries_.size()));
    IntMatrix c(tgt_.rank(), src_.rank());
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        const auto& en = entries_[k];
        c(en.tgt_index, en.src_index) = coords[k] * en.step;
    }
    return GroupHom::from_canonical(src_, tgt_, c);
}

// ---------------------------------------------------------------------------
// Subgroups

namespace {

// Canonical coordinates of the ambient group plus its torsion relations, as
// one matrix [images | torsion columns].
IntMatrix with_torsion_columns(const FgAbGroup& g, const IntMatrix& gens_canon, const Integer& sign)
{
    const auto& ord = g.orders();
    std::size_t ntors = 0;
    for (const auto& o : ord)
        if (o != 0)
            ++ntors;
    IntMatrix e(g.rank(), ntors);
    std::size_t col = 0;
    for (std::size_t k = 0; k < ord.size(); ++k)
        if (ord[k] != 0)
            e(k, col++) = sign * ord[k];
    return hstack(gens_canon, e);
}

}  // namespace

Subgroup::Subgroup(FgAbGroup group, GroupHom inclusion)
    : group_(std::move(group)), inclusion_(std::move(inclusion))
{
    require_same(group_, inclusion_.src(), "subgroup inclusion");
    const FgAbGroup& amb = inclusion_.tgt();
    IntMatrix gens = amb.canonical_projection() * inclusion_.matrix();
    solver_ = std::make_shared<const LatticeSolver>(with_torsion_columns(amb, gens, Integer(1)));
}

std::optional<IntVector> Subgroup::preimage(const IntVector& y) const
{
    const FgAbGroup& amb = inclusion_.tgt();
    auto sol = solver_->solve(amb.canonical_projection() * y);
    if (!sol)
        return std::nullopt;
    IntVector x(sol->begin(), sol->begin() + static_cast<std::ptrdiff_t>(group_.ngens()));
    return group_.reduce(x);
}

Subgroup subgroup_generated(const FgAbGroup& g, const IntMatrix& canonical_gens)
{
    if (canonical_gens.rows() != g.rank())
        throw ShapeError("subgroup generators must be given in canonical coordinates");
    const std::size_t k = canonical_gens.cols();
    const IntMatrix full = with_torsion_columns(g, canonical_gens, Integer(-1));
    const IntMatrix ker = LatticeSolver(full).kernel_basis();
    std::vector<std::size_t> top(k);
    std::iota(top.begin(), top.end(), 0);
    FgAbGroup sub(k, ker.select_rows(top));
    GroupHom inc(sub, g, g.canonical_representatives() * canonical_gens);
    return Subgroup(std::move(sub), std::move(inc));
}

Subgroup kernel(const GroupHom& f)
{
    const FgAbGroup& src = f.src();
    const FgAbGroup& tgt = f.tgt();
    const IntMatrix images = tgt.canonical_projection() * f.matrix() * src.canonical_representatives();
    const IntMatrix ker = LatticeSolver(with_torsion_columns(tgt, images, Integer(-1))).kernel_basis();
    std::vector<std::size_t> top(src.rank());
    std::iota(top.begin(), top.end(), 0);
    const IntMatrix span = ker.select_rows(top);
    return subgroup_generated(src, LatticeSolver(span).lattice_basis());
}

Subgroup image(const GroupHom& f)
{
    const FgAbGroup& tgt = f.tgt();
    const IntMatrix images = tgt.canonical_projection() * f.matrix() * f.src().canonical_representatives();
    return subgroup_generated(tgt, images);
}

// ---------------------------------------------------------------------------
// DirectSum

namespace {

FgAbGroup block_sum(const std::vector<FgAbGroup>& factors)
{
    std::size_t ngens = 0;
    std::size_t nrels = 0;
    for (const auto& g : factors) {
        ngens += g.ngens();
        nrels += g.relations().cols();
    }
    IntMatrix rel(ngens, nrels);
    std::size_t r0 = 0;
    std::size_t c0 = 0;
    for (const auto& g : factors) {
        const IntMatrix& gr = g.relations();
        for (std::size_t r = 0; r < gr.rows(); ++r)
            for (std::size_t c = 0; c < gr.cols(); ++c)
                rel(r0 + r, c0 + c) = gr(r, c);
        r0 += g.ngens();
        c0 += gr.cols();
    }
    return FgAbGroup(ngens, rel);
}

}  // namespace

DirectSum::DirectSum(std::vector<FgAbGroup> factors) : factors_(std::move(factors)), group_(block_sum(factors_))
{
    std::size_t off = 0;
    for (const auto& g : factors_) {
        offsets_.push_back(off);
        off += g.ngens();
    }
}

GroupHom DirectSum::injection(std::size_t k) const
{
    const FgAbGroup& f = factors_.at(k);
    IntMatrix m(group_.ngens(), f.ngens());
    for (std::size_t i = 0; i < f.ngens(); ++i)
        m(offsets_[k] + i, i) = 1;
    return GroupHom(f, group_, m);
}

GroupHom DirectSum::projection(std::span<const std::size_t> factors) const
{
    std::vector<FgAbGroup> chosen;
    std::size_t rows = 0;
    for (std::size_t k : factors) {
        chosen.push_back(factors_.at(k));
        rows += factors_[k].ngens();
    }
    IntMatrix m(rows, group_.ngens());
    std::size_t r0 = 0;
    for (std::size_t k : factors) {
        for (std::size_t i = 0; i < factors_[k].ngens(); ++i)
            m(r0 + i, offsets_[k] + i) = 1;
        r0 += factors_[k].ngens();
    }
    return GroupHom(group_, block_sum(chosen), m);
}

IntVector DirectSum::join(const std::vector<IntVector>& parts) const
{
    if (parts.size() != factors_.size())
        throw ShapeError("direct sum join: wrong number of parts");
    IntVector x;
    x.reserve(group_.ngens());
    for (std::size_t k = 0; k < parts.size(); ++k) {
        if (parts[k].size() != factors_[k].ngens())
            throw ShapeError("direct sum join: part has the wrong length");
        x.insert(x.end(), parts[k].begin(), parts[k].end());
    }
    return x;
}

IntVector DirectSum::part(const IntVector& x, std::size_t k) const
{
    if (x.size() != group_.ngens())
        throw ShapeError("direct sum part: wrong vector length");
    const auto b = x.begin() + static_cast<std::ptrdiff_t>(offsets_.at(k));
    return factors_[k].reduce(IntVector(b, b + static_cast<std::ptrdiff_t>(factors_[k].ngens())));
}

Subgroup project(const Subgroup& sub, const DirectSum& sum, std::span<const std::size_t> factors)
{
    return image(compose(sum.projection(factors), sub.inclusion()));
}

}  // namespace bivar
