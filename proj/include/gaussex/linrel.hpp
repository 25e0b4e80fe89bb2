#pragma once

#include "gaussex/errors.hpp"
#include "gaussex/linalg.hpp"

namespace gaussex {

// A total linear relation R^m -> R^n, i.e. the set {(x, y) : y in M*x + D}
// with every x related to something.  Canonical form keeps only the
// D-orthogonal part of M, so equal relations have equal fields.
struct TotalLinRel {
    Matrix m{0, 0};                   // n x m
    Subspace fibre{Subspace::zero(0)}; // D, subspace of R^n

    Index dom() const { return m.cols(); }
    Index cod() const { return m.rows(); }
};

// Canonicalizes (projects m off the fibre) and validates.
TotalLinRel make_relation(const Matrix& m, const Subspace& fibre,
                          const ToleranceConfig& tol = default_tolerance());

// The graph {(x, m*x)} of a linear map.
TotalLinRel rel_graph(const Matrix& m);

TotalLinRel rel_identity(Index n);

// The state R^0 -> R^n relating the empty tuple to mean zero plus d.
TotalLinRel rel_state(const Subspace& d);

// The fully nondeterministic state: fibre all of R^n.
TotalLinRel rel_uninformative(Index n);

// Field-wise comparison of canonical forms.
bool relation_equal(const TotalLinRel& a, const TotalLinRel& b,
                    const ToleranceConfig& tol = default_tolerance());

// Membership test for the pair (x, y).
bool rel_contains(const TotalLinRel& rel, const Vector& x, const Vector& y,
                  const ToleranceConfig& tol = default_tolerance());

// Every relation relates x to m*x + fibre, so a relation is onto its
// codomain exactly when im(m) + fibre is everything.
bool is_cototal(const TotalLinRel& rel,
                const ToleranceConfig& tol = default_tolerance());

// Recovers the relation spanned by the columns of [xs; ys] (column i of xs
// pairs with column i of ys).  The span must be total: the xs block must
// have full row rank, else NotTotal.
TotalLinRel relation_from_pairs(const Matrix& xs, const Matrix& ys,
                                const ToleranceConfig& tol = default_tolerance());

// Relational composite of `first` followed by `second`:
//   M = P_{F-perp} * (M2 * M1),   F = M2[D1] + D2.
TotalLinRel compose(const TotalLinRel& first, const TotalLinRel& second,
                    const ToleranceConfig& tol = default_tolerance());

TotalLinRel tensor(const TotalLinRel& a, const TotalLinRel& b,
                   const ToleranceConfig& tol = default_tolerance());

// A cospan X --f--> P <--q-- Y whose right leg q is surjective; it presents
// the total relation {(x, y) : f*x = q*y}, i.e. y in pinv(q)*f*x + ker q.
struct CopartialMap {
    Matrix f{0, 0}; // X -> P
    Matrix q{0, 0}; // Y -> P, full row rank

    Index dom() const { return f.cols(); }
    Index cod() const { return q.cols(); }
    Index apex_dim() const { return q.rows(); }
};

// Validates shapes and surjectivity of q (NotSurjective otherwise).
CopartialMap make_copartial(const Matrix& f, const Matrix& q,
                            const ToleranceConfig& tol = default_tolerance());

// Kernel representation with q built from an orthonormal basis of D-perp.
CopartialMap to_cospan(const TotalLinRel& rel,
                       const ToleranceConfig& tol = default_tolerance());

TotalLinRel from_cospan(const CopartialMap& c,
                        const ToleranceConfig& tol = default_tolerance());

// Cospan composite of `first` followed by `second`, glued by the pushout of
// first.q against second.f.
CopartialMap compose_cospan(const CopartialMap& first, const CopartialMap& second,
                            const ToleranceConfig& tol = default_tolerance());

} // namespace gaussex
