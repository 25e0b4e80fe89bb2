#pragma once

#include <Eigen/Dense>

#include "gaussex/errors.hpp"
#include "gaussex/tolerance.hpp"

namespace gaussex {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// ============================================================================
// Subspace
// ============================================================================

// Linear subspace of R^n, stored as an orthonormal basis (n x d, d may be 0;
// n = 0 is legal and denotes a subspace of the point space R^0).
//
// Stored bases are canonical: right singular vectors of the projector,
// each column sign-fixed so its largest-magnitude entry is positive. This
// makes serialized bases deterministic; equality of subspaces is still
// decided on projectors, never on bases.
class Subspace {
  public:
    Subspace() = default; // {0} in R^0

    static Subspace zero(Index ambient);
    static Subspace full(Index ambient);

    // Wraps a matrix whose columns are already orthonormal (checked against
    // tau_orth), then canonicalizes the basis.
    static Subspace from_orthonormal(const Matrix& basis,
                                     const ToleranceConfig& tol = default_tolerance());

    // Wraps a basis exactly as given (orthonormality checked, nothing
    // recomputed); for deserializing bases this library itself produced, so
    // a round trip does not perturb stored values.
    static Subspace from_canonical(const Matrix& basis,
                                   const ToleranceConfig& tol = default_tolerance());

    Index ambient_dim() const { return basis_.rows(); }
    Index dim() const { return basis_.cols(); }
    const Matrix& basis() const { return basis_; }
    const Matrix& projector() const { return proj_; }

    bool contains(const Vector& v, const ToleranceConfig& tol = default_tolerance()) const;

  private:
    friend Subspace orthonormalize(const Matrix&, const ToleranceConfig&, double);

    explicit Subspace(Matrix canonical_basis);

    Matrix basis_{0, 0}; // n x d, orthonormal columns
    Matrix proj_{0, 0};  // n x n, basis * basis^T, cached
};

// ============================================================================
// Rank-revealing primitives (all SVD-based, sharing one cutoff rule)
// ============================================================================

// Number of singular values >= tau_rank * max(sigma_max, scale_hint).
// scale_hint guards products that cancel exactly: pass the natural scale of
// the factors so roundoff residue is not mistaken for rank.
Index rank(const Matrix& m, const ToleranceConfig& tol = default_tolerance(),
           double scale_hint = 0.0);

bool is_surjective(const Matrix& m, const ToleranceConfig& tol = default_tolerance());

// Column space of `spanning` as a canonical Subspace.
Subspace orthonormalize(const Matrix& spanning,
                        const ToleranceConfig& tol = default_tolerance(),
                        double scale_hint = 0.0);

Subspace orthogonal_complement(const Subspace& d);

Subspace subspace_sum(const Subspace& a, const Subspace& b,
                      const ToleranceConfig& tol = default_tolerance());

// Computed as the complement of the sum of complements.
Subspace subspace_intersect(const Subspace& a, const Subspace& b,
                            const ToleranceConfig& tol = default_tolerance());

// A x B inside R^(ambient(A) + ambient(B)).
Subspace subspace_product(const Subspace& a, const Subspace& b);

// Image of a subspace (or of all of R^cols) under m.
Subspace image(const Matrix& m, const Subspace& d,
               const ToleranceConfig& tol = default_tolerance());
Subspace image(const Matrix& m, const ToleranceConfig& tol = default_tolerance());

Subspace kernel(const Matrix& m, const ToleranceConfig& tol = default_tolerance());

// Moore-Penrose pseudoinverse (satisfies all four Penrose identities).
// scale_hint plays the same role as in rank(): singular values below
// tau_rank * max(sigma_max, scale_hint) are zeroed, so cancellation residue in
// a product passed here is not inverted into garbage.
Matrix pseudoinverse(const Matrix& m, const ToleranceConfig& tol = default_tolerance(),
                     double scale_hint = 0.0);

// Projector Frobenius distance < tau_eq. Ambient dims must match.
bool subspace_equal(const Subspace& a, const Subspace& b,
                    const ToleranceConfig& tol = default_tolerance());

// ============================================================================
// Pushout of a span  P <--p-- Y --g--> Q  in finite-dimensional Vect
// ============================================================================

// Apex W = (P (+) Q) / im([p; -g]) realized concretely as the orthogonal
// complement of im([p; -g]) inside R^{dim P + dim Q}; legs are the quotient
// map written in that complement's coordinates, so i1 * p == i2 * g.
struct PushoutCospan {
    Matrix i1; // w x dim P
    Matrix i2; // w x dim Q
    Index apex_dim() const { return i1.rows(); }
};

// Requires p surjective (full row rank); then i2 is surjective as well.
PushoutCospan pushout_cospan(const Matrix& p, const Matrix& g,
                             const ToleranceConfig& tol = default_tolerance());

// ============================================================================
// Shared validation helpers
// ============================================================================

void check_finite(const Matrix& m, const char* what);
void check_finite(const Vector& v, const char* what);

inline void check_same_ambient(const Subspace& a, const Subspace& b, const char* what) {
    if (a.ambient_dim() != b.ambient_dim())
        fail(errc::dimension_mismatch, std::string(what) + ": ambient dims " +
                                           std::to_string(a.ambient_dim()) + " vs " +
                                           std::to_string(b.ambient_dim()));
}

} // namespace gaussex
