#include "gaussex/linalg.hpp"

#include <cmath>

namespace gaussex {

ToleranceConfig& default_tolerance() {
    static ToleranceConfig tol;
    return tol;
}

void set_default_tolerance(const ToleranceConfig& tol) {
    tol.validate();
    default_tolerance() = tol;
}

void check_finite(const Matrix& m, const char* what) {
    if (m.size() > 0 && !m.allFinite())
        fail(errc::non_finite_input, std::string(what) + " contains NaN or Inf");
}

void check_finite(const Vector& v, const char* what) {
    if (v.size() > 0 && !v.allFinite())
        fail(errc::non_finite_input, std::string(what) + " contains NaN or Inf");
}

namespace {

// Eigen's decompositions assert on 0-sized inputs, so every SVD in the module
// funnels through here with explicit empty handling at the call site.
Eigen::JacobiSVD<Matrix> full_svd(const Matrix& m) {
    return Eigen::JacobiSVD<Matrix>(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

Index rank_from_singular_values(const Vector& sv, const ToleranceConfig& tol,
                                double scale_hint) {
    if (sv.size() == 0) return 0;
    const double cutoff = tol.tau_rank * std::max(sv(0), scale_hint);
    if (cutoff == 0.0) return 0; // exactly-zero matrix
    Index r = 0;
    while (r < sv.size() && sv(r) >= cutoff) ++r;
    return r;
}

// Flip each column so its largest-magnitude entry (first such on ties) is
// positive; makes serialized bases deterministic.
void sign_fix_columns(Matrix& b) {
    for (Index j = 0; j < b.cols(); ++j) {
        Index at = 0;
        double best = -1.0;
        for (Index i = 0; i < b.rows(); ++i) {
            const double a = std::abs(b(i, j));
            if (a > best) {
                best = a;
                at = i;
            }
        }
        if (b.rows() > 0 && b(at, j) < 0.0) b.col(j) = -b.col(j);
    }
}

// Canonical basis for the span of orthonormal columns q: right singular
// vectors of the projector q q^T, sign-fixed.
Matrix canonical_basis(const Matrix& q) {
    const Index n = q.rows(), d = q.cols();
    if (n == 0 || d == 0) return Matrix(n, 0);
    if (d == n) {
        return Matrix::Identity(n, n); // full space: identity is already canonical
    }
    const Matrix proj = q * q.transpose();
    auto svd = full_svd(proj);
    Matrix b = svd.matrixV().leftCols(d);
    sign_fix_columns(b);
    return b;
}

} // namespace

// ============================================================================
// Subspace
// ============================================================================

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
    proj_ = basis_ * basis_.transpose();
    if (proj_.size() == 0) proj_ = Matrix::Zero(basis_.rows(), basis_.rows());
}

Subspace Subspace::zero(Index ambient) {
    if (ambient < 0) fail(errc::bad_index, "negative ambient dimension");
    return Subspace(Matrix(ambient, 0));
}

Subspace Subspace::full(Index ambient) {
    if (ambient < 0) fail(errc::bad_index, "negative ambient dimension");
    return Subspace(Matrix::Identity(ambient, ambient));
}

Subspace Subspace::from_orthonormal(const Matrix& basis, const ToleranceConfig& tol) {
    check_finite(basis, "basis");
    if (basis.cols() > basis.rows())
        fail(errc::dimension_mismatch, "more basis columns than ambient dimension");
    if (basis.cols() > 0) {
        const Matrix gram = basis.transpose() * basis;
        const double dev =
            (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
        if (dev > tol.tau_orth)
            fail(errc::bad_index, "columns are not orthonormal (deviation " +
                                      std::to_string(dev) + ")");
    }
    return Subspace(canonical_basis(basis));
}

Subspace Subspace::from_canonical(const Matrix& basis, const ToleranceConfig& tol) {
    check_finite(basis, "basis");
    if (basis.cols() > basis.rows())
        fail(errc::dimension_mismatch, "more basis columns than ambient dimension");
    if (basis.cols() > 0) {
        const Matrix gram = basis.transpose() * basis;
        const double dev =
            (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
        if (dev > tol.tau_orth)
            fail(errc::bad_index, "columns are not orthonormal (deviation " +
                                      std::to_string(dev) + ")");
    }
    return Subspace(basis);
}

bool Subspace::contains(const Vector& v, const ToleranceConfig& tol) const {
    if (v.size() != ambient_dim())
        fail(errc::dimension_mismatch, "contains: vector dim vs ambient dim");
    check_finite(v, "vector");
    if (v.size() == 0) return true;
    const double resid = (v - proj_ * v).norm();
    return resid <= tol.tau_eq * std::max(1.0, v.norm());
}

// ============================================================================
// Rank-revealing primitives
// ============================================================================

Index rank(const Matrix& m, const ToleranceConfig& tol, double scale_hint) {
    check_finite(m, "matrix");
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return rank_from_singular_values(svd.singularValues(), tol, scale_hint);
}

bool is_surjective(const Matrix& m, const ToleranceConfig& tol) {
    return rank(m, tol) == m.rows();
}

Subspace orthonormalize(const Matrix& spanning, const ToleranceConfig& tol,
                        double scale_hint) {
    check_finite(spanning, "spanning matrix");
    const Index n = spanning.rows();
    if (n == 0 || spanning.cols() == 0) return Subspace(Matrix(n, 0));
    auto svd = full_svd(spanning);
    const Index r = rank_from_singular_values(svd.singularValues(), tol, scale_hint);
    return Subspace(canonical_basis(svd.matrixU().leftCols(r)));
}

Subspace orthogonal_complement(const Subspace& d) {
    const Index n = d.ambient_dim();
    if (d.dim() == 0) return Subspace::full(n);
    if (d.dim() == n) return Subspace::zero(n);
    // Null space of basis^T: its singular values are all ~1 by the stored
    // invariant, so no rank decision is involved.
    auto svd = full_svd(d.basis().transpose());
    Matrix comp = svd.matrixV().rightCols(n - d.dim());
    return Subspace::from_orthonormal(comp);
}

Subspace subspace_sum(const Subspace& a, const Subspace& b, const ToleranceConfig& tol) {
    check_same_ambient(a, b, "subspace_sum");
    Matrix joined(a.ambient_dim(), a.dim() + b.dim());
    joined << a.basis(), b.basis();
    return orthonormalize(joined, tol);
}

Subspace subspace_product(const Subspace& a, const Subspace& b) {
    Matrix basis = Matrix::Zero(a.ambient_dim() + b.ambient_dim(), a.dim() + b.dim());
    basis.topLeftCorner(a.ambient_dim(), a.dim()) = a.basis();
    basis.bottomRightCorner(b.ambient_dim(), b.dim()) = b.basis();
    return Subspace::from_orthonormal(basis);
}

Subspace subspace_intersect(const Subspace& a, const Subspace& b,
                            const ToleranceConfig& tol) {
    check_same_ambient(a, b, "subspace_intersect");
    return orthogonal_complement(
        subspace_sum(orthogonal_complement(a), orthogonal_complement(b), tol));
}

Subspace image(const Matrix& m, const Subspace& d, const ToleranceConfig& tol) {
    check_finite(m, "matrix");
    if (m.cols() != d.ambient_dim())
        fail(errc::dimension_mismatch, "image: matrix cols vs ambient dim");
    // Scale hint: the product's roundoff residue lives at sigma_max(m) * 1.
    double hint = 0.0;
    if (m.rows() > 0 && m.cols() > 0) hint = Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
    return orthonormalize(m * d.basis(), tol, hint);
}

Subspace image(const Matrix& m, const ToleranceConfig& tol) {
    check_finite(m, "matrix");
    return orthonormalize(m, tol);
}

Subspace kernel(const Matrix& m, const ToleranceConfig& tol) {
    check_finite(m, "matrix");
    const Index n = m.cols();
    if (n == 0) return Subspace::zero(0);
    if (m.rows() == 0) return Subspace::full(n);
    auto svd = full_svd(m);
    const Index r = rank_from_singular_values(svd.singularValues(), tol, 0.0);
    if (r == n) return Subspace::zero(n);
    return Subspace::from_orthonormal(svd.matrixV().rightCols(n - r));
}

Matrix pseudoinverse(const Matrix& m, const ToleranceConfig& tol, double scale_hint) {
    check_finite(m, "matrix");
    if (m.rows() == 0 || m.cols() == 0) return Matrix::Zero(m.cols(), m.rows());
    auto svd = full_svd(m);
    const Vector& sv = svd.singularValues();
    const Index r = rank_from_singular_values(sv, tol, scale_hint);
    Vector inv = Vector::Zero(sv.size());
    for (Index i = 0; i < r; ++i) inv(i) = 1.0 / sv(i);
    return svd.matrixV().leftCols(sv.size()) * inv.asDiagonal() *
           svd.matrixU().leftCols(sv.size()).transpose();
}

bool subspace_equal(const Subspace& a, const Subspace& b, const ToleranceConfig& tol) {
    check_same_ambient(a, b, "subspace_equal");
    if (a.ambient_dim() == 0) return true;
    return (a.projector() - b.projector()).norm() < tol.tau_eq;
}

// ============================================================================
// Pushout
// ============================================================================

PushoutCospan pushout_cospan(const Matrix& p, const Matrix& g, const ToleranceConfig& tol) {
    check_finite(p, "p");
    check_finite(g, "g");
    if (p.cols() != g.cols())
        fail(errc::dimension_mismatch, "pushout_cospan: p and g must share their domain");
    if (!is_surjective(p, tol))
        fail(errc::not_surjective, "pushout_cospan: p must have full row rank");

    const Index np = p.rows(), nq = g.rows(), ny = p.cols();
    Matrix k(np + nq, ny);
    k << p, -g;

    Matrix c; // orthonormal basis of im(k)^perp inside R^{np+nq}
    if (np + nq == 0) {
        c = Matrix(0, 0);
    } else if (ny == 0) {
        c = Matrix::Identity(np + nq, np + nq);
    } else {
        auto svd = full_svd(k);
        const Index r = rank_from_singular_values(svd.singularValues(), tol, 0.0);
        c = svd.matrixU().rightCols(np + nq - r);
    }

    PushoutCospan out;
    out.i1 = c.topRows(np).transpose();
    out.i2 = c.bottomRows(nq).transpose();
    return out;
}

} // namespace gaussex
