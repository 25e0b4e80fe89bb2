#include "gaussex/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace gaussex {

namespace {

// Re-expands a raw quadratic (valid pointwise on the affine domain) around
// the canonical anchor a = (I - P_S) p, where p is any point of the domain:
//   f(a + s) = 1/2 s'(P A P)s + (P(Aa + lin))'s + (1/2 a'Aa + lin'a + offset)
// with P = P_S.  Because the projected fields annihilate the anchor
// component, they can then be evaluated on x directly.
PartialQuadratic canonicalize(Matrix a_raw, const Vector& lin_raw, double offset_raw,
                              const Subspace& domain, const Vector& p) {
    const Index n = domain.ambient_dim();
    const Matrix& proj = domain.projector();
    const Vector anchor = p - proj * p;

    a_raw = 0.5 * (a_raw + a_raw.transpose().eval());
    Matrix a = proj * a_raw * proj;
    a = 0.5 * (a + a.transpose().eval());
    Vector lin = proj * (a_raw * anchor + lin_raw);
    double offset = 0.5 * anchor.dot(a_raw * anchor) + lin_raw.dot(anchor) + offset_raw;

    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a);
        if (es.info() != Eigen::Success)
            fail(errc::internal_inconsistency, "eigendecomposition failed");
        const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
        const double lo = es.eigenvalues().minCoeff();
        if (lo < -kPsdSlack * scale)
            fail(errc::not_psd, "quadratic part has eigenvalue " + std::to_string(lo));
        if (lo < 0.0) {
            // clamp roundoff negatives; leaves exactly-PSD input untouched
            Vector lam = es.eigenvalues().cwiseMax(0.0);
            a = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
            a = 0.5 * (a + a.transpose().eval());
        }
    }
    return PartialQuadratic{std::move(a), std::move(lin), offset, domain, anchor};
}

} // namespace

PartialQuadratic make_partial_quadratic(const Matrix& a, const Vector& lin, double offset,
                                        const Subspace& domain, const Vector& anchor,
                                        const ToleranceConfig& tol) {
    check_finite(a, "quadratic part");
    check_finite(lin, "linear part");
    check_finite(anchor, "anchor");
    if (!std::isfinite(offset))
        fail(errc::non_finite_input, "make_partial_quadratic: offset is not finite");
    const Index n = domain.ambient_dim();
    if (a.rows() != n || a.cols() != n || lin.size() != n || anchor.size() != n)
        fail(errc::dimension_mismatch,
             "make_partial_quadratic: fields must match the domain's ambient dim");
    if ((a - a.transpose()).norm() > kPsdSlack * std::max(1.0, a.norm()))
        fail(errc::not_psd, "make_partial_quadratic: quadratic part is not symmetric");
    (void)tol;
    return canonicalize(a, lin, offset, domain, anchor);
}

PartialQuadratic pq_zero(Index n) {
    return PartialQuadratic{Matrix::Zero(n, n), Vector::Zero(n), 0.0, Subspace::full(n),
                            Vector::Zero(n)};
}

bool pq_equal(const PartialQuadratic& f, const PartialQuadratic& g,
              const ToleranceConfig& tol) {
    if (f.dim() != g.dim())
        fail(errc::dimension_mismatch, "pq_equal: dims differ");
    return subspace_equal(f.domain, g.domain, tol) && (f.a - g.a).norm() < tol.tau_eq &&
           (f.lin - g.lin).norm() < tol.tau_eq && std::abs(f.offset - g.offset) < tol.tau_eq &&
           (f.anchor - g.anchor).norm() < tol.tau_eq;
}

PqValue value_of(const PartialQuadratic& f, const Vector& x, const ToleranceConfig& tol) {
    check_finite(x, "point");
    if (x.size() != f.dim())
        fail(errc::dimension_mismatch, "value_of: point dim vs form dim");
    const Vector off_domain = x - f.domain.projector() * x - f.anchor;
    const double scale = std::max({1.0, x.norm(), f.anchor.norm()});
    if (off_domain.norm() > tol.tau_eq * scale)
        return PqValue{0.0, false};
    return PqValue{0.5 * x.dot(f.a * x) + f.lin.dot(x) + f.offset, true};
}

Subspace form_kernel(const PartialQuadratic& f, const ToleranceConfig& tol) {
    return subspace_intersect(f.domain, kernel(f.a, tol), tol);
}

PartialQuadratic precision_form(const ExtendedGaussian& chi, const ToleranceConfig& tol) {
    const Matrix prec = pseudoinverse(chi.cov, tol);
    const Subspace domain = subspace_sum(image(chi.cov, tol), chi.fibre, tol);
    // 1/2 (x-mu)' prec (x-mu), expanded around x = 0 and recentred on mu + S
    return canonicalize(prec, -(prec * chi.mean), 0.5 * chi.mean.dot(prec * chi.mean),
                        domain, chi.mean);
}

PartialQuadratic covariance_form(const ExtendedGaussian& chi, const ToleranceConfig& tol) {
    (void)tol;
    return canonicalize(chi.cov, chi.mean, 0.0, orthogonal_complement(chi.fibre),
                        Vector::Zero(chi.dim()));
}

PartialQuadratic legendre_conjugate(const PartialQuadratic& f, const ToleranceConfig& tol) {
    // sup_x [y'x - f(x)] over x in anchor + S.  Splitting x = anchor + s and
    // maximizing the concave quadratic in s gives
    //   f*(y) = 1/2 (y-lin)' pinv(A) (y-lin) + anchor'y - offset
    // finite exactly on lin + (im A + S^perp); the sup is attained, so the
    // conjugate is again a partial quadratic and conjugation is an involution.
    Matrix ap = pseudoinverse(f.a, tol);
    ap = 0.5 * (ap + ap.transpose().eval());
    const Subspace domain = subspace_sum(image(f.a, tol), orthogonal_complement(f.domain), tol);
    const Vector lin_raw = f.anchor - ap * f.lin;
    const double offset_raw = 0.5 * f.lin.dot(ap * f.lin) - f.offset;
    return canonicalize(ap, lin_raw, offset_raw, domain, f.lin);
}

PartialQuadratic add(const PartialQuadratic& f, const PartialQuadratic& g,
                     const ToleranceConfig& tol) {
    const Index n = f.dim();
    if (g.dim() != n)
        fail(errc::dimension_mismatch, "add: forms live on different spaces");

    // Intersect the affine domains: find the least-squares solution of
    // (I - P_f) x = anchor_f, (I - P_g) x = anchor_g and check it is exact.
    Matrix constraints(2 * n, n);
    constraints.topRows(n) = Matrix::Identity(n, n) - f.domain.projector();
    constraints.bottomRows(n) = Matrix::Identity(n, n) - g.domain.projector();
    Vector rhs(2 * n);
    rhs << f.anchor, g.anchor;
    const Vector x0 = pseudoinverse(constraints, tol) * rhs;
    if ((constraints * x0 - rhs).norm() > tol.tau_eq * std::max(1.0, rhs.norm()))
        fail(errc::infeasible, "add: affine domains do not intersect");

    const Subspace domain = subspace_intersect(f.domain, g.domain, tol);
    return canonicalize(f.a + g.a, f.lin + g.lin, f.offset + g.offset, domain, x0);
}

ExtendedGaussian from_precision(const PartialQuadratic& f, const ToleranceConfig& tol) {
    Matrix cov = pseudoinverse(f.a, tol);
    cov = 0.5 * (cov + cov.transpose().eval());
    const Subspace fibre = subspace_intersect(f.domain, kernel(f.a, tol), tol);
    const Vector mean = f.anchor - cov * f.lin;
    return make_extended(mean, std::move(cov), fibre, tol);
}

ExtendedGaussian interconnect_precision(const ExtendedGaussian& chi1,
                                        const ExtendedGaussian& chi2,
                                        const ToleranceConfig& tol) {
    if (chi1.dim() != chi2.dim())
        fail(errc::dimension_mismatch, "interconnect_precision: dims differ");
    return from_precision(add(precision_form(chi1, tol), precision_form(chi2, tol), tol), tol);
}

} // namespace gaussex
