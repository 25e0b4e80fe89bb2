#include "gaussex/linrel.hpp"

namespace gaussex {

TotalLinRel make_relation(const Matrix& m, const Subspace& fibre,
                          const ToleranceConfig& tol) {
    check_finite(m, "relation matrix");
    if (m.rows() != fibre.ambient_dim())
        fail(errc::dimension_mismatch, "make_relation: matrix rows vs fibre ambient");
    const Index n = m.rows();
    Matrix canon = m;
    if (n > 0 && fibre.dim() > 0)
        canon = (Matrix::Identity(n, n) - fibre.projector()) * m;
    (void)tol;
    return TotalLinRel{std::move(canon), fibre};
}

TotalLinRel rel_graph(const Matrix& m) {
    check_finite(m, "relation matrix");
    return TotalLinRel{m, Subspace::zero(m.rows())};
}

TotalLinRel rel_identity(Index n) { return rel_graph(Matrix::Identity(n, n)); }

TotalLinRel rel_state(const Subspace& d) {
    return TotalLinRel{Matrix::Zero(d.ambient_dim(), 0), d};
}

TotalLinRel rel_uninformative(Index n) { return rel_state(Subspace::full(n)); }

bool relation_equal(const TotalLinRel& a, const TotalLinRel& b,
                    const ToleranceConfig& tol) {
    if (a.dom() != b.dom() || a.cod() != b.cod())
        fail(errc::dimension_mismatch, "relation_equal: shapes differ");
    if (!subspace_equal(a.fibre, b.fibre, tol)) return false;
    return (a.m - b.m).norm() < tol.tau_eq;
}

bool rel_contains(const TotalLinRel& rel, const Vector& x, const Vector& y,
                  const ToleranceConfig& tol) {
    if (x.size() != rel.dom() || y.size() != rel.cod())
        fail(errc::dimension_mismatch, "rel_contains: point shapes");
    check_finite(x, "x");
    check_finite(y, "y");
    if (rel.cod() == 0) return true;
    Vector resid = y - rel.m * x;
    if (rel.fibre.dim() > 0) resid -= rel.fibre.projector() * resid;
    const double scale = std::max({1.0, x.norm(), y.norm()});
    return resid.norm() <= tol.tau_eq * scale;
}

bool is_cototal(const TotalLinRel& rel, const ToleranceConfig& tol) {
    return subspace_sum(image(rel.m, tol), rel.fibre, tol).dim() == rel.cod();
}

TotalLinRel relation_from_pairs(const Matrix& xs, const Matrix& ys,
                                const ToleranceConfig& tol) {
    check_finite(xs, "xs");
    check_finite(ys, "ys");
    if (xs.cols() != ys.cols())
        fail(errc::dimension_mismatch, "relation_from_pairs: pair counts differ");
    const Index m = xs.rows();
    if (rank(xs, tol) != m)
        fail(errc::not_total, "relation_from_pairs: x-components do not span the domain");
    // Pairs with x = 0 contribute pure nondeterminism; any lift of x covers
    // the rest.
    const Subspace xker = kernel(xs, tol);
    double hint = 0.0;
    if (ys.size() > 0) hint = Eigen::JacobiSVD<Matrix>(ys).singularValues()(0);
    const Subspace d = orthonormalize(ys * xker.basis(), tol, hint);
    return make_relation(ys * pseudoinverse(xs, tol), d, tol);
}

TotalLinRel compose(const TotalLinRel& first, const TotalLinRel& second,
                    const ToleranceConfig& tol) {
    if (first.cod() != second.dom())
        fail(errc::dimension_mismatch, "compose: middle dimensions differ");
    const Subspace f = subspace_sum(image(second.m, first.fibre, tol), second.fibre, tol);
    return make_relation(second.m * first.m, f, tol);
}

TotalLinRel tensor(const TotalLinRel& a, const TotalLinRel& b,
                   const ToleranceConfig& tol) {
    Matrix block = Matrix::Zero(a.cod() + b.cod(), a.dom() + b.dom());
    block.topLeftCorner(a.cod(), a.dom()) = a.m;
    block.bottomRightCorner(b.cod(), b.dom()) = b.m;
    (void)tol;
    return TotalLinRel{std::move(block), subspace_product(a.fibre, b.fibre)};
}

CopartialMap make_copartial(const Matrix& f, const Matrix& q,
                            const ToleranceConfig& tol) {
    check_finite(f, "f");
    check_finite(q, "q");
    if (f.rows() != q.rows())
        fail(errc::dimension_mismatch, "make_copartial: legs land in different spaces");
    if (!is_surjective(q, tol))
        fail(errc::not_surjective, "make_copartial: right leg is not surjective");
    return CopartialMap{f, q};
}

CopartialMap to_cospan(const TotalLinRel& rel, const ToleranceConfig& tol) {
    (void)tol;
    const Matrix q = orthogonal_complement(rel.fibre).basis().transpose();
    return CopartialMap{q * rel.m, q};
}

TotalLinRel from_cospan(const CopartialMap& c, const ToleranceConfig& tol) {
    if (!is_surjective(c.q, tol))
        fail(errc::not_surjective, "from_cospan: right leg is not surjective");
    const Matrix s = pseudoinverse(c.q, tol);
    return make_relation(s * c.f, kernel(c.q, tol), tol);
}

CopartialMap compose_cospan(const CopartialMap& first, const CopartialMap& second,
                            const ToleranceConfig& tol) {
    if (first.cod() != second.dom())
        fail(errc::dimension_mismatch, "compose_cospan: middle dimensions differ");
    const PushoutCospan glue = pushout_cospan(first.q, second.f, tol);
    // The pushout of a surjection is a surjection, so the composite right
    // leg stays a valid kernel quotient.
    return CopartialMap{glue.i1 * first.f, glue.i2 * second.q};
}

} // namespace gaussex
