#include "gaussex/extgauss.hpp"

namespace gaussex {

ExtendedGaussian make_extended(Vector mean, Matrix cov, Subspace fibre,
                               const ToleranceConfig& tol) {
    check_finite(mean, "mean");
    check_finite(cov, "cov");
    const Index n = fibre.ambient_dim();
    if (mean.size() != n || cov.rows() != n || cov.cols() != n)
        fail(errc::dimension_mismatch, "make_extended: mean/cov vs fibre ambient dim");

    if (fibre.dim() == 0) {
        GaussianDist g = make_gaussian(std::move(mean), std::move(cov));
        return ExtendedGaussian{std::move(fibre), std::move(g.mean), std::move(g.cov)};
    }
    const Matrix perp = Matrix::Identity(n, n) - fibre.projector();
    GaussianDist g = make_gaussian(perp * mean, perp * cov * perp);
    return ExtendedGaussian{std::move(fibre), std::move(g.mean), std::move(g.cov)};
}

ExtendedGaussian from_gaussian(GaussianDist psi) {
    GaussianDist g = make_gaussian(std::move(psi.mean), std::move(psi.cov));
    return ExtendedGaussian{Subspace::zero(g.dim()), std::move(g.mean), std::move(g.cov)};
}

ExtendedGaussian ext_point_mass(Vector mean) { return from_gaussian(point_mass(std::move(mean))); }

ExtendedGaussian ext_uninformative(Index n) {
    return ExtendedGaussian{Subspace::full(n), Vector::Zero(n), Matrix::Zero(n, n)};
}

GaussianDist gaussian_part(const ExtendedGaussian& x) { return GaussianDist{x.mean, x.cov}; }

bool extended_equal(const ExtendedGaussian& a, const ExtendedGaussian& b,
                    const ToleranceConfig& tol) {
    if (a.dim() != b.dim())
        fail(errc::dimension_mismatch, "extended_equal: ambient dims differ");
    return subspace_equal(a.fibre, b.fibre, tol) && (a.mean - b.mean).norm() < tol.tau_eq &&
           (a.cov - b.cov).norm() < tol.tau_eq;
}

ExtendedGaussian from_kernel_rep(const KernelRep& rep, const ToleranceConfig& tol) {
    check_finite(rep.q, "q");
    if (rep.q.rows() != rep.psi.dim())
        fail(errc::dimension_mismatch, "from_kernel_rep: q rows vs psi dim");
    if (!is_surjective(rep.q, tol))
        fail(errc::not_surjective, "from_kernel_rep: q must have full row rank");
    const Matrix s = pseudoinverse(rep.q, tol);
    return make_extended(s * rep.psi.mean, s * rep.psi.cov * s.transpose(),
                         kernel(rep.q, tol), tol);
}

KernelRep to_kernel_rep(const ExtendedGaussian& x, const ToleranceConfig& tol) {
    const Matrix q = orthogonal_complement(x.fibre).basis().transpose();
    return KernelRep{q, pushforward(q, gaussian_part(x))};
}

ExtendedGaussian pushforward(const Matrix& m, const ExtendedGaussian& x,
                             const ToleranceConfig& tol) {
    check_finite(m, "matrix");
    if (m.cols() != x.dim())
        fail(errc::dimension_mismatch, "pushforward: matrix cols vs state dim");
    return make_extended(m * x.mean, m * x.cov * m.transpose(), image(m, x.fibre, tol),
                         tol);
}

ExtendedGaussian tensor(const ExtendedGaussian& a, const ExtendedGaussian& b) {
    GaussianDist g = tensor(gaussian_part(a), gaussian_part(b));
    // blocks of canonicals are canonical, so no re-projection is needed
    return ExtendedGaussian{subspace_product(a.fibre, b.fibre), std::move(g.mean),
                            std::move(g.cov)};
}

ExtendedGaussian convolve(const ExtendedGaussian& a, const ExtendedGaussian& b,
                          const ToleranceConfig& tol) {
    if (a.dim() != b.dim())
        fail(errc::dimension_mismatch, "convolve: dims differ");
    return make_extended(a.mean + b.mean, a.cov + b.cov,
                         subspace_sum(a.fibre, b.fibre, tol), tol);
}

} // namespace gaussex
