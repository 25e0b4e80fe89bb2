#include "gaussex/gauss.hpp"

namespace gaussex {

GaussianDist make_gaussian(Vector mean, Matrix cov) {
    check_finite(mean, "mean");
    check_finite(cov, "cov");
    const Index n = mean.size();
    if (cov.rows() != n || cov.cols() != n)
        fail(errc::dimension_mismatch, "make_gaussian: cov must be dim x dim");

    if (n > 0) {
        cov = 0.5 * (cov + cov.transpose().eval());
        Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
        if (es.info() != Eigen::Success)
            fail(errc::internal_inconsistency, "eigendecomposition failed");
        const double lo = es.eigenvalues().minCoeff();
        if (lo < -kPsdSlack)
            fail(errc::not_psd,
                 "covariance has eigenvalue " + std::to_string(lo));
        if (lo < 0.0) {
            // clamp roundoff negatives; leaves exactly-PSD input untouched
            Vector lam = es.eigenvalues().cwiseMax(0.0);
            cov = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
            cov = 0.5 * (cov + cov.transpose().eval());
        }
    }
    return GaussianDist{std::move(mean), std::move(cov)};
}

GaussianDist standard_gaussian(Index n) {
    return GaussianDist{Vector::Zero(n), Matrix::Identity(n, n)};
}

GaussianDist point_mass(Vector mean) {
    const Index n = mean.size();
    return make_gaussian(std::move(mean), Matrix::Zero(n, n));
}

bool gaussian_equal(const GaussianDist& a, const GaussianDist& b,
                    const ToleranceConfig& tol) {
    if (a.dim() != b.dim())
        fail(errc::dimension_mismatch, "gaussian_equal: dims differ");
    return (a.mean - b.mean).norm() < tol.tau_eq && (a.cov - b.cov).norm() < tol.tau_eq;
}

GaussianDist pushforward(const Matrix& m, const GaussianDist& psi) {
    check_finite(m, "matrix");
    if (m.cols() != psi.dim())
        fail(errc::dimension_mismatch, "pushforward: matrix cols vs dist dim");
    return make_gaussian(m * psi.mean, m * psi.cov * m.transpose());
}

GaussianDist tensor(const GaussianDist& a, const GaussianDist& b) {
    Vector mean(a.dim() + b.dim());
    mean << a.mean, b.mean;
    Matrix cov = Matrix::Zero(a.dim() + b.dim(), a.dim() + b.dim());
    cov.topLeftCorner(a.dim(), a.dim()) = a.cov;
    cov.bottomRightCorner(b.dim(), b.dim()) = b.cov;
    return GaussianDist{std::move(mean), std::move(cov)};
}

GaussianDist convolve(const GaussianDist& a, const GaussianDist& b) {
    if (a.dim() != b.dim())
        fail(errc::dimension_mismatch, "convolve: dims differ");
    return make_gaussian(a.mean + b.mean, a.cov + b.cov);
}

ConditionResult condition_on_linear(const GaussianDist& psi, const Matrix& l,
                                    const Vector& v, const ToleranceConfig& tol) {
    check_finite(l, "observation map");
    check_finite(v, "observed value");
    if (l.cols() != psi.dim())
        fail(errc::dimension_mismatch, "condition_on_linear: map cols vs dist dim");
    if (l.rows() != v.size())
        fail(errc::dimension_mismatch, "condition_on_linear: map rows vs value dim");

    const Matrix s = l * psi.cov * l.transpose();
    // Scale hint: s is a product, so exact cancellation leaves residue at the
    // scale of |l|^2 |cov| that must not be inverted.
    double hint = 0.0;
    if (l.size() > 0 && psi.dim() > 0) {
        const double l2 = Eigen::JacobiSVD<Matrix>(l).singularValues()(0);
        hint = l2 * l2 * Eigen::JacobiSVD<Matrix>(psi.cov).singularValues()(0);
    }
    const Matrix sp = pseudoinverse(0.5 * (s + s.transpose()), tol, hint);
    const Matrix gain = psi.cov * l.transpose() * sp;
    const Vector resid = v - l * psi.mean;

    ConditionResult out;
    out.dist = make_gaussian(psi.mean + gain * resid,
                             psi.cov - gain * l * psi.cov);
    if (resid.size() > 0) {
        const Vector off = resid - s * (sp * resid);
        out.off_support = off.norm() > tol.tau_eq * std::max(1.0, resid.norm());
    }
    return out;
}

GaussMorphism make_gauss_morphism(Matrix m, GaussianDist noise) {
    check_finite(m, "matrix");
    if (m.rows() != noise.dim())
        fail(errc::dimension_mismatch, "gauss morphism: matrix rows vs noise dim");
    return GaussMorphism{std::move(m), std::move(noise)};
}

GaussMorphism gauss_identity(Index n) {
    return GaussMorphism{Matrix::Identity(n, n), point_mass(Vector::Zero(n))};
}

GaussMorphism compose(const GaussMorphism& g2, const GaussMorphism& g1) {
    if (g2.dom() != g1.cod())
        fail(errc::dimension_mismatch, "compose: middle dims differ");
    return GaussMorphism{g2.m * g1.m, convolve(pushforward(g2.m, g1.noise), g2.noise)};
}

GaussMorphism tensor(const GaussMorphism& a, const GaussMorphism& b) {
    Matrix m = Matrix::Zero(a.cod() + b.cod(), a.dom() + b.dom());
    m.topLeftCorner(a.cod(), a.dom()) = a.m;
    m.bottomRightCorner(b.cod(), b.dom()) = b.m;
    return GaussMorphism{std::move(m), tensor(a.noise, b.noise)};
}

GaussianDist apply(const GaussMorphism& f, const GaussianDist& psi) {
    return convolve(pushforward(f.m, psi), f.noise);
}

bool gauss_morphism_equal(const GaussMorphism& a, const GaussMorphism& b,
                          const ToleranceConfig& tol) {
    if (a.dom() != b.dom() || a.cod() != b.cod())
        fail(errc::dimension_mismatch, "gauss_morphism_equal: shapes differ");
    return (a.m - b.m).norm() < tol.tau_eq && gaussian_equal(a.noise, b.noise, tol);
}

} // namespace gaussex
