#include "gaussex/category.hpp"

#include <algorithm>

namespace gaussex {

GaussExMorphism make_gaussex(const Matrix& m, const ExtendedGaussian& noise,
                             const ToleranceConfig& tol) {
    check_finite(m, "morphism matrix");
    if (m.rows() != noise.dim())
        fail(errc::dimension_mismatch, "make_gaussex: matrix rows vs noise dim");
    const Index n = m.rows();
    Matrix canon = m;
    if (n > 0 && noise.fibre.dim() > 0)
        canon = (Matrix::Identity(n, n) - noise.fibre.projector()) * m;
    (void)tol;
    return GaussExMorphism{std::move(canon), noise};
}

bool gaussex_equal(const GaussExMorphism& a, const GaussExMorphism& b,
                   const ToleranceConfig& tol) {
    if (a.dom() != b.dom() || a.cod() != b.cod())
        fail(errc::dimension_mismatch, "gaussex_equal: shapes differ");
    if (!extended_equal(a.noise, b.noise, tol)) return false;
    return (a.m - b.m).norm() < tol.tau_eq;
}

GaussExMorphism compose(const GaussExMorphism& g2, const GaussExMorphism& g1,
                        const ToleranceConfig& tol) {
    if (g1.cod() != g2.dom())
        fail(errc::dimension_mismatch, "compose: middle dimensions differ");
    ExtendedGaussian noise =
        convolve(pushforward(g2.m, g1.noise, tol), g2.noise, tol);
    return make_gaussex(g2.m * g1.m, noise, tol);
}

GaussExMorphism tensor(const GaussExMorphism& a, const GaussExMorphism& b,
                       const ToleranceConfig& tol) {
    Matrix block = Matrix::Zero(a.cod() + b.cod(), a.dom() + b.dom());
    block.topLeftCorner(a.cod(), a.dom()) = a.m;
    block.bottomRightCorner(b.cod(), b.dom()) = b.m;
    return make_gaussex(block, tensor(a.noise, b.noise), tol);
}

GaussExMorphism apply_to_state(const GaussExMorphism& f, const ExtendedGaussian& state,
                               const ToleranceConfig& tol) {
    return compose(f, gx_state(state), tol);
}

GaussExMorphism gx_identity(Index n) { return gx_matrix(Matrix::Identity(n, n)); }

GaussExMorphism gx_matrix(const Matrix& m) {
    return GaussExMorphism{m, ext_point_mass(Vector::Zero(m.rows()))};
}

GaussExMorphism gx_scalar(double c) { return gx_matrix(Matrix::Constant(1, 1, c)); }

GaussExMorphism gx_copy(Index n) {
    Matrix m(2 * n, n);
    m << Matrix::Identity(n, n), Matrix::Identity(n, n);
    return gx_matrix(m);
}

GaussExMorphism gx_discard(Index n) { return gx_matrix(Matrix::Zero(0, n)); }

GaussExMorphism gx_swap(Index a, Index b) {
    Matrix m = Matrix::Zero(a + b, a + b);
    m.topRightCorner(b, b) = Matrix::Identity(b, b);
    m.bottomLeftCorner(a, a) = Matrix::Identity(a, a);
    return gx_matrix(m);
}

GaussExMorphism gx_add(Index n) {
    Matrix m(n, 2 * n);
    m << Matrix::Identity(n, n), Matrix::Identity(n, n);
    return gx_matrix(m);
}

GaussExMorphism gx_zero(Index n) { return gx_state(ext_point_mass(Vector::Zero(n))); }

GaussExMorphism gx_uninformative(Index n) { return gx_state(ext_uninformative(n)); }

GaussExMorphism gx_state(const ExtendedGaussian& chi) {
    return GaussExMorphism{Matrix::Zero(chi.dim(), 0), chi};
}

GaussExMorphism embed_gauss(const GaussMorphism& g) {
    return GaussExMorphism{g.m, from_gaussian(g.noise)};
}

GaussExMorphism embed_linrel(const TotalLinRel& rel) {
    // the relation's fibre becomes pure nondeterministic noise
    return GaussExMorphism{
        rel.m, ExtendedGaussian{rel.fibre, Vector::Zero(rel.cod()), Matrix::Zero(rel.cod(), rel.cod())}};
}

GaussExMorphism marginal(const GaussExMorphism& state, const std::vector<Index>& coords,
                         const ToleranceConfig& tol) {
    if (state.dom() != 0)
        fail(errc::dimension_mismatch, "marginal: expected a state (dom 0)");
    const Index n = state.cod();
    Matrix sel = Matrix::Zero(static_cast<Index>(coords.size()), n);
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const Index c = coords[i];
        if (c < 0 || c >= n) fail(errc::bad_index, "marginal: coordinate out of range");
        if (std::count(coords.begin(), coords.end(), c) > 1)
            fail(errc::bad_index, "marginal: repeated coordinate");
        sel(static_cast<Index>(i), c) = 1.0;
    }
    return compose(gx_matrix(sel), state, tol);
}

GaussExMorphism name_of(const GaussExMorphism& f, const ToleranceConfig& tol) {
    const Index m = f.dom();
    GaussExMorphism shared = compose(gx_copy(m), gx_uninformative(m), tol);
    return compose(tensor(gx_identity(m), f, tol), shared, tol);
}

bool is_deterministic(const GaussExMorphism& f, const ToleranceConfig& tol) {
    return f.noise.fibre.dim() == 0 && f.noise.cov.norm() < tol.tau_eq;
}

GaussExMorphism conditional(const GaussExMorphism& f, Index x_dim,
                            const ToleranceConfig& tol) {
    if (x_dim < 0 || x_dim > f.cod())
        fail(errc::dimension_mismatch, "conditional: split exceeds codomain");
    const Index a = f.dom();
    const Index y_dim = f.cod() - x_dim;

    // Kernel presentation q*(x, y) = f_a*input + w, w ~ psi on the apex R^k.
    const KernelRep rep = to_kernel_rep(f.noise, tol);
    const Index k = rep.q.rows();
    const Matrix fa = rep.q * f.m;
    const Matrix qx = rep.q.leftCols(x_dim);
    const Matrix qy = rep.q.rightCols(y_dim);

    // Observing (input, x) pins w exactly on the part of the apex not
    // reachable through y: L*w = L*(qx*x - fa*input).
    const Matrix l = orthogonal_complement(image(qy, tol)).basis().transpose();
    const Matrix sigma = rep.psi.cov;
    Matrix gain = Matrix::Zero(k, l.rows());
    if (l.rows() > 0 && k > 0) {
        const Matrix s = l * sigma * l.transpose();
        // s is a product that can cancel exactly; keep its roundoff residue
        // below the pseudoinverse cutoff
        const double lmax = Eigen::JacobiSVD<Matrix>(l).singularValues()(0);
        const double smax =
            sigma.size() > 0 ? Eigen::JacobiSVD<Matrix>(sigma).singularValues()(0) : 0.0;
        gain = sigma * l.transpose() *
               pseudoinverse(0.5 * (s + s.transpose()), tol, lmax * lmax * smax);
    }
    const Matrix post = Matrix::Identity(k, k) - gain * l;
    Matrix cov = sigma - gain * l * sigma;
    cov = 0.5 * (cov + cov.transpose());

    // Solve q_y*y = (the conditioned right-hand side) for y.
    const Matrix qyp = pseudoinverse(qy, tol);
    const Matrix lift = qyp * post;
    Matrix mc(y_dim, a + x_dim);
    mc << lift * fa, -(lift * qx);
    const ExtendedGaussian noise = make_extended(
        lift * rep.psi.mean, qyp * cov * qyp.transpose(), kernel(qy, tol), tol);
    return make_gaussex(mc, noise, tol);
}

DecoratedCospan to_cospan(const GaussExMorphism& g, const ToleranceConfig& tol) {
    const KernelRep rep = to_kernel_rep(g.noise, tol);
    return DecoratedCospan{rep.q * g.m, rep.psi, rep.q};
}

GaussExMorphism from_cospan(const DecoratedCospan& c, const ToleranceConfig& tol) {
    if (!is_surjective(c.q, tol))
        fail(errc::not_surjective, "from_cospan: right leg is not surjective");
    if (c.psi.dim() != c.apex_dim())
        fail(errc::dimension_mismatch, "from_cospan: decoration lives off the apex");
    const Matrix s = pseudoinverse(c.q, tol);
    const ExtendedGaussian noise =
        make_extended(s * c.psi.mean, s * c.psi.cov * s.transpose(), kernel(c.q, tol), tol);
    return make_gaussex(s * c.f, noise, tol);
}

DecoratedCospan compose_cospan(const DecoratedCospan& c2, const DecoratedCospan& c1,
                               const ToleranceConfig& tol) {
    if (c1.cod() != c2.dom())
        fail(errc::dimension_mismatch, "compose_cospan: middle dimensions differ");
    if (!is_surjective(c1.q, tol))
        fail(errc::not_surjective, "compose_cospan: right leg is not surjective");
    const PushoutCospan glue = pushout_cospan(c1.q, c2.f, tol);
    GaussianDist xi = convolve(pushforward(glue.i1, c1.psi), pushforward(glue.i2, c2.psi));
    return DecoratedCospan{glue.i1 * c1.f, std::move(xi), glue.i2 * c2.q};
}

} // namespace gaussex
