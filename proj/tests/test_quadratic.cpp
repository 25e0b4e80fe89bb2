#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"

#include "gaussex/quadratic.hpp"
#include "gaussex/willems.hpp"

using namespace gaussex;
using testsup::Rng;

namespace {

Vector vec1(double a) {
    return Vector::Constant(1, a);
}

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

Subspace span_e(Index n, Index axis) {
    Matrix b = Matrix::Zero(n, 1);
    b(axis, 0) = 1.0;
    return Subspace::from_orthonormal(b);
}

ExtendedGaussian random_extended(Rng& g, Index n) {
    Index d = testsup::random_dim(g, 0, n);
    Index r = testsup::random_dim(g, 0, n);
    return make_extended(testsup::random_grid_vector(g, n), testsup::random_psd(g, n, r),
                         testsup::random_subspace(g, n, d));
}

// State whose covariance is supported exactly on fibre^perp with a
// grid-protected spectrum (eigenvalues of G G^T exactly).  Precision-route
// comparisons invert the covariance on its support, so this keeps the
// information form's dynamic range away from the rank cutoffs.
ExtendedGaussian conditioned_extended(Rng& g, Index n, const Subspace& fibre,
                                      bool full_support_rank = false) {
    const Matrix u = orthogonal_complement(fibre).basis();
    const Index k = u.cols();
    const Index r = full_support_rank ? k : testsup::random_dim(g, 0, k);
    Matrix gram = testsup::random_psd(g, k, r);
    if (full_support_rank) gram += Matrix::Identity(k, k);
    return make_extended(testsup::random_grid_vector(g, n), u * gram * u.transpose(), fibre);
}

PartialQuadratic random_form(Rng& g, Index n) {
    const Index d = testsup::random_dim(g, 0, n);
    const Index r = testsup::random_dim(g, 0, n);
    std::uniform_real_distribution<double> off(-2.0, 2.0);
    return make_partial_quadratic(testsup::random_psd(g, n, r), testsup::random_grid_vector(g, n),
                                  off(g), testsup::random_subspace(g, n, d),
                                  testsup::random_grid_vector(g, n));
}

// (V, I) resistor state: V = R I + eps, eps ~ N(0, 1/16), R = 1/2.
ExtendedGaussian resistor_state() {
    Matrix q(1, 2);
    q << 1.0, -0.5;
    return from_kernel_rep({q, make_gaussian(Vector::Zero(1), Matrix::Constant(1, 1, 0.0625))});
}

// {V = 1}: first coordinate pinned, second free.
ExtendedGaussian pin_v(double v0) {
    return make_extended(vec2(v0, 0.0), Matrix::Zero(2, 2), span_e(2, 1));
}

} // namespace

TEST_CASE("make_partial_quadratic: canonicalization") {
    // Raw fields anchored at a point with a component inside the domain;
    // canonical fields must evaluate to the same values on the line x1 = 2.
    Matrix a(2, 2);
    a << 1.0, 1.0, 1.0, 2.0;
    const Subspace s = span_e(2, 1);
    const PartialQuadratic f =
        make_partial_quadratic(a, vec2(1.0, 1.0), 2.0, s, vec2(2.0, 3.0));

    CHECK((f.anchor - vec2(2.0, 0.0)).norm() < 1e-12);
    Matrix ac(2, 2);
    ac << 0.0, 0.0, 0.0, 2.0;
    CHECK((f.a - ac).norm() < 1e-12);
    CHECK((f.lin - vec2(0.0, 3.0)).norm() < 1e-12);
    CHECK(f.offset == doctest::Approx(6.0).epsilon(1e-12));

    // f(2, t) = t^2 + 3t + 6 by direct expansion of the raw fields
    const PqValue at = value_of(f, vec2(2.0, 1.5));
    CHECK(at.finite);
    CHECK(at.value == doctest::Approx(1.5 * 1.5 + 3 * 1.5 + 6.0).epsilon(1e-12));
    CHECK_FALSE(value_of(f, vec2(2.1, 0.0)).finite);

    // anchor points of the same affine line give the identical canonical form
    const PartialQuadratic g =
        make_partial_quadratic(a, vec2(1.0, 1.0), 2.0, s, vec2(2.0, -7.5));
    CHECK(pq_equal(f, g));

    // canonical fields pass through unchanged
    const PartialQuadratic h = make_partial_quadratic(f.a, f.lin, f.offset, f.domain, f.anchor);
    CHECK((h.a - f.a).norm() < 1e-12);
    CHECK((h.lin - f.lin).norm() < 1e-12);
    CHECK(h.offset == doctest::Approx(f.offset).epsilon(1e-12));
    CHECK((h.anchor - f.anchor).norm() < 1e-12);
}

TEST_CASE("make_partial_quadratic: validation") {
    Matrix skew(2, 2);
    skew << 1.0, 1.0, -1.0, 1.0;
    CHECK_THROWS_AS(make_partial_quadratic(skew, Vector::Zero(2), 0.0, Subspace::full(2),
                                           Vector::Zero(2)),
                    Error);
    CHECK_THROWS_AS(make_partial_quadratic(-Matrix::Identity(2, 2), Vector::Zero(2), 0.0,
                                           Subspace::full(2), Vector::Zero(2)),
                    Error);
    CHECK_THROWS_AS(make_partial_quadratic(Matrix::Identity(2, 2), Vector::Zero(3), 0.0,
                                           Subspace::full(2), Vector::Zero(2)),
                    Error);
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(make_partial_quadratic(bad, Vector::Zero(2), 0.0, Subspace::full(2),
                                           Vector::Zero(2)),
                    Error);
    CHECK_THROWS_AS(make_partial_quadratic(Matrix::Zero(2, 2), Vector::Zero(2),
                                           std::numeric_limits<double>::infinity(),
                                           Subspace::full(2), Vector::Zero(2)),
                    Error);

    // n = 0: the empty form evaluates to its offset at the empty point
    const PartialQuadratic empty = pq_zero(0);
    const PqValue v = value_of(empty, Vector(0));
    CHECK(v.finite);
    CHECK(v.value == 0.0);
}

TEST_CASE("precision_form / covariance_form: frozen examples") {
    // standard normal: both forms are x^2/2 on R, so they coincide
    const ExtendedGaussian std1 = from_gaussian(standard_gaussian(1));
    const PartialQuadratic fp = precision_form(std1);
    const PartialQuadratic fc = covariance_form(std1);
    CHECK(pq_equal(fp, fc));
    CHECK(fp.a(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fp.domain.dim() == 1);
    CHECK(value_of(fp, vec1(3.0)).value == doctest::Approx(4.5).epsilon(1e-12));

    // uninformative on R: precision form is the zero form, covariance form
    // the indicator of the origin
    const ExtendedGaussian uninf = ext_uninformative(1);
    CHECK(pq_equal(precision_form(uninf), pq_zero(1)));
    const PartialQuadratic uc = covariance_form(uninf);
    CHECK(uc.domain.dim() == 0);
    CHECK(value_of(uc, vec1(0.0)).finite);
    CHECK_FALSE(value_of(uc, vec1(0.5)).finite);

    // point mass at 3: precision form is the indicator of {3}, covariance
    // form the linear functional y -> 3y
    const ExtendedGaussian delta = ext_point_mass(vec1(3.0));
    const PartialQuadratic dp = precision_form(delta);
    CHECK(dp.domain.dim() == 0);
    CHECK(dp.anchor(0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(value_of(dp, vec1(3.0)).value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(value_of(dp, vec1(2.9)).finite);
    const PartialQuadratic dc = covariance_form(delta);
    CHECK(dc.domain.dim() == 1);
    CHECK(value_of(dc, vec1(2.0)).value == doctest::Approx(6.0).epsilon(1e-12));

    // resistor state: inverting [[0.04, -0.02], [-0.02, 0.01]] on its image
    // and adding nothing on the fibre gives the full-plane quadratic below
    const PartialQuadratic rp = precision_form(resistor_state());
    Matrix prec(2, 2);
    prec << 16.0, -8.0, -8.0, 4.0;
    CHECK((rp.a - prec).norm() < 1e-8);
    CHECK(rp.domain.dim() == 2);
    CHECK(rp.lin.norm() < 1e-12);
    CHECK(std::abs(rp.offset) < 1e-12);
}

TEST_CASE("legendre_conjugate: frozen examples") {
    // x^2/2 on R is self-dual
    const PartialQuadratic half_sq =
        make_partial_quadratic(Matrix::Identity(1, 1), Vector::Zero(1), 0.0, Subspace::full(1),
                               Vector::Zero(1));
    CHECK(pq_equal(legendre_conjugate(half_sq), half_sq));

    // f(x) = x1^2 on R^2: conjugate lives on the x1-axis with value y1^2/4
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 2.0;
    const PartialQuadratic f =
        make_partial_quadratic(a, Vector::Zero(2), 0.0, Subspace::full(2), Vector::Zero(2));
    const PartialQuadratic fs = legendre_conjugate(f);
    CHECK(fs.domain.dim() == 1);
    const PqValue at = value_of(fs, vec2(3.0, 0.0));
    CHECK(at.finite);
    CHECK(at.value == doctest::Approx(2.25).epsilon(1e-10));
    CHECK_FALSE(value_of(fs, vec2(3.0, 1.0)).finite);
    CHECK(pq_equal(legendre_conjugate(fs), f));

    // zero form on R^2 <-> indicator of the origin
    const PartialQuadratic zstar = legendre_conjugate(pq_zero(2));
    CHECK(zstar.domain.dim() == 0);
    CHECK(zstar.anchor.norm() < 1e-12);
    CHECK(pq_equal(legendre_conjugate(zstar), pq_zero(2)));

    // indicator of {5} on R <-> the linear functional y -> 5y
    const PartialQuadratic point =
        make_partial_quadratic(Matrix::Zero(1, 1), Vector::Zero(1), 0.0, Subspace::zero(1),
                               vec1(5.0));
    const PartialQuadratic lin5 = legendre_conjugate(point);
    CHECK(pq_equal(lin5, make_partial_quadratic(Matrix::Zero(1, 1), vec1(5.0), 0.0,
                                                Subspace::full(1), Vector::Zero(1))));
    CHECK(pq_equal(legendre_conjugate(lin5), point));
}

TEST_CASE("legendre_conjugate: involution on random forms") {
    Rng g(703);
    for (int it = 0; it < 300; ++it) {
        const Index n = testsup::random_dim(g, 0, 5);
        const PartialQuadratic f = random_form(g, n);
        const PartialQuadratic ff = legendre_conjugate(legendre_conjugate(f));
        CHECK(pq_equal(ff, f));
    }
}

TEST_CASE("legendre_conjugate: numeric supremum agreement") {
    // The closed form must match a direct maximization of y'x - f(x) over the
    // affine domain, computed here from scratch with a least-squares solve.
    Rng g(704);
    std::uniform_real_distribution<double> coef(-1.5, 1.5);
    int evaluated = 0;
    for (int it = 0; it < 40; ++it) {
        const Index n = testsup::random_dim(g, 1, 4);
        const PartialQuadratic f = random_form(g, n);
        const PartialQuadratic fs = legendre_conjugate(f);
        const Matrix b = f.domain.basis();
        const Matrix h = b.transpose() * f.a * b;
        const Matrix hp = pseudoinverse(h);
        for (int k = 0; k < 50; ++k) {
            Vector y = fs.anchor;
            for (Index j = 0; j < fs.domain.dim(); ++j)
                y += coef(g) * fs.domain.basis().col(j);
            const Vector s = hp * (b.transpose() * (y - f.lin));
            const Vector x = f.anchor + b * s;
            const double sup = y.dot(x) - value_of(f, x).value;
            const PqValue closed = value_of(fs, y);
            REQUIRE(closed.finite);
            CHECK(std::abs(closed.value - sup) < 1e-6);
            ++evaluated;
        }
    }
    CHECK(evaluated == 40 * 50);
}

TEST_CASE("duality tables on random states") {
    // domain(f_p) = im Sigma + D     kernel(f_p) = D
    // domain(f_c) = D^perp           kernel(f_c) = (im Sigma + D)^perp
    // and conjugation swaps the two forms.
    Rng g(705);
    for (int it = 0; it < 300; ++it) {
        const Index n = testsup::random_dim(g, 0, 4);
        const ExtendedGaussian chi = random_extended(g, n);
        const PartialQuadratic fp = precision_form(chi);
        const PartialQuadratic fc = covariance_form(chi);
        const Subspace support = subspace_sum(image(chi.cov), chi.fibre);

        CHECK(subspace_equal(fp.domain, support));
        CHECK(subspace_equal(form_kernel(fp), chi.fibre));
        CHECK(subspace_equal(fc.domain, orthogonal_complement(chi.fibre)));
        CHECK(subspace_equal(form_kernel(fc), orthogonal_complement(support)));

        CHECK(pq_equal(legendre_conjugate(fc), fp));
        CHECK(pq_equal(legendre_conjugate(fp), fc));
    }
}

TEST_CASE("add: unit, examples, infeasibility") {
    Rng g(706);

    // pq_zero is the unit
    for (int it = 0; it < 50; ++it) {
        const Index n = testsup::random_dim(g, 0, 4);
        const PartialQuadratic f = random_form(g, n);
        CHECK(pq_equal(add(f, pq_zero(n)), f));
        CHECK(pq_equal(add(pq_zero(n), f), f));
    }

    // x^2/2 + x^2/2 = x^2
    const PartialQuadratic half_sq =
        make_partial_quadratic(Matrix::Identity(1, 1), Vector::Zero(1), 0.0, Subspace::full(1),
                               Vector::Zero(1));
    const PartialQuadratic sq =
        make_partial_quadratic(2.0 * Matrix::Identity(1, 1), Vector::Zero(1), 0.0,
                               Subspace::full(1), Vector::Zero(1));
    CHECK(pq_equal(add(half_sq, half_sq), sq));

    // two transverse affine lines meet in the single point (1, 2)
    const PartialQuadratic on_v1 = make_partial_quadratic(
        Matrix::Identity(2, 2).col(1) * Matrix::Identity(2, 2).row(1), Vector::Zero(2), 0.0,
        span_e(2, 1), vec2(1.0, 0.0));
    const PartialQuadratic on_i2 = make_partial_quadratic(
        Matrix::Zero(2, 2), Vector::Zero(2), 0.0, span_e(2, 0), vec2(0.0, 2.0));
    const PartialQuadratic meet = add(on_v1, on_i2);
    CHECK(meet.domain.dim() == 0);
    CHECK((meet.anchor - vec2(1.0, 2.0)).norm() < 1e-9);
    const PqValue at = value_of(meet, vec2(1.0, 2.0));
    CHECK(at.finite);
    CHECK(at.value == doctest::Approx(2.0).epsilon(1e-9)); // (1/2) * 2^2 from the first form
    CHECK_FALSE(value_of(meet, vec2(1.0, 2.5)).finite);

    // parallel disjoint domains are infeasible
    const PartialQuadratic at0 = make_partial_quadratic(Matrix::Zero(1, 1), Vector::Zero(1), 0.0,
                                                        Subspace::zero(1), vec1(0.0));
    const PartialQuadratic at1 = make_partial_quadratic(Matrix::Zero(1, 1), Vector::Zero(1), 0.0,
                                                        Subspace::zero(1), vec1(1.0));
    CHECK_THROWS_AS(add(at0, at1), Error);
    try {
        add(at0, at1);
    } catch (const Error& e) {
        CHECK(e.code() == errc::infeasible);
    }
    CHECK_THROWS_AS(add(at0, pq_zero(2)), Error);

    // commutative and associative on overlapping domains
    for (int it = 0; it < 50; ++it) {
        const Index n = testsup::random_dim(g, 1, 4);
        const PartialQuadratic f = random_form(g, n);
        PartialQuadratic h = random_form(g, n);
        // anchor h's affine domain on a point of f's so the sum is feasible
        h = make_partial_quadratic(h.a, h.lin, h.offset, h.domain, f.anchor);
        const PartialQuadratic z = random_form(g, n); // full-ambient third term
        const PartialQuadratic zf =
            make_partial_quadratic(z.a, z.lin, z.offset, Subspace::full(n), Vector::Zero(n));
        CHECK(pq_equal(add(f, h), add(h, f)));
        CHECK(pq_equal(add(add(f, h), zf), add(f, add(h, zf))));
    }
}

TEST_CASE("value_of: membership scale") {
    const PartialQuadratic f = make_partial_quadratic(
        Matrix::Zero(2, 2), Vector::Zero(2), 0.0, span_e(2, 1), vec2(4.0, 0.0));
    CHECK(value_of(f, vec2(4.0, 1e6)).finite);
    CHECK_FALSE(value_of(f, vec2(4.5, 0.0)).finite);
    CHECK_THROWS_AS(value_of(f, Vector::Zero(3)), Error);
}

TEST_CASE("from_precision round trip and additivity") {
    Rng g(707);

    // from_precision inverts precision_form
    for (int it = 0; it < 200; ++it) {
        const Index n = testsup::random_dim(g, 0, 4);
        const ExtendedGaussian chi = random_extended(g, n);
        CHECK(extended_equal(from_precision(precision_form(chi)), chi));
    }

    // covariance forms add under convolution
    for (int it = 0; it < 100; ++it) {
        const Index n = testsup::random_dim(g, 0, 4);
        const ExtendedGaussian a = random_extended(g, n);
        const ExtendedGaussian b = random_extended(g, n);
        CHECK(pq_equal(covariance_form(convolve(a, b)),
                       add(covariance_form(a), covariance_form(b))));
    }

    // Precision forms add under interconnection, up to normalization: a
    // distribution carries no constant, so reading the interconnection back
    // reproduces the summed form with its minimum shifted to zero.  The shift
    // is exactly that minimum (the log-partition constant of the product).
    for (int it = 0; it < 100; ++it) {
        const Index n = testsup::random_dim(g, 0, 4);
        const ExtendedGaussian a =
            conditioned_extended(g, n, testsup::random_subspace(g, n, testsup::random_dim(g, 0, n)));
        const ExtendedGaussian b = make_extended(
            testsup::random_grid_vector(g, n),
            testsup::random_psd(g, n, n) + Matrix::Identity(n, n), Subspace::zero(n));
        const PartialQuadratic sum = add(precision_form(a), precision_form(b));
        const PartialQuadratic back = precision_form(interconnect_precision(a, b));

        CHECK(subspace_equal(sum.domain, back.domain));
        CHECK((sum.a - back.a).norm() < 1e-8);
        CHECK((sum.lin - back.lin).norm() < 1e-8);
        CHECK((sum.anchor - back.anchor).norm() < 1e-8);

        const Vector xmin = sum.anchor - pseudoinverse(sum.a) * sum.lin;
        const PqValue low = value_of(sum, xmin);
        REQUIRE(low.finite);
        CHECK(std::abs(sum.offset - back.offset - low.value) < 1e-8);
        CHECK(std::abs(value_of(back, xmin).value) < 1e-8);
    }
}

TEST_CASE("interconnect_precision: frozen examples") {
    // N(0,1) * N(0,1) = N(0, 1/2)
    const ExtendedGaussian std1 = from_gaussian(standard_gaussian(1));
    const ExtendedGaussian half = interconnect_precision(std1, std1);
    CHECK(half.fibre.dim() == 0);
    CHECK(std::abs(half.mean(0)) < 1e-10);
    CHECK(std::abs(half.cov(0, 0) - 0.5) < 1e-10);

    // the uninformative state is the unit
    Rng g(708);
    for (int it = 0; it < 50; ++it) {
        const Index n = testsup::random_dim(g, 0, 4);
        const ExtendedGaussian chi = random_extended(g, n);
        CHECK(extended_equal(interconnect_precision(chi, ext_uninformative(n)), chi));
        CHECK(extended_equal(interconnect_precision(ext_uninformative(n), chi), chi));
    }

    // a point mass absorbs compatible evidence
    const ExtendedGaussian delta0 = ext_point_mass(Vector::Zero(1));
    CHECK(extended_equal(interconnect_precision(delta0, std1), delta0));

    // resistor state against the pin {V = 1}: I ~ N(2, 1/4) with V exact
    const ExtendedGaussian joined = interconnect_precision(resistor_state(), pin_v(1.0));
    CHECK(joined.fibre.dim() == 0);
    CHECK((joined.mean - vec2(1.0, 2.0)).norm() < 1e-10);
    Matrix cov4(2, 2);
    cov4 << 0.0, 0.0, 0.0, 0.25;
    CHECK((joined.cov - cov4).norm() < 1e-10);

    // matches the behavioral interconnection exactly
    const GaussianSystem direct =
        interconnect(GaussianSystem{resistor_state()}, GaussianSystem{pin_v(1.0)});
    CHECK(extended_equal(direct.chi, joined));

    // contradictory points are infeasible; mismatched spaces are rejected
    CHECK_THROWS_AS(interconnect_precision(delta0, ext_point_mass(vec1(1.0))), Error);
    CHECK_THROWS_AS(interconnect_precision(delta0, ext_uninformative(2)), Error);
}

TEST_CASE("interconnect_precision: product-density law on closed states") {
    // For invertible covariances the result must match the textbook
    // information-filter update, computed here with plain inverses.
    Rng g(709);
    for (int it = 0; it < 50; ++it) {
        const Index n = testsup::random_dim(g, 1, 4);
        const Matrix s1 = testsup::random_psd(g, n, n) + Matrix::Identity(n, n);
        const Matrix s2 = testsup::random_psd(g, n, n) + Matrix::Identity(n, n);
        const Vector m1 = testsup::random_grid_vector(g, n);
        const Vector m2 = testsup::random_grid_vector(g, n);
        const ExtendedGaussian chi1 = make_extended(m1, s1, Subspace::zero(n));
        const ExtendedGaussian chi2 = make_extended(m2, s2, Subspace::zero(n));

        const Matrix prec = s1.inverse() + s2.inverse();
        const Matrix sp = prec.inverse();
        const Vector mp = sp * (s1.inverse() * m1 + s2.inverse() * m2);

        const ExtendedGaussian out = interconnect_precision(chi1, chi2);
        CHECK(out.fibre.dim() == 0);
        CHECK((out.mean - mp).norm() < 1e-8);
        CHECK((out.cov - sp).norm() < 1e-8);
    }
}

TEST_CASE("interconnect_precision: agrees with behavioral interconnection") {
    // Complementary pairs built from an invertible grid matrix; on them the
    // precision route must reproduce interconnect exactly.
    Rng g(710);
    int done = 0;
    while (done < 100) {
        const Index n = testsup::random_dim(g, 1, 4);
        const Matrix t = testsup::random_grid_matrix(g, n, n);
        if (rank(t) < n) continue;
        const Index d1 = testsup::random_dim(g, 0, n);
        const Index d2 = testsup::random_dim(g, n - d1, n);
        const Subspace f1 = orthonormalize(t.leftCols(d1));
        const Subspace f2 = orthonormalize(t.rightCols(d2));
        const ExtendedGaussian chi1 = conditioned_extended(g, n, f1, true);
        const ExtendedGaussian chi2 = conditioned_extended(g, n, f2, true);
        REQUIRE(is_complementary(GaussianSystem{chi1}, GaussianSystem{chi2}));

        const ExtendedGaussian behavioral =
            interconnect(GaussianSystem{chi1}, GaussianSystem{chi2}).chi;
        const ExtendedGaussian quad = interconnect_precision(chi1, chi2);
        CHECK(extended_equal(quad, behavioral));
        ++done;
    }
}
