#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"

#include "gaussex/linrel.hpp"

using namespace gaussex;
using testsup::Rng;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

TotalLinRel random_relation(Rng& g, Index m, Index n) {
    Index d = testsup::random_dim(g, 0, n);
    return make_relation(testsup::random_grid_matrix(g, n, m),
                         testsup::random_subspace(g, n, d));
}

TotalLinRel rel_copy(Index n) {
    Matrix m(2 * n, n);
    m << Matrix::Identity(n, n), Matrix::Identity(n, n);
    return rel_graph(m);
}

TotalLinRel rel_discard(Index n) { return rel_graph(Matrix::Zero(0, n)); }

TotalLinRel rel_swap(Index a, Index b) {
    Matrix m = Matrix::Zero(a + b, a + b);
    m.topRightCorner(b, b) = Matrix::Identity(b, b);
    m.bottomLeftCorner(a, a) = Matrix::Identity(a, a);
    return rel_graph(m);
}

void check_canonical(const TotalLinRel& r) {
    if (r.cod() == 0 || r.fibre.dim() == 0) return;
    const Matrix perp = Matrix::Identity(r.cod(), r.cod()) - r.fibre.projector();
    CHECK((r.m - perp * r.m).norm() <= 1e-9 * (1.0 + r.m.norm()));
}

} // namespace

TEST_CASE("make_relation: canonicalization and equality") {
    Rng g(401);
    for (int it = 0; it < 100; ++it) {
        Index m = testsup::random_dim(g, 0, 4), n = testsup::random_dim(g, 0, 4);
        TotalLinRel r = random_relation(g, m, n);
        check_canonical(r);
        // adding a fibre component to the matrix does not change the relation
        Matrix shift = r.fibre.basis() * testsup::random_grid_matrix(g, r.fibre.dim(), m);
        if (shift.size() == 0) shift = Matrix::Zero(n, m);
        CHECK(relation_equal(make_relation(r.m + shift, r.fibre), r));
    }
    CHECK_THROWS_AS(relation_equal(rel_identity(1), rel_identity(2)), Error);
}

TEST_CASE("relation_from_pairs: examples") {
    // graph pairs (x, R.x)
    Matrix xs = Matrix::Identity(2, 2);
    Matrix r(2, 2);
    r << 1.0, 2.0, 3.0, 4.0;
    CHECK(relation_equal(relation_from_pairs(xs, r * xs), rel_graph(r)));

    // {(V, I) : V = R.I} read as V -> I with R = 1/2: one spanning pair
    Matrix vx = Matrix::Constant(1, 1, 0.5), iy = Matrix::Constant(1, 1, 1.0);
    TotalLinRel ohm = relation_from_pairs(vx, iy);
    CHECK(ohm.fibre.dim() == 0);
    CHECK(std::abs(ohm.m(0, 0) - 2.0) <= 1e-12);

    // the full relation R x R
    Matrix fxs(1, 2), fys(1, 2);
    fxs << 1.0, 0.0;
    fys << 0.0, 1.0;
    TotalLinRel full = relation_from_pairs(fxs, fys);
    CHECK(full.fibre.dim() == 1);
    CHECK(full.m.norm() == 0.0);

    // x-components that do not span the domain are not a total relation
    CHECK_THROWS_AS(relation_from_pairs(Matrix::Zero(1, 1), Matrix::Constant(1, 1, 1.0)),
                    Error);
}

TEST_CASE("relation_from_pairs: round trip through sampled points") {
    Rng g(402);
    for (int it = 0; it < 100; ++it) {
        Index m = testsup::random_dim(g, 1, 3), n = testsup::random_dim(g, 0, 3);
        TotalLinRel r = random_relation(g, m, n);
        // sample generating pairs: the graph on a basis plus fibre directions
        const Index k = r.fibre.dim();
        Matrix xs(m, m + k), ys(n, m + k);
        xs << Matrix::Identity(m, m), Matrix::Zero(m, k);
        ys << r.m, r.fibre.basis();
        CHECK(relation_equal(relation_from_pairs(xs, ys), r));
    }
}

TEST_CASE("compose: graphs compose as maps") {
    Rng g(403);
    for (int it = 0; it < 100; ++it) {
        Index a = testsup::random_dim(g, 0, 4), b = testsup::random_dim(g, 0, 4),
              c = testsup::random_dim(g, 0, 4);
        Matrix f = testsup::random_grid_matrix(g, b, a);
        Matrix h = testsup::random_grid_matrix(g, c, b);
        CHECK(relation_equal(compose(rel_graph(f), rel_graph(h)), rel_graph(h * f)));
    }
}

TEST_CASE("compose: states absorb into the image-plus-fibre") {
    // composing the uninformative state with any relation yields the state
    // whose fibre is im(M) + D; for surjective relations that is everything
    Rng g(404);
    for (int it = 0; it < 100; ++it) {
        Index m = testsup::random_dim(g, 1, 4), n = testsup::random_dim(g, 0, 4);
        TotalLinRel r = random_relation(g, m, n);
        TotalLinRel pushed = compose(rel_uninformative(m), r);
        CHECK(relation_equal(pushed, rel_state(subspace_sum(image(r.m), r.fibre))));
        if (is_cototal(r)) CHECK(relation_equal(pushed, rel_uninformative(n)));
    }

    // boundary: the zero map is total but hits only 0
    TotalLinRel z = compose(rel_uninformative(1), rel_graph(Matrix::Zero(1, 1)));
    CHECK(relation_equal(z, rel_state(Subspace::zero(1))));

    // resistor relation contracted along (1, -R): everything cancels
    TotalLinRel vi = rel_state(orthonormalize(vec2(0.5, 1.0)));
    Matrix probe(1, 2);
    probe << 1.0, -0.5;
    TotalLinRel res = compose(vi, rel_graph(probe));
    CHECK(res.fibre.dim() == 0);
    CHECK(res.cod() == 1);
    CHECK(res.dom() == 0);
}

TEST_CASE("cospans: examples") {
    // a graph keeps its matrix and gets the identity quotient
    Matrix f(2, 1);
    f << 1.0, -2.0;
    CopartialMap cf = to_cospan(rel_graph(f));
    CHECK((cf.q - Matrix::Identity(2, 2)).norm() == 0.0);
    CHECK((cf.f - f).norm() == 0.0);

    // the uninformative state on R^1 quotients everything away
    CopartialMap cu = to_cospan(rel_uninformative(1));
    CHECK(cu.apex_dim() == 0);
    CHECK(cu.cod() == 1);

    // resistor state: the quotient is proportional to (1, -R)
    CopartialMap cr = to_cospan(rel_state(orthonormalize(vec2(0.5, 1.0))));
    CHECK(cr.apex_dim() == 1);
    CHECK(std::abs(cr.q(0, 0) - 2.0 / std::sqrt(5.0)) <= 1e-12);
    CHECK(std::abs(cr.q(0, 1) + 1.0 / std::sqrt(5.0)) <= 1e-12);

    // a non-surjective right leg is rejected
    CHECK_THROWS_AS(make_copartial(Matrix::Zero(2, 1), Matrix::Zero(2, 1)), Error);
    CHECK_THROWS_AS(from_cospan(CopartialMap{Matrix::Zero(2, 1), Matrix::Zero(2, 1)}),
                    Error);
}

TEST_CASE("cospans: round trip and isomorphism invariance") {
    Rng g(405);
    for (int it = 0; it < 200; ++it) {
        Index m = testsup::random_dim(g, 0, 5), n = testsup::random_dim(g, 0, 5);
        TotalLinRel r = random_relation(g, m, n);
        CopartialMap c = to_cospan(r);
        CHECK(relation_equal(from_cospan(c), r));

        // rescaling the apex leaves the presented relation unchanged
        const Index k = c.apex_dim();
        Matrix tau = testsup::random_grid_matrix(g, k, k);
        if (rank(tau) < k) tau += 3.0 * Matrix::Identity(k, k);
        CHECK(relation_equal(from_cospan(make_copartial(tau * c.f, tau * c.q)), r));
    }
}

TEST_CASE("compose_cospan: examples and agreement with normal forms") {
    // id ; id = id
    CopartialMap id1 = to_cospan(rel_identity(2));
    TotalLinRel idid = from_cospan(compose_cospan(id1, id1));
    CHECK(relation_equal(idid, rel_identity(2)));

    // project R^2 -> R^1, then collapse R^1 -> R^0: the total collapse
    Matrix p(1, 2);
    p << 1.0, 0.0;
    CopartialMap c1 = make_copartial(p, Matrix::Identity(1, 1));
    CopartialMap c2 = make_copartial(Matrix::Zero(0, 1), Matrix::Zero(0, 0));
    CopartialMap hole = compose_cospan(c1, c2);
    CHECK(hole.apex_dim() == 0);
    CHECK(relation_equal(from_cospan(hole), rel_discard(2)));

    // both composition routes agree on random composable pairs
    Rng g(406);
    for (int it = 0; it < 500; ++it) {
        Index a = testsup::random_dim(g, 0, 5), b = testsup::random_dim(g, 0, 5),
              c = testsup::random_dim(g, 0, 5);
        TotalLinRel r1 = random_relation(g, a, b), r2 = random_relation(g, b, c);
        TotalLinRel direct = compose(r1, r2);
        TotalLinRel glued = from_cospan(compose_cospan(to_cospan(r1), to_cospan(r2)));
        CHECK(relation_equal(direct, glued));
        check_canonical(direct);
    }
}

TEST_CASE("tensor: examples and membership") {
    CHECK(relation_equal(tensor(rel_identity(1), rel_identity(2)), rel_identity(3)));

    TotalLinRel t = tensor(rel_uninformative(1), rel_state(Subspace::zero(1)));
    CHECK(subspace_equal(t.fibre, orthonormalize(vec2(1.0, 0.0))));

    Rng g(407);
    for (int it = 0; it < 100; ++it) {
        Index a = testsup::random_dim(g, 0, 3), b = testsup::random_dim(g, 0, 3);
        Index n1 = testsup::random_dim(g, 0, 3), n2 = testsup::random_dim(g, 0, 3);
        TotalLinRel r1 = random_relation(g, a, n1), r2 = random_relation(g, b, n2);
        TotalLinRel prod = tensor(r1, r2);
        Vector x1 = testsup::random_grid_vector(g, a), x2 = testsup::random_grid_vector(g, b);
        Vector y1 = testsup::random_grid_vector(g, n1), y2 = testsup::random_grid_vector(g, n2);
        Vector x(a + b), y(n1 + n2);
        x << x1, x2;
        y << y1, y2;
        CHECK(rel_contains(prod, x, y) ==
              (rel_contains(r1, x1, y1) && rel_contains(r2, x2, y2)));
        // points actually on the relation are members
        Vector on1 = r1.m * x1 + r1.fibre.basis() * testsup::random_grid_vector(g, r1.fibre.dim());
        Vector on2 = r2.m * x2 + r2.fibre.basis() * testsup::random_grid_vector(g, r2.fibre.dim());
        Vector on(n1 + n2);
        on << on1, on2;
        CHECK(rel_contains(prod, x, on));
    }
}

TEST_CASE("Markov structure: discard and copy laws") {
    Rng g(408);
    for (int it = 0; it < 100; ++it) {
        Index m = testsup::random_dim(g, 0, 4), n = testsup::random_dim(g, 0, 4);
        TotalLinRel r = random_relation(g, m, n);

        // discarding after any relation discards
        CHECK(relation_equal(compose(r, rel_discard(n)), rel_discard(m)));

        // copy is commutative and associative, and deleting one copy undoes it
        CHECK(relation_equal(compose(rel_copy(n), rel_swap(n, n)), rel_copy(n)));
        CHECK(relation_equal(compose(rel_copy(n), tensor(rel_copy(n), rel_identity(n))),
                             compose(rel_copy(n), tensor(rel_identity(n), rel_copy(n)))));
        CHECK(relation_equal(compose(rel_copy(n), tensor(rel_identity(n), rel_discard(n))),
                             rel_identity(n)));

        // totality survives composition: every input stays related to its image
        Vector x = testsup::random_grid_vector(g, m);
        CHECK(rel_contains(r, x, r.m * x));
    }
}

TEST_CASE("compose: associativity and identities") {
    Rng g(409);
    for (int it = 0; it < 100; ++it) {
        Index a = testsup::random_dim(g, 0, 3), b = testsup::random_dim(g, 0, 3);
        Index c = testsup::random_dim(g, 0, 3), d = testsup::random_dim(g, 0, 3);
        TotalLinRel r1 = random_relation(g, a, b), r2 = random_relation(g, b, c),
                    r3 = random_relation(g, c, d);
        CHECK(relation_equal(compose(compose(r1, r2), r3), compose(r1, compose(r2, r3))));
        CHECK(relation_equal(compose(rel_identity(a), r1), r1));
        CHECK(relation_equal(compose(r1, rel_identity(b)), r1));
    }
}
