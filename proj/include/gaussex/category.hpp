#pragma once

#include "gaussex/extgauss.hpp"
#include "gaussex/gauss.hpp"
#include "gaussex/linrel.hpp"

#include <vector>

namespace gaussex {

// A morphism R^m -> R^n sending x to M*x plus extended-Gaussian noise.
// Canonical form: the noise is canonical and M carries no component along
// the noise fibre.
struct GaussExMorphism {
    Matrix m{0, 0};
    ExtendedGaussian noise{Subspace::zero(0), Vector(0), Matrix(0, 0)};

    Index dom() const { return m.cols(); }
    Index cod() const { return m.rows(); }
};

// Canonicalizes (projects m off the noise fibre) and validates.
GaussExMorphism make_gaussex(const Matrix& m, const ExtendedGaussian& noise,
                             const ToleranceConfig& tol = default_tolerance());

bool gaussex_equal(const GaussExMorphism& a, const GaussExMorphism& b,
                   const ToleranceConfig& tol = default_tolerance());

GaussExMorphism compose(const GaussExMorphism& g2, const GaussExMorphism& g1,
                        const ToleranceConfig& tol = default_tolerance());

GaussExMorphism tensor(const GaussExMorphism& a, const GaussExMorphism& b,
                       const ToleranceConfig& tol = default_tolerance());

// Evaluates a morphism on a state (dom 0 input) or composes generally.
GaussExMorphism apply_to_state(const GaussExMorphism& f, const ExtendedGaussian& state,
                               const ToleranceConfig& tol = default_tolerance());

// Structural (noiseless, deterministic) generators plus the two states that
// seed models: the point mass at zero and the completely unspecified value.
GaussExMorphism gx_identity(Index n);
GaussExMorphism gx_matrix(const Matrix& m);
GaussExMorphism gx_scalar(double c);
GaussExMorphism gx_copy(Index n);           // x -> (x, x)
GaussExMorphism gx_discard(Index n);        // x -> ()
GaussExMorphism gx_swap(Index a, Index b);  // (x, y) -> (y, x)
GaussExMorphism gx_add(Index n);            // (x, y) -> x + y
GaussExMorphism gx_zero(Index n);           // () -> 0
GaussExMorphism gx_uninformative(Index n);  // () -> fibre R^n
GaussExMorphism gx_state(const ExtendedGaussian& chi);

GaussExMorphism embed_gauss(const GaussMorphism& g);
GaussExMorphism embed_linrel(const TotalLinRel& rel);

// Keeps the listed output coordinates of a state, in the given order.
GaussExMorphism marginal(const GaussExMorphism& state, const std::vector<Index>& coords,
                         const ToleranceConfig& tol = default_tolerance());

// The name of f: R^m -> R^n as a state on R^(m+n): share an unspecified
// input between the identity and f.  Its fibre is {(x, y) : y in M*x + D}.
GaussExMorphism name_of(const GaussExMorphism& f,
                        const ToleranceConfig& tol = default_tolerance());

// True iff the morphism commutes with copying: no fibre and no covariance.
bool is_deterministic(const GaussExMorphism& f,
                      const ToleranceConfig& tol = default_tolerance());

// For f: A -> X (x) Y with dim X = x_dim, the conditional c: A (x) X -> Y.
// Recombining it with the X-marginal of f via copy reproduces f.
GaussExMorphism conditional(const GaussExMorphism& f, Index x_dim,
                            const ToleranceConfig& tol = default_tolerance());

// A cospan presentation of a morphism: dom --f--> R^k <--q-- cod with q full
// row rank, decorated by a Gaussian psi on the apex R^k.
struct DecoratedCospan {
    Matrix f{0, 0};
    GaussianDist psi{};
    Matrix q{0, 0};

    Index dom() const { return f.cols(); }
    Index cod() const { return q.cols(); }
    Index apex_dim() const { return q.rows(); }
};

DecoratedCospan to_cospan(const GaussExMorphism& g,
                          const ToleranceConfig& tol = default_tolerance());

GaussExMorphism from_cospan(const DecoratedCospan& c,
                            const ToleranceConfig& tol = default_tolerance());

// Pushout composition; the decoration is the convolution of the pushed
// decorations in apex coordinates.
DecoratedCospan compose_cospan(const DecoratedCospan& c2, const DecoratedCospan& c1,
                               const ToleranceConfig& tol = default_tolerance());

} // namespace gaussex
