#pragma once

#include "gaussex/extgauss.hpp"

namespace gaussex {

// A convex quadratic defined on an affine subspace (+infinity elsewhere):
//   f(x) = 1/2 x'Ax + lin'x + offset   for x - anchor in S.
// Canonical form: A = P_S A P_S (PSD), lin in S, anchor orthogonal to S, so
// the fields evaluate on x directly and equal functions have equal fields.
struct PartialQuadratic {
    Matrix a{0, 0};
    Vector lin{Vector(0)};
    double offset{0.0};
    Subspace domain{Subspace::zero(0)}; // S
    Vector anchor{Vector(0)};

    Index dim() const { return a.rows(); }
};

// Canonicalizes around the anchor (any point of the affine domain) and
// validates symmetry and positive semidefiniteness.
PartialQuadratic make_partial_quadratic(const Matrix& a, const Vector& lin, double offset,
                                        const Subspace& domain, const Vector& anchor,
                                        const ToleranceConfig& tol = default_tolerance());

// The identically-zero form on all of R^n (the unit for add).
PartialQuadratic pq_zero(Index n);

bool pq_equal(const PartialQuadratic& f, const PartialQuadratic& g,
              const ToleranceConfig& tol = default_tolerance());

struct PqValue {
    double value{0.0};
    bool finite{false};
};

PqValue value_of(const PartialQuadratic& f, const Vector& x,
                 const ToleranceConfig& tol = default_tolerance());

// Directions the form does not see: S intersect ker A.
Subspace form_kernel(const PartialQuadratic& f,
                     const ToleranceConfig& tol = default_tolerance());

// f_p(x) = 1/2 (x-mu)' pinv(Sigma) (x-mu) on mu + (im Sigma + D): the
// negative log-density up to normalization, constant along the fibre.
PartialQuadratic precision_form(const ExtendedGaussian& chi,
                                const ToleranceConfig& tol = default_tolerance());

// f_c(y) = 1/2 y' Sigma y + mu'y on the orthocomplement of the fibre.
PartialQuadratic covariance_form(const ExtendedGaussian& chi,
                                 const ToleranceConfig& tol = default_tolerance());

// Convex (Legendre-Fenchel) conjugate, in closed form.  An involution on
// canonical forms; swaps precision_form and covariance_form.
PartialQuadratic legendre_conjugate(const PartialQuadratic& f,
                                    const ToleranceConfig& tol = default_tolerance());

// Pointwise sum; the domain is the intersection of the affine domains
// (Infeasible when they are disjoint).
PartialQuadratic add(const PartialQuadratic& f, const PartialQuadratic& g,
                     const ToleranceConfig& tol = default_tolerance());

// Reads a canonical form back as an extended Gaussian, interpreting it as a
// precision form: Sigma = pinv(A), fibre = S intersect ker A, mean from the
// linear part and anchor.
ExtendedGaussian from_precision(const PartialQuadratic& f,
                                const ToleranceConfig& tol = default_tolerance());

// Interconnection at the quadratic level: precisions add.  Defined whenever
// the affine supports meet (complementarity is not required); on closed
// overlapping systems this is conditioning on equality.
ExtendedGaussian interconnect_precision(const ExtendedGaussian& chi1,
                                        const ExtendedGaussian& chi2,
                                        const ToleranceConfig& tol = default_tolerance());

} // namespace gaussex
