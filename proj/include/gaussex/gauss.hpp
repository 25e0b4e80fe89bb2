#pragma once

#include "gaussex/linalg.hpp"

namespace gaussex {

// Eigenvalue slack for positive semidefiniteness: anything in [-kPsdSlack, 0)
// is roundoff and gets clamped to zero; anything below is a hard error.
inline constexpr double kPsdSlack = 1e-10;

// ============================================================================
// GaussianDist — N(mean, cov) on R^n, possibly degenerate, n = 0 legal
// ============================================================================

struct GaussianDist {
    Vector mean{0};
    Matrix cov{0, 0};

    Index dim() const { return mean.size(); }
};

// Validates and canonicalizes: symmetrizes cov and clamps roundoff-negative
// eigenvalues. Throws NotPSD below the slack, NonFiniteInput on NaN/Inf.
GaussianDist make_gaussian(Vector mean, Matrix cov);

GaussianDist standard_gaussian(Index n);
GaussianDist point_mass(Vector mean); // Dirac at mean

bool gaussian_equal(const GaussianDist& a, const GaussianDist& b,
                    const ToleranceConfig& tol = default_tolerance());

// ============================================================================
// Transformations
// ============================================================================

// m_* N(mean, cov) = N(m mean, m cov m^T)
GaussianDist pushforward(const Matrix& m, const GaussianDist& psi);

// product measure: block-diagonal
GaussianDist tensor(const GaussianDist& a, const GaussianDist& b);

// sum of independent draws: means and covariances add
GaussianDist convolve(const GaussianDist& a, const GaussianDist& b);

// Condition N(mean, cov) on the exact observation l x = v:
//   mean' = mean + cov l^T (l cov l^T)^+ (v - l mean)
//   cov'  = cov - cov l^T (l cov l^T)^+ l cov
// An observation outside the affine support of l_* psi is projected onto it
// and flagged.
struct ConditionResult {
    GaussianDist dist;
    bool off_support = false;
};

ConditionResult condition_on_linear(const GaussianDist& psi, const Matrix& l,
                                    const Vector& v,
                                    const ToleranceConfig& tol = default_tolerance());

// ============================================================================
// GaussMorphism — x |-> m x + noise, noise a Gaussian on the codomain
// ============================================================================

struct GaussMorphism {
    Matrix m{0, 0};
    GaussianDist noise;

    Index dom() const { return m.cols(); }
    Index cod() const { return m.rows(); }
};

GaussMorphism make_gauss_morphism(Matrix m, GaussianDist noise);
GaussMorphism gauss_identity(Index n);

// g2 after g1: (m2 m1, (m2)_* noise1 + noise2)
GaussMorphism compose(const GaussMorphism& g2, const GaussMorphism& g1);
GaussMorphism tensor(const GaussMorphism& a, const GaussMorphism& b);

// Action on states: f_* psi = (m)_* psi + noise.
GaussianDist apply(const GaussMorphism& f, const GaussianDist& psi);

bool gauss_morphism_equal(const GaussMorphism& a, const GaussMorphism& b,
                          const ToleranceConfig& tol = default_tolerance());

} // namespace gaussex
