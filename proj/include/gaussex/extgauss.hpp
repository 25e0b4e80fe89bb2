#pragma once

#include "gaussex/gauss.hpp"

namespace gaussex {

// ============================================================================
// ExtendedGaussian — a Gaussian distribution plus a fibre of unconstrained
// directions: psi + D on R^n. Data along D is meaningless, so the canonical
// triple keeps the mean orthogonal to D and the covariance supported on D^perp
// (P Sigma P = Sigma with P the projector onto D^perp).
// ============================================================================

struct ExtendedGaussian {
    Subspace fibre; // D
    Vector mean;    // perpendicular to D
    Matrix cov;     // PSD, supported on D^perp

    Index dim() const { return fibre.ambient_dim(); }
    bool is_closed(const ToleranceConfig& tol = default_tolerance()) const {
        return fibre.dim() == 0;
    }
};

// Canonicalizes (projects mean/cov onto D^perp) and validates PSD.
ExtendedGaussian make_extended(Vector mean, Matrix cov, Subspace fibre,
                               const ToleranceConfig& tol = default_tolerance());

ExtendedGaussian from_gaussian(GaussianDist psi); // fibre {0}
ExtendedGaussian ext_point_mass(Vector mean);     // delta, fibre {0}
ExtendedGaussian ext_uninformative(Index n);      // fibre R^n

// The closed Gaussian carried on D^perp; meaningful only with the fibre.
GaussianDist gaussian_part(const ExtendedGaussian& x);

bool extended_equal(const ExtendedGaussian& a, const ExtendedGaussian& b,
                    const ToleranceConfig& tol = default_tolerance());

// ============================================================================
// Kernel representation — x = q^{-1}(psi) for a surjective q with ker q = D.
// Unique up to isomorphism tau of the codomain of q with tau_* psi matching.
// ============================================================================

struct KernelRep {
    Matrix q;         // k x n, full row rank
    GaussianDist psi; // on R^k
};

// Section s = pinv(q); mean = s psi.mean, cov = s psi.cov s^T, fibre = ker q.
ExtendedGaussian from_kernel_rep(const KernelRep& rep,
                                 const ToleranceConfig& tol = default_tolerance());

// Emits q = (basis of D^perp)^T, psi = q_* (mean, cov).
KernelRep to_kernel_rep(const ExtendedGaussian& x,
                        const ToleranceConfig& tol = default_tolerance());

// ============================================================================
// Transformations
// ============================================================================

// m_*(psi + D) = m_* psi + m[D]
ExtendedGaussian pushforward(const Matrix& m, const ExtendedGaussian& x,
                             const ToleranceConfig& tol = default_tolerance());

// psi1 (x) psi2 + D1 x D2
ExtendedGaussian tensor(const ExtendedGaussian& a, const ExtendedGaussian& b);

// (psi1 + psi2) + (D1 + D2)
ExtendedGaussian convolve(const ExtendedGaussian& a, const ExtendedGaussian& b,
                          const ToleranceConfig& tol = default_tolerance());

// Block embedding D1 x D2 inside R^{n1+n2} (shared by tensor operations).
} // namespace gaussex
