#pragma once

#include "gaussex/errors.hpp"

namespace gaussex {

// Numeric policy shared by every rank/equality decision in the library.
//
//   tau_rank : relative singular-value cutoff; sigma_i is treated as zero when
//              sigma_i < tau_rank * sigma_max. Must stay <= 1e-6 or degenerate
//              covariances stop being detected reliably.
//   tau_orth : max deviation allowed in basis^T basis - I for a stored basis.
//   tau_eq   : Frobenius threshold for "equal" projectors / means / covariances.
struct ToleranceConfig {
    double tau_rank = 1e-9;
    double tau_orth = 1e-10;
    double tau_eq = 1e-8;

    void validate() const {
        if (!(tau_rank > 0.0) || tau_rank > 1e-6)
            fail(errc::bad_index, "tau_rank must lie in (0, 1e-6]");
        if (!(tau_orth > 0.0) || !(tau_eq > 0.0))
            fail(errc::bad_index, "tolerances must be positive");
    }
};

// Process-wide default, set once at startup (before spawning worker threads);
// individual operations take an optional override instead of mutating it.
ToleranceConfig& default_tolerance();
void set_default_tolerance(const ToleranceConfig& tol);

} // namespace gaussex
