#pragma once

#include "gaussex/category.hpp"

#include <cstdint>
#include <vector>

namespace gaussex {

// An open system: a space R^n carrying an extended Gaussian, whose fibre is
// the set of directions the system leaves unspecified.
struct GaussianSystem {
    ExtendedGaussian chi{Subspace::zero(0), Vector(0), Matrix(0, 0)};

    Index dim() const { return chi.dim(); }
};

// An axis-aligned rectangle over R^r; bounds may be +-infinity, and an
// empty rectangle (lo > hi somewhere) is legal and has measure zero.
struct Rectangle {
    Vector lo;
    Vector hi;
};

// A finite union of rectangles over R^r.
struct Region {
    Index dim{0};
    std::vector<Rectangle> parts;
};

Region rectangle_region(const Vector& lo, const Vector& hi);
Region interval_region(double lo, double hi);

// The event {x : C*x in region}.  It only has a probability when it is a
// cylinder parallel to the system's fibre, i.e. C annihilates the fibre.
struct CylinderEvent {
    Matrix c;
    Region region;
};

// An injective assignment of a system's coordinates into R^total_dim.
struct Placement {
    Index total_dim{0};
    std::vector<Index> coords;
};

// Exact probability of a cylinder event: the pushforward of the system
// along C is an honest Gaussian on R^r, integrated over the region with
// closed-form normal CDFs (independent or deterministic coordinates) and
// nested Gauss-Legendre quadrature (correlated blocks up to r = 3).
double cylinder_probability(const GaussianSystem& sys, const CylinderEvent& ev,
                            const ToleranceConfig& tol = default_tolerance());

// Number of hits among samples [begin, end).  Sample i is generated from a
// keyed counter RNG depending only on (seed, i), so any partition of the
// index range sums to the same total.
std::int64_t mc_count(const GaussianSystem& sys, const CylinderEvent& ev,
                      std::uint64_t seed, std::int64_t begin, std::int64_t end,
                      const ToleranceConfig& tol = default_tolerance());

struct McResult {
    double estimate{0.0};
    double std_error{0.0};
};

McResult mc_estimate(const GaussianSystem& sys, const CylinderEvent& ev,
                     std::int64_t n_samples, std::uint64_t seed,
                     const ToleranceConfig& tol = default_tolerance());

// Widens a system to a larger product space: placed coordinates keep their
// distribution, all others join the fibre.
GaussianSystem weaken(const GaussianSystem& sys, const Placement& placement,
                      const ToleranceConfig& tol = default_tolerance());

// Two systems on the same space interconnect without conditioning exactly
// when their fibres sum to the whole space.
bool is_complementary(const GaussianSystem& s1, const GaussianSystem& s2,
                      const ToleranceConfig& tol = default_tolerance());

// Refines two complementary systems into one by stacking their kernel
// representations; the result's fibre is the intersection of the fibres.
GaussianSystem interconnect(const GaussianSystem& s1, const GaussianSystem& s2,
                            const ToleranceConfig& tol = default_tolerance());

// Restricts a system to the kept coordinates (in the given order).
GaussianSystem eliminate(const GaussianSystem& sys, const std::vector<Index>& keep,
                         const ToleranceConfig& tol = default_tolerance());

// Composes f: R^x -> R^y with g: R^y -> R^z by the interconnection pipeline:
// weaken both names into R^(x+y+z), interconnect, check the result against
// the name of x |-> (f(x), g(f(x))) (InternalInconsistency on mismatch),
// eliminate the middle block, and un-name via a conditional.
GaussExMorphism compose_via_interconnection(const GaussExMorphism& f,
                                            const GaussExMorphism& g,
                                            const ToleranceConfig& tol = default_tolerance());

} // namespace gaussex
