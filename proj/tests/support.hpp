#pragma once

// Shared deterministic generators for the property tests. Every test case
// owns its engine with a fixed seed so failures replay exactly.

#include <random>

#include "gaussex/linalg.hpp"

namespace testsup {

using gaussex::Index;
using gaussex::Matrix;
using gaussex::Subspace;
using gaussex::Vector;

using Rng = std::mt19937_64;

inline double std_normal(Rng& g) {
    static thread_local std::normal_distribution<double> dist(0.0, 1.0);
    return dist(g);
}

inline Matrix random_matrix(Rng& g, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = std_normal(g);
    return m;
}

// Entries on the half-integer grid [-2, 2]; rank structure of such matrices
// is either exact or far from the cutoff, which keeps cross-route canonical
// comparisons well-conditioned.
inline Matrix random_grid_matrix(Rng& g, Index rows, Index cols) {
    std::uniform_int_distribution<int> d(-4, 4);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = 0.5 * d(g);
    return m;
}

inline Vector random_vector(Rng& g, Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = std_normal(g);
    return v;
}

inline Vector random_grid_vector(Rng& g, Index n) {
    std::uniform_int_distribution<int> d(-4, 4);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = 0.5 * d(g);
    return v;
}

inline Matrix random_rank_deficient(Rng& g, Index rows, Index cols, Index r) {
    return random_grid_matrix(g, rows, r) * random_grid_matrix(g, r, cols);
}

inline Subspace random_subspace(Rng& g, Index ambient, Index dim) {
    return gaussex::orthonormalize(random_matrix(g, ambient, dim));
}

inline Index random_dim(Rng& g, Index lo, Index hi) {
    std::uniform_int_distribution<Index> d(lo, hi);
    return d(g);
}

// PSD matrix of the given rank (exact zeros elsewhere).
inline Matrix random_psd(Rng& g, Index n, Index rank) {
    Matrix f = random_grid_matrix(g, n, rank);
    Matrix m = f * f.transpose();
    return 0.5 * (m + m.transpose());
}

} // namespace testsup
