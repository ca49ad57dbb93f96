#pragma once

// Seeded input generators. Every trial gets its own engine derived from
// (seed, trial) so results do not depend on the thread schedule.

#include <cstdint>
#include <random>
#include <vector>

#include "sparselab/grid.hpp"
#include "sparselab/sparse.hpp"

namespace sparselab {

using Rng = std::mt19937_64;

Rng trial_rng(std::uint64_t seed, std::uint64_t trial);

/// Cell values i.i.d. uniform on [lo, hi].
GridFunction random_function(int dim, int L, Rng& rng, double lo = 0.0, double hi = 1.0);

/// Cell values i.i.d. log-uniform on [2^lo_exp, 2^hi_exp].
GridFunction random_weight(int dim, int L, Rng& rng, double lo_exp = -4.0, double hi_exp = 4.0);

/// Random support (each cube kept with probability `density`), uniform
/// coefficients, then scaled so that the packing sup is exactly 1.
CarlesonSequence random_carleson(const DyadicCube& root, int maxdepth, Rng& rng, double density = 0.3);

/// Random cube family that admits witnesses: each selected cube selects a
/// random subset of at most half of its children's subtrees to continue in.
std::vector<DyadicCube> random_sparse_cubes(int dim, int L, Rng& rng, double keep = 0.5);

}  // namespace sparselab
