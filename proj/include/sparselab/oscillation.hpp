#pragma once

// Medians, local mean oscillation, and the median-oscillation decomposition
// of a grid function over a dyadic cube.

#include <span>
#include <vector>

#include "sparselab/grid.hpp"
#include "sparselab/operator.hpp"
#include "sparselab/sparse.hpp"

namespace sparselab {

/// Smallest cell value m with |{f > m}| <= |Q|/2 and |{f < m}| <= |Q|/2 on Q.
double median(const GridFunction& f, const DyadicCube& q);
double median_of(std::vector<double> values);

/// omega_lambda(f;Q) = inf_c ((f - c) chi_Q)^*(lambda |Q|), computed exactly.
double local_osc(const GridFunction& f, const DyadicCube& q, double lambda);
double local_osc_of(std::vector<double> values, double lambda);

struct LernerDecomposition {
  DyadicCube root;
  double median = 0.0;                   // m_f(root)
  double lambda = 0.0;                   // 2^{-n-2}
  SparseFamily family;                   // cubes with omega > 0 and their witnesses
  std::vector<double> omega;             // parallel to family.cubes
  std::vector<double> threshold;         // t_Q, parallel to family.cubes
};

/// Recursive stopping-time construction with
/// |f - m_f(root)| <= 2 sum_Q omega_{2^{-n-2}}(f;Q) chi_Q at every cell of the root.
LernerDecomposition lerner_decompose(const GridFunction& f, const DyadicCube& root);

/// The right-hand side 2 sum_Q omega_Q chi_Q as a grid function.
GridFunction lerner_majorant(const LernerDecomposition& d, int dim, int L);

struct LernerCheck {
  bool ok = true;
  double max_excess = 0.0;  // max over cells of |f - m| - majorant (<= tolerance when ok)
  std::size_t worst_cell = 0;
  SparseCheck sparse;
};

LernerCheck verify_lerner(const GridFunction& f, const LernerDecomposition& d, double tolerance = 1e-9);

struct OscillationProfile {
  DyadicCube cube;
  double lambda = 0.0;
  double p0 = 1.0;
  double delta0 = 0.0;
  std::vector<double> ring_values;  // prod_i <f_i>_{2^l Q, p0}, l = 0.. first saturated dilate
  bool truncated = false;           // dilates reached the whole torus
  double lhs = 0.0;                 // omega_lambda(T f; Q)
  double rhs = 0.0;                 // sum_l 2^{-l delta0} ring_values[l]
  double ratio = 0.0;               // lhs / rhs (0 when both vanish)
};

OscillationProfile osc_profile(const Operator& op, std::span<const GridFunction> f, const DyadicCube& q,
                               double lambda, double p0, double delta0);

/// Same, reusing an already computed T f.
OscillationProfile osc_profile_from(const GridFunction& Tf, std::span<const GridFunction> f, const DyadicCube& q,
                                    double lambda, double p0, double delta0);

}  // namespace sparselab
