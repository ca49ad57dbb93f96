#pragma once

// Experiment drivers that compare measured norms of sparse and singular
// operators against weighted bounds, one record per run.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparselab/grid.hpp"
#include "sparselab/kernels.hpp"
#include "sparselab/operator.hpp"
#include "sparselab/sparse.hpp"
#include "sparselab/weights.hpp"

namespace sparselab {

struct CertificationRecord {
  std::string experiment;  // theorem-a, theorem-b, theorem-c, buckley
  int n = 1;
  int L = 0;
  int m = 1;
  double p0 = 1.0;
  std::vector<double> pbar;
  double p = 1.0;
  int k = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;  // weight-family parameter in sweeps
  int trial = 0;

  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::map<std::string, double> constants;  // weight characteristics and other measured constants
  double beta = 1.0;
  std::optional<bool> pass;                 // only for exact inequalities
  bool degenerate = false;                  // 0/0; campaigns skip these
  std::string note;

  /// ratio = lhs / rhs, with 0/0 = 0 and x/0 = inf.
  void finalize();
};

/// max(1, (p_i/p0)'/p) over i, with 1/p = sum 1/p_i.
double beta_exponent(std::span<const double> pbar, double p0);

/// ||A_S^{p0} f||_{L^p(nu)} against [w]_{A_{P/p0}}^beta prod ||f_i||_{L^{p_i}(w_i)}.
/// maxlevel < 0 uses the grid level.
CertificationRecord certify_theorem_B(const SparseFamily& s, const WeightTuple& t, std::span<const GridFunction> f,
                                      int maxlevel = -1);

/// Chain of dyadic ancestors of q (root first); each cube owns itself minus its successor.
SparseFamily chain_family(const DyadicCube& q, int L);

/// Inputs f_i = sigma_i chi_Q on the cube attaining [w]_{A_{P/p0}}, with the chain family down to it.
struct ExtremalProbe {
  DyadicCube cube;
  SparseFamily family;
  std::vector<GridFunction> f;
};
ExtremalProbe theorem_B_probe(const WeightTuple& t, int maxlevel = -1);

/// ||A^k_a f||_{L^p(w)} against (k+1) ||sum_l A^0_{S_l} f||_{L^p(w)} from dominate().
CertificationRecord certify_theorem_A(const CarlesonSequence& a, int k, double p0, std::span<const GridFunction> f,
                                      double p = 2.0, const GridFunction* w = nullptr,
                                      std::optional<double> cstar = {}, std::uint64_t seed = 0);

/// ||T f||_{L^p(nu)} against [w]_{A_{P/p0}}^beta prod ||f_i||_{L^{p_i}(w_i)}, with the
/// oscillation decomposition of T f, the per-cube oscillation constant and
/// the sparse bound on the resulting family recorded alongside.
CertificationRecord certify_theorem_C(const Operator& op, double delta0, const WeightTuple& t,
                                      std::span<const GridFunction> f);
CertificationRecord certify_theorem_C(const Operator& op, const H2Report& h2, const WeightTuple& t,
                                      std::span<const GridFunction> f);

/// ||M f||_{L^p(w)} against [w]_{A_p}^{1/(p-1)} ||f||_{L^p(w)}.
CertificationRecord certify_buckley(const GridFunction& w, double p, const GridFunction& f, int maxlevel = -1);

}  // namespace sparselab
