#pragma once

// Muckenhoupt, reverse Hoelder and multiple-weight characteristics computed
// over the canonical dyadic family up to a chosen level.

#include <array>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "sparselab/grid.hpp"

namespace sparselab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Supremum of a cube functional together with the cube attaining it.
struct ConstantReport {
  double value = 0.0;
  DyadicCube witness;
  std::string family;  // e.g. "dyadic<=8"
  int maxlevel = 0;
};

/// [w]_{A_p} over dyadic cubes of level <= maxlevel; p == 1 uses the
/// (avg w) / (min w) form.
ConstantReport ap_constant(const GridFunction& w, double p, int maxlevel, Exec exec = Exec::Parallel);

/// [w]_{RH_q}; q == kInfinity uses (max w) / (avg w).
ConstantReport rh_constant(const GridFunction& w, double q, int maxlevel, Exec exec = Exec::Parallel);

/// m weights with exponents p_1..p_m, the derived p, and the baseline p0.
class WeightTuple {
 public:
  WeightTuple(std::vector<GridFunction> weights, std::vector<double> exponents, double p0 = 1.0);

  int arity() const { return static_cast<int>(weights_.size()); }
  const std::vector<GridFunction>& weights() const { return weights_; }
  const GridFunction& weight(int i) const { return weights_[i]; }
  const std::vector<double>& exponents() const { return exponents_; }
  double p() const { return p_; }
  double p0() const { return p0_; }
  int dim() const { return weights_.front().dim(); }
  int level() const { return weights_.front().level(); }

  /// nu = prod_i w_i^{p/p_i}.
  GridFunction nu() const;
  /// Same weights and exponents with a different baseline p0.
  WeightTuple with_p0(double p0) const;

 private:
  std::vector<GridFunction> weights_;
  std::vector<double> exponents_;
  double p_ = 1.0;
  double p0_ = 1.0;
};

/// [w]_{A_{P/r}}: sup (avg nu) prod_i (avg w_i^{1-a_i'})^{(p/r)/a_i'} with a_i = p_i/r.
ConstantReport multi_ap_constant(const WeightTuple& t, double r, int maxlevel, Exec exec = Exec::Parallel);

/// sigma_i = w_i^{1-(p_i/p0)'}.
std::vector<GridFunction> dual_weights(const WeightTuple& t);

struct DualityReport {
  double lhs = 0.0;   // [sigma]_{A_{p'/p0}}, sigma = w^{1-p'}
  double rhs = 0.0;   // [w]_{RH_{(p0'/p)'}}^{1/(p-1)} [w]_{A_p}^{1/(p-1)}
  double rh_exponent = 0.0;
  ConstantReport sigma_ap;
  ConstantReport w_rh;
  ConstantReport w_ap;
  bool holds = false;
};

/// Compares both sides of the dual-weight inequality on the same cube family.
/// Requires 1 < p < p0'.
DualityReport duality_inequality_check(const GridFunction& w, double p, double p0, int maxlevel,
                                       double tolerance = 1e-9);

/// Cell averages of dist_torus(x, center)^alpha.
GridFunction power_weight(double alpha, std::array<double, 2> center, int dim, int L);

/// Clamps cells below 1e-300 (and non-finite cells) and reports how many were touched.
GridFunction clamp_weight(const GridFunction& w, std::ostream* warnings = nullptr);

double conjugate(double p);

}  // namespace sparselab
