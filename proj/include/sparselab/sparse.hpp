#pragma once

// Carleson sequences, sparse families and the operators built on them, plus
// the constructive domination pipeline (slice, select, verify).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparselab/grid.hpp"

namespace sparselab {

/// Coefficients alpha_Q >= 0 on D(P0) down to a fixed relative depth.
/// Storage is dense per depth, indexed by the cube's position inside P0.
class CarlesonSequence {
 public:
  CarlesonSequence() = default;
  CarlesonSequence(DyadicCube root, int maxdepth);

  const DyadicCube& root() const { return root_; }
  int dim() const { return root_.dim; }
  int maxdepth() const { return maxdepth_; }
  /// Absolute level of the finest cubes that may carry mass.
  int finest_level() const { return root_.level + maxdepth_; }

  double alpha(const DyadicCube& q) const;
  void set(const DyadicCube& q, double value);
  void add(const DyadicCube& q, double value);

  /// Cube at relative depth d with local row-major position `local` inside the root.
  DyadicCube cube_at(int depth, std::size_t local) const;
  std::size_t local_index(const DyadicCube& q) const;
  std::span<const double> depth_values(int d) const { return coef_[d]; }
  std::span<double> depth_values(int d) { return coef_[d]; }

  bool in_tree(const DyadicCube& q) const;
  bool is_zero() const;
  std::size_t nonzero_count() const;
  std::vector<DyadicCube> support() const;

  /// Multiplies every coefficient by s >= 0.
  void scale(double s);

 private:
  DyadicCube root_;
  int maxdepth_ = 0;
  std::vector<std::vector<double>> coef_;
};

/// Indicator sequence of a cube list (coefficient 1 on each listed cube).
CarlesonSequence indicator_sequence(std::span<const DyadicCube> cubes, const DyadicCube& root, int maxdepth);

struct CarlesonCheck {
  bool ok = true;
  double worst_ratio = 0.0;
  DyadicCube worst;
};

/// Normalization sup_Q |Q|^{-1} sum_{T in D(Q)} alpha_T |T| <= 1 (+1e-12).
CarlesonCheck verify_carleson(const CarlesonSequence& a);

/// Per-cube packing ratios, indexed like the sequence itself.
std::vector<std::vector<double>> packing_ratios(const CarlesonSequence& a);

/// Cubes with disjoint witness sets; witnesses are level-L cell indices.
struct SparseFamily {
  int dim = 1;
  int resolution = 0;
  std::vector<DyadicCube> cubes;
  std::vector<std::vector<std::size_t>> witness;  // parallel to cubes, sorted
};

struct SparseCheck {
  bool ok = true;
  std::string reason;
  std::optional<DyadicCube> offending;
};

/// Disjointness, E_Q inside Q and 2|E_Q| >= |Q|, all on exact cell counts.
SparseCheck verify_sparse(const SparseFamily& s);

struct WitnessResult {
  bool ok = false;
  SparseFamily family;
  std::optional<DyadicCube> offending;
  double worst_fraction = 1.0;  // min over cubes of |E_Q| / |Q|
};

/// E_Q = Q minus the strictly smaller listed cubes; fails if some |E_Q| < |Q|/2.
WitnessResult greedy_witness(std::vector<DyadicCube> cubes, int L);

/// sum_Q alpha_Q prod_i <f_i>_{Q^(k),p0} chi_Q, skipping Q with Q^(k) not inside the root.
GridFunction eval_sparse_A(const CarlesonSequence& a, int k, double p0, std::span<const GridFunction> f,
                           Exec exec = Exec::Parallel);
GridFunction eval_sparse_A(const SparseFamily& s, int k, double p0, std::span<const GridFunction> f,
                           Exec exec = Exec::Parallel);

/// Same with the periodic dilates 2^k Q in place of the ancestors.
GridFunction eval_sparse_T(const CarlesonSequence& a, int k, double p0, std::span<const GridFunction> f,
                           Exec exec = Exec::Parallel);
GridFunction eval_sparse_T(const SparseFamily& s, int k, double p0, std::span<const GridFunction> f,
                           Exec exec = Exec::Parallel);

struct SlicePiece {
  int ell = 0;
  DyadicCube P;
  CarlesonSequence seq;  // rooted at P, nonzero only at relative depths jk, j >= 1
};

/// Splits the complexity-k operator into separated-scale pieces; only nonzero pieces are returned.
std::vector<SlicePiece> slice(const CarlesonSequence& a, int k);

/// beta_Q = 2^{-nk} sum_{R in D_k(Q)} alpha_R.
CarlesonSequence beta_sequence(const CarlesonSequence& a, int k);

struct EmbeddingReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double q = 0.0;
  bool holds = false;
};

/// (sum alpha_Q (prod avg_Q f_i)^q |Q|)^{1/q} <= prod p_i' ||f_i||_{p_i}, norms over the root.
EmbeddingReport carleson_embedding_check(const CarlesonSequence& a, double q, std::span<const double> exponents,
                                         std::span<const GridFunction> f, double tolerance = 1e-9);

struct CZComponent {
  std::vector<DyadicCube> stopping;
  GridFunction good;  // g = f^p0 - b
  GridFunction bad;   // b = sum_R (f^p0 - <f^p0>_R) chi_R
};

struct CZDecomposition {
  double lambda = 0.0;
  double p0 = 1.0;
  int m = 1;
  DyadicCube P;
  bool short_circuit = false;  // some <f_i>_{P,p0} > lambda^{1/m}
  int short_circuit_index = -1;
  std::vector<CZComponent> parts;
};

CZDecomposition cz_decompose(std::span<const GridFunction> f, double lambda, double p0, int m,
                             const DyadicCube& P);

struct CZCheck {
  bool ok = true;
  double max_mean_defect = 0.0;     // max_R |int_R b^R| / (|R| <f^p0>_R)
  bool stopping_ok = true;          // <f>_R > lambda^{1/m} >= <f>_{R^(1)}
  bool measure_ok = true;           // sum |R| <= lambda^{-p0/m} int_P f^p0
  bool good_bound_ok = true;        // |g| <= 2^n lambda^{p0/m}
  bool good_l1_ok = true;           // ||g||_1 <= ||f||_p0^p0
  double max_good_ratio = 0.0;      // max |g| / (2^n lambda^{p0/m})
  std::string reason;
};

CZCheck verify_cz(std::span<const GridFunction> f, const CZDecomposition& cz, double tolerance = 1e-9);

enum class MaximalMode { PlainP0, SigmaWeighted };

/// Dyadic maximal function: sup over Q containing the cell of <f>_{Q,p0}
/// (plain) or sigma(Q)^{-1} int_Q |f| sigma (weighted).
GridFunction dyadic_maximal(const GridFunction& f, const GridFunction* sigma, MaximalMode mode, double p0 = 1.0,
                            Exec exec = Exec::Parallel);

/// Empirical lower estimate of the weak-type norm of the sequence's operator.
double measure_weak_norm(const CarlesonSequence& a, int k, double p0, int m, int trials, std::uint64_t seed);

/// 2^{2(m+1)} * 2 * estimate.
double default_cstar(const CarlesonSequence& a, int k, double p0, int m, int trials, std::uint64_t seed);

struct SelectionResult {
  std::vector<DyadicCube> selected;
  WitnessResult witness;          // selection check: succeeds iff |F(P)| <= |P|/2 for every P
  double pointwise_constant = 0.0;  // measured sup of A / sum_S prod <f>_Q chi_Q
  double cstar = 0.0;
};

/// Stopping-time selection driven by the running deficit Delta. For k >= 1
/// the sequence should be one slice piece; only depths jk are visited.
SelectionResult select_sparse(const CarlesonSequence& a, int k, double p0, std::span<const GridFunction> f,
                              double cstar);

struct DominationReport {
  std::vector<SlicePiece> pieces;
  std::vector<SelectionResult> selections;  // parallel to pieces
  bool all_sparse = true;
  double pointwise_ratio = 0.0;  // sup_x A^k f / sum_pieces A^0_{S} f
  double norm_ratio = 0.0;       // ||A^k f||_{L^p(w)} / ||sum_pieces A^0_{S} f||_{L^p(w)}
  double lhs_norm = 0.0;
  double rhs_norm = 0.0;
  double cstar = 0.0;
};

/// Slice, select on every piece, and compare the result against the original operator.
DominationReport dominate(const CarlesonSequence& a, int k, double p0, std::span<const GridFunction> f,
                          double p = 2.0, const GridFunction* w = nullptr, std::optional<double> cstar = {},
                          std::uint64_t seed = 0);

/// Sum over the pieces of the complexity-0 family operators.
GridFunction dominating_sum(const DominationReport& r, double p0, std::span<const GridFunction> f);

}  // namespace sparselab
