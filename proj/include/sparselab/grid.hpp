#pragma once

// Dyadic geometry on the periodic unit cube [0,1)^n and piecewise-constant
// functions sampled on the level-L lattice.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sparselab/errors.hpp"
#include "sparselab/exec.hpp"

namespace sparselab {

inline constexpr int kMaxLevel1D = 12;
inline constexpr int kMaxLevel2D = 8;

using Index2 = std::array<std::int64_t, 2>;

/// A cube 2^{-level}([0,1)^n + index) of the canonical grid. Unused index
/// components (dim == 1) are kept at zero.
struct DyadicCube {
  int dim = 1;
  int level = 0;
  Index2 index{0, 0};

  static DyadicCube root(int dim) { return DyadicCube{dim, 0, {0, 0}}; }
  static DyadicCube from_linear(int dim, int level, std::size_t linear);

  double side() const;
  double volume() const;
  std::int64_t per_axis() const { return std::int64_t{1} << level; }
  std::size_t linear() const;

  DyadicCube parent() const;
  DyadicCube ancestor(int k) const;
  std::vector<DyadicCube> children() const;
  std::vector<DyadicCube> descendants(int depth) const;
  bool contains(const DyadicCube& other) const;

  /// Number of lattice cells of resolution L inside this cube.
  std::size_t cell_count(int L) const;
  /// Linear indices of the level-L cells inside this cube, row-major.
  std::vector<std::size_t> cells(int L) const;

  std::string str() const;

  auto operator<=>(const DyadicCube&) const = default;
};

/// Piecewise-constant real function at resolution 2^{-L} per axis.
/// Cell values are stored row-major (axis 0 is the slow axis).
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(int dim, int level, std::vector<double> values);

  static GridFunction constant(int dim, int level, double c);
  template <class F>
  static GridFunction from_cells(int dim, int level, F&& fn) {
    std::vector<double> v(cells_for(dim, level));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(i);
    return GridFunction(dim, level, std::move(v));
  }

  int dim() const { return dim_; }
  int level() const { return level_; }
  std::size_t size() const { return values_.size(); }
  std::int64_t per_axis() const { return std::int64_t{1} << level_; }
  double cell_volume() const;
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Center of a cell in [0,1)^dim; unused axis is 0.
  std::array<double, 2> cell_center(std::size_t cell) const;
  Index2 cell_coords(std::size_t cell) const;
  std::size_t cell_linear(Index2 coords) const;

  double integral() const;
  double min() const;
  double max() const;
  bool same_shape(const GridFunction& other) const;

  static std::size_t cells_for(int dim, int level);

 private:
  int dim_ = 1;
  int level_ = 0;
  std::vector<double> values_;
};

void check_shape(int dim, int level);
void require_same_shape(const GridFunction& a, const GridFunction& b);

/// A lattice cell together with the fraction of it covered by a set.
struct CellWeight {
  std::size_t cell;
  double weight;
};

/// Weighted set of lattice cells. Dilated cubes may cover boundary cells
/// by half, so membership is fractional.
struct CellSet {
  int dim = 1;
  int level = 0;
  bool full_torus = false;
  std::vector<CellWeight> cells;  // sorted by cell, weights in (0, 1]

  double measure() const;
};

/// The concentric cube 2^k Q, periodically wrapped, saturating at the torus.
CellSet dilate(const DyadicCube& q, int k, int L);

/// S_j(Q): 2^j Q minus 2^{j-1} Q for j >= 1 and Q itself for j = 0.
CellSet annulus(const DyadicCube& q, int j, int L);

/// True when 2^j Q already covers the whole torus.
bool dilate_saturates(const DyadicCube& q, int j);

/// Per-level reductions (sum, min or max) over the dyadic cubes of a grid.
class DyadicPyramid {
 public:
  enum class Reduce { Sum, Min, Max };

  DyadicPyramid(int dim, int L, std::span<const double> cells, Reduce op);

  int dim() const { return dim_; }
  int resolution() const { return L_; }
  double at(const DyadicCube& q) const { return levels_[q.level][q.linear()]; }
  double at(int level, std::size_t linear) const { return levels_[level][linear]; }
  std::span<const double> level(int j) const { return levels_[j]; }

 private:
  int dim_;
  int L_;
  std::vector<std::vector<double>> levels_;
};

/// <f>_{Q,p0} = (|Q|^{-1} \int_Q |f|^{p0})^{1/p0}.
double average(const GridFunction& f, const DyadicCube& q, double p0);
/// p0-average over a weighted cell set.
double average(const GridFunction& f, const CellSet& s, double p0);

/// f*(t) = inf{a > 0 : |{|f| > a}| < t}.
double rearrangement(const GridFunction& f, double t);
/// Rearrangement of the values of a function restricted to a set, where each
/// value carries the measure `cell_volume` and everything else is zero.
double rearrangement_of(std::span<const double> values, double cell_volume, double t);

/// (\sum |f|^p w cellvol)^{1/p}.
double weighted_norm(const GridFunction& f, double p, const GridFunction& w);
double lp_norm(const GridFunction& f, double p);

/// Discrete L^{q,inf} quasinorm sup_t t^{1/q} f*(t).
double weak_norm(const GridFunction& f, double q);

/// Text format: `GFN1 <n> <L>` then whitespace-separated cell values.
GridFunction read_gfn(std::istream& in);
GridFunction read_gfn_file(const std::string& path);
void write_gfn(std::ostream& out, const GridFunction& f);
void write_gfn_file(const std::string& path, const GridFunction& f);

}  // namespace sparselab
