#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "sparselab/grid.hpp"

namespace sparselab::detail {

/// Pyramids of |f_i|^p0 so that every dyadic p0-average is one lookup.
class AveragePyramids {
 public:
  AveragePyramids(std::span<const GridFunction> f, double p0) : p0_(p0) {
    if (f.empty()) throw DimensionError("need at least one function");
    dim_ = f[0].dim();
    L_ = f[0].level();
    for (const auto& g : f) {
      require_same_shape(f[0], g);
      std::vector<double> v(g.size());
      for (std::size_t c = 0; c < v.size(); ++c) v[c] = std::pow(std::abs(g[c]), p0);
      sums_.emplace_back(dim_, L_, v, DyadicPyramid::Reduce::Sum);
    }
  }

  int dim() const { return dim_; }
  int resolution() const { return L_; }
  int arity() const { return static_cast<int>(sums_.size()); }

  double average(int i, int level, std::size_t linear) const {
    const double cells = std::ldexp(1.0, dim_ * (L_ - level));
    return std::pow(sums_[i].at(level, linear) / cells, 1.0 / p0_);
  }
  double product(int level, std::size_t linear) const {
    double v = 1.0;
    for (int i = 0; i < arity(); ++i) v *= average(i, level, linear);
    return v;
  }
  double product(const DyadicCube& q) const { return product(q.level, q.linear()); }

 private:
  double p0_;
  int dim_ = 1;
  int L_ = 0;
  std::vector<DyadicPyramid> sums_;
};

/// Linear index of the level-j cube containing a level-L cell.
inline std::size_t ancestor_linear(int dim, int L, std::size_t cell, int j) {
  const int shift = L - j;
  if (dim == 1) return cell >> shift;
  const std::size_t n = std::size_t{1} << L;
  const std::size_t r = (cell / n) >> shift, c = (cell % n) >> shift;
  return (r << j) + c;
}

inline void require_nonnegative(std::span<const GridFunction> f, const char* what) {
  for (const auto& g : f)
    for (double v : g.values())
      if (v < 0.0) throw DomainError(std::string(what) + " requires nonnegative functions");
}

}  // namespace sparselab::detail
