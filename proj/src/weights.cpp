#include "sparselab/weights.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

namespace sparselab {

double conjugate(double p) {
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) return kInfinity;
  return p / (p - 1.0);
}

namespace {

struct Best {
  double value = -kInfinity;
  int level = 0;
  std::size_t linear = 0;

  void offer(double v, int lvl, std::size_t lin) {
    // Ties go to the coarsest, then lowest-index cube so the witness does not
    // depend on scan order.
    if (v > value || (v == value && (lvl < level || (lvl == level && lin < linear)))) {
      value = v;
      level = lvl;
      linear = lin;
    }
  }
};

using CubeFunctional = std::function<double(int level, std::size_t linear)>;

// Sup of a cube functional over all dyadic cubes of level <= maxlevel.
Best scan_levels(int dim, int maxlevel, const CubeFunctional& fn) {
  Best best;
  for (int j = 0; j <= maxlevel; ++j) {
    const auto count = static_cast<std::int64_t>(GridFunction::cells_for(dim, j));
#pragma omp parallel
    {
      Best local;
#pragma omp for schedule(static) nowait
      for (std::int64_t i = 0; i < count; ++i) local.offer(fn(j, static_cast<std::size_t>(i)), j, i);
#pragma omp critical
      best.offer(local.value, local.level, local.linear);
    }
  }
  return best;
}

// Serial reference: recomputes every cube directly from its cells.
Best scan_levels_serial(int dim, int L, int maxlevel,
                        const std::function<double(const std::vector<std::size_t>&)>& fn) {
  Best best;
  for (int j = 0; j <= maxlevel; ++j) {
    const std::size_t count = GridFunction::cells_for(dim, j);
    for (std::size_t i = 0; i < count; ++i) best.offer(fn(DyadicCube::from_linear(dim, j, i).cells(L)), j, i);
  }
  return best;
}

ConstantReport make_report(const Best& b, int dim, int maxlevel) {
  return ConstantReport{b.value, DyadicCube::from_linear(dim, b.level, b.linear),
                        "dyadic<=" + std::to_string(maxlevel), maxlevel};
}

void require_positive(const GridFunction& w) {
  for (std::size_t i = 0; i < w.size(); ++i)
    if (!(w[i] > 0.0)) throw DomainError("weight must be positive at every cell (cell " + std::to_string(i) + ")");
}

int resolve_maxlevel(const GridFunction& w, int maxlevel) {
  if (maxlevel < 0) return w.level();
  if (maxlevel > w.level()) throw DimensionError("maxlevel exceeds the grid resolution");
  return maxlevel;
}

std::vector<double> powered(const GridFunction& w, double e) {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = std::pow(w[i], e);
  return out;
}

double mean_of(const std::vector<double>& v, const std::vector<std::size_t>& cells) {
  double s = 0.0;
  for (std::size_t c : cells) s += v[c];
  return s / static_cast<double>(cells.size());
}

}  // namespace

ConstantReport ap_constant(const GridFunction& w, double p, int maxlevel, Exec exec) {
  if (!(p >= 1.0)) throw DomainError("A_p requires p >= 1");
  require_positive(w);
  maxlevel = resolve_maxlevel(w, maxlevel);
  const int L = w.level(), n = w.dim();
  const std::vector<double> base(w.values().begin(), w.values().end());
  const bool a1 = (p == 1.0);
  const std::vector<double> dual = a1 ? std::vector<double>{} : powered(w, -1.0 / (p - 1.0));

  if (exec == Exec::Serial) {
    auto fn = [&](const std::vector<std::size_t>& cells) {
      const double aw = mean_of(base, cells);
      if (a1) {
        double lo = kInfinity;
        for (std::size_t c : cells) lo = std::min(lo, base[c]);
        return aw / lo;
      }
      return aw * std::pow(mean_of(dual, cells), p - 1.0);
    };
    return make_report(scan_levels_serial(n, L, maxlevel, fn), n, maxlevel);
  }

  const DyadicPyramid sw(n, L, base, DyadicPyramid::Reduce::Sum);
  const DyadicPyramid second(n, L, a1 ? base : dual, a1 ? DyadicPyramid::Reduce::Min : DyadicPyramid::Reduce::Sum);
  auto fn = [&](int j, std::size_t i) {
    const double cells = std::ldexp(1.0, n * (L - j));
    const double aw = sw.at(j, i) / cells;
    if (a1) return aw / second.at(j, i);
    return aw * std::pow(second.at(j, i) / cells, p - 1.0);
  };
  return make_report(scan_levels(n, maxlevel, fn), n, maxlevel);
}

ConstantReport rh_constant(const GridFunction& w, double q, int maxlevel, Exec exec) {
  if (!(q > 1.0)) throw DomainError("RH_q requires q > 1");
  require_positive(w);
  maxlevel = resolve_maxlevel(w, maxlevel);
  const int L = w.level(), n = w.dim();
  const bool sup_form = std::isinf(q);
  const std::vector<double> base(w.values().begin(), w.values().end());
  const std::vector<double> high = sup_form ? base : powered(w, q);

  if (exec == Exec::Serial) {
    auto fn = [&](const std::vector<std::size_t>& cells) {
      const double aw = mean_of(base, cells);
      if (sup_form) {
        double hi = 0.0;
        for (std::size_t c : cells) hi = std::max(hi, base[c]);
        return hi / aw;
      }
      return std::pow(mean_of(high, cells), 1.0 / q) / aw;
    };
    return make_report(scan_levels_serial(n, L, maxlevel, fn), n, maxlevel);
  }

  const DyadicPyramid sw(n, L, base, DyadicPyramid::Reduce::Sum);
  const DyadicPyramid top(n, L, high, sup_form ? DyadicPyramid::Reduce::Max : DyadicPyramid::Reduce::Sum);
  auto fn = [&](int j, std::size_t i) {
    const double cells = std::ldexp(1.0, n * (L - j));
    const double aw = sw.at(j, i) / cells;
    if (sup_form) return top.at(j, i) / aw;
    return std::pow(top.at(j, i) / cells, 1.0 / q) / aw;
  };
  return make_report(scan_levels(n, maxlevel, fn), n, maxlevel);
}

// ---------------------------------------------------------------------------

WeightTuple::WeightTuple(std::vector<GridFunction> weights, std::vector<double> exponents, double p0)
    : weights_(std::move(weights)), exponents_(std::move(exponents)), p0_(p0) {
  if (weights_.empty()) throw DimensionError("a weight tuple needs at least one weight");
  if (weights_.size() != exponents_.size())
    throw DimensionError("got " + std::to_string(weights_.size()) + " weights but " +
                         std::to_string(exponents_.size()) + " exponents");
  for (const auto& w : weights_) {
    require_same_shape(weights_.front(), w);
    require_positive(w);
  }
  if (!(p0_ >= 1.0)) throw DomainError("p0 must be >= 1");
  double inv = 0.0;
  for (double pi : exponents_) {
    if (!(pi > 1.0) || std::isinf(pi)) throw DomainError("each p_i must lie in (1, inf)");
    if (!(p0_ < pi)) throw DomainError("p0 must be smaller than every p_i");
    inv += 1.0 / pi;
  }
  p_ = 1.0 / inv;
}

GridFunction WeightTuple::nu() const {
  std::vector<double> v(weights_.front().size(), 1.0);
  for (std::size_t i = 0; i < weights_.size(); ++i)
    for (std::size_t c = 0; c < v.size(); ++c) v[c] *= std::pow(weights_[i][c], p_ / exponents_[i]);
  return GridFunction(dim(), level(), std::move(v));
}

WeightTuple WeightTuple::with_p0(double p0) const { return WeightTuple(weights_, exponents_, p0); }

ConstantReport multi_ap_constant(const WeightTuple& t, double r, int maxlevel, Exec exec) {
  if (!(r >= 1.0)) throw DomainError("the exponent divisor r must be >= 1");
  for (double pi : t.exponents())
    if (!(r < pi)) throw DomainError("r must be smaller than every p_i");
  const GridFunction& w0 = t.weight(0);
  maxlevel = resolve_maxlevel(w0, maxlevel);
  const int L = w0.level(), n = w0.dim(), m = t.arity();
  const double a = t.p() / r;
  std::vector<double> outer(m);
  std::vector<std::vector<double>> sigma(m);
  for (int i = 0; i < m; ++i) {
    const double ai = t.exponents()[i] / r;
    const double aic = conjugate(ai);
    outer[i] = a / aic;
    sigma[i] = powered(t.weight(i), 1.0 - aic);
  }
  const GridFunction nu = t.nu();
  const std::vector<double> nuv(nu.values().begin(), nu.values().end());

  if (exec == Exec::Serial) {
    auto fn = [&](const std::vector<std::size_t>& cells) {
      double v = mean_of(nuv, cells);
      for (int i = 0; i < m; ++i) v *= std::pow(mean_of(sigma[i], cells), outer[i]);
      return v;
    };
    return make_report(scan_levels_serial(n, L, maxlevel, fn), n, maxlevel);
  }

  const DyadicPyramid pn(n, L, nuv, DyadicPyramid::Reduce::Sum);
  std::vector<DyadicPyramid> ps;
  ps.reserve(m);
  for (int i = 0; i < m; ++i) ps.emplace_back(n, L, sigma[i], DyadicPyramid::Reduce::Sum);
  auto fn = [&](int j, std::size_t idx) {
    const double cells = std::ldexp(1.0, n * (L - j));
    double v = pn.at(j, idx) / cells;
    for (int i = 0; i < m; ++i) v *= std::pow(ps[i].at(j, idx) / cells, outer[i]);
    return v;
  };
  return make_report(scan_levels(n, maxlevel, fn), n, maxlevel);
}

std::vector<GridFunction> dual_weights(const WeightTuple& t) {
  std::vector<GridFunction> out;
  for (int i = 0; i < t.arity(); ++i) {
    const double e = 1.0 - conjugate(t.exponents()[i] / t.p0());
    out.emplace_back(t.dim(), t.level(), powered(t.weight(i), e));
  }
  return out;
}

DualityReport duality_inequality_check(const GridFunction& w, double p, double p0, int maxlevel, double tolerance) {
  if (!(p0 > 1.0)) throw DomainError("the duality inequality needs p0 > 1");
  const double p0c = conjugate(p0);
  if (!(p > 1.0 && p < p0c))
    throw DomainError("the duality inequality needs 1 < p < p0' = " + std::to_string(p0c) + ", got p = " +
                      std::to_string(p));
  require_positive(w);
  const double pc = conjugate(p);
  const GridFunction sigma(w.dim(), w.level(), powered(w, 1.0 - pc));
  DualityReport r;
  r.rh_exponent = conjugate(p0c / p);
  r.sigma_ap = ap_constant(sigma, pc / p0, maxlevel);
  r.w_rh = rh_constant(w, r.rh_exponent, maxlevel);
  r.w_ap = ap_constant(w, p, maxlevel);
  r.lhs = r.sigma_ap.value;
  r.rhs = std::pow(r.w_rh.value, 1.0 / (p - 1.0)) * std::pow(r.w_ap.value, 1.0 / (p - 1.0));
  r.holds = r.lhs <= r.rhs * (1.0 + tolerance);
  return r;
}

namespace {

// \int_0^d x^alpha dx for d >= 0.
double power_primitive(double d, double alpha) { return d <= 0.0 ? 0.0 : std::pow(d, alpha + 1.0) / (alpha + 1.0); }

// Exact average of dist_torus(x, c)^alpha over [a, b] subset of [0, 1) in 1D.
double torus_power_average_1d(double a, double b, double c, double alpha) {
  // Integrate over [a, b] split at the points where the torus distance to c
  // changes slope (c, c + 1/2, c - 1/2, and their integer shifts).
  std::vector<double> cuts{a, b};
  for (int s = -1; s <= 1; ++s)
    for (double pt : {c + s, c + s + 0.5, c + s - 0.5})
      if (pt > a && pt < b) cuts.push_back(pt);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (hi <= lo) continue;
    auto dist = [c](double x) {
      double d = std::fmod(std::abs(x - c), 1.0);
      return std::min(d, 1.0 - d);
    };
    // The distance is affine with slope +-1 on each piece.
    total += std::abs(power_primitive(dist(hi), alpha) - power_primitive(dist(lo), alpha));
  }
  return total / (b - a);
}

}  // namespace

GridFunction power_weight(double alpha, std::array<double, 2> center, int dim, int L) {
  check_shape(dim, L);
  if (!(alpha > -static_cast<double>(dim))) throw DomainError("power weight needs alpha > -n");
  const double h = std::ldexp(1.0, -L);
  const std::int64_t n = std::int64_t{1} << L;
  if (dim == 1) {
    return GridFunction::from_cells(1, L, [&](std::size_t i) {
      const double a = static_cast<double>(i) * h;
      return torus_power_average_1d(a, a + h, center[0], alpha);
    });
  }
  // 2D: composite midpoint rule on an 8x8 sub-lattice of each cell.
  constexpr int sub = 8;
  return GridFunction::from_cells(2, L, [&](std::size_t i) {
    const auto r = static_cast<std::int64_t>(i) / n, c = static_cast<std::int64_t>(i) % n;
    double s = 0.0;
    for (int u = 0; u < sub; ++u)
      for (int v = 0; v < sub; ++v) {
        const double x = (static_cast<double>(r) + (u + 0.5) / sub) * h;
        const double y = (static_cast<double>(c) + (v + 0.5) / sub) * h;
        double dx = std::fmod(std::abs(x - center[0]), 1.0), dy = std::fmod(std::abs(y - center[1]), 1.0);
        dx = std::min(dx, 1.0 - dx);
        dy = std::min(dy, 1.0 - dy);
        s += std::pow(std::hypot(dx, dy), alpha);
      }
    return s / (sub * sub);
  });
}

GridFunction clamp_weight(const GridFunction& w, std::ostream* warnings) {
  constexpr double floor_value = 1e-300;
  std::vector<double> v(w.values().begin(), w.values().end());
  std::size_t touched = 0;
  for (double& x : v) {
    if (!(x >= floor_value)) {
      x = floor_value;
      ++touched;
    }
  }
  if (touched > 0 && warnings)
    *warnings << "warning: clamped " << touched << " weight cell(s) below 1e-300\n";
  return GridFunction(w.dim(), w.level(), std::move(v));
}

}  // namespace sparselab
