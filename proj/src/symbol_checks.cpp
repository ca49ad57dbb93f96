#include <omp.h>

#include <algorithm>
#include <cmath>

#include "sparselab/kernels.hpp"

namespace sparselab {

namespace {

// Weights of the k-fold central difference (f(x+1) - f(x-1))/2 at offsets k - 2i.
std::vector<std::pair<int, double>> central_stencil(int k) {
  std::vector<std::pair<int, double>> out;
  double binom = 1.0;
  for (int i = 0; i <= k; ++i) {
    out.emplace_back(k - 2 * i, std::ldexp((i % 2 ? -1.0 : 1.0) * binom, -k));
    binom = binom * (k - i) / (i + 1);
  }
  return out;
}

struct Derivative {
  std::vector<std::pair<int, double>> sx, sy;
  int reach_x = 0, reach_y = 0;

  Derivative(int a, int b) : sx(central_stencil(a)), sy(central_stencil(b)), reach_x(a), reach_y(b) {}

  // nullopt-like: returns false when the stencil touches the origin.
  bool eval(const Symbol& m, std::int64_t x, std::int64_t y, cplx& out) const {
    cplx s = 0.0;
    for (const auto& [ox, wx] : sx)
      for (const auto& [oy, wy] : sy) {
        const std::int64_t px = x + ox, py = y + oy;
        if (px == 0 && py == 0) return false;
        s += wx * wy * m(static_cast<double>(px), static_cast<double>(py));
      }
    out = s;
    return true;
  }
};

std::vector<std::array<int, 2>> multi_indices(int dims, int order) {
  std::vector<std::array<int, 2>> out;
  for (int total = 0; total <= order; ++total)
    for (int a = total; a >= 0; --a) {
      const int b = total - a;
      if (dims == 1 && b != 0) continue;
      out.push_back({a, b});
    }
  return out;
}

// sup over rings r < rlevels of (R^{s|a|-n} sum_{R <= |xi| < 2R} |d^a m|^s)^{1/s}.
double msl_term(const Symbol& m, const Derivative& d, int order, double s, int rlevels) {
  const int n = m.freq_dim();
  double best = 0.0;
  for (int r = 0; r < rlevels; ++r) {
    const double R = std::ldexp(1.0, r);
    const auto hi = static_cast<std::int64_t>(2 * R);
    double sum = 0.0;
    const std::int64_t ylo = n == 1 ? 0 : -hi, yhi = n == 1 ? 0 : hi;
#pragma omp parallel for schedule(static) reduction(+ : sum)
    for (std::int64_t x = -hi; x <= hi; ++x)
      for (std::int64_t y = ylo; y <= yhi; ++y) {
        const double norm = std::hypot(static_cast<double>(x), static_cast<double>(y));
        if (norm < R || norm >= 2 * R) continue;
        cplx v;
        if (!d.eval(m, x, y, v)) continue;
        sum += std::pow(std::abs(v), s);
      }
    best = std::max(best, std::pow(std::pow(R, s * order - n) * sum, 1.0 / s));
  }
  return best;
}

void require_window(const Symbol& m, int rlevels, int order) {
  const std::int64_t reach = (std::int64_t{1} << rlevels) + order;
  if (!m.defined_at(reach, m.freq_dim() == 1 ? 0 : reach) || !m.defined_at(-reach, m.freq_dim() == 1 ? 0 : -reach))
    throw DomainError("difference stencil leaves the sampled frequency window");
}

bool stable_ratio(double coarse, double fine) {
  if (coarse == 0.0 && fine == 0.0) return true;
  if (coarse == 0.0 || fine == 0.0) return std::max(coarse, fine) < 1e-12;
  const double q = fine / coarse;
  return q >= 0.5 && q <= 2.0;
}

}  // namespace

SymbolReport check_Msl(const Symbol& m, double s, int l, int rlevels) {
  if (m.bilinear()) throw DimensionError("M(s,l) applies to linear symbols");
  if (!(s > 1.0 && s <= 2.0)) throw DomainError("s must lie in (1, 2]");
  if (l < 0) throw DomainError("order l must be nonnegative");
  if (rlevels < 1) throw DomainError("need at least one ring");
  SymbolReport rep;
  rep.symbol = m.name();
  rep.s = s;
  rep.order = l;
  rep.rlevels = rlevels;
  const bool sampled = m.is_sampled();
  const int other = sampled ? std::max(1, rlevels - 2) : rlevels + 2;
  require_window(m, std::max(rlevels, other), l);
  for (const auto& a : multi_indices(m.freq_dim(), l)) {
    const Derivative d(a[0], a[1]);
    SymbolTerm t;
    t.alpha = a;
    t.value = msl_term(m, d, a[0] + a[1], s, rlevels);
    t.refined = msl_term(m, d, a[0] + a[1], s, other);
    t.finite = std::isfinite(t.value) && std::isfinite(t.refined);
    t.stable = t.finite && stable_ratio(sampled ? t.refined : t.value, sampled ? t.value : t.refined);
    rep.member = rep.member && t.finite && t.stable;
    rep.terms.push_back(t);
  }
  return rep;
}

SymbolReport check_hormander_bilinear(const Symbol& m, int order, int rlevels) {
  if (!m.bilinear()) throw DimensionError("the bilinear condition needs a bilinear symbol");
  if (order < 0) throw DomainError("order must be nonnegative");
  if (rlevels < 1) throw DomainError("need at least one level");
  SymbolReport rep;
  rep.symbol = m.name();
  rep.order = order;
  rep.rlevels = rlevels;
  const bool sampled = m.is_sampled();
  const int other = sampled ? std::max(1, rlevels - 2) : rlevels + 2;
  require_window(m, std::max(rlevels, other), order);

  auto box_sup = [&](const Derivative& d, int total, int levels) {
    const std::int64_t hi = std::int64_t{1} << levels;
    double best = 0.0;
#pragma omp parallel for schedule(static) reduction(max : best)
    for (std::int64_t x = -hi + 1; x < hi; ++x)
      for (std::int64_t y = -hi + 1; y < hi; ++y) {
        if (x == 0 && y == 0) continue;
        cplx v;
        if (!d.eval(m, x, y, v)) continue;
        const double w = std::pow(static_cast<double>(std::abs(x) + std::abs(y)), total);
        best = std::max(best, w * std::abs(v));
      }
    return best;
  };

  for (const auto& a : multi_indices(2, order)) {
    const Derivative d(a[0], a[1]);
    SymbolTerm t;
    t.alpha = a;
    t.value = box_sup(d, a[0] + a[1], rlevels);
    t.refined = box_sup(d, a[0] + a[1], other);
    t.finite = std::isfinite(t.value) && std::isfinite(t.refined);
    t.stable = t.finite && stable_ratio(sampled ? t.refined : t.value, sampled ? t.value : t.refined);
    rep.member = rep.member && t.finite && t.stable;
    rep.terms.push_back(t);
  }
  return rep;
}

}  // namespace sparselab
