#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "detail.hpp"
#include "sparselab/sparse.hpp"

namespace sparselab {

namespace {

// Pointwise sup of num / den; cells where only num vanishes are skipped,
// cells where only den vanishes give infinity.
double ratio_sup(const GridFunction& num, const GridFunction& den) {
  double best = 0.0;
  for (std::size_t c = 0; c < num.size(); ++c) {
    if (num[c] == 0.0) continue;
    if (den[c] == 0.0) return std::numeric_limits<double>::infinity();
    best = std::max(best, num[c] / den[c]);
  }
  return best;
}

struct Selector {
  const CarlesonSequence& a;
  const detail::AveragePyramids& pyr;
  int k;
  double cstar;
  std::vector<std::vector<char>> has_mass;  // subtree of the cube carries a nonzero alpha
  std::vector<DyadicCube> selected;

  void visit(int d, std::size_t local, double delta) {
    const DyadicCube P = a.cube_at(d, local);
    const double prod = pyr.product(P);
    const int step = std::max(k, 1);
    if (d + step > a.maxdepth()) {
      // No coefficient sits k levels below P; only the k = 0 test at P itself remains.
      if (k == 0 && delta - prod * a.depth_values(d)[local] < 0.0) selected.push_back(P);
      return;
    }
    std::vector<std::size_t> next;
    next.reserve(std::size_t{1} << (a.dim() * step));
    collect(d, local, step, next);
    double gamma = 0.0;
    if (k == 0) {
      gamma = a.depth_values(d)[local];
    } else {
      for (std::size_t r : next) gamma = std::max(gamma, a.depth_values(d + k)[r]);
    }
    const bool pick = delta - prod * gamma < 0.0;
    if (pick) selected.push_back(P);
    for (std::size_t r : next) {
      const double alpha = k == 0 ? a.depth_values(d)[local] : a.depth_values(d + k)[r];
      const double child = pick ? delta + (cstar - alpha) * prod : delta - alpha * prod;
      if (child >= 0.0 && !has_mass[d + step][r]) continue;
      visit(d + step, r, child);
    }
  }

  void collect(int d, std::size_t local, int step, std::vector<std::size_t>& out) const {
    const std::size_t span = std::size_t{1} << step;
    if (a.dim() == 1) {
      for (std::size_t t = 0; t < span; ++t) out.push_back((local << step) + t);
      return;
    }
    const std::size_t n = std::size_t{1} << d, r = local / n, c = local % n, m = n << step;
    for (std::size_t u = 0; u < span; ++u)
      for (std::size_t v = 0; v < span; ++v) out.push_back(((r << step) + u) * m + (c << step) + v);
  }
};

std::vector<std::vector<char>> subtree_mass(const CarlesonSequence& a) {
  const auto packing = packing_ratios(a);
  std::vector<std::vector<char>> out(packing.size());
  for (std::size_t d = 0; d < packing.size(); ++d) {
    out[d].resize(packing[d].size());
    for (std::size_t i = 0; i < packing[d].size(); ++i) out[d][i] = packing[d][i] > 0.0;
  }
  return out;
}

}  // namespace

SelectionResult select_sparse(const CarlesonSequence& a, int k, double p0, std::span<const GridFunction> f,
                              double cstar) {
  if (k < 0) throw DomainError("complexity k must be nonnegative");
  if (!(cstar > 0.0)) throw DomainError("C* must be positive");
  if (f.empty()) throw DomainError("need at least one input function");
  detail::require_nonnegative(f, "selection");
  const detail::AveragePyramids pyr(f, p0);
  if (a.finest_level() > pyr.resolution()) throw DimensionError("sequence is finer than the functions");

  Selector s{a, pyr, k, cstar, subtree_mass(a), {}};
  s.visit(0, 0, 0.0);

  SelectionResult r;
  r.cstar = cstar;
  r.selected = s.selected;
  std::sort(r.selected.begin(), r.selected.end());
  r.witness = greedy_witness(r.selected, pyr.resolution());

  const GridFunction lhs = eval_sparse_A(a, k, p0, f);
  const GridFunction rhs = eval_sparse_A(indicator_sequence(r.selected, a.root(), a.maxdepth()), 0, p0, f);
  r.pointwise_constant = ratio_sup(lhs, rhs);
  return r;
}

DominationReport dominate(const CarlesonSequence& a, int k, double p0, std::span<const GridFunction> f, double p,
                          const GridFunction* w, std::optional<double> cstar, std::uint64_t seed) {
  if (f.empty()) throw DomainError("need at least one input function");
  detail::require_nonnegative(f, "domination");
  DominationReport r;
  r.cstar = cstar ? *cstar : default_cstar(a, k, p0, static_cast<int>(f.size()), 32, seed);
  if (k == 0) {
    r.pieces.push_back(SlicePiece{0, a.root(), a});
  } else {
    r.pieces = slice(a, k);
  }
  r.selections.resize(r.pieces.size());
  const auto count = static_cast<std::int64_t>(r.pieces.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i)
    r.selections[i] = select_sparse(r.pieces[i].seq, k, p0, f, r.cstar);
  for (const auto& s : r.selections) r.all_sparse = r.all_sparse && s.witness.ok;

  const GridFunction lhs = eval_sparse_A(a, k, p0, f);
  const GridFunction rhs = dominating_sum(r, p0, f);
  r.pointwise_ratio = ratio_sup(lhs, rhs);
  const GridFunction one = GridFunction::constant(f[0].dim(), f[0].level(), 1.0);
  const GridFunction& weight = w ? *w : one;
  r.lhs_norm = weighted_norm(lhs, p, weight);
  r.rhs_norm = weighted_norm(rhs, p, weight);
  r.norm_ratio = r.rhs_norm > 0.0 ? r.lhs_norm / r.rhs_norm : (r.lhs_norm > 0.0 ? INFINITY : 0.0);
  return r;
}

GridFunction dominating_sum(const DominationReport& r, double p0, std::span<const GridFunction> f) {
  if (f.empty()) throw DomainError("need at least one input function");
  const int L = f[0].level(), dim = f[0].dim();
  CarlesonSequence all(DyadicCube::root(dim), L);
  for (const auto& s : r.selections)
    for (const auto& q : s.selected) all.add(q, 1.0);
  return eval_sparse_A(all, 0, p0, f);
}

}  // namespace sparselab
