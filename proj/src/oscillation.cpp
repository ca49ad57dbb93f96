#include "sparselab/oscillation.hpp"

#include <algorithm>
#include <cmath>

namespace sparselab {

namespace {

std::vector<double> restrict_to(const GridFunction& f, const DyadicCube& q) {
  if (q.dim != f.dim() || q.level > f.level()) throw DimensionError("cube " + q.str() + " does not fit the grid");
  std::vector<double> v;
  const auto cells = q.cells(f.level());
  v.reserve(cells.size());
  for (std::size_t c : cells) v.push_back(f[c]);
  return v;
}

// Index k of the rearrangement at t = lambda |Q| for N equal cells (1-based, clamped).
std::size_t rank_at(double lambda, std::size_t n) {
  const auto k = static_cast<std::size_t>(std::ceil(lambda * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n);
}

}  // namespace

double median_of(std::vector<double> values) {
  if (values.empty()) throw DimensionError("median of an empty set");
  const std::size_t pos = (values.size() + 1) / 2 - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(pos), values.end());
  return values[pos];
}

double median(const GridFunction& f, const DyadicCube& q) { return median_of(restrict_to(f, q)); }

double local_osc_of(std::vector<double> values, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0, 1)");
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  // The k-th largest |f - c| is <= s iff some window of n - k + 1 sorted
  // values fits in [c - s, c + s].
  const std::size_t window = n - rank_at(lambda, n) + 1;
  double best = INFINITY;
  for (std::size_t i = 0; i + window <= n; ++i) best = std::min(best, 0.5 * (values[i + window - 1] - values[i]));
  return best;
}

double local_osc(const GridFunction& f, const DyadicCube& q, double lambda) {
  return local_osc_of(restrict_to(f, q), lambda);
}

// ---------------------------------------------------------------------------

namespace {

struct LernerBuilder {
  const GridFunction& f;
  int L;
  double lambda;
  std::vector<char> in_e;
  std::vector<DyadicCube> cubes;
  std::vector<double> omega, threshold;
  std::vector<std::vector<DyadicCube>> stops;

  std::size_t count_e(const DyadicCube& r) const {
    std::size_t c = 0;
    for (std::size_t cell : r.cells(L)) c += in_e[cell];
    return c;
  }

  // Maximal subcubes R of q with |R n E| >= 2^{-n-1} |R|.
  void stopping(const DyadicCube& q, std::vector<DyadicCube>& out) const {
    for (const auto& r : q.children()) {
      const std::size_t hits = count_e(r);
      if (hits == 0) continue;
      if ((hits << (f.dim() + 1)) >= r.cell_count(L))
        out.push_back(r);
      else
        stopping(r, out);
    }
  }

  void build(const DyadicCube& q) {
    const auto cells = q.cells(L);
    std::vector<double> vals(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) vals[i] = f[cells[i]];
    const double m = median_of(vals);
    std::vector<double> dev(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) dev[i] = std::abs(vals[i] - m);
    const std::size_t k = rank_at(lambda, dev.size());
    std::vector<double> sorted = dev;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end(),
                     std::greater<>());
    const double t = sorted[k - 1];
    for (std::size_t i = 0; i < cells.size(); ++i) in_e[cells[i]] = dev[i] > t;

    std::vector<DyadicCube> kids;
    stopping(q, kids);
    for (std::size_t c : cells) in_e[c] = 0;

    const double w = local_osc_of(std::move(vals), lambda);
    if (w > 0.0) {
      cubes.push_back(q);
      omega.push_back(w);
      threshold.push_back(t);
      stops.push_back(kids);
    }
    for (const auto& r : kids) build(r);
  }
};

}  // namespace

LernerDecomposition lerner_decompose(const GridFunction& f, const DyadicCube& root) {
  if (root.dim != f.dim() || root.level > f.level()) throw DimensionError("cube does not fit the grid");
  LernerDecomposition d;
  d.root = root;
  d.lambda = std::ldexp(1.0, -f.dim() - 2);
  d.median = median(f, root);

  LernerBuilder b{f, f.level(), d.lambda, std::vector<char>(f.size(), 0), {}, {}, {}, {}};
  b.build(root);

  // Order by cube so that the output does not depend on the recursion order.
  std::vector<std::size_t> order(b.cubes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return b.cubes[x] < b.cubes[y]; });

  d.family.dim = f.dim();
  d.family.resolution = f.level();
  std::vector<char> taken(f.size(), 0);
  for (std::size_t i : order) {
    const DyadicCube& q = b.cubes[i];
    for (const auto& r : b.stops[i])
      for (std::size_t c : r.cells(f.level())) taken[c] = 1;
    std::vector<std::size_t> witness;
    for (std::size_t c : q.cells(f.level()))
      if (!taken[c]) witness.push_back(c);
    for (const auto& r : b.stops[i])
      for (std::size_t c : r.cells(f.level())) taken[c] = 0;
    d.family.cubes.push_back(q);
    d.family.witness.push_back(std::move(witness));
    d.omega.push_back(b.omega[i]);
    d.threshold.push_back(b.threshold[i]);
  }
  return d;
}

GridFunction lerner_majorant(const LernerDecomposition& d, int dim, int L) {
  std::vector<double> out(GridFunction::cells_for(dim, L), 0.0);
  for (std::size_t i = 0; i < d.family.cubes.size(); ++i)
    for (std::size_t c : d.family.cubes[i].cells(L)) out[c] += 2.0 * d.omega[i];
  return GridFunction(dim, L, std::move(out));
}

LernerCheck verify_lerner(const GridFunction& f, const LernerDecomposition& d, double tolerance) {
  LernerCheck r;
  const GridFunction maj = lerner_majorant(d, f.dim(), f.level());
  r.max_excess = -INFINITY;
  for (std::size_t c : d.root.cells(f.level())) {
    const double lhs = std::abs(f[c] - d.median);
    const double excess = lhs - maj[c];
    if (excess > r.max_excess) {
      r.max_excess = excess;
      r.worst_cell = c;
    }
    if (excess > tolerance * (1.0 + maj[c])) r.ok = false;
  }
  r.sparse = verify_sparse(d.family);
  r.ok = r.ok && r.sparse.ok;
  return r;
}

// ---------------------------------------------------------------------------

OscillationProfile osc_profile_from(const GridFunction& Tf, std::span<const GridFunction> f, const DyadicCube& q,
                                    double lambda, double p0, double delta0) {
  if (!(delta0 > 0.0)) throw DomainError("the decay exponent delta0 must be positive");
  if (!(p0 >= 1.0)) throw DomainError("p0 must be >= 1");
  if (f.empty()) throw DomainError("need at least one input function");
  for (const auto& g : f) require_same_shape(Tf, g);
  OscillationProfile p;
  p.cube = q;
  p.lambda = lambda;
  p.p0 = p0;
  p.delta0 = delta0;
  p.lhs = local_osc(Tf, q, lambda);
  const int L = Tf.level();
  for (int l = 0;; ++l) {
    const CellSet s = dilate(q, l, L);
    double v = 1.0;
    for (const auto& g : f) v *= average(g, s, p0);
    p.ring_values.push_back(v);
    p.rhs += std::exp2(-l * delta0) * v;
    if (dilate_saturates(q, l)) {
      p.truncated = true;
      break;
    }
  }
  p.ratio = p.rhs > 0.0 ? p.lhs / p.rhs : (p.lhs > 0.0 ? INFINITY : 0.0);
  return p;
}

OscillationProfile osc_profile(const Operator& op, std::span<const GridFunction> f, const DyadicCube& q,
                               double lambda, double p0, double delta0) {
  if (static_cast<int>(f.size()) != op.arity()) throw DimensionError("operator arity does not match the inputs");
  return osc_profile_from(op.apply(f), f, q, lambda, p0, delta0);
}

}  // namespace sparselab
