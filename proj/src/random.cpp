#include "sparselab/random.hpp"

#include <algorithm>
#include <cmath>

namespace sparselab {

Rng trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32), 0x5eedu};
  return Rng(seq);
}

GridFunction random_function(int dim, int L, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return GridFunction::from_cells(dim, L, [&](std::size_t) { return u(rng); });
}

GridFunction random_weight(int dim, int L, Rng& rng, double lo_exp, double hi_exp) {
  std::uniform_real_distribution<double> u(lo_exp, hi_exp);
  return GridFunction::from_cells(dim, L, [&](std::size_t) { return std::exp2(u(rng)); });
}

CarlesonSequence random_carleson(const DyadicCube& root, int maxdepth, Rng& rng, double density) {
  CarlesonSequence a(root, maxdepth);
  std::bernoulli_distribution keep(density);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int d = 0; d <= maxdepth; ++d)
    for (double& v : a.depth_values(d)) v = keep(rng) ? u(rng) : 0.0;
  if (a.is_zero()) a.set(root, 1.0);
  const double worst = verify_carleson(a).worst_ratio;
  if (worst > 0.0) a.scale(1.0 / worst);
  return a;
}

namespace {

void grow(const DyadicCube& q, int L, Rng& rng, double keep, std::vector<DyadicCube>& out) {
  out.push_back(q);
  if (q.level >= L) return;
  // Continue into at most half of the children so that E_Q keeps half of Q.
  auto kids = q.children();
  std::shuffle(kids.begin(), kids.end(), rng);
  std::bernoulli_distribution coin(keep);
  const std::size_t cap = kids.size() / 2;
  std::size_t used = 0;
  for (const auto& c : kids) {
    if (used == cap) break;
    if (!coin(rng)) continue;
    ++used;
    // Skip a random number of levels before the next selected cube.
    DyadicCube next = c;
    std::uniform_int_distribution<int> skip(0, std::max(0, std::min(2, L - c.level)));
    for (int s = skip(rng); s > 0 && next.level < L; --s) {
      auto g = next.children();
      next = g[std::uniform_int_distribution<std::size_t>(0, g.size() - 1)(rng)];
    }
    grow(next, L, rng, keep, out);
  }
}

}  // namespace

std::vector<DyadicCube> random_sparse_cubes(int dim, int L, Rng& rng, double keep) {
  std::vector<DyadicCube> out;
  grow(DyadicCube::root(dim), L, rng, keep, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sparselab
