#include "sparselab/sparse.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detail.hpp"
#include "sparselab/random.hpp"

namespace sparselab {

// ---------------------------------------------------------------------------
// CarlesonSequence

CarlesonSequence::CarlesonSequence(DyadicCube root, int maxdepth) : root_(root), maxdepth_(maxdepth) {
  if (maxdepth < 0) throw DomainError("maxdepth must be nonnegative");
  check_shape(root.dim, root.level + maxdepth);
  coef_.resize(maxdepth + 1);
  for (int d = 0; d <= maxdepth; ++d) coef_[d].assign(GridFunction::cells_for(root.dim, d), 0.0);
}

bool CarlesonSequence::in_tree(const DyadicCube& q) const {
  if (q.dim != root_.dim || q.level < root_.level || q.level > root_.level + maxdepth_) return false;
  return q.ancestor(q.level - root_.level) == root_;
}

std::size_t CarlesonSequence::local_index(const DyadicCube& q) const {
  if (!in_tree(q)) throw DomainError("cube " + q.str() + " is outside the tree of " + root_.str());
  const int d = q.level - root_.level;
  const std::int64_t u0 = q.index[0] - (root_.index[0] << d);
  if (root_.dim == 1) return static_cast<std::size_t>(u0);
  const std::int64_t u1 = q.index[1] - (root_.index[1] << d);
  return static_cast<std::size_t>((u0 << d) + u1);
}

DyadicCube CarlesonSequence::cube_at(int depth, std::size_t local) const {
  DyadicCube q{root_.dim, root_.level + depth, {0, 0}};
  const auto l = static_cast<std::int64_t>(local);
  if (root_.dim == 1) {
    q.index[0] = (root_.index[0] << depth) + l;
  } else {
    const std::int64_t mask = (std::int64_t{1} << depth) - 1;
    q.index[0] = (root_.index[0] << depth) + (l >> depth);
    q.index[1] = (root_.index[1] << depth) + (l & mask);
  }
  return q;
}

double CarlesonSequence::alpha(const DyadicCube& q) const {
  if (!in_tree(q)) return 0.0;
  return coef_[q.level - root_.level][local_index(q)];
}

void CarlesonSequence::set(const DyadicCube& q, double value) {
  if (!(value >= 0.0)) throw DomainError("Carleson coefficients must be nonnegative");
  coef_[q.level - root_.level][local_index(q)] = value;
}

void CarlesonSequence::add(const DyadicCube& q, double value) {
  set(q, alpha(q) + value);
}

bool CarlesonSequence::is_zero() const { return nonzero_count() == 0; }

std::size_t CarlesonSequence::nonzero_count() const {
  std::size_t n = 0;
  for (const auto& level : coef_)
    for (double v : level) n += (v != 0.0);
  return n;
}

std::vector<DyadicCube> CarlesonSequence::support() const {
  std::vector<DyadicCube> out;
  for (int d = 0; d <= maxdepth_; ++d)
    for (std::size_t i = 0; i < coef_[d].size(); ++i)
      if (coef_[d][i] != 0.0) out.push_back(cube_at(d, i));
  return out;
}

void CarlesonSequence::scale(double s) {
  if (!(s >= 0.0)) throw DomainError("scale factor must be nonnegative");
  for (auto& level : coef_)
    for (double& v : level) v *= s;
}

CarlesonSequence indicator_sequence(std::span<const DyadicCube> cubes, const DyadicCube& root, int maxdepth) {
  CarlesonSequence a(root, maxdepth);
  for (const auto& q : cubes) a.set(q, 1.0);
  return a;
}

// ---------------------------------------------------------------------------
// Carleson packing

namespace {

// Sum of the 2^n children of a depth-d local index, read from depth d+1.
template <class Fn>
void for_children(int dim, int d, std::size_t local, Fn&& fn) {
  if (dim == 1) {
    fn(2 * local);
    fn(2 * local + 1);
    return;
  }
  const std::size_t n = std::size_t{1} << d;
  const std::size_t r = local / n, c = local % n, m = 2 * n;
  fn(2 * r * m + 2 * c);
  fn(2 * r * m + 2 * c + 1);
  fn((2 * r + 1) * m + 2 * c);
  fn((2 * r + 1) * m + 2 * c + 1);
}

// Descendants k levels below a depth-d local index.
template <class Fn>
void for_descendants(int dim, int d, std::size_t local, int k, Fn&& fn) {
  const std::size_t span = std::size_t{1} << k;
  if (dim == 1) {
    for (std::size_t t = 0; t < span; ++t) fn((local << k) + t);
    return;
  }
  const std::size_t n = std::size_t{1} << d;
  const std::size_t r = local / n, c = local % n, m = n << k;
  for (std::size_t u = 0; u < span; ++u)
    for (std::size_t v = 0; v < span; ++v) fn(((r << k) + u) * m + (c << k) + v);
}

}  // namespace

std::vector<std::vector<double>> packing_ratios(const CarlesonSequence& a) {
  const int D = a.maxdepth(), n = a.dim();
  std::vector<std::vector<double>> s(D + 1);
  for (int d = D; d >= 0; --d) {
    const auto alpha = a.depth_values(d);
    s[d].assign(alpha.begin(), alpha.end());
    for (double v : alpha)
      if (v < 0.0) throw DomainError("Carleson coefficients must be nonnegative");
    if (d == D) continue;
    const double shrink = std::ldexp(1.0, -n);
    for (std::size_t i = 0; i < s[d].size(); ++i) {
      double kids = 0.0;
      for_children(n, d, i, [&](std::size_t c) { kids += s[d + 1][c]; });
      s[d][i] += shrink * kids;
    }
  }
  return s;
}

CarlesonCheck verify_carleson(const CarlesonSequence& a) {
  const auto s = packing_ratios(a);
  CarlesonCheck r;
  r.worst = a.root();
  r.worst_ratio = -1.0;
  for (int d = 0; d <= a.maxdepth(); ++d)
    for (std::size_t i = 0; i < s[d].size(); ++i)
      if (s[d][i] > r.worst_ratio) {
        r.worst_ratio = s[d][i];
        r.worst = a.cube_at(d, i);
      }
  r.ok = r.worst_ratio <= 1.0 + 1e-12;
  return r;
}

// ---------------------------------------------------------------------------
// Sparse families

SparseCheck verify_sparse(const SparseFamily& s) {
  SparseCheck out;
  if (s.witness.size() != s.cubes.size()) {
    out.ok = false;
    out.reason = "witness list does not match the cube list";
    return out;
  }
  const int L = s.resolution;
  std::vector<int> owner(GridFunction::cells_for(s.dim, L), -1);
  for (std::size_t q = 0; q < s.cubes.size(); ++q) {
    const DyadicCube& Q = s.cubes[q];
    auto fail = [&](std::string why) {
      out.ok = false;
      out.reason = std::move(why);
      out.offending = Q;
    };
    if (Q.dim != s.dim || Q.level > L) {
      fail("cube " + Q.str() + " does not fit the resolution");
      return out;
    }
    for (std::size_t cell : s.witness[q]) {
      if (cell >= owner.size() || detail::ancestor_linear(s.dim, L, cell, Q.level) != Q.linear()) {
        fail("witness of " + Q.str() + " leaves the cube");
        return out;
      }
      if (owner[cell] >= 0) {
        fail("witnesses of " + Q.str() + " and " + s.cubes[owner[cell]].str() + " overlap");
        return out;
      }
      owner[cell] = static_cast<int>(q);
    }
    if (2 * s.witness[q].size() < Q.cell_count(L)) {
      fail("witness of " + Q.str() + " covers less than half of it");
      return out;
    }
  }
  return out;
}

WitnessResult greedy_witness(std::vector<DyadicCube> cubes, int L) {
  WitnessResult r;
  std::sort(cubes.begin(), cubes.end());
  cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
  const int dim = cubes.empty() ? 1 : cubes.front().dim;
  r.family.dim = dim;
  r.family.resolution = L;
  r.family.cubes = cubes;
  r.family.witness.assign(cubes.size(), {});
  r.ok = true;
  if (cubes.empty()) return r;

  // Dense per-level lookup from cube to its position in the sorted list.
  std::vector<std::vector<int>> slot(L + 1);
  for (std::size_t q = 0; q < cubes.size(); ++q) {
    const auto& Q = cubes[q];
    if (Q.dim != dim || Q.level > L) throw DimensionError("cube " + Q.str() + " does not fit the resolution");
    auto& lvl = slot[Q.level];
    if (lvl.empty()) lvl.assign(GridFunction::cells_for(dim, Q.level), -1);
    lvl[Q.linear()] = static_cast<int>(q);
  }
  // Each cell belongs to the deepest listed cube that contains it.
  const std::size_t ncells = GridFunction::cells_for(dim, L);
  for (std::size_t cell = 0; cell < ncells; ++cell)
    for (int j = L; j >= 0; --j) {
      if (slot[j].empty()) continue;
      const int q = slot[j][detail::ancestor_linear(dim, L, cell, j)];
      if (q >= 0) {
        r.family.witness[q].push_back(cell);
        break;
      }
    }
  for (std::size_t q = 0; q < cubes.size(); ++q) {
    const double frac =
        static_cast<double>(r.family.witness[q].size()) / static_cast<double>(cubes[q].cell_count(L));
    r.worst_fraction = std::min(r.worst_fraction, frac);
    if (r.ok && 2 * r.family.witness[q].size() < cubes[q].cell_count(L)) {
      r.ok = false;
      r.offending = cubes[q];
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Sparse operators

namespace {

void check_operator_inputs(const CarlesonSequence& a, std::span<const GridFunction> f, double p0) {
  if (f.empty()) throw DomainError("need at least one input function");
  if (!(p0 >= 1.0)) throw DomainError("p0 must be >= 1");
  for (const auto& g : f) require_same_shape(f[0], g);
  if (f[0].dim() != a.dim()) throw DimensionError("sequence and functions have different dimensions");
  if (a.finest_level() > f[0].level())
    throw DimensionError("sequence reaches level " + std::to_string(a.finest_level()) +
                         " but the functions only resolve level " + std::to_string(f[0].level()));
}

// Adds coefficient tables c[d][local] down to the cells inside the root.
GridFunction push_down(const CarlesonSequence& shape, const std::vector<std::vector<double>>& c, int L) {
  const int dim = shape.dim();
  const DyadicCube& root = shape.root();
  std::vector<double> out(GridFunction::cells_for(dim, L), 0.0);
  const auto ncells = static_cast<std::int64_t>(out.size());
  const std::int64_t side = std::int64_t{1} << L;
#pragma omp parallel for schedule(static)
  for (std::int64_t cell = 0; cell < ncells; ++cell) {
    const std::int64_t r = dim == 1 ? cell : cell / side;
    const std::int64_t col = dim == 1 ? 0 : cell % side;
    const int top = L - root.level;
    if ((r >> top) != root.index[0] || (dim == 2 && (col >> top) != root.index[1])) continue;
    double s = 0.0;
    for (int d = 0; d <= shape.maxdepth(); ++d) {
      if (c[d].empty()) continue;
      const int sh = L - root.level - d;
      const std::int64_t u0 = (r >> sh) - (root.index[0] << d);
      std::size_t local = static_cast<std::size_t>(u0);
      if (dim == 2) local = static_cast<std::size_t>((u0 << d) + ((col >> sh) - (root.index[1] << d)));
      s += c[d][local];
    }
    out[cell] = s;
  }
  return GridFunction(dim, L, std::move(out));
}

double direct_average(const GridFunction& f, const std::vector<std::size_t>& cells, double p0) {
  double s = 0.0;
  for (std::size_t c : cells) s += std::pow(std::abs(f[c]), p0);
  return std::pow(s / static_cast<double>(cells.size()), 1.0 / p0);
}

CarlesonSequence family_sequence(const SparseFamily& s, const GridFunction& f) {
  CarlesonSequence a(DyadicCube::root(f.dim()), f.level());
  for (const auto& q : s.cubes) a.set(q, 1.0);
  return a;
}

}  // namespace

GridFunction eval_sparse_A(const CarlesonSequence& a, int k, double p0, std::span<const GridFunction> f, Exec exec) {
  check_operator_inputs(a, f, p0);
  if (k < 0) throw DomainError("complexity k must be nonnegative");
  const int L = f[0].level(), dim = a.dim(), m = static_cast<int>(f.size());

  if (exec == Exec::Serial) {
    std::vector<double> out(f[0].size(), 0.0);
    for (int d = k; d <= a.maxdepth(); ++d)
      for (std::size_t i = 0; i < a.depth_values(d).size(); ++i) {
        const double alpha = a.depth_values(d)[i];
        if (alpha == 0.0) continue;
        const DyadicCube q = a.cube_at(d, i);
        const auto anc = q.ancestor(k).cells(L);
        double v = alpha;
        for (int j = 0; j < m; ++j) v *= direct_average(f[j], anc, p0);
        for (std::size_t c : q.cells(L)) out[c] += v;
      }
    return GridFunction(dim, L, std::move(out));
  }

  const detail::AveragePyramids pyr(f, p0);
  std::vector<std::vector<double>> c(a.maxdepth() + 1);
  for (int d = k; d <= a.maxdepth(); ++d) {
    const auto alpha = a.depth_values(d);
    c[d].assign(alpha.size(), 0.0);
    const auto count = static_cast<std::int64_t>(alpha.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      if (alpha[i] == 0.0) continue;
      const DyadicCube anc = a.cube_at(d, static_cast<std::size_t>(i)).ancestor(k);
      c[d][i] = alpha[i] * pyr.product(anc);
    }
  }
  return push_down(a, c, L);
}

GridFunction eval_sparse_A(const SparseFamily& s, int k, double p0, std::span<const GridFunction> f, Exec exec) {
  if (f.empty()) throw DomainError("need at least one input function");
  return eval_sparse_A(family_sequence(s, f[0]), k, p0, f, exec);
}

GridFunction eval_sparse_T(const CarlesonSequence& a, int k, double p0, std::span<const GridFunction> f, Exec exec) {
  check_operator_inputs(a, f, p0);
  if (k < 0) throw DomainError("complexity k must be nonnegative");
  const int L = f[0].level(), dim = a.dim(), m = static_cast<int>(f.size());

  if (exec == Exec::Serial) {
    std::vector<double> out(f[0].size(), 0.0);
    for (int d = 0; d <= a.maxdepth(); ++d)
      for (std::size_t i = 0; i < a.depth_values(d).size(); ++i) {
        const double alpha = a.depth_values(d)[i];
        if (alpha == 0.0) continue;
        const DyadicCube q = a.cube_at(d, i);
        const CellSet big = dilate(q, k, L);
        double v = alpha;
        for (int j = 0; j < m; ++j) v *= average(f[j], big, p0);
        for (std::size_t c : q.cells(L)) out[c] += v;
      }
    return GridFunction(dim, L, std::move(out));
  }

  std::vector<std::vector<double>> c(a.maxdepth() + 1);
  for (int d = 0; d <= a.maxdepth(); ++d) {
    const auto alpha = a.depth_values(d);
    c[d].assign(alpha.size(), 0.0);
    const auto count = static_cast<std::int64_t>(alpha.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < count; ++i) {
      if (alpha[i] == 0.0) continue;
      const CellSet big = dilate(a.cube_at(d, static_cast<std::size_t>(i)), k, L);
      double v = alpha[i];
      for (int j = 0; j < m; ++j) v *= average(f[j], big, p0);
      c[d][i] = v;
    }
  }
  return push_down(a, c, L);
}

GridFunction eval_sparse_T(const SparseFamily& s, int k, double p0, std::span<const GridFunction> f, Exec exec) {
  if (f.empty()) throw DomainError("need at least one input function");
  return eval_sparse_T(family_sequence(s, f[0]), k, p0, f, exec);
}

// ---------------------------------------------------------------------------
// Slicing and derived sequences

std::vector<SlicePiece> slice(const CarlesonSequence& a, int k) {
  if (k < 1) throw DomainError("slicing needs k >= 1");
  std::vector<SlicePiece> out;
  const int D = a.maxdepth();
  for (int ell = 0; ell < k && ell <= D; ++ell) {
    const std::size_t count = a.depth_values(ell).size();
    for (std::size_t p = 0; p < count; ++p) {
      SlicePiece piece{ell, a.cube_at(ell, p), CarlesonSequence(a.cube_at(ell, p), D - ell)};
      bool any = false;
      for (int r = k; r <= D - ell; r += k) {
        auto dst = piece.seq.depth_values(r);
        const auto src = a.depth_values(ell + r);
        std::size_t t = 0;
        for_descendants(a.dim(), ell, p, r, [&](std::size_t g) {
          dst[t] = src[g];
          any = any || src[g] != 0.0;
          ++t;
        });
      }
      if (any) out.push_back(std::move(piece));
    }
  }
  return out;
}

CarlesonSequence beta_sequence(const CarlesonSequence& a, int k) {
  if (k < 0) throw DomainError("k must be nonnegative");
  if (k == 0) return a;
  const int D = a.maxdepth() - k;
  if (D < 0) return CarlesonSequence(a.root(), 0);
  CarlesonSequence b(a.root(), D);
  const double shrink = std::ldexp(1.0, -a.dim() * k);
  for (int d = 0; d <= D; ++d) {
    auto dst = b.depth_values(d);
    const auto src = a.depth_values(d + k);
    for (std::size_t i = 0; i < dst.size(); ++i) {
      double s = 0.0;
      for_descendants(a.dim(), d, i, k, [&](std::size_t g) { s += src[g]; });
      dst[i] = shrink * s;
    }
  }
  return b;
}

EmbeddingReport carleson_embedding_check(const CarlesonSequence& a, double q, std::span<const double> exponents,
                                         std::span<const GridFunction> f, double tolerance) {
  if (exponents.size() != f.size()) throw DomainError("need one exponent per function");
  if (!(q > 0.0)) throw DomainError("q must be positive");
  double inv = 0.0;
  for (double p : exponents) {
    if (!(p > 1.0)) throw DomainError("embedding exponents must exceed 1");
    inv += 1.0 / p;
  }
  if (std::abs(inv - 1.0 / q) > 1e-12) throw DomainError("1/q must equal the sum of 1/p_i");
  check_operator_inputs(a, f, 1.0);
  detail::require_nonnegative(f, "the Carleson embedding");
  const detail::AveragePyramids pyr(f, 1.0);

  EmbeddingReport r;
  r.q = q;
  double sum = 0.0;
  for (int d = 0; d <= a.maxdepth(); ++d) {
    const auto alpha = a.depth_values(d);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (alpha[i] == 0.0) continue;
      const DyadicCube Q = a.cube_at(d, i);
      sum += alpha[i] * std::pow(pyr.product(Q), q) * Q.volume();
    }
  }
  r.lhs = std::pow(sum, 1.0 / q);
  r.rhs = 1.0;
  const int L = f[0].level();
  const auto root_cells = a.root().cells(L);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double p = exponents[i];
    double s = 0.0;
    for (std::size_t c : root_cells) s += std::pow(f[i][c], p);
    r.rhs *= (p / (p - 1.0)) * std::pow(s * f[i].cell_volume(), 1.0 / p);
  }
  r.holds = r.lhs <= r.rhs * (1.0 + tolerance);
  return r;
}

// ---------------------------------------------------------------------------
// Calderon-Zygmund decomposition

CZDecomposition cz_decompose(std::span<const GridFunction> f, double lambda, double p0, int m, const DyadicCube& P) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (!(p0 >= 1.0)) throw DomainError("p0 must be >= 1");
  if (m < 1 || static_cast<int>(f.size()) != m) throw DimensionError("need exactly m functions");
  const detail::AveragePyramids pyr(f, p0);
  const int L = pyr.resolution();
  if (P.dim != pyr.dim() || P.level > L) throw DimensionError("cube " + P.str() + " does not fit the grid");

  CZDecomposition cz;
  cz.lambda = lambda;
  cz.p0 = p0;
  cz.m = m;
  cz.P = P;
  const double thr = std::pow(lambda, 1.0 / m);
  for (int i = 0; i < m; ++i)
    if (pyr.average(i, P.level, P.linear()) > thr) {
      cz.short_circuit = true;
      cz.short_circuit_index = i;
      return cz;
    }

  for (int i = 0; i < m; ++i) {
    CZComponent part;
    std::vector<double> fp(f[i].size()), bad(f[i].size(), 0.0);
    for (std::size_t c = 0; c < fp.size(); ++c) fp[c] = std::pow(std::abs(f[i][c]), p0);
    std::vector<double> good = fp;
    std::vector<DyadicCube> stack{P};
    while (!stack.empty()) {
      const DyadicCube Q = stack.back();
      stack.pop_back();
      if (Q.level == L) continue;
      auto kids = Q.children();
      // Reverse so that stopping cubes come out in index order.
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
        if (pyr.average(i, it->level, it->linear()) > thr)
          part.stopping.push_back(*it);
        else
          stack.push_back(*it);
      }
    }
    std::sort(part.stopping.begin(), part.stopping.end());
    for (const auto& R : part.stopping) {
      const auto cells = R.cells(L);
      double mean = 0.0;
      for (std::size_t c : cells) mean += fp[c];
      mean /= static_cast<double>(cells.size());
      for (std::size_t c : cells) {
        bad[c] = fp[c] - mean;
        good[c] = mean;
      }
    }
    part.good = GridFunction(f[i].dim(), L, std::move(good));
    part.bad = GridFunction(f[i].dim(), L, std::move(bad));
    cz.parts.push_back(std::move(part));
  }
  return cz;
}

CZCheck verify_cz(std::span<const GridFunction> f, const CZDecomposition& cz, double tolerance) {
  CZCheck out;
  if (cz.short_circuit) return out;
  const int L = f[0].level(), n = f[0].dim();
  const double thr = std::pow(cz.lambda, 1.0 / cz.m);
  const double gcap = std::ldexp(std::pow(cz.lambda, cz.p0 / cz.m), n);
  const auto pcells = cz.P.cells(L);
  const double vol = f[0].cell_volume();
  auto note = [&](bool* flag, const std::string& why) {
    if (out.reason.empty()) out.reason = why;
    if (flag) *flag = false;
    out.ok = false;
  };
  for (int i = 0; i < cz.m; ++i) {
    const auto& part = cz.parts[i];
    std::vector<double> fp(f[i].size());
    for (std::size_t c = 0; c < fp.size(); ++c) fp[c] = std::pow(std::abs(f[i][c]), cz.p0);

    std::vector<char> covered(fp.size(), 0);
    double stopped = 0.0;
    for (const auto& R : part.stopping) {
      const auto cells = R.cells(L);
      double sb = 0.0, sf = 0.0;
      for (std::size_t c : cells) {
        sb += part.bad[c];
        sf += fp[c];
        if (covered[c]) note(&out.stopping_ok, "stopping cubes overlap");
        covered[c] = 1;
      }
      const double defect = sf > 0.0 ? std::abs(sb) / sf : std::abs(sb);
      out.max_mean_defect = std::max(out.max_mean_defect, defect);
      if (defect > tolerance) note(nullptr, "bad part of " + R.str() + " has nonzero mean");
      if (!cz.P.contains(R) || R == cz.P) note(&out.stopping_ok, "stopping cube " + R.str() + " not strictly inside P");
      const double avg = direct_average(f[i], cells, cz.p0);
      const double parent = direct_average(f[i], R.parent().cells(L), cz.p0);
      if (!(avg > thr) || parent > thr * (1.0 + tolerance))
        note(&out.stopping_ok, "stopping condition fails on " + R.str());
      stopped += R.volume();
    }
    double mass = 0.0, gl1 = 0.0;
    for (std::size_t c : pcells) {
      mass += fp[c] * vol;
      gl1 += std::abs(part.good[c]) * vol;
      if (!covered[c] && part.bad[c] != 0.0) note(nullptr, "bad part leaves the stopping cubes");
      if (std::abs(part.good[c] + part.bad[c] - fp[c]) > tolerance * std::max(1.0, fp[c])) note(nullptr, "g + b differs from f^p0");
      const double ratio = std::abs(part.good[c]) / gcap;
      out.max_good_ratio = std::max(out.max_good_ratio, ratio);
      if (ratio > 1.0 + tolerance) note(&out.good_bound_ok, "|g| exceeds 2^n lambda^{p0/m}");
    }
    if (stopped > std::pow(cz.lambda, -cz.p0 / cz.m) * mass * (1.0 + tolerance))
      note(&out.measure_ok, "stopping cubes exceed the measure bound");
    if (gl1 > mass * (1.0 + tolerance)) note(&out.good_l1_ok, "||g||_1 exceeds ||f||_p0^p0");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dyadic maximal operators

GridFunction dyadic_maximal(const GridFunction& f, const GridFunction* sigma, MaximalMode mode, double p0, Exec exec) {
  const int L = f.level(), n = f.dim();
  const bool weighted = mode == MaximalMode::SigmaWeighted;
  if (weighted) {
    if (!sigma) throw DomainError("weighted maximal function needs sigma");
    require_same_shape(f, *sigma);
    for (double s : sigma->values())
      if (!(s > 0.0)) throw DomainError("sigma must be positive");
  }
  if (!weighted && !(p0 >= 1.0)) throw DomainError("p0 must be >= 1");
  std::vector<double> num(f.size()), den(f.size(), 1.0);
  for (std::size_t c = 0; c < f.size(); ++c) {
    num[c] = weighted ? std::abs(f[c]) * (*sigma)[c] : std::pow(std::abs(f[c]), p0);
    if (weighted) den[c] = (*sigma)[c];
  }
  auto finish = [&](double s, double w) { return weighted ? s / w : std::pow(s / w, 1.0 / p0); };

  std::vector<std::vector<double>> per_level(L + 1);
  if (exec == Exec::Serial) {
    for (int j = 0; j <= L; ++j) {
      const std::size_t count = GridFunction::cells_for(n, j);
      per_level[j].resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        double s = 0.0, w = 0.0;
        for (std::size_t c : DyadicCube::from_linear(n, j, i).cells(L)) {
          s += num[c];
          w += den[c];
        }
        per_level[j][i] = finish(s, w);
      }
    }
  } else {
    const DyadicPyramid ps(n, L, num, DyadicPyramid::Reduce::Sum);
    const DyadicPyramid pw(n, L, den, DyadicPyramid::Reduce::Sum);
    for (int j = 0; j <= L; ++j) {
      const auto count = static_cast<std::int64_t>(GridFunction::cells_for(n, j));
      per_level[j].resize(count);
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < count; ++i) per_level[j][i] = finish(ps.at(j, i), pw.at(j, i));
    }
  }
  std::vector<double> out(f.size());
  const auto ncells = static_cast<std::int64_t>(f.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::int64_t c = 0; c < ncells; ++c) {
    double best = 0.0;
    for (int j = 0; j <= L; ++j)
      best = std::max(best, per_level[j][detail::ancestor_linear(n, L, static_cast<std::size_t>(c), j)]);
    out[c] = best;
  }
  return GridFunction(n, L, std::move(out));
}

// ---------------------------------------------------------------------------
// Weak-type estimate

double measure_weak_norm(const CarlesonSequence& a, int k, double p0, int m, int trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("trials must be >= 1");
  if (m < 1) throw DomainError("arity must be >= 1");
  const int L = a.finest_level(), dim = a.dim();
  double best = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(max : best)
  for (int t = 0; t < trials; ++t) {
    std::vector<GridFunction> f;
    Rng rng = trial_rng(seed, static_cast<std::uint64_t>(t));
    for (int i = 0; i < m; ++i) {
      GridFunction g = GridFunction::constant(dim, L, 1.0);
      if (t % 2 == 1) {
        g = random_function(dim, L, rng);
      } else if (t > 0) {
        // Indicator of a random dyadic cube inside the root: concentrated probes.
        std::uniform_int_distribution<int> lvl(0, a.maxdepth());
        const int d = lvl(rng);
        std::uniform_int_distribution<std::size_t> pick(0, GridFunction::cells_for(dim, d) - 1);
        const auto cells = a.cube_at(d, pick(rng)).cells(L);
        std::vector<double> v(GridFunction::cells_for(dim, L), 0.0);
        for (std::size_t c : cells) v[c] = 1.0;
        g = GridFunction(dim, L, std::move(v));
      }
      const double norm = lp_norm(g, p0);
      std::vector<double> v(g.values().begin(), g.values().end());
      for (double& x : v) x /= norm;
      f.emplace_back(dim, L, std::move(v));
    }
    const GridFunction Af = eval_sparse_A(a, k, p0, f);
    best = std::max(best, weak_norm(Af, p0 / m));
  }
  return best;
}

double default_cstar(const CarlesonSequence& a, int k, double p0, int m, int trials, std::uint64_t seed) {
  const double w = measure_weak_norm(a, k, p0, m, trials, seed);
  return std::ldexp(1.0, 2 * (m + 1)) * 2.0 * std::max(w, 1e-12);
}

}  // namespace sparselab
