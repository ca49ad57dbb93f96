#include "sparselab/grid.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace sparselab {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t wrap(std::int64_t a, std::int64_t n) {
  std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

// Coverage of each lattice cell along one axis by the half-open interval
// [start_h, start_h + side_h) measured in half cells, wrapped mod 2N.
std::vector<CellWeight> axis_cover(std::int64_t start_h, std::int64_t side_h, std::int64_t n) {
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t h = start_h; h < start_h + side_h; ++h) {
    w[static_cast<std::size_t>(wrap(floor_div(h, 2), n))] += 0.5;
  }
  std::vector<CellWeight> out;
  for (std::int64_t c = 0; c < n; ++c) {
    if (w[c] > 0.0) out.push_back({static_cast<std::size_t>(c), std::min(w[c], 1.0)});
  }
  return out;
}

CellSet full_set(int dim, int L) {
  CellSet s{dim, L, true, {}};
  const std::size_t n = GridFunction::cells_for(dim, L);
  s.cells.reserve(n);
  for (std::size_t c = 0; c < n; ++c) s.cells.push_back({c, 1.0});
  return s;
}

}  // namespace

void set_jobs(int jobs) { omp_set_num_threads(std::max(1, jobs)); }
int jobs() { return omp_get_max_threads(); }

// ---------------------------------------------------------------------------
// DyadicCube

DyadicCube DyadicCube::from_linear(int dim, int level, std::size_t linear) {
  DyadicCube q{dim, level, {0, 0}};
  if (dim == 1) {
    q.index[0] = static_cast<std::int64_t>(linear);
  } else {
    const std::int64_t n = std::int64_t{1} << level;
    q.index[0] = static_cast<std::int64_t>(linear) / n;
    q.index[1] = static_cast<std::int64_t>(linear) % n;
  }
  return q;
}

double DyadicCube::side() const { return std::ldexp(1.0, -level); }
double DyadicCube::volume() const { return std::ldexp(1.0, -dim * level); }

std::size_t DyadicCube::linear() const {
  if (dim == 1) return static_cast<std::size_t>(index[0]);
  return static_cast<std::size_t>(index[0] * per_axis() + index[1]);
}

DyadicCube DyadicCube::parent() const {
  if (level == 0) throw DomainError("the root cube has no parent");
  DyadicCube p = *this;
  p.level -= 1;
  for (int d = 0; d < dim; ++d) p.index[d] >>= 1;
  return p;
}

DyadicCube DyadicCube::ancestor(int k) const {
  if (k < 0 || k > level) throw DomainError("ancestor(" + std::to_string(k) + ") of " + str());
  DyadicCube p = *this;
  p.level -= k;
  for (int d = 0; d < dim; ++d) p.index[d] >>= k;
  return p;
}

std::vector<DyadicCube> DyadicCube::children() const { return descendants(1); }

std::vector<DyadicCube> DyadicCube::descendants(int depth) const {
  std::vector<DyadicCube> out;
  const std::int64_t m = std::int64_t{1} << depth;
  if (dim == 1) {
    out.reserve(static_cast<std::size_t>(m));
    for (std::int64_t a = 0; a < m; ++a) out.push_back({1, level + depth, {index[0] * m + a, 0}});
  } else {
    out.reserve(static_cast<std::size_t>(m * m));
    for (std::int64_t a = 0; a < m; ++a)
      for (std::int64_t b = 0; b < m; ++b)
        out.push_back({2, level + depth, {index[0] * m + a, index[1] * m + b}});
  }
  return out;
}

bool DyadicCube::contains(const DyadicCube& other) const {
  if (other.dim != dim || other.level < level) return false;
  return other.ancestor(other.level - level) == *this;
}

std::size_t DyadicCube::cell_count(int L) const {
  return std::size_t{1} << (dim * (L - level));
}

std::vector<std::size_t> DyadicCube::cells(int L) const {
  if (level > L) throw DimensionError("cube " + str() + " is finer than resolution " + std::to_string(L));
  const std::int64_t s = std::int64_t{1} << (L - level);
  const std::int64_t n = std::int64_t{1} << L;
  std::vector<std::size_t> out;
  out.reserve(cell_count(L));
  if (dim == 1) {
    for (std::int64_t i = 0; i < s; ++i) out.push_back(static_cast<std::size_t>(index[0] * s + i));
  } else {
    for (std::int64_t i = 0; i < s; ++i)
      for (std::int64_t j = 0; j < s; ++j)
        out.push_back(static_cast<std::size_t>((index[0] * s + i) * n + index[1] * s + j));
  }
  return out;
}

std::string DyadicCube::str() const {
  std::ostringstream os;
  os << "Q(level=" << level << ", index=" << index[0];
  if (dim == 2) os << "," << index[1];
  os << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// GridFunction

void check_shape(int dim, int level) {
  if (dim != 1 && dim != 2) throw DimensionError("dimension must be 1 or 2, got " + std::to_string(dim));
  const int max_level = dim == 1 ? kMaxLevel1D : kMaxLevel2D;
  if (level < 0 || level > max_level)
    throw DimensionError("resolution " + std::to_string(level) + " outside [0, " + std::to_string(max_level) + "]");
}

std::size_t GridFunction::cells_for(int dim, int level) { return std::size_t{1} << (dim * level); }

GridFunction::GridFunction(int dim, int level, std::vector<double> values)
    : dim_(dim), level_(level), values_(std::move(values)) {
  check_shape(dim, level);
  if (values_.size() != cells_for(dim, level))
    throw DimensionError("expected " + std::to_string(cells_for(dim, level)) + " cell values, got " +
                         std::to_string(values_.size()));
}

GridFunction GridFunction::constant(int dim, int level, double c) {
  check_shape(dim, level);
  return GridFunction(dim, level, std::vector<double>(cells_for(dim, level), c));
}

double GridFunction::cell_volume() const { return std::ldexp(1.0, -dim_ * level_); }

Index2 GridFunction::cell_coords(std::size_t cell) const {
  if (dim_ == 1) return {static_cast<std::int64_t>(cell), 0};
  const auto n = static_cast<std::size_t>(per_axis());
  return {static_cast<std::int64_t>(cell / n), static_cast<std::int64_t>(cell % n)};
}

std::size_t GridFunction::cell_linear(Index2 c) const {
  const std::int64_t n = per_axis();
  if (dim_ == 1) return static_cast<std::size_t>(wrap(c[0], n));
  return static_cast<std::size_t>(wrap(c[0], n) * n + wrap(c[1], n));
}

std::array<double, 2> GridFunction::cell_center(std::size_t cell) const {
  const Index2 c = cell_coords(cell);
  const double h = std::ldexp(1.0, -level_);
  return {(static_cast<double>(c[0]) + 0.5) * h, dim_ == 2 ? (static_cast<double>(c[1]) + 0.5) * h : 0.0};
}

double GridFunction::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * cell_volume();
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool GridFunction::same_shape(const GridFunction& o) const { return dim_ == o.dim_ && level_ == o.level_; }

void require_same_shape(const GridFunction& a, const GridFunction& b) {
  if (!a.same_shape(b))
    throw DimensionError("grid shape mismatch: (n=" + std::to_string(a.dim()) + ", L=" + std::to_string(a.level()) +
                         ") vs (n=" + std::to_string(b.dim()) + ", L=" + std::to_string(b.level()) + ")");
}

// ---------------------------------------------------------------------------
// Cell sets

double CellSet::measure() const {
  double s = 0.0;
  for (const auto& c : cells) s += c.weight;
  return s * std::ldexp(1.0, -dim * level);
}

bool dilate_saturates(const DyadicCube& q, int j) { return j >= q.level; }

CellSet dilate(const DyadicCube& q, int k, int L) {
  if (k < 0) throw DomainError("dilation exponent must be nonnegative");
  if (q.level > L) throw DimensionError("cube " + q.str() + " is finer than resolution " + std::to_string(L));
  if (dilate_saturates(q, k)) return full_set(q.dim, L);

  const std::int64_t n = std::int64_t{1} << L;
  const std::int64_t s = std::int64_t{1} << (L - q.level);
  const std::int64_t side_h = 2 * s * (std::int64_t{1} << k);
  std::array<std::vector<CellWeight>, 2> axes;
  for (int d = 0; d < q.dim; ++d) {
    const std::int64_t start_h = 2 * q.index[d] * s - s * ((std::int64_t{1} << k) - 1);
    axes[d] = axis_cover(start_h, side_h, n);
  }
  CellSet out{q.dim, L, false, {}};
  if (q.dim == 1) {
    out.cells = std::move(axes[0]);
  } else {
    out.cells.reserve(axes[0].size() * axes[1].size());
    for (const auto& a : axes[0])
      for (const auto& b : axes[1])
        out.cells.push_back({a.cell * static_cast<std::size_t>(n) + b.cell, a.weight * b.weight});
  }
  return out;
}

CellSet annulus(const DyadicCube& q, int j, int L) {
  if (j < 0) throw DomainError("ring index must be nonnegative");
  if (j == 0) return dilate(q, 0, L);
  CellSet outer = dilate(q, j, L);
  const CellSet inner = dilate(q, j - 1, L);
  CellSet out{q.dim, L, false, {}};
  std::size_t i = 0;
  for (const auto& c : outer.cells) {
    while (i < inner.cells.size() && inner.cells[i].cell < c.cell) ++i;
    double w = c.weight;
    if (i < inner.cells.size() && inner.cells[i].cell == c.cell) w -= inner.cells[i].weight;
    if (w > 1e-15) out.cells.push_back({c.cell, w});
  }
  return out;
}

// ---------------------------------------------------------------------------
// DyadicPyramid

DyadicPyramid::DyadicPyramid(int dim, int L, std::span<const double> cells, Reduce op) : dim_(dim), L_(L) {
  if (cells.size() != GridFunction::cells_for(dim, L)) throw DimensionError("pyramid input has wrong size");
  levels_.resize(L + 1);
  levels_[L].assign(cells.begin(), cells.end());
  auto combine = [op](double a, double b) {
    switch (op) {
      case Reduce::Sum: return a + b;
      case Reduce::Min: return std::min(a, b);
      case Reduce::Max: return std::max(a, b);
    }
    return a;
  };
  for (int j = L - 1; j >= 0; --j) {
    const std::int64_t n = std::int64_t{1} << j;
    const auto& fine = levels_[j + 1];
    auto& coarse = levels_[j];
    coarse.assign(GridFunction::cells_for(dim, j), 0.0);
    if (dim == 1) {
      for (std::int64_t a = 0; a < n; ++a) coarse[a] = combine(fine[2 * a], fine[2 * a + 1]);
    } else {
      const std::int64_t m = 2 * n;
      for (std::int64_t a = 0; a < n; ++a)
        for (std::int64_t b = 0; b < n; ++b) {
          const std::int64_t r0 = 2 * a * m + 2 * b;
          const std::int64_t r1 = r0 + m;
          coarse[a * n + b] = combine(combine(fine[r0], fine[r0 + 1]), combine(fine[r1], fine[r1 + 1]));
        }
    }
  }
}

// ---------------------------------------------------------------------------
// Averages, rearrangements, norms

double average(const GridFunction& f, const DyadicCube& q, double p0) {
  if (p0 < 1.0) throw DomainError("average exponent must be >= 1");
  if (q.dim != f.dim() || q.level > f.level())
    throw DimensionError("cube " + q.str() + " does not fit the grid");
  double s = 0.0;
  for (std::size_t c : q.cells(f.level())) s += std::pow(std::abs(f[c]), p0);
  return std::pow(s / static_cast<double>(q.cell_count(f.level())), 1.0 / p0);
}

double average(const GridFunction& f, const CellSet& set, double p0) {
  if (p0 < 1.0) throw DomainError("average exponent must be >= 1");
  if (set.dim != f.dim() || set.level != f.level()) throw DimensionError("cell set does not fit the grid");
  double s = 0.0, w = 0.0;
  for (const auto& c : set.cells) {
    s += c.weight * std::pow(std::abs(f[c.cell]), p0);
    w += c.weight;
  }
  if (w <= 0.0) throw DomainError("average over an empty cell set");
  return std::pow(s / w, 1.0 / p0);
}

double rearrangement_of(std::span<const double> values, double cell_volume, double t) {
  if (!(t > 0.0)) throw DomainError("rearrangement requires t > 0");
  const auto k = static_cast<std::size_t>(std::ceil(t / cell_volume));
  if (k > values.size()) return 0.0;
  std::vector<double> a(values.size());
  std::transform(values.begin(), values.end(), a.begin(), [](double v) { return std::abs(v); });
  std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k - 1), a.end(), std::greater<>());
  return a[k - 1];
}

double rearrangement(const GridFunction& f, double t) { return rearrangement_of(f.values(), f.cell_volume(), t); }

double weighted_norm(const GridFunction& f, double p, const GridFunction& w) {
  require_same_shape(f, w);
  if (!(p > 0.0)) throw DomainError("norm exponent must be positive");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(w[i] > 0.0)) throw DomainError("weight must be positive at every cell (cell " + std::to_string(i) + ")");
    s += std::pow(std::abs(f[i]), p) * w[i];
  }
  return std::pow(s * f.cell_volume(), 1.0 / p);
}

double lp_norm(const GridFunction& f, double p) {
  if (!(p > 0.0)) throw DomainError("norm exponent must be positive");
  double s = 0.0;
  for (double v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * f.cell_volume(), 1.0 / p);
}

double weak_norm(const GridFunction& f, double q) {
  if (!(q > 0.0)) throw DomainError("weak norm exponent must be positive");
  std::vector<double> a(f.size());
  std::transform(f.values().begin(), f.values().end(), a.begin(), [](double v) { return std::abs(v); });
  std::sort(a.begin(), a.end(), std::greater<>());
  // f* equals a[k-1] on ((k-1)v, kv]; the sup over that interval sits at its right end.
  double best = 0.0;
  const double v = f.cell_volume();
  for (std::size_t k = 1; k <= a.size() && a[k - 1] > 0.0; ++k)
    best = std::max(best, std::pow(static_cast<double>(k) * v, 1.0 / q) * a[k - 1]);
  return best;
}

// ---------------------------------------------------------------------------
// GFN1 text format

namespace {

struct Token {
  std::string text;
  int line;
  int column;
};

std::vector<Token> tokenize(std::istream& in) {
  std::vector<Token> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size()) break;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      out.push_back({line.substr(start, i - start), lineno, static_cast<int>(start) + 1});
    }
  }
  return out;
}

double parse_number(const Token& t) {
  char* end = nullptr;
  const double v = std::strtod(t.text.c_str(), &end);
  if (end != t.text.c_str() + t.text.size() || !std::isfinite(v))
    throw ParseError(t.line, t.column, "not a finite number: '" + t.text + "'");
  return v;
}

int parse_int(const Token& t) {
  char* end = nullptr;
  const long v = std::strtol(t.text.c_str(), &end, 10);
  if (end != t.text.c_str() + t.text.size()) throw ParseError(t.line, t.column, "not an integer: '" + t.text + "'");
  return static_cast<int>(v);
}

}  // namespace

GridFunction read_gfn(std::istream& in) {
  const auto tokens = tokenize(in);
  if (tokens.empty()) throw ParseError(1, 1, "empty input, expected header 'GFN1 <n> <L>'");
  if (tokens[0].text != "GFN1") throw ParseError(tokens[0].line, tokens[0].column, "expected 'GFN1' magic");
  if (tokens.size() < 3 || tokens[1].line != tokens[0].line || tokens[2].line != tokens[0].line)
    throw ParseError(tokens[0].line, tokens[0].column, "header must be 'GFN1 <n> <L>' on one line");
  const int n = parse_int(tokens[1]);
  const int L = parse_int(tokens[2]);
  try {
    check_shape(n, L);
  } catch (const DimensionError& e) {
    throw ParseError(tokens[1].line, tokens[1].column, e.what());
  }
  const std::size_t expected = GridFunction::cells_for(n, L);
  const std::size_t got = tokens.size() - 3;
  if (got > expected) {
    const Token& extra = tokens[3 + expected];
    throw ParseError(extra.line, extra.column,
                     "too many values: expected " + std::to_string(expected) + ", got " + std::to_string(got));
  }
  if (got < expected) {
    const Token& last = tokens.back();
    throw ParseError(last.line, last.column + static_cast<int>(last.text.size()),
                     "too few values: expected " + std::to_string(expected) + ", got " + std::to_string(got));
  }
  std::vector<double> values(expected);
  for (std::size_t i = 0; i < expected; ++i) values[i] = parse_number(tokens[3 + i]);
  return GridFunction(n, L, std::move(values));
}

GridFunction read_gfn_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, 0, "cannot open '" + path + "'");
  try {
    return read_gfn(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.column(), path + ": " + e.message());
  }
}

void write_gfn(std::ostream& out, const GridFunction& f) {
  out << "GFN1 " << f.dim() << ' ' << f.level() << '\n';
  const std::size_t row = f.dim() == 2 ? static_cast<std::size_t>(f.per_axis()) : std::min<std::size_t>(f.size(), 8);
  char buf[40];
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", f[i]);
    out << buf << ((i + 1) % row == 0 ? '\n' : ' ');
  }
}

void write_gfn_file(const std::string& path, const GridFunction& f) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write '" + path + "'");
  write_gfn(out, f);
}

}  // namespace sparselab
