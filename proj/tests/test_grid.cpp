#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "oracle.hpp"
#include "sparselab/grid.hpp"
#include "sparselab/random.hpp"

using namespace sparselab;

TEST_CASE("cube geometry: side, volume, children, ancestors") {
  const DyadicCube q{2, 3, {5, 2}};
  CHECK(q.side() == doctest::Approx(0.125));
  CHECK(q.volume() == doctest::Approx(1.0 / 64));
  const auto kids = q.children();
  REQUIRE(kids.size() == 4);
  for (const auto& c : kids) {
    CHECK(c.level == 4);
    CHECK(c.parent() == q);
    CHECK(q.contains(c));
  }
  CHECK(q.ancestor(3) == DyadicCube::root(2));
  CHECK(q.ancestor(1) == DyadicCube{2, 2, {2, 1}});
  CHECK(q.cell_count(5) == 16);
  CHECK(DyadicCube::from_linear(2, 3, q.linear()) == q);
}

TEST_CASE("cells of a cube are the row-major lattice cells inside it") {
  const DyadicCube q{1, 2, {1, 0}};
  const auto cells = q.cells(4);
  CHECK(cells == oracle::cells1d(4, 0.25, 0.5));
  const DyadicCube q2{2, 1, {1, 0}};
  // Axis 0 is the slow axis: rows 2..3, columns 0..1 of a 4x4 grid.
  CHECK(q2.cells(2) == std::vector<std::size_t>{8, 9, 12, 13});
}

TEST_CASE("average: examples") {
  const auto one = GridFunction::constant(1, 4, 1.0);
  CHECK(average(one, DyadicCube{1, 2, {3, 0}}, 2.0) == doctest::Approx(1.0));
  CHECK(average(oracle::indicator1d(4, 0.0, 0.5), DyadicCube::root(1), 2.0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(average(oracle::indicator1d(4, 0.0, 0.25), DyadicCube{1, 1, {0, 0}}, 1.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(average(one, DyadicCube{1, 5, {0, 0}}, 1.0), DimensionError);
}

TEST_CASE("average is nondecreasing in p0") {
  for (int t = 0; t < 20; ++t) {
    Rng rng = trial_rng(11, t);
    const auto f = random_function(1, 8, rng);
    const DyadicCube q = DyadicCube::from_linear(1, t % 6, (t * 7) % (1 << (t % 6)));
    double prev = 0.0;
    for (double p : {1.0, 1.5, 2.0, 4.0}) {
      const double a = average(f, q, p);
      CHECK(a >= prev * (1 - 1e-12));
      prev = a;
    }
  }
}

TEST_CASE("dilate: identity, wrap-around, saturation") {
  const DyadicCube half{1, 1, {0, 0}};
  const CellSet d0 = dilate(half, 0, 4);
  CHECK(d0.measure() == doctest::Approx(0.5));
  CHECK(d0.cells.size() == 8);

  // [0,1/4) doubled is [-1/8, 3/8), i.e. cells 14, 15, 0..5 at L = 4.
  const CellSet d1 = dilate(DyadicCube{1, 2, {0, 0}}, 1, 4);
  std::vector<std::size_t> got;
  for (const auto& c : d1.cells) {
    CHECK(c.weight == doctest::Approx(1.0));
    got.push_back(c.cell);
  }
  CHECK(got == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 14, 15});
  CHECK(d1.measure() == doctest::Approx(0.5));

  const CellSet d3 = dilate(half, 3, 4);
  CHECK(d3.full_torus);
  CHECK(d3.measure() == doctest::Approx(1.0));
  CHECK(dilate_saturates(half, 1));
  CHECK_FALSE(dilate_saturates(DyadicCube{1, 2, {0, 0}}, 1));
}

TEST_CASE("dilates of a single cell cover half cells at the boundary") {
  // 2Q of a level-L cell has side 2 cells, centered on the cell: half of each neighbor.
  const CellSet d = dilate(DyadicCube{1, 4, {5, 0}}, 1, 4);
  CHECK(d.measure() == doctest::Approx(2.0 / 16));
  double w4 = 0, w5 = 0, w6 = 0;
  for (const auto& c : d.cells) {
    if (c.cell == 4) w4 = c.weight;
    if (c.cell == 5) w5 = c.weight;
    if (c.cell == 6) w6 = c.weight;
  }
  CHECK(w4 == doctest::Approx(0.5));
  CHECK(w5 == doctest::Approx(1.0));
  CHECK(w6 == doctest::Approx(0.5));
}

TEST_CASE("annuli are disjoint and fill the dilate") {
  const DyadicCube q{1, 5, {3, 0}};
  double total = 0.0;
  for (int j = 0; j <= 3; ++j) total += annulus(q, j, 8).measure();
  CHECK(total == doctest::Approx(dilate(q, 3, 8).measure()));
}

TEST_CASE("rearrangement: examples and equimeasurability") {
  const auto ind = oracle::indicator1d(4, 0.0, 0.25);
  CHECK(rearrangement(ind, 0.1) == 1.0);
  CHECK(rearrangement(ind, 0.25) == 1.0);
  CHECK(rearrangement(ind, 0.26) == 0.0);
  CHECK(rearrangement(GridFunction::constant(1, 3, 2.5), 1.0) == 2.5);
  const GridFunction step(1, 2, {4, 2, 1, 0});
  CHECK(rearrangement(step, 0.3) == 2.0);

  Rng rng = trial_rng(3, 0);
  const auto f = random_function(1, 6, rng, -1.0, 1.0);
  for (double t : {0.01, 0.1, 0.3, 0.5, 0.77, 1.0}) CHECK(rearrangement(f, t) == oracle::rearrangement(f, t));
  for (double a : {0.05, 0.2, 0.5, 0.9}) {
    double lhs = 0.0;
    for (double v : f.values()) lhs += std::abs(v) > a ? f.cell_volume() : 0.0;
    // |{f* > a}| measured on the breakpoint lattice.
    double rhs = 0.0;
    for (std::size_t k = 1; k <= f.size(); ++k) rhs += rearrangement(f, k * f.cell_volume()) > a ? f.cell_volume() : 0.0;
    CHECK(lhs == doctest::Approx(rhs));
  }
}

TEST_CASE("weighted_norm: examples") {
  const auto one = GridFunction::constant(1, 4, 1.0);
  for (double p : {0.5, 1.0, 3.0}) CHECK(weighted_norm(one, p, one) == doctest::Approx(1.0));
  CHECK(weighted_norm(oracle::indicator1d(4, 0, 0.5), 1.0, GridFunction::constant(1, 4, 2.0)) == doctest::Approx(1.0));
  const auto w = oracle::make1d(4, [](double x) { return x < 0.25 ? 4.0 : 1.0; });
  CHECK(weighted_norm(oracle::indicator1d(4, 0, 0.25), 2.0, w) == doctest::Approx(1.0));
  CHECK_THROWS_AS(weighted_norm(one, 2.0, GridFunction::constant(1, 4, 0.0)), DomainError);
}

TEST_CASE("weak_norm: examples against the breakpoint oracle") {
  CHECK(weak_norm(GridFunction::constant(1, 3, 1.0), 0.7) == doctest::Approx(1.0));
  CHECK(weak_norm(oracle::indicator1d(4, 0, 0.25), 1.0) == doctest::Approx(0.25));
  // sup_t t^{1/2} f*(t) for (4,2,1,0) is attained at t = 1/4: 4 * (1/4)^{1/2} = 2.
  const GridFunction step(1, 2, {4, 2, 1, 0});
  CHECK(oracle::weak_norm(step, 2.0) == doctest::Approx(2.0));
  CHECK(weak_norm(step, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("weak_norm is below the strong norm on random functions") {
  for (int t = 0; t < 30; ++t) {
    Rng rng = trial_rng(5, t);
    const auto f = random_function(t % 2 ? 2 : 1, 5, rng, -2.0, 3.0);
    for (double q : {0.5, 1.0, 2.0}) {
      CHECK(weak_norm(f, q) <= lp_norm(f, q) * (1 + 1e-12));
      if (f.dim() == 1) CHECK(weak_norm(f, q) == doctest::Approx(oracle::weak_norm(f, q)));
    }
  }
}

TEST_CASE("partition exactness of cube integrals") {
  Rng rng = trial_rng(9, 0);
  const auto f = random_function(2, 6, rng);
  const DyadicPyramid pyr(2, 6, f.values(), DyadicPyramid::Reduce::Sum);
  const double total = f.integral();
  for (int j = 0; j <= 6; ++j) {
    double s = 0.0;
    for (double v : pyr.level(j)) s += v * f.cell_volume();
    CHECK(s == doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("pyramid min/max agree with direct scans") {
  Rng rng = trial_rng(9, 1);
  const auto f = random_function(1, 7, rng);
  const DyadicPyramid mn(1, 7, f.values(), DyadicPyramid::Reduce::Min);
  const DyadicPyramid mx(1, 7, f.values(), DyadicPyramid::Reduce::Max);
  for (int j = 0; j <= 7; ++j)
    for (std::size_t i = 0; i < (std::size_t{1} << j); ++i) {
      const auto cells = DyadicCube::from_linear(1, j, i).cells(7);
      double lo = INFINITY, hi = -INFINITY;
      for (auto c : cells) {
        lo = std::min(lo, f[c]);
        hi = std::max(hi, f[c]);
      }
      CHECK(mn.at(j, i) == lo);
      CHECK(mx.at(j, i) == hi);
    }
}

TEST_CASE("GFN round trip and diagnostics") {
  Rng rng = trial_rng(1, 2);
  const auto f = random_function(2, 3, rng);
  std::stringstream ss;
  write_gfn(ss, f);
  const auto g = read_gfn(ss);
  REQUIRE(g.same_shape(f));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(g[i] == f[i]);

  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_gfn(in);
  };
  CHECK(parse("GFN1 1 2\n1 2 3 4\n").size() == 4);
  try {
    parse("GFN1 1 2\n1 2 3\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  try {
    parse("GFN1 1 2\n1 2 x 4\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 5);
  }
  CHECK_THROWS_AS(parse("GFN1 1 2\n1 2 3 4 5\n"), ParseError);
  CHECK_THROWS_AS(parse("GFX 1 2\n1 2 3 4\n"), ParseError);
  CHECK_THROWS_AS(parse("GFN1 3 2\n"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("shape limits") {
  CHECK_NOTHROW(check_shape(1, 12));
  CHECK_NOTHROW(check_shape(2, 8));
  CHECK_THROWS_AS(check_shape(1, 13), DimensionError);
  CHECK_THROWS_AS(check_shape(2, 9), DimensionError);
  CHECK_THROWS_AS(check_shape(3, 2), DimensionError);
}
