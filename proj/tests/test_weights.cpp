#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "oracle.hpp"
#include "sparselab/random.hpp"
#include "sparselab/weights.hpp"

using namespace sparselab;

namespace {

GridFunction two_valued(int L) {
  return oracle::make1d(L, [](double x) { return x < 0.5 ? 1.0 : 4.0; });
}

}  // namespace

TEST_CASE("ap_constant: examples") {
  const auto c = GridFunction::constant(1, 5, 3.0);
  CHECK(ap_constant(c, 2.0, 5).value == doctest::Approx(1.0));
  CHECK(ap_constant(GridFunction::constant(1, 5, 1.0), 1.0, 5).value == doctest::Approx(1.0));

  const auto w = two_valued(4);
  const auto r = ap_constant(w, 2.0, 4);
  CHECK(r.value == doctest::Approx(25.0 / 16));
  CHECK(r.witness == DyadicCube::root(1));
  CHECK(oracle::ap1d(w, 2.0, 4) == doctest::Approx(25.0 / 16));
  CHECK_THROWS_AS(ap_constant(w, 0.5, 4), DomainError);
}

TEST_CASE("rh_constant: examples") {
  const auto w = two_valued(4);
  CHECK(rh_constant(GridFunction::constant(1, 4, 1.0), 2.0, 4).value == doctest::Approx(1.0));
  const auto r2 = rh_constant(w, 2.0, 4);
  CHECK(r2.value == doctest::Approx(std::sqrt(8.5) / 2.5));
  CHECK(r2.value == doctest::Approx(1.16619).epsilon(1e-5));
  CHECK(r2.witness == DyadicCube::root(1));
  CHECK(rh_constant(w, kInfinity, 4).value == doctest::Approx(1.6));
  CHECK_THROWS_AS(rh_constant(w, 1.0, 4), DomainError);
}

TEST_CASE("A_p and RH_q agree with the interval enumeration oracle") {
  for (int t = 0; t < 10; ++t) {
    Rng rng = trial_rng(21, t);
    const auto w = random_weight(1, 7, rng);
    for (double p : {1.5, 2.0, 3.0}) {
      CHECK(ap_constant(w, p, 7).value == doctest::Approx(oracle::ap1d(w, p, 7)).epsilon(1e-10));
      CHECK(ap_constant(w, p, 7, Exec::Serial).value == ap_constant(w, p, 7, Exec::Parallel).value);
    }
    for (double q : {1.5, 2.0, kInfinity})
      CHECK(rh_constant(w, q, 5).value == doctest::Approx(oracle::rh1d(w, q, 5)).epsilon(1e-10));
  }
}

TEST_CASE("multi_ap_constant: examples") {
  const auto one = GridFunction::constant(1, 4, 1.0);
  const WeightTuple flat({one, one}, {2.0, 2.0});
  CHECK(flat.p() == doctest::Approx(1.0));
  CHECK(multi_ap_constant(flat, 1.0, 4).value == doctest::Approx(1.0));

  const WeightTuple t({two_valued(4), one}, {2.0, 2.0});
  const auto r = multi_ap_constant(t, 1.0, 4);
  CHECK(r.value == doctest::Approx(1.5 * std::sqrt(0.625)));
  CHECK(r.witness == DyadicCube::root(1));
  CHECK(oracle::multi_ap1d({two_valued(4), one}, {2.0, 2.0}, 1.0, 4) == doctest::Approx(r.value));
  CHECK_THROWS_AS(multi_ap_constant(t, 2.0, 4), DomainError);
}

TEST_CASE("multi_ap_constant matches the oracle for r = 1 and r = p0") {
  for (int t = 0; t < 8; ++t) {
    Rng rng = trial_rng(22, t);
    std::vector<GridFunction> w{random_weight(1, 6, rng), random_weight(1, 6, rng)};
    const std::vector<double> pi{2.0 + t % 3, 3.0};
    for (double r : {1.0, 1.5}) {
      const WeightTuple tup(w, pi, r);
      CHECK(multi_ap_constant(tup, r, 6).value == doctest::Approx(oracle::multi_ap1d(w, pi, r, 6)).epsilon(1e-10));
    }
  }
}

TEST_CASE("scale invariance and monotonicity in the family") {
  for (int t = 0; t < 10; ++t) {
    Rng rng = trial_rng(23, t);
    const auto w1 = random_weight(1, 7, rng), w2 = random_weight(1, 7, rng);
    const double lam = std::ldexp(1.0, t - 5) * 1.37;
    const GridFunction s1 = GridFunction::from_cells(1, 7, [&](std::size_t i) { return lam * w1[i]; });
    const GridFunction s2 = GridFunction::from_cells(1, 7, [&](std::size_t i) { return lam * w2[i]; });
    const auto a = ap_constant(w1, 2.0, 7), b = ap_constant(s1, 2.0, 7);
    CHECK(b.value == doctest::Approx(a.value).epsilon(1e-9));
    CHECK(b.witness == a.witness);
    const WeightTuple ta({w1, w2}, {2.0, 3.0}), tb({s1, s2}, {2.0, 3.0});
    CHECK(multi_ap_constant(tb, 1.0, 7).value == doctest::Approx(multi_ap_constant(ta, 1.0, 7).value).epsilon(1e-9));

    double prev = 0.0;
    for (int lev = 0; lev <= 7; ++lev) {
      const double v = ap_constant(w1, 2.0, lev).value;
      CHECK(v >= prev);
      CHECK(v >= 1.0 - 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("multi_ap with m = 1 equals ap_constant") {
  for (int t = 0; t < 10; ++t) {
    Rng rng = trial_rng(24, t);
    const auto w = random_weight(1, 6, rng);
    for (double p : {1.5, 2.0, 4.0}) {
      const WeightTuple tup({w}, {p});
      CHECK(std::abs(multi_ap_constant(tup, 1.0, 6).value - ap_constant(w, p, 6).value) <=
            1e-12 * ap_constant(w, p, 6).value);
    }
  }
}

TEST_CASE("dual_weights: examples") {
  const auto one = GridFunction::constant(1, 3, 1.0);
  const auto s1 = dual_weights(WeightTuple({one, one}, {2.0, 2.0}));
  for (double v : s1[0].values()) CHECK(v == doctest::Approx(1.0));
  const auto s2 = dual_weights(WeightTuple({GridFunction::constant(1, 3, 4.0)}, {2.0}));
  for (double v : s2[0].values()) CHECK(v == doctest::Approx(0.25));
  const auto s3 = dual_weights(WeightTuple({two_valued(3)}, {2.0}));
  for (std::size_t i = 0; i < 8; ++i) CHECK(s3[0][i] == doctest::Approx(i < 4 ? 1.0 : 0.25));
}

TEST_CASE("weight tuple invariants") {
  const auto one = GridFunction::constant(1, 3, 1.0);
  const WeightTuple t({one, one, one}, {2.0, 3.0, 6.0}, 1.5);
  CHECK(std::abs(1.0 / t.p() - (1.0 / 2 + 1.0 / 3 + 1.0 / 6)) < 1e-12);
  CHECK_THROWS_AS(WeightTuple({one, one}, {2.0, 2.0}, 2.0), DomainError);
  CHECK_THROWS_AS(WeightTuple({one}, {2.0, 2.0}), DimensionError);
  Rng rng = trial_rng(25, 0);
  const WeightTuple r({random_weight(1, 5, rng), random_weight(1, 5, rng)}, {2.0, 4.0});
  const auto nu = r.nu();
  for (double v : nu.values()) CHECK(v > 0.0);
}

TEST_CASE("Hoelder identity |Q| <= nu(Q)^{1/(ma)} prod sigma_i(Q)^{1/(m a_i')} on every cube") {
  for (int t = 0; t < 20; ++t) {
    Rng rng = trial_rng(26, t);
    const double p0 = t % 2 ? 1.5 : 1.0;
    const WeightTuple tup({random_weight(1, 6, rng), random_weight(1, 6, rng)}, {2.0 + t % 3, 3.5}, p0);
    const auto nu = tup.nu();
    const auto sigma = dual_weights(tup);
    const int m = tup.arity();
    const double a = tup.p() / p0;
    for (auto [lo, hi] : oracle::intervals(6)) {
      const auto cells = oracle::cells1d(6, lo, hi);
      const double vol = cells.size() * nu.cell_volume();
      double rhs = std::pow(oracle::mean_over(nu, cells) * vol, 1.0 / (m * a));
      for (int i = 0; i < m; ++i) {
        const double ai = tup.exponents()[i] / p0, aic = ai / (ai - 1.0);
        rhs *= std::pow(oracle::mean_over(sigma[i], cells) * vol, 1.0 / (m * aic));
      }
      CHECK(vol <= rhs * (1 + 1e-9));
    }
  }
}

TEST_CASE("duality inequality: constant and two-valued weights") {
  const auto r1 = duality_inequality_check(GridFunction::constant(1, 5, 1.0), 1.2, 3.0, 5);
  CHECK(r1.lhs == doctest::Approx(1.0));
  CHECK(r1.rhs == doctest::Approx(1.0));
  CHECK(r1.holds);
  const auto r2 = duality_inequality_check(two_valued(5), 1.2, 3.0, 5);
  CHECK(r2.holds);
  // p = 1.5 exceeds p0' = 4/3 at p0 = 4: outside the admissible range.
  CHECK_THROWS_AS(duality_inequality_check(two_valued(5), 1.5, 4.0, 5), DomainError);
}

TEST_CASE("duality inequality on 100 random log-uniform weights") {
  for (int t = 0; t < 100; ++t) {
    Rng rng = trial_rng(27, t);
    const auto w = random_weight(1, 6, rng, -3.0, 3.0);
    const auto r = duality_inequality_check(w, 1.2, 3.0, 6);
    CHECK(r.holds);
  }
}

TEST_CASE("power_weight: examples") {
  const auto w0 = power_weight(0.0, {0.0, 0.0}, 1, 6);
  for (double v : w0.values()) CHECK(v == doctest::Approx(1.0));
  const auto w1 = power_weight(1.0, {0.0, 0.0}, 1, 5);
  for (std::size_t i = 1; i < 16; ++i) CHECK(w1[i] > w1[i - 1]);
  for (std::size_t i = 0; i < 32; ++i) CHECK(w1[i] == doctest::Approx(w1[31 - i]));
  // Exact cell averages of |x|: cell [0, h) averages to h/2.
  CHECK(w1[0] == doctest::Approx(1.0 / 64));
  double prev = 0.0;
  for (int L : {6, 8, 10}) {
    const double a = ap_constant(power_weight(-0.5, {0.0, 0.0}, 1, L), 2.0, L).value;
    CHECK(a > prev);
    prev = a;
  }
  CHECK_THROWS_AS(power_weight(-1.0, {0.0, 0.0}, 1, 4), DomainError);
  const auto w2 = power_weight(0.5, {0.5, 0.5}, 2, 4);
  for (double v : w2.values()) CHECK(v > 0.0);
}

TEST_CASE("clamp_weight replaces tiny and non-finite cells") {
  const GridFunction w(1, 2, {1.0, 0.0, -2.0, NAN});
  std::ostringstream warn;
  const auto c = clamp_weight(w, &warn);
  CHECK(c[0] == 1.0);
  for (std::size_t i = 1; i < 4; ++i) CHECK(c[i] == 1e-300);
  CHECK_FALSE(warn.str().empty());
}
