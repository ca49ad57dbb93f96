#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "oracle.hpp"
#include "sparselab/random.hpp"
#include "sparselab/sparse.hpp"

using namespace sparselab;

namespace {

const DyadicCube root1 = DyadicCube::root(1);

DyadicCube iv(int level, std::int64_t k) { return DyadicCube{1, level, {k, 0}}; }

/// Direct packing sup over every cube of the tree.
double packing_oracle(const CarlesonSequence& a) {
  double best = 0.0;
  for (int d = 0; d <= a.maxdepth(); ++d)
    for (std::size_t i = 0; i < GridFunction::cells_for(a.dim(), d); ++i) {
      const DyadicCube Q = a.cube_at(d, i);
      double s = 0.0;
      for (int e = d; e <= a.maxdepth(); ++e)
        for (const auto& T : Q.descendants(e - d)) s += a.alpha(T) * T.volume();
      best = std::max(best, s / Q.volume());
    }
  return best;
}

/// sum_Q alpha_Q prod_i <f_i>_{Q^(k),p0} chi_Q by brute force over cells.
GridFunction sparse_A_oracle(const CarlesonSequence& a, int k, double p0, const std::vector<GridFunction>& f) {
  const int L = f[0].level();
  std::vector<double> out(f[0].size(), 0.0);
  for (const auto& Q : a.support()) {
    if (Q.level - k < a.root().level) continue;
    const auto anc = Q.ancestor(k).cells(L);
    double prod = a.alpha(Q);
    for (const auto& fi : f)
      prod *= std::pow(oracle::mean_over(fi, anc, [p0](double v) { return std::pow(std::abs(v), p0); }), 1.0 / p0);
    for (auto c : Q.cells(L)) out[c] += prod;
  }
  return GridFunction(f[0].dim(), L, std::move(out));
}

/// |F(P)| / |P| where F(P) is the union of strictly smaller selected cubes inside P.
double covered_fraction(const std::vector<DyadicCube>& sel, const DyadicCube& P, int L) {
  std::vector<char> mark(GridFunction::cells_for(P.dim, L), 0);
  for (const auto& R : sel)
    if (R.level > P.level && P.contains(R))
      for (auto c : R.cells(L)) mark[c] = 1;
  std::size_t n = 0;
  for (auto c : P.cells(L)) n += mark[c];
  return static_cast<double>(n) / P.cell_count(L);
}

std::vector<GridFunction> random_inputs(int m, int L, Rng& rng) {
  std::vector<GridFunction> f;
  for (int i = 0; i < m; ++i) f.push_back(random_function(1, L, rng));
  return f;
}

}  // namespace

TEST_CASE("verify_carleson: examples") {
  CarlesonSequence a(root1, 3);
  CHECK(verify_carleson(a).ok);
  a.set(root1, 1.0);
  auto r = verify_carleson(a);
  CHECK(r.ok);
  CHECK(r.worst == root1);
  CHECK(r.worst_ratio == doctest::Approx(1.0));
  a.set(iv(1, 0), 1.0);
  r = verify_carleson(a);
  CHECK_FALSE(r.ok);
  CHECK(r.worst_ratio == doctest::Approx(1.5));
  CHECK(r.worst_ratio == doctest::Approx(packing_oracle(a)));
  CHECK_THROWS_AS(a.set(iv(2, 3), -0.5), DomainError);
}

TEST_CASE("random_carleson is normalized to packing sup 1") {
  for (int t = 0; t < 10; ++t) {
    Rng rng = trial_rng(41, t);
    const auto a = random_carleson(root1, 6, rng);
    CHECK(packing_oracle(a) == doctest::Approx(1.0));
    CHECK(verify_carleson(a).ok);
  }
}

TEST_CASE("verify_sparse and greedy_witness: examples") {
  SparseFamily s{1, 4, {root1}, {oracle::cells1d(4, 0.0, 0.5)}};
  CHECK(verify_sparse(s).ok);

  const std::vector<DyadicCube> chain{root1, iv(1, 0), iv(2, 0)};
  SparseFamily c{1, 4, chain,
                 {oracle::cells1d(4, 0.5, 1.0), oracle::cells1d(4, 0.25, 0.5), oracle::cells1d(4, 0.0, 0.25)}};
  CHECK(verify_sparse(c).ok);
  c.witness[0] = oracle::cells1d(4, 0.0, 0.25);
  const auto bad = verify_sparse(c);
  CHECK_FALSE(bad.ok);
  REQUIRE(bad.offending.has_value());
  CHECK(*bad.offending == root1);

  const auto g = greedy_witness(chain, 4);
  CHECK(g.ok);
  CHECK(verify_sparse(g.family).ok);
  CHECK(g.family.witness[0] == oracle::cells1d(4, 0.5, 1.0));
  CHECK(greedy_witness({root1}, 4).ok);
  // Both halves selected below the root leave it nothing.
  const auto fail = greedy_witness({root1, iv(1, 0), iv(1, 1)}, 4);
  CHECK_FALSE(fail.ok);
  CHECK(*fail.offending == root1);
}

TEST_CASE("eval_sparse_A: examples") {
  const auto one = GridFunction::constant(1, 4, 1.0);
  const std::vector<GridFunction> ones{one};
  const auto r1 = eval_sparse_A(indicator_sequence(std::vector{root1}, root1, 4), 0, 1.0, ones);
  for (double v : r1.values()) CHECK(v == doctest::Approx(1.0));

  const std::vector<GridFunction> right{oracle::indicator1d(4, 0.5, 1.0)};
  const auto r2 = eval_sparse_A(indicator_sequence(std::vector{iv(1, 0)}, root1, 4), 1, 1.0, right);
  for (std::size_t c = 0; c < 16; ++c) CHECK(r2[c] == doctest::Approx(c < 8 ? 0.5 : 0.0));

  const auto half = oracle::indicator1d(4, 0.0, 0.5);
  const std::vector<GridFunction> two{half, half};
  const auto r3 = eval_sparse_A(indicator_sequence(std::vector{root1}, root1, 4), 0, 2.0, two);
  for (double v : r3.values()) CHECK(v == doctest::Approx(0.5));
  CHECK_THROWS(eval_sparse_A(indicator_sequence(std::vector{root1}, root1, 4), 0, 1.0, std::vector<GridFunction>{}));
}

TEST_CASE("eval_sparse_A matches the brute-force oracle; serial equals parallel") {
  for (int t = 0; t < 20; ++t) {
    Rng rng = trial_rng(42, t);
    const auto a = random_carleson(root1, 6, rng);
    const auto f = random_inputs(1 + t % 2, 6, rng);
    const int k = t % 3;
    const double p0 = t % 4 == 3 ? 1.5 : 1.0;
    const auto got = eval_sparse_A(a, k, p0, f, Exec::Parallel);
    const auto ser = eval_sparse_A(a, k, p0, f, Exec::Serial);
    const auto ref = sparse_A_oracle(a, k, p0, f);
    for (std::size_t c = 0; c < got.size(); ++c) {
      CHECK(got[c] == doctest::Approx(ref[c]).epsilon(1e-12));
      CHECK(ser[c] == doctest::Approx(got[c]).epsilon(1e-14));
    }
  }
}

TEST_CASE("multi-sublinearity and monotonicity in p0") {
  for (int t = 0; t < 20; ++t) {
    Rng rng = trial_rng(43, t);
    const auto a = random_carleson(root1, 6, rng);
    auto f = random_inputs(2, 6, rng);
    const auto base = eval_sparse_A(a, 1, 1.0, f);
    const double lam = -2.5;
    std::vector<GridFunction> g{GridFunction::from_cells(1, 6, [&](std::size_t i) { return lam * f[0][i]; }), f[1]};
    const auto scaled = eval_sparse_A(a, 1, 1.0, g);
    for (std::size_t c = 0; c < base.size(); ++c) CHECK(scaled[c] == doctest::Approx(std::abs(lam) * base[c]));
    const auto hi = eval_sparse_A(a, 1, 2.0, f);
    for (std::size_t c = 0; c < base.size(); ++c) CHECK(hi[c] >= base[c] * (1 - 1e-12));
  }
}

TEST_CASE("eval_sparse_T: examples") {
  const std::vector<GridFunction> f{oracle::indicator1d(4, 0.75, 1.0)};
  const auto s = indicator_sequence(std::vector{iv(2, 0)}, root1, 4);
  for (int k : {1, 2}) {
    const auto r = eval_sparse_T(s, k, 1.0, f);
    for (std::size_t c = 0; c < 16; ++c) CHECK(r[c] == doctest::Approx(c < 4 ? 0.25 : 0.0));
  }
  // Saturated dilate: the global average.
  const std::vector<GridFunction> g{oracle::indicator1d(4, 0.0, 0.125)};
  const auto r = eval_sparse_T(s, 3, 2.0, g);
  CHECK(r[0] == doctest::Approx(std::sqrt(0.125)));

  Rng rng = trial_rng(44, 0);
  const auto a = random_carleson(root1, 5, rng);
  const auto h = random_inputs(2, 5, rng);
  const auto t0 = eval_sparse_T(a, 0, 1.0, h), a0 = eval_sparse_A(a, 0, 1.0, h);
  for (std::size_t c = 0; c < t0.size(); ++c) CHECK(t0[c] == doctest::Approx(a0[c]));
  const auto tp = eval_sparse_T(a, 2, 1.0, h, Exec::Parallel), ts = eval_sparse_T(a, 2, 1.0, h, Exec::Serial);
  for (std::size_t c = 0; c < tp.size(); ++c) CHECK(tp[c] == doctest::Approx(ts[c]).epsilon(1e-14));
}

TEST_CASE("slice: examples and exact reassembly") {
  Rng rng = trial_rng(45, 0);
  CHECK(slice(CarlesonSequence(root1, 4), 2).empty());

  CarlesonSequence a(root1, 4);
  for (int lev : {2, 3})
    for (std::int64_t i = 0; i < (1 << lev); ++i) a.set(iv(lev, i), 0.1);
  const auto pieces = slice(a, 2);
  std::set<int> ells;
  for (const auto& p : pieces) {
    ells.insert(p.ell);
    for (const auto& q : p.seq.support()) CHECK((q.level - p.ell) % 2 == 0);
  }
  CHECK(ells == std::set<int>{0, 1});

  const auto one = slice(random_carleson(root1, 5, rng), 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].ell == 0);
  CHECK(one[0].P == root1);

  for (int t = 0; t < 20; ++t) {
    Rng r2 = trial_rng(45, t + 1);
    const auto b = random_carleson(root1, 6, r2);
    const auto f = random_inputs(2, 6, r2);
    const int k = 1 + t % 3;
    const auto whole = eval_sparse_A(b, k, 1.0, f);
    std::vector<double> sum(whole.size(), 0.0);
    for (const auto& p : slice(b, k)) {
      const auto part = eval_sparse_A(p.seq, k, 1.0, f);
      for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += part[c];
    }
    for (std::size_t c = 0; c < sum.size(); ++c) CHECK(sum[c] == doctest::Approx(whole[c]).epsilon(1e-12));
  }
}

TEST_CASE("beta_sequence: examples and Carleson preservation") {
  Rng rng = trial_rng(46, 0);
  const auto a = random_carleson(root1, 5, rng);
  const auto b0 = beta_sequence(a, 0);
  for (const auto& q : a.support()) CHECK(b0.alpha(q) == a.alpha(q));

  CarlesonSequence single(root1, 4);
  single.set(iv(2, 1), 1.0);
  CHECK(beta_sequence(single, 2).alpha(root1) == doctest::Approx(0.25));

  for (int t = 0; t < 30; ++t) {
    Rng r2 = trial_rng(46, t + 1);
    const auto c = random_carleson(root1, 6, r2);
    CHECK(verify_carleson(beta_sequence(c, 1 + t % 2)).ok);
  }
}

TEST_CASE("carleson_embedding_check: examples and randomized") {
  CarlesonSequence a(root1, 4);
  a.set(root1, 1.0);
  const auto one = GridFunction::constant(1, 4, 1.0);
  const std::vector<double> e2{2.0, 2.0};
  const auto r = carleson_embedding_check(a, 1.0, e2, std::vector<GridFunction>{one, one});
  CHECK(r.lhs == doctest::Approx(1.0));
  CHECK(r.holds);

  const std::vector<double> e1{2.0};
  for (int t = 0; t < 50; ++t) {
    Rng rng = trial_rng(47, t);
    const auto b = random_carleson(root1, 6, rng);
    CHECK(carleson_embedding_check(b, 2.0, e1, random_inputs(1, 6, rng)).holds);
    CHECK(carleson_embedding_check(b, 1.0, e2, random_inputs(2, 6, rng)).holds);
  }
  const auto spike = GridFunction::from_cells(1, 6, [](std::size_t i) { return i == 9 ? 1.0 : 0.0; });
  Rng rng = trial_rng(47, 99);
  const auto s = carleson_embedding_check(random_carleson(root1, 6, rng), 2.0, e1, std::vector<GridFunction>{spike});
  CHECK(s.holds);
  CHECK(s.lhs < 0.5 * s.rhs);
  CHECK_THROWS_AS(carleson_embedding_check(a, 2.0, e2, std::vector<GridFunction>{one, one}), DomainError);
}

TEST_CASE("cz_decompose: examples") {
  const std::vector<GridFunction> f{GridFunction::from_cells(1, 4, [](std::size_t i) { return i < 4 ? 4.0 : 0.0; })};
  const auto cz = cz_decompose(f, 1.5, 1.0, 1, root1);
  REQUIRE_FALSE(cz.short_circuit);
  CHECK(cz.parts[0].stopping == std::vector<DyadicCube>{iv(1, 0)});
  for (std::size_t c = 0; c < 16; ++c) {
    CHECK(cz.parts[0].good[c] == doctest::Approx(c < 8 ? 2.0 : 0.0));
    CHECK(cz.parts[0].bad[c] == doctest::Approx(c < 4 ? 2.0 : (c < 8 ? -2.0 : 0.0)));
  }
  CHECK(verify_cz(f, cz).ok);

  const std::vector<GridFunction> z{GridFunction::constant(1, 4, 0.0)};
  const auto cz0 = cz_decompose(z, 1.0, 1.0, 1, root1);
  CHECK(cz0.parts[0].stopping.empty());
  for (std::size_t c = 0; c < 16; ++c) CHECK(cz0.parts[0].bad[c] == 0.0);

  Rng rng = trial_rng(48, 0);
  const std::vector<GridFunction> small{random_function(1, 4, rng, 0.0, 0.9)};
  const auto cz1 = cz_decompose(small, 1.0, 1.5, 1, root1);
  CHECK(cz1.parts[0].stopping.empty());
  for (std::size_t c = 0; c < 16; ++c) CHECK(cz1.parts[0].good[c] == doctest::Approx(std::pow(small[0][c], 1.5)));

  const auto sc = cz_decompose(f, 0.5, 1.0, 1, root1);
  CHECK(sc.short_circuit);
  CHECK_THROWS_AS(cz_decompose(f, 0.0, 1.0, 1, root1), DomainError);
}

TEST_CASE("cz_decompose invariants on random tuples") {
  for (int t = 0; t < 50; ++t) {
    Rng rng = trial_rng(49, t);
    const int m = 1 + t % 2;
    const double p0 = t % 3 == 2 ? 1.5 : 1.0;
    std::vector<GridFunction> f;
    for (int i = 0; i < m; ++i) f.push_back(random_weight(1, 7, rng, -4.0, 2.0));
    double lam = 0.0;
    for (const auto& fi : f) lam = std::max(lam, std::pow(average(fi, root1, p0), m));
    const auto cz = cz_decompose(f, lam * 2.0, p0, m, root1);
    REQUIRE_FALSE(cz.short_circuit);
    const auto chk = verify_cz(f, cz);
    CHECK(chk.ok);
    CHECK(chk.max_mean_defect < 1e-12);
  }
}

TEST_CASE("dyadic_maximal: examples and the weighted bound") {
  const auto one = GridFunction::constant(1, 4, 1.0);
  const auto m1 = dyadic_maximal(one, nullptr, MaximalMode::PlainP0);
  for (double v : m1.values()) CHECK(v == doctest::Approx(1.0));
  const auto m = dyadic_maximal(oracle::indicator1d(4, 0.0, 0.25), nullptr, MaximalMode::PlainP0);
  for (std::size_t c = 8; c < 16; ++c) CHECK(m[c] == doctest::Approx(0.25));
  for (std::size_t c = 4; c < 8; ++c) CHECK(m[c] == doctest::Approx(0.5));
  for (std::size_t c = 0; c < 4; ++c) CHECK(m[c] == doctest::Approx(1.0));
  CHECK_THROWS_AS(dyadic_maximal(one, nullptr, MaximalMode::SigmaWeighted), DomainError);

  for (int t = 0; t < 100; ++t) {
    Rng rng = trial_rng(50, t);
    const auto f = random_function(1, 7, rng, -1.0, 1.0);
    const auto sigma = random_weight(1, 7, rng);
    const auto mf = dyadic_maximal(f, &sigma, MaximalMode::SigmaWeighted);
    CHECK(weighted_norm(mf, 2.0, sigma) <= 2.0 * weighted_norm(f, 2.0, sigma) * (1 + 1e-9));
    const auto ms = dyadic_maximal(f, &sigma, MaximalMode::SigmaWeighted, 1.0, Exec::Serial);
    for (std::size_t c = 0; c < f.size(); ++c) CHECK(ms[c] == doctest::Approx(mf[c]).epsilon(1e-12));
  }
}

TEST_CASE("measure_weak_norm: examples") {
  CarlesonSequence a(root1, 5);
  a.set(root1, 1.0);
  CHECK(measure_weak_norm(a, 0, 1.0, 1, 1, 7) == doctest::Approx(1.0));
  for (int m : {1, 2}) CHECK(measure_weak_norm(a, 0, 1.0, m, 40, 7) <= 1.0 + 1e-9);
  Rng rng = trial_rng(51, 0);
  const auto b = random_carleson(root1, 5, rng);
  double prev = 0.0;
  for (int trials : {1, 4, 16, 64}) {
    const double w = measure_weak_norm(b, 1, 1.0, 2, trials, 3);
    CHECK(w >= prev);
    prev = w;
  }
  CHECK(measure_weak_norm(b, 1, 1.0, 2, 16, 3) == measure_weak_norm(b, 1, 1.0, 2, 16, 3));
}

TEST_CASE("select_sparse: examples") {
  CarlesonSequence a(root1, 4);
  a.set(root1, 1.0);
  const std::vector<GridFunction> ones{GridFunction::constant(1, 4, 1.0)};
  const auto r = select_sparse(a, 0, 1.0, ones, 3.0);
  CHECK(r.selected == std::vector<DyadicCube>{root1});
  CHECK(r.witness.ok);

  Rng rng = trial_rng(52, 0);
  const auto b = random_carleson(root1, 5, rng);
  const std::vector<GridFunction> zero{GridFunction::constant(1, 5, 0.0)};
  const auto z = select_sparse(b, 1, 1.0, zero, 10.0);
  CHECK(z.witness.ok);
  CHECK(z.pointwise_constant == 0.0);
  const std::vector<GridFunction> neg{GridFunction::constant(1, 5, -1.0)};
  CHECK_THROWS_AS(select_sparse(b, 1, 1.0, neg, 10.0), DomainError);
}

TEST_CASE("select_sparse: the selected family leaves half of each cube uncovered") {
  int trial = 0;
  for (int k : {0, 1, 2})
    for (int m : {1, 2})
      for (double p0 : {1.0, 1.5, 2.0}) {
        for (int t = 0; t < 6; ++t, ++trial) {
          Rng rng = trial_rng(53, trial);
          const auto a = random_carleson(root1, 8, rng);
          const auto f = random_inputs(m, 8, rng);
          const double cstar = default_cstar(a, k, p0, m, 8, trial);
          std::vector<CarlesonSequence> pieces{a};
          if (k > 0) {
            pieces.clear();
            for (auto& piece : slice(a, k)) pieces.push_back(std::move(piece.seq));
          }
          for (const auto& seq : pieces) {
            const auto r = select_sparse(seq, k, p0, f, cstar);
            CHECK(r.witness.ok);
            for (const auto& P : r.selected) CHECK(covered_fraction(r.selected, P, 8) <= 0.5);
            CHECK(std::isfinite(r.pointwise_constant));
          }
        }
      }
}

TEST_CASE("dominate: examples") {
  Rng rng = trial_rng(54, 0);
  const auto a = random_carleson(root1, 7, rng);
  const auto f = random_inputs(2, 7, rng);
  const auto d0 = dominate(a, 0, 1.0, f);
  CHECK(d0.pieces.size() == 1);
  CHECK(std::isfinite(d0.pointwise_ratio));
  const auto d2 = dominate(a, 2, 1.0, f);
  CHECK(d2.all_sparse);
  CHECK(std::isfinite(d2.pointwise_ratio));
  CHECK(std::isfinite(d2.norm_ratio));
  const std::vector<GridFunction> zero{GridFunction::constant(1, 7, 0.0), GridFunction::constant(1, 7, 0.0)};
  const auto dz = dominate(a, 2, 1.0, zero);
  CHECK(dz.lhs_norm == 0.0);
  CHECK(dz.rhs_norm == 0.0);
}
