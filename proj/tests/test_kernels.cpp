#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "oracle.hpp"
#include "sparselab/kernels.hpp"
#include "sparselab/random.hpp"

using namespace sparselab;

namespace {

double max_diff(const GridFunction& a, const GridFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

std::vector<cplx> as_complex(const GridFunction& f) { return {f.values().begin(), f.values().end()}; }

}  // namespace

TEST_CASE("FFT coefficients agree with the direct DFT") {
  for (int t = 0; t < 5; ++t) {
    Rng rng = trial_rng(61, t);
    const auto f = random_function(1, 6, rng, -1.0, 1.0);
    const auto got = fourier_coefficients(ComplexGrid::from_real(f));
    const auto ref = oracle::dft(as_complex(f));
    for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(got.values[k] - ref[k]) < 1e-13);
    const auto back = inverse_fourier(got);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(back.values[i] - f[i]) < 1e-13);
  }
}

TEST_CASE("linear multipliers: identity, zero, Plancherel") {
  Rng rng = trial_rng(62, 0);
  const auto f = random_function(1, 8, rng, -1.0, 1.0);
  CHECK(max_diff(apply_linear_multiplier(Symbol::named("identity"), f), f) < 1e-12);
  const auto z = apply_linear_multiplier(Symbol::named("zero"), f);
  for (double v : z.values()) CHECK(v == 0.0);
  const auto f2 = random_function(2, 5, rng, -1.0, 1.0);
  CHECK(max_diff(apply_linear_multiplier(Symbol::named("identity", 2), f2), f2) < 1e-12);

  for (const char* name : {"hilbert", "oscillating", "bump", "sign"}) {
    for (int t = 0; t < 10; ++t) {
      Rng r2 = trial_rng(63, t);
      const auto g = random_function(1, 7, r2, -1.0, 1.0);
      const Symbol m = Symbol::named(name);
      const auto coeffs = oracle::dft(as_complex(g));
      // ||T_m g||_2 = ||m g^||_2 <= ||m||_inf ||g||_2.
      double s = 0.0, sup = 0.0;
      for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const cplx mk = m(static_cast<double>(frequency_of(k, 128)));
        s += std::norm(mk * coeffs[k]);
        sup = std::max(sup, std::abs(mk));
      }
      const auto Tg = apply_linear_multiplier_complex(m, ComplexGrid::from_real(g));
      double tn = 0.0;
      for (const auto& v : Tg.values) tn += std::norm(v);
      tn = std::sqrt(tn / 128);
      CHECK(tn == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
      CHECK(tn <= sup * oracle::l2(g) * (1 + 1e-12));
    }
  }
}

TEST_CASE("linearity and composition of linear multipliers") {
  Rng rng = trial_rng(64, 0);
  const auto f = random_function(1, 7, rng, -1.0, 1.0), g = random_function(1, 7, rng, -1.0, 1.0);
  const Symbol osc = Symbol::named("oscillating"), bump = Symbol::named("bump");
  const auto lin = apply_linear_multiplier_complex(
      bump, ComplexGrid::from_real(GridFunction::from_cells(1, 7, [&](std::size_t i) { return 2 * f[i] - 3 * g[i]; })));
  const auto tf = apply_linear_multiplier_complex(bump, ComplexGrid::from_real(f));
  const auto tg = apply_linear_multiplier_complex(bump, ComplexGrid::from_real(g));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(lin.values[i] - (2.0 * tf.values[i] - 3.0 * tg.values[i])) < 1e-12);

  const Symbol prod("prod", 1, [&](double x, double y) { return osc(x, y) * bump(x, y); });
  const auto two = apply_linear_multiplier_complex(osc, apply_linear_multiplier_complex(bump, ComplexGrid::from_real(f)));
  const auto one = apply_linear_multiplier_complex(prod, ComplexGrid::from_real(f));
  CHECK(two.max_abs_diff(one) < 1e-10);
}

TEST_CASE("Hilbert transform: constants, double application, Plancherel") {
  CHECK(max_diff(hilbert_transform(GridFunction::constant(1, 6, 2.0)), GridFunction::constant(1, 6, 0.0)) < 1e-14);
  for (int t = 0; t < 10; ++t) {
    Rng rng = trial_rng(65, t);
    const auto f = random_function(1, 8, rng, -1.0, 1.0);
    double mean = f.integral();
    const auto hh = hilbert_transform_complex(hilbert_transform_complex(ComplexGrid::from_real(f)));
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(hh.values[i] + (f[i] - mean)) < 1e-10);

    // The real transform drops the Nyquist mode, so H(H f) = -(f - mean - nyquist part).
    const auto coeffs = oracle::dft(as_complex(f));
    const double nyq = coeffs[128].real();
    const auto hr = hilbert_transform(hilbert_transform(f));
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(hr[i] + (f[i] - mean - nyq * (i % 2 ? -1 : 1))) < 1e-10);

    const auto hc = hilbert_transform_complex(ComplexGrid::from_real(f));
    double s = 0.0;
    for (const auto& v : hc.values) s += std::norm(v);
    const auto centered = GridFunction::from_cells(1, 8, [&](std::size_t i) { return f[i] - mean; });
    CHECK(std::sqrt(s / 256) == doctest::Approx(oracle::l2(centered)).epsilon(1e-12));
  }
}

TEST_CASE("bilinear multipliers: product, zero, delta symbol, bilinearity") {
  Rng rng = trial_rng(66, 0);
  const auto f = random_function(1, 6, rng, -1.0, 1.0), g = random_function(1, 6, rng, -1.0, 1.0);
  const auto fg = apply_bilinear_multiplier(Symbol::named("bilinear-identity", 2), f, g);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(fg[i] - f[i] * g[i]) < 1e-12);
  const auto z = apply_bilinear_multiplier(Symbol::named("bilinear-riesz", 2), f, GridFunction::constant(1, 6, 0.0));
  for (double v : z.values()) CHECK(v == 0.0);
  const auto d = apply_bilinear_multiplier(Symbol::named("bilinear-delta", 2), f, g);
  const double mf = f.integral();
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(d[i] - mf * g[i]) < 1e-12);

  const Symbol m = Symbol::named("bilinear-riesz-smooth", 2);
  const auto h = random_function(1, 6, rng, -1.0, 1.0);
  const auto sum = GridFunction::from_cells(1, 6, [&](std::size_t i) { return f[i] + 2 * h[i]; });
  const auto a = apply_bilinear_multiplier_complex(m, sum, g);
  const auto b = apply_bilinear_multiplier_complex(m, f, g), c = apply_bilinear_multiplier_complex(m, h, g);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(a.values[i] - (b.values[i] + 2.0 * c.values[i])) < 1e-12);
  const auto ser = apply_bilinear_multiplier_complex(m, f, g, Exec::Serial);
  CHECK(ser.max_abs_diff(b) < 1e-13);
  CHECK_THROWS_AS(apply_bilinear_multiplier(Symbol::named("hilbert"), f, g), DimensionError);
}

TEST_CASE("bilinear multiplier matches the direct double sum") {
  Rng rng = trial_rng(67, 0);
  const auto f = random_function(1, 4, rng, -1.0, 1.0), g = random_function(1, 4, rng, -1.0, 1.0);
  const Symbol m = Symbol::named("bilinear-riesz", 2);
  const auto F = oracle::dft(as_complex(f)), G = oracle::dft(as_complex(g));
  const auto got = apply_bilinear_multiplier_complex(m, f, g);
  for (std::size_t x = 0; x < 16; ++x) {
    cplx s = 0.0;
    for (std::size_t a = 0; a < 16; ++a)
      for (std::size_t b = 0; b < 16; ++b) {
        const auto xi = frequency_of(a, 16), eta = frequency_of(b, 16);
        s += m(double(xi), double(eta)) * F[a] * G[b] *
             std::polar(1.0, 2.0 * std::numbers::pi * double(x) * double(xi + eta) / 16.0);
      }
    CHECK(std::abs(got.values[x] - s) < 1e-12);
  }
}

TEST_CASE("kernel_from_symbol: identity, Hilbert shape, Hermitian symbols") {
  const auto id = kernel_from_symbol(Symbol::named("identity"), 1, 6);
  const std::size_t y0[1] = {3};
  CHECK(id.on_diagonal(3, y0));
  CHECK_THROWS_AS(id(3, y0), DomainError);
  for (std::size_t x = 0; x < 64; ++x)
    if (x != 3) CHECK(std::abs(id(x, y0)) < 1e-12);
  const auto id2 = kernel_from_symbol(Symbol::named("bilinear-identity", 2), 2, 5);
  const std::size_t y2[2] = {1, 4};
  CHECK(std::abs(id2(7, y2)) < 1e-12);

  const int L = 10;
  const auto h = kernel_from_symbol(Symbol::named("hilbert"), 1, L);
  // The only non-Hermitian slot is the unpaired Nyquist frequency, worth exactly 1.
  CHECK(h.discarded_imag == doctest::Approx(1.0));
  const std::size_t zero[1] = {0};
  const std::int64_t N = 1 << L;
  // Odd in z, and the lattice kernel is the exact two-periodic form.
  for (std::int64_t z = 1; z < N; ++z) {
    CHECK(h(z, zero) == doctest::Approx(-h(N - z, zero)).epsilon(1e-9).scale(1.0));
    CHECK(h(z, zero) == doctest::Approx(sharp_hilbert_kernel(z, L)).epsilon(1e-9).scale(1.0));
  }
  // Averaging adjacent lattice points recovers cot(pi z / N) away from the diagonal.
  const auto cot = hilbert_kernel(L);
  double worst = 0.0;
  for (std::int64_t z = 8; z <= N / 4; ++z) {
    const double avg = 0.5 * (h(z, zero) + h(z + 1, zero));
    const std::size_t y[1] = {0};
    const double ref = 0.5 * (cot(z, y) + cot(z + 1, y));
    worst = std::max(worst, std::abs(avg - ref) / std::abs(ref));
  }
  CHECK(worst < 0.1);

  const Symbol gauss("gauss", 2, [](double x, double y) { return cplx(std::exp(-(x * x + y * y) / 16.0)); },
                     true);
  CHECK(hermitian_on_lattice(gauss, 2, 5));
  CHECK(kernel_from_symbol(gauss, 2, 5).discarded_imag < 1e-9);
  CHECK(kernel_from_symbol(Symbol::named("bump"), 1, 8).discarded_imag < 1e-9);
}

TEST_CASE("check_H2: zero kernel, Hilbert decay at p0 = 2 and p0 = 1") {
  const KernelSample zero("zero", 1, 8, [](std::size_t, std::span<const std::size_t>) { return 0.0; });
  const auto z = check_H2(zero, 2.0, default_h2_cube(5), 5);
  CHECK(z.degenerate);

  const auto h2 = check_H2(hilbert_kernel(10), 2.0, default_h2_cube(5), 5);
  MESSAGE("hilbert p0=2 delta_hat " << h2.delta_hat);
  CHECK(h2.delta_hat == doctest::Approx(1.5).epsilon(0.1));
  CHECK(h2.delta0 == doctest::Approx(h2.delta_hat - 0.5));
  CHECK(h2.rings.size() == 4);
  for (const auto& r : h2.rings) CHECK(r.value > 0.0);

  const auto h1 = check_H2(hilbert_kernel(10), 1.0, default_h2_cube(5), 5);
  MESSAGE("hilbert p0=1 delta_hat " << h1.delta_hat);
  CHECK(h1.delta_hat == doctest::Approx(2.0).epsilon(0.1));

  // Rings past the torus are dropped, and too few left is an error.
  CHECK_THROWS_AS(check_H2(hilbert_kernel(8), 2.0, DyadicCube{1, 3, {0, 0}}, 5), DomainError);
  CHECK_THROWS_AS(check_H2(hilbert_kernel(8), 0.5, default_h2_cube(5), 5), DomainError);
}

TEST_CASE("check_H2 on a smooth bilinear kernel decays in max(j1, j2)") {
  const auto K = kernel_from_symbol(Symbol::named("bilinear-riesz-smooth", 2), 2, 7);
  const auto r = check_H2(K, 2.0, default_h2_cube(4), 4);
  CHECK_FALSE(r.degenerate);
  CHECK(r.delta_hat > 0.0);
}

TEST_CASE("check_Msl: constant, oscillating and unbounded symbols") {
  const auto one = check_Msl(Symbol::named("identity"), 2.0, 2, 6);
  CHECK(one.member);
  for (const auto& t : one.terms)
    if (t.alpha[0] >= 1) CHECK(t.value == 0.0);
  CHECK(one.terms[0].value > 0.0);
  CHECK(std::isfinite(one.terms[0].value));

  const auto osc = check_Msl(Symbol::named("oscillating"), 2.0, 1, 6);
  CHECK(osc.member);
  const auto lin = check_Msl(Symbol::named("linear"), 2.0, 1, 6);
  CHECK_FALSE(lin.member);
  CHECK(lin.terms[0].refined > lin.terms[0].value);
  CHECK_THROWS_AS(check_Msl(Symbol::named("identity"), 3.0, 1, 6), DomainError);
}

TEST_CASE("check_hormander_bilinear: constant, Riesz-type and growing symbols") {
  const auto one = check_hormander_bilinear(Symbol::named("bilinear-identity", 2), 2);
  CHECK(one.member);
  for (const auto& t : one.terms) CHECK(t.value == doctest::Approx(t.alpha == std::array<int, 2>{0, 0} ? 1.0 : 0.0));

  const auto riesz = check_hormander_bilinear(Symbol::named("bilinear-riesz", 2), 2);
  CHECK(riesz.member);
  // xi / (|xi| + |eta|) has a kink across eta = 0: first derivatives are fine,
  // the second eta derivative grows with the box.
  const auto cone = check_hormander_bilinear(Symbol::named("cone", 2), 2);
  for (const auto& t : cone.terms) {
    if (t.alpha[0] + t.alpha[1] <= 1) CHECK(t.stable);
    if (t.alpha == std::array<int, 2>{0, 2}) CHECK_FALSE(t.stable);
  }
  CHECK_FALSE(check_hormander_bilinear(Symbol::named("product", 2), 2).member);
}
