#include "sparselab/kernels.hpp"

#include <fftw3.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

#include "sparselab/random.hpp"

namespace sparselab {

// ---------------------------------------------------------------------------
// ComplexGrid

ComplexGrid ComplexGrid::from_real(const GridFunction& f) {
  ComplexGrid g{f.dim(), f.level(), {}};
  g.values.assign(f.values().begin(), f.values().end());
  return g;
}

GridFunction ComplexGrid::real() const {
  std::vector<double> v(values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values[i].real();
  return GridFunction(dim, level, std::move(v));
}

GridFunction ComplexGrid::imag() const {
  std::vector<double> v(values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values[i].imag();
  return GridFunction(dim, level, std::move(v));
}

GridFunction ComplexGrid::modulus() const {
  std::vector<double> v(values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(values[i]);
  return GridFunction(dim, level, std::move(v));
}

double ComplexGrid::max_abs_diff(const ComplexGrid& other) const {
  if (dim != other.dim || level != other.level) throw DimensionError("complex grids differ in shape");
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) d = std::max(d, std::abs(values[i] - other.values[i]));
  return d;
}

// ---------------------------------------------------------------------------
// Symbols

Symbol::Symbol(std::string name, int freq_dim, Fn fn, bool bilinear)
    : name_(std::move(name)), freq_dim_(freq_dim), fn_(std::move(fn)), bilinear_(bilinear) {
  if (freq_dim < 1 || freq_dim > 2) throw DimensionError("symbols live on 1 or 2 frequency axes");
  if (bilinear && freq_dim != 2) throw DimensionError("bilinear symbols need two frequency axes");
}

namespace {

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

Symbol Symbol::named(const std::string& name, int dim) {
  using namespace std::complex_literals;
  if (dim != 1 && dim != 2) throw DimensionError("dimension must be 1 or 2");
  if (name == "identity") return Symbol(name, dim, [](double, double) { return cplx(1.0); });
  if (name == "zero") return Symbol(name, dim, [](double, double) { return cplx(0.0); });
  if (name == "sign") return Symbol(name, dim, [](double x, double) { return cplx(sgn(x)); });
  if (name == "hilbert" || name == "riesz1d") {
    if (dim == 1) return Symbol(name, 1, [](double x, double) { return -1i * sgn(x); });
    return Symbol(name, 2, [](double x, double y) {
      const double r = std::hypot(x, y);
      return r == 0.0 ? cplx(0.0) : -1i * (x / r);
    });
  }
  if (name == "oscillating")
    return Symbol(name, dim, [](double x, double y) {
      const double r = std::hypot(x, y);
      return r == 0.0 ? cplx(0.0) : std::exp(1i * std::log(r));
    });
  if (name == "linear") return Symbol(name, dim, [](double x, double) { return cplx(x); });
  if (name == "bump")
    return Symbol(name, dim, [](double x, double y) { return cplx(std::exp(-(x * x + y * y) / 64.0)); });

  if (name == "bilinear-identity") return Symbol(name, 2, [](double, double) { return cplx(1.0); }, true);
  if (name == "bilinear-delta")
    return Symbol(name, 2, [](double x, double) { return cplx(x == 0.0 ? 1.0 : 0.0); }, true);
  if (name == "cone")
    return Symbol(name, 2, [](double x, double y) {
      const double r = std::abs(x) + std::abs(y);
      return r == 0.0 ? cplx(0.0) : cplx(x / r);
    }, true);
  if (name == "bilinear-riesz")
    return Symbol(name, 2, [](double x, double y) {
      const double r = std::hypot(x, y);
      return r == 0.0 ? cplx(0.0) : cplx(x / r);
    }, true);
  if (name == "bilinear-riesz-smooth")
    return Symbol(name, 2, [](double x, double y) {
      const double r = std::hypot(x, y);
      return r == 0.0 ? cplx(0.0) : cplx(x / r * std::exp(-(r * r) / (2.0 * 32.0 * 32.0)));
    }, true);
  if (name == "product") return Symbol(name, 2, [](double x, double y) { return cplx(x * y); }, true);
  throw DomainError("unknown symbol '" + name + "'");
}

Symbol Symbol::sampled(const GridFunction& values, bool bilinear, std::string name) {
  if (bilinear && values.dim() != 2) throw DimensionError("bilinear sampled symbols need a 2D table");
  const int L = values.level();
  const std::int64_t n = std::int64_t{1} << L;
  auto slot = [n](double v) {
    auto k = static_cast<std::int64_t>(std::llround(v));
    if (k < -n / 2 || k >= n / 2) throw DomainError("frequency outside the sampled window");
    return static_cast<std::size_t>(k < 0 ? k + n : k);
  };
  Fn fn;
  if (values.dim() == 1) {
    fn = [values, slot](double x, double) { return cplx(values[slot(x)]); };
  } else {
    fn = [values, slot, n](double x, double y) { return cplx(values[slot(x) * n + slot(y)]); };
  }
  Symbol s(std::move(name), values.dim(), std::move(fn), bilinear);
  s.sampled_level_ = L;
  return s;
}

bool Symbol::defined_at(std::int64_t xi, std::int64_t eta) const {
  if (sampled_level_ < 0) return true;
  const std::int64_t h = std::int64_t{1} << (sampled_level_ - 1);
  auto inside = [h](std::int64_t v) { return v >= -h && v < h; };
  return inside(xi) && (freq_dim_ == 1 || inside(eta));
}

// ---------------------------------------------------------------------------
// FFT

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void fft_inplace(std::vector<cplx>& data, int dim, int L, int direction) {
  const int n = 1 << L;
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = dim == 1 ? fftw_plan_dft_1d(n, ptr, ptr, direction, FFTW_ESTIMATE)
                    : fftw_plan_dft_2d(n, n, ptr, ptr, direction, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

ComplexGrid fourier_coefficients(const ComplexGrid& f) {
  ComplexGrid out = f;
  fft_inplace(out.values, f.dim, f.level, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(out.values.size());
  for (auto& v : out.values) v *= scale;
  return out;
}

ComplexGrid inverse_fourier(const ComplexGrid& coeffs) {
  ComplexGrid out = coeffs;
  fft_inplace(out.values, coeffs.dim, coeffs.level, FFTW_BACKWARD);
  return out;
}

std::vector<cplx> sample_symbol(const Symbol& m, int dim, int L) {
  const std::int64_t n = std::int64_t{1} << L;
  if (m.freq_dim() != dim) throw DimensionError("symbol has " + std::to_string(m.freq_dim()) + " frequency axes, grid has " +
                                                std::to_string(dim));
  std::vector<cplx> out(GridFunction::cells_for(dim, L));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::int64_t a = frequency_of(dim == 1 ? i : i / n, n);
    const std::int64_t b = dim == 1 ? 0 : frequency_of(i % n, n);
    if (!m.defined_at(a, b)) throw DimensionError("sampled symbol does not cover the lattice");
    out[i] = m(static_cast<double>(a), static_cast<double>(b));
  }
  return out;
}

bool hermitian_on_lattice(const Symbol& m, int dim, int L, double tol) {
  const auto v = sample_symbol(m, dim, L);
  const std::size_t n = std::size_t{1} << L;
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t j;
    if (dim == 1) {
      j = (n - i) % n;
    } else {
      j = ((n - i / n) % n) * n + (n - i % n) % n;
    }
    if (j == i) continue;
    if (std::abs(v[j] - std::conj(v[i])) > tol * (1.0 + std::abs(v[i]))) return false;
  }
  return true;
}

ComplexGrid apply_linear_multiplier_complex(const Symbol& m, const ComplexGrid& f) {
  if (m.bilinear()) throw DimensionError("linear multiplier needs a linear symbol");
  ComplexGrid c = fourier_coefficients(f);
  const auto sym = sample_symbol(m, f.dim, f.level);
  for (std::size_t i = 0; i < sym.size(); ++i) c.values[i] *= sym[i];
  return inverse_fourier(c);
}

GridFunction apply_linear_multiplier(const Symbol& m, const GridFunction& f) {
  const ComplexGrid out = apply_linear_multiplier_complex(m, ComplexGrid::from_real(f));
  return hermitian_on_lattice(m, f.dim(), f.level()) ? out.real() : out.modulus();
}

ComplexGrid hilbert_transform_complex(const ComplexGrid& f) {
  if (f.dim != 1) throw DimensionError("the Hilbert transform is one-dimensional");
  return apply_linear_multiplier_complex(Symbol::named("hilbert"), f);
}

GridFunction hilbert_transform(const GridFunction& f) {
  return hilbert_transform_complex(ComplexGrid::from_real(f)).real();
}

ComplexGrid apply_bilinear_multiplier_complex(const Symbol& m, const GridFunction& f, const GridFunction& g,
                                              Exec exec) {
  if (!m.bilinear()) throw DimensionError("bilinear multiplier needs a bilinear symbol");
  if (f.dim() != 1) throw DimensionError("bilinear multipliers are implemented for n = 1");
  require_same_shape(f, g);
  const int L = f.level();
  const auto n = static_cast<std::int64_t>(f.size());
  for (std::int64_t a = 0; a < n; ++a)
    if (!m.defined_at(frequency_of(a, n), -n / 2) || !m.defined_at(frequency_of(a, n), n / 2 - 1))
      throw DimensionError("sampled symbol does not cover the lattice");
  const ComplexGrid fh = fourier_coefficients(ComplexGrid::from_real(f));
  const ComplexGrid gh = fourier_coefficients(ComplexGrid::from_real(g));

  if (exec == Exec::Serial) {
    // Literal double sum per output point.
    std::vector<cplx> twiddle(n);
    for (std::int64_t t = 0; t < n; ++t)
      twiddle[t] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n));
    ComplexGrid out{1, L, std::vector<cplx>(n)};
    for (std::int64_t x = 0; x < n; ++x) {
      cplx s = 0.0;
      for (std::int64_t a = 0; a < n; ++a)
        for (std::int64_t b = 0; b < n; ++b) {
          const std::int64_t xi = frequency_of(a, n), eta = frequency_of(b, n);
          const std::int64_t phase = ((x * (xi + eta)) % n + n) % n;
          s += m(static_cast<double>(xi), static_cast<double>(eta)) * fh.values[a] * gh.values[b] * twiddle[phase];
        }
      out.values[x] = s;
    }
    return out;
  }

  // Group frequency pairs by xi + eta (mod N), then one inverse transform.
  ComplexGrid h{1, L, std::vector<cplx>(n)};
#pragma omp parallel for schedule(static)
  for (std::int64_t z = 0; z < n; ++z) {
    cplx s = 0.0;
    for (std::int64_t a = 0; a < n; ++a) {
      const std::int64_t b = ((z - a) % n + n) % n;
      s += m(static_cast<double>(frequency_of(a, n)), static_cast<double>(frequency_of(b, n))) * fh.values[a] *
           gh.values[b];
    }
    h.values[z] = s;
  }
  return inverse_fourier(h);
}

GridFunction apply_bilinear_multiplier(const Symbol& m, const GridFunction& f, const GridFunction& g, Exec exec) {
  const ComplexGrid out = apply_bilinear_multiplier_complex(m, f, g, exec);
  return hermitian_on_lattice(m, 2, f.level()) ? out.real() : out.modulus();
}

GridFunction LinearMultiplierOperator::apply(std::span<const GridFunction> f) const {
  if (f.size() != 1) throw DimensionError("linear operator takes one function");
  return apply_linear_multiplier(m_, f[0]);
}

GridFunction HilbertOperator::apply(std::span<const GridFunction> f) const {
  if (f.size() != 1) throw DimensionError("linear operator takes one function");
  return hilbert_transform(f[0]);
}

GridFunction BilinearMultiplierOperator::apply(std::span<const GridFunction> f) const {
  if (f.size() != 2) throw DimensionError("bilinear operator takes two functions");
  return apply_bilinear_multiplier(m_, f[0], f[1]);
}

std::unique_ptr<Operator> make_operator(const std::string& name) {
  if (name == "hilbert") return std::make_unique<HilbertOperator>();
  if (name == "identity") return std::make_unique<LinearMultiplierOperator>(Symbol::named("identity"));
  if (name.rfind("multiplier:", 0) == 0)
    return std::make_unique<LinearMultiplierOperator>(Symbol::named(name.substr(11)));
  if (name.rfind("bilinear:", 0) == 0)
    return std::make_unique<BilinearMultiplierOperator>(Symbol::named(name.substr(9), 2));
  throw DomainError("unknown operator '" + name + "'");
}

// ---------------------------------------------------------------------------
// Kernels

KernelSample::KernelSample(std::string name, int arity, int L, Fn fn)
    : name_(std::move(name)), arity_(arity), L_(L), fn_(std::move(fn)) {
  if (arity < 1 || arity > 2) throw DimensionError("kernels of arity 1 or 2 are supported");
  check_shape(1, L);
}

bool KernelSample::on_diagonal(std::size_t x, std::span<const std::size_t> y) const {
  return std::all_of(y.begin(), y.end(), [x](std::size_t v) { return v == x; });
}

double KernelSample::operator()(std::size_t x, std::span<const std::size_t> y) const {
  if (static_cast<int>(y.size()) != arity_) throw DimensionError("kernel arity mismatch");
  if (on_diagonal(x, y)) throw DomainError("kernel evaluated on the diagonal");
  return fn_(x, y);
}

std::vector<cplx> inverse_symbol_table(const Symbol& m, int arity, int L) {
  if (arity == 1 && (m.bilinear() || m.freq_dim() != 1)) throw DimensionError("arity-1 kernels need a 1D linear symbol");
  if (arity == 2 && !m.bilinear()) throw DimensionError("arity-2 kernels need a bilinear symbol");
  auto table = sample_symbol(m, arity, L);
  fft_inplace(table, arity, L, FFTW_BACKWARD);
  return table;
}

KernelSample kernel_from_symbol(const Symbol& m, int arity, int L) {
  const auto table = inverse_symbol_table(m, arity, L);
  std::vector<double> re(table.size());
  double imag = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    re[i] = table[i].real();
    imag = std::max(imag, std::abs(table[i].imag()));
  }
  const std::size_t n = std::size_t{1} << L;
  KernelSample::Fn fn;
  if (arity == 1) {
    fn = [re, n](std::size_t x, std::span<const std::size_t> y) { return re[(x + n - y[0]) % n]; };
  } else {
    fn = [re, n](std::size_t x, std::span<const std::size_t> y) {
      return re[((x + n - y[0]) % n) * n + (x + n - y[1]) % n];
    };
  }
  KernelSample k("symbol:" + m.name(), arity, L, std::move(fn));
  k.discarded_imag = imag;
  return k;
}

KernelSample hilbert_kernel(int L) {
  const double n = std::ldexp(1.0, L);
  return KernelSample("hilbert", 1, L, [n](std::size_t x, std::span<const std::size_t> y) {
    const double d = (static_cast<double>(x) - static_cast<double>(y[0])) / n;
    return 1.0 / std::tan(std::numbers::pi * d);
  });
}

double sharp_hilbert_kernel(std::int64_t z, int L) {
  const std::int64_t n = std::int64_t{1} << L;
  z = ((z % n) + n) % n;
  if (z % 2 == 0) return 0.0;
  return 2.0 / std::tan(std::numbers::pi * static_cast<double>(z) / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// (H2) ring decay

DyadicCube default_h2_cube(int jmax) { return DyadicCube{1, jmax + 1, {0, 0}}; }

namespace {

struct Fit {
  double slope = 0.0, intercept = 0.0, residual = 0.0;
};

Fit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  Fit f;
  const double den = n * sxx - sx * sx;
  f.slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  f.intercept = (sy - f.slope * sx) / n;
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    r += e * e;
  }
  f.residual = std::sqrt(r / n);
  return f;
}

}  // namespace

H2Report check_H2(const KernelSample& K, double p0, const DyadicCube& q, int jmax, int jmin, std::uint64_t seed) {
  if (!(p0 >= 1.0)) throw DomainError("p0 must be >= 1");
  const int L = K.level();
  if (q.dim != 1) throw DimensionError("kernel checks are one-dimensional");
  if (q.level > L - 2) throw DomainError("base cube must be at least two levels above the resolution");
  if (jmin < 1 || jmax < jmin) throw DomainError("need 1 <= jmin <= jmax");

  H2Report r;
  r.kernel = K.name();
  r.arity = K.arity();
  r.p0 = p0;
  r.cube = q;
  r.level = L;
  r.jmin = jmin;
  r.jmax = jmax;

  // Pairs of cell centers in the middle half of Q.
  const std::size_t qc = q.cell_count(L);
  const std::size_t start = static_cast<std::size_t>(q.index[0]) * qc + qc / 4;
  const std::size_t half = qc / 2;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (half <= 64) {
    for (std::size_t a = 0; a < half; ++a)
      for (std::size_t b = a + 1; b < half; ++b) pairs.emplace_back(start + a, start + b);
  } else {
    Rng rng = trial_rng(seed, 0);
    std::uniform_int_distribution<std::size_t> pick(0, half - 1);
    while (pairs.size() < 64) {
      const std::size_t a = pick(rng), b = pick(rng);
      if (a != b) pairs.emplace_back(start + a, start + b);
    }
  }
  r.pairs = pairs.size();
  if (pairs.empty()) throw DomainError("the middle half of the base cube holds a single cell");

  const bool sup_form = p0 == 1.0;
  const double pc = sup_form ? INFINITY : p0 / (p0 - 1.0);
  const double vol = std::ldexp(1.0, -L);

  std::vector<CellSet> rings(jmax + 1);
  for (int j = 0; j <= jmax; ++j) {
    if (j >= 1 && dilate_saturates(q, j)) continue;
    rings[j] = annulus(q, j, L);
  }
  auto usable = [&](int j) { return j == 0 || !dilate_saturates(q, j); };

  auto ring_norm = [&](std::size_t x, std::size_t xb, int j1, int j2) {
    double acc = 0.0;
    std::array<std::size_t, 2> y{}, yb{};
    auto term = [&](double diff, double w) {
      if (w <= 0.0) return;
      if (sup_form)
        acc = std::max(acc, std::abs(diff));
      else
        acc += w * std::pow(std::abs(diff), pc);
    };
    if (K.arity() == 1) {
      for (const auto& cw : rings[j1].cells) {
        y[0] = yb[0] = cw.cell;
        const std::span<const std::size_t> ys(y.data(), 1);
        if (K.on_diagonal(x, ys) || K.on_diagonal(xb, ys)) continue;
        term(K(x, ys) - K(xb, ys), cw.weight * vol);
      }
    } else {
      for (const auto& c1 : rings[j1].cells)
        for (const auto& c2 : rings[j2].cells) {
          y = {c1.cell, c2.cell};
          if (K.on_diagonal(x, y) || K.on_diagonal(xb, y)) continue;
          term(K(x, y) - K(xb, y), c1.weight * c2.weight * vol * vol);
        }
    }
    return sup_form ? acc : std::pow(acc, 1.0 / pc);
  };

  auto measure = [&](int j1, int j2) {
    double best = 0.0;
    const auto np = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(dynamic) reduction(max : best)
    for (std::int64_t i = 0; i < np; ++i) best = std::max(best, ring_norm(pairs[i].first, pairs[i].second, j1, j2));
    return best;
  };

  if (K.arity() == 1) {
    for (int j = jmin; j <= jmax; ++j) {
      if (!usable(j)) {
        r.saturated.push_back(j);
        continue;
      }
      r.rings.push_back(H2Ring{j, 0, j, measure(j, 0)});
    }
  } else {
    for (int j = jmin; j <= jmax; ++j)
      if (!usable(j)) r.saturated.push_back(j);
    for (int j1 = 0; j1 <= jmax; ++j1)
      for (int j2 = 0; j2 <= jmax; ++j2) {
        const int j0 = std::max(j1, j2);
        if (j0 < jmin || !usable(j1) || !usable(j2)) continue;
        r.rings.push_back(H2Ring{j1, j2, j0, measure(j1, j2)});
      }
  }

  std::vector<double> xs, ys;
  std::vector<int> distinct;
  for (const auto& ring : r.rings)
    if (ring.value > 0.0) {
      xs.push_back(ring.j0);
      ys.push_back(std::log2(ring.value));
      if (std::find(distinct.begin(), distinct.end(), ring.j0) == distinct.end()) distinct.push_back(ring.j0);
    }
  if (xs.empty()) {
    r.degenerate = true;
    return r;
  }
  if (distinct.size() < 3) throw DomainError("fewer than three non-saturated rings with nonzero values");
  const Fit f = least_squares(xs, ys);
  r.slope = f.slope;
  r.intercept = f.intercept;
  r.residual = f.residual;
  r.delta_hat = -f.slope;
  r.delta0 = r.delta_hat - 1.0 / p0;
  return r;
}

}  // namespace sparselab
