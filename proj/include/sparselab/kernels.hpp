#pragma once

// Fourier multipliers on the periodic lattice, their kernels, and numerical
// checks of kernel decay and symbol smoothness.

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sparselab/grid.hpp"
#include "sparselab/operator.hpp"

namespace sparselab {

using cplx = std::complex<double>;

/// Complex cell values with the same layout as GridFunction.
struct ComplexGrid {
  int dim = 1;
  int level = 0;
  std::vector<cplx> values;

  static ComplexGrid from_real(const GridFunction& f);
  GridFunction real() const;
  GridFunction imag() const;
  GridFunction modulus() const;
  double max_abs_diff(const ComplexGrid& other) const;
};

/// Frequency of FFT slot i on a lattice with n points per axis: i or i - n.
inline std::int64_t frequency_of(std::size_t i, std::int64_t n) {
  const auto s = static_cast<std::int64_t>(i);
  return s < n / 2 ? s : s - n;
}

/// Multiplier symbol on the integer frequency lattice. Linear symbols on
/// n-dimensional functions have freq_dim = n; bilinear symbols for n = 1
/// have freq_dim = 2 with coordinates (xi, eta).
class Symbol {
 public:
  using Fn = std::function<cplx(double, double)>;

  Symbol(std::string name, int freq_dim, Fn fn, bool bilinear = false);

  /// identity, zero, sign, hilbert, riesz1d, oscillating, linear, bump;
  /// bilinear: bilinear-identity, bilinear-delta, cone, bilinear-riesz,
  /// bilinear-riesz-smooth, product.
  static Symbol named(const std::string& name, int dim = 1);
  /// Values of a GridFunction read in FFT order (slot i is frequency_of(i)).
  static Symbol sampled(const GridFunction& values, bool bilinear = false, std::string name = "sampled");

  const std::string& name() const { return name_; }
  int freq_dim() const { return freq_dim_; }
  bool bilinear() const { return bilinear_; }
  bool is_sampled() const { return sampled_level_ >= 0; }
  /// For sampled symbols: frequencies per axis lie in [-2^{level-1}, 2^{level-1}).
  int sampled_level() const { return sampled_level_; }

  cplx operator()(double xi, double eta = 0.0) const { return fn_(xi, eta); }
  /// True when the symbol is defined at this lattice point (sampled symbols have a finite window).
  bool defined_at(std::int64_t xi, std::int64_t eta = 0) const;

 private:
  std::string name_;
  int freq_dim_;
  Fn fn_;
  bool bilinear_ = false;
  int sampled_level_ = -1;
};

/// Forward DFT normalized by 1/N (so the zero mode is the mean) and its inverse.
ComplexGrid fourier_coefficients(const ComplexGrid& f);
ComplexGrid inverse_fourier(const ComplexGrid& coeffs);

/// Symbol values on the lattice of the given shape, in FFT order.
std::vector<cplx> sample_symbol(const Symbol& m, int dim, int L);

/// True when m(-xi) = conj m(xi) at every lattice point whose negative is a
/// different lattice point (self-paired frequencies such as Nyquist are skipped).
bool hermitian_on_lattice(const Symbol& m, int dim, int L, double tol = 1e-12);

ComplexGrid apply_linear_multiplier_complex(const Symbol& m, const ComplexGrid& f);
/// Real part when the symbol is Hermitian on the lattice, modulus otherwise.
GridFunction apply_linear_multiplier(const Symbol& m, const GridFunction& f);

/// Periodic Hilbert transform with symbol -i sign(xi); the real version drops
/// the imaginary Nyquist contribution.
ComplexGrid hilbert_transform_complex(const ComplexGrid& f);
GridFunction hilbert_transform(const GridFunction& f);

/// T_m(f, g)(x) = sum_{xi, eta} m(xi, eta) f^(xi) g^(eta) e^{2 pi i x (xi + eta)}, n = 1.
ComplexGrid apply_bilinear_multiplier_complex(const Symbol& m, const GridFunction& f, const GridFunction& g,
                                              Exec exec = Exec::Parallel);
GridFunction apply_bilinear_multiplier(const Symbol& m, const GridFunction& f, const GridFunction& g,
                                       Exec exec = Exec::Parallel);

class LinearMultiplierOperator : public Operator {
 public:
  explicit LinearMultiplierOperator(Symbol m) : m_(std::move(m)) {}
  int arity() const override { return 1; }
  std::string name() const override { return "multiplier:" + m_.name(); }
  GridFunction apply(std::span<const GridFunction> f) const override;

 private:
  Symbol m_;
};

class HilbertOperator : public Operator {
 public:
  int arity() const override { return 1; }
  std::string name() const override { return "hilbert"; }
  GridFunction apply(std::span<const GridFunction> f) const override;
};

class BilinearMultiplierOperator : public Operator {
 public:
  explicit BilinearMultiplierOperator(Symbol m) : m_(std::move(m)) {}
  int arity() const override { return 2; }
  std::string name() const override { return "bilinear:" + m_.name(); }
  GridFunction apply(std::span<const GridFunction> f) const override;

 private:
  Symbol m_;
};

/// Builds an operator from a name: identity, hilbert, multiplier:<symbol>, bilinear:<symbol>.
std::unique_ptr<Operator> make_operator(const std::string& name);

/// Kernel K(x, y_1, .., y_m) of a 1D operator sampled at lattice cells.
/// The diagonal x = y_1 = .. = y_m is masked.
class KernelSample {
 public:
  using Fn = std::function<double(std::size_t x, std::span<const std::size_t> y)>;

  KernelSample(std::string name, int arity, int L, Fn fn);

  const std::string& name() const { return name_; }
  int arity() const { return arity_; }
  int level() const { return L_; }
  std::size_t cells() const { return std::size_t{1} << L_; }

  bool on_diagonal(std::size_t x, std::span<const std::size_t> y) const;
  /// Throws DomainError on the diagonal.
  double operator()(std::size_t x, std::span<const std::size_t> y) const;

  /// Largest imaginary part discarded when the table was built (0 for closed forms).
  double discarded_imag = 0.0;

 private:
  std::string name_;
  int arity_;
  int L_;
  Fn fn_;
};

/// Table of m-check(z) = sum_xi m(xi) e^{2 pi i z xi / N} for z in [0, N)^arity (1D only).
std::vector<cplx> inverse_symbol_table(const Symbol& m, int arity, int L);

/// K(x, y) = m-check(x - y) (arity 1) or m-check(x - y_1, x - y_2) (arity 2), real part.
KernelSample kernel_from_symbol(const Symbol& m, int arity, int L);

/// Closed-form periodic Hilbert kernel cot(pi (x - y)) at cell centers.
KernelSample hilbert_kernel(int L);

/// (1 - (-1)^z) cot(pi z / N): the exact lattice kernel of the sharp Hilbert symbol.
double sharp_hilbert_kernel(std::int64_t z, int L);

struct H2Ring {
  int j1 = 0;
  int j2 = 0;  // arity 2 only
  int j0 = 0;  // max(j1, j2)
  double value = 0.0;
};

struct H2Report {
  std::string kernel;
  int arity = 1;
  double p0 = 1.0;
  DyadicCube cube;
  int level = 0;
  int jmin = 2;
  int jmax = 0;
  std::size_t pairs = 0;
  std::vector<H2Ring> rings;
  std::vector<int> saturated;  // rings dropped because 2^j Q covers the torus
  bool degenerate = false;     // all ring values vanish
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;       // RMS of the log2 fit
  double delta_hat = 0.0;      // -slope
  double delta0 = 0.0;         // delta_hat - n / p0
};

/// Ring-wise L^{p0'} norms of K(x, .) - K(xbar, .) over S_j(Q), sup over
/// pairs in Q/2, and a least-squares fit of log2 B_j against j.
H2Report check_H2(const KernelSample& K, double p0, const DyadicCube& q, int jmax, int jmin = 2,
                  std::uint64_t seed = 0);

/// Base cube used when none is given: level jmax + 1, index 0.
DyadicCube default_h2_cube(int jmax);

struct SymbolTerm {
  std::array<int, 2> alpha{0, 0};
  double value = 0.0;       // sup over rings up to Rlevels
  double refined = 0.0;     // same at the finer setting
  bool finite = true;
  bool stable = true;
};

struct SymbolReport {
  std::string symbol;
  double s = 0.0;
  int order = 0;
  int rlevels = 0;
  std::vector<SymbolTerm> terms;
  bool member = true;
};

/// sup_R (R^{s|a| - n} sum_{R <= |xi| < 2R} |d^a m|^s)^{1/s} for |a| <= l,
/// with central differences; stability compares rlevels against rlevels + 2
/// (rlevels - 2 for sampled symbols).
SymbolReport check_Msl(const Symbol& m, double s, int l, int rlevels);

/// sup (|xi| + |eta|)^{|a|+|b|} |d^a_xi d^b_eta m| over the box |xi|, |eta| < 2^rlevels, |a|+|b| <= order.
SymbolReport check_hormander_bilinear(const Symbol& m, int order, int rlevels = 6);

}  // namespace sparselab
