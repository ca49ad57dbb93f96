#include "sparselab/certify.hpp"

#include <algorithm>
#include <cmath>

#include "detail.hpp"
#include "sparselab/oscillation.hpp"

namespace sparselab {

void CertificationRecord::finalize() {
  degenerate = lhs == 0.0 && rhs == 0.0;
  ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0);
}

double beta_exponent(std::span<const double> pbar, double p0) {
  if (pbar.empty()) throw DomainError("need at least one exponent");
  if (!(p0 >= 1.0)) throw DomainError("p0 must be >= 1");
  double inv = 0.0;
  for (double pi : pbar) {
    if (!(pi > p0) || !std::isfinite(pi)) throw DomainError("exponents must satisfy p0 < p_i < inf");
    inv += 1.0 / pi;
  }
  const double p = 1.0 / inv;
  double beta = 1.0;
  for (double pi : pbar) beta = std::max(beta, conjugate(pi / p0) / p);
  return beta;
}

namespace {

int resolve_maxlevel(int maxlevel, int L) {
  if (maxlevel < 0) return L;
  if (maxlevel > L) throw DimensionError("maxlevel exceeds the grid level");
  return maxlevel;
}

void check_inputs(const WeightTuple& t, std::span<const GridFunction> f) {
  if (static_cast<int>(f.size()) != t.arity()) throw DimensionError("number of functions does not match the weights");
  for (const auto& g : f) require_same_shape(g, t.weight(0));
}

double weighted_product(const WeightTuple& t, std::span<const GridFunction> f) {
  double prod = 1.0;
  for (int i = 0; i < t.arity(); ++i) prod *= weighted_norm(f[i], t.exponents()[i], t.weight(i));
  return prod;
}

void fill_params(CertificationRecord& r, const WeightTuple& t) {
  r.n = t.dim();
  r.L = t.level();
  r.m = t.arity();
  r.p0 = t.p0();
  r.pbar = t.exponents();
  r.p = t.p();
}

}  // namespace

CertificationRecord certify_theorem_B(const SparseFamily& s, const WeightTuple& t, std::span<const GridFunction> f,
                                      int maxlevel) {
  check_inputs(t, f);
  detail::require_nonnegative(f, "certify_theorem_B");
  if (s.dim != t.dim() || s.resolution != t.level()) throw DimensionError("family does not match the grid");
  CertificationRecord r;
  r.experiment = "theorem-b";
  fill_params(r, t);
  const int ml = resolve_maxlevel(maxlevel, t.level());
  r.beta = beta_exponent(t.exponents(), t.p0());
  const double w = multi_ap_constant(t, t.p0(), ml).value;
  r.constants["multi_ap"] = w;
  r.constants["family_size"] = static_cast<double>(s.cubes.size());
  r.lhs = weighted_norm(eval_sparse_A(s, 0, t.p0(), f), t.p(), t.nu());
  r.rhs = std::pow(w, r.beta) * weighted_product(t, f);
  r.finalize();
  return r;
}

SparseFamily chain_family(const DyadicCube& q, int L) {
  if (q.level > L) throw DimensionError("cube is finer than the grid");
  SparseFamily s;
  s.dim = q.dim;
  s.resolution = L;
  for (int j = 0; j <= q.level; ++j) {
    const DyadicCube c = q.ancestor(q.level - j);
    std::vector<std::size_t> own;
    if (j == q.level) {
      own = c.cells(L);
    } else {
      const DyadicCube next = q.ancestor(q.level - j - 1);
      for (std::size_t cell : c.cells(L))
        if (!next.contains(DyadicCube::from_linear(q.dim, L, cell))) own.push_back(cell);
    }
    s.cubes.push_back(c);
    s.witness.push_back(std::move(own));
  }
  return s;
}

ExtremalProbe theorem_B_probe(const WeightTuple& t, int maxlevel) {
  const int ml = resolve_maxlevel(maxlevel, t.level());
  ExtremalProbe probe;
  probe.cube = multi_ap_constant(t, t.p0(), ml).witness;
  probe.family = chain_family(probe.cube, t.level());
  const auto sigma = dual_weights(t);
  const auto cells = probe.cube.cells(t.level());
  for (const auto& s : sigma) {
    std::vector<double> v(s.size(), 0.0);
    for (std::size_t c : cells) v[c] = s[c];
    probe.f.emplace_back(s.dim(), s.level(), std::move(v));
  }
  return probe;
}

CertificationRecord certify_theorem_A(const CarlesonSequence& a, int k, double p0, std::span<const GridFunction> f,
                                      double p, const GridFunction* w, std::optional<double> cstar,
                                      std::uint64_t seed) {
  if (f.empty()) throw DomainError("need at least one input function");
  CertificationRecord r;
  r.experiment = "theorem-a";
  r.n = f[0].dim();
  r.L = f[0].level();
  r.m = static_cast<int>(f.size());
  r.p0 = p0;
  r.p = p;
  r.k = k;
  r.seed = seed;
  const DominationReport d = dominate(a, k, p0, f, p, w, cstar, seed);
  r.lhs = d.lhs_norm;
  r.rhs = (k + 1) * d.rhs_norm;
  r.constants["cstar"] = d.cstar;
  r.constants["pointwise_ratio"] = d.pointwise_ratio;
  r.constants["pieces"] = static_cast<double>(d.pieces.size());
  r.pass = d.all_sparse;
  r.finalize();
  return r;
}

CertificationRecord certify_theorem_C(const Operator& op, double delta0, const WeightTuple& t,
                                      std::span<const GridFunction> f) {
  if (!(delta0 > 0.0) || !std::isfinite(delta0)) throw DomainError("kernel decay exponent delta0 must be positive");
  if (op.arity() != t.arity()) throw DimensionError("operator arity does not match the weights");
  check_inputs(t, f);
  const int L = t.level(), dim = t.dim();
  CertificationRecord r;
  r.experiment = "theorem-c";
  fill_params(r, t);
  r.beta = beta_exponent(t.exponents(), t.p0());
  r.constants["delta0"] = delta0;

  const GridFunction Tf = op.apply(f);
  const GridFunction nu = t.nu();
  r.lhs = weighted_norm(Tf, t.p(), nu);
  const double w = multi_ap_constant(t, t.p0(), L).value;
  r.constants["multi_ap"] = w;
  r.rhs = std::pow(w, r.beta) * weighted_product(t, f);
  r.finalize();

  const auto d = lerner_decompose(Tf, DyadicCube::root(dim));
  r.constants["family_size"] = static_cast<double>(d.family.cubes.size());
  double osc = 0.0;
  std::vector<OscillationProfile> profiles;
  profiles.reserve(d.family.cubes.size());
  for (std::size_t i = 0; i < d.family.cubes.size(); ++i) {
    profiles.push_back(osc_profile_from(Tf, f, d.family.cubes[i], d.lambda, t.p0(), delta0));
    osc = std::max(osc, d.omega[i] / profiles.back().rhs);
  }
  r.constants["osc_constant"] = osc;

  // |T f| <= |m| + 2 osc sum_Q sum_l 2^{-l delta0} prod <f_i>_{2^l Q, p0} chi_Q.
  std::vector<double> bound(Tf.size(), std::abs(d.median));
  for (std::size_t i = 0; i < profiles.size(); ++i)
    for (std::size_t c : d.family.cubes[i].cells(L)) bound[c] += 2.0 * osc * profiles[i].rhs;
  const GridFunction majorant(dim, L, std::move(bound));
  const double bound_norm = weighted_norm(majorant, t.p(), nu);
  r.constants["sparse_bound_norm"] = bound_norm;
  r.pass = r.lhs <= bound_norm * (1.0 + 1e-9) + 1e-12;

  bool nonnegative = true;
  for (const auto& g : f) nonnegative = nonnegative && g.min() >= 0.0;
  if (nonnegative && !d.family.cubes.empty())
    r.constants["family_ratio"] = certify_theorem_B(d.family, t, f, L).ratio;
  return r;
}

CertificationRecord certify_theorem_C(const Operator& op, const H2Report& h2, const WeightTuple& t,
                                      std::span<const GridFunction> f) {
  if (h2.degenerate) throw DomainError("kernel decay fit is degenerate");
  return certify_theorem_C(op, h2.delta0, t, f);
}

CertificationRecord certify_buckley(const GridFunction& w, double p, const GridFunction& f, int maxlevel) {
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  require_same_shape(w, f);
  const int ml = resolve_maxlevel(maxlevel, w.level());
  CertificationRecord r;
  r.experiment = "buckley";
  r.n = w.dim();
  r.L = w.level();
  r.p = p;
  r.pbar = {p};
  r.beta = 1.0 / (p - 1.0);
  const double ap = ap_constant(w, p, ml).value;
  r.constants["ap"] = ap;
  r.lhs = weighted_norm(dyadic_maximal(f, nullptr, MaximalMode::PlainP0, 1.0), p, w);
  r.rhs = std::pow(ap, r.beta) * weighted_norm(f, p, w);
  r.finalize();
  return r;
}

}  // namespace sparselab
