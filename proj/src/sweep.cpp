#include "sparselab/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sparselab/kernels.hpp"
#include "sparselab/random.hpp"

namespace sparselab {

namespace {

const std::set<std::string> kExperiments{"theorem-a", "theorem-b", "theorem-c", "buckley"};
const std::set<std::string> kKeys{"experiment", "n",     "L",    "m",   "p0",       "p",     "k",
                                  "weight_family", "trials", "seed", "out", "operator", "delta0"};

ParseError config_error(const std::string& msg) { return ParseError(0, 0, msg); }

template <class T>
std::vector<T> scalar_or_list(const Json& j, const char* key) {
  std::vector<T> out;
  try {
    if (j.is_array()) {
      for (const auto& x : j) out.push_back(x.get<T>());
    } else {
      out.push_back(j.get<T>());
    }
  } catch (const nlohmann::json::exception&) {
    throw config_error(std::string("field '") + key + "' has the wrong type");
  }
  return out;
}

template <class T>
T scalar(const Json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw config_error(std::string("field '") + key + "' has the wrong type");
  }
}

std::array<double, 2> center_for(int i, int m) {
  const double c = static_cast<double>(i) / m;
  return {c, c};
}

GridFunction family_weight(const SweepConfig& c, double alpha, int i) {
  if (c.weight_family.type == "constant") return GridFunction::constant(c.n, c.L, 1.0);
  const double a = i % 2 == 0 ? alpha : -alpha;
  return clamp_weight(power_weight(a, center_for(i, c.m), c.n, c.L));
}

WeightTuple family_tuple(const SweepConfig& c, double alpha, double p0) {
  std::vector<GridFunction> ws;
  for (int i = 0; i < c.m; ++i) ws.push_back(family_weight(c, alpha, i));
  return WeightTuple(std::move(ws), c.p, p0);
}

DyadicCube random_cube(int dim, int L, Rng& rng, int lo_level = 0) {
  std::uniform_int_distribution<int> lev(lo_level, L);
  DyadicCube q{dim, lev(rng), {0, 0}};
  std::uniform_int_distribution<std::int64_t> idx(0, q.per_axis() - 1);
  for (int a = 0; a < dim; ++a) q.index[a] = idx(rng);
  return q;
}

GridFunction restrict_to(const GridFunction& g, const DyadicCube& q) {
  std::vector<double> v(g.size(), 0.0);
  for (std::size_t cell : q.cells(g.level())) v[cell] = g[cell];
  return GridFunction(g.dim(), g.level(), std::move(v));
}

GridFunction multiply(const GridFunction& a, const GridFunction& b) {
  return GridFunction::from_cells(a.dim(), a.level(), [&](std::size_t i) { return a[i] * b[i]; });
}

SparseFamily random_family(int dim, int L, Rng& rng) {
  auto w = greedy_witness(random_sparse_cubes(dim, L, rng), L);
  if (!w.ok) return chain_family(DyadicCube::root(dim), L);
  return w.family;
}

double fitted_delta0(double p0) {
  const int jmax = 5;
  const H2Report h2 = check_H2(hilbert_kernel(10), p0, default_h2_cube(jmax), jmax);
  return h2.delta0;
}

double median_of_sorted(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string join_numbers(const std::vector<double>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += format_number(v[i]);
  }
  return s;
}

}  // namespace

SweepConfig parse_sweep_config(const Json& j) {
  if (!j.is_object()) throw config_error("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kKeys.count(key)) throw config_error("unknown key '" + key + "'");
  SweepConfig c;
  if (!j.contains("experiment")) throw config_error("missing 'experiment'");
  c.experiment = scalar<std::string>(j.at("experiment"), "experiment");
  if (!kExperiments.count(c.experiment)) throw config_error("unknown experiment '" + c.experiment + "'");
  if (j.contains("n")) c.n = scalar<int>(j.at("n"), "n");
  if (j.contains("L")) c.L = scalar<int>(j.at("L"), "L");
  if (j.contains("m")) c.m = scalar<int>(j.at("m"), "m");
  if (j.contains("p0")) c.p0 = scalar_or_list<double>(j.at("p0"), "p0");
  if (j.contains("p")) c.p = scalar_or_list<double>(j.at("p"), "p");
  if (j.contains("k")) c.k = scalar_or_list<int>(j.at("k"), "k");
  if (j.contains("trials")) c.trials = scalar<int>(j.at("trials"), "trials");
  if (j.contains("seed")) c.seed = scalar<std::uint64_t>(j.at("seed"), "seed");
  if (j.contains("out")) c.out = scalar<std::string>(j.at("out"), "out");
  if (j.contains("operator")) c.op = scalar<std::string>(j.at("operator"), "operator");
  if (j.contains("delta0")) c.delta0 = scalar<double>(j.at("delta0"), "delta0");
  if (j.contains("weight_family")) {
    const auto& w = j.at("weight_family");
    if (!w.is_object()) throw config_error("'weight_family' must be an object");
    for (const auto& [key, _] : w.items())
      if (key != "type" && key != "alpha_grid") throw config_error("unknown key 'weight_family." + key + "'");
    if (w.contains("type")) c.weight_family.type = scalar<std::string>(w.at("type"), "weight_family.type");
    if (w.contains("alpha_grid"))
      c.weight_family.alpha_grid = scalar_or_list<double>(w.at("alpha_grid"), "weight_family.alpha_grid");
  }

  check_shape(c.n, c.L);
  if (c.m < 1) throw DomainError("m must be >= 1");
  if (c.trials < 0) throw DomainError("trials must be >= 0");
  if (c.weight_family.type != "constant" && c.weight_family.type != "power")
    throw DomainError("weight_family.type must be 'constant' or 'power'");
  for (double a : c.weight_family.alpha_grid)
    if (!(a > -c.n && a < c.n)) throw DomainError("power weight exponents must lie in (-n, n)");
  for (int k : c.k)
    if (k < 0) throw DomainError("complexity k must be >= 0");
  for (double p0 : c.p0)
    if (!(p0 >= 1.0)) throw DomainError("p0 must be >= 1");
  if (c.p.empty()) throw DomainError("'p' must list at least one exponent");

  if (c.experiment == "theorem-b" || c.experiment == "theorem-c") {
    if (static_cast<int>(c.p.size()) != c.m) throw DomainError("'p' must have m entries");
    for (double p0 : c.p0)
      for (double pi : c.p)
        if (!(pi > p0) || !std::isfinite(pi)) throw DomainError("exponents must satisfy p0 < p_i < inf");
  } else {
    if (c.p.size() != 1) throw DomainError("'p' must hold a single norm exponent");
    if (c.experiment == "buckley" && (c.m != 1 || !(c.p[0] > 1.0))) throw DomainError("buckley needs m = 1, p > 1");
    if (!(c.p[0] > 0.0)) throw DomainError("p must be positive");
  }
  if (c.experiment == "theorem-c") {
    auto op = make_operator(c.op);
    if (op->arity() != c.m) throw DomainError("operator arity does not match m");
    if (c.delta0 && !(*c.delta0 > 0.0)) throw DomainError("delta0 must be positive");
    if (!c.delta0 && c.op != "hilbert") throw DomainError("delta0 is required for operators other than hilbert");
    if (c.n != 1) throw DomainError("theorem-c sweeps run in one dimension");
  }
  return c;
}

SweepConfig read_sweep_config(const std::string& path) { return parse_sweep_config(read_json_file(path)); }

std::vector<SweepPoint> sweep_points(const SweepConfig& c) {
  std::vector<SweepPoint> out;
  for (double p0 : c.p0)
    for (int k : c.k)
      for (double a : c.weight_family.alpha_grid) out.push_back(SweepPoint{p0, k, a});
  return out;
}

std::string record_key(const CertificationRecord& r, const SweepConfig& c) {
  std::ostringstream s;
  s << r.experiment << '|' << r.n << '|' << r.L << '|' << r.m << '|' << format_number(r.p0) << '|'
    << join_numbers(r.pbar, ',') << '|' << r.k << '|' << format_number(r.alpha) << '|' << c.weight_family.type << '|'
    << (r.experiment == "theorem-c" ? c.op : std::string()) << '|' << r.trial << '|' << r.seed;
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CertificationRecord run_trial(const SweepConfig& c, const SweepPoint& pt, int trial) {
  Rng rng = trial_rng(c.seed, static_cast<std::uint64_t>(trial));
  CertificationRecord r;

  if (c.experiment == "theorem-b") {
    const WeightTuple t = family_tuple(c, pt.alpha, pt.p0);
    std::vector<GridFunction> f;
    SparseFamily s;
    const int mode = trial % 3;
    if (mode == 0) {
      // sigma_i chi_Q probes: the [w] witness first, then random cubes.
      const auto sigma = dual_weights(t);
      const DyadicCube q = trial == 0 ? theorem_B_probe(t).cube : random_cube(c.n, c.L, rng);
      s = chain_family(q, c.L);
      for (const auto& sg : sigma) f.push_back(restrict_to(sg, q));
    } else {
      s = random_family(c.n, c.L, rng);
      const auto sigma = mode == 2 ? dual_weights(t) : std::vector<GridFunction>{};
      for (int i = 0; i < c.m; ++i) {
        GridFunction g = random_function(c.n, c.L, rng);
        f.push_back(mode == 2 ? multiply(g, sigma[i]) : g);
      }
    }
    r = certify_theorem_B(s, t, f);
  } else if (c.experiment == "theorem-a") {
    const CarlesonSequence a = random_carleson(DyadicCube::root(c.n), c.L, rng);
    std::vector<GridFunction> f;
    for (int i = 0; i < c.m; ++i) f.push_back(random_function(c.n, c.L, rng));
    const GridFunction w = family_weight(c, pt.alpha, 0);
    r = certify_theorem_A(a, pt.k, pt.p0, f, c.p[0], &w, std::nullopt, c.seed ^ static_cast<std::uint64_t>(trial));
  } else if (c.experiment == "theorem-c") {
    const WeightTuple t = family_tuple(c, pt.alpha, pt.p0);
    auto op = make_operator(c.op);
    std::vector<GridFunction> f;
    if (trial % 2 == 1) {
      const auto sigma = dual_weights(t);
      const DyadicCube q = random_cube(c.n, c.L, rng, 1);
      for (const auto& sg : sigma) f.push_back(restrict_to(sg, q));
    } else {
      for (int i = 0; i < c.m; ++i) f.push_back(random_function(c.n, c.L, rng));
    }
    const double d0 = c.delta0 ? *c.delta0 : fitted_delta0(pt.p0);
    r = certify_theorem_C(*op, d0, t, f);
  } else if (c.experiment == "buckley") {
    const GridFunction w = family_weight(c, pt.alpha, 0);
    GridFunction f;
    if (trial % 2 == 1) {
      // Small cube at the weight singularity.
      std::uniform_int_distribution<int> lev(std::max(1, c.L / 2), c.L);
      const DyadicCube q{c.n, lev(rng), {0, 0}};
      f = restrict_to(GridFunction::constant(c.n, c.L, 1.0), q);
    } else {
      f = random_function(c.n, c.L, rng);
    }
    r = certify_buckley(w, c.p[0], f);
  } else {
    throw DomainError("unknown experiment '" + c.experiment + "'");
  }
  r.k = pt.k;
  r.alpha = pt.alpha;
  r.trial = trial;
  r.seed = c.seed;
  return r;
}

std::string summary_csv_header() {
  return "experiment,n,L,m,p0,pbar,k,alpha,trials,lhs,rhs,ratio,median_ratio,half_ratio,beta";
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << summary_csv_header() << '\n';
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.n << ',' << r.L << ',' << r.m << ',' << format_number(r.p0) << ','
        << join_numbers(r.pbar, ';') << ',' << r.k << ',' << format_number(r.alpha) << ',' << r.trials << ','
        << format_number(r.lhs) << ',' << format_number(r.rhs) << ',' << format_number(r.ratio) << ','
        << format_number(r.median_ratio) << ',' << format_number(r.half_ratio) << ',' << format_number(r.beta)
        << '\n';
  }
}

SweepResult run_sweep(const SweepConfig& config) {
  const SweepConfig& c = config;
  SweepResult res;
  res.points = sweep_points(c);
  std::map<double, double> fits;  // fitted delta0 per p0 (theorem-c without delta0)

  namespace fs = std::filesystem;
  std::map<std::string, CertificationRecord> existing;
  fs::path records_path, summary_path;
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    records_path = fs::path(c.out) / "records.ndjson";
    summary_path = fs::path(c.out) / "summary.csv";
    std::ifstream in(records_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      Json j;
      try {
        j = parse_json(line);
      } catch (const ParseError& e) {
        throw ParseError(lineno, e.column(), "malformed record in " + records_path.string());
      }
      existing.emplace(j.at("key").get<std::string>(), record_from_json(j));
    }
  }
  std::ofstream append;
  if (!c.out.empty()) append.open(records_path, std::ios::app);

  for (const auto& pt : res.points) {
    SweepConfig cp = c;
    if (c.experiment == "theorem-c" && !c.delta0) {
      if (!fits.count(pt.p0)) fits[pt.p0] = fitted_delta0(pt.p0);
      cp.delta0 = fits[pt.p0];
    }
    std::vector<CertificationRecord> recs(static_cast<std::size_t>(c.trials));
    std::vector<char> fresh(recs.size(), 0);
    std::vector<std::string> keys(recs.size());
    for (int t = 0; t < c.trials; ++t) {
      CertificationRecord probe;
      probe.experiment = c.experiment;
      probe.n = c.n;
      probe.L = c.L;
      probe.m = c.experiment == "buckley" ? 1 : c.m;
      probe.p0 = c.experiment == "buckley" ? 1.0 : pt.p0;
      probe.k = pt.k;
      probe.alpha = pt.alpha;
      probe.trial = t;
      probe.seed = c.seed;
      probe.pbar = c.p;
      keys[t] = record_key(probe, c);
      const auto it = existing.find(keys[t]);
      if (it != existing.end()) {
        recs[t] = it->second;
      } else {
        fresh[t] = 1;
      }
    }
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < c.trials; ++t)
      if (fresh[t]) recs[t] = run_trial(cp, pt, t);

    for (int t = 0; t < c.trials; ++t) {
      if (fresh[t]) {
        ++res.computed;
        if (append) {
          Json j;
          j["key"] = keys[t];
          const Json body = to_json(recs[t]);
          for (const auto& [k, v] : body.items()) j[k] = v;
          append << j.dump() << '\n';
        }
      } else {
        ++res.reused;
      }
    }

    SummaryRow row;
    row.experiment = c.experiment;
    row.n = c.n;
    row.L = c.L;
    row.m = c.m;
    row.p0 = pt.p0;
    row.pbar = c.p;
    row.k = pt.k;
    row.alpha = pt.alpha;
    std::vector<double> ratios;
    double best = -1.0;
    for (int t = 0; t < c.trials; ++t) {
      const auto& r = recs[t];
      row.beta = r.beta;
      if (r.degenerate) continue;
      ratios.push_back(r.ratio);
      if (r.ratio > best) {
        best = r.ratio;
        row.lhs = r.lhs;
        row.rhs = r.rhs;
        row.ratio = r.ratio;
      }
      if (t < (c.trials + 1) / 2) row.half_ratio = std::max(row.half_ratio, r.ratio);
    }
    row.trials = static_cast<int>(ratios.size());
    row.median_ratio = median_of_sorted(ratios);
    res.summary.push_back(row);
    for (auto& r : recs) res.records.push_back(std::move(r));
  }

  if (!c.out.empty()) {
    std::ofstream s(summary_path, std::ios::trunc);
    write_summary_csv(s, res.summary);
  }
  return res;
}

}  // namespace sparselab
