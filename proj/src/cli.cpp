#include "sparselab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sparselab/certify.hpp"
#include "sparselab/kernels.hpp"
#include "sparselab/oscillation.hpp"
#include "sparselab/plot.hpp"
#include "sparselab/random.hpp"
#include "sparselab/serialize.hpp"
#include "sparselab/sparse.hpp"
#include "sparselab/sweep.hpp"
#include "sparselab/weights.hpp"

namespace sparselab {

namespace {

struct Common {
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// A failed exact check: the JSON still goes to stdout, the message to stderr.
struct CheckFailed {
  std::string what;
};

void apply_jobs(int jobs) {
  if (const char* env = std::getenv("SPARSELAB_JOBS")) {
    try {
      jobs = std::stoi(env);
    } catch (const std::exception&) {
      throw DomainError("SPARSELAB_JOBS must be an integer");
    }
  }
  if (jobs < 1) throw DomainError("jobs must be >= 1");
  set_jobs(jobs);
}

Json envelope(const std::string& command, const Common& c, Json result) {
  Json j;
  j["command"] = command;
  j["seed"] = c.seed;
  j["result"] = std::move(result);
  return j;
}

std::vector<GridFunction> load_or_random(const std::vector<std::string>& files, int m, int n, int L,
                                         std::uint64_t seed) {
  std::vector<GridFunction> f;
  for (const auto& path : files) f.push_back(read_gfn_file(path));
  if (f.empty()) {
    Rng rng = trial_rng(seed, 0);
    for (int i = 0; i < m; ++i) f.push_back(random_function(n, L, rng));
  }
  for (const auto& g : f) require_same_shape(f[0], g);
  return f;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, 0, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

KernelSample kernel_by_name(const std::string& name, int arity, int L) {
  if (name == "hilbert") return hilbert_kernel(L);
  if (name == "sharp-hilbert") return kernel_from_symbol(Symbol::named("hilbert"), 1, L);
  if (name.rfind("symbol:", 0) == 0) return kernel_from_symbol(Symbol::named(name.substr(7), 1), arity, L);
  throw DomainError("unknown kernel '" + name + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dyadic sparse-operator and weighted-bound experiments"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "Seed for every random input")->default_val(0);
  app.add_option("--jobs", common.jobs, "Worker threads (SPARSELAB_JOBS overrides)")->default_val(1);
  std::function<void()> action;

  // constants
  auto* constants = app.add_subcommand("constants", "A_p, RH_q, multiple-weight and duality constants");
  std::vector<std::string> weight_files;
  std::vector<double> exponents;
  double cp = 0.0, crh = 0.0, cp0 = 1.0, duality_p0 = 0.0;
  int maxlevel = -1;
  constants->add_option("--weight,--weights", weight_files, "Weight file(s) in GFN format")->required();
  constants->add_option("--p", cp, "A_p exponent");
  constants->add_option("--rh", crh, "Reverse Hoelder exponent (0 means inf)");
  constants->add_option("--exponents", exponents, "p_1..p_m for the multiple-weight constant");
  constants->add_option("--p0", cp0, "Baseline exponent for the multiple-weight constant");
  constants->add_option("--duality-p0", duality_p0, "Compare the dual-weight inequality at (--p, p0)");
  constants->add_option("--maxlevel", maxlevel, "Finest cube level (default: grid level)");
  constants->callback([&] {
    action = [&] {
      std::vector<GridFunction> ws;
      for (const auto& path : weight_files) ws.push_back(read_gfn_file(path));
      Json result;
      if (!exponents.empty()) {
        const WeightTuple t(ws, exponents, cp0);
        result["multi_ap"] = to_json(multi_ap_constant(t, cp0, maxlevel));
        result["p"] = number_json(t.p());
      } else {
        if (ws.size() != 1) throw DomainError("give one weight, or --exponents for several");
        if (constants->count("--rh")) result["rh"] = to_json(rh_constant(ws[0], crh == 0.0 ? kInfinity : crh, maxlevel));
        if (constants->count("--p") && duality_p0 == 0.0) result["ap"] = to_json(ap_constant(ws[0], cp, maxlevel));
        if (duality_p0 != 0.0) {
          const auto d = duality_inequality_check(ws[0], cp, duality_p0, maxlevel);
          result["duality"] = to_json(d);
          if (!d.holds) {
            out << envelope("constants", common, result).dump(2) << '\n';
            throw CheckFailed{"dual-weight inequality fails at witness " + d.sigma_ap.witness.str()};
          }
        }
        if (result.empty()) throw DomainError("nothing to compute: pass --p, --rh or --exponents");
      }
      out << envelope("constants", common, result).dump(2) << '\n';
    };
  });

  // decompose
  auto* decompose = app.add_subcommand("decompose", "Median-oscillation decomposition of a grid function");
  std::string input;
  decompose->add_option("--input", input, "Function file in GFN format")->required();
  decompose->callback([&] {
    action = [&] {
      const GridFunction f = read_gfn_file(input);
      const auto d = lerner_decompose(f, DyadicCube::root(f.dim()));
      const auto check = verify_lerner(f, d);
      Json result;
      result["decomposition"] = to_json(d);
      result["check"] = to_json(check);
      out << envelope("decompose", common, result).dump(2) << '\n';
      if (!check.ok)
        throw CheckFailed{"decomposition bound fails at cell " + std::to_string(check.worst_cell) +
                          (check.sparse.offending ? ", sparsity fails at " + check.sparse.offending->str() : "")};
    };
  });

  // select / dominate share their inputs.
  struct SparseInputs {
    std::vector<std::string> files;
    int n = 1, L = 8, m = 1, k = 1;
    double p0 = 1.0, density = 0.3, p = 2.0;
    double cstar = 0.0;
    bool delta = false;
  };
  SparseInputs si;
  auto add_sparse = [&](CLI::App* sub) {
    sub->add_option("--input", si.files, "Input function files (default: random)");
    sub->add_option("--n", si.n, "Dimension")->check(CLI::Range(1, 2));
    sub->add_option("--L", si.L, "Grid level");
    sub->add_option("--m", si.m, "Number of random inputs")->check(CLI::PositiveNumber);
    sub->add_option("--k", si.k, "Complexity")->check(CLI::NonNegativeNumber);
    sub->add_option("--p0", si.p0, "Average exponent");
    sub->add_option("--density", si.density, "Support density of the random Carleson sequence");
    sub->add_option("--cstar", si.cstar, "Selection constant (default: measured)");
    sub->add_flag("--delta", si.delta, "Use the sequence with a single unit coefficient at the root");
  };
  auto sequence_for = [&](const std::vector<GridFunction>& f) {
    const int n = f[0].dim(), L = f[0].level();
    if (si.delta) {
      CarlesonSequence a(DyadicCube::root(n), L);
      a.set(DyadicCube::root(n), 1.0);
      return a;
    }
    Rng rng = trial_rng(common.seed, 1);
    return random_carleson(DyadicCube::root(n), L, rng, si.density);
  };

  auto* select = app.add_subcommand("select", "Stopping-time selection on a Carleson sequence");
  add_sparse(select);
  select->callback([&] {
    action = [&] {
      const auto f = load_or_random(si.files, si.m, si.n, si.L, common.seed);
      const auto a = sequence_for(f);
      const double cstar = si.cstar > 0.0 ? si.cstar
                                          : default_cstar(a, si.k, si.p0, static_cast<int>(f.size()), 32, common.seed);
      const auto r = select_sparse(a, si.k, si.p0, f, cstar);
      out << envelope("select", common, to_json(r)).dump(2) << '\n';
      if (!r.witness.ok)
        throw CheckFailed{"selected family is not sparse at " +
                          (r.witness.offending ? r.witness.offending->str() : std::string("?"))};
    };
  });

  auto* dominate_cmd = app.add_subcommand("dominate", "Slice, select and compare against the original operator");
  add_sparse(dominate_cmd);
  dominate_cmd->add_option("--p", si.p, "Norm exponent");
  dominate_cmd->callback([&] {
    action = [&] {
      const auto f = load_or_random(si.files, si.m, si.n, si.L, common.seed);
      const auto a = sequence_for(f);
      std::optional<double> cstar;
      if (si.cstar > 0.0) cstar = si.cstar;
      const auto r = dominate(a, si.k, si.p0, f, si.p, nullptr, cstar, common.seed);
      out << envelope("dominate", common, to_json(r)).dump(2) << '\n';
      if (!r.all_sparse) throw CheckFailed{"some selected family is not sparse"};
    };
  });

  // certify-* and sweep: a config file or flags that build one.
  struct CertifyFlags {
    std::string config;
    int n = 1, L = 8, m = 1, trials = 100;
    std::vector<double> p0, p, alpha;
    std::vector<int> k;
    std::string weight_type, out_dir, op;
    double delta0 = 0.0;
  };
  CertifyFlags cf;
  auto add_certify = [&](CLI::App* sub, const std::string& experiment) {
    sub->add_option("--config", cf.config, "Sweep configuration (JSON)");
    if (experiment.empty()) {
      sub->get_option("--config")->required();
      return;
    }
    sub->add_option("--n", cf.n, "Dimension");
    sub->add_option("--L", cf.L, "Grid level");
    sub->add_option("--m", cf.m, "Arity");
    sub->add_option("--p0", cf.p0, "Baseline exponent(s)");
    sub->add_option("--p", cf.p, "Exponent tuple, or the norm exponent");
    sub->add_option("--k", cf.k, "Complexity values");
    sub->add_option("--alpha", cf.alpha, "Power-weight exponents (implies --weight-type power)");
    sub->add_option("--weight-type", cf.weight_type, "constant or power");
    sub->add_option("--trials", cf.trials, "Trials per grid point");
    sub->add_option("--out", cf.out_dir, "Output directory for records.ndjson and summary.csv");
    if (experiment == "theorem-c") {
      sub->add_option("--operator", cf.op, "hilbert, identity, multiplier:<symbol>, bilinear:<symbol>");
      sub->add_option("--delta0", cf.delta0, "Kernel decay exponent (fitted for hilbert when absent)");
    }
  };
  auto config_for = [&](const std::string& experiment) {
    Json j;
    if (!cf.config.empty()) {
      j = read_json_file(cf.config);
      if (!experiment.empty()) {
        if (!j.is_object()) throw ParseError(0, 0, "config must be a JSON object");
        if (j.contains("experiment") && j["experiment"] != experiment)
          throw DomainError("config experiment does not match the subcommand");
        j["experiment"] = experiment;
      }
    } else {
      j["experiment"] = experiment;
      j["n"] = cf.n;
      j["L"] = cf.L;
      j["m"] = cf.m;
      if (!cf.p0.empty()) j["p0"] = cf.p0;
      if (!cf.p.empty()) j["p"] = cf.p;
      if (!cf.k.empty()) j["k"] = cf.k;
      Json wf = Json::object();
      if (!cf.alpha.empty()) {
        wf["type"] = "power";
        wf["alpha_grid"] = cf.alpha;
      }
      if (!cf.weight_type.empty()) wf["type"] = cf.weight_type;
      if (!wf.empty()) j["weight_family"] = wf;
      j["trials"] = cf.trials;
      j["seed"] = common.seed;
      if (!cf.out_dir.empty()) j["out"] = cf.out_dir;
      if (!cf.op.empty()) j["operator"] = cf.op;
      if (cf.delta0 > 0.0) j["delta0"] = cf.delta0;
    }
    return parse_sweep_config(j);
  };
  auto run_certify = [&](const std::string& name, const std::string& experiment) {
    const SweepConfig c = config_for(experiment);
    const SweepResult r = run_sweep(c);
    std::ostringstream csv;
    write_summary_csv(csv, r.summary);
    Json result;
    result["experiment"] = c.experiment;
    result["records"] = r.records.size();
    result["computed"] = r.computed;
    result["reused"] = r.reused;
    if (!c.out.empty()) {
      result["records_file"] = c.out + "/records.ndjson";
      result["summary_file"] = c.out + "/summary.csv";
    }
    Json rows = Json::array();
    for (const auto& rec : r.records)
      if (rec.pass && !*rec.pass) rows.push_back(to_json(rec));
    result["failed_checks"] = rows;
    result["summary_csv"] = csv.str();
    Json env = envelope(name, common, result);
    env["seed"] = c.seed;
    out << env.dump(2) << '\n';
    if (!rows.empty()) throw CheckFailed{std::to_string(rows.size()) + " records failed an exact check"};
  };
  const std::vector<std::pair<std::string, std::string>> certify_cmds{{"certify-a", "theorem-a"},
                                                                      {"certify-b", "theorem-b"},
                                                                      {"certify-c", "theorem-c"},
                                                                      {"certify-buckley", "buckley"},
                                                                      {"sweep", ""}};
  for (const auto& [name, experiment] : certify_cmds) {
    auto* sub = app.add_subcommand(name, experiment.empty() ? "Run a sweep from a config file"
                                                            : "Randomized campaign for " + experiment);
    add_certify(sub, experiment);
    sub->callback([&, name = name, experiment = experiment] { action = [&, name, experiment] { run_certify(name, experiment); }; });
  }

  // check-symbol
  auto* symbol = app.add_subcommand("check-symbol", "Smoothness classes of multiplier symbols");
  std::string symbol_name, symbol_file;
  bool bilinear = false;
  double s_exp = 2.0;
  int order = 1, rlevels = 6;
  symbol->add_option("--symbol", symbol_name, "Named symbol");
  symbol->add_option("--symbol-file", symbol_file, "Sampled symbol in GFN format (FFT order)");
  symbol->add_flag("--bilinear", bilinear, "Check the bilinear condition");
  symbol->add_option("--s", s_exp, "Integrability exponent in (1, 2]");
  symbol->add_option("--l,--order", order, "Derivative order");
  symbol->add_option("--rlevels", rlevels, "Number of dyadic frequency rings");
  symbol->callback([&] {
    action = [&] {
      if (symbol_name.empty() == symbol_file.empty()) throw DomainError("give exactly one of --symbol, --symbol-file");
      const Symbol m = symbol_file.empty() ? Symbol::named(symbol_name)
                                           : Symbol::sampled(read_gfn_file(symbol_file), bilinear, symbol_file);
      const SymbolReport r = m.bilinear() ? check_hormander_bilinear(m, order, rlevels) : check_Msl(m, s_exp, order, rlevels);
      out << envelope("check-symbol", common, to_json(r)).dump(2) << '\n';
    };
  });

  // check-h2
  auto* h2 = app.add_subcommand("check-h2", "Ring decay fit of kernel differences");
  std::string kernel = "hilbert";
  double h2p0 = 2.0;
  int jmax = 5, jmin = 2, kL = 10, arity = 1;
  h2->add_option("--kernel", kernel, "hilbert, sharp-hilbert, or symbol:<name>");
  h2->add_option("--p0", h2p0, "Exponent p0 (the ring norm uses p0')");
  h2->add_option("--jmax", jmax, "Largest ring");
  h2->add_option("--jmin", jmin, "Smallest ring used in the fit");
  h2->add_option("--L", kL, "Grid level");
  h2->add_option("--arity", arity, "Kernel arity (2 needs a bilinear symbol)");
  h2->callback([&] {
    action = [&] {
      const KernelSample K = kernel_by_name(kernel, arity, kL);
      const H2Report r = check_H2(K, h2p0, default_h2_cube(jmax), jmax, jmin, common.seed);
      out << envelope("check-h2", common, to_json(r)).dump(2) << '\n';
    };
  });

  // plot
  auto* plot = app.add_subcommand("plot", "SVG line chart of one CSV column against another");
  std::string csv_path, xcol = "alpha", ycol = "ratio", svg_out;
  plot->add_option("--csv", csv_path, "CSV file (e.g. a sweep summary)")->required();
  plot->add_option("--x", xcol, "x column");
  plot->add_option("--y", ycol, "y column");
  plot->add_option("--out", svg_out, "SVG file (default: stdout)");
  plot->callback([&] {
    action = [&] {
      const std::string svg = emit_plot(read_plot_series(slurp(csv_path), xcol, ycol));
      if (svg_out.empty()) {
        out << svg;
      } else {
        std::ofstream f(svg_out);
        if (!f) throw DomainError("cannot write '" + svg_out + "'");
        f << svg;
      }
    };
  });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    apply_jobs(common.jobs);
    if (action) action();
    return kExitOk;
  } catch (const CheckFailed& e) {
    err << "check failed: " << e.what << '\n';
    return kExitCheckFailed;
  } catch (const ParseError& e) {
    err << "parse error at " << e.line() << ':' << e.column() << ": " << e.message() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DimensionError& e) {
    err << "dimension mismatch: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "invalid config: " << e.what() << '\n';
    return kExitValidation;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace sparselab
