#include "sparselab/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sparselab {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(line, col, "malformed JSON");
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, 0, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

Json number_json(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw ParseError(0, 0, "expected a number");
}

Json to_json(const DyadicCube& q) {
  Json j;
  j["dim"] = q.dim;
  j["level"] = q.level;
  j["index"] = q.dim == 1 ? Json::array({q.index[0]}) : Json::array({q.index[0], q.index[1]});
  return j;
}

DyadicCube cube_from_json(const Json& j) {
  DyadicCube q;
  q.dim = j.at("dim").get<int>();
  q.level = j.at("level").get<int>();
  const auto& idx = j.at("index");
  if (static_cast<int>(idx.size()) != q.dim) throw ParseError(0, 0, "cube index has the wrong length");
  for (int a = 0; a < q.dim; ++a) q.index[a] = idx[a].get<std::int64_t>();
  return q;
}

Json to_json(const ConstantReport& r) {
  Json j;
  j["value"] = number_json(r.value);
  j["witness"] = to_json(r.witness);
  j["family"] = r.family;
  j["maxlevel"] = r.maxlevel;
  return j;
}

Json to_json(const DualityReport& r) {
  Json j;
  j["lhs"] = number_json(r.lhs);
  j["rhs"] = number_json(r.rhs);
  j["rh_exponent"] = number_json(r.rh_exponent);
  j["sigma_ap"] = to_json(r.sigma_ap);
  j["w_rh"] = to_json(r.w_rh);
  j["w_ap"] = to_json(r.w_ap);
  j["holds"] = r.holds;
  return j;
}

Json to_json(const CarlesonCheck& r) {
  Json j;
  j["ok"] = r.ok;
  j["worst_ratio"] = number_json(r.worst_ratio);
  j["worst"] = to_json(r.worst);
  return j;
}

Json to_json(const SparseCheck& r) {
  Json j;
  j["ok"] = r.ok;
  j["reason"] = r.reason;
  j["offending"] = r.offending ? to_json(*r.offending) : Json();
  return j;
}

Json to_json(const CZCheck& r) {
  Json j;
  j["ok"] = r.ok;
  j["max_mean_defect"] = number_json(r.max_mean_defect);
  j["stopping_ok"] = r.stopping_ok;
  j["measure_ok"] = r.measure_ok;
  j["good_bound_ok"] = r.good_bound_ok;
  j["good_l1_ok"] = r.good_l1_ok;
  j["max_good_ratio"] = number_json(r.max_good_ratio);
  j["reason"] = r.reason;
  return j;
}

Json cell_ranges(const std::vector<std::size_t>& cells) {
  Json out = Json::array();
  std::size_t i = 0;
  while (i < cells.size()) {
    std::size_t j = i;
    while (j + 1 < cells.size() && cells[j + 1] == cells[j] + 1) ++j;
    out.push_back(Json::array({cells[i], cells[j]}));
    i = j + 1;
  }
  return out;
}

Json to_json(const LernerDecomposition& d) {
  Json j;
  j["root"] = to_json(d.root);
  j["median"] = number_json(d.median);
  j["lambda"] = number_json(d.lambda);
  Json cubes = Json::array();
  for (std::size_t i = 0; i < d.family.cubes.size(); ++i) {
    Json c;
    c["cube"] = to_json(d.family.cubes[i]);
    c["omega_value"] = number_json(d.omega[i]);
    c["threshold"] = number_json(d.threshold[i]);
    c["E_Q"] = cell_ranges(d.family.witness[i]);
    cubes.push_back(std::move(c));
  }
  j["cubes"] = std::move(cubes);
  return j;
}

Json to_json(const LernerCheck& r) {
  Json j;
  j["ok"] = r.ok;
  j["max_excess"] = number_json(r.max_excess);
  j["worst_cell"] = r.worst_cell;
  j["sparse"] = to_json(r.sparse);
  return j;
}

Json to_json(const SelectionResult& r) {
  Json j;
  Json cubes = Json::array();
  for (const auto& q : r.selected) cubes.push_back(to_json(q));
  j["selected"] = std::move(cubes);
  j["sparse"] = r.witness.ok;
  j["worst_fraction"] = number_json(r.witness.worst_fraction);
  j["offending"] = r.witness.offending ? to_json(*r.witness.offending) : Json();
  j["pointwise_constant"] = number_json(r.pointwise_constant);
  j["cstar"] = number_json(r.cstar);
  return j;
}

Json to_json(const DominationReport& r) {
  Json j;
  j["cstar"] = number_json(r.cstar);
  j["all_sparse"] = r.all_sparse;
  j["pointwise_ratio"] = number_json(r.pointwise_ratio);
  j["norm_ratio"] = number_json(r.norm_ratio);
  j["lhs_norm"] = number_json(r.lhs_norm);
  j["rhs_norm"] = number_json(r.rhs_norm);
  Json pieces = Json::array();
  for (std::size_t i = 0; i < r.pieces.size(); ++i) {
    Json p;
    p["ell"] = r.pieces[i].ell;
    p["P"] = to_json(r.pieces[i].P);
    p["selection"] = to_json(r.selections[i]);
    pieces.push_back(std::move(p));
  }
  j["pieces"] = std::move(pieces);
  return j;
}

Json to_json(const H2Report& r) {
  Json j;
  j["kernel"] = r.kernel;
  j["arity"] = r.arity;
  j["p0"] = number_json(r.p0);
  j["cube"] = to_json(r.cube);
  j["level"] = r.level;
  j["jmin"] = r.jmin;
  j["jmax"] = r.jmax;
  j["pairs"] = r.pairs;
  Json rings = Json::array();
  for (const auto& g : r.rings) {
    Json x;
    x["j1"] = g.j1;
    if (r.arity == 2) x["j2"] = g.j2;
    x["j0"] = g.j0;
    x["value"] = number_json(g.value);
    rings.push_back(std::move(x));
  }
  j["rings"] = std::move(rings);
  j["saturated"] = r.saturated;
  j["degenerate"] = r.degenerate;
  j["slope"] = number_json(r.slope);
  j["intercept"] = number_json(r.intercept);
  j["residual"] = number_json(r.residual);
  j["delta_hat"] = number_json(r.delta_hat);
  j["delta0"] = number_json(r.delta0);
  return j;
}

Json to_json(const SymbolReport& r) {
  Json j;
  j["symbol"] = r.symbol;
  if (r.s > 0.0) j["s"] = number_json(r.s);
  j["order"] = r.order;
  j["rlevels"] = r.rlevels;
  Json terms = Json::array();
  for (const auto& t : r.terms) {
    Json x;
    x["alpha"] = Json::array({t.alpha[0], t.alpha[1]});
    x["value"] = number_json(t.value);
    x["refined"] = number_json(t.refined);
    x["finite"] = t.finite;
    x["stable"] = t.stable;
    terms.push_back(std::move(x));
  }
  j["terms"] = std::move(terms);
  j["member"] = r.member;
  return j;
}

Json to_json(const OscillationProfile& r) {
  Json j;
  j["cube"] = to_json(r.cube);
  j["lambda"] = number_json(r.lambda);
  j["p0"] = number_json(r.p0);
  j["delta0"] = number_json(r.delta0);
  Json rings = Json::array();
  for (double v : r.ring_values) rings.push_back(number_json(v));
  j["ring_values"] = std::move(rings);
  j["truncated"] = r.truncated;
  j["lhs"] = number_json(r.lhs);
  j["rhs"] = number_json(r.rhs);
  j["ratio"] = number_json(r.ratio);
  return j;
}

Json to_json(const CertificationRecord& r) {
  Json j;
  j["experiment"] = r.experiment;
  Json p;
  p["n"] = r.n;
  p["L"] = r.L;
  p["m"] = r.m;
  p["p0"] = number_json(r.p0);
  Json pbar = Json::array();
  for (double x : r.pbar) pbar.push_back(number_json(x));
  p["pbar"] = std::move(pbar);
  p["p"] = number_json(r.p);
  p["k"] = r.k;
  p["alpha"] = number_json(r.alpha);
  p["trial"] = r.trial;
  p["seed"] = r.seed;
  j["params"] = std::move(p);
  j["lhs"] = number_json(r.lhs);
  j["rhs"] = number_json(r.rhs);
  j["ratio"] = number_json(r.ratio);
  j["beta"] = number_json(r.beta);
  Json c = Json::object();
  for (const auto& [name, v] : r.constants) c[name] = number_json(v);
  j["constants"] = std::move(c);
  j["pass"] = r.pass ? Json(*r.pass) : Json();
  j["degenerate"] = r.degenerate;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

CertificationRecord record_from_json(const Json& j) {
  CertificationRecord r;
  r.experiment = j.at("experiment").get<std::string>();
  const auto& p = j.at("params");
  r.n = p.at("n").get<int>();
  r.L = p.at("L").get<int>();
  r.m = p.at("m").get<int>();
  r.p0 = number_from_json(p.at("p0"));
  for (const auto& x : p.at("pbar")) r.pbar.push_back(number_from_json(x));
  r.p = number_from_json(p.at("p"));
  r.k = p.at("k").get<int>();
  r.alpha = number_from_json(p.at("alpha"));
  r.trial = p.at("trial").get<int>();
  r.seed = p.at("seed").get<std::uint64_t>();
  r.lhs = number_from_json(j.at("lhs"));
  r.rhs = number_from_json(j.at("rhs"));
  r.ratio = number_from_json(j.at("ratio"));
  r.beta = number_from_json(j.at("beta"));
  for (const auto& [name, v] : j.at("constants").items()) r.constants[name] = number_from_json(v);
  if (!j.at("pass").is_null()) r.pass = j.at("pass").get<bool>();
  r.degenerate = j.at("degenerate").get<bool>();
  if (j.contains("note")) r.note = j.at("note").get<std::string>();
  return r;
}

}  // namespace sparselab
