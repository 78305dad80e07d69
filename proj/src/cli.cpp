#include "qem/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

namespace qem::cli {

namespace {

void require_keys(const json& j, const std::vector<std::string>& allowed,
                  const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + ": expected an object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw ConfigError(context + ": unknown key '" + item.key() + "'");
  }
}

double get_num(const json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key)) throw ConfigError(context + ": missing key '" + key + "'");
  if (!j[key].is_number()) throw ConfigError(context + ": '" + key + "' must be a number");
  return j[key].get<double>();
}

double get_num_or(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? j[key].get<double>() : fallback;
}

int get_dim(const json& j, const std::string& context) {
  const double n = get_num(j, "n", context);
  if (n < 2 || n != std::floor(n))
    throw ConfigError(context + ": n must be an integer >= 2");
  return static_cast<int>(n);
}

double get_m(const json& j, const std::string& context) {
  const double m = get_num(j, "m", context);
  if (!(m > 0))
    throw ConfigError(context + ": m must lie in (0, inf), got " + std::to_string(m));
  return m;
}

Signature signature_from_json(const json& j, const std::string& context) {
  if (!j.is_array()) throw ConfigError(context + ": signature must be an array");
  std::vector<int> eps;
  for (const auto& e : j) {
    if (!e.is_number_integer() || (e.get<int>() != 1 && e.get<int>() != -1))
      throw ConfigError(context + ": signature entries must be +1 or -1");
    eps.push_back(e.get<int>());
  }
  try {
    return Signature(eps);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(context + ": " + err.what());
  }
}

Interval interval_from_json(const json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError(context + ": interval must be [lo, hi]");
  Interval iv{j[0].get<double>(), j[1].get<double>()};
  if (!(iv.hi > iv.lo)) throw ConfigError(context + ": empty interval");
  return iv;
}

std::vector<double> vector_from_json(const json& j, std::size_t n,
                                     const std::string& context) {
  if (!j.is_array() || j.size() != n)
    throw ConfigError(context + ": expected an array of length " + std::to_string(n));
  std::vector<double> v;
  for (const auto& e : j) v.push_back(e.get<double>());
  return v;
}

Box box_from_json(const json& j, const std::string& context) {
  if (!j.is_array()) throw ConfigError(context + ": box must be an array of [lo, hi]");
  Box box;
  for (const auto& axis : j) {
    const Interval iv = interval_from_json(axis, context + ".box axis");
    box.axes.push_back({iv.lo, iv.hi});
  }
  return box;
}

}  // namespace

ScalarProfile profile_from_json(const json& j) {
  const std::string ctx = "profile";
  if (!j.is_object() || !j.contains("type"))
    throw ConfigError(ctx + ": expected an object with a 'type' key");
  const std::string type = j["type"].get<std::string>();
  Interval dom{-30.0, 30.0};
  if (j.contains("domain")) dom = interval_from_json(j["domain"], ctx);

  if (type == "constant") {
    require_keys(j, {"type", "value", "domain"}, ctx);
    const double v = get_num(j, "value", ctx);
    return ScalarProfile::closed_form([v](double) { return v; },
                                      [](double) { return 0.0; },
                                      [](double) { return 0.0; }, dom);
  }
  if (type == "exp-affine") {  // e^{alpha xi + beta}
    require_keys(j, {"type", "alpha", "beta", "domain"}, ctx);
    const double a = get_num(j, "alpha", ctx);
    const double b = get_num_or(j, "beta", 0.0);
    return ScalarProfile::closed_form(
        [a, b](double x) { return std::exp(a * x + b); },
        [a, b](double x) { return a * std::exp(a * x + b); },
        [a, b](double x) { return a * a * std::exp(a * x + b); }, dom);
  }
  if (type == "exp-sum") {  // c1 e^{r1 xi} + c2 e^{r2 xi}
    require_keys(j, {"type", "c1", "r1", "c2", "r2", "domain"}, ctx);
    const double c1 = get_num_or(j, "c1", 0.0), r1 = get_num_or(j, "r1", 0.0);
    const double c2 = get_num_or(j, "c2", 0.0), r2 = get_num_or(j, "r2", 0.0);
    return ScalarProfile::closed_form(
        [=](double x) { return c1 * std::exp(r1 * x) + c2 * std::exp(r2 * x); },
        [=](double x) {
          return c1 * r1 * std::exp(r1 * x) + c2 * r2 * std::exp(r2 * x);
        },
        [=](double x) {
          return c1 * r1 * r1 * std::exp(r1 * x) + c2 * r2 * r2 * std::exp(r2 * x);
        },
        dom);
  }
  if (type == "sqrt") {
    require_keys(j, {"type", "domain"}, ctx);
    if (!(dom.lo > 0)) dom = {1.0, 4.0};
    return ScalarProfile::closed_form(
        [](double x) { return std::sqrt(x); },
        [](double x) { return 0.5 / std::sqrt(x); },
        [](double x) { return -0.25 / (x * std::sqrt(x)); }, dom);
  }
  if (type == "log-sum") {  // c1 + c2 log xi
    require_keys(j, {"type", "c1", "c2", "domain"}, ctx);
    const double c1 = get_num_or(j, "c1", 0.0), c2 = get_num_or(j, "c2", 0.0);
    if (!(dom.lo > 0)) dom = {1.0, 4.0};
    return ScalarProfile::closed_form(
        [c1, c2](double x) { return c1 + c2 * std::log(x); },
        [c2](double x) { return c2 / x; },
        [c2](double x) { return -c2 / (x * x); }, dom);
  }
  if (type == "trig-log") {  // c1 sin(mu log xi) + c2 cos(mu log xi)
    require_keys(j, {"type", "c1", "c2", "mu", "domain"}, ctx);
    const double c1 = get_num_or(j, "c1", 0.0), c2 = get_num_or(j, "c2", 0.0);
    const double mu = get_num(j, "mu", ctx);
    if (!(dom.lo > 0)) dom = {1.0, 4.0};
    return ScalarProfile::closed_form(
        [c1, c2, mu](double x) {
          const double t = mu * std::log(x);
          return c1 * std::sin(t) + c2 * std::cos(t);
        },
        [c1, c2, mu](double x) {
          const double t = mu * std::log(x);
          return (mu / x) * (c1 * std::cos(t) - c2 * std::sin(t));
        },
        [c1, c2, mu](double x) {
          const double t = mu * std::log(x);
          const double s = std::sin(t), c = std::cos(t);
          return (-mu / (x * x)) * (c1 * c - c2 * s) -
                 (mu * mu / (x * x)) * (c1 * s + c2 * c);
        },
        dom);
  }
  throw ConfigError("profile: unknown type '" + type + "'");
}

namespace {

ScalarProfile offset_lambda(const ScalarProfile& lam, double offset) {
  if (offset == 0.0) return lam;
  return ScalarProfile::closed_form([lam, offset](double x) { return lam(x) + offset; },
                                    [lam](double x) { return lam.d1(x); },
                                    [lam](double x) { return lam.d2(x); },
                                    lam.domain());
}

SolutionCandidate explicit_candidate(const json& j) {
  const std::string ctx = "candidate";
  require_keys(j, {"n", "m", "signature", "invariant", "phi", "h", "lambda",
                   "lambda_offset"}, ctx);
  const int n = get_dim(j, ctx);
  const double m = get_m(j, ctx);
  const Signature sig = j.contains("signature")
                            ? signature_from_json(j["signature"], ctx)
                            : Signature::euclidean(n);
  if (sig.dim() != n) throw ConfigError(ctx + ": signature length != n");
  if (!j.contains("invariant")) throw ConfigError(ctx + ": missing 'invariant'");
  const json& inv = j["invariant"];
  require_keys(inv, {"kind", "a", "b", "c"}, ctx + ".invariant");
  const std::string kind_s = inv.value("kind", "quadratic");
  const InvariantKind kind = kind_s == "translation" ? InvariantKind::translation
                                                     : InvariantKind::quadratic;
  if (kind_s != "translation" && kind_s != "quadratic")
    throw ConfigError(ctx + ".invariant: kind must be quadratic or translation");
  const double a = get_num_or(inv, "a", 0.0);
  std::vector<double> b(static_cast<std::size_t>(n), 0.0);
  std::vector<double> c(static_cast<std::size_t>(n), 0.0);
  if (inv.contains("b")) b = vector_from_json(inv["b"], static_cast<std::size_t>(n), ctx + ".invariant.b");
  if (inv.contains("c")) c = vector_from_json(inv["c"], static_cast<std::size_t>(n), ctx + ".invariant.c");

  SolutionCandidate cand;
  cand.n = n;
  cand.m = m;
  cand.sig = sig;
  try {
    cand.spec = build_invariant(kind, a, b, c, sig);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(ctx + ".invariant: " + std::string(err.what()));
  }
  if (!j.contains("phi") || !j.contains("h"))
    throw ConfigError(ctx + ": explicit candidates need 'phi' and 'h'");
  cand.phi = profile_from_json(j["phi"]);
  cand.h = profile_from_json(j["h"]);
  if (!j.contains("lambda"))
    throw ConfigError(ctx + ": explicit candidates need 'lambda'");
  const json& lj = j["lambda"];
  if (lj.is_object() && lj.contains("type") && lj["type"] == "from-reduction") {
    require_keys(lj, {"type"}, ctx + ".lambda");
    const ScalarProfile phi = cand.phi, h = cand.h;
    const double sa = cand.spec.a, S = cand.spec.S;
    Interval dom = phi.domain();
    if (h.domain().lo > dom.lo) dom.lo = h.domain().lo;
    if (h.domain().hi < dom.hi) dom.hi = h.domain().hi;
    const double pad = std::max(1e-4, 1e-3 * dom.length());
    cand.lambda = ScalarProfile::from_value_fn(
        [n, m, sa, S, phi, h](double xi) {
          return compute_lambda(n, m, sa, S, phi, h, xi);
        },
        {dom.lo + pad, dom.hi - pad});
  } else {
    cand.lambda = profile_from_json(lj);
  }
  cand.lambda = offset_lambda(cand.lambda, get_num_or(j, "lambda_offset", 0.0));
  return cand;
}

}  // namespace

SolutionCandidate candidate_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("candidate: expected an object");
  if (!j.contains("family")) return explicit_candidate(j);

  const std::string family = j["family"].get<std::string>();
  const std::string ctx = "candidate(" + family + ")";
  SolutionCandidate cand;
  try {
    if (family == "exp-radial") {
      require_keys(j, {"family", "n", "m", "alpha", "beta", "c1", "c2",
                       "lambda_offset"}, ctx);
      cand = family_exp_radial(get_dim(j, ctx), get_m(j, ctx),
                               get_num(j, "alpha", ctx), get_num_or(j, "beta", 0.0),
                               get_num_or(j, "c1", 1.0), get_num_or(j, "c2", 0.0));
    } else if (family == "translation") {
      require_keys(j, {"family", "n", "m", "signature", "b_dir", "a", "b", "c1",
                       "c2", "lambda_offset"}, ctx);
      const int n = get_dim(j, ctx);
      const Signature sig = j.contains("signature")
                                ? signature_from_json(j["signature"], ctx)
                                : Signature::euclidean(n);
      if (sig.dim() != n) throw ConfigError(ctx + ": signature length != n");
      if (!j.contains("b_dir")) throw ConfigError(ctx + ": missing 'b_dir'");
      cand = family_translation(
          n, get_m(j, ctx), sig,
          vector_from_json(j["b_dir"], static_cast<std::size_t>(n), ctx + ".b_dir"),
          get_num(j, "a", ctx), get_num_or(j, "b", 0.0), get_num_or(j, "c1", 1.0),
          get_num_or(j, "c2", 0.0));
    } else if (family == "sqrt-radial") {
      require_keys(j, {"family", "n", "m", "c1", "c2", "interval", "lambda_offset"},
                   ctx);
      Interval iv{1.0, 4.0};
      if (j.contains("interval")) iv = interval_from_json(j["interval"], ctx);
      cand = family_sqrt_radial(get_dim(j, ctx), get_m(j, ctx),
                                get_num_or(j, "c1", 1.0), get_num_or(j, "c2", 0.0), iv);
    } else {
      throw ConfigError("candidate: unknown family '" + family + "'");
    }
  } catch (const std::invalid_argument& err) {
    throw ConfigError(ctx + ": " + std::string(err.what()));
  } catch (const std::domain_error& err) {
    throw ConfigError(ctx + ": " + std::string(err.what()));
  }
  cand.lambda = offset_lambda(cand.lambda, get_num_or(j, "lambda_offset", 0.0));
  return cand;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config parse error: ") + err.what());
  }
  return parse_config_json(doc);
}

RunConfig parse_config_json(const json& doc) {
  require_keys(doc, {"command", "candidate", "grid", "tolerance", "fd_step", "ode",
                     "witness", "fluid", "out", "csv_out"}, "config");
  RunConfig cfg;
  if (!doc.contains("command")) throw ConfigError("config: missing 'command'");
  const std::string cmd = doc["command"].get<std::string>();
  if (cmd == "generate") cfg.command = Command::generate;
  else if (cmd == "verify") cfg.command = Command::verify;
  else if (cmd == "ode") cfg.command = Command::ode;
  else if (cmd == "fluid") cfg.command = Command::fluid;
  else if (cmd == "oracle") cfg.command = Command::oracle;
  else if (cmd == "witness") cfg.command = Command::witness;
  else throw ConfigError("config: unknown command '" + cmd + "'");

  if (doc.contains("candidate")) {
    cfg.candidate = doc["candidate"];
    candidate_from_json(cfg.candidate);  // validate eagerly
  }
  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    require_keys(g, {"count", "seed", "box"}, "config.grid");
    if (g.contains("count")) {
      const double c = g["count"].get<double>();
      if (c < 1) throw ConfigError("config.grid: count must be >= 1");
      cfg.grid.count = static_cast<std::size_t>(c);
    }
    if (g.contains("seed")) cfg.grid.seed = g["seed"].get<std::uint64_t>();
    if (g.contains("box")) cfg.grid.box = box_from_json(g["box"], "config.grid");
  }
  if (doc.contains("tolerance")) {
    cfg.tolerance = doc["tolerance"].get<double>();
    cfg.tolerance_set = true;
    if (!(cfg.tolerance > 0)) throw ConfigError("config: tolerance must be > 0");
  }
  if (doc.contains("fd_step")) {
    cfg.fd_step = doc["fd_step"].get<double>();
    if (!(cfg.fd_step > 0)) throw ConfigError("config: fd_step must be > 0");
  }
  if (doc.contains("ode")) {
    cfg.ode = doc["ode"];
    require_keys(cfg.ode, {"n", "m", "phi", "interval", "h0", "hp0", "step"},
                 "config.ode");
    if (cfg.ode.contains("step")) {
      cfg.ode_step = cfg.ode["step"].get<double>();
      if (!(cfg.ode_step > 0)) throw ConfigError("config.ode: step must be > 0");
    }
  }
  if (doc.contains("witness")) {
    cfg.witness = doc["witness"];
    require_keys(cfg.witness, {"n", "m", "phi", "interval"}, "config.witness");
  }
  if (doc.contains("fluid")) {
    require_keys(doc["fluid"], {"flat_laplacian"}, "config.fluid");
    cfg.flat_laplacian = doc["fluid"].value("flat_laplacian", false);
  }
  if (doc.contains("out")) cfg.out_path = doc["out"].get<std::string>();
  if (doc.contains("csv_out")) cfg.csv_path = doc["csv_out"].get<std::string>();
  return cfg;
}

namespace {

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

Box default_box(const SolutionCandidate& cand, const json& cand_json) {
  if (cand_json.contains("family") && cand_json["family"] == "sqrt-radial") {
    // put r = sum x_k^2 inside the profile interval
    const Interval iv = cand.lambda.domain();
    const double lo = std::sqrt(iv.lo / cand.n);
    const double hi = std::sqrt(iv.hi / cand.n);
    return Box::cube(cand.n, lo, hi);
  }
  return Box::cube(cand.n, -0.6, 0.6);
}

json box_to_json(const Box& box) {
  json j = json::array();
  for (const auto& a : box.axes) j.push_back({a[0], a[1]});
  return j;
}

json report_skeleton(const RunConfig& cfg, const char* command) {
  json rep;
  rep["timestamp"] = timestamp_utc();
  rep["command"] = command;
  rep["tolerance"] = cfg.tolerance;
  return rep;
}

json residuals_to_json(const ResidualReport& rr) {
  json out = json::array();
  for (const auto& ch : rr.channels) {
    json e;
    e["id"] = ch.id;
    e["max"] = ch.max_abs;
    e["rms"] = ch.rms;
    e["worst_point"] = ch.worst_point;
    out.push_back(e);
  }
  return out;
}

void write_csv(const std::string& path, const SolutionCandidate& cand,
               const SampleGrid& grid) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open csv output '" + path + "'");
  const int n = cand.n;
  for (int k = 0; k < n; ++k) os << "x" << (k + 1) << ",";
  os << "xi,phi,h,lambda";
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) os << ",qem_" << i << "_" << j;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) os << ",edp_" << i << "_" << j;
  os << "\n";
  os.precision(17);
  for (const Point& p : grid.points) {
    const double xi = cand.spec.xi(p);
    for (int k = 0; k < n; ++k) os << p[k] << ",";
    os << xi << "," << cand.phi(xi) << "," << cand.h(xi) << "," << cand.lambda(xi);
    const Matrix q = qem_residual(cand, p);
    const Matrix e = edp_residuals(cand, p);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) os << "," << q(i, j);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) os << "," << e(i, j);
    os << "\n";
  }
}

void emit(const RunConfig& cfg, const json& report) {
  if (cfg.out_path.empty()) {
    std::cout << report.dump(2) << std::endl;
  } else {
    std::ofstream os(cfg.out_path);
    if (!os) throw ConfigError("cannot open output '" + cfg.out_path + "'");
    os << report.dump(2) << "\n";
  }
}

int run_verify(const RunConfig& cfg, const char* name) {
  if (cfg.candidate.is_null()) throw ConfigError("config: missing 'candidate'");
  const SolutionCandidate cand = candidate_from_json(cfg.candidate);
  const Box box = cfg.grid.box ? *cfg.grid.box : default_box(cand, cfg.candidate);
  const SampleGrid grid = candidate_grid(cand, box, cfg.grid.count, cfg.grid.seed);
  const ResidualReport rr = evaluate_candidate(cand, grid);

  json rep = report_skeleton(cfg, name);
  rep["candidate"] = cfg.candidate;
  rep["grid"] = {{"seed", grid.seed}, {"count", grid.points.size()},
                 {"box", box_to_json(box)}};
  rep["residuals"] = residuals_to_json(rr);
  rep["max_residual"] = rr.max_abs();
  const ChannelStats* lam = rr.channel("lambda_trace");
  rep["lambda_trace_max"] = lam ? lam->max_abs : 0.0;
  const bool ok = rr.max_abs() <= cfg.tolerance;
  rep["status"] = ok ? "ok" : "tolerance_breach";
  if (!cfg.csv_path.empty()) write_csv(cfg.csv_path, cand, grid);
  emit(cfg, rep);
  return ok ? 0 : 1;
}

int run_ode(const RunConfig& cfg) {
  if (cfg.ode.is_null()) throw ConfigError("config: missing 'ode' block");
  const json& o = cfg.ode;
  OdeProblem pr;
  pr.n = get_dim(o, "config.ode");
  pr.m = get_m(o, "config.ode");
  if (!o.contains("phi")) throw ConfigError("config.ode: missing 'phi'");
  pr.phi = profile_from_json(o["phi"]);
  const Interval iv = o.contains("interval")
                          ? interval_from_json(o["interval"], "config.ode")
                          : Interval{0.0, 1.0};
  pr.xi0 = iv.lo;
  pr.xi1 = iv.hi;
  pr.h0 = get_num_or(o, "h0", 1.0);
  pr.hp0 = get_num_or(o, "hp0", 0.0);
  pr.step = cfg.ode_step;

  json rep = report_skeleton(cfg, "ode");
  rep["problem"] = o;
  try {
    const ScalarProfile h = integrate_h(pr);
    json samples = json::array();
    const int k = 41;
    for (int i = 0; i < k; ++i) {
      const double xi = pr.xi0 + (pr.xi1 - pr.xi0) * i / (k - 1);
      samples.push_back({{"xi", xi}, {"h", h(xi)}, {"dh", h.d1(xi)}});
    }
    rep["samples"] = samples;
    rep["status"] = "ok";
    emit(cfg, rep);
    return 0;
  } catch (const StepTooCoarseError& err) {
    rep["status"] = "step_too_coarse";
    rep["detail"] = err.what();
    emit(cfg, rep);
    return 1;
  }
}

int run_fluid(const RunConfig& cfg) {
  if (cfg.candidate.is_null()) throw ConfigError("config: missing 'candidate'");
  const SolutionCandidate cand = candidate_from_json(cfg.candidate);
  if (cand.m != 1.0) throw ConfigError("fluid: candidate must have m = 1");
  const FluidDecomposition decomp = fluid_decompose(cand, cfg.flat_laplacian);
  const Box box = cfg.grid.box ? *cfg.grid.box : default_box(cand, cfg.candidate);
  const SampleGrid grid = candidate_grid(cand, box, cfg.grid.count, cfg.grid.seed);

  double max_r1 = 0.0, max_r2 = 0.0;
  json samples = json::array();
  for (const Point& p : grid.points) {
    const auto [r1, r2] = fluid_residual(cand, decomp, p);
    max_r1 = std::max(max_r1, std::abs(r1));
    max_r2 = std::max(max_r2, std::abs(r2));
    const double xi = cand.spec.xi(p);
    samples.push_back({{"xi", xi}, {"mu", decomp.mu(xi)}, {"rho", decomp.rho(xi)},
                       {"r1", r1}, {"r2", r2}});
  }
  json rep = report_skeleton(cfg, "fluid");
  rep["candidate"] = cfg.candidate;
  rep["flat_laplacian"] = cfg.flat_laplacian;
  rep["grid"] = {{"seed", grid.seed}, {"count", grid.points.size()},
                 {"box", box_to_json(box)}};
  rep["samples"] = samples;
  rep["max_r1"] = max_r1;
  rep["max_r2"] = max_r2;
  const bool ok = max_r1 <= cfg.tolerance && max_r2 <= cfg.tolerance;
  rep["status"] = ok ? "ok" : "tolerance_breach";
  emit(cfg, rep);
  return ok ? 0 : 1;
}

int run_oracle(const RunConfig& cfg) {
  if (cfg.candidate.is_null()) throw ConfigError("config: missing 'candidate'");
  const SolutionCandidate cand = candidate_from_json(cfg.candidate);
  const double tol = cfg.tolerance_set ? cfg.tolerance : 1e-5;
  const Box box = cfg.grid.box ? *cfg.grid.box : default_box(cand, cfg.candidate);
  const SampleGrid grid = candidate_grid(cand, box, cfg.grid.count, cfg.grid.seed);

  MetricSampler gbar = [&cand](const Point& p) {
    const double phi = cand.phi(cand.spec.xi(p));
    std::vector<double> d(static_cast<std::size_t>(cand.n));
    for (int k = 0; k < cand.n; ++k) d[k] = cand.sig.eps(k) / (phi * phi);
    return Matrix::diagonal(d);
  };
  double max_diff = 0.0;
  Point worst;
  for (const Point& p : grid.points) {
    const Matrix closed = conformal_ricci(cand, p);
    const Matrix fd = fd_ricci(gbar, p, cfg.fd_step);
    const double diff = (closed - fd).max_abs();
    if (diff >= max_diff) {
      max_diff = diff;
      worst = p;
    }
  }
  json rep = report_skeleton(cfg, "oracle");
  rep["tolerance"] = tol;
  rep["candidate"] = cfg.candidate;
  rep["fd_step"] = cfg.fd_step;
  rep["grid"] = {{"seed", grid.seed}, {"count", grid.points.size()},
                 {"box", box_to_json(box)}};
  rep["max_entry_diff"] = max_diff;
  rep["worst_point"] = worst;
  const bool ok = max_diff <= tol;
  rep["status"] = ok ? "ok" : "tolerance_breach";
  emit(cfg, rep);
  return ok ? 0 : 1;
}

int run_witness(const RunConfig& cfg) {
  if (cfg.witness.is_null()) throw ConfigError("config: missing 'witness' block");
  const json& w = cfg.witness;
  const int n = get_dim(w, "config.witness");
  const double m = get_m(w, "config.witness");
  if (!w.contains("phi")) throw ConfigError("config.witness: missing 'phi'");
  ScalarProfile phi = profile_from_json(w["phi"]);
  if (w.contains("interval")) {
    const Interval iv = interval_from_json(w["interval"], "config.witness");
    phi = ScalarProfile::closed_form([phi](double x) { return phi(x); },
                                     [phi](double x) { return phi.d1(x); },
                                     [phi](double x) { return phi.d2(x); }, iv);
  }
  WitnessReport wr;
  try {
    wr = triviality_witness(n, m, Signature::euclidean(n), phi);
  } catch (const WitnessVacuousError& err) {
    throw ConfigError(std::string("witness: ") + err.what());
  }
  json rep = report_skeleton(cfg, "witness");
  rep["n"] = n;
  rep["m"] = m;
  if (wr.trivial_via_constant_h) {
    rep["result"] = "trivial via constant h";
    rep["status"] = "ok";
    emit(cfg, rep);
    return 0;
  }
  json table = json::array();
  for (const auto& [xi, obs] : wr.samples)
    table.push_back({{"xi", xi}, {"obstruction", obs}});
  rep["result"] = "obstruction bounded away from zero";
  rep["obstruction_table"] = table;
  rep["min_abs_obstruction"] = wr.min_abs;
  const bool ok = wr.min_abs >= cfg.tolerance;
  rep["status"] = ok ? "ok" : "tolerance_breach";
  emit(cfg, rep);
  return ok ? 0 : 1;
}

}  // namespace

int run(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::generate:
      if (!cfg.candidate.contains("family"))
        throw ConfigError("generate: candidate must name a family");
      return run_verify(cfg, "generate");
    case Command::verify:
      return run_verify(cfg, "verify");
    case Command::ode:
      return run_ode(cfg);
    case Command::fluid:
      return run_fluid(cfg);
    case Command::oracle:
      return run_oracle(cfg);
    case Command::witness:
      return run_witness(cfg);
  }
  return 2;
}

int main_impl(int argc, char** argv) {
  CLI::App app{"construct and verify conformally-flat generalized m-quasi-Einstein candidates"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::size_t> grid_count;

  const std::vector<std::pair<std::string, Command>> cmds = {
      {"generate", Command::generate}, {"verify", Command::verify},
      {"ode", Command::ode},           {"fluid", Command::fluid},
      {"oracle", Command::oracle},     {"witness", Command::witness}};
  for (const auto& [name, _] : cmds) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_path, "report output path (default: stdout)");
    sub->add_option("--seed", seed, "grid seed override");
    sub->add_option("--tol", tol, "tolerance override");
    sub->add_option("--grid", grid_count, "grid point count override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::ifstream is(config_path);
    if (!is) {
      std::cerr << "error: cannot read config '" << config_path << "'\n";
      return 2;
    }
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    RunConfig cfg = parse_config(text);
    const std::string sub = app.get_subcommands().front()->get_name();
    for (const auto& [name, cmd] : cmds)
      if (name == sub && cfg.command != cmd)
        throw ConfigError("config names command '" + std::string(
            cfg.command == Command::generate ? "generate" :
            cfg.command == Command::verify ? "verify" :
            cfg.command == Command::ode ? "ode" :
            cfg.command == Command::fluid ? "fluid" :
            cfg.command == Command::oracle ? "oracle" : "witness") +
            "' but subcommand '" + sub + "' was invoked");
    if (!out_path.empty()) cfg.out_path = out_path;
    if (seed) cfg.grid.seed = *seed;
    if (tol) {
      cfg.tolerance = *tol;
      cfg.tolerance_set = true;
    }
    if (grid_count) cfg.grid.count = *grid_count;
    return run(cfg);
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::domain_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}

}  // namespace qem::cli
