#include "qem/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace qem {

double ode_rhs(int n, double m, const ScalarProfile& phi, double xi, double h,
               double hp) {
  const double pv = phi(xi);
  if (pv == 0.0) throw std::domain_error("phi vanishes at the reduction point");
  return ((n - 2) * h * phi.d2(xi) - 2.0 * m * phi.d1(xi) * hp) / (m * pv);
}

namespace {

struct DenseRun {
  std::vector<double> xs, hs, hps;
};

DenseRun rk4_run(const OdeProblem& pr, double step) {
  DenseRun run;
  double xi = pr.xi0, h = pr.h0, hp = pr.hp0;
  run.xs.push_back(xi);
  run.hs.push_back(h);
  run.hps.push_back(hp);
  const double span = pr.xi1 - pr.xi0;
  const std::size_t steps = static_cast<std::size_t>(std::ceil(span / step - 1e-12));
  for (std::size_t i = 0; i < steps; ++i) {
    const double s = std::min(step, pr.xi1 - xi);
    auto f = [&](double x, double y, double yp) {
      return ode_rhs(pr.n, pr.m, pr.phi, x, y, yp);
    };
    const double k1 = hp;
    const double l1 = f(xi, h, hp);
    const double k2 = hp + 0.5 * s * l1;
    const double l2 = f(xi + 0.5 * s, h + 0.5 * s * k1, hp + 0.5 * s * l1);
    const double k3 = hp + 0.5 * s * l2;
    const double l3 = f(xi + 0.5 * s, h + 0.5 * s * k2, hp + 0.5 * s * l2);
    const double k4 = hp + s * l3;
    const double l4 = f(xi + s, h + s * k3, hp + s * l3);
    h += s / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    hp += s / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    xi += s;
    run.xs.push_back(xi);
    run.hs.push_back(h);
    run.hps.push_back(hp);
  }
  return run;
}

// cubic Hermite on the segment containing x
double hermite(const std::vector<double>& xs, const std::vector<double>& ys,
               const std::vector<double>& slopes, double x) {
  std::size_t i = static_cast<std::size_t>(
      std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
  if (i == 0) i = 1;
  if (i >= xs.size()) i = xs.size() - 1;
  const double x0 = xs[i - 1], x1 = xs[i];
  const double dx = x1 - x0;
  const double t = (x - x0) / dx;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * ys[i - 1] + (t3 - 2 * t2 + t) * dx * slopes[i - 1] +
         (-2 * t3 + 3 * t2) * ys[i] + (t3 - t2) * dx * slopes[i];
}

}  // namespace

ScalarProfile integrate_h(const OdeProblem& pr) {
  if (!(pr.step > 0) || !(pr.xi1 > pr.xi0))
    throw std::invalid_argument("ODE problem needs step > 0 and a nonempty interval");
  const DenseRun coarse = rk4_run(pr, pr.step);
  const DenseRun fine = rk4_run(pr, 0.5 * pr.step);

  // Richardson check at the coarse nodes (fine run hits every second node)
  for (std::size_t i = 0; i < coarse.xs.size(); ++i) {
    const double ref = hermite(fine.xs, fine.hs, fine.hps, coarse.xs[i]);
    const double diff = std::abs(coarse.hs[i] - ref) / std::max(1.0, std::abs(ref));
    if (diff > 1e-8)
      throw StepTooCoarseError("half-step Richardson disagreement " +
                               std::to_string(diff) + " at xi=" +
                               std::to_string(coarse.xs[i]));
  }

  auto xs = std::make_shared<std::vector<double>>(fine.xs);
  auto hs = std::make_shared<std::vector<double>>(fine.hs);
  auto hps = std::make_shared<std::vector<double>>(fine.hps);
  auto hpps = std::make_shared<std::vector<double>>();
  hpps->reserve(xs->size());
  for (std::size_t i = 0; i < xs->size(); ++i)
    hpps->push_back(ode_rhs(pr.n, pr.m, pr.phi, (*xs)[i], (*hs)[i], (*hps)[i]));

  const int n = pr.n;
  const double m = pr.m;
  const ScalarProfile phi = pr.phi;
  auto value = [xs, hs, hps](double x) { return hermite(*xs, *hs, *hps, x); };
  auto d1 = [xs, hps, hpps](double x) { return hermite(*xs, *hps, *hpps, x); };
  // h'' from the ODE right-hand side, not from differentiating the interpolant
  auto d2 = [value, d1, n, m, phi](double x) {
    return ode_rhs(n, m, phi, x, value(x), d1(x));
  };
  return ScalarProfile::closed_form(value, d1, d2, {pr.xi0, pr.xi1});
}

double compute_lambda(int n, double m, double a, double S, const ScalarProfile& phi,
                      const ScalarProfile& h, double xi) {
  const double hv = h(xi);
  const double pv = phi(xi);
  if (hv == 0.0 || pv == 0.0)
    throw std::domain_error("compute_lambda: phi or h vanishes");
  const double p1 = phi.d1(xi), p2 = phi.d2(xi);
  const double ratio = h.d1(xi) / hv;
  return 2.0 * a * pv * ((n - 2) * p1 - m * pv * ratio) +
         (pv * p2 - (n - 1) * p1 * p1 + m * pv * p1 * ratio) * (4.0 * a * xi + S) +
         2.0 * n * a * pv * p1;
}

namespace {

ScalarProfile exp_affine(double alpha, double beta, Interval dom) {
  return ScalarProfile::closed_form(
      [alpha, beta](double x) { return std::exp(alpha * x + beta); },
      [alpha, beta](double x) { return alpha * std::exp(alpha * x + beta); },
      [alpha, beta](double x) { return alpha * alpha * std::exp(alpha * x + beta); },
      dom);
}

ScalarProfile exp_sum(double c1, double r1, double c2, double r2, Interval dom) {
  return ScalarProfile::closed_form(
      [=](double x) { return c1 * std::exp(r1 * x) + c2 * std::exp(r2 * x); },
      [=](double x) { return c1 * r1 * std::exp(r1 * x) + c2 * r2 * std::exp(r2 * x); },
      [=](double x) {
        return c1 * r1 * r1 * std::exp(r1 * x) + c2 * r2 * r2 * std::exp(r2 * x);
      },
      dom);
}

// Characteristic roots of h'' + 2 alpha h' - ((n-2)/m) alpha^2 h = 0.
std::pair<double, double> exp_family_roots(int n, double m, double alpha) {
  if (!(m > n - 2))
    throw std::invalid_argument("exp family requires m > n-2");
  const double disc = std::abs(alpha) * std::sqrt((m + (n - 2)) / m);
  return {-alpha + disc, -alpha - disc};
}

ScalarProfile lambda_profile(int n, double m, double a, double S, ScalarProfile phi,
                             ScalarProfile h, Interval dom) {
  return ScalarProfile::from_value_fn(
      [n, m, a, S, phi, h](double xi) {
        return compute_lambda(n, m, a, S, phi, h, xi);
      },
      dom);
}

}  // namespace

SolutionCandidate family_exp_radial(int n, double m, double alpha, double beta,
                                    double c1, double c2) {
  if (c1 == 0.0 && c2 == 0.0)
    throw std::invalid_argument("exp family needs (c1, c2) != 0");
  const auto [r1, r2] = exp_family_roots(n, m, alpha);
  const Signature sig = Signature::euclidean(n);
  SolutionCandidate cand;
  cand.n = n;
  cand.m = m;
  cand.sig = sig;
  cand.spec = build_invariant(InvariantKind::quadratic, 1.0,
                              std::vector<double>(n, 0.0),
                              std::vector<double>(n, 0.0), sig);
  const Interval dom{-30.0, 30.0};
  cand.phi = exp_affine(alpha, beta, dom);
  cand.h = exp_sum(c1, r1, c2, r2, dom);
  cand.lambda = lambda_profile(n, m, 1.0, cand.spec.S, cand.phi, cand.h,
                               {dom.lo + 1e-3, dom.hi - 1e-3});
  return cand;
}

SolutionCandidate family_translation(int n, double m, const Signature& sig,
                                     const std::vector<double>& b_dir, double a,
                                     double b, double c1, double c2) {
  if (c1 == 0.0 && c2 == 0.0)
    throw std::invalid_argument("exp family needs (c1, c2) != 0");
  const auto [r1, r2] = exp_family_roots(n, m, a);
  SolutionCandidate cand;
  cand.n = n;
  cand.m = m;
  cand.sig = sig;
  cand.spec = build_invariant(InvariantKind::translation, 0.0, b_dir,
                              std::vector<double>(static_cast<std::size_t>(n), 0.0),
                              sig);
  const Interval dom{-30.0, 30.0};
  cand.phi = exp_affine(a, b, dom);
  cand.h = exp_sum(c1, r1, c2, r2, dom);
  cand.lambda = lambda_profile(n, m, 0.0, cand.spec.S, cand.phi, cand.h,
                               {dom.lo + 1e-3, dom.hi - 1e-3});
  return cand;
}

SolutionCandidate family_sqrt_radial(int n, double m, double c1, double c2,
                                     Interval interval) {
  if (!(interval.lo > 0.0) || !(interval.hi > interval.lo))
    throw std::invalid_argument("sqrt family needs an interval inside (0, inf)");
  const Signature sig = Signature::euclidean(n);
  SolutionCandidate cand;
  cand.n = n;
  cand.m = m;
  cand.sig = sig;
  cand.spec = build_invariant(InvariantKind::quadratic, 1.0,
                              std::vector<double>(static_cast<std::size_t>(n), 0.0),
                              std::vector<double>(static_cast<std::size_t>(n), 0.0),
                              sig);
  const double pad = std::max(1e-4, 1e-3 * interval.length());
  const Interval dom{std::max(0.5 * interval.lo, interval.lo - pad),
                     interval.hi + pad};
  cand.phi = ScalarProfile::closed_form(
      [](double x) { return std::sqrt(x); },
      [](double x) { return 0.5 / std::sqrt(x); },
      [](double x) { return -0.25 / (x * std::sqrt(x)); }, dom);
  if (n == 2) {
    cand.h = ScalarProfile::closed_form(
        [c1, c2](double x) { return c1 + c2 * std::log(x); },
        [c2](double x) { return c2 / x; },
        [c2](double x) { return -c2 / (x * x); }, dom);
  } else {
    const double mu = 0.5 * std::sqrt((n - 2) / m);
    cand.h = ScalarProfile::closed_form(
        [c1, c2, mu](double x) {
          return c1 * std::sin(mu * std::log(x)) + c2 * std::cos(mu * std::log(x));
        },
        [c1, c2, mu](double x) {
          const double t = mu * std::log(x);
          return (mu / x) * (c1 * std::cos(t) - c2 * std::sin(t));
        },
        [c1, c2, mu](double x) {
          const double t = mu * std::log(x);
          const double s = std::sin(t), c = std::cos(t);
          return (-mu / (x * x)) * (c1 * c - c2 * s) +
                 (mu * mu / (x * x)) * (-c1 * s - c2 * c);
        },
        dom);
  }
  // h is not globally defined; refuse intervals straddling a zero
  double prev = cand.h(interval.lo);
  for (int i = 0; i <= 512; ++i) {
    const double xi = interval.lo + interval.length() * i / 512.0;
    const double v = cand.h(xi);
    if (std::abs(v) < kConditioningFloor || v * prev < 0.0)
      throw std::domain_error("h vanishes inside the requested interval");
    prev = v;
  }
  cand.lambda = lambda_profile(n, m, 1.0, 0.0, cand.phi, cand.h, interval);
  return cand;
}

double witness_obstruction(int n, double m, const ScalarProfile& phi, double xi) {
  const double p = phi(xi);
  const double p1 = phi.d1(xi);
  return -(n - 2) * (1.0 + (n - 2) / m) * p1 * p1 / p;
}

WitnessReport triviality_witness(int n, double m, const Signature& sig,
                                 const ScalarProfile& phi, std::size_t samples) {
  (void)sig;
  WitnessReport report;
  const Interval dom = phi.domain();
  double max_d1 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double xi = dom.lo + dom.length() * i / double(samples - 1);
    max_d1 = std::max(max_d1, std::abs(phi.d1(xi)));
  }
  if (max_d1 < 1e-12) throw WitnessVacuousError();

  if (n == 2) {
    // (n-2) h phi' - m phi h' = 0 collapses to h' = 0
    report.trivial_via_constant_h = true;
    return report;
  }
  report.min_abs = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    const double xi = dom.lo + dom.length() * i / double(samples - 1);
    const double obs = witness_obstruction(n, m, phi, xi);
    report.samples.emplace_back(xi, obs);
    report.min_abs = std::min(report.min_abs, std::abs(obs));
  }
  return report;
}

}  // namespace qem
