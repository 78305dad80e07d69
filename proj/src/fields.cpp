#include "qem/fields.hpp"

#include <algorithm>
#include <cmath>

namespace qem {

ScalarProfile ScalarProfile::closed_form(Fn value, Fn d1, Fn d2, Interval dom) {
  ScalarProfile p;
  p.value_ = std::move(value);
  p.d1_ = std::move(d1);
  p.d2_ = std::move(d2);
  p.dom_ = dom;
  return p;
}

ScalarProfile ScalarProfile::constant(double c) {
  return closed_form([c](double) { return c; }, [](double) { return 0.0; },
                     [](double) { return 0.0; }, {-1e300, 1e300});
}

ScalarProfile ScalarProfile::from_value_fn(Fn value, Interval dom, double fd_step) {
  Fn v = value;
  Fn d1 = [v, fd_step](double x) {
    return (v(x + fd_step) - v(x - fd_step)) / (2.0 * fd_step);
  };
  Fn d2 = [v, fd_step](double x) {
    return (v(x + fd_step) - 2.0 * v(x) + v(x - fd_step)) / (fd_step * fd_step);
  };
  // widen the stated domain by the stencil so edge evaluations stay legal
  Interval inner{dom.lo, dom.hi};
  ScalarProfile p;
  p.value_ = std::move(value);
  p.d1_ = std::move(d1);
  p.d2_ = std::move(d2);
  p.dom_ = inner;
  return p;
}

void ScalarProfile::check(double xi) const {
  if (!value_) throw std::logic_error("empty ScalarProfile");
  if (!dom_.contains(xi))
    throw ProfileDomainError("profile evaluated at xi=" + std::to_string(xi) +
                             " outside domain [" + std::to_string(dom_.lo) + ", " +
                             std::to_string(dom_.hi) + "]");
}

double ScalarProfile::operator()(double xi) const {
  check(xi);
  return value_(xi);
}

double ScalarProfile::d1(double xi) const {
  check(xi);
  return d1_(xi);
}

double ScalarProfile::d2(double xi) const {
  check(xi);
  return d2_(xi);
}

double InvariantSpec::xi(const Point& p) const {
  double s = 0.0;
  for (int k = 0; k < dim(); ++k)
    s += a * sig.eps(k) * p[k] * p[k] + b[k] * p[k] + c[k];
  return s;
}

InvariantSpec build_invariant(InvariantKind kind, double a,
                              const std::vector<double>& b,
                              const std::vector<double>& c, const Signature& sig) {
  const std::size_t n = static_cast<std::size_t>(sig.dim());
  if (b.size() != n || c.size() != n)
    throw std::invalid_argument("invariant coefficient length mismatch");
  const bool b_zero = std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; });
  if (kind == InvariantKind::quadratic) {
    if (a == 0.0 && b_zero)
      throw std::invalid_argument("degenerate invariant: a and b all zero");
  } else {
    if (a != 0.0)
      throw std::invalid_argument("translation invariant requires a = 0");
    if (b_zero)
      throw std::invalid_argument("translation invariant needs a nonzero direction");
  }
  InvariantSpec spec;
  spec.kind = kind;
  spec.a = a;
  spec.b = b;
  spec.c = c;
  spec.sig = sig;
  for (std::size_t k = 0; k < n; ++k) {
    spec.S += sig.eps(k) * b[k] * b[k] - 4.0 * a * c[k];
    spec.eps_dir += sig.eps(k) * b[k] * b[k];
  }
  return spec;
}

InvariantJet invariant_jet(const InvariantSpec& spec, const Point& p) {
  const int n = spec.dim();
  InvariantJet jet;
  jet.value = spec.xi(p);
  jet.grad.resize(n);
  jet.hess = Matrix(n, n);
  for (int k = 0; k < n; ++k) {
    jet.grad[k] = 2.0 * spec.a * spec.sig.eps(k) * p[k] + spec.b[k];
    jet.hess(k, k) = 2.0 * spec.a * spec.sig.eps(k);
  }
  return jet;
}

Classification classify_invariant(const std::function<double(const Point&)>& sampler,
                                  const Signature& sig, const Box& box,
                                  std::size_t samples, std::uint64_t seed,
                                  double fd_step) {
  const std::size_t n = static_cast<std::size_t>(sig.dim());
  const SampleGrid grid = make_grid(box, samples, seed);

  std::vector<std::vector<double>> grads;
  double max_norm = 0.0;
  for (const Point& p : grid.points) {
    std::vector<double> g(n);
    double norm2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      Point hi = p, lo = p;
      hi[k] += fd_step;
      lo[k] -= fd_step;
      g[k] = (sampler(hi) - sampler(lo)) / (2.0 * fd_step);
      norm2 += g[k] * g[k];
    }
    max_norm = std::max(max_norm, std::sqrt(norm2));
    grads.push_back(std::move(g));
  }
  if (max_norm < 1e-8) throw ConstantSamplerError();

  // Homogeneous fit: for each point, g_k (2a eps_l x_l + b_l) = g_l (2a eps_k x_k + b_k)
  // for all pairs k < l. Unknown vector v = (a, b_0, ..., b_{n-1}); the best
  // fit is the smallest eigenvector of M^T M.
  const std::size_t dim = n + 1;
  Matrix normal(dim, dim);
  std::size_t rows = 0;
  for (std::size_t pi = 0; pi < grid.points.size(); ++pi) {
    const Point& x = grid.points[pi];
    std::vector<double> g = grads[pi];
    double norm = 0.0;
    for (double v : g) norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-10 * max_norm) continue;  // gradient vanishes here, skip
    for (double& v : g) v /= norm;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = k + 1; l < n; ++l) {
        std::vector<double> row(dim, 0.0);
        row[0] = 2.0 * (g[k] * sig.eps(l) * x[l] - g[l] * sig.eps(k) * x[k]);
        row[1 + l] += g[k];
        row[1 + k] -= g[l];
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = 0; j < dim; ++j) normal(i, j) += row[i] * row[j];
        ++rows;
      }
  }

  const SymmetricEigen eig = jacobi_eigen(normal);
  Classification out;
  out.fit_residual = std::sqrt(std::max(eig.values[0], 0.0) / static_cast<double>(rows));
  out.b.resize(n);
  double a = eig.vectors(0, 0);
  for (std::size_t k = 0; k < n; ++k) out.b[k] = eig.vectors(k + 1, 0);

  if (out.fit_residual > 1e-3) {
    out.kind = Classification::Kind::neither;
    return out;
  }
  // scale so the largest coefficient magnitude is 1 (coefficients are only
  // determined up to a common factor)
  double scale = std::abs(a);
  for (double v : out.b) scale = std::max(scale, std::abs(v));
  if (scale > 0) {
    a /= scale;
    for (double& v : out.b) v /= scale;
  }
  double bmax = 0.0;
  for (double v : out.b) bmax = std::max(bmax, std::abs(v));
  // box coordinates are O(1); a's contribution to the gradient is comparable
  // to b's, so a plain magnitude comparison resolves the kind
  if (std::abs(a) < 1e-6 * std::max(bmax, 1.0)) {
    out.kind = Classification::Kind::translation;
    out.a = 0.0;
  } else {
    out.kind = Classification::Kind::quadratic;
    out.a = a;
  }
  return out;
}

PointJet lift_profile(const ScalarProfile& profile, const InvariantSpec& spec,
                      const Point& p) {
  const InvariantJet xi = invariant_jet(spec, p);
  const int n = spec.dim();
  PointJet jet;
  jet.xi = xi.value;
  jet.value = profile(xi.value);
  const double p1 = profile.d1(xi.value);
  const double p2 = profile.d2(xi.value);
  jet.grad.resize(n);
  jet.hess = Matrix(n, n);
  for (int i = 0; i < n; ++i) jet.grad[i] = p1 * xi.grad[i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      jet.hess(i, j) = p2 * xi.grad[i] * xi.grad[j] + p1 * xi.hess(i, j);
  return jet;
}

ScalarProfile potential_from_h(const ScalarProfile& h, double m) {
  if (!(m > 0.0) || !std::isfinite(m))
    throw std::invalid_argument("potential change of variables needs finite m > 0");
  const Interval dom = h.domain();
  // positivity scan; the evaluators recheck pointwise
  const int scan = 129;
  for (int i = 0; i < scan; ++i) {
    const double xi = dom.lo + (dom.hi - dom.lo) * i / (scan - 1);
    if (!(h(xi) > 0.0))
      throw std::domain_error("h must be strictly positive for f = -m log h");
  }
  auto hv = [h](double xi) {
    const double v = h(xi);
    if (!(v > 0.0))
      throw std::domain_error("h must be strictly positive for f = -m log h");
    return v;
  };
  return ScalarProfile::closed_form(
      [hv, m](double xi) { return -m * std::log(hv(xi)); },
      [hv, h, m](double xi) { return -m * h.d1(xi) / hv(xi); },
      [hv, h, m](double xi) {
        const double v = hv(xi);
        const double r = h.d1(xi) / v;
        return -m * (h.d2(xi) / v - r * r);
      },
      dom);
}

}  // namespace qem
