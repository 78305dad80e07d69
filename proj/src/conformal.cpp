#include "qem/conformal.hpp"

#include <cmath>

namespace qem {

namespace {

PointJet phi_jet_checked(const SolutionCandidate& cand, const Point& p) {
  PointJet jet = lift_profile(cand.phi, cand.spec, p);
  if (std::abs(jet.value) < kConditioningFloor)
    throw ConditioningError("phi below conditioning floor at sample point");
  return jet;
}

double h_value_checked(const SolutionCandidate& cand, double xi) {
  const double h = cand.h(xi);
  if (std::abs(h) < kConditioningFloor)
    throw ConditioningError("h below conditioning floor at sample point");
  return h;
}

}  // namespace

Matrix gbar_metric(const SolutionCandidate& cand, const Point& p) {
  const PointJet phi = phi_jet_checked(cand, p);
  const int n = cand.n;
  Matrix g(n, n);
  for (int i = 0; i < n; ++i) g(i, i) = cand.sig.eps(i) / (phi.value * phi.value);
  return g;
}

std::pair<double, double> laplacian_gradnorm(const ScalarProfile& field,
                                             const InvariantSpec& spec,
                                             const Point& p) {
  const PointJet jet = lift_profile(field, spec, p);
  double lap = 0.0, grad2 = 0.0;
  for (int k = 0; k < spec.dim(); ++k) {
    lap += spec.sig.eps(k) * jet.hess(k, k);
    grad2 += spec.sig.eps(k) * jet.grad[k] * jet.grad[k];
  }
  return {lap, grad2};
}

Matrix conformal_ricci(const SolutionCandidate& cand, const Point& p) {
  const int n = cand.n;
  const PointJet phi = phi_jet_checked(cand, p);
  double lap = 0.0, grad2 = 0.0;
  for (int k = 0; k < n; ++k) {
    lap += cand.sig.eps(k) * phi.hess(k, k);
    grad2 += cand.sig.eps(k) * phi.grad[k] * phi.grad[k];
  }
  const double trace_term = phi.value * lap - (n - 1) * grad2;
  Matrix ric(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = (n - 2) * phi.value * phi.hess(i, j);
      if (i == j) v += trace_term * cand.sig.eps(i);
      ric(i, j) = v / (phi.value * phi.value);
    }
  return ric;
}

Matrix conformal_hessian(const SolutionCandidate& cand, const Point& p,
                         const ScalarProfile& field) {
  const int n = cand.n;
  const PointJet phi = phi_jet_checked(cand, p);
  const PointJet f = lift_profile(field, cand.spec, p);
  double cross = 0.0;
  for (int k = 0; k < n; ++k)
    cross += cand.sig.eps(k) * (phi.grad[k] / phi.value) * f.grad[k];
  Matrix hess(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      if (i != j) {
        hess(i, j) = f.hess(i, j) + (phi.grad[j] / phi.value) * f.grad[i] +
                     (phi.grad[i] / phi.value) * f.grad[j];
        hess(j, i) = hess(i, j);
      } else {
        hess(i, i) = f.hess(i, i) + 2.0 * (phi.grad[i] / phi.value) * f.grad[i] -
                     cand.sig.eps(i) * cross;
      }
    }
  return hess;
}

Matrix qem_residual(const SolutionCandidate& cand, const Point& p) {
  if (!std::isfinite(cand.m))
    throw std::invalid_argument("h-form residual requires finite m; use the f-form");
  const int n = cand.n;
  const double xi = cand.spec.xi(p);
  const double h = h_value_checked(cand, xi);
  const double lam = cand.lambda(xi);
  const Matrix ric = conformal_ricci(cand, p);
  const Matrix hess = conformal_hessian(cand, p, cand.h);
  const Matrix gb = gbar_metric(cand, p);
  Matrix res(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      res(i, j) = ric(i, j) - (cand.m / h) * hess(i, j) - lam * gb(i, j);
  return res;
}

Matrix qem_residual_f_form(const SolutionCandidate& cand, const Point& p) {
  const int n = cand.n;
  const double xi = cand.spec.xi(p);
  const double lam = cand.lambda(xi);
  const Matrix ric = conformal_ricci(cand, p);
  const Matrix gb = gbar_metric(cand, p);

  if (!std::isfinite(cand.m)) {
    // Einstein limit: h = e^{-f/m} -> const, f == 0 after absorbing the
    // constant; the df term is dropped
    if (std::abs(cand.h.d1(xi)) > 1e-12)
      throw std::invalid_argument("m = infinity requires a constant h profile");
    Matrix res(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) res(i, j) = ric(i, j) - lam * gb(i, j);
    return res;
  }

  const ScalarProfile f = potential_from_h(cand.h, cand.m);
  const Matrix hess_f = conformal_hessian(cand, p, f);
  const PointJet fj = lift_profile(f, cand.spec, p);
  Matrix res(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      res(i, j) = ric(i, j) + hess_f(i, j) -
                  (1.0 / cand.m) * fj.grad[i] * fj.grad[j] - lam * gb(i, j);
  return res;
}

Matrix edp_residuals(const SolutionCandidate& cand, const Point& p) {
  const int n = cand.n;
  const double xi = cand.spec.xi(p);
  const double hval = h_value_checked(cand, xi);
  const double lam = cand.lambda(xi);
  const PointJet phi = phi_jet_checked(cand, p);
  const PointJet h = lift_profile(cand.h, cand.spec, p);

  double sum_tr = 0.0;   // sum eps_k [phi phi,_kk - (n-1) phi,_k^2]
  double sum_mix = 0.0;  // sum eps_k phi phi,_k h,_k
  for (int k = 0; k < n; ++k) {
    sum_tr += cand.sig.eps(k) *
              (phi.value * phi.hess(k, k) - (n - 1) * phi.grad[k] * phi.grad[k]);
    sum_mix += cand.sig.eps(k) * phi.value * phi.grad[k] * h.grad[k];
  }

  Matrix res(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i != j) {
        res(i, j) = (n - 2) * hval * phi.hess(i, j) -
                    cand.m * (phi.value * h.hess(i, j) + phi.grad[j] * h.grad[i] +
                              phi.grad[i] * h.grad[j]);
      } else {
        const int ei = cand.sig.eps(i);
        res(i, i) = (n - 2) * hval * phi.value * phi.hess(i, i) + ei * hval * sum_tr -
                    cand.m * (phi.value * phi.value * h.hess(i, i) +
                              2.0 * phi.value * phi.grad[i] * h.grad[i] -
                              ei * sum_mix) -
                    ei * lam * hval;
      }
    }
  return res;
}

double lambda_from_trace(const SolutionCandidate& cand, const Point& p) {
  const int n = cand.n;
  const double xi = cand.spec.xi(p);
  const double h = h_value_checked(cand, xi);
  const PointJet phi = phi_jet_checked(cand, p);
  const Matrix ric = conformal_ricci(cand, p);
  const Matrix hess = conformal_hessian(cand, p, cand.h);
  double tr = 0.0;
  for (int i = 0; i < n; ++i)
    tr += cand.sig.eps(i) * phi.value * phi.value *
          (ric(i, i) - (cand.m / h) * hess(i, i));
  return tr / n;
}

double ResidualReport::max_abs() const {
  double m = 0.0;
  for (const auto& ch : channels) m = std::max(m, ch.max_abs);
  return m;
}

const ChannelStats* ResidualReport::channel(const std::string& id) const {
  for (const auto& ch : channels)
    if (ch.id == id) return &ch;
  return nullptr;
}

SampleGrid candidate_grid(const SolutionCandidate& cand, const Box& box,
                          std::size_t count, std::uint64_t seed) {
  auto accept = [&cand](const Point& p) {
    const double xi = cand.spec.xi(p);
    if (!cand.phi.domain().contains(xi) || !cand.h.domain().contains(xi) ||
        !cand.lambda.domain().contains(xi))
      return false;
    return std::abs(cand.phi(xi)) >= kConditioningFloor &&
           std::abs(cand.h(xi)) >= kConditioningFloor;
  };
  return make_grid(box, count, seed, accept);
}

ResidualReport evaluate_candidate(const SolutionCandidate& cand,
                                  const SampleGrid& grid) {
  const int n = cand.n;
  ResidualReport report;
  report.seed = grid.seed;
  report.box = grid.box;
  report.count = grid.points.size();

  struct Acc {
    double max_abs = 0.0;
    double sumsq = 0.0;
    Point worst;
  };
  std::vector<Acc> qem_acc(static_cast<std::size_t>(n * n));
  std::vector<Acc> edp_acc(static_cast<std::size_t>(n * n));
  Acc lam_acc;

  for (const Point& p : grid.points) {
    const Matrix q = qem_residual(cand, p);
    const Matrix e = edp_residuals(cand, p);
    const double lam_diff =
        std::abs(lambda_from_trace(cand, p) - cand.lambda(cand.spec.xi(p)));
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        auto upd = [&p](Acc& a, double v) {
          const double av = std::abs(v);
          a.sumsq += av * av;
          if (av >= a.max_abs) {
            a.max_abs = av;
            a.worst = p;
          }
        };
        upd(qem_acc[static_cast<std::size_t>(i * n + j)], q(i, j));
        upd(edp_acc[static_cast<std::size_t>(i * n + j)], e(i, j));
      }
    lam_acc.sumsq += lam_diff * lam_diff;
    if (lam_diff >= lam_acc.max_abs) {
      lam_acc.max_abs = lam_diff;
      lam_acc.worst = p;
    }
  }

  const double cnt = static_cast<double>(grid.points.size());
  auto emit = [&](const std::string& id, const Acc& a) {
    report.channels.push_back({id, a.max_abs, std::sqrt(a.sumsq / cnt), a.worst});
  };
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      emit("qem(" + std::to_string(i) + "," + std::to_string(j) + ")",
           qem_acc[static_cast<std::size_t>(i * n + j)]);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      emit("edp(" + std::to_string(i) + "," + std::to_string(j) + ")",
           edp_acc[static_cast<std::size_t>(i * n + j)]);
  emit("lambda_trace", lam_acc);
  return report;
}

}  // namespace qem
