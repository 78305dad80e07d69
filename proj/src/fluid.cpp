#include "qem/fluid.hpp"

#include <cmath>

namespace qem {

namespace {

// grad/Laplacian of a composite field in terms of xi alone:
// |grad xi|^2 = 4 a xi + S and Lap xi = 2 n a for the canonical invariant.
double grad_xi_sq(const SolutionCandidate& cand, double xi) {
  return 4.0 * cand.spec.a * xi + cand.spec.S;
}

}  // namespace

double flat_laplacian_h(const SolutionCandidate& cand, double xi) {
  return cand.h.d2(xi) * grad_xi_sq(cand, xi) +
         cand.h.d1(xi) * 2.0 * cand.n * cand.spec.a;
}

double gbar_laplacian_h(const SolutionCandidate& cand, double xi) {
  // Lap_gbar h = phi^2 Lap_g h - (n-2) phi <grad phi, grad h>_g
  const double phi = cand.phi(xi);
  const double cross = cand.phi.d1(xi) * cand.h.d1(xi) * grad_xi_sq(cand, xi);
  return phi * phi * flat_laplacian_h(cand, xi) - (cand.n - 2) * phi * cross;
}

FluidDecomposition fluid_decompose(const SolutionCandidate& cand,
                                   bool flat_laplacian) {
  if (cand.m != 1.0)
    throw std::invalid_argument("fluid decomposition requires m = 1");
  const int n = cand.n;
  const SolutionCandidate c = cand;
  auto lap_over_h = [c, flat_laplacian](double xi) {
    const double h = c.h(xi);
    if (std::abs(h) < kConditioningFloor)
      throw ConditioningError("h below conditioning floor in fluid decomposition");
    return (flat_laplacian ? flat_laplacian_h(c, xi) : gbar_laplacian_h(c, xi)) / h;
  };
  const Interval dom = cand.lambda.domain();
  FluidDecomposition decomp;
  decomp.flat_laplacian = flat_laplacian;
  decomp.mu = ScalarProfile::from_value_fn(
      [c, lap_over_h, n](double xi) {
        return 0.5 * (lap_over_h(xi) + n * c.lambda(xi));
      },
      dom);
  decomp.rho = ScalarProfile::from_value_fn(
      [c, lap_over_h, n](double xi) {
        return 0.5 * (lap_over_h(xi) - (n - 2) * c.lambda(xi));
      },
      dom);
  return decomp;
}

std::pair<double, double> fluid_residual(const SolutionCandidate& cand,
                                         const FluidDecomposition& decomp,
                                         const Point& p) {
  const int n = cand.n;
  const double xi = cand.spec.xi(p);
  const double mu = decomp.mu(xi);
  const double rho = decomp.rho(xi);
  const double lam = cand.lambda(xi);
  const double h = cand.h(xi);
  const double lap =
      decomp.flat_laplacian ? flat_laplacian_h(cand, xi) : gbar_laplacian_h(cand, xi);
  const double r1 = lam * (n - 1) - (mu - rho);
  const double r2 = lap - ((n - 2) * mu + n * rho) * h / (n - 1);
  return {r1, r2};
}

}  // namespace qem
