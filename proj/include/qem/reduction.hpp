#pragma once

#include "qem/conformal.hpp"

namespace qem {

struct StepTooCoarseError : std::runtime_error {
  explicit StepTooCoarseError(const std::string& what) : std::runtime_error(what) {}
};

/// Reduced equation (n-2) h phi'' - m phi h'' - 2 m phi' h' = 0 solved for h''.
double ode_rhs(int n, double m, const ScalarProfile& phi, double xi, double h,
               double hp);

struct OdeProblem {
  int n = 3;
  double m = 1.0;
  ScalarProfile phi;
  double xi0 = 0.0;
  double xi1 = 1.0;
  double h0 = 1.0;
  double hp0 = 0.0;
  double step = 1e-3;
};

/// Classical fixed-step RK4 with a mandatory half-step Richardson re-run; the
/// two runs must agree to 1e-8 relative or StepTooCoarseError is thrown.
/// Value/slope come from a cubic Hermite interpolant of the dense output; the
/// second derivative is reconstructed from the ODE right-hand side.
ScalarProfile integrate_h(const OdeProblem& problem);

/// lambda(xi) from the reduction:
/// 2 a phi [(n-2) phi' - m phi h'/h]
///   + [phi phi'' - (n-1) phi'^2 + m phi phi' h'/h](4 a xi + S) + 2 n a phi phi'.
double compute_lambda(int n, double m, double a, double S, const ScalarProfile& phi,
                      const ScalarProfile& h, double xi);

/// Rotation-invariant family: xi = sum x_k^2 (Euclidean), phi = e^{alpha xi + beta},
/// h = c1 e^{r1 xi} + c2 e^{r2 xi} with r_{1,2} = -alpha +- |alpha| sqrt((m-(n-2))/m).
/// Requires m > n-2.
SolutionCandidate family_exp_radial(int n, double m, double alpha, double beta,
                                    double c1, double c2);

/// Translation-invariant family: xi = sum b_k x_k, phi = e^{a xi + b}; same
/// root structure in a. lambda carries the factor eps_dir = sum eps_k b_k^2,
/// so a lightlike direction gives a steady (lambda = 0) solution.
SolutionCandidate family_translation(int n, double m, const Signature& sig,
                                     const std::vector<double>& b_dir, double a,
                                     double b, double c1, double c2);

/// Euler-equation family: xi = sum x_k^2 > 0, phi = sqrt(xi). For n = 2,
/// h = c1 + c2 log xi and lambda = 0; for n > 2, h = c1 sin(mu log xi)
/// + c2 cos(mu log xi) with mu = (1/2) sqrt((n-2)/m) and lambda = n-2. The
/// interval must avoid zeros of h.
SolutionCandidate family_sqrt_radial(int n, double m, double c1, double c2,
                                     Interval interval);

struct WitnessVacuousError : std::runtime_error {
  WitnessVacuousError()
      : std::runtime_error("witness vacuous: phi is constant, candidate already trivial") {}
};

/// Nonexistence certificate for the invariant xi = sum_{k<=n-1} eps_k x_k^2.
/// Solving the first-order necessary condition exactly as h = phi^{(n-2)/m}
/// leaves the obstruction -(n-2)(1 + (n-2)/m) phi'^2 / phi in the reduced
/// equation, bounded away from zero wherever phi' != 0; for n = 2 the
/// condition forces h' = 0 directly.
struct WitnessReport {
  bool trivial_via_constant_h = false;  // the n = 2 degeneration
  std::vector<std::pair<double, double>> samples;  // (xi, obstruction)
  double min_abs = 0.0;
};

WitnessReport triviality_witness(int n, double m, const Signature& sig,
                                 const ScalarProfile& phi, std::size_t samples = 101);

/// Obstruction value at a single xi (n > 2, h = phi^{(n-2)/m} substituted).
double witness_obstruction(int n, double m, const ScalarProfile& phi, double xi);

}  // namespace qem
