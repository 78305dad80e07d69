#pragma once

#include "qem/conformal.hpp"

namespace qem {

/// Density/pressure split of an m = 1 candidate: lambda = (mu - rho)/(n-1)
/// and Lap h = ((n-2) mu + n rho) h / (n-1).
struct FluidDecomposition {
  ScalarProfile mu;
  ScalarProfile rho;
  bool flat_laplacian = false;
};

/// Laplacian of h with respect to gbar, as a function of xi.
double gbar_laplacian_h(const SolutionCandidate& cand, double xi);

/// Flat-background Laplacian of h as a function of xi (sensitivity reading).
double flat_laplacian_h(const SolutionCandidate& cand, double xi);

/// Solves {mu - rho = (n-1) lambda, (n-2) mu + n rho = (n-1) Lap h / h}:
/// mu = (Lap h / h + n lambda)/2 and rho = (Lap h / h - (n-2) lambda)/2.
/// The Laplacian is taken with respect to gbar unless flat_laplacian is set.
FluidDecomposition fluid_decompose(const SolutionCandidate& cand,
                                   bool flat_laplacian = false);

/// r1 = lambda (n-1) - (mu - rho); r2 = Lap h - ((n-2) mu + n rho) h/(n-1).
std::pair<double, double> fluid_residual(const SolutionCandidate& cand,
                                         const FluidDecomposition& decomp,
                                         const Point& p);

}  // namespace qem
