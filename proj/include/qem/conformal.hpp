#pragma once

#include <string>

#include "qem/fields.hpp"

namespace qem {

struct ConditioningError : std::runtime_error {
  explicit ConditioningError(const std::string& what) : std::runtime_error(what) {}
};

/// A conformally-flat candidate: metric gbar = g/phi^2 on (R^n, eps), with
/// potential h and quasi-Einstein function lambda, all profiles of the same
/// invariant xi. m may be +infinity (Einstein limit, f-form only).
struct SolutionCandidate {
  int n = 0;
  double m = 1.0;
  Signature sig = Signature::euclidean(2);
  InvariantSpec spec;
  ScalarProfile phi;
  ScalarProfile h;
  ScalarProfile lambda;
};

/// Floor below which |phi| or |h| counts as ill-conditioned.
inline constexpr double kConditioningFloor = 1e-6;

/// Closed-form Ricci of gbar = g/phi^2 over the flat background:
/// Ric = (1/phi^2){(n-2) phi Hess_g phi + [phi Lap_g phi - (n-1)|grad phi|^2] g}.
Matrix conformal_ricci(const SolutionCandidate& cand, const Point& p);

/// Hessian of a profile field with respect to gbar, componentwise.
Matrix conformal_hessian(const SolutionCandidate& cand, const Point& p,
                         const ScalarProfile& field);

/// Flat-signature Laplacian and gradient square norm of the composite field.
std::pair<double, double> laplacian_gradnorm(const ScalarProfile& field,
                                             const InvariantSpec& spec, const Point& p);

/// Residual of Ric_gbar - (m/h) Hess_gbar(h) - lambda gbar; zero for exact
/// solutions.
Matrix qem_residual(const SolutionCandidate& cand, const Point& p);

/// Same equation through f = -m log h: Ric + Hess_gbar f - (1/m) df (x) df
/// - lambda gbar. For m = +infinity the df term is dropped and h must be
/// constant.
Matrix qem_residual_f_form(const SolutionCandidate& cand, const Point& p);

/// Componentwise PDE residuals: off-diagonal entries carry
/// (n-2) h phi,_ij - m(phi h,_ij + phi,_j h,_i + phi,_i h,_j); diagonal
/// entries carry the second equation including the eps_i lambda h term.
Matrix edp_residuals(const SolutionCandidate& cand, const Point& p);

/// lambda recovered as (1/n) gbar-trace of Ric_gbar - (m/h) Hess_gbar(h).
double lambda_from_trace(const SolutionCandidate& cand, const Point& p);

/// gbar metric matrix at p, eps_i/phi^2 on the diagonal.
Matrix gbar_metric(const SolutionCandidate& cand, const Point& p);

struct ChannelStats {
  std::string id;
  double max_abs = 0.0;
  double rms = 0.0;
  Point worst_point;
};

struct ResidualReport {
  std::vector<ChannelStats> channels;
  std::uint64_t seed = 0;
  Box box;
  std::size_t count = 0;

  double max_abs() const;
  const ChannelStats* channel(const std::string& id) const;
};

/// Deterministic grid for a candidate: points where |phi| or |h| falls below
/// the conditioning floor, or xi leaves a profile domain, are redrawn.
SampleGrid candidate_grid(const SolutionCandidate& cand, const Box& box,
                          std::size_t count, std::uint64_t seed);

/// Evaluates every residual channel over the grid: qem(i,j), edp(i,j) and the
/// |lambda_from_trace - lambda| mismatch channel.
ResidualReport evaluate_candidate(const SolutionCandidate& cand, const SampleGrid& grid);

}  // namespace qem
