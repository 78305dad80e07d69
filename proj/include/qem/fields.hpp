#pragma once

#include <functional>
#include <optional>

#include "qem/geometry.hpp"
#include "qem/linalg.hpp"

namespace qem {

struct ProfileDomainError : std::runtime_error {
  explicit ProfileDomainError(const std::string& what) : std::runtime_error(what) {}
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
  double length() const { return hi - lo; }
};

/// One-variable profile xi -> value with first and second derivative
/// evaluators. Houses phi, h, lambda and f. Evaluating outside the domain
/// interval throws ProfileDomainError.
class ScalarProfile {
 public:
  using Fn = std::function<double(double)>;

  ScalarProfile() = default;

  static ScalarProfile closed_form(Fn value, Fn d1, Fn d2,
                                   Interval dom = {-50.0, 50.0});
  static ScalarProfile constant(double c);
  /// Derivatives by central differences of the value function; for profiles
  /// whose derivatives are never needed analytically (e.g. lambda).
  static ScalarProfile from_value_fn(Fn value, Interval dom, double fd_step = 1e-5);

  double operator()(double xi) const;
  double d1(double xi) const;
  double d2(double xi) const;
  const Interval& domain() const { return dom_; }

 private:
  Fn value_, d1_, d2_;
  Interval dom_{-50.0, 50.0};
  void check(double xi) const;
};

enum class InvariantKind { quadratic, translation };

/// Invariant ansatz xi(x) = sum_k (a eps_k x_k^2 + b_k x_k + c_k), with the
/// outer reparameterization canonicalized to the identity. The translation
/// kind is the a = 0 case, xi = sum b_k x_k + c_k.
struct InvariantSpec {
  InvariantKind kind = InvariantKind::quadratic;
  double a = 0.0;
  std::vector<double> b;
  std::vector<double> c;
  Signature sig = Signature::euclidean(2);
  double S = 0.0;        // sum(eps_k b_k^2 - 4 a c_k)
  double eps_dir = 0.0;  // sum(eps_k b_k^2); zero for a lightlike direction

  int dim() const { return sig.dim(); }
  double xi(const Point& p) const;
};

InvariantSpec build_invariant(InvariantKind kind, double a,
                              const std::vector<double>& b,
                              const std::vector<double>& c, const Signature& sig);

struct InvariantJet {
  double value = 0.0;
  std::vector<double> grad;
  Matrix hess;
};

/// Exact jet: grad_k = 2 a eps_k x_k + b_k, hess = 2 a diag(eps).
InvariantJet invariant_jet(const InvariantSpec& spec, const Point& p);

struct Classification {
  enum class Kind { quadratic, translation, neither };
  Kind kind = Kind::neither;
  double a = 0.0;
  std::vector<double> b;
  double fit_residual = 0.0;
};

struct ConstantSamplerError : std::runtime_error {
  ConstantSamplerError() : std::runtime_error("sampler is constant on the box") {}
};

/// Recovers the invariant type of a black-box scalar by fitting finite
/// difference gradients to grad_k ∝ 2 a eps_k x_k + b_k (a monotone outer
/// function is absorbed into the per-point scale). Coefficients come back up
/// to a common factor; relative fit residual above 1e-3 means "neither".
Classification classify_invariant(const std::function<double(const Point&)>& sampler,
                                  const Signature& sig, const Box& box,
                                  std::size_t samples = 60, std::uint64_t seed = 7,
                                  double fd_step = 1e-5);

struct PointJet {
  double xi = 0.0;
  double value = 0.0;
  std::vector<double> grad;
  Matrix hess;
};

/// Chain rule for x -> profile(xi(x)):
/// grad_i = p' xi,_i and hess_ij = p'' xi,_i xi,_j + p' xi,_ij.
PointJet lift_profile(const ScalarProfile& profile, const InvariantSpec& spec,
                      const Point& p);

/// f = -m log h for the change of variables h = e^{-f/m}; h must stay
/// strictly positive on its domain.
ScalarProfile potential_from_h(const ScalarProfile& h, double m);

}  // namespace qem
