#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qem/linalg.hpp"

namespace qem {

using Point = std::vector<double>;

/// Signature of the flat pseudo-Euclidean background: a list of +/-1 entries.
class Signature {
 public:
  explicit Signature(std::vector<int> eps);
  static Signature euclidean(int n);

  int dim() const { return static_cast<int>(eps_.size()); }
  int eps(std::size_t k) const { return eps_[k]; }
  const std::vector<int>& entries() const { return eps_; }

 private:
  std::vector<int> eps_;
};

/// diag(eps_1, ..., eps_n).
Matrix flat_metric(const Signature& sig);

struct Box {
  std::vector<std::array<double, 2>> axes;

  int dim() const { return static_cast<int>(axes.size()); }
  bool contains(const Point& p) const;
  static Box cube(int n, double lo, double hi);
};

/// Seeded pseudo-random sample of points in a box. Regenerating with the
/// same seed and box gives the identical sequence; an accept predicate can
/// reject ill-conditioned points (they are redrawn from the same stream).
struct SampleGrid {
  std::vector<Point> points;
  std::uint64_t seed = 0;
  Box box;
};

SampleGrid make_grid(const Box& box, std::size_t count, std::uint64_t seed,
                     const std::function<bool(const Point&)>& accept = {});

using MetricSampler = std::function<Matrix(const Point&)>;

/// Christoffel symbols of a sampled metric by central differences:
/// Γ^k_{ij} = 1/2 g^{kl}(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij}).
Tensor3 fd_christoffel(const MetricSampler& metric, const Point& p, double step = 1e-4);

/// Ricci tensor assembled from finite differences of fd_christoffel plus the
/// quadratic Γ terms. Independent of any closed-form conformal identity.
Matrix fd_ricci(const MetricSampler& metric, const Point& p, double step = 1e-4);

}  // namespace qem
