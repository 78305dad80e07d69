#include "qem/geometry.hpp"

#include <cmath>
#include <random>

namespace qem {

Signature::Signature(std::vector<int> eps) : eps_(std::move(eps)) {
  if (eps_.size() < 2)
    throw std::invalid_argument("signature needs dimension >= 2");
  for (int e : eps_)
    if (e != 1 && e != -1)
      throw std::invalid_argument("signature entries must be +1 or -1");
}

Signature Signature::euclidean(int n) { return Signature(std::vector<int>(n, 1)); }

Matrix flat_metric(const Signature& sig) {
  std::vector<double> d(sig.dim());
  for (int k = 0; k < sig.dim(); ++k) d[k] = sig.eps(k);
  return Matrix::diagonal(d);
}

bool Box::contains(const Point& p) const {
  if (p.size() != axes.size()) return false;
  for (std::size_t k = 0; k < axes.size(); ++k)
    if (p[k] < axes[k][0] || p[k] > axes[k][1]) return false;
  return true;
}

Box Box::cube(int n, double lo, double hi) {
  Box b;
  b.axes.assign(static_cast<std::size_t>(n), {lo, hi});
  return b;
}

SampleGrid make_grid(const Box& box, std::size_t count, std::uint64_t seed,
                     const std::function<bool(const Point&)>& accept) {
  std::mt19937_64 rng(seed);
  SampleGrid grid;
  grid.seed = seed;
  grid.box = box;
  grid.points.reserve(count);
  const std::size_t max_draws = 1000 * count + 1000;
  std::size_t draws = 0;
  while (grid.points.size() < count) {
    if (++draws > max_draws)
      throw std::runtime_error("sample grid: accept predicate rejected too many draws");
    Point p(box.axes.size());
    for (std::size_t k = 0; k < box.axes.size(); ++k) {
      // uniform in [lo, hi] from a canonical 53-bit draw; implementation
      // independent so reports are reproducible across standard libraries
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      p[k] = box.axes[k][0] + u * (box.axes[k][1] - box.axes[k][0]);
    }
    if (!accept || accept(p)) grid.points.push_back(std::move(p));
  }
  return grid;
}

namespace {

Matrix metric_partial(const MetricSampler& metric, const Point& p, std::size_t axis,
                      double step) {
  Point hi = p, lo = p;
  hi[axis] += step;
  lo[axis] -= step;
  return (metric(hi) - metric(lo)) * (0.5 / step);
}

}  // namespace

Tensor3 fd_christoffel(const MetricSampler& metric, const Point& p, double step) {
  if (step <= 0) throw std::invalid_argument("fd step must be positive");
  const std::size_t n = p.size();
  const Matrix g = metric(p);
  const Matrix ginv = invert(g);
  std::vector<Matrix> dg(n);
  for (std::size_t a = 0; a < n; ++a) dg[a] = metric_partial(metric, p, a, step);

  Tensor3 gamma(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l)
          s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        gamma(k, i, j) = 0.5 * s;
        gamma(k, j, i) = 0.5 * s;
      }
  return gamma;
}

Matrix fd_ricci(const MetricSampler& metric, const Point& p, double step) {
  const std::size_t n = p.size();
  const Tensor3 gamma = fd_christoffel(metric, p, step);

  // ∂_a Γ by a second central difference of the (already FD) Christoffels.
  std::vector<Tensor3> dgamma(n);
  for (std::size_t a = 0; a < n; ++a) {
    Point hi = p, lo = p;
    hi[a] += step;
    lo[a] -= step;
    const Tensor3 gh = fd_christoffel(metric, hi, step);
    const Tensor3 gl = fd_christoffel(metric, lo, step);
    Tensor3 d(n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          d(k, i, j) = (gh(k, i, j) - gl(k, i, j)) * (0.5 / step);
    dgamma[a] = std::move(d);
  }

  // Ric_{ij} = ∂_k Γ^k_{ij} − ∂_j Γ^k_{ik} + Γ^k_{kl}Γ^l_{ij} − Γ^k_{jl}Γ^l_{ik}
  Matrix ric(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        v += dgamma[k](k, i, j) - dgamma[j](k, i, k);
        for (std::size_t l = 0; l < n; ++l)
          v += gamma(k, k, l) * gamma(l, i, j) - gamma(k, j, l) * gamma(l, i, k);
      }
      ric(i, j) = v;
    }
  return ric;
}

}  // namespace qem
