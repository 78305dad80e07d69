#include <doctest.h>

#include <cmath>

#include "qem/geometry.hpp"

using namespace qem;

namespace {

// Conformal-change rule for the flat background, used as an independent
// oracle: for gbar = e^{2w} g, Gamma^k_ij = d^k_i w_j + d^k_j w_i - g_ij g^{kl} w_l.
Tensor3 conformal_christoffel_oracle(const Signature& sig,
                                     const std::vector<double>& w_grad) {
  const std::size_t n = w_grad.size();
  Tensor3 gamma(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double v = 0.0;
        if (k == i) v += w_grad[j];
        if (k == j) v += w_grad[i];
        if (i == j) v -= sig.eps(i) * sig.eps(k) * w_grad[k];
        gamma(k, i, j) = v;
      }
  return gamma;
}

MetricSampler conformal_flat(const Signature& sig,
                             std::function<double(const Point&)> phi) {
  return [sig, phi](const Point& p) {
    const double f = phi(p);
    std::vector<double> d(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) d[k] = sig.eps(k) / (f * f);
    return Matrix::diagonal(d);
  };
}

}  // namespace

TEST_CASE("flat_metric") {
  CHECK(flat_metric(Signature({1, 1}))(0, 0) == 1.0);
  const Matrix lorentz = flat_metric(Signature({-1, 1, 1, 1}));
  CHECK(lorentz(0, 0) == -1.0);
  CHECK(lorentz(1, 1) == 1.0);
  CHECK(lorentz(0, 1) == 0.0);
  CHECK_THROWS_AS(Signature({1}), std::invalid_argument);
  CHECK_THROWS_AS(Signature({1, 0, 1}), std::invalid_argument);
}

TEST_CASE("sample grid is deterministic and stays in the box") {
  const Box box = Box::cube(3, -1.0, 2.0);
  const SampleGrid a = make_grid(box, 100, 42);
  const SampleGrid b = make_grid(box, 100, 42);
  REQUIRE(a.points.size() == 100);
  CHECK(a.points == b.points);
  for (const Point& p : a.points) CHECK(box.contains(p));
  const SampleGrid c = make_grid(box, 100, 43);
  CHECK(a.points != c.points);
}

TEST_CASE("fd_christoffel vanishes for a constant metric") {
  const Signature sig({-1, 1, 1});
  MetricSampler flat = [&](const Point&) { return flat_metric(sig); };
  const Tensor3 gamma = fd_christoffel(flat, {0.1, -0.2, 0.3});
  double max = 0.0;
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) max = std::max(max, std::abs(gamma(k, i, j)));
  CHECK(max < 1e-12);
}

TEST_CASE("fd_christoffel matches the analytic conformal values for phi = e^{x1}") {
  const Signature sig({1, 1});
  auto phi = [](const Point& p) { return std::exp(p[0]); };
  const Point p{0.3, -0.1};
  const Tensor3 fd = fd_christoffel(conformal_flat(sig, phi), p);
  // w = -log(phi) = -x1
  const Tensor3 exact = conformal_christoffel_oracle(sig, {-1.0, 0.0});
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        CHECK(fd(k, i, j) == doctest::Approx(exact(k, i, j)).epsilon(1e-7));
}

TEST_CASE("fd_christoffel is symmetric in its lower indices") {
  const Signature sig({1, 1, 1});
  auto phi = [](const Point& p) { return std::exp(0.5 * p[0] - 0.3 * p[1] * p[2]); };
  const Tensor3 gamma =
      fd_christoffel(conformal_flat(sig, phi), {0.2, 0.4, -0.1});
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(std::abs(gamma(k, i, j) - gamma(k, j, i)) < 1e-10);
}

TEST_CASE("fd_christoffel rejects a singular metric") {
  MetricSampler zero = [](const Point& p) { return Matrix(p.size(), p.size()); };
  CHECK_THROWS_AS(fd_christoffel(zero, {0.0, 0.0}), SingularMatrixError);
  const Signature sig({1, 1});
  MetricSampler flat = [&](const Point&) { return flat_metric(sig); };
  CHECK_THROWS_AS(fd_christoffel(flat, {0.0, 0.0}, 0.0), std::invalid_argument);
}

TEST_CASE("fd_ricci vanishes for constant metrics") {
  const Signature sig({-1, 1, 1, 1});
  MetricSampler flat = [&](const Point&) { return flat_metric(sig); };
  CHECK(fd_ricci(flat, {0.1, 0.2, -0.3, 0.4}).max_abs() < 1e-10);
}

TEST_CASE("fd_ricci sees constant curvature for the round-sphere factor") {
  const int n = 3;
  const Signature sig = Signature::euclidean(n);
  auto phi = [](const Point& p) {
    double r = 0.0;
    for (double x : p) r += x * x;
    return 0.5 * (1.0 + r);
  };
  const MetricSampler gbar = conformal_flat(sig, phi);
  const Point p{0.2, -0.3, 0.1};
  const Matrix ric = fd_ricci(gbar, p);
  const Matrix expect = gbar(p) * static_cast<double>(n - 1);
  CHECK((ric - expect).max_abs() < 1e-5);
}

TEST_CASE("fd_ricci vanishes for the flat two-dimensional factor e^{x1}") {
  const Signature sig({1, 1});
  auto phi = [](const Point& p) { return std::exp(p[0]); };
  const Matrix ric = fd_ricci(conformal_flat(sig, phi), {0.25, -0.4});
  CHECK(ric.max_abs() < 1e-6);
}

TEST_CASE("halving the step improves fd_ricci at second order") {
  const int n = 3;
  const Signature sig = Signature::euclidean(n);
  auto phi = [](const Point& p) {
    double r = 0.0;
    for (double x : p) r += x * x;
    return 0.5 * (1.0 + r);
  };
  const MetricSampler gbar = conformal_flat(sig, phi);
  const Point p{0.3, 0.1, -0.2};
  const Matrix expect = gbar(p) * static_cast<double>(n - 1);
  const double err_coarse = (fd_ricci(gbar, p, 2e-2) - expect).max_abs();
  const double err_fine = (fd_ricci(gbar, p, 1e-2) - expect).max_abs();
  CHECK(err_coarse / err_fine >= 3.0);
}
