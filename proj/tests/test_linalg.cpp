#include <doctest.h>

#include "qem/linalg.hpp"

using namespace qem;

TEST_CASE("invert recovers identity on a pseudo-Euclidean diagonal") {
  const Matrix g = Matrix::diagonal({-1.0, 1.0, 1.0, 1.0});
  const Matrix inv = invert(g);
  const Matrix prod = g * inv;
  CHECK((prod - Matrix::identity(4)).max_abs() < 1e-14);
}

TEST_CASE("invert handles a dense matrix with pivoting") {
  Matrix a(3, 3);
  a(0, 0) = 0.0; a(0, 1) = 2.0; a(0, 2) = 1.0;
  a(1, 0) = 1.0; a(1, 1) = -1.0; a(1, 2) = 0.5;
  a(2, 0) = 3.0; a(2, 1) = 0.0; a(2, 2) = -2.0;
  const Matrix prod = a * invert(a);
  CHECK((prod - Matrix::identity(3)).max_abs() < 1e-12);
}

TEST_CASE("invert rejects a singular matrix") {
  const Matrix zero(3, 3);
  CHECK_THROWS_AS(invert(zero), SingularMatrixError);
}

TEST_CASE("jacobi_eigen diagonalizes a symmetric matrix") {
  Matrix a(2, 2);
  a(0, 0) = 2.0; a(0, 1) = 1.0;
  a(1, 0) = 1.0; a(1, 1) = 2.0;
  const SymmetricEigen e = jacobi_eigen(a);
  CHECK(e.values[0] == doctest::Approx(1.0));
  CHECK(e.values[1] == doctest::Approx(3.0));
  // smallest eigenvector proportional to (1, -1)
  CHECK(e.vectors(0, 0) == doctest::Approx(-e.vectors(1, 0)));
}
