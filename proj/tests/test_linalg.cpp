#include "qst/linalg.hpp"
#include "qst/rng.hpp"

#include <catch2/catch.hpp>

using namespace qst;

TEST_CASE("TallQR least squares and min-norm solves") {
  CounterRng rng(1, 0);
  Mat a = Mat::Zero(12, 5);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = rng.next_cnormal();
  TallQR qr(a);
  CHECK(qr.full_rank());

  Vec b(12);
  for (Index i = 0; i < 12; ++i) b[i] = rng.next_cnormal();
  Vec x = qr.least_squares(b);
  // normal equations oracle
  Vec x_ref = (a.adjoint() * a).ldlt().solve(a.adjoint() * b);
  CHECK((x - x_ref).cwiseAbs().maxCoeff() < 1e-10);

  Vec c(5);
  for (Index i = 0; i < 5; ++i) c[i] = rng.next_cnormal();
  Vec y = qr.min_norm(c);
  CHECK((a.adjoint() * y - c).cwiseAbs().maxCoeff() < 1e-10);
  // y = A (A^H A)^{-1} c is the minimum-norm representative
  Vec y_ref = a * (a.adjoint() * a).ldlt().solve(c);
  CHECK((y - y_ref).cwiseAbs().maxCoeff() < 1e-10);

  Mat li = qr.left_inverse();
  CHECK((li * a - Mat::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("TallQR flags rank deficiency") {
  Mat a = Mat::Zero(6, 3);
  CounterRng rng(2, 0);
  for (Index i = 0; i < 6; ++i) a(i, 0) = rng.next_cnormal();
  a.col(1) = 2.0 * a.col(0);
  for (Index i = 0; i < 6; ++i) a(i, 2) = rng.next_cnormal();
  TallQR qr(a);
  CHECK(!qr.full_rank());
}

TEST_CASE("svd_report finds null space of a singular map") {
  CounterRng rng(3, 0);
  Mat a = Mat::Zero(8, 4);
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 3; ++j) a(i, j) = rng.next_cnormal();
  a.col(3) = a.col(0) - a.col(2);
  auto rep = svd_report(a);
  CHECK(rep.singular_values.size() == 4);
  CHECK(rep.sigma_min() < 1e-12 * rep.sigma_max());
  // descending order
  for (int i = 0; i + 1 < 4; ++i)
    CHECK(rep.singular_values[i] >= rep.singular_values[i + 1]);
  Vec null = rep.v.col(3);
  CHECK((a * null).norm() < 1e-10);
}

TEST_CASE("matrix exponential against series and unitarity") {
  CounterRng rng(4, 0);
  Mat h = random_hermitian(6, rng);
  Mat u = expm(cplx(0, -1.0) * h);
  CHECK((u * u.adjoint() - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
  // series oracle at small time
  double dt = 1e-3;
  Mat udt = expm(cplx(0, -dt) * h);
  Mat series = Mat::Identity(6, 6) - cplx(0, dt) * h - 0.5 * dt * dt * h * h;
  CHECK((udt - series).cwiseAbs().maxCoeff() < 1e-8);
}
