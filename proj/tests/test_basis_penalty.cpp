#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctm/basis_penalty.hpp"
#include "ctm/rng.hpp"

#include <Eigen/Eigenvalues>

using namespace ctm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Independent oracle: plain recursive Cox-de Boor, no basis-table reuse.
double cox_de_boor(const std::vector<double>& t, int j, int d, double x, double hi) {
  if (d == 0) {
    if (x >= hi) return t[j] < t[j + 1] && t[j + 1] >= hi ? 1.0 : 0.0;
    return t[j] <= x && x < t[j + 1] ? 1.0 : 0.0;
  }
  double a = 0.0, b = 0.0;
  if (t[j + d] > t[j]) a = (x - t[j]) / (t[j + d] - t[j]) * cox_de_boor(t, j, d - 1, x, hi);
  if (t[j + d + 1] > t[j + 1])
    b = (t[j + d + 1] - x) / (t[j + d + 1] - t[j + 1]) * cox_de_boor(t, j + 1, d - 1, x, hi);
  return a + b;
}

std::vector<double> clamped_knots(double lo, double hi, int m, int degree) {
  std::vector<double> t(m + degree + 1);
  const int interior = m - degree - 1;
  for (int j = 0; j <= degree; ++j) t[j] = lo;
  for (int j = 1; j <= interior; ++j) t[degree + j] = lo + (hi - lo) * j / (interior + 1);
  for (int j = 0; j <= degree; ++j) t[m + j] = hi;
  return t;
}

double quad_form(const PenaltyMatrix& pen, const VectorXd& g) {
  return g.dot(pen.matrix * g);
}

}  // namespace

TEST_CASE("partition of unity") {
  std::vector<int> points;
  for (int r = 0; r <= 36; ++r) points.push_back(r);
  const MatrixXd B = bspline_matrix(36, 20, 3, points);
  for (Eigen::Index r = 0; r < B.rows(); ++r) {
    CHECK(B.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(B.row(r).minCoeff() >= 0.0);
  }
  // fractional evaluation points too
  const BSplineBasis basis(0.0, 36.0, 20, 3);
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    const double x = 36.0 * rng.uniform();
    CHECK(basis.eval(x).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(basis.eval(36.5), std::out_of_range);
}

TEST_CASE("degree zero gives indicator columns") {
  const int M = 6;
  std::vector<int> points;
  for (int r = 0; r <= M; ++r) points.push_back(r);
  const MatrixXd B = bspline_matrix(M, M + 1, 0, points);
  CHECK((B - MatrixXd::Identity(M + 1, M + 1)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("matches the recursive Cox-de Boor oracle") {
  const int M = 36, m = 20, degree = 3;
  const auto knots = clamped_knots(0.0, M, m, degree);
  const BSplineBasis basis(0.0, static_cast<double>(M), m, degree);
  Rng rng(17);
  for (int k = 0; k < 60; ++k) {
    const double x = k < 37 ? static_cast<double>(k) : M * rng.uniform();
    const VectorXd row = basis.eval(x);
    for (int j = 0; j < m; ++j) {
      const double ref = cox_de_boor(knots, j, degree, x, M);
      CHECK(row[j] == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("minimum basis size") {
  CHECK_THROWS_AS(BSplineBasis(0.0, 10.0, 3, 3), std::invalid_argument);
  CHECK_NOTHROW(BSplineBasis(0.0, 10.0, 4, 3));
}

TEST_CASE("difference penalty quadratic forms") {
  const PenaltyMatrix p1 = difference_penalty(3, 1);
  VectorXd g(3);
  g << 1, 2, 4;
  CHECK(quad_form(p1, g) == doctest::Approx(5.0));  // (2-1)^2 + (4-2)^2
  g << 3, 3, 3;
  CHECK(quad_form(p1, g) == doctest::Approx(0.0));

  const PenaltyMatrix p2 = difference_penalty(4, 2);
  VectorXd lin(4);
  lin << 0, 1, 2, 3;
  CHECK(quad_form(p2, lin) == doctest::Approx(0.0));

  CHECK_THROWS_AS(difference_penalty(3, 3), std::invalid_argument);
  CHECK_THROWS_AS(difference_penalty(2, 2), std::invalid_argument);
}

TEST_CASE("theta penalty sums adjacent squared differences") {
  const PenaltyMatrix pen = theta_penalty(2);
  VectorXd theta(3);
  theta << 1, 1, 1;
  CHECK(quad_form(pen, theta) == doctest::Approx(0.0));
  theta << 0, 1, 3;
  CHECK(quad_form(pen, theta) == doctest::Approx(5.0));
  CHECK(pen.kind == PenaltyKind::ThetaDifference);
}

TEST_CASE("penalties are PSD with the expected null space") {
  Rng rng(23);
  for (const auto [q, d] : {std::pair{8, 1}, std::pair{8, 2}, std::pair{15, 1}}) {
    const PenaltyMatrix pen = difference_penalty(q, d);
    CHECK((pen.matrix - pen.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(pen.matrix);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    int null_dim = 0;
    for (Eigen::Index i = 0; i < q; ++i)
      if (es.eigenvalues()[i] < 1e-10) ++null_dim;
    CHECK(null_dim == d);
    // any coefficient vector has a nonnegative penalty
    for (int k = 0; k < 10; ++k) {
      VectorXd g(q);
      for (int i = 0; i < q; ++i) g[i] = rng.normal();
      CHECK(quad_form(pen, g) >= -1e-12);
    }
  }
}
