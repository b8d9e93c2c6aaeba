#include "ctm/basis_penalty.hpp"

namespace ctm {

Eigen::MatrixXd bspline_matrix(int M, int m, int degree, const std::vector<int>& points) {
  const BSplineBasis basis(0.0, static_cast<double>(M), m, degree);
  return basis.matrix(points);
}

PenaltyMatrix difference_penalty(int q, int d) {
  if (d < 1) throw std::invalid_argument("difference_penalty: order must be >= 1");
  if (q <= d) throw std::invalid_argument("difference_penalty: need q > d");
  Eigen::MatrixXd D = Eigen::MatrixXd::Identity(q, q);
  for (int k = 0; k < d; ++k) {
    Eigen::MatrixXd Dk(D.rows() - 1, D.cols());
    for (Eigen::Index r = 0; r + 1 < D.rows(); ++r) Dk.row(r) = D.row(r + 1) - D.row(r);
    D = std::move(Dk);
  }
  PenaltyMatrix pen;
  pen.matrix = D.transpose() * D;
  pen.order = d;
  pen.kind = PenaltyKind::CoefDifference;
  return pen;
}

PenaltyMatrix theta_penalty(int M) {
  if (M < 1) throw std::invalid_argument("theta_penalty: need M >= 1");
  PenaltyMatrix pen = difference_penalty(M + 1, 1);
  pen.kind = PenaltyKind::ThetaDifference;
  return pen;
}

}  // namespace ctm
