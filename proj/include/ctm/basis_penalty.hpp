#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace ctm {

// Cubic-by-default B-spline basis on [lo, hi] with equally spaced interior
// knots and fully repeated boundary knots, so the basis is a partition of
// unity on the closed interval.
template <typename Scalar = double>
class BSplineBasisT {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BSplineBasisT(Scalar lo, Scalar hi, int num_basis, int degree)
      : lo_(lo), hi_(hi), m_(num_basis), degree_(degree) {
    if (degree < 0) throw std::invalid_argument("bspline: degree must be >= 0");
    if (m_ < degree + 1)
      throw std::invalid_argument("bspline: need at least degree+1 basis functions");
    if (!(hi > lo)) throw std::invalid_argument("bspline: empty interval");
    const int interior = m_ - degree_ - 1;
    knots_.resize(m_ + degree_ + 1);
    for (int j = 0; j <= degree_; ++j) knots_[j] = lo_;
    for (int j = 1; j <= interior; ++j)
      knots_[degree_ + j] = lo_ + (hi_ - lo_) * Scalar(j) / Scalar(interior + 1);
    for (int j = 0; j <= degree_; ++j) knots_[m_ + j] = hi_;
  }

  int size() const { return m_; }
  int degree() const { return degree_; }
  Scalar lo() const { return lo_; }
  Scalar hi() const { return hi_; }

  // One row of basis values, Cox-de Boor recursion. x must lie in [lo, hi].
  Vector eval(Scalar x) const {
    if (x < lo_ || x > hi_)
      throw std::out_of_range("bspline: evaluation point outside [lo, hi]");
    const int nk = static_cast<int>(knots_.size());
    std::vector<Scalar> work(nk - 1, Scalar(0));
    if (x >= hi_) {
      for (int j = nk - 2; j >= 0; --j)
        if (knots_[j] < knots_[j + 1]) { work[j] = Scalar(1); break; }
    } else {
      for (int j = 0; j < nk - 1; ++j)
        if (knots_[j] <= x && x < knots_[j + 1]) { work[j] = Scalar(1); break; }
    }
    for (int d = 1; d <= degree_; ++d) {
      for (int j = 0; j + d < nk - 1; ++j) {
        Scalar a = Scalar(0), b = Scalar(0);
        if (knots_[j + d] > knots_[j])
          a = (x - knots_[j]) / (knots_[j + d] - knots_[j]) * work[j];
        if (knots_[j + d + 1] > knots_[j + 1])
          b = (knots_[j + d + 1] - x) / (knots_[j + d + 1] - knots_[j + 1]) * work[j + 1];
        work[j] = a + b;
      }
    }
    Vector out(m_);
    for (int j = 0; j < m_; ++j) out[j] = work[j];
    return out;
  }

  template <typename Points>
  Matrix matrix(const Points& points) const {
    Matrix B(points.size(), m_);
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(points.size()); ++r)
      B.row(r) = eval(Scalar(points[r])).transpose();
    return B;
  }

 private:
  Scalar lo_, hi_;
  int m_, degree_;
  std::vector<Scalar> knots_;
};

using BSplineBasis = BSplineBasisT<double>;

enum class PenaltyKind { ThetaDifference, CoefDifference };

struct PenaltyMatrix {
  Eigen::MatrixXd matrix;  // symmetric PSD, D_d^T D_d
  int order = 1;
  PenaltyKind kind = PenaltyKind::CoefDifference;
};

// Basis evaluation matrix over integer categories; rows sum to one.
Eigen::MatrixXd bspline_matrix(int M, int m, int degree, const std::vector<int>& points);

// Penalty on adjacent coefficient differences of order d; quadratic form
// equals sum_{k=d+1}^q (Delta^d gamma_k)^2. Null space: polynomials of
// degree < d.
PenaltyMatrix difference_penalty(int q, int d);

// First-order difference penalty directly on theta_0..theta_M (adjacent
// observed pairs s = 1..M).
PenaltyMatrix theta_penalty(int M);

}  // namespace ctm
