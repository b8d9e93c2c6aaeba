#pragma once

#include "ctm/types.hpp"

#include <string>
#include <vector>

namespace ctm {

enum class BaselineKind { Poisson, NegBin, Zip, Hurdle };

// Reference count models. beta is always the count part (log link, with
// intercept first); gamma is the second linear part where one exists:
// the zero-inflation logit for Zip, the truncated count part for Hurdle
// (whose binary part then sits in beta).
struct BaselineFit {
  BaselineKind kind = BaselineKind::Poisson;
  VectorXd beta;
  VectorXd gamma;
  double nu = 0.0;  // NegBin dispersion
  MatrixXd covariance;        // beta block
  MatrixXd covariance_gamma;  // gamma block
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  bool boundary = false;       // diverging intercept (all-zero outcomes etc.)
  bool poisson_limit = false;  // NegBin: nu at the upper search bound
  bool degenerate_zero_part = false;
  std::vector<std::string> coef_names;  // beta entries
  std::vector<std::string> covariate_names;
  std::vector<EncodedColumn> encoder;
};

BaselineFit fit_poisson(const CountDataset& data);
BaselineFit fit_negbin(const CountDataset& data);
BaselineFit fit_zip(const CountDataset& data);
BaselineFit fit_hurdle(const CountDataset& data);

// Each model's pmf evaluated on {0,...,M}, remaining tail mass at M.
PredictedDistribution predict_pmf_baseline(const BaselineFit& fit, const MatrixXd& X, int M);

std::vector<CoefficientRow> summarize(const BaselineFit& fit);

}  // namespace ctm
