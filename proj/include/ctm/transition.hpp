#pragma once

#include "ctm/basis_penalty.hpp"
#include "ctm/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace ctm {

enum class Link { Logit, Cloglog };
enum class Smoother { ThetaQuadratic, PSplines };
enum class Variant { Basic, Varying, ZeroSplit };

// P(Y > r | Y >= r, x) = F(eta_ir)
inline double link_cdf(Link link, double eta) {
  switch (link) {
    case Link::Logit:
      return 1.0 / (1.0 + std::exp(-eta));
    case Link::Cloglog:
      return 1.0 - std::exp(-std::exp(eta));
  }
  return 0.0;
}

// log F and log(1 - F) without overflow
inline double link_log_cdf(Link link, double eta) {
  if (link == Link::Logit)
    return eta > 0.0 ? -std::log1p(std::exp(-eta)) : eta - std::log1p(std::exp(eta));
  const double F = link_cdf(link, eta);
  return std::log(F > 0.0 ? F : 5e-324);
}

inline double link_log_ccdf(Link link, double eta) {
  if (link == Link::Logit) return link_log_cdf(link, -eta);
  return -std::exp(eta);
}

inline double link_density(Link link, double eta) {
  switch (link) {
    case Link::Logit: {
      const double F = link_cdf(link, eta);
      return F * (1.0 - F);
    }
    case Link::Cloglog:
      return std::exp(eta - std::exp(eta));
  }
  return 0.0;
}

struct TransitionSpec {
  Link link = Link::Logit;
  Smoother smoother = Smoother::PSplines;
  Variant variant = Variant::Basic;
  double lambda = 1.0;
  int M = 0;           // 0: resolved to the integer closest to 1.2 * max(Y)
  int num_basis = 0;   // 0: resolved to min(20, M + 1)
  int degree = 3;
  int diff_order = 1;
  std::vector<bool> varying_flags;    // Varying: per-covariate; empty = all
  std::vector<double> lambda_terms;   // Varying: per-smooth override of lambda
  int max_iter = 200;
  double tol = 1e-8;       // relative penalized-loglik change
  double grad_tol = 1e-6;  // max-abs penalized score
  bool sandwich_se = false;
};

struct FitDiagnostics {
  bool converged = false;
  int iterations = 0;
  double loglik = 0.0;
  double penalized_loglik = 0.0;
  double grad_norm = 0.0;
  bool degenerate_zero_part = false;  // zero-split with no zero counts
};

struct FittedTransitionModel {
  TransitionSpec spec;  // with M and num_basis resolved
  VectorXd alpha;       // full parameter vector, block layout below
  MatrixXd covariance;  // inverse penalized information
  MatrixXd covariance_sandwich;  // only when spec.sandwich_se

  // Evaluated parameter views.
  VectorXd theta;        // theta_0..theta_M
  VectorXd beta;         // Basic / ZeroSplit shared coefficients
  VectorXd beta_zero;    // ZeroSplit first-transition coefficients
  MatrixXd beta_curves;  // Varying: (M+1) x p, column j = beta_j(r)

  std::vector<std::string> coef_names;  // one per alpha entry
  std::vector<bool> separated;          // one per alpha entry
  std::vector<std::string> covariate_names;
  std::vector<EncodedColumn> encoder;
  FitDiagnostics diag;
  double lambda_used = 0.0;

  // alpha block layout
  int q = 0;  // smooth coefficients per curve
  int p = 0;  // covariates

  int theta_offset() const { return spec.variant == Variant::ZeroSplit ? 1 + p : 0; }
  int beta_offset() const {
    return spec.variant == Variant::ZeroSplit ? 1 + p + q : q;
  }
};

// Log-likelihood of the binary transition records: for each (i, s) the
// Bernoulli term t*log F + (1-t)*log(1-F) at eta_is.
double loglik_binary(const VectorXd& params, const AugmentedDataset& augmented,
                     const TransitionSpec& spec);

// Same quantity through the product form of the count probabilities,
// sum_i log pi_{i,Y_i}; the independent route used to cross-check the
// binary representation.
double loglik_direct(const VectorXd& params, const CountDataset& data,
                     const TransitionSpec& spec);

// Penalized score and expected information (penalty included).
VectorXd gradient(const VectorXd& params, const AugmentedDataset& augmented,
                  const TransitionSpec& spec);
MatrixXd penalized_information(const VectorXd& params, const AugmentedDataset& augmented,
                               const TransitionSpec& spec);

// Penalized ML fit by Fisher scoring with step halving. Handles all three
// variants; fit_zero_split / fit_varying are conveniences that set the
// variant before dispatching.
FittedTransitionModel fit(const CountDataset& data, TransitionSpec spec);
FittedTransitionModel fit_zero_split(const CountDataset& data, TransitionSpec spec);
FittedTransitionModel fit_varying(const CountDataset& data, TransitionSpec spec);

// pmf over {0,...,M} for already-encoded covariate rows.
PredictedDistribution predict_pmf(const FittedTransitionModel& model, const MatrixXd& X);

// exp((x - xt)' beta) per category r (constant over r for the basic
// variant, a curve for the others).
VectorXd continuation_ratio_effect(const FittedTransitionModel& model,
                                   const VectorXd& x, const VectorXd& xt);

// Coefficient table (covariate effects; zero-split adds the theta_0 row and
// both parts). Separated rows carry se_suppressed.
std::vector<CoefficientRow> summarize(const FittedTransitionModel& model);

}  // namespace ctm
