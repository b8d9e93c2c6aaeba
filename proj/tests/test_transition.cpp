#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctm/data_model.hpp"
#include "ctm/rng.hpp"
#include "ctm/transition.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace ctm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

CountDataset make_data(const std::vector<int>& y, const MatrixXd& X = MatrixXd(),
                       const std::vector<std::string>& names = {}) {
  CountDataset d;
  d.outcomes.resize(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) d.outcomes[static_cast<Eigen::Index>(i)] = y[i];
  if (X.size()) {
    d.covariates = X;
    d.column_names = names;
  } else {
    d.covariates.resize(static_cast<Eigen::Index>(y.size()), 0);
  }
  return d;
}

// mirrors the documented layout rules to size parameter vectors in tests
int param_dim(const TransitionSpec& spec, int max_y, int p) {
  const int M = spec.M ? spec.M : std::max<int>(1, static_cast<int>(std::lround(1.2 * max_y)));
  const int m = spec.num_basis ? spec.num_basis : std::min(20, M + 1);
  const int q = spec.smoother == Smoother::PSplines
                    ? m
                    : (spec.variant == Variant::ZeroSplit ? M : M + 1);
  switch (spec.variant) {
    case Variant::Basic: return q + p;
    case Variant::ZeroSplit: return 1 + p + q + p;
    case Variant::Varying: return q * (1 + p);
  }
  return 0;
}

const CountDataset& quine() {
  static CountDataset data = load_csv(std::string(CTM_DATA_DIR) + "/quine.csv");
  return data;
}

}  // namespace

TEST_CASE("binary log-likelihood, hand values") {
  // one observation with Y = 0, theta_0 = 0, logit: log(1 - F(0)) = -log 2
  const CountDataset d0 = make_data({0});
  const AugmentedDataset a0 = augment(d0);
  TransitionSpec spec;
  spec.smoother = Smoother::ThetaQuadratic;
  VectorXd params = VectorXd::Zero(param_dim(spec, 0, 0));
  CHECK(loglik_binary(params, a0, spec) == doctest::Approx(-0.6931472).epsilon(1e-6));

  // Y = 1, theta = (0, 0): log(0.5 * 0.5)
  const CountDataset d1 = make_data({1});
  params = VectorXd::Zero(param_dim(spec, 1, 0));
  CHECK(loglik_direct(params, d1, spec) == doctest::Approx(-1.3862944).epsilon(1e-6));
  // Y = 0 reduces to the empty product
  CHECK(loglik_direct(VectorXd::Zero(param_dim(spec, 0, 0)), d0, spec) ==
        doctest::Approx(-0.6931472).epsilon(1e-6));
}

TEST_CASE("binary and product-form likelihood routes agree") {
  Rng rng(2024);
  int checked = 0;
  while (checked < 50) {
    const int n = 2 + static_cast<int>(rng.below(6));
    const int p = static_cast<int>(rng.below(3));
    MatrixXd X(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) y[i] = static_cast<int>(rng.below(6));
    std::vector<std::string> names;
    for (int j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
    const CountDataset data = make_data(y, X, names);
    const AugmentedDataset aug = augment(data);
    const int max_y = *std::max_element(y.begin(), y.end());

    for (int variant = 0; variant < 3; ++variant) {
      TransitionSpec spec;
      spec.variant = variant == 0 ? Variant::Basic
                     : variant == 1 ? Variant::ZeroSplit
                                    : Variant::Varying;
      spec.smoother = rng.below(2) ? Smoother::PSplines : Smoother::ThetaQuadratic;
      spec.num_basis = spec.smoother == Smoother::PSplines ? 6 : 0;
      spec.degree = 2;
      if (spec.variant == Variant::Varying) spec.varying_flags.assign(p, true);
      VectorXd params(param_dim(spec, max_y, p));
      for (Eigen::Index k = 0; k < params.size(); ++k) params[k] = 0.7 * rng.normal();
      const double lb = loglik_binary(params, aug, spec);
      const double ld = loglik_direct(params, data, spec);
      CHECK(lb == doctest::Approx(ld).epsilon(1e-10));
      ++checked;
    }
  }
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(7);
  const int n = 12, p = 2;
  MatrixXd X(n, p);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = static_cast<int>(rng.below(5));
    for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
  }
  const CountDataset data = make_data(y, X, {"a", "b"});
  const AugmentedDataset aug = augment(data);

  TransitionSpec spec;
  spec.num_basis = 6;
  spec.lambda = 0.0;  // the unpenalized score is checked against the loglik
  VectorXd params(param_dim(spec, *std::max_element(y.begin(), y.end()), p));
  for (Eigen::Index k = 0; k < params.size(); ++k) params[k] = 0.4 * rng.normal();

  const VectorXd g = gradient(params, aug, spec);
  const double h = 1e-5;
  for (Eigen::Index j = 0; j < params.size(); ++j) {
    VectorXd up = params, dn = params;
    up[j] += h;
    dn[j] -= h;
    const double fd = (loglik_binary(up, aug, spec) - loglik_binary(dn, aug, spec)) / (2 * h);
    CHECK(std::abs(g[j] - fd) / std::max(std::abs(fd), 1e-3) < 1e-6);
  }

  // the penalty contribution is linear in lambda
  TransitionSpec s1 = spec, s2 = spec;
  s1.lambda = 3.5;
  s2.lambda = 7.0;
  const VectorXd g0 = gradient(params, aug, spec);
  const VectorXd g1 = gradient(params, aug, s1);
  const VectorXd g2 = gradient(params, aug, s2);
  CHECK((g2 - 2.0 * g1 + g0).cwiseAbs().maxCoeff() < 1e-9);

  const MatrixXd info = penalized_information(params, aug, s1);
  CHECK((info - info.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(info);
  CHECK(es.eigenvalues().minCoeff() >= -1e-8);

  VectorXd bad = params;
  bad[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(loglik_binary(bad, aug, spec), doctest::Contains("record"),
                       std::runtime_error);
}

TEST_CASE("unpenalized null model reproduces the empirical hazards") {
  const std::vector<int> y{2, 0, 1, 3, 1, 0, 2};
  const CountDataset data = make_data(y);
  TransitionSpec spec;
  spec.smoother = Smoother::ThetaQuadratic;
  spec.lambda = 0.0;
  spec.grad_tol = 1e-12;
  spec.tol = 1e-15;
  spec.max_iter = 2000;
  const FittedTransitionModel m = fit(data, spec);
  // hazards #{Y>r}/#{Y>=r}: 5/7, 3/5, 1/3 at r = 0,1,2 (r = 3 is the boundary)
  const double expected[] = {5.0 / 7.0, 3.0 / 5.0, 1.0 / 3.0};
  for (int r = 0; r < 3; ++r) {
    const double delta = link_cdf(Link::Logit, m.theta[r]);
    CHECK(delta == doctest::Approx(expected[r]).epsilon(1e-8));
  }
  // at the boundary the transition probability vanishes
  CHECK(link_cdf(Link::Logit, m.theta[3]) < 1e-6);
}

TEST_CASE("perfectly fitted transitions drive the log-likelihood to zero") {
  const CountDataset data = make_data({0, 0, 0});
  TransitionSpec spec;
  spec.smoother = Smoother::ThetaQuadratic;
  spec.lambda = 0.0;
  const FittedTransitionModel m = fit(data, spec);
  CHECK(m.diag.loglik <= 0.0);
  CHECK(m.diag.loglik > -1e-6);
}

TEST_CASE("predicted pmf is an exact distribution") {
  TransitionSpec spec;
  spec.lambda = 16.0;
  const FittedTransitionModel m = fit(quine(), spec);
  const PredictedDistribution pred = predict_pmf(m, quine().covariates.topRows(40));
  for (Eigen::Index i = 0; i < pred.pmf.rows(); ++i) {
    CHECK(std::abs(pred.pmf.row(i).sum() - 1.0) < 1e-12);
    CHECK(pred.pmf.row(i).minCoeff() >= 0.0);
    for (int r = 1; r <= pred.M; ++r) CHECK(pred.cdf(i, r) >= pred.cdf(i, r - 1));
    CHECK(pred.cdf(i, pred.M) == 1.0);
  }
}

TEST_CASE("constant zero intercepts give the geometric distribution") {
  FittedTransitionModel m;
  m.spec.variant = Variant::Basic;
  m.spec.link = Link::Logit;
  m.spec.M = 20;
  m.theta = VectorXd::Zero(21);
  m.beta.resize(0);
  m.p = 0;
  const PredictedDistribution pred = predict_pmf(m, MatrixXd(1, 0));
  for (int r = 0; r < 6; ++r)
    CHECK(pred.pmf(0, r) == doctest::Approx(std::pow(0.5, r + 1)).epsilon(1e-12));
  CHECK(pred.pmf(0, 20) == doctest::Approx(std::pow(0.5, 20)).epsilon(1e-12));
}

TEST_CASE("continuation-ratio ratios are constant over categories") {
  TransitionSpec spec;
  spec.lambda = 16.0;
  const FittedTransitionModel m = fit(quine(), spec);
  const VectorXd x = quine().covariates.row(0);
  const VectorXd xt = quine().covariates.row(17);
  const VectorXd effect = continuation_ratio_effect(m, x, xt);
  for (int r = 1; r <= m.spec.M; ++r)
    CHECK(std::abs(effect[r] / effect[0] - 1.0) < 1e-12);

  // the model-implied odds ratio per category equals the same constant:
  // under the logit link P(Y>r)/P(Y=r) = exp(theta_r + x'beta)
  const double expect = std::exp((x - xt).dot(m.beta));
  CHECK(effect[0] == doctest::Approx(expect).epsilon(1e-12));
  for (int r = 0; r <= 10; ++r) {
    const double cr_x = std::exp(m.theta[r] + x.dot(m.beta));
    const double cr_xt = std::exp(m.theta[r] + xt.dot(m.beta));
    CHECK(std::abs(cr_x / cr_xt / expect - 1.0) < 1e-12);
  }
  CHECK(continuation_ratio_effect(m, x, x)[0] == doctest::Approx(1.0));
}

TEST_CASE("huge lambda drives the intercepts to a common value") {
  Rng rng(31);
  std::vector<int> y(60);
  for (auto& v : y) v = rng.poisson(3.0);
  const CountDataset data = make_data(y);
  for (const auto smoother : {Smoother::ThetaQuadratic, Smoother::PSplines}) {
    TransitionSpec spec;
    spec.smoother = smoother;
    spec.lambda = 1e8;
    const FittedTransitionModel m = fit(data, spec);
    CHECK(m.theta.maxCoeff() - m.theta.minCoeff() < 1e-4);
  }
}

TEST_CASE("varying model collapses to the basic fit under heavy smoothing") {
  TransitionSpec heavy;
  heavy.lambda = 1e8;
  const FittedTransitionModel basic = fit(quine(), heavy);
  TransitionSpec vspec = heavy;
  const FittedTransitionModel varying = fit_varying(quine(), vspec);
  for (int j = 0; j < varying.p; ++j) {
    CHECK(std::abs(varying.beta_curves(0, j) - basic.beta[j]) < 1e-3);
    CHECK(std::abs(varying.beta_curves(23, j) - basic.beta[j]) < 1e-3);
  }
}

TEST_CASE("varying with no flagged covariates reduces to the basic fit") {
  TransitionSpec spec;
  spec.lambda = 8.0;
  const FittedTransitionModel basic = fit(quine(), spec);
  TransitionSpec vspec = spec;
  vspec.varying_flags.assign(static_cast<std::size_t>(quine().p()), false);
  const FittedTransitionModel reduced = fit_varying(quine(), vspec);
  for (int j = 0; j < basic.p; ++j)
    CHECK(reduced.beta_curves(0, j) == doctest::Approx(basic.beta[j]).epsilon(1e-9));
  CHECK(reduced.diag.loglik == doctest::Approx(basic.diag.loglik).epsilon(1e-10));
}

TEST_CASE("zero-split without zero counts is flagged degenerate") {
  const CountDataset data = make_data({1, 2, 3, 1, 2, 4, 1, 2});
  TransitionSpec spec;
  spec.lambda = 1.0;
  const FittedTransitionModel m = fit_zero_split(data, spec);
  CHECK(m.diag.degenerate_zero_part);
  CHECK(m.separated[0]);  // theta_0 diverges
  const auto rows = summarize(m);
  CHECK(rows[0].name == "theta_0");
  CHECK(rows[0].se_suppressed);
}

TEST_CASE("quasi-complete separation in the zero part is flagged") {
  // x = 1 forces a positive count, x = 0 mixes zeros and positives
  const int n = 90;
  MatrixXd X(n, 1);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    if (i % 2 == 0) {
      X(i, 0) = 1.0;
      y[i] = 1 + (i / 2) % 4;
    } else {
      X(i, 0) = 0.0;
      y[i] = (i % 3 == 0) ? (i / 2) % 3 + 1 : 0;
    }
  }
  const CountDataset data = make_data(y, X, {"x"});
  TransitionSpec spec;
  spec.lambda = 4.0;
  spec.max_iter = 400;
  const FittedTransitionModel m = fit_zero_split(data, spec);
  const auto rows = summarize(m);
  bool found = false;
  for (const auto& r : rows)
    if (r.name == "x (zero)") {
      found = true;
      CHECK(r.se_suppressed);
      CHECK(r.coef > 10.0);
    }
  CHECK(found);
}

TEST_CASE("design-matrix validation rejects constant columns") {
  MatrixXd X(5, 1);
  X.setOnes();
  const CountDataset data = make_data({0, 1, 2, 1, 0}, X, {"flat"});
  TransitionSpec spec;
  CHECK_THROWS_WITH_AS(fit(data, spec), doctest::Contains("flat"), std::invalid_argument);
}

TEST_CASE("M below the largest count is rejected") {
  TransitionSpec spec;
  spec.M = 40;
  CHECK_THROWS_AS(fit(quine(), spec), std::invalid_argument);
}

TEST_CASE("cloglog link fits and predicts a proper distribution") {
  Rng rng(3);
  std::vector<int> y(70);
  for (auto& v : y) v = rng.poisson(2.0);
  MatrixXd X(70, 1);
  for (int i = 0; i < 70; ++i) X(i, 0) = rng.normal();
  const CountDataset data = make_data(y, X, {"x"});
  TransitionSpec spec;
  spec.link = Link::Cloglog;
  spec.lambda = 2.0;
  const FittedTransitionModel m = fit(data, spec);
  CHECK(m.diag.converged);
  const PredictedDistribution pred = predict_pmf(m, X.topRows(5));
  for (int i = 0; i < 5; ++i) CHECK(std::abs(pred.pmf.row(i).sum() - 1.0) < 1e-10);
}

TEST_CASE("sandwich covariance is available behind the flag") {
  TransitionSpec spec;
  spec.lambda = 16.0;
  spec.sandwich_se = true;
  const FittedTransitionModel m = fit(quine(), spec);
  REQUIRE(m.covariance_sandwich.rows() == m.alpha.size());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m.covariance_sandwich);
  CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  for (int j = 0; j < m.p; ++j)
    CHECK(m.covariance_sandwich(m.q + j, m.q + j) > 0.0);
}

TEST_CASE("null covariate z-values hold the nominal level") {
  Rng rng(1234);
  int rejections = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 100;
    MatrixXd X(n, 1);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = rng.normal();
      y[i] = rng.poisson(4.0);  // independent of x
    }
    const CountDataset data = make_data(y, X, {"x"});
    TransitionSpec spec;
    spec.lambda = 4.0;
    const FittedTransitionModel m = fit(data, spec);
    const auto rows = summarize(m);
    if (std::abs(rows[0].z) > 1.96) ++rejections;
  }
  CHECK(rejections >= 0);
  CHECK(rejections <= 13);  // ~5% nominal level
}
