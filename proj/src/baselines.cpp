#include "ctm/baselines.hpp"

#include "ctm/data_model.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctm {

namespace {

MatrixXd with_intercept(const MatrixXd& X) {
  MatrixXd X1(X.rows(), X.cols() + 1);
  X1.col(0).setOnes();
  if (X.cols()) X1.rightCols(X.cols()) = X;
  return X1;
}

std::vector<std::string> names_with_intercept(const std::vector<std::string>& names) {
  std::vector<std::string> out{"(Intercept)"};
  out.insert(out.end(), names.begin(), names.end());
  return out;
}

double poisson_loglik(const VectorXd& y, const VectorXd& mu) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    ll += y[i] * std::log(mu[i]) - mu[i] - std::lgamma(y[i] + 1.0);
  return ll;
}

double negbin_loglik(const VectorXd& y, const VectorXd& mu, double nu) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    ll += std::lgamma(y[i] + nu) - std::lgamma(nu) - std::lgamma(y[i] + 1.0) +
          y[i] * std::log(mu[i] / (mu[i] + nu)) + nu * std::log(nu / (mu[i] + nu));
  return ll;
}

// Fisher scoring for a log-link count mean; weights w = mu (Poisson) or
// mu*nu/(mu+nu) (NegBin given nu). Returns false when the iteration walks
// to a boundary (all-zero outcomes drive the intercept to -inf).
bool score_loglink(const VectorXd& y, const MatrixXd& X1, double nu, VectorXd& beta,
                   int max_iter = 200, double tol = 1e-12) {
  const bool neg = nu > 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const VectorXd mu = (X1 * beta).array().exp();
    const VectorXd w = neg ? VectorXd(mu.array() * nu / (mu.array() + nu)) : mu;
    const VectorXd u = neg ? VectorXd((y - mu).array() * nu / (mu.array() + nu)) : VectorXd(y - mu);
    const VectorXd score = X1.transpose() * u;
    MatrixXd info = X1.transpose() * w.asDiagonal() * X1;
    info.diagonal().array() += 1e-12;
    const VectorXd step = Eigen::LDLT<MatrixXd>(info).solve(score);
    beta += step;
    if (!beta.allFinite()) return false;
    if (beta.cwiseAbs().maxCoeff() > 50.0) return false;
    if (step.cwiseAbs().maxCoeff() < tol) return true;
  }
  return true;
}

// weighted logistic fit (weights in [0,1] responses allowed)
bool logistic_fit(const VectorXd& z, const MatrixXd& X1, VectorXd& beta,
                  int max_iter = 200, double tol = 1e-12) {
  for (int it = 0; it < max_iter; ++it) {
    const VectorXd eta = X1 * beta;
    VectorXd p(eta.size()), w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      p[i] = 1.0 / (1.0 + std::exp(-eta[i]));
      w[i] = p[i] * (1.0 - p[i]);
    }
    const VectorXd score = X1.transpose() * (z - p);
    MatrixXd info = X1.transpose() * w.asDiagonal() * X1;
    info.diagonal().array() += 1e-12;
    const VectorXd step = Eigen::LDLT<MatrixXd>(info).solve(score);
    beta += step;
    if (!beta.allFinite()) return false;
    if (beta.cwiseAbs().maxCoeff() > 50.0) return false;
    if (step.cwiseAbs().maxCoeff() < tol) return true;
  }
  return true;
}

MatrixXd inverse_information(const MatrixXd& X1, const VectorXd& w) {
  MatrixXd info = X1.transpose() * w.asDiagonal() * X1;
  info.diagonal().array() += 1e-12;
  return Eigen::LDLT<MatrixXd>(info).solve(MatrixXd::Identity(info.rows(), info.cols()));
}

void check_columns(const CountDataset& data) {
  for (Eigen::Index j = 0; j < data.p(); ++j)
    if (data.covariates.col(j).minCoeff() == data.covariates.col(j).maxCoeff())
      throw std::invalid_argument("zero-variance covariate: " + data.column_names[j]);
}

}  // namespace

BaselineFit fit_poisson(const CountDataset& data) {
  if (data.n() == 0) throw std::invalid_argument("fit_poisson: empty dataset");
  check_columns(data);
  const MatrixXd X1 = with_intercept(data.covariates);
  const VectorXd y = data.outcomes.cast<double>();
  BaselineFit fit;
  fit.kind = BaselineKind::Poisson;
  fit.covariate_names = data.column_names;
  fit.coef_names = names_with_intercept(data.column_names);
  fit.encoder = data.encoder;
  VectorXd beta = VectorXd::Zero(X1.cols());
  beta[0] = std::log(std::max(y.mean(), 1e-8));
  fit.converged = score_loglink(y, X1, 0.0, beta);
  fit.boundary = !fit.converged && beta.allFinite() && y.mean() < 1e-12;
  if (!beta.allFinite()) beta.setZero();
  fit.beta = beta;
  const VectorXd mu = (X1 * beta).array().exp();
  fit.covariance = inverse_information(X1, mu);
  fit.loglik = poisson_loglik(y, mu);
  if (y.maxCoeff() == 0.0) fit.boundary = true;
  return fit;
}

BaselineFit fit_negbin(const CountDataset& data) {
  if (data.n() == 0) throw std::invalid_argument("fit_negbin: empty dataset");
  check_columns(data);
  const MatrixXd X1 = with_intercept(data.covariates);
  const VectorXd y = data.outcomes.cast<double>();
  if (y.maxCoeff() == 0.0)
    throw std::invalid_argument("fit_negbin: all outcomes are zero");

  BaselineFit fit;
  fit.kind = BaselineKind::NegBin;
  fit.covariate_names = data.column_names;
  fit.coef_names = names_with_intercept(data.column_names);
  fit.encoder = data.encoder;

  VectorXd beta0 = VectorXd::Zero(X1.cols());
  beta0[0] = std::log(std::max(y.mean(), 1e-8));

  auto profile = [&](double lognu, VectorXd& beta) {
    const double nu = std::exp(lognu);
    score_loglink(y, X1, nu, beta);
    const VectorXd mu = (X1 * beta).array().exp();
    return negbin_loglik(y, mu, nu);
  };

  // golden-section search on the profile log-likelihood over log nu
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = -6.0, b = 10.0;
  double c = b - gr * (b - a);
  double dpt = a + gr * (b - a);
  VectorXd bc = beta0, bd = beta0;
  double fc = profile(c, bc), fd = profile(dpt, bd);
  for (int it = 0; it < 200 && (b - a) > 1e-11; ++it) {
    if (fc > fd) {
      b = dpt; dpt = c; fd = fc; bd = bc;
      c = b - gr * (b - a);
      bc = bd;
      fc = profile(c, bc);
    } else {
      a = c; c = dpt; fc = fd; bc = bd;
      dpt = a + gr * (b - a);
      bd = bc;
      fd = profile(dpt, bd);
    }
  }
  const double lognu = 0.5 * (a + b);
  VectorXd beta = fc > fd ? bc : bd;
  const double nu = std::exp(lognu);
  fit.nu = nu;
  fit.poisson_limit = lognu > 9.0;
  fit.converged = true;
  const double ll = profile(lognu, beta);
  fit.beta = beta;
  fit.loglik = ll;
  const VectorXd mu = (X1 * beta).array().exp();
  const VectorXd w = mu.array() * nu / (mu.array() + nu);
  fit.covariance = inverse_information(X1, w);
  return fit;
}

BaselineFit fit_zip(const CountDataset& data) {
  if (data.n() == 0) throw std::invalid_argument("fit_zip: empty dataset");
  check_columns(data);
  const MatrixXd X1 = with_intercept(data.covariates);
  const VectorXd y = data.outcomes.cast<double>();
  const Eigen::Index n = y.size();

  BaselineFit fit;
  fit.kind = BaselineKind::Zip;
  fit.covariate_names = data.column_names;
  fit.coef_names = names_with_intercept(data.column_names);
  fit.encoder = data.encoder;

  double zero_share = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) zero_share += y[i] == 0.0 ? 1.0 : 0.0;
  zero_share /= static_cast<double>(n);
  fit.degenerate_zero_part = zero_share == 0.0;

  // start the count part from the positive outcomes
  VectorXd beta = VectorXd::Zero(X1.cols());
  {
    double pos_mean = 0.0;
    int pos_n = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (y[i] > 0) { pos_mean += y[i]; ++pos_n; }
    beta[0] = std::log(std::max(pos_n ? pos_mean / pos_n : y.mean(), 1e-8));
  }
  VectorXd gamma = VectorXd::Zero(X1.cols());
  gamma[0] = std::log(std::max(zero_share, 1e-6) / std::max(1.0 - zero_share, 1e-6));

  auto loglik = [&](const VectorXd& b, const VectorXd& g) {
    const VectorXd mu = (X1 * b).array().exp();
    const VectorXd pe = X1 * g;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pi = 1.0 / (1.0 + std::exp(-pe[i]));
      if (y[i] == 0.0)
        ll += std::log(pi + (1.0 - pi) * std::exp(-mu[i]) + 1e-300);
      else
        ll += std::log1p(-std::min(pi, 1.0 - 1e-300)) + y[i] * std::log(mu[i]) - mu[i] -
              std::lgamma(y[i] + 1.0);
    }
    return ll;
  };

  double ll = loglik(beta, gamma);
  bool converged = false;
  int it = 0;
  for (; it < 500; ++it) {
    const VectorXd mu = (X1 * beta).array().exp();
    const VectorXd pe = X1 * gamma;
    // E step: posterior mass of the structural-zero class
    VectorXd z = VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (y[i] > 0.0) continue;
      const double pi = 1.0 / (1.0 + std::exp(-pe[i]));
      z[i] = pi / (pi + (1.0 - pi) * std::exp(-mu[i]) + 1e-300);
    }
    // M step: logistic part on z
    logistic_fit(z, X1, gamma);
    // M step: Poisson part weighted by 1 - z
    for (int inner = 0; inner < 100; ++inner) {
      const VectorXd m2 = (X1 * beta).array().exp();
      const VectorXd wi = (VectorXd::Ones(n) - z);
      const VectorXd score = X1.transpose() * (wi.array() * (y - m2).array()).matrix();
      MatrixXd info = X1.transpose() * (wi.array() * m2.array()).matrix().asDiagonal() * X1;
      info.diagonal().array() += 1e-12;
      const VectorXd step = Eigen::LDLT<MatrixXd>(info).solve(score);
      beta += step;
      if (step.cwiseAbs().maxCoeff() < 1e-12) break;
    }
    const double new_ll = loglik(beta, gamma);
    if (std::abs(new_ll - ll) < 1e-8 * (std::abs(ll) + 1.0)) {
      ll = new_ll;
      converged = true;
      break;
    }
    ll = new_ll;
  }
  fit.converged = converged;
  fit.iterations = it + 1;
  fit.loglik = ll;
  fit.beta = beta;
  fit.gamma = gamma;
  if (gamma.cwiseAbs().maxCoeff() > 20.0) fit.boundary = true;

  // covariance blocks from the complete-data information at the posterior
  // weights (EM standard errors are reported blockwise)
  const VectorXd mu = (X1 * beta).array().exp();
  const VectorXd pe = X1 * gamma;
  VectorXd z = VectorXd::Zero(n), wp = VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pi = 1.0 / (1.0 + std::exp(-pe[i]));
    if (y[i] == 0.0) z[i] = pi / (pi + (1.0 - pi) * std::exp(-mu[i]) + 1e-300);
    wp[i] = pi * (1.0 - pi);
  }
  fit.covariance = inverse_information(X1, ((VectorXd::Ones(n) - z).array() * mu.array()).matrix());
  fit.covariance_gamma = inverse_information(X1, wp);
  return fit;
}

BaselineFit fit_hurdle(const CountDataset& data) {
  if (data.n() == 0) throw std::invalid_argument("fit_hurdle: empty dataset");
  check_columns(data);
  const MatrixXd X1 = with_intercept(data.covariates);
  const VectorXd y = data.outcomes.cast<double>();
  const Eigen::Index n = y.size();

  BaselineFit fit;
  fit.kind = BaselineKind::Hurdle;
  fit.covariate_names = data.column_names;
  fit.coef_names = names_with_intercept(data.column_names);
  fit.encoder = data.encoder;

  VectorXd pos = VectorXd::Zero(n);
  Eigen::Index n_pos = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (y[i] > 0.0) { pos[i] = 1.0; ++n_pos; }
  fit.degenerate_zero_part = n_pos == 0 || n_pos == n;

  // binary part: logit for y > 0
  VectorXd beta = VectorXd::Zero(X1.cols());
  const bool bin_ok = logistic_fit(pos, X1, beta);
  fit.beta = beta;

  // truncated-at-zero Poisson on the positive counts
  MatrixXd Xp(n_pos, X1.cols());
  VectorXd yp(n_pos);
  for (Eigen::Index i = 0, k = 0; i < n; ++i)
    if (y[i] > 0.0) {
      Xp.row(k) = X1.row(i);
      yp[k] = y[i];
      ++k;
    }
  VectorXd gamma = VectorXd::Zero(X1.cols());
  bool trunc_ok = n_pos > 0;
  if (n_pos > 0) {
    gamma[0] = std::log(std::max(yp.mean(), 1.01));
    for (int it = 0; it < 200; ++it) {
      const VectorXd mu = (Xp * gamma).array().exp();
      VectorXd adj(n_pos), w(n_pos);
      for (Eigen::Index i = 0; i < n_pos; ++i) {
        const double e = -std::expm1(-mu[i]);  // 1 - exp(-mu)
        adj[i] = mu[i] / e;                    // E[Y | Y > 0]
        w[i] = adj[i] * (1.0 + mu[i] - adj[i]);
      }
      const VectorXd score = Xp.transpose() * (yp - adj);
      MatrixXd info = Xp.transpose() * w.asDiagonal() * Xp;
      info.diagonal().array() += 1e-12;
      const VectorXd step = Eigen::LDLT<MatrixXd>(info).solve(score);
      gamma += step;
      if (!gamma.allFinite()) { trunc_ok = false; gamma.setZero(); break; }
      if (step.cwiseAbs().maxCoeff() < 1e-12) break;
    }
  }
  fit.gamma = gamma;
  fit.converged = bin_ok && trunc_ok;

  // part independence: the joint log-likelihood is the sum of both parts
  double ll = 0.0;
  const VectorXd eta_bin = X1 * beta;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p1 = 1.0 / (1.0 + std::exp(-eta_bin[i]));
    ll += y[i] > 0.0 ? std::log(std::max(p1, 1e-300)) : std::log(std::max(1.0 - p1, 1e-300));
  }
  if (n_pos > 0) {
    const VectorXd mu = (Xp * gamma).array().exp();
    for (Eigen::Index i = 0; i < n_pos; ++i)
      ll += yp[i] * std::log(mu[i]) - mu[i] - std::lgamma(yp[i] + 1.0) -
            std::log(-std::expm1(-mu[i]));
  }
  fit.loglik = ll;

  {
    VectorXd wb(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p1 = 1.0 / (1.0 + std::exp(-eta_bin[i]));
      wb[i] = p1 * (1.0 - p1);
    }
    fit.covariance = inverse_information(X1, wb);
  }
  if (n_pos > 0) {
    const VectorXd mu = (Xp * gamma).array().exp();
    VectorXd w(n_pos);
    for (Eigen::Index i = 0; i < n_pos; ++i) {
      const double e = -std::expm1(-mu[i]);
      const double adj = mu[i] / e;
      w[i] = adj * (1.0 + mu[i] - adj);
    }
    fit.covariance_gamma = inverse_information(Xp, w);
  }
  return fit;
}

PredictedDistribution predict_pmf_baseline(const BaselineFit& fit, const MatrixXd& X, int M) {
  const MatrixXd X1 = with_intercept(X);
  const Eigen::Index n = X.rows();
  PredictedDistribution out;
  out.M = M;
  out.pmf = MatrixXd::Zero(n, M + 1);
  out.cdf.resize(n, M + 1);
  out.mean.resize(n);

  auto log_poisson_row = [&](double mu, VectorXd& lp) {
    lp[0] = -mu;
    for (int r = 1; r <= M; ++r) lp[r] = lp[r - 1] + std::log(mu) - std::log(r);
  };

  for (Eigen::Index i = 0; i < n; ++i) {
    VectorXd lp(M + 1);
    switch (fit.kind) {
      case BaselineKind::Poisson: {
        const double mu = std::exp(X1.row(i).dot(fit.beta));
        log_poisson_row(mu, lp);
        for (int r = 0; r <= M; ++r) out.pmf(i, r) = std::exp(lp[r]);
        break;
      }
      case BaselineKind::NegBin: {
        const double mu = std::exp(X1.row(i).dot(fit.beta));
        const double nu = fit.nu;
        const double lr = std::log(mu / (mu + nu));
        double cur = nu * std::log(nu / (mu + nu));
        out.pmf(i, 0) = std::exp(cur);
        for (int r = 1; r <= M; ++r) {
          cur += std::log((r - 1 + nu) / r) + lr;
          out.pmf(i, r) = std::exp(cur);
        }
        break;
      }
      case BaselineKind::Zip: {
        const double mu = std::exp(X1.row(i).dot(fit.beta));
        const double pi = 1.0 / (1.0 + std::exp(-X1.row(i).dot(fit.gamma)));
        log_poisson_row(mu, lp);
        for (int r = 0; r <= M; ++r) out.pmf(i, r) = (1.0 - pi) * std::exp(lp[r]);
        out.pmf(i, 0) += pi;
        break;
      }
      case BaselineKind::Hurdle: {
        const double p1 = 1.0 / (1.0 + std::exp(-X1.row(i).dot(fit.beta)));
        const double mu = std::exp(X1.row(i).dot(fit.gamma));
        log_poisson_row(mu, lp);
        const double truncnorm = -std::expm1(-mu);
        out.pmf(i, 0) = 1.0 - p1;
        for (int r = 1; r <= M; ++r) out.pmf(i, r) = p1 * std::exp(lp[r]) / truncnorm;
        break;
      }
    }
    double head = 0.0;
    for (int r = 0; r < M; ++r) head += out.pmf(i, r);
    out.pmf(i, M) = std::clamp(1.0 - head, 0.0, 1.0);  // tail mass at M
    double c = 0.0, mean = 0.0;
    for (int r = 0; r <= M; ++r) {
      c += out.pmf(i, r);
      out.cdf(i, r) = std::min(c, 1.0);
      mean += r * out.pmf(i, r);
    }
    out.cdf(i, M) = 1.0;
    out.mean[i] = mean;
  }
  return out;
}

std::vector<CoefficientRow> summarize(const BaselineFit& fit) {
  std::vector<CoefficientRow> rows;
  auto push = [&rows](const std::string& name, double coef, double var) {
    CoefficientRow r;
    r.name = name;
    r.coef = coef;
    r.se = std::sqrt(std::max(var, 0.0));
    r.z = r.se > 0.0 ? coef / r.se : 0.0;
    if (std::abs(coef) > 10.0 && r.se > 10.0) {
      r.se_suppressed = true;
      r.se = 0.0;
      r.z = 0.0;
    }
    rows.push_back(r);
  };
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j)
    push(fit.coef_names[static_cast<std::size_t>(j)], fit.beta[j], fit.covariance(j, j));
  if (fit.kind == BaselineKind::Zip || fit.kind == BaselineKind::Hurdle) {
    const std::string tag = fit.kind == BaselineKind::Zip ? " (zero)" : " (count)";
    for (Eigen::Index j = 0; j < fit.gamma.size(); ++j)
      push(fit.coef_names[static_cast<std::size_t>(j)] + tag, fit.gamma[j],
           fit.covariance_gamma.size() ? fit.covariance_gamma(j, j) : 0.0);
  }
  if (fit.kind == BaselineKind::NegBin) {
    CoefficientRow r;
    r.name = "nu";
    r.coef = fit.nu;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ctm
