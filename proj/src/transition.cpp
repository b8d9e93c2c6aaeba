#include "ctm/transition.hpp"

#include "ctm/data_model.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctm {

namespace {

constexpr double kRidge = 1e-10;  // solver stabiliser for saturated directions

int resolve_M(const TransitionSpec& spec, int max_y) {
  int M = spec.M;
  if (M == 0) M = static_cast<int>(std::lround(1.2 * max_y));
  if (M < max_y)
    throw std::invalid_argument("transition: M must not be smaller than the largest count");
  return std::max(M, 1);
}

TransitionSpec resolve_spec(TransitionSpec spec, int max_y, int p) {
  spec.M = resolve_M(spec, max_y);
  if (spec.num_basis == 0) spec.num_basis = std::min(20, spec.M + 1);
  if (spec.variant == Variant::Varying && spec.varying_flags.empty())
    spec.varying_flags.assign(static_cast<std::size_t>(p), true);
  if (spec.variant == Variant::Varying &&
      spec.varying_flags.size() != static_cast<std::size_t>(p))
    throw std::invalid_argument("transition: varying_flags size must match covariates");
  return spec;
}

// Smooth-coefficient dimension of one curve.
int smooth_dim(const TransitionSpec& spec) {
  if (spec.smoother == Smoother::PSplines) return spec.num_basis;
  return spec.variant == Variant::ZeroSplit ? spec.M : spec.M + 1;
}

// Basis rows that map smooth coefficients to theta_r (theta_1..theta_M for
// the zero-split variant, theta_0..theta_M otherwise).
MatrixXd theta_basis(const TransitionSpec& spec) {
  const int q = smooth_dim(spec);
  if (spec.smoother == Smoother::PSplines) {
    const double lo = spec.variant == Variant::ZeroSplit ? 1.0 : 0.0;
    const BSplineBasis basis(lo, static_cast<double>(spec.M), q, spec.degree);
    const int first = spec.variant == Variant::ZeroSplit ? 1 : 0;
    MatrixXd B(spec.M + 1 - first, q);
    for (int r = first; r <= spec.M; ++r)
      B.row(r - first) = basis.eval(static_cast<double>(r)).transpose();
    return B;
  }
  return MatrixXd::Identity(q, q);
}

struct Design {
  MatrixXd Z;        // records x dim
  MatrixXd penalty;  // scaled: sum over smooth terms of lambda_t * P_t
  MatrixXd Btheta;   // rows of the theta curve basis
  int q = 0;
  int p = 0;
  int dim = 0;
  std::vector<int> smooth_offsets;
};

Design build_design(const AugmentedDataset& aug, const TransitionSpec& spec) {
  if (aug.source == nullptr) throw std::invalid_argument("augmented data has no source");
  const CountDataset& data = *aug.source;
  Design d;
  d.p = aug.include_covariates ? static_cast<int>(data.p()) : 0;
  d.q = smooth_dim(spec);
  d.Btheta = theta_basis(spec);

  const Eigen::Index nrec = aug.total_rows();
  const MatrixXd& X = data.covariates;

  PenaltyMatrix base_pen;
  if (spec.smoother == Smoother::PSplines) {
    base_pen = difference_penalty(d.q, spec.diff_order);
  } else if (spec.variant == Variant::ZeroSplit) {
    if (d.q >= 2) {
      base_pen = difference_penalty(d.q, 1);  // adjacent pairs of theta_1..theta_M
    } else {
      base_pen.matrix = MatrixXd::Zero(d.q, d.q);  // single theta, nothing to tie
    }
    base_pen.kind = PenaltyKind::ThetaDifference;
  } else {
    base_pen = theta_penalty(spec.M);
  }

  switch (spec.variant) {
    case Variant::Basic: {
      d.dim = d.q + d.p;
      d.Z = MatrixXd::Zero(nrec, d.dim);
      for (Eigen::Index r = 0; r < nrec; ++r) {
        const int s = aug.category[r];
        if (spec.smoother == Smoother::PSplines)
          d.Z.block(r, 0, 1, d.q) = d.Btheta.row(s);
        else
          d.Z(r, s) = 1.0;
        if (d.p) d.Z.block(r, d.q, 1, d.p) = X.row(aug.obs[r]);
      }
      d.penalty = MatrixXd::Zero(d.dim, d.dim);
      d.penalty.topLeftCorner(d.q, d.q) = spec.lambda * base_pen.matrix;
      d.smooth_offsets = {0};
      break;
    }
    case Variant::ZeroSplit: {
      // layout: [theta_0, beta_0 (p), gamma (q), beta (p)]
      d.dim = 1 + d.p + d.q + d.p;
      d.Z = MatrixXd::Zero(nrec, d.dim);
      for (Eigen::Index r = 0; r < nrec; ++r) {
        const int s = aug.category[r];
        if (s == 0) {
          d.Z(r, 0) = 1.0;
          if (d.p) d.Z.block(r, 1, 1, d.p) = X.row(aug.obs[r]);
        } else {
          if (spec.smoother == Smoother::PSplines)
            d.Z.block(r, 1 + d.p, 1, d.q) = d.Btheta.row(s - 1);
          else
            d.Z(r, 1 + d.p + (s - 1)) = 1.0;
          if (d.p) d.Z.block(r, 1 + d.p + d.q, 1, d.p) = X.row(aug.obs[r]);
        }
      }
      d.penalty = MatrixXd::Zero(d.dim, d.dim);
      d.penalty.block(1 + d.p, 1 + d.p, d.q, d.q) = spec.lambda * base_pen.matrix;
      d.smooth_offsets = {1 + d.p};
      break;
    }
    case Variant::Varying: {
      // layout: [gamma_theta (q)] + [gamma_j (q) per flagged j] + [beta_j per rest]
      int n_flagged = 0;
      for (int j = 0; j < d.p; ++j) n_flagged += spec.varying_flags[j] ? 1 : 0;
      d.dim = d.q * (1 + n_flagged) + (d.p - n_flagged);
      d.Z = MatrixXd::Zero(nrec, d.dim);
      std::vector<int> offsets(d.p);
      {
        int off = d.q;
        for (int j = 0; j < d.p; ++j)
          if (spec.varying_flags[j]) { offsets[j] = off; off += d.q; }
        for (int j = 0; j < d.p; ++j)
          if (!spec.varying_flags[j]) { offsets[j] = off; off += 1; }
      }
      for (Eigen::Index r = 0; r < nrec; ++r) {
        const int s = aug.category[r];
        Eigen::RowVectorXd brow;
        if (spec.smoother == Smoother::PSplines) {
          brow = d.Btheta.row(s);
        } else {
          brow = Eigen::RowVectorXd::Zero(d.q);
          brow(s) = 1.0;
        }
        d.Z.block(r, 0, 1, d.q) = brow;
        for (int j = 0; j < d.p; ++j) {
          const double x = X(aug.obs[r], j);
          if (spec.varying_flags[j])
            d.Z.block(r, offsets[j], 1, d.q) = x * brow;
          else
            d.Z(r, offsets[j]) = x;
        }
      }
      d.penalty = MatrixXd::Zero(d.dim, d.dim);
      d.smooth_offsets = {0};
      for (int j = 0; j < d.p; ++j)
        if (spec.varying_flags[j]) d.smooth_offsets.push_back(offsets[j]);
      if (!spec.lambda_terms.empty() &&
          spec.lambda_terms.size() != d.smooth_offsets.size())
        throw std::invalid_argument("transition: lambda_terms must cover theta and each flagged term");
      for (std::size_t t = 0; t < d.smooth_offsets.size(); ++t) {
        const double lam = spec.lambda_terms.empty() ? spec.lambda : spec.lambda_terms[t];
        d.penalty.block(d.smooth_offsets[t], d.smooth_offsets[t], d.q, d.q) =
            lam * base_pen.matrix;
      }
      break;
    }
  }
  return d;
}

// score weight u and information weight w of one Bernoulli record
inline void link_weights(Link link, double eta, double t, double& u, double& w) {
  const double F = link_cdf(link, eta);
  if (link == Link::Logit) {
    u = t - F;
    w = F * (1.0 - F);
    return;
  }
  const double f = link_density(link, eta);
  const double v = std::max(F * (1.0 - F), 1e-300);
  u = (t - F) * f / v;
  w = f * f / v;
}

double bernoulli_loglik(Link link, const VectorXd& eta, const VectorXd& t,
                        const VectorXi* record_obs = nullptr) {
  double ll = 0.0;
  for (Eigen::Index r = 0; r < eta.size(); ++r) {
    if (!std::isfinite(eta[r])) {
      const std::string where =
          record_obs ? " (record " + std::to_string(r) + ")" : "";
      throw std::runtime_error("transition: non-finite linear predictor" + where);
    }
    ll += t[r] > 0.5 ? link_log_cdf(link, eta[r]) : link_log_ccdf(link, eta[r]);
  }
  return ll;
}

VectorXd initial_theta(const CountDataset& data, const TransitionSpec& spec) {
  const int M = spec.M;
  VectorXd haz(M + 1);
  double last = 0.5;
  for (int r = 0; r <= M; ++r) {
    long at_risk = 0, trans = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      if (data.outcomes[i] >= r) ++at_risk;
      if (data.outcomes[i] > r) ++trans;
    }
    if (at_risk > 0) last = static_cast<double>(trans) / at_risk;
    haz[r] = std::clamp(last, 0.01, 0.99);
  }
  VectorXd theta(M + 1);
  for (int r = 0; r <= M; ++r) {
    const double h = haz[r];
    theta[r] = spec.link == Link::Logit ? std::log(h / (1.0 - h))
                                        : std::log(-std::log1p(-h));
  }
  return theta;
}

VectorXd initial_alpha(const CountDataset& data, const TransitionSpec& spec, const Design& d) {
  VectorXd alpha = VectorXd::Zero(d.dim);
  const VectorXd theta0 = initial_theta(data, spec);
  auto project = [&](const VectorXd& target) {
    if (spec.smoother != Smoother::PSplines) return target;
    const MatrixXd& B = d.Btheta;
    MatrixXd G = B.transpose() * B + 1e-8 * MatrixXd::Identity(d.q, d.q);
    return VectorXd(G.ldlt().solve(B.transpose() * target));
  };
  switch (spec.variant) {
    case Variant::Basic:
    case Variant::Varying:
      alpha.head(d.q) = project(theta0);
      break;
    case Variant::ZeroSplit:
      alpha[0] = theta0[0];
      alpha.segment(1 + d.p, d.q) = project(theta0.tail(spec.M));
      break;
  }
  return alpha;
}

void validate_design_columns(const CountDataset& data) {
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    const double lo = data.covariates.col(j).minCoeff();
    const double hi = data.covariates.col(j).maxCoeff();
    if (lo == hi)
      throw std::invalid_argument("zero-variance covariate: " + data.column_names[j]);
  }
}

void fill_views(FittedTransitionModel& model, const Design& d) {
  const TransitionSpec& spec = model.spec;
  const int M = spec.M;
  model.q = d.q;
  model.p = d.p;
  model.theta.resize(M + 1);
  switch (spec.variant) {
    case Variant::Basic: {
      model.theta = spec.smoother == Smoother::PSplines
                        ? VectorXd(d.Btheta * model.alpha.head(d.q))
                        : VectorXd(model.alpha.head(d.q));
      model.beta = model.alpha.tail(d.p);
      break;
    }
    case Variant::ZeroSplit: {
      model.theta[0] = model.alpha[0];
      const VectorXd gamma = model.alpha.segment(1 + d.p, d.q);
      model.theta.tail(M) = spec.smoother == Smoother::PSplines
                                ? VectorXd(d.Btheta * gamma)
                                : gamma;
      model.beta_zero = model.alpha.segment(1, d.p);
      model.beta = model.alpha.tail(d.p);
      break;
    }
    case Variant::Varying: {
      model.theta = spec.smoother == Smoother::PSplines
                        ? VectorXd(d.Btheta * model.alpha.head(d.q))
                        : VectorXd(model.alpha.head(d.q));
      model.beta_curves.resize(M + 1, d.p);
      int off = d.q;
      for (int j = 0; j < d.p; ++j)
        if (spec.varying_flags[j]) {
          const VectorXd gj = model.alpha.segment(off, d.q);
          model.beta_curves.col(j) = spec.smoother == Smoother::PSplines
                                         ? VectorXd(d.Btheta * gj)
                                         : gj;
          off += d.q;
        }
      for (int j = 0; j < d.p; ++j)
        if (!spec.varying_flags[j]) {
          model.beta_curves.col(j).setConstant(model.alpha[off]);
          off += 1;
        }
      break;
    }
  }
}

void name_coefficients(FittedTransitionModel& model, const Design& d) {
  const TransitionSpec& spec = model.spec;
  const auto& cov = model.covariate_names;
  auto smooth_names = [&](const std::string& tag) {
    for (int k = 0; k < d.q; ++k)
      model.coef_names.push_back(tag + "[" + std::to_string(k) + "]");
  };
  switch (spec.variant) {
    case Variant::Basic:
      smooth_names(spec.smoother == Smoother::PSplines ? "gamma" : "theta");
      for (int j = 0; j < d.p; ++j) model.coef_names.push_back(cov[j]);
      break;
    case Variant::ZeroSplit:
      model.coef_names.push_back("theta_0");
      for (int j = 0; j < d.p; ++j) model.coef_names.push_back(cov[j] + " (zero)");
      smooth_names(spec.smoother == Smoother::PSplines ? "gamma" : "theta");
      for (int j = 0; j < d.p; ++j) model.coef_names.push_back(cov[j]);
      break;
    case Variant::Varying:
      smooth_names("gamma.theta");
      for (int j = 0; j < d.p; ++j)
        if (spec.varying_flags[j]) smooth_names("gamma." + cov[j]);
      for (int j = 0; j < d.p; ++j)
        if (!spec.varying_flags[j]) model.coef_names.push_back(cov[j]);
      break;
  }
}

// Diverging unpenalized coefficient: huge estimate with huge curvature-based
// uncertainty. The quasi-complete separation signature.
void flag_separation(FittedTransitionModel& model, const Design& d) {
  model.separated.assign(static_cast<std::size_t>(d.dim), false);
  std::vector<bool> penalized(static_cast<std::size_t>(d.dim), false);
  for (int off : d.smooth_offsets)
    for (int k = 0; k < d.q; ++k) penalized[static_cast<std::size_t>(off + k)] = true;
  for (int j = 0; j < d.dim; ++j) {
    if (penalized[static_cast<std::size_t>(j)]) continue;
    const double se = std::sqrt(std::max(model.covariance(j, j), 0.0));
    if (std::abs(model.alpha[j]) > 10.0 && se > 10.0) model.separated[static_cast<std::size_t>(j)] = true;
  }
}

}  // namespace

double loglik_binary(const VectorXd& params, const AugmentedDataset& augmented,
                     const TransitionSpec& spec_in) {
  const CountDataset& data = *augmented.source;
  const TransitionSpec spec = resolve_spec(
      spec_in, max_observed(data), augmented.include_covariates ? static_cast<int>(data.p()) : 0);
  const Design d = build_design(augmented, spec);
  if (params.size() != d.dim)
    throw std::invalid_argument("loglik_binary: parameter dimension mismatch");
  const VectorXd eta = d.Z * params;
  return bernoulli_loglik(spec.link, eta, augmented.transition, &augmented.obs);
}

double loglik_direct(const VectorXd& params, const CountDataset& data,
                     const TransitionSpec& spec_in) {
  const TransitionSpec spec = resolve_spec(spec_in, max_observed(data), static_cast<int>(data.p()));
  // evaluate the theta curve and coefficient blocks straight from params
  FittedTransitionModel tmp;
  tmp.spec = spec;
  tmp.alpha = params;
  AugmentedDataset aug = augment(data);
  const Design d = build_design(aug, spec);
  if (params.size() != d.dim)
    throw std::invalid_argument("loglik_direct: parameter dimension mismatch");
  fill_views(tmp, d);

  double ll = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const int y = data.outcomes[i];
    double logp = 0.0;
    for (int s = 0; s <= y; ++s) {
      double eta = tmp.theta[s];
      switch (spec.variant) {
        case Variant::Basic:
          eta += data.covariates.row(i).dot(tmp.beta);
          break;
        case Variant::ZeroSplit:
          eta += data.covariates.row(i).dot(s == 0 ? tmp.beta_zero : tmp.beta);
          break;
        case Variant::Varying:
          for (int j = 0; j < static_cast<int>(data.p()); ++j)
            eta += data.covariates(i, j) * tmp.beta_curves(s, j);
          break;
      }
      if (!std::isfinite(eta))
        throw std::runtime_error("transition: non-finite linear predictor (observation " +
                                 std::to_string(i) + ")");
      logp += s < y ? link_log_cdf(spec.link, eta) : link_log_ccdf(spec.link, eta);
    }
    ll += logp;
  }
  return ll;
}

VectorXd gradient(const VectorXd& params, const AugmentedDataset& augmented,
                  const TransitionSpec& spec_in) {
  const CountDataset& data = *augmented.source;
  const TransitionSpec spec = resolve_spec(
      spec_in, max_observed(data), augmented.include_covariates ? static_cast<int>(data.p()) : 0);
  const Design d = build_design(augmented, spec);
  const VectorXd eta = d.Z * params;
  VectorXd u(eta.size());
  for (Eigen::Index r = 0; r < eta.size(); ++r) {
    double ur, wr;
    link_weights(spec.link, eta[r], augmented.transition[r], ur, wr);
    u[r] = ur;
  }
  return d.Z.transpose() * u - d.penalty * params;
}

MatrixXd penalized_information(const VectorXd& params, const AugmentedDataset& augmented,
                               const TransitionSpec& spec_in) {
  const CountDataset& data = *augmented.source;
  const TransitionSpec spec = resolve_spec(
      spec_in, max_observed(data), augmented.include_covariates ? static_cast<int>(data.p()) : 0);
  const Design d = build_design(augmented, spec);
  const VectorXd eta = d.Z * params;
  VectorXd w(eta.size());
  for (Eigen::Index r = 0; r < eta.size(); ++r) {
    double ur, wr;
    link_weights(spec.link, eta[r], augmented.transition[r], ur, wr);
    w[r] = wr;
  }
  return d.Z.transpose() * w.asDiagonal() * d.Z + d.penalty;
}

FittedTransitionModel fit(const CountDataset& data, TransitionSpec spec_in) {
  if (data.n() == 0) throw std::invalid_argument("fit: empty dataset");
  if (spec_in.lambda < 0.0) throw std::invalid_argument("fit: lambda must be nonnegative");
  validate_design_columns(data);
  const TransitionSpec spec =
      resolve_spec(spec_in, max_observed(data), static_cast<int>(data.p()));

  const AugmentedDataset aug = augment(data);
  const Design d = build_design(aug, spec);
  const VectorXd& t = aug.transition;

  VectorXd alpha = initial_alpha(data, spec, d);
  auto penalized_ll = [&](const VectorXd& a, double& ll_out) {
    const VectorXd eta = d.Z * a;
    ll_out = bernoulli_loglik(spec.link, eta, t);
    return ll_out - 0.5 * a.dot(d.penalty * a);
  };

  double ll = 0.0;
  double pll = penalized_ll(alpha, ll);

  FittedTransitionModel model;
  model.spec = spec;
  model.lambda_used = spec.lambda;
  model.covariate_names = data.column_names;
  model.encoder = data.encoder;

  bool converged = false;
  int it = 0;
  double gnorm = std::numeric_limits<double>::infinity();
  const MatrixXd ridge = kRidge * MatrixXd::Identity(d.dim, d.dim);
  MatrixXd info(d.dim, d.dim);
  while (it < spec.max_iter) {
    ++it;
    const VectorXd eta = d.Z * alpha;
    VectorXd u(eta.size()), w(eta.size());
    for (Eigen::Index r = 0; r < eta.size(); ++r) link_weights(spec.link, eta[r], t[r], u[r], w[r]);
    const VectorXd score = d.Z.transpose() * u - d.penalty * alpha;
    gnorm = score.lpNorm<Eigen::Infinity>();
    if (gnorm < spec.grad_tol) {
      converged = true;
      break;
    }
    info = d.Z.transpose() * w.asDiagonal() * d.Z + d.penalty + ridge;
    Eigen::LDLT<MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("transition: singular penalized information; try a larger lambda");
    VectorXd step = ldlt.solve(score);
    double new_ll = 0.0;
    VectorXd cand = alpha + step;
    double new_pll;
    int halvings = 0;
    for (;;) {
      bool ok = true;
      try {
        new_pll = penalized_ll(cand, new_ll);
      } catch (const std::runtime_error&) {
        ok = false;
        new_pll = -std::numeric_limits<double>::infinity();
      }
      if (ok && std::isfinite(new_pll) && new_pll >= pll) break;
      if (++halvings > 30) break;
      step *= 0.5;
      cand = alpha + step;
    }
    if (new_pll < pll) break;  // no ascent direction left
    const double rel = std::abs(new_pll - pll) / (std::abs(pll) + 1e-10);
    alpha = cand;
    pll = new_pll;
    ll = new_ll;
    if (rel < spec.tol) {
      converged = true;
      break;
    }
  }

  model.alpha = alpha;
  {
    const VectorXd eta = d.Z * alpha;
    VectorXd u(eta.size()), w(eta.size());
    for (Eigen::Index r = 0; r < eta.size(); ++r) link_weights(spec.link, eta[r], t[r], u[r], w[r]);
    const VectorXd score = d.Z.transpose() * u - d.penalty * alpha;
    model.diag.grad_norm = score.lpNorm<Eigen::Infinity>();
    info = d.Z.transpose() * w.asDiagonal() * d.Z + d.penalty + ridge;
    model.covariance = Eigen::LDLT<MatrixXd>(info).solve(MatrixXd::Identity(d.dim, d.dim));
    if (spec.sandwich_se) {
      MatrixXd B = MatrixXd::Zero(d.dim, d.dim);
      VectorXd si = VectorXd::Zero(d.dim);
      int cur = aug.obs[0];
      for (Eigen::Index r = 0; r < eta.size(); ++r) {
        if (aug.obs[r] != cur) {
          B += si * si.transpose();
          si.setZero();
          cur = aug.obs[r];
        }
        si += u[r] * d.Z.row(r).transpose();
      }
      B += si * si.transpose();
      model.covariance_sandwich = model.covariance * B * model.covariance;
    }
  }

  model.diag.converged = converged;
  model.diag.iterations = it;
  model.diag.loglik = ll;
  model.diag.penalized_loglik = pll;
  if (spec.variant == Variant::ZeroSplit) {
    bool any_zero = false;
    for (Eigen::Index i = 0; i < data.n(); ++i) any_zero |= data.outcomes[i] == 0;
    model.diag.degenerate_zero_part = !any_zero;
  }

  fill_views(model, d);
  name_coefficients(model, d);
  flag_separation(model, d);
  if (model.diag.degenerate_zero_part && !model.separated.empty())
    model.separated[0] = true;  // theta_0 runs off with no zeros to pin it
  return model;
}

FittedTransitionModel fit_zero_split(const CountDataset& data, TransitionSpec spec) {
  spec.variant = Variant::ZeroSplit;
  return fit(data, spec);
}

FittedTransitionModel fit_varying(const CountDataset& data, TransitionSpec spec) {
  spec.variant = Variant::Varying;
  return fit(data, spec);
}

PredictedDistribution predict_pmf(const FittedTransitionModel& model, const MatrixXd& X) {
  if (X.cols() != model.p)
    throw std::invalid_argument("predict_pmf: covariate columns do not match the fit");
  const int M = model.spec.M;
  const Link link = model.spec.link;
  PredictedDistribution out;
  out.M = M;
  out.pmf.resize(X.rows(), M + 1);
  out.cdf.resize(X.rows(), M + 1);
  out.mean.resize(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double surv = 1.0;
    for (int r = 0; r < M; ++r) {
      double eta = model.theta[r];
      switch (model.spec.variant) {
        case Variant::Basic:
          eta += X.row(i).dot(model.beta);
          break;
        case Variant::ZeroSplit:
          eta += X.row(i).dot(r == 0 ? model.beta_zero : model.beta);
          break;
        case Variant::Varying:
          for (int j = 0; j < model.p; ++j) eta += X(i, j) * model.beta_curves(r, j);
          break;
      }
      const double delta = link_cdf(link, eta);
      out.pmf(i, r) = surv * (1.0 - delta);
      surv *= delta;
    }
    out.pmf(i, M) = surv;  // all remaining tail mass at M
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

VectorXd continuation_ratio_effect(const FittedTransitionModel& model,
                                   const VectorXd& x, const VectorXd& xt) {
  if (x.size() != model.p || xt.size() != model.p)
    throw std::invalid_argument("continuation_ratio_effect: covariate size mismatch");
  const int M = model.spec.M;
  VectorXd out(M + 1);
  const VectorXd dx = x - xt;
  switch (model.spec.variant) {
    case Variant::Basic:
      out.setConstant(std::exp(dx.dot(model.beta)));
      break;
    case Variant::ZeroSplit:
      out[0] = std::exp(dx.dot(model.beta_zero));
      for (int r = 1; r <= M; ++r) out[r] = std::exp(dx.dot(model.beta));
      break;
    case Variant::Varying:
      for (int r = 0; r <= M; ++r) {
        double v = 0.0;
        for (int j = 0; j < model.p; ++j) v += dx[j] * model.beta_curves(r, j);
        out[r] = std::exp(v);
      }
      break;
  }
  return out;
}

std::vector<CoefficientRow> summarize(const FittedTransitionModel& model) {
  const MatrixXd& cov =
      model.spec.sandwich_se && model.covariance_sandwich.size() > 0
          ? model.covariance_sandwich
          : model.covariance;
  auto row_at = [&](int idx) {
    CoefficientRow row;
    row.name = model.coef_names[static_cast<std::size_t>(idx)];
    row.coef = model.alpha[idx];
    row.se_suppressed = model.separated[static_cast<std::size_t>(idx)];
    if (!row.se_suppressed) {
      row.se = std::sqrt(std::max(cov(idx, idx), 0.0));
      row.z = row.se > 0.0 ? row.coef / row.se : 0.0;
    }
    return row;
  };
  std::vector<CoefficientRow> rows;
  switch (model.spec.variant) {
    case Variant::Basic:
      for (int j = 0; j < model.p; ++j) rows.push_back(row_at(model.q + j));
      break;
    case Variant::ZeroSplit: {
      rows.push_back(row_at(0));
      for (int j = 0; j < model.p; ++j) rows.push_back(row_at(1 + j));
      for (int j = 0; j < model.p; ++j) rows.push_back(row_at(1 + model.p + model.q + j));
      break;
    }
    case Variant::Varying: {
      // smooth terms have no single coefficient; report the scalar ones
      int off = model.q;
      for (int j = 0; j < model.p; ++j)
        if (model.spec.varying_flags[j]) off += model.q;
      for (int j = 0; j < model.p; ++j)
        if (!model.spec.varying_flags[j]) rows.push_back(row_at(off++));
      break;
    }
  }
  return rows;
}

}  // namespace ctm
