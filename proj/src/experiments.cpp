#include "ctm/experiments.hpp"

#include "ctm/baselines.hpp"
#include "ctm/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ctm {

namespace {

VectorXd true_pmf(const SimConfig& config, int support_max) {
  VectorXd pmf(support_max + 1);
  if (config.family == SimFamily::Poisson) {
    double lp = -config.mu;
    pmf[0] = std::exp(lp);
    for (int r = 1; r <= support_max; ++r) {
      lp += std::log(config.mu) - std::log(r);
      pmf[r] = std::exp(lp);
    }
  } else {
    const double nu = config.nu, mu = config.mu;
    double lp = nu * std::log(nu / (mu + nu));
    pmf[0] = std::exp(lp);
    for (int r = 1; r <= support_max; ++r) {
      lp += std::log((r - 1 + nu) / r) + std::log(mu / (mu + nu));
      pmf[r] = std::exp(lp);
    }
  }
  return pmf;
}

// embed a tail-at-M pmf onto the display grid, repacking overflow at the end
VectorXd embed(const VectorXd& pmf, int support_max) {
  VectorXd out = VectorXd::Zero(support_max + 1);
  for (Eigen::Index r = 0; r < pmf.size(); ++r) {
    const int slot = std::min<int>(static_cast<int>(r), support_max);
    out[slot] += pmf[r];
  }
  return out;
}

}  // namespace

CountDataset simulate_counts(const SimConfig& config) {
  if (config.n < 1) throw std::invalid_argument("simulate_counts: n must be positive");
  if (config.mu <= 0.0) throw std::invalid_argument("simulate_counts: mu must be positive");
  if (config.family == SimFamily::NegBin && config.nu <= 0.0)
    throw std::invalid_argument("simulate_counts: nu must be positive");
  Rng rng(config.seed);
  CountDataset data;
  data.outcomes.resize(config.n);
  data.covariates.resize(config.n, 0);
  data.outcome_name = "y";
  for (int i = 0; i < config.n; ++i)
    data.outcomes[i] = config.family == SimFamily::Poisson
                           ? rng.poisson(config.mu)
                           : rng.negbin(config.nu, config.mu);
  return data;
}

FlexibilityResult flexibility_study(const SimConfig& config, const TransitionSpec& spec,
                                    int support_max) {
  FlexibilityResult result;
  result.true_pmf = true_pmf(config, support_max);
  VectorXd acc_transition = VectorXd::Zero(support_max + 1);
  VectorXd acc_family = VectorXd::Zero(support_max + 1);
  int used = 0;
  const MatrixXd no_covariates(1, 0);
  for (int rep = 0; rep < config.replications; ++rep) {
    SimConfig c = config;
    c.seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep));
    const CountDataset sample = simulate_counts(c);
    try {
      const FittedTransitionModel tm = fit(sample, spec);
      const PredictedDistribution tp = predict_pmf(tm, no_covariates);
      const BaselineFit fam = config.family == SimFamily::Poisson ? fit_poisson(sample)
                                                                  : fit_negbin(sample);
      const PredictedDistribution fp =
          predict_pmf_baseline(fam, no_covariates, support_max);
      acc_transition += embed(tp.pmf.row(0), support_max);
      acc_family += embed(fp.pmf.row(0), support_max);
      ++used;
    } catch (const std::exception&) {
      ++result.excluded;
    }
  }
  if (used == 0) throw std::runtime_error("flexibility_study: every replication failed");
  result.avg_transition_pmf = acc_transition / used;
  result.avg_family_pmf = acc_family / used;
  result.max_gap_transition =
      (result.avg_transition_pmf - result.true_pmf).cwiseAbs().maxCoeff();
  result.max_gap_family = (result.avg_family_pmf - result.true_pmf).cwiseAbs().maxCoeff();
  return result;
}

}  // namespace ctm
