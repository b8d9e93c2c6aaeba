#include "ctm/scoring.hpp"

#include "ctm/data_model.hpp"
#include "ctm/rng.hpp"

#include <atomic>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace ctm {

namespace {

void check_pmf(const VectorXd& pmf) {
  if (pmf.size() == 0) throw std::invalid_argument("scoring: empty pmf");
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t)
    threads.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : threads) th.join();
}

}  // namespace

double brier(int y, const VectorXd& pmf) {
  check_pmf(pmf);
  if (y < 0 || y >= pmf.size())
    throw std::invalid_argument("brier: observation outside the pmf support");
  double s = 0.0;
  for (Eigen::Index r = 0; r < pmf.size(); ++r) {
    const double d = pmf[r] - (r == y ? 1.0 : 0.0);
    s += d * d;
  }
  return s;
}

double log_score(int y, const VectorXd& pmf) {
  check_pmf(pmf);
  const double p = (y >= 0 && y < pmf.size()) ? pmf[y] : 0.0;
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(p);
}

double rps(int y, const VectorXd& pmf, int r_max) {
  check_pmf(pmf);
  double s = 0.0;
  double cdf = 0.0;
  for (int r = 0; r <= r_max; ++r) {
    if (r < pmf.size()) cdf = std::min(cdf + pmf[r], 1.0);
    else cdf = 1.0;
    const double d = cdf - (y <= r ? 1.0 : 0.0);
    s += d * d;
  }
  return s;
}

ScoreReport score_predictions(const VectorXi& y, const PredictedDistribution& pred,
                              ScoreRule rule, int r_max) {
  if (y.size() != pred.pmf.rows())
    throw std::invalid_argument("score_predictions: outcome/prediction size mismatch");
  ScoreReport report;
  report.rule = rule;
  report.r_max = r_max;
  report.per_observation.resize(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const VectorXd pmf = pred.pmf.row(i);
    switch (rule) {
      case ScoreRule::Brier: report.per_observation[i] = brier(y[i], pmf); break;
      case ScoreRule::Log: report.per_observation[i] = log_score(y[i], pmf); break;
      case ScoreRule::Rps: report.per_observation[i] = rps(y[i], pmf, r_max); break;
    }
  }
  report.mean = report.per_observation.mean();
  return report;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = -2; k <= 12; ++k) grid.push_back(std::ldexp(1.0, k));
  grid.push_back(5.0);
  grid.push_back(16.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

namespace {

// fit one model on the training rows, score the held-out rows
double replication_score(const CountDataset& data, const ModelChoice& choice,
                         const SubsampleSplit& split, ScoreRule rule, int r_max) {
  const CountDataset train = take_rows(data, split.train_indices);
  const CountDataset test = take_rows(data, split.test_indices);
  const int M = static_cast<int>(std::lround(1.2 * max_observed(train)));
  PredictedDistribution pred;
  if (std::holds_alternative<BaselineKind>(choice.model)) {
    BaselineFit f;
    switch (std::get<BaselineKind>(choice.model)) {
      case BaselineKind::Poisson: f = fit_poisson(train); break;
      case BaselineKind::NegBin: f = fit_negbin(train); break;
      case BaselineKind::Zip: f = fit_zip(train); break;
      case BaselineKind::Hurdle: f = fit_hurdle(train); break;
    }
    pred = predict_pmf_baseline(f, test.covariates, std::max(M, 1));
  } else {
    const FittedTransitionModel f = fit(train, std::get<TransitionSpec>(choice.model));
    pred = predict_pmf(f, test.covariates);
  }
  return score_predictions(test.outcomes, pred, rule, r_max).mean;
}

SubsampleSplit protocol_split(int n, const ResamplingProtocol& protocol, std::uint64_t seed) {
  if (protocol.train_size > 0) return subsample_fixed(n, protocol.train_size, seed);
  return subsample(n, protocol.fraction, seed);
}

}  // namespace

SelectLambdaResult select_lambda(const CountDataset& data, const TransitionSpec& spec,
                                 const std::vector<double>& grid,
                                 const ResamplingProtocol& protocol) {
  if (grid.empty()) throw std::invalid_argument("select_lambda: empty grid");
  SelectLambdaResult result;
  result.curve.resize(grid.size());

  // the same replication splits are reused for every lambda
  std::vector<SubsampleSplit> splits;
  splits.reserve(static_cast<std::size_t>(protocol.replications));
  for (int rep = 0; rep < protocol.replications; ++rep)
    splits.push_back(protocol_split(static_cast<int>(data.n()), protocol,
                                    derive_seed(protocol.seed, static_cast<std::uint64_t>(rep))));

  const int total = static_cast<int>(grid.size()) * protocol.replications;
  std::vector<double> cell(static_cast<std::size_t>(total), 0.0);
  std::vector<char> cell_fail(static_cast<std::size_t>(total), 0);
  parallel_for(total, protocol.jobs, [&](int idx) {
    const int g = idx / protocol.replications;
    const int rep = idx % protocol.replications;
    TransitionSpec s = spec;
    s.lambda = grid[static_cast<std::size_t>(g)];
    ModelChoice choice{"transition", s};
    try {
      cell[static_cast<std::size_t>(idx)] = replication_score(
          data, choice, splits[static_cast<std::size_t>(rep)], ScoreRule::Rps, protocol.r_max);
    } catch (const std::exception&) {
      cell_fail[static_cast<std::size_t>(idx)] = 1;
    }
  });

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    LambdaCurvePoint& pt = result.curve[g];
    pt.lambda = grid[g];
    double sum = 0.0;
    int ok = 0;
    for (int rep = 0; rep < protocol.replications; ++rep) {
      const std::size_t idx = g * static_cast<std::size_t>(protocol.replications) +
                              static_cast<std::size_t>(rep);
      if (cell_fail[idx]) {
        ++pt.failures;
      } else {
        sum += cell[idx];
        ++ok;
      }
    }
    if (ok == 0) {
      pt.dropped = true;
      pt.mean_rps = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    pt.mean_rps = sum / ok;
    if (pt.mean_rps < best) {
      best = pt.mean_rps;
      result.lambda = pt.lambda;
    }
  }
  if (!std::isfinite(best))
    throw std::runtime_error("select_lambda: every grid point failed");
  return result;
}

CompareResult compare_models(const CountDataset& data, const std::vector<ModelChoice>& models,
                             const ResamplingProtocol& protocol, ScoreRule rule) {
  if (models.empty()) throw std::invalid_argument("compare_models: no models given");
  CompareResult result;
  result.labels.reserve(models.size());
  for (const auto& m : models) result.labels.push_back(m.label);
  result.scores.assign(models.size(), std::vector<ReplicationScore>(
                                          static_cast<std::size_t>(protocol.replications)));

  const int total = static_cast<int>(models.size()) * protocol.replications;
  parallel_for(total, protocol.jobs, [&](int idx) {
    const int m = idx / protocol.replications;
    const int rep = idx % protocol.replications;
    const std::uint64_t seed = derive_seed(protocol.seed, static_cast<std::uint64_t>(rep));
    ReplicationScore& slot = result.scores[static_cast<std::size_t>(m)][static_cast<std::size_t>(rep)];
    slot.replication = rep;
    slot.seed = seed;
    try {
      const SubsampleSplit split = protocol_split(static_cast<int>(data.n()), protocol, seed);
      slot.score = replication_score(data, models[static_cast<std::size_t>(m)], split, rule,
                                     protocol.r_max);
    } catch (const std::exception&) {
      slot.failed = true;
    }
  });

  result.mean_score.resize(models.size());
  result.failures.resize(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    double sum = 0.0;
    int ok = 0, fails = 0;
    for (const auto& r : result.scores[m]) {
      if (r.failed) ++fails;
      else { sum += r.score; ++ok; }
    }
    result.failures[m] = fails;
    result.mean_score[m] = ok ? sum / ok : std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

}  // namespace ctm
