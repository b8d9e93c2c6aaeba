#pragma once

#include "ctm/baselines.hpp"
#include "ctm/transition.hpp"
#include "ctm/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ctm {

enum class ScoreRule { Brier, Log, Rps };

// (1 - pmf[Y])^2 + sum_{r != Y} pmf[r]^2
double brier(int y, const VectorXd& pmf);
// -log pmf[Y]; +inf when pmf[Y] == 0
double log_score(int y, const VectorXd& pmf);
// sum_{r=0}^{r_max} (cdf(r) - 1{Y <= r})^2, cdf(r) = 1 beyond the support
double rps(int y, const VectorXd& pmf, int r_max);

struct ScoreReport {
  VectorXd per_observation;
  double mean = 0.0;
  ScoreRule rule = ScoreRule::Rps;
  int r_max = 30;
  int replication_id = 0;
  std::uint64_t seed = 0;
};

ScoreReport score_predictions(const VectorXi& y, const PredictedDistribution& pred,
                              ScoreRule rule, int r_max);

// One model entry in a comparison: a baseline kind or a transition spec.
struct ModelChoice {
  std::string label;
  std::variant<BaselineKind, TransitionSpec> model;
};

// The resampling protocol: subsamples without replacement, fit on the
// training part, score the held-out part.
struct ResamplingProtocol {
  int replications = 100;
  double fraction = 2.0 / 3.0;
  int train_size = 0;  // 0: round(fraction * n), half away from zero
  std::uint64_t seed = 1;
  int r_max = 30;
  int jobs = 1;
};

struct LambdaCurvePoint {
  double lambda = 0.0;
  double mean_rps = 0.0;
  int failures = 0;
  bool dropped = false;  // every replication failed at this lambda
};

struct SelectLambdaResult {
  double lambda = 0.0;
  std::vector<LambdaCurvePoint> curve;
};

std::vector<double> default_lambda_grid();

// Mean test RPS per grid point; returns the argmin with the full curve.
SelectLambdaResult select_lambda(const CountDataset& data, const TransitionSpec& spec,
                                 const std::vector<double>& grid,
                                 const ResamplingProtocol& protocol);

struct ReplicationScore {
  int replication = 0;
  std::uint64_t seed = 0;
  double score = 0.0;
  bool failed = false;
};

struct CompareResult {
  std::vector<std::string> labels;
  // scores[model][replication]; failed replications are recorded and the
  // aggregate mean skips them
  std::vector<std::vector<ReplicationScore>> scores;
  std::vector<double> mean_score;
  std::vector<int> failures;
};

CompareResult compare_models(const CountDataset& data, const std::vector<ModelChoice>& models,
                             const ResamplingProtocol& protocol, ScoreRule rule = ScoreRule::Rps);

}  // namespace ctm
