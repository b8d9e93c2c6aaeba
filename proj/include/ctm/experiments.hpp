#pragma once

#include "ctm/transition.hpp"
#include "ctm/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ctm {

enum class SimFamily { Poisson, NegBin };

struct SimConfig {
  SimFamily family = SimFamily::Poisson;
  double mu = 5.0;
  double nu = 1.0;  // NegBin only
  int n = 100;
  int replications = 100;
  std::uint64_t seed = 1;
};

// i.i.d. draws; deterministic per seed (NegBin via gamma-Poisson mixture).
CountDataset simulate_counts(const SimConfig& config);

// Fits the transition model and the true-family model to each replicated
// sample and averages the fitted pmfs; the analytic pmf comes along for
// comparison. Categories 0..support_max.
struct FlexibilityResult {
  VectorXd true_pmf;
  VectorXd avg_transition_pmf;
  VectorXd avg_family_pmf;
  int excluded = 0;  // replications dropped because a fit diverged
  double max_gap_transition = 0.0;
  double max_gap_family = 0.0;
};

FlexibilityResult flexibility_study(const SimConfig& config, const TransitionSpec& spec,
                                    int support_max = 30);

}  // namespace ctm
