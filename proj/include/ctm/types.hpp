#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace ctm {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

enum class ColumnKind { Numeric, Categorical };

// How one original column maps onto design-matrix columns.
struct EncodedColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::string reference;                 // dropped level (categorical only)
  std::vector<std::string> levels;       // non-reference levels, in column order
};

// Observed counts with a dummy-coded covariate matrix.
struct CountDataset {
  VectorXi outcomes;                     // Y_i >= 0
  MatrixXd covariates;                   // n x p, no missing entries
  std::vector<std::string> column_names; // p unique labels
  std::vector<EncodedColumn> encoder;    // per original column
  std::string outcome_name = "y";
  Eigen::Index rows_dropped = 0;         // rows rejected for missing fields

  Eigen::Index n() const { return outcomes.size(); }
  Eigen::Index p() const { return covariates.cols(); }
};

// Long-format binary transition records, one per (i, s) with s = 0..Y_i.
// Covariate rows are looked up in the source dataset, not copied.
struct AugmentedDataset {
  VectorXi obs;        // observation index i
  VectorXi category;   // category s
  VectorXd transition; // 1 while s < Y_i, 0 at s = Y_i
  const CountDataset* source = nullptr;
  bool include_covariates = true;

  Eigen::Index total_rows() const { return obs.size(); }
};

struct SubsampleSplit {
  std::vector<int> train_indices;
  std::vector<int> test_indices;
  std::uint64_t seed = 0;
  double fraction = 2.0 / 3.0;
};

// Per-observation pmf over {0,...,M}; all tail mass sits at M so rows sum
// to one by construction.
struct PredictedDistribution {
  MatrixXd pmf;  // n x (M+1)
  MatrixXd cdf;  // n x (M+1), nondecreasing, last column = 1
  VectorXd mean; // sum_r r * pmf(i, r)
  int M = 0;
};

struct CoefficientRow {
  std::string name;
  double coef = 0.0;
  double se = 0.0;
  double z = 0.0;
  bool se_suppressed = false; // separation: estimate diverges, se meaningless
};

}  // namespace ctm
