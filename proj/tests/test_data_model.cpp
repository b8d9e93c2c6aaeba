#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctm/data_model.hpp"
#include "ctm/rng.hpp"

#include <filesystem>
#include <fstream>
#include <set>

using namespace ctm;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path.string();
}

}  // namespace

TEST_CASE("quine loads with dummy-coded education") {
  const CountDataset data = load_csv(std::string(CTM_DATA_DIR) + "/quine.csv");
  CHECK(data.n() == 146);
  CHECK(data.p() == 6);
  const std::vector<std::string> expect{"Eth", "Sex", "Edu:1", "Edu:2", "Edu:3", "Lrn"};
  CHECK(data.column_names == expect);
  CHECK(max_observed(data) == 81);
  // a categorical row activates at most one level column
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double edu = data.covariates(i, 2) + data.covariates(i, 3) + data.covariates(i, 4);
    CHECK(edu <= 1.0);
  }
}

TEST_CASE("single numeric column passes through unchanged") {
  const auto csv = write_temp("ctm_ident.csv", "x,y\n1.5,0\n-2.25,3\n7,1\n");
  DatasetSchema schema;
  schema.outcome = "y";
  schema.columns.push_back({"x", ColumnKind::Numeric, {}});
  const CountDataset data = load_csv(csv, schema);
  CHECK(data.n() == 3);
  CHECK(data.p() == 1);
  CHECK(data.covariates(0, 0) == 1.5);
  CHECK(data.covariates(1, 0) == -2.25);
  CHECK(data.covariates(2, 0) == 7.0);
}

TEST_CASE("negative outcome is rejected with its row") {
  const auto csv = write_temp("ctm_neg.csv", "x,y\n1,0\n1,2\n0,1\n1,4\n0,-1\n1,2\n");
  DatasetSchema schema;
  schema.outcome = "y";
  schema.columns.push_back({"x", ColumnKind::Numeric, {}});
  CHECK_THROWS_WITH_AS(load_csv(csv, schema),
                       doctest::Contains("row 5"), std::runtime_error);
  const auto frac = write_temp("ctm_frac.csv", "x,y\n1,0\n1,2.5\n");
  CHECK_THROWS_AS(load_csv(frac, schema), std::runtime_error);
}

TEST_CASE("rows with missing fields are dropped, not imputed") {
  const auto csv = write_temp("ctm_miss.csv", "x,y\n1,0\n,2\n0,NA\n1,4\n");
  DatasetSchema schema;
  schema.outcome = "y";
  schema.columns.push_back({"x", ColumnKind::Numeric, {}});
  const CountDataset data = load_csv(csv, schema);
  CHECK(data.n() == 2);
  CHECK(data.rows_dropped == 2);
}

TEST_CASE("unknown categorical level at prediction time names the level") {
  const auto csv = write_temp("ctm_cat.csv", "g,y\na,0\nb,2\na,1\n");
  DatasetSchema schema;
  schema.outcome = "y";
  schema.columns.push_back({"g", ColumnKind::Categorical, {}});
  const CountDataset data = load_csv(csv, schema);
  CHECK(data.column_names == std::vector<std::string>{"g:b"});
  CHECK_THROWS_WITH_AS(encode_rows(data.encoder, {"g"}, {{"zz"}}),
                       doctest::Contains("zz"), std::runtime_error);
}

TEST_CASE("augment codes transitions as (1,...,1,0)") {
  CountDataset data;
  data.covariates.resize(1, 0);
  data.outcomes.resize(1);
  data.outcomes << 2;
  const AugmentedDataset aug = augment(data);
  CHECK(aug.total_rows() == 3);
  CHECK(aug.transition[0] == 1.0);
  CHECK(aug.transition[1] == 1.0);
  CHECK(aug.transition[2] == 0.0);
  CHECK(aug.category[2] == 2);
}

TEST_CASE("augmenting a zero count yields the single terminating record") {
  CountDataset data;
  data.covariates.resize(1, 0);
  data.outcomes.resize(1);
  data.outcomes << 0;
  const AugmentedDataset aug = augment(data);
  CHECK(aug.total_rows() == 1);
  CHECK(aug.category[0] == 0);
  CHECK(aug.transition[0] == 0.0);
}

TEST_CASE("augment row count and round trip") {
  CountDataset data;
  data.covariates.resize(3, 0);
  data.outcomes.resize(3);
  data.outcomes << 2, 0, 1;
  const AugmentedDataset aug = augment(data);
  CHECK(aug.total_rows() == 6);

  // random instances: summing transitions per observation recovers Y_i and
  // each observation terminates exactly once, at s = Y_i
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(12));
    CountDataset d;
    d.covariates.resize(n, 0);
    d.outcomes.resize(n);
    for (int i = 0; i < n; ++i) d.outcomes[i] = static_cast<int>(rng.below(9));
    const AugmentedDataset a = augment(d);
    VectorXd sum = VectorXd::Zero(n);
    std::vector<int> zeros(n, 0);
    for (Eigen::Index r = 0; r < a.total_rows(); ++r) {
      sum[a.obs[r]] += a.transition[r];
      if (a.transition[r] == 0.0) {
        zeros[a.obs[r]] += 1;
        CHECK(a.category[r] == d.outcomes[a.obs[r]]);
      }
    }
    for (int i = 0; i < n; ++i) {
      CHECK(sum[i] == doctest::Approx(d.outcomes[i]));
      CHECK(zeros[i] == 1);
    }
  }
}

TEST_CASE("subsample is deterministic and respects rounding") {
  const SubsampleSplit a = subsample(146, 2.0 / 3.0, 42);
  CHECK(a.train_indices.size() == 97);  // round(97.33), half away from zero
  CHECK(a.test_indices.size() == 49);
  const SubsampleSplit b = subsample(146, 2.0 / 3.0, 42);
  CHECK(a.train_indices == b.train_indices);
  CHECK(a.test_indices == b.test_indices);

  const SubsampleSplit c = subsample(3, 2.0 / 3.0, 1);
  CHECK(c.train_indices.size() == 2);
  CHECK(c.test_indices.size() == 1);

  std::set<int> all(a.train_indices.begin(), a.train_indices.end());
  for (int i : a.test_indices) CHECK(all.insert(i).second);
  CHECK(all.size() == 146);

  CHECK_THROWS_AS(subsample(10, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(subsample(10, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(subsample(1, 0.5, 1), std::invalid_argument);
}

TEST_CASE("max_observed") {
  CountDataset data;
  data.covariates.resize(3, 0);
  data.outcomes.resize(3);
  data.outcomes << 0, 0, 0;
  CHECK(max_observed(data) == 0);
  data.outcomes << 3, 7, 2;
  CHECK(max_observed(data) == 7);
  CountDataset empty;
  CHECK_THROWS_AS(max_observed(empty), std::invalid_argument);
}
