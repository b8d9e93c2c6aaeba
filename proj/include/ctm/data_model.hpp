#pragma once

#include "ctm/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ctm {

// Declared kind of one original CSV column.
struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::optional<std::string> reference;  // categorical reference level
};

struct DatasetSchema {
  std::string outcome;
  std::vector<ColumnSchema> columns;  // column order defines design order
};

// Reads a schema sidecar (JSON): {"outcome": ..., "columns": [...]}.
DatasetSchema read_schema(const std::string& path);

// Loads counts + covariates. Categorical columns are dummy coded with the
// reference (declared, else first level in sorted order) dropped; the new
// columns are named "<col>:<level>". Rows with missing fields are dropped
// and counted; a negative or non-integer outcome is an error naming the
// data row. Columns absent from the schema are ignored.
CountDataset load_csv(const std::string& path, const DatasetSchema& schema);

// Convenience: schema sidecar next to the data file ("<stem>.schema.json").
CountDataset load_csv(const std::string& path);

// Encodes new covariate rows with a fitted dataset's encoder; an unseen
// categorical level is an error naming the level.
MatrixXd encode_rows(const std::vector<EncodedColumn>& encoder,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

// Expands counts into the per-category binary transition records
// (1,1,...,1,0): for each i one record per s = 0..Y_i.
AugmentedDataset augment(const CountDataset& data, bool include_covariates = true);

// Train/test split without replacement; |train| = round(fraction * n),
// half away from zero. Deterministic per seed.
SubsampleSplit subsample(int n, double fraction, std::uint64_t seed);
SubsampleSplit subsample_fixed(int n, int train_size, std::uint64_t seed);

// Largest observed count.
int max_observed(const CountDataset& data);

// Subset of rows (by index) sharing the parent's encoder.
CountDataset take_rows(const CountDataset& data, const std::vector<int>& indices);

}  // namespace ctm
