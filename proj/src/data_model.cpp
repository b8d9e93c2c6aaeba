#include "ctm/data_model.hpp"

#include "ctm/csv.hpp"
#include "ctm/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

namespace ctm {

namespace {

bool is_missing(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan";
}

double parse_number(const std::string& s, std::size_t row, const std::string& col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("row " + std::to_string(row) + ": cannot parse '" + s +
                             "' in column " + col);
  }
}

}  // namespace

DatasetSchema read_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema file: " + path);
  nlohmann::json j;
  in >> j;
  DatasetSchema schema;
  schema.outcome = j.at("outcome").get<std::string>();
  for (const auto& c : j.at("columns")) {
    ColumnSchema cs;
    cs.name = c.at("name").get<std::string>();
    const std::string kind = c.at("kind").get<std::string>();
    if (kind == "numeric") {
      cs.kind = ColumnKind::Numeric;
    } else if (kind == "categorical") {
      cs.kind = ColumnKind::Categorical;
      if (c.contains("reference")) cs.reference = c["reference"].get<std::string>();
    } else {
      throw std::runtime_error("schema: unknown column kind '" + kind + "'");
    }
    schema.columns.push_back(std::move(cs));
  }
  return schema;
}

CountDataset load_csv(const std::string& path, const DatasetSchema& schema) {
  const CsvTable table = read_csv(path);
  const std::ptrdiff_t yc = table.find(schema.outcome);
  if (yc < 0) throw std::runtime_error("outcome column '" + schema.outcome + "' not found in " + path);

  std::vector<std::ptrdiff_t> col_idx;
  for (const auto& cs : schema.columns) {
    const std::ptrdiff_t j = table.find(cs.name);
    if (j < 0) throw std::runtime_error("column '" + cs.name + "' not found in " + path);
    col_idx.push_back(j);
  }

  // drop rows with missing fields in used columns
  std::vector<std::size_t> kept;
  Eigen::Index dropped = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    bool miss = is_missing(table.rows[r][yc]);
    for (std::size_t k = 0; k < col_idx.size() && !miss; ++k)
      miss = is_missing(table.rows[r][col_idx[k]]);
    if (miss) {
      ++dropped;
    } else {
      kept.push_back(r);
    }
  }

  CountDataset data;
  data.outcome_name = schema.outcome;
  data.rows_dropped = dropped;
  const Eigen::Index n = static_cast<Eigen::Index>(kept.size());
  data.outcomes.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t r = kept[i];
    const double v = parse_number(table.rows[r][yc], r + 1, schema.outcome);
    if (v < 0.0 || v != std::floor(v))
      throw std::runtime_error("row " + std::to_string(r + 1) +
                               ": outcome must be a nonnegative integer, got '" +
                               table.rows[r][yc] + "'");
    data.outcomes[i] = static_cast<int>(v);
  }

  // build the encoder: declared levels or levels observed in the data
  std::vector<Eigen::Index> width(schema.columns.size(), 1);
  for (std::size_t k = 0; k < schema.columns.size(); ++k) {
    const ColumnSchema& cs = schema.columns[k];
    EncodedColumn enc;
    enc.name = cs.name;
    enc.kind = cs.kind;
    if (cs.kind == ColumnKind::Categorical) {
      std::set<std::string> levels;
      for (const std::size_t r : kept) levels.insert(table.rows[r][col_idx[k]]);
      std::string ref = cs.reference.value_or(levels.empty() ? "" : *levels.begin());
      if (cs.reference && !levels.count(*cs.reference))
        levels.insert(*cs.reference);  // a declared reference may be unobserved
      enc.reference = ref;
      for (const auto& lv : levels)
        if (lv != ref) enc.levels.push_back(lv);
      width[k] = static_cast<Eigen::Index>(enc.levels.size());
    }
    data.encoder.push_back(std::move(enc));
  }

  Eigen::Index p = 0;
  for (std::size_t k = 0; k < schema.columns.size(); ++k) p += width[k];
  data.covariates = MatrixXd::Zero(n, p);

  Eigen::Index col = 0;
  for (std::size_t k = 0; k < schema.columns.size(); ++k) {
    const EncodedColumn& enc = data.encoder[k];
    if (enc.kind == ColumnKind::Numeric) {
      for (Eigen::Index i = 0; i < n; ++i)
        data.covariates(i, col) =
            parse_number(table.rows[kept[i]][col_idx[k]], kept[i] + 1, enc.name);
      data.column_names.push_back(enc.name);
      ++col;
    } else {
      for (std::size_t l = 0; l < enc.levels.size(); ++l)
        data.column_names.push_back(enc.name + ":" + enc.levels[l]);
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::string& v = table.rows[kept[i]][col_idx[k]];
        if (v != enc.reference) {
          const auto it = std::find(enc.levels.begin(), enc.levels.end(), v);
          data.covariates(i, col + (it - enc.levels.begin())) = 1.0;
        }
      }
      col += width[k];
    }
  }

  std::set<std::string> unique_names(data.column_names.begin(), data.column_names.end());
  if (unique_names.size() != data.column_names.size())
    throw std::runtime_error("duplicate design column names after encoding");
  return data;
}

CountDataset load_csv(const std::string& path) {
  std::string schema_path = path;
  const auto dot = schema_path.rfind(".csv");
  if (dot != std::string::npos) schema_path = schema_path.substr(0, dot);
  schema_path += ".schema.json";
  return load_csv(path, read_schema(schema_path));
}

MatrixXd encode_rows(const std::vector<EncodedColumn>& encoder,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  Eigen::Index p = 0;
  for (const auto& enc : encoder)
    p += enc.kind == ColumnKind::Numeric ? 1 : static_cast<Eigen::Index>(enc.levels.size());
  MatrixXd X = MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), p);
  Eigen::Index col = 0;
  for (const auto& enc : encoder) {
    std::ptrdiff_t j = -1;
    for (std::size_t h = 0; h < header.size(); ++h)
      if (header[h] == enc.name) j = static_cast<std::ptrdiff_t>(h);
    if (j < 0) throw std::runtime_error("column '" + enc.name + "' missing from prediction data");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string& v = rows[i][j];
      if (enc.kind == ColumnKind::Numeric) {
        X(static_cast<Eigen::Index>(i), col) = parse_number(v, i + 1, enc.name);
      } else if (v != enc.reference) {
        const auto it = std::find(enc.levels.begin(), enc.levels.end(), v);
        if (it == enc.levels.end())
          throw std::runtime_error("unknown level '" + v + "' for column " + enc.name);
        X(static_cast<Eigen::Index>(i), col + (it - enc.levels.begin())) = 1.0;
      }
    }
    col += enc.kind == ColumnKind::Numeric ? 1 : static_cast<Eigen::Index>(enc.levels.size());
  }
  return X;
}

AugmentedDataset augment(const CountDataset& data, bool include_covariates) {
  Eigen::Index total = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) total += data.outcomes[i] + 1;
  AugmentedDataset aug;
  aug.obs.resize(total);
  aug.category.resize(total);
  aug.transition.resize(total);
  aug.source = &data;
  aug.include_covariates = include_covariates;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const int y = data.outcomes[i];
    for (int s = 0; s <= y; ++s, ++r) {
      aug.obs[r] = static_cast<int>(i);
      aug.category[r] = s;
      aug.transition[r] = s < y ? 1.0 : 0.0;
    }
  }
  return aug;
}

SubsampleSplit subsample(int n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("subsample: fraction must lie in (0, 1)");
  if (n < 2) throw std::invalid_argument("subsample: need at least two observations");
  const int train = static_cast<int>(std::floor(fraction * n + 0.5));
  return subsample_fixed(n, std::clamp(train, 1, n - 1), seed);
}

SubsampleSplit subsample_fixed(int n, int train_size, std::uint64_t seed) {
  if (train_size <= 0 || train_size >= n)
    throw std::invalid_argument("subsample: train size must lie strictly between 0 and n");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  SubsampleSplit split;
  split.seed = seed;
  split.fraction = static_cast<double>(train_size) / n;
  split.train_indices.assign(perm.begin(), perm.begin() + train_size);
  split.test_indices.assign(perm.begin() + train_size, perm.end());
  return split;
}

int max_observed(const CountDataset& data) {
  if (data.n() == 0) throw std::invalid_argument("max_observed: empty dataset");
  return data.outcomes.maxCoeff();
}

CountDataset take_rows(const CountDataset& data, const std::vector<int>& indices) {
  CountDataset out;
  out.outcome_name = data.outcome_name;
  out.column_names = data.column_names;
  out.encoder = data.encoder;
  out.outcomes.resize(static_cast<Eigen::Index>(indices.size()));
  out.covariates.resize(static_cast<Eigen::Index>(indices.size()), data.p());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    out.outcomes[static_cast<Eigen::Index>(k)] = data.outcomes[indices[k]];
    out.covariates.row(static_cast<Eigen::Index>(k)) = data.covariates.row(indices[k]);
  }
  return out;
}

}  // namespace ctm
