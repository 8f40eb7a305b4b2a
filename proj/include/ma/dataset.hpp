#pragma once

#include "ma/common.hpp"

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ma {

enum class ColumnKind { numeric, categorical };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<std::string> categories;  // vocabulary, categorical only
};

/// Column-typed tabular data with an explicit per-cell missingness mask and
/// binary labels. Categorical cells hold the category id; missing cells hold
/// NaN and are flagged in the mask (mask(i,j)=1 iff values(i,j) is NaN).
struct Dataset {
  std::vector<Column> columns;
  MatrixXd values;
  MaskMatrix mask;
  VectorXd labels;  // entries in {0, 1}
  std::string label_name;

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index d() const { return values.cols(); }

  /// Throws DataError if the mask/NaN correspondence or shape invariants
  /// are broken. Called after every transform in this module.
  void validate() const;
};

struct CsvSchema {
  std::string label_column;
  std::vector<std::pair<std::string, ColumnKind>> kind_overrides;
  std::set<std::string> na_tokens = {"", "na", "NA", "NaN"};
};

Dataset load_csv(const std::string& path, const CsvSchema& schema);
void save_csv(const Dataset& ds, const std::string& path);

Dataset subset(const Dataset& ds, const std::vector<int>& rows);

struct Standardization {
  bool enabled = false;
  VectorXd mean;
  VectorXd stddev;
  std::vector<std::uint8_t> clamped;  // 1 where a constant column's stddev was clamped to 1
};

/// Fitted encoding: one-hot expansion plan plus standardization statistics,
/// reusable on held-out data.
struct Encoding {
  std::vector<Column> source_columns;
  std::vector<std::string> feature_names;
  std::vector<int> source_of;       // expanded feature -> source column
  std::vector<int> category_of;     // category id for indicator features, -1 for numeric
  Standardization standardization;  // over expanded features; indicators untouched
};

struct EncodedDataset {
  Encoding encoding;
  MatrixXd x;  // NaN cells where missing
  MaskMatrix mask;
  VectorXd labels;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index d() const { return x.cols(); }
};

Encoding fit_encoding(const Dataset& ds, bool standardize);
EncodedDataset apply_encoding(const Dataset& ds, const Encoding& enc);
EncodedDataset encode(const Dataset& ds, bool standardize);

/// Category recovered from an observed one-hot group; nullopt when the group
/// is missing for that row.
std::optional<std::string> decode_onehot(const EncodedDataset& enc, Eigen::Index row,
                                         int source_column);

enum class ImputeStrategy { zero, mean_mode };

struct ImputeStats {
  ImputeStrategy strategy = ImputeStrategy::zero;
  VectorXd fill;  // per expanded feature
};

struct ImputedDataset {
  MatrixXd x;  // no NaN cells
  MaskMatrix mask;
  VectorXd labels;
  std::vector<std::string> feature_names;
  ImputeStats stats;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index d() const { return x.cols(); }
};

ImputeStats fit_impute(const EncodedDataset& ds, ImputeStrategy strategy);
ImputedDataset apply_impute(const EncodedDataset& ds, const ImputeStats& stats);
ImputedDataset impute(const EncodedDataset& ds, ImputeStrategy strategy);

enum class Mechanism { mcar, mar, mnar };

Mechanism mechanism_from_string(const std::string& s);
std::string to_string(Mechanism m);

/// Adds synthetic missingness to a ceil(feature_fraction * d) subset of
/// features, chosen uniformly at random. Existing missing cells stay missing.
Dataset inject_missingness(const Dataset& ds, Mechanism mechanism, double rate,
                           double feature_fraction, std::uint64_t seed);

/// Label-stratified 80/20-style split; deterministic given seed.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed);

/// Label-stratified k-fold index pairs (train, validation).
std::vector<std::pair<std::vector<int>, std::vector<int>>> kfold(const Dataset& ds, int k,
                                                                 std::uint64_t seed);

}  // namespace ma
