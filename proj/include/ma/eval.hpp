#pragma once

#include "ma/common.hpp"
#include "ma/dataset.hpp"
#include "ma/model.hpp"
#include "ma/reliance.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ma {

/// Mann-Whitney AUROC: pairs with tied scores count one half. Throws
/// MetricError when only one class is present.
double auroc(const VectorXd& scores, const VectorXd& labels);

struct BootstrapCi {
  double lo = 0;
  double hi = 0;
  int skipped = 0;  // resamples where the statistic was undefined
};

using BootstrapStat = std::function<std::optional<double>(const std::vector<int>&)>;

/// Percentile bootstrap over row resamples. Statistics returning nullopt
/// (e.g. AUROC on a single-class resample) are skipped and tallied;
/// more than half skipped raises MetricError.
BootstrapCi bootstrap_ci(Eigen::Index n, const BootstrapStat& statistic, int b, double level,
                         std::uint64_t seed);

struct EvaluationReport {
  double auroc = 0;
  double auroc_lo = 0, auroc_hi = 0;
  double rho_hat = 0;
  double rho_lo = 0, rho_hi = 0;
  Eigen::Index n_test = 0;
  int bootstrap_b = 0;
  std::uint64_t seed = 0;
};

/// Test-set AUROC and empirical reliance with percentile bootstrap
/// intervals (widened to contain the point estimates).
EvaluationReport evaluate(const Model& model, const ImputedDataset& test, int b, double level,
                          std::uint64_t seed);

struct HyperParams {
  std::string estimator = "ma_dt";  // ma_dt | ma_lasso | ma_rf | ma_gbt
  double alpha = 0.0;
  int max_depth = 3;
  int min_samples_split = 2;
  int n_estimators = 0;        // 0: estimator default (50 forest, 10 boosted)
  double learning_rate = 0.1;  // boosted
  double lambda = 0.01;        // lasso, eq5 scheme
  double beta = 1.0;           // lasso, appC2 scheme
  PenaltyScheme scheme = PenaltyScheme::eq5;
  double feature_subsample = 0;  // forest; <= 0 means sqrt(d) per node
  std::uint64_t seed = 0;
};

Model fit_model(const HyperParams& params, const ImputedDataset& train);

enum class SelectionMode { alpha_star, alpha_zero, alpha_inf };

SelectionMode selection_mode_from_string(const std::string& s);
std::string to_string(SelectionMode m);

struct Candidate {
  HyperParams params;
  std::vector<double> fold_aurocs;
  std::vector<double> fold_rhos;
};

struct CandidateSummary {
  HyperParams params;
  double cv_auroc = 0;
  double cv_rho = 0;
};

struct SelectionResult {
  std::vector<CandidateSummary> candidates;
  int chosen = -1;
  double max_auroc = 0;
  double threshold = 0;  // 0.95 * max_auroc
  SelectionMode mode = SelectionMode::alpha_star;
};

/// alpha_star: lowest cv reliance among candidates within 95 percent of the
/// maximum cv AUROC, ties by lower alpha then first listed. alpha_zero:
/// best AUROC among alpha == 0 candidates. alpha_inf: best AUROC among
/// candidates with cv reliance <= 0.005 (falling back to the minimum-
/// reliance candidates when none qualify), ties by larger alpha.
SelectionResult select_model(const std::vector<Candidate>& candidates, SelectionMode mode);

struct PipelineConfig {
  bool standardize = true;
  ImputeStrategy imputation = ImputeStrategy::zero;
  double test_fraction = 0.2;
  int cv_folds = 3;
  int bootstrap_b = 1000;
  double ci_level = 0.95;
  int jobs = 1;
};

/// Fold-mean AUROC and reliance for every grid point, via stratified k-fold
/// CV on ds. Encoding and imputation statistics are refit on each fold's
/// training part.
std::vector<Candidate> cross_validate(const Dataset& ds, const PipelineConfig& config,
                                      const std::vector<HyperParams>& grid, std::uint64_t seed);

struct TrainResult {
  Model model;
  HyperParams chosen;
  SelectionResult selection;
  EvaluationReport report;
  Encoding encoding;
  ImputeStats impute_stats;
  std::uint64_t split_seed = 0;
};

/// Full protocol: split, CV selection inside the training split, refit on
/// the training split, evaluate on the held-out test split.
TrainResult train_pipeline(const Dataset& ds, const PipelineConfig& config,
                           const std::vector<HyperParams>& grid, SelectionMode mode,
                           std::uint64_t seed);

struct SweepRow {
  std::uint64_t split_seed = 0;
  HyperParams params;
  EvaluationReport report;
};

/// One row per (split seed, grid point): fit on the training split with
/// those hyperparameters, evaluate on the held-out test split. Rows are
/// emitted in grid order within each split regardless of job count.
std::vector<SweepRow> sweep(const Dataset& ds, const PipelineConfig& config,
                            const std::vector<HyperParams>& grid,
                            const std::vector<std::uint64_t>& split_seeds);

}  // namespace ma
