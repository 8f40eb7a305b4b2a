#pragma once

#include "ma/common.hpp"
#include "ma/dataset.hpp"

#include <string>
#include <vector>

namespace ma {

enum class PenaltyScheme { eq5, appC2 };

PenaltyScheme scheme_from_string(const std::string& s);
std::string to_string(PenaltyScheme s);

/// Sparse logistic model with the per-feature L1 penalty weights it was
/// fitted under. Eliminated coefficients are exact zeros.
struct LinearModel {
  VectorXd theta;
  double intercept = 0;
  VectorXd penalty_weights;
  PenaltyScheme scheme = PenaltyScheme::eq5;
  std::vector<std::string> feature_names;
  bool converged = false;

  template <class Derived>
  double predict(const Eigen::MatrixBase<Derived>& row) const {
    return sigmoid(theta.dot(row) + intercept);
  }
  VectorXd predict(const MatrixXd& x) const {
    return sigmoid(((x * theta).array() + intercept)).matrix();
  }
  VectorXd margins(const MatrixXd& x) const { return (x * theta).array() + intercept; }
};

struct LassoFitParams {
  double lambda = 0.01;  // base penalty, eq5 scheme
  double alpha = 0.0;    // missingness-reliance strength
  double beta = 1.0;     // count offset, appC2 scheme
  PenaltyScheme scheme = PenaltyScheme::eq5;
  int max_iterations = 10000;  // full coordinate cycles
  double tolerance = 1e-8;     // max coefficient change per cycle
};

/// Per-feature penalties from the missingness mask. eq5: lambda + alpha *
/// column mean; appC2: (column sum + beta) / n * alpha.
VectorXd penalty_weights(const MaskMatrix& mask, const LassoFitParams& params);

/// Column scaling by lambda_prime / lambda_j; coefficients fitted on the
/// rescaled matrix map back via the same factors.
MatrixXd rescale(const MatrixXd& x, const VectorXd& lambda_j, double lambda_prime);

/// Mean logistic loss of (theta, intercept) on x, y in {0,1}.
double logistic_loss(const MatrixXd& x, const VectorXd& y, const VectorXd& theta,
                     double intercept);

/// Gradient of the mean logistic loss; last entry is the intercept component.
VectorXd logistic_grad(const MatrixXd& x, const VectorXd& y, const VectorXd& theta,
                       double intercept);

/// Penalized objective: mean logistic loss + sum_j lambda_j |theta_j|.
double lasso_objective(const MatrixXd& x, const VectorXd& y, const VectorXd& lambda_j,
                       const VectorXd& theta, double intercept);

/// Cyclic coordinate descent with soft-thresholding on the quadratic
/// majorization of the logistic loss (curvature bound 1/4). Intercept
/// unpenalized. Direct weighted-penalty path.
LinearModel fit_lasso(const MatrixXd& x, const VectorXd& y, const VectorXd& lambda_j,
                      const LassoFitParams& params);

/// MA-LASSO: penalty weights from the mask, then the rescaling reduction
/// when all lambda_j > 0, the direct path otherwise.
LinearModel fit_ma_lasso(const ImputedDataset& data, const LassoFitParams& params);

}  // namespace ma
