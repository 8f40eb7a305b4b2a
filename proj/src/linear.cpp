#include "ma/linear.hpp"

#include <algorithm>
#include <cmath>

namespace ma {

PenaltyScheme scheme_from_string(const std::string& s) {
  if (s == "eq5") return PenaltyScheme::eq5;
  if (s == "appC2" || s == "appc2") return PenaltyScheme::appC2;
  throw ConfigError("unknown penalty scheme '" + s + "'");
}

std::string to_string(PenaltyScheme s) {
  return s == PenaltyScheme::eq5 ? "eq5" : "appC2";
}

VectorXd penalty_weights(const MaskMatrix& mask, const LassoFitParams& params) {
  const auto n = static_cast<double>(mask.rows());
  VectorXd out(mask.cols());
  for (Eigen::Index j = 0; j < mask.cols(); ++j) {
    double miss = 0;
    for (Eigen::Index i = 0; i < mask.rows(); ++i) miss += mask(i, j);
    if (params.scheme == PenaltyScheme::eq5)
      out[j] = params.lambda + params.alpha * (miss / n);
    else
      out[j] = (miss + params.beta) / n * params.alpha;
  }
  return out;
}

MatrixXd rescale(const MatrixXd& x, const VectorXd& lambda_j, double lambda_prime) {
  if (lambda_j.size() != x.cols()) throw ContractError("rescale: penalty arity mismatch");
  for (Eigen::Index j = 0; j < lambda_j.size(); ++j)
    if (lambda_j[j] <= 0) throw ContractError("rescale: requires strictly positive penalties");
  return x * (lambda_prime * lambda_j.cwiseInverse()).asDiagonal();
}

double logistic_loss(const MatrixXd& x, const VectorXd& y, const VectorXd& theta,
                     double intercept) {
  const ArrayXd z = (x * theta).array() + intercept;
  // log(1 + exp(-s*z)) with s = 2y - 1, computed stably.
  const ArrayXd sz = (2.0 * y.array() - 1.0) * z;
  double total = 0;
  for (Eigen::Index i = 0; i < sz.size(); ++i) {
    const double v = sz[i];
    total += v > 0 ? std::log1p(std::exp(-v)) : -v + std::log1p(std::exp(v));
  }
  return total / static_cast<double>(y.size());
}

VectorXd logistic_grad(const MatrixXd& x, const VectorXd& y, const VectorXd& theta,
                       double intercept) {
  const auto n = static_cast<double>(y.size());
  const ArrayXd z = (x * theta).array() + intercept;
  const VectorXd r = y.array() - sigmoid(z);  // negative residual of the gradient
  VectorXd g(x.cols() + 1);
  g.head(x.cols()) = -(x.transpose() * r) / n;
  g[x.cols()] = -r.sum() / n;
  return g;
}

double lasso_objective(const MatrixXd& x, const VectorXd& y, const VectorXd& lambda_j,
                       const VectorXd& theta, double intercept) {
  return logistic_loss(x, y, theta, intercept) + lambda_j.dot(theta.cwiseAbs());
}

namespace {

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

}  // namespace

LinearModel fit_lasso(const MatrixXd& x, const VectorXd& y, const VectorXd& lambda_j,
                      const LassoFitParams& params) {
  const auto n = x.rows();
  const auto d = x.cols();
  if (y.size() != n) throw ContractError("fit_lasso: label length mismatch");
  if (lambda_j.size() != d) throw ContractError("fit_lasso: penalty arity mismatch");
  if (params.tolerance <= 0) throw ConfigError("fit_lasso: tolerance must be positive");
  for (Eigen::Index i = 0; i < n; ++i)
    if (y[i] != 0.0 && y[i] != 1.0) throw ContractError("fit_lasso: labels must be binary");
  if (x.hasNaN()) throw ContractError("fit_lasso: NA cells in design matrix; impute first");

  // Per-coordinate curvature bounds of the majorized loss.
  VectorXd curvature(d);
  for (Eigen::Index j = 0; j < d; ++j)
    curvature[j] = x.col(j).squaredNorm() / (4.0 * static_cast<double>(n));

  LinearModel model;
  model.theta = VectorXd::Zero(d);
  model.intercept = 0;
  model.penalty_weights = lambda_j;
  model.scheme = params.scheme;

  VectorXd margins = VectorXd::Zero(n);
  for (int cycle = 0; cycle < params.max_iterations; ++cycle) {
    double max_change = 0;

    for (Eigen::Index j = 0; j < d; ++j) {
      if (curvature[j] <= 0) continue;  // all-zero column stays at zero
      const VectorXd r = y.array() - sigmoid(margins.array());
      const double grad = -x.col(j).dot(r) / static_cast<double>(n);
      const double updated =
          soft_threshold(curvature[j] * model.theta[j] - grad, lambda_j[j]) / curvature[j];
      const double delta = updated - model.theta[j];
      if (delta != 0.0) {
        margins += delta * x.col(j);
        model.theta[j] = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }

    {
      const VectorXd r = y.array() - sigmoid(margins.array());
      const double grad = -r.sum() / static_cast<double>(n);
      const double delta = -grad / 0.25;
      if (delta != 0.0) {
        margins.array() += delta;
        model.intercept += delta;
        max_change = std::max(max_change, std::abs(delta));
      }
    }

    if (max_change < params.tolerance) {
      model.converged = true;
      break;
    }
  }
  return model;
}

LinearModel fit_ma_lasso(const ImputedDataset& data, const LassoFitParams& params) {
  if (params.scheme == PenaltyScheme::eq5 && params.lambda <= 0)
    throw ConfigError("fit_ma_lasso: eq5 scheme requires lambda > 0");
  const VectorXd lambda_j = penalty_weights(data.mask, params);

  LinearModel model;
  const bool all_positive = (lambda_j.array() > 0).all();
  if (all_positive) {
    const double lambda_prime = lambda_j.mean();
    const MatrixXd scaled = rescale(data.x, lambda_j, lambda_prime);
    model = fit_lasso(scaled, data.labels, VectorXd::Constant(lambda_j.size(), lambda_prime),
                      params);
    model.theta = model.theta.cwiseProduct(lambda_prime * lambda_j.cwiseInverse());
  } else {
    // Zero penalties cannot be rescaled away; solve with per-feature
    // penalties directly.
    model = fit_lasso(data.x, data.labels, lambda_j, params);
  }
  model.penalty_weights = lambda_j;
  model.scheme = params.scheme;
  model.feature_names = data.feature_names;
  return model;
}

}  // namespace ma
