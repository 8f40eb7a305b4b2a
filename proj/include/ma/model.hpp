#pragma once

#include "ma/ensemble.hpp"
#include "ma/linear.hpp"
#include "ma/tree.hpp"

#include <variant>

namespace ma {

using Model = std::variant<LinearModel, DecisionTree, Ensemble>;

inline VectorXd predict(const Model& model, const MatrixXd& x) {
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

inline std::string estimator_name(const Model& model) {
  if (std::holds_alternative<LinearModel>(model)) return "ma_lasso";
  if (std::holds_alternative<DecisionTree>(model)) return "ma_dt";
  return std::get<Ensemble>(model).kind == EnsembleKind::forest ? "ma_rf" : "ma_gbt";
}

}  // namespace ma
