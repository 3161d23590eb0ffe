#pragma once

#include <Eigen/Dense>

#include "dppsgd/dataset.hpp"

namespace dppsgd {

enum class LossKind { Linear, Logistic };

/// Per-item loss with an l2 penalty (lambda0/2)||theta||^2. The penalty
/// gradient is added once at the estimator level, never per item.
struct LossFn {
  LossKind kind = LossKind::Linear;
  double lambda0 = 0.0;
  int param_dim = 0;
};

/// Gradient of the unpenalized per-item loss at (x, y).
/// Linear: (<x,theta> - y) x. Logistic: -y x sigmoid(-y <x,theta>).
Eigen::VectorXd item_gradient(const LossFn& loss,
                              const Eigen::Ref<const Eigen::RowVectorXd>& x, double y,
                              const Eigen::Ref<const Eigen::VectorXd>& theta);

double item_loss(const LossFn& loss, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                 double y, const Eigen::Ref<const Eigen::VectorXd>& theta);

/// Mean per-item loss plus the penalty.
double objective(const DataSet& ds, const LossFn& loss,
                 const Eigen::Ref<const Eigen::VectorXd>& theta);

/// Exact gradient: mean of item gradients plus lambda0 * theta.
Eigen::VectorXd grad_full(const DataSet& ds, const LossFn& loss,
                          const Eigen::Ref<const Eigen::VectorXd>& theta);

/// N x param_dim matrix of item gradients (row i = gradient at z_i).
Eigen::MatrixXd item_gradient_matrix(const DataSet& ds, const LossFn& loss,
                                     const Eigen::Ref<const Eigen::VectorXd>& theta);

/// Fraction of test rows with sign(<x,theta>) != y (labels in {-1,+1}).
double classification_error(const DataSet& ds, const Eigen::Ref<const Eigen::VectorXd>& theta);

}  // namespace dppsgd
