#include "dppsgd/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace dppsgd {

namespace {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void check_dims(const LossFn& loss, Eigen::Index xdim, Eigen::Index tdim) {
  if (xdim != tdim || static_cast<int>(tdim) != loss.param_dim) {
    throw std::invalid_argument("loss: feature/parameter dimension mismatch");
  }
}

}  // namespace

Eigen::VectorXd item_gradient(const LossFn& loss,
                              const Eigen::Ref<const Eigen::RowVectorXd>& x, double y,
                              const Eigen::Ref<const Eigen::VectorXd>& theta) {
  check_dims(loss, x.size(), theta.size());
  const double margin = x * theta;
  if (loss.kind == LossKind::Linear) {
    return (margin - y) * x.transpose();
  }
  return -y * sigmoid(-y * margin) * x.transpose();
}

double item_loss(const LossFn& loss, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                 double y, const Eigen::Ref<const Eigen::VectorXd>& theta) {
  check_dims(loss, x.size(), theta.size());
  const double margin = x * theta;
  if (loss.kind == LossKind::Linear) {
    const double r = margin - y;
    return 0.5 * r * r;
  }
  // log(1 + exp(-y m)), stably.
  const double t = -y * margin;
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double objective(const DataSet& ds, const LossFn& loss,
                 const Eigen::Ref<const Eigen::VectorXd>& theta) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    sum += item_loss(loss, ds.features(i), ds.labels[i], theta);
  }
  return sum / static_cast<double>(ds.n()) + 0.5 * loss.lambda0 * theta.squaredNorm();
}

Eigen::VectorXd grad_full(const DataSet& ds, const LossFn& loss,
                          const Eigen::Ref<const Eigen::VectorXd>& theta) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    g += item_gradient(loss, ds.features(i), ds.labels[i], theta);
  }
  g /= static_cast<double>(ds.n());
  g += loss.lambda0 * theta;
  return g;
}

Eigen::MatrixXd item_gradient_matrix(const DataSet& ds, const LossFn& loss,
                                     const Eigen::Ref<const Eigen::VectorXd>& theta) {
  Eigen::MatrixXd g(ds.n(), theta.size());
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    g.row(i) = item_gradient(loss, ds.features(i), ds.labels[i], theta).transpose();
  }
  return g;
}

double classification_error(const DataSet& ds,
                            const Eigen::Ref<const Eigen::VectorXd>& theta) {
  Eigen::Index wrong = 0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const double margin = ds.features(i) * theta;
    const double pred = margin >= 0.0 ? 1.0 : -1.0;
    if (pred * ds.labels[i] < 0.0) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(ds.n());
}

}  // namespace dppsgd
