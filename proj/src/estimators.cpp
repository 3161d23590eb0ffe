#include "dppsgd/estimators.hpp"

#include <stdexcept>

namespace dppsgd {

GradientEstimate xi_poisson(const DataSet& ds, const LossFn& loss,
                            const Eigen::Ref<const Eigen::VectorXd>& theta, int p,
                            Rng& rng) {
  if (p < 1 || p > ds.n()) throw std::invalid_argument("xi_poisson: need 0 < p <= N");
  const double prob = static_cast<double>(p) / static_cast<double>(ds.n());
  GradientEstimate est;
  est.vector = Eigen::VectorXd::Zero(theta.size());
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    if (rng.uniform() < prob) {
      est.vector += item_gradient(loss, ds.features(i), ds.labels[i], theta);
      ++est.items_touched;
    }
  }
  est.vector /= static_cast<double>(p);
  est.vector += loss.lambda0 * theta;
  return est;
}

GradientEstimate xi_dpp(const DataSet& ds, const LossFn& loss,
                        const Eigen::Ref<const Eigen::VectorXd>& theta,
                        const ProjectionKernel& pk, Minibatch& batch) {
  if (pk.n() != ds.n()) throw std::invalid_argument("xi_dpp: kernel/data size mismatch");
  GradientEstimate est;
  est.vector = Eigen::VectorXd::Zero(theta.size());
  batch.weights.resize(static_cast<Eigen::Index>(batch.items.size()));
  const double n = static_cast<double>(ds.n());
  Eigen::Index slot = 0;
  for (const Eigen::Index i : batch.items) {
    const double marginal = pk.marginals[i];
    if (marginal < 1e-12) {
      throw std::runtime_error("xi_dpp: inclusion marginal below 1e-12 at item " +
                               std::to_string(i));
    }
    const double w = 1.0 / (n * marginal);
    batch.weights[slot++] = w;
    est.vector += w * item_gradient(loss, ds.features(i), ds.labels[i], theta);
  }
  est.vector += loss.lambda0 * theta;
  est.items_touched = static_cast<long>(batch.items.size());
  return est;
}

GradientEstimate xi_smoothed(const DataSet& ds, const LossFn& loss,
                             const Eigen::Ref<const Eigen::VectorXd>& theta,
                             const OpeSpec& spec, const KdeSpec& kde,
                             const Eigen::Ref<const Eigen::MatrixXd>& points) {
  GradientEstimate est;
  est.vector = Eigen::VectorXd::Zero(theta.size());
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    const Eigen::VectorXd w = points.row(j).transpose();
    const double denom = spec.density(w) * spec.kernel_diag(w);
    if (!(denom > 0.0)) {
      throw std::runtime_error("xi_smoothed: q(w) K(w,w) not positive at sample point");
    }
    est.vector += kde_smoothed_gradient(kde, loss, theta, w) / denom;
  }
  est.vector += loss.lambda0 * theta;
  est.items_touched = static_cast<long>(ds.n()) * static_cast<long>(points.rows());
  return est;
}

}  // namespace dppsgd
