#pragma once

#include <Eigen/Dense>

#include "dppsgd/dataset.hpp"
#include "dppsgd/dpp.hpp"
#include "dppsgd/kde.hpp"
#include "dppsgd/loss.hpp"
#include "dppsgd/ope.hpp"
#include "dppsgd/rng.hpp"

namespace dppsgd {

/// One minibatch gradient estimate; items_touched counts the item-gradient
/// evaluations charged to the budget.
struct GradientEstimate {
  Eigen::VectorXd vector;
  long items_touched = 0;
};

/// Poisson benchmark: each item enters independently with probability p/N,
/// weights fixed at 1/p (division by the expected size, not the realized
/// one). The penalty gradient lambda0*theta is added deterministically.
GradientEstimate xi_poisson(const DataSet& ds, const LossFn& loss,
                            const Eigen::Ref<const Eigen::VectorXd>& theta, int p, Rng& rng);

/// DPP estimator: sum over the batch of grad L(z_i, theta)/(N P_ii) plus the
/// penalty gradient. Fills batch weights; a chosen marginal below 1e-12 is an
/// error (ill-conditioned weight).
GradientEstimate xi_dpp(const DataSet& ds, const LossFn& loss,
                        const Eigen::Ref<const Eigen::VectorXd>& theta,
                        const ProjectionKernel& pk, Minibatch& batch);

/// Smoothed estimator over a continuous OPE sample (rows of points):
/// sum_j smoothed_grad(w_j)/(q(w_j) K(w_j,w_j)) plus the penalty gradient.
/// Each evaluation sweeps the dataset, so items_touched = N * p.
GradientEstimate xi_smoothed(const DataSet& ds, const LossFn& loss,
                             const Eigen::Ref<const Eigen::VectorXd>& theta,
                             const OpeSpec& spec, const KdeSpec& kde,
                             const Eigen::Ref<const Eigen::MatrixXd>& points);

}  // namespace dppsgd
