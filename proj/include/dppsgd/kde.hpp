#pragma once

#include <Eigen/Dense>

#include "dppsgd/dataset.hpp"
#include "dppsgd/loss.hpp"

namespace dppsgd {

/// Single-bandwidth kernel density estimator over a dataset, with a product
/// Epanechnikov kernel k(u) = prod_j (3/4)(1 - u_j^2) on [-1,1]^d.
/// The referenced dataset must outlive the spec.
struct KdeSpec {
  const DataSet* data = nullptr;
  double bandwidth = 0.0;

  int dim() const { return data->dim(); }
};

/// Canonical theory bandwidth h = N^(-1/d).
double kde_bandwidth_canonical(Eigen::Index n, int d);

/// Silverman-style rule h = 2 * sigma_bar * N^(-1/(d+4)) with sigma_bar the
/// mean per-coordinate standard deviation; a smooth-density default for the
/// kernel-reweighting pipeline.
double kde_bandwidth_silverman(const DataSet& ds);

/// gamma_tilde(z) = (1/(N h^d)) sum_i k((z - z_i)/h); exact O(N) sum, >= 0,
/// and exactly 0 farther than h from every data point.
double kde_density(const KdeSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& z);

/// gamma_tilde evaluated at every data point (always > 0: self-inclusion).
Eigen::VectorXd kde_density_at_data(const KdeSpec& spec);

/// Kernel-smoothed gradient field
///   (1/(N h^d)) sum_i grad L(z_i, theta) k((w - z_i)/h).
Eigen::VectorXd kde_smoothed_gradient(const KdeSpec& spec, const LossFn& loss,
                                      const Eigen::Ref<const Eigen::VectorXd>& theta,
                                      const Eigen::Ref<const Eigen::VectorXd>& w);

}  // namespace dppsgd
