#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dppsgd/dataset.hpp"
#include "dppsgd/kde.hpp"
#include "dppsgd/ope.hpp"
#include "dppsgd/rng.hpp"

namespace dppsgd {

/// Reweighted OPE kernel restricted to the data,
///   K(i,j) = sqrt(q(z_i)/g(z_i)) K_q^(p)(z_i,z_j) sqrt(q(z_j)/g(z_j)),
/// held as its exact rank-<=p factor: K = factor * factor^T. Entries are
/// reproduced on demand; the dense matrix is materialized only for small-N
/// diagnostics and tests.
struct RestrictedKernel {
  Eigen::MatrixXd factor;  // N x p

  Eigen::Index n() const { return factor.rows(); }
  int rank_bound() const { return static_cast<int>(factor.cols()); }
  double entry(Eigen::Index i, Eigen::Index j) const {
    return factor.row(i).dot(factor.row(j));
  }
  Eigen::MatrixXd materialize() const { return factor * factor.transpose(); }
  /// Eigenvalues of the operator (1/N) K, descending, nonzero part only.
  Eigen::VectorXd operator_eigenvalues() const;
};

/// O(N^2 p) assembly of the restricted kernel. gamma_tilde is evaluated at
/// every data point (always > 0 by self-inclusion); a non-finite entry (e.g.
/// q = +inf at an exact cube corner with a negative exponent) throws with the
/// offending point identified.
RestrictedKernel assemble_kernel_matrix(const OpeSpec& spec, const KdeSpec& kde,
                                        const DataSet& ds);

/// Rank-p orthogonal projection over the N items: P = basis * basis^T with
/// Euclidean-orthonormal columns. marginals[i] = P_ii is the inclusion
/// probability of item i; the paper's L2(gamma_hat_N) kernel has diagonal
/// N * P_ii.
struct ProjectionKernel {
  Eigen::MatrixXd basis;          // N x p, orthonormal columns
  Eigen::VectorXd marginals;      // row squared norms; sum = p
  Eigen::VectorXd input_spectrum; // eigenvalues of (1/N) K before saturation
  bool degenerate_tie = false;    // p-th eigenvalue ~ 0: eigenvector choice arbitrary

  Eigen::Index n() const { return basis.rows(); }
  int rank() const { return static_cast<int>(basis.cols()); }
};

/// Spectral saturation: eigendecompose (1/N) K and set the top-p eigenvalues
/// to 1, the rest to 0. Computed as a thin SVD of the factor. Requires
/// N >= p; flags a degenerate tie when the p-th eigenvalue is below 1e-12.
ProjectionKernel saturate(const RestrictedKernel& rk, int p);

/// A drawn minibatch: exactly p distinct item indices. Weights are filled by
/// the estimator layer.
struct Minibatch {
  std::vector<Eigen::Index> items;
  Eigen::VectorXd weights;
};

/// Exact projection-DPP sample via the sequential chain rule: draw an item
/// with probability (residual row norm^2)/(remaining rank), then eliminate
/// the chosen direction from all rows. O(Np^2) work, O(Np) scratch.
Minibatch sample_projection_dpp(const ProjectionKernel& pk, Rng& rng);

/// Continuous OPE on [-1,1]^d discretized on a tensor Gauss-Jacobi grid, for
/// the smoothed estimator. Feature columns are re-orthonormalized (QR) so the
/// discrete kernel is an exact projection over the nodes.
struct GridOpeSampler {
  Eigen::MatrixXd nodes;       // M^d x d grid points
  Eigen::VectorXd quad_weight; // product quadrature weight per node
  ProjectionKernel pk;         // projection over the nodes
};

/// Requires M^d <= 1e6 and M^d * p within memory bounds; errors otherwise.
GridOpeSampler make_grid_ope_sampler(const OpeSpec& spec, int nodes_per_axis);

/// Draw p grid points (rows). Convenience wrapper over the prepared sampler.
Eigen::MatrixXd sample_grid_ope(const GridOpeSampler& sampler, Rng& rng);
Eigen::MatrixXd grid_ope_sampler(const OpeSpec& spec, int nodes_per_axis, Rng& rng);

/// Kernel artifact: text header "N p" then N rows of p factor entries, then
/// the N marginals, full precision. Round-trips bit-exactly.
void save_projection_kernel(const ProjectionKernel& pk, const std::string& path);
ProjectionKernel load_projection_kernel(const std::string& path);

/// Fit per-coordinate Jacobi parameters to the marginal moments of the data
/// and build the rank-p OPE over them.
OpeSpec ope_from_data(const DataSet& ds, int p);

}  // namespace dppsgd
