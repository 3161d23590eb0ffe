#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dppsgd/jacobi.hpp"

namespace dppsgd {

using MultiIndex = std::vector<int>;

/// First p multi-indices of dimension d in graded lexical order: total degree
/// first, then ascending lexicographic with coordinate 0 most significant.
std::vector<MultiIndex> graded_lex_indices(int d, int p);

/// Multivariate OPE kernel K_q^(p) on [-1,1]^d: tensor-product orthonormal
/// basis phi_k(x) = prod_j phi_{k_j}(x_j) over the graded-lex index prefix.
/// Immutable after construction; all evaluations are pure.
class OpeSpec {
 public:
  /// bases.size() defines d; each basis must cover the per-coordinate degrees
  /// of the first p graded-lex indices.
  OpeSpec(std::vector<JacobiBasis> bases, int p);

  int dim() const { return static_cast<int>(bases_.size()); }
  int rank() const { return p_; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const JacobiBasis& basis(int j) const { return bases_[j]; }
  /// Largest exponent of coordinate j among the index prefix.
  int degree(int j) const { return degrees_[j]; }

  /// phi_k(x). Errors when x is outside [-1,1]^d or k >= p.
  double eval_phi(int k, const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// K(x, y) = sum_{k<p} phi_k(x) phi_k(y), summed in fixed index order.
  double kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y) const;

  /// K(x, x) = sum_{k<p} phi_k(x)^2; strictly positive.
  double kernel_diag(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Separable reference density q(x) = prod_j q_j(x_j).
  double density(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// N x p matrix of basis values phi_k(z_i) over the rows of points.
  Eigen::MatrixXd feature_matrix(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

 private:
  void check_in_cube(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Per-coordinate value tables phi_0..phi_deg(j) at x, concatenated.
  void axis_tables(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd& flat) const;

  std::vector<JacobiBasis> bases_;
  int p_;
  std::vector<MultiIndex> indices_;
  std::vector<int> degrees_;
  std::vector<int> table_offsets_;  // start of coordinate j's block in a flat table
  int table_size_ = 0;
};

}  // namespace dppsgd
