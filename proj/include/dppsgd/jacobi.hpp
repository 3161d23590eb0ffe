#pragma once

#include <Eigen/Dense>

namespace dppsgd {

/// Parameters of the weight q(x) ∝ (1+x)^alpha (1-x)^beta on [-1, 1].
/// Both exponents are kept inside [-1/2, 1/2].
struct JacobiParams {
  double alpha = 0.0;
  double beta = 0.0;
};

inline constexpr double kJacobiParamBound = 0.5;

/// Mean of X when X has the probability-normalized density above.
double jacobi_weight_mean(const JacobiParams& p);

/// Variance of X under the same density.
double jacobi_weight_variance(const JacobiParams& p);

/// Least-squares moment match: the (alpha, beta) in [-1/2,1/2]^2 minimizing
/// (mean(a,b) - mean)^2 + (var(a,b) - variance)^2. Interior targets are hit
/// exactly; infeasible targets land on the boundary of the square.
/// Requires |mean| < 1 and 0 < variance < 1.
JacobiParams fit_jacobi_params(double mean, double variance);

/// Three-term recurrence coefficients of the orthonormal family w.r.t. the
/// probability-normalized weight:
///   b_{n+1} phi_{n+1}(x) = (x - a_n) phi_n(x) - b_n phi_{n-1}(x).
/// a holds a_0..a_m, b holds b_0..b_m with b_0 = 0 (unused). For Nevai-class
/// weights b_n -> 1/2.
struct JacobiRecurrence {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};
JacobiRecurrence jacobi_recurrence(const JacobiParams& p, int max_degree);

/// Orthonormal Jacobi polynomials w.r.t. the probability-normalized weight,
/// evaluated by forward recurrence. Immutable after construction.
class JacobiBasis {
 public:
  JacobiBasis(const JacobiParams& params, int max_degree);

  /// phi_n(x), |x| <= 1, n <= max_degree.
  double eval(int n, double x) const;

  /// Writes phi_0(x)..phi_m(x) into out (size m+1 required).
  void eval_all(double x, Eigen::Ref<Eigen::VectorXd> out) const;

  /// Rank-m Christoffel-Darboux kernel K^(m)(x,y) = sum_{k<m} phi_k(x)phi_k(y),
  /// evaluated through the CD form away from the diagonal and by direct sum
  /// when |x-y| < 1e-8. Requires 1 <= m <= max_degree.
  double cd_kernel(int m, double x, double y) const;

  /// Normalized density q(x); 0 or +inf at the endpoints when an exponent is
  /// nonzero.
  double pdf(double x) const;

  double log_norm() const { return log_norm_; }
  const JacobiParams& params() const { return params_; }
  int max_degree() const { return max_degree_; }
  const Eigen::VectorXd& recur_a() const { return rec_.a; }
  const Eigen::VectorXd& recur_b() const { return rec_.b; }

 private:
  JacobiParams params_;
  int max_degree_;
  JacobiRecurrence rec_;
  double log_norm_;
};

/// n-point Gauss rule for the probability-normalized weight (Golub-Welsch).
/// Weights sum to 1; polynomials up to degree 2n-1 are integrated exactly.
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
QuadratureRule gauss_jacobi_rule(const JacobiParams& p, int n);

}  // namespace dppsgd
