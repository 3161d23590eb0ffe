// Test-only oracles, independent of the library's computational paths:
//  - tanh-sinh quadrature on [-1,1] (handles the algebraic endpoint
//    singularities of Jacobi weights with negative exponents),
//  - Gram-Schmidt orthonormalization of monomials in long double,
//  - brute-force subset enumeration of projection DPPs,
//  - central finite differences.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dppsgd/rng.hpp"

namespace oracles {

// f receives (x, 1+x, 1-x); the complements are computed in a cancellation-
// free way so weights like (1-x)^(-1/2) stay accurate at the endpoints.
inline long double integrate_tanh_sinh(
    const std::function<long double(long double, long double, long double)>& f) {
  const long double h = 1.0L / 128.0L;
  const long double half_pi = 1.5707963267948966192313216916397514L;
  long double sum = 0.0L;
  for (int k = -768; k <= 768; ++k) {
    const long double t = k * h;
    const long double u = half_pi * sinhl(t);
    const long double x = tanhl(u);
    const long double one_plus = 2.0L / (1.0L + expl(-2.0L * u));
    const long double one_minus = 2.0L / (1.0L + expl(2.0L * u));
    const long double cu = coshl(u);
    const long double w = half_pi * coshl(t) / (cu * cu);
    const long double term = w * f(x, one_plus, one_minus);
    if (std::isfinite(static_cast<double>(term))) sum += term;
  }
  return sum * h;
}

inline long double int_pow(long double x, int k) {
  long double r = 1.0L;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// Integral of f against the probability-normalized Jacobi weight
// (1+x)^alpha (1-x)^beta.
inline long double integrate_jacobi(
    double alpha, double beta,
    const std::function<long double(long double)>& f) {
  auto weighted = [&](long double x, long double op, long double om) {
    return f(x) * powl(op, static_cast<long double>(alpha)) *
           powl(om, static_cast<long double>(beta));
  };
  auto mass = [&](long double x, long double op, long double om) {
    (void)x;
    return powl(op, static_cast<long double>(alpha)) *
           powl(om, static_cast<long double>(beta));
  };
  return integrate_tanh_sinh(weighted) / integrate_tanh_sinh(mass);
}

// Orthonormal polynomials w.r.t. the normalized Jacobi weight, built by
// modified Gram-Schmidt (with reorthogonalization) on monomials, in long
// double, with moment inner products from tanh-sinh quadrature.
class GramSchmidtOracle {
 public:
  GramSchmidtOracle(double alpha, double beta, int max_degree)
      : max_degree_(max_degree) {
    moments_.resize(2 * max_degree + 1);
    for (int k = 0; k <= 2 * max_degree; ++k) {
      moments_[k] = integrate_jacobi(alpha, beta,
                                     [k](long double x) { return int_pow(x, k); });
    }
    coeffs_.assign(max_degree + 1, std::vector<long double>(max_degree + 1, 0.0L));
    for (int n = 0; n <= max_degree; ++n) {
      std::vector<long double> v(max_degree + 1, 0.0L);
      v[n] = 1.0L;
      for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < n; ++j) {
          const long double c = inner(v, coeffs_[j]);
          for (int i = 0; i <= max_degree; ++i) v[i] -= c * coeffs_[j][i];
        }
      }
      const long double norm = sqrtl(inner(v, v));
      if (norm <= 0.0L) throw std::runtime_error("GramSchmidtOracle: degenerate basis");
      for (int i = 0; i <= max_degree; ++i) v[i] /= norm;
      coeffs_[n] = v;
    }
  }

  long double eval(int n, long double x) const {
    long double acc = 0.0L;
    for (int i = max_degree_; i >= 0; --i) acc = acc * x + coeffs_[n][i];
    return acc;
  }

  long double inner_product(int i, int j) const { return inner(coeffs_[i], coeffs_[j]); }

 private:
  long double inner(const std::vector<long double>& a,
                    const std::vector<long double>& b) const {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0L) continue;
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (b[j] == 0.0L) continue;
        acc += a[i] * b[j] * moments_[i + j];
      }
    }
    return acc;
  }

  int max_degree_;
  std::vector<long double> moments_;
  std::vector<std::vector<long double>> coeffs_;
};

// All p-subsets of {0..N-1} with projection-DPP probabilities det(P_S).
struct SubsetDistribution {
  std::vector<std::vector<int>> subsets;
  std::vector<double> probs;
};

inline SubsetDistribution enumerate_projection_dpp(const Eigen::MatrixXd& P, int p) {
  const int n = static_cast<int>(P.rows());
  SubsetDistribution out;
  std::vector<int> idx(p);
  for (int i = 0; i < p; ++i) idx[i] = i;
  for (;;) {
    Eigen::MatrixXd sub(p, p);
    for (int a = 0; a < p; ++a) {
      for (int b = 0; b < p; ++b) sub(a, b) = P(idx[a], idx[b]);
    }
    out.subsets.push_back(idx);
    out.probs.push_back(sub.determinant());
    int k = p - 1;
    while (k >= 0 && idx[k] == n - p + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < p; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

// Random rank-p projection over n items: Q factor of a Gaussian matrix.
inline Eigen::MatrixXd random_orthonormal(int n, int p, dppsgd::Rng& rng) {
  Eigen::MatrixXd g(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
}

// Central finite-difference gradient of a scalar function.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& theta,
    double step = 1e-6) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd up = theta, dn = theta;
    up[i] += step;
    dn[i] -= step;
    g[i] = (f(up) - f(dn)) / (2.0 * step);
  }
  return g;
}

}  // namespace oracles
