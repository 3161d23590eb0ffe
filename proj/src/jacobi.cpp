#include "dppsgd/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace dppsgd {

double jacobi_weight_mean(const JacobiParams& p) {
  return (p.alpha - p.beta) / (p.alpha + p.beta + 2.0);
}

double jacobi_weight_variance(const JacobiParams& p) {
  const double s = p.alpha + p.beta;
  return 4.0 * (p.alpha + 1.0) * (p.beta + 1.0) /
         ((s + 2.0) * (s + 2.0) * (s + 3.0));
}

namespace {

double moment_mismatch(double a, double b, double mean, double var) {
  const JacobiParams p{a, b};
  const double dm = jacobi_weight_mean(p) - mean;
  const double dv = jacobi_weight_variance(p) - var;
  return dm * dm + dv * dv;
}

// Minimize f over [lo, hi]: coarse scan, then golden-section refinement
// around the best cell. f along an edge of the square need not be unimodal.
double minimize_1d(const std::function<double(double)>& f, double lo, double hi) {
  constexpr int kScan = 256;
  double best_x = lo, best_f = f(lo);
  for (int i = 1; i <= kScan; ++i) {
    const double x = lo + (hi - lo) * i / kScan;
    const double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  const double cell = (hi - lo) / kScan;
  double a = std::max(lo, best_x - cell);
  double b = std::min(hi, best_x + cell);
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

}  // namespace

JacobiParams fit_jacobi_params(double mean, double variance) {
  if (!(std::abs(mean) < 1.0) || !(variance > 0.0) || !(variance < 1.0)) {
    throw std::invalid_argument("fit_jacobi_params: need |mean| < 1 and 0 < variance < 1");
  }
  // Exact interior solve: with s = alpha + beta,
  //   mean = (alpha - beta) / (s + 2),  1 - mean^2 = variance * (s + 3).
  const double s = (1.0 - mean * mean) / variance - 3.0;
  const double alpha = 0.5 * (s + 2.0) * (1.0 + mean) - 1.0;
  const double beta = 0.5 * (s + 2.0) * (1.0 - mean) - 1.0;
  const double bound = kJacobiParamBound;
  if (std::abs(alpha) <= bound + 1e-12 && std::abs(beta) <= bound + 1e-12) {
    return {std::clamp(alpha, -bound, bound), std::clamp(beta, -bound, bound)};
  }

  // Infeasible target: the moment map is a diffeomorphism on the square, so
  // the least-squares minimizer sits on the boundary. Search the four edges.
  JacobiParams best{0.0, 0.0};
  double best_f = std::numeric_limits<double>::infinity();
  auto consider = [&](double a, double b) {
    const double f = moment_mismatch(a, b, mean, variance);
    const double norm = a * a + b * b;
    const double best_norm = best.alpha * best.alpha + best.beta * best.beta;
    if (f < best_f - 1e-15 || (std::abs(f - best_f) <= 1e-15 && norm < best_norm)) {
      best_f = f;
      best = {a, b};
    }
  };
  for (const double edge : {-bound, bound}) {
    consider(edge, minimize_1d([&](double b) { return moment_mismatch(edge, b, mean, variance); },
                               -bound, bound));
    // consider() wants (alpha, beta); recompute for the fixed-beta edges.
    consider(minimize_1d([&](double a) { return moment_mismatch(a, edge, mean, variance); },
                         -bound, bound),
             edge);
  }
  return best;
}

JacobiRecurrence jacobi_recurrence(const JacobiParams& p, int max_degree) {
  if (max_degree < 0) throw std::invalid_argument("jacobi_recurrence: max_degree < 0");
  const double al = p.alpha, be = p.beta;
  const double s = al + be;
  JacobiRecurrence rec;
  rec.a.resize(max_degree + 1);
  rec.b.resize(max_degree + 1);
  rec.b[0] = 0.0;
  rec.a[0] = (al - be) / (s + 2.0);
  for (int k = 1; k <= max_degree; ++k) {
    const double t = 2.0 * k + s;
    rec.a[k] = (al * al - be * be) / (t * (t + 2.0));
    double b2;
    if (k == 1) {
      b2 = 4.0 * (al + 1.0) * (be + 1.0) / ((s + 2.0) * (s + 2.0) * (s + 3.0));
    } else {
      b2 = 4.0 * k * (k + al) * (k + be) * (k + s) /
           (t * t * (t + 1.0) * (t - 1.0));
    }
    rec.b[k] = std::sqrt(b2);
  }
  return rec;
}

JacobiBasis::JacobiBasis(const JacobiParams& params, int max_degree)
    : params_(params),
      max_degree_(max_degree),
      rec_(jacobi_recurrence(params, std::max(1, max_degree))) {
  log_norm_ = (params.alpha + params.beta + 1.0) * std::log(2.0) +
              std::lgamma(params.alpha + 1.0) + std::lgamma(params.beta + 1.0) -
              std::lgamma(params.alpha + params.beta + 2.0);
}

double JacobiBasis::eval(int n, double x) const {
  if (n > max_degree_) throw std::out_of_range("JacobiBasis::eval: degree exceeds max_degree");
  if (n < 0) throw std::out_of_range("JacobiBasis::eval: negative degree");
  double prev = 0.0;
  double cur = 1.0;
  for (int k = 0; k < n; ++k) {
    const double next = ((x - rec_.a[k]) * cur - rec_.b[k] * prev) / rec_.b[k + 1];
    prev = cur;
    cur = next;
  }
  return cur;
}

void JacobiBasis::eval_all(double x, Eigen::Ref<Eigen::VectorXd> out) const {
  const int m = static_cast<int>(out.size()) - 1;
  if (m > max_degree_) throw std::out_of_range("JacobiBasis::eval_all: degree exceeds max_degree");
  out[0] = 1.0;
  if (m == 0) return;
  out[1] = (x - rec_.a[0]) / rec_.b[1];
  for (int k = 1; k < m; ++k) {
    out[k + 1] = ((x - rec_.a[k]) * out[k] - rec_.b[k] * out[k - 1]) / rec_.b[k + 1];
  }
}

double JacobiBasis::cd_kernel(int m, double x, double y) const {
  if (m < 1) throw std::invalid_argument("cd_kernel: rank must be >= 1");
  if (m > max_degree_) throw std::out_of_range("cd_kernel: rank exceeds max_degree");
  if (std::abs(x - y) < 1e-8) {
    // Confluent branch: direct sum avoids the cancellation in the CD quotient.
    Eigen::VectorXd px(m), py(m);
    eval_all(x, px);
    eval_all(y, py);
    return px.dot(py);
  }
  Eigen::VectorXd px(m + 1), py(m + 1);
  eval_all(x, px);
  eval_all(y, py);
  return rec_.b[m] * (px[m] * py[m - 1] - py[m] * px[m - 1]) / (x - y);
}

double JacobiBasis::pdf(double x) const {
  const double al = params_.alpha, be = params_.beta;
  if (x <= -1.0 || x >= 1.0) {
    if (x < -1.0 || x > 1.0) return 0.0;
    // Exact endpoint: limit of the density there.
    const double expo = (x == -1.0) ? al : be;
    if (expo > 0.0) return 0.0;
    if (expo < 0.0) return std::numeric_limits<double>::infinity();
    const double other = (x == -1.0) ? be : al;
    return std::exp(other * std::log(2.0) - log_norm_);
  }
  return std::exp(al * std::log1p(x) + be * std::log1p(-x) - log_norm_);
}

QuadratureRule gauss_jacobi_rule(const JacobiParams& p, int n) {
  if (n < 1) throw std::invalid_argument("gauss_jacobi_rule: need n >= 1");
  const JacobiRecurrence rec = jacobi_recurrence(p, n);
  Eigen::VectorXd diag = rec.a.head(n);
  Eigen::VectorXd sub = rec.b.segment(1, n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  QuadratureRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights = es.eigenvectors().row(0).transpose().array().square();
  return rule;
}

}  // namespace dppsgd
