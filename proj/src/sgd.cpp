#include "dppsgd/sgd.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "dppsgd/estimators.hpp"

namespace dppsgd {

namespace {

Eigen::MatrixXd feature_block(const DataSet& ds) {
  return ds.points.leftCols(ds.feature_dim);
}

Eigen::VectorXd ridge_minimizer(const DataSet& ds, const LossFn& loss) {
  const Eigen::MatrixXd x = feature_block(ds);
  const double n = static_cast<double>(ds.n());
  Eigen::MatrixXd a = x.transpose() * x / n;
  a.diagonal().array() += loss.lambda0;
  const Eigen::VectorXd b = x.transpose() * ds.labels / n;
  return a.ldlt().solve(b);
}

Eigen::VectorXd logistic_minimizer(const DataSet& ds, const LossFn& loss) {
  const Eigen::MatrixXd x = feature_block(ds);
  const double n = static_cast<double>(ds.n());
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(loss.param_dim);
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd g = grad_full(ds, loss, theta);
    if (g.norm() <= 1e-10) return theta;
    // Hessian: (1/N) sum s_i(1-s_i) x_i x_i^T + lambda0 I, s_i = sigmoid(y_i m_i).
    const Eigen::VectorXd margins = x * theta;
    Eigen::VectorXd h(ds.n());
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      const double t = ds.labels[i] * margins[i];
      const double s = 1.0 / (1.0 + std::exp(-std::abs(t)));
      h[i] = s * (1.0 - s);
    }
    Eigen::MatrixXd hess = x.transpose() * h.asDiagonal() * x / n;
    hess.diagonal().array() += loss.lambda0;
    const Eigen::VectorXd step = hess.ldlt().solve(g);
    // Backtracking damping on the objective.
    const double f0 = objective(ds, loss, theta);
    double s = 1.0;
    while (s > 1e-12 && objective(ds, loss, theta - s * step) > f0) s *= 0.5;
    theta -= s * step;
  }
  throw std::runtime_error("exact_minimizer: Newton did not converge in 200 steps");
}

}  // namespace

Eigen::VectorXd exact_minimizer(const DataSet& ds, const LossFn& loss) {
  if (!(loss.lambda0 > 0.0)) {
    throw std::invalid_argument("exact_minimizer: requires lambda0 > 0");
  }
  Eigen::VectorXd theta = loss.kind == LossKind::Linear ? ridge_minimizer(ds, loss)
                                                        : logistic_minimizer(ds, loss);
  if (grad_full(ds, loss, theta).norm() > 1e-8) {
    throw std::runtime_error("exact_minimizer: stationarity check failed");
  }
  return theta;
}

Trajectory run_sgd(const DataSet& ds, const LossFn& loss, const SgdConfig& cfg,
                   const ProjectionKernel* pk, const SgdDiagnostics& diag) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw std::invalid_argument("run_sgd: stepsize exponent must be in (0,1)");
  }
  if (cfg.kind == EstimatorKind::Dpp && pk == nullptr) {
    throw std::invalid_argument("run_sgd: DPP estimator needs a projection kernel");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd theta =
      cfg.theta0.size() > 0 ? cfg.theta0 : Eigen::VectorXd::Zero(loss.param_dim);
  Rng rng(cfg.seed);
  Trajectory traj;
  auto record = [&](int t) {
    TrajectoryRecord rec;
    rec.t = t;
    rec.budget = static_cast<long>(t) * cfg.batch_size;
    rec.grad_norm = grad_full(ds, loss, theta).norm();
    rec.dist_to_opt = diag.theta_star ? (theta - *diag.theta_star).norm() : nan;
    rec.objective = objective(ds, loss, theta);
    rec.test_error = diag.test_data ? classification_error(*diag.test_data, theta) : nan;
    traj.records.push_back(rec);
  };
  record(0);
  for (int t = 1; t <= cfg.iterations; ++t) {
    GradientEstimate est;
    if (cfg.kind == EstimatorKind::Poisson) {
      est = xi_poisson(ds, loss, theta, cfg.batch_size, rng);
    } else {
      Minibatch batch = sample_projection_dpp(*pk, rng);
      est = xi_dpp(ds, loss, theta, *pk, batch);
    }
    const double eta = cfg.step_scale / std::pow(static_cast<double>(t), cfg.alpha);
    theta -= eta * est.vector;
    if (!theta.allFinite()) {
      traj.diverged = true;
      break;
    }
    if (t % cfg.record_every == 0 || t == cfg.iterations) record(t);
  }
  traj.theta_final = theta;
  return traj;
}

void write_trajectories_csv(const std::vector<Trajectory>& runs, std::ostream& out) {
  out << "replicate,t,budget,grad_norm,dist_to_opt,objective\n";
  out.precision(17);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const TrajectoryRecord& rec : runs[r].records) {
      out << r << "," << rec.t << "," << rec.budget << "," << rec.grad_norm << ","
          << rec.dist_to_opt << "," << rec.objective << "\n";
    }
  }
}

}  // namespace dppsgd
