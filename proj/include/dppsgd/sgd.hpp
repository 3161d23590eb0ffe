#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "dppsgd/dataset.hpp"
#include "dppsgd/dpp.hpp"
#include "dppsgd/loss.hpp"

namespace dppsgd {

enum class EstimatorKind { Poisson, Dpp };

struct SgdConfig {
  double alpha = 0.9;       // stepsize exponent, in (0,1)
  double step_scale = 1.0;  // eta_t = step_scale / t^alpha
  int iterations = 100;
  int batch_size = 10;
  EstimatorKind kind = EstimatorKind::Dpp;
  Eigen::VectorXd theta0;   // defaults to zeros
  std::uint64_t seed = 0;
  int record_every = 1;     // diagnostics thinning; the last iterate is always recorded
};

struct TrajectoryRecord {
  int t = 0;
  long budget = 0;          // t * p item-gradient evaluations
  double grad_norm = 0.0;   // ||exact full gradient||, diagnostics only
  double dist_to_opt = 0.0; // ||theta_t - theta*||; NaN when theta* unknown
  double objective = 0.0;
  double test_error = 0.0;  // NaN when no test set is attached
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  Eigen::VectorXd theta_final;
  bool diverged = false;
};

/// Exact penalized minimizer. Linear: closed-form ridge solve. Logistic:
/// damped Newton to ||grad|| <= 1e-10 (errors after 200 steps). Requires
/// lambda0 > 0.
Eigen::VectorXd exact_minimizer(const DataSet& ds, const LossFn& loss);

/// Optional diagnostics context for run_sgd.
struct SgdDiagnostics {
  const Eigen::VectorXd* theta_star = nullptr;
  const DataSet* test_data = nullptr;  // enables the test_error column
};

/// theta_{t+1} = theta_t - eta_t Xi_A(theta_t) with a fresh independent
/// minibatch per iteration. The DPP kind draws from the precomputed
/// projection kernel (theta-independent, so preprocessing amortizes across
/// iterations and replicates). Diagnostics use the exact full gradient and
/// are not charged to the budget. A non-finite iterate truncates the
/// trajectory and flags it diverged.
Trajectory run_sgd(const DataSet& ds, const LossFn& loss, const SgdConfig& cfg,
                   const ProjectionKernel* pk, const SgdDiagnostics& diag = {});

/// CSV with columns replicate,t,budget,grad_norm,dist_to_opt,objective.
void write_trajectories_csv(const std::vector<Trajectory>& runs, std::ostream& out);

}  // namespace dppsgd
