#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dppsgd/dataset.hpp"
#include "dppsgd/dpp.hpp"
#include "dppsgd/loss.hpp"
#include "dppsgd/sgd.hpp"

namespace dppsgd {

/// Flat key=value configuration ('#' comments, blank lines ignored).
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws when absent
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::vector<int> get_int_list(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  const std::map<std::string, std::string>& entries() const { return entries_; }
  /// Keys read so far; unknown-key detection for typo safety.
  std::vector<std::string> unread_keys() const;

 private:
  std::map<std::string, std::string> entries_;
  mutable std::map<std::string, bool> read_;
};

struct ExperimentConfig {
  KeyValueConfig raw;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string format = "csv";
  int threads = 0;  // 0: hardware concurrency
};

/// Dataset (and optional test set) described by the config's data block.
struct ExperimentData {
  DataSet train;
  std::optional<DataSet> test;
  LossFn loss;
};
ExperimentData build_dataset(const ExperimentConfig& cfg);

/// Preprocessing bundle: OPE fitted to the data, KDE, saturated kernel.
struct KernelPipeline {
  OpeSpec spec;
  double bandwidth = 0.0;
  ProjectionKernel pk;
};
KernelPipeline build_kernel_pipeline(const DataSet& ds, int p, double bandwidth);

/// Resolve a bandwidth choice ("silverman", "canonical", or a number).
double resolve_bandwidth(const std::string& choice, const DataSet& ds);

/// OLS line fit on (x, y) pairs; stderr is the standard error of the slope
/// (OLS = Gaussian maximum likelihood). Requires >= 3 finite points.
struct SlopeFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  int n_points = 0;
};
SlopeFit slope_fit(const std::vector<std::pair<double, double>>& points);

/// Default lower end of the slope-fit range: 2^ceil(log2(d) + 2).
int default_slope_pmin(int d);

struct VariancePoint {
  std::string estimator;
  int p = 0;
  double second_moment = 0.0;   // (1/R) sum ||Xi_r||^2
  double trace_cov = 0.0;       // (1/R) sum ||Xi_r - Xi_N||^2, clipped at 0
  double trace_cov_stderr = 0.0;
  bool clipped = false;
  bool in_fit_range = false;
};

struct VarianceReport {
  std::vector<VariancePoint> points;
  std::map<std::string, SlopeFit> slopes;  // per estimator
  int slope_pmin = 0;
  int replicates = 0;
  double grad_norm_at_star = 0.0;
};

VarianceReport variance_study(const ExperimentConfig& cfg);

struct CurvePoint {
  std::string estimator;
  int p = 0;
  int t = 0;
  long budget = 0;
  double grad_norm_mean = 0.0, grad_norm_sem = 0.0;
  double dist_mean = 0.0, dist_sem = 0.0;
  double obj_mean = 0.0, obj_sem = 0.0;
  double test_err_mean = 0.0, test_err_sem = 0.0;
};

struct CurveReport {
  std::vector<CurvePoint> points;
  int replicates = 0;
  int diverged = 0;
  bool has_test_error = false;
};

CurveReport convergence_study(const ExperimentConfig& cfg);

/// Deterministic report emission; leading comment lines (CSV) or a metadata
/// envelope (JSON) carry the version string, seed, and config echo.
void write_variance_report(const VarianceReport& report, const ExperimentConfig& cfg,
                           std::ostream& out);
void write_curve_report(const CurveReport& report, const ExperimentConfig& cfg,
                        std::ostream& out);

/// Run R jobs indexed 0..R-1 over a small thread pool; results land in index
/// order, so reductions are deterministic regardless of thread count.
void parallel_for_index(int count, int threads, const std::function<void(int)>& fn);

int cli_main(int argc, const char* const* argv);

}  // namespace dppsgd
