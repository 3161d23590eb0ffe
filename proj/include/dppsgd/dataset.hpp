#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dppsgd {

/// N points in [-1,1]^d plus an optional label vector. `points` is the matrix
/// the DPP machinery sees; the loss reads the first `feature_dim` columns as
/// features and `labels` as responses. When `label_fused` is set, the last
/// column of `points` duplicates `labels` (the sampler then repels in
/// feature-and-label space).
struct DataSet {
  Eigen::MatrixXd points;
  int feature_dim = 0;
  bool label_fused = false;
  Eigen::VectorXd labels;  // empty when the data carries no response
  std::string name;
  std::vector<int> constant_columns;  // flagged by scale_to_cube

  Eigen::Index n() const { return points.rows(); }
  int dim() const { return static_cast<int>(points.cols()); }
  bool has_labels() const { return labels.size() == points.rows(); }
  auto features(Eigen::Index i) const { return points.row(i).head(feature_dim); }
  bool in_cube() const { return points.size() == 0 || points.cwiseAbs().maxCoeff() <= 1.0; }
};

enum class FeatureLaw { Uniform, GaussianMixture2 };
enum class Task { Linear, Logistic };

struct SyntheticConfig {
  int n = 1000;
  int d = 3;  // total dimension including the label
  FeatureLaw feature_law = FeatureLaw::Uniform;
  Eigen::VectorXd theta_true;  // length d-1
  double noise_sd = 0.1;
  Task task = Task::Linear;
  std::uint64_t seed = 0;
  // Mixture shape: components at +-center_offset*111...1, per-coordinate sd,
  // samples rejected outside the cube.
  double mixture_center = 0.5;
  double mixture_sd = 0.15;
};

/// Features on [-1,1]^{d-1}; y = <x, theta_true> + noise. Linear task: y is
/// rescaled by ||y||_inf and fused as the last point column. Logistic task:
/// y is replaced by its sign and rides along outside the point matrix.
/// Deterministic given cfg.seed.
DataSet generate_synthetic(const SyntheticConfig& cfg);

/// Parse "label idx:val idx:val ..." lines (1-based, strictly increasing
/// indices) into a dense matrix; absent indices are zero-filled. When
/// n_features <= 0 the width is deduced from the largest index seen.
/// Malformed input throws std::runtime_error naming the line number.
DataSet parse_libsvm(std::istream& in, int n_features = -1);
DataSet parse_libsvm_file(const std::string& path, int n_features = -1);

/// Map integer class labels 1..26 to +1 (classes 1-13) / -1 (14-26).
DataSet binarize_letter(const DataSet& ds);

/// Per-column affine map onto [-1+margin, 1-margin]; constant columns map to
/// 0 and are flagged. Map parameters are recorded for inversion.
struct ScaleMap {
  Eigen::VectorXd scale;   // x' = scale * x + offset, columnwise
  Eigen::VectorXd offset;
  std::vector<int> constant_columns;
};
DataSet scale_to_cube(const DataSet& ds, double margin, ScaleMap* map = nullptr);

/// (sample mean, population variance) of point column j.
std::pair<double, double> marginal_moments(const DataSet& ds, int j);

/// Drop a fused label column from `points` (labels remain available): the
/// DPP then repels in feature space only.
DataSet features_only(const DataSet& ds);

/// CSV with header x0,...,x_{d-2},y.
void write_dataset_csv(const DataSet& ds, std::ostream& out);

}  // namespace dppsgd
