#include "dppsgd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dppsgd/rng.hpp"

namespace dppsgd {

DataSet generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("generate_synthetic: need N >= 1");
  if (cfg.d < 2) throw std::invalid_argument("generate_synthetic: regression needs d >= 2");
  if (cfg.noise_sd < 0.0) throw std::invalid_argument("generate_synthetic: noise_sd < 0");
  if (cfg.mixture_center <= 0.0) {
    throw std::invalid_argument("generate_synthetic: mixture centers must be separated");
  }
  const int fdim = cfg.d - 1;
  Eigen::VectorXd theta = cfg.theta_true;
  if (theta.size() == 0) theta = Eigen::VectorXd::Ones(fdim);
  if (theta.size() != fdim) {
    throw std::invalid_argument("generate_synthetic: theta_true must have length d-1");
  }

  Rng rng(cfg.seed);
  Eigen::MatrixXd x(cfg.n, fdim);
  for (Eigen::Index i = 0; i < cfg.n; ++i) {
    for (int j = 0; j < fdim; ++j) {
      if (cfg.feature_law == FeatureLaw::Uniform) {
        x(i, j) = rng.uniform(-1.0, 1.0);
      } else {
        const double center = rng.bernoulli(0.5) ? cfg.mixture_center : -cfg.mixture_center;
        double v;
        do {
          v = center + cfg.mixture_sd * rng.normal();
        } while (std::abs(v) > 1.0);
        x(i, j) = v;
      }
    }
  }

  Eigen::VectorXd y = x * theta;
  for (Eigen::Index i = 0; i < cfg.n; ++i) y[i] += cfg.noise_sd * rng.normal();

  DataSet ds;
  ds.feature_dim = fdim;
  ds.name = "synthetic";
  if (cfg.task == Task::Linear) {
    const double sup = y.cwiseAbs().maxCoeff();
    if (sup > 0.0) y /= sup;
    ds.points.resize(cfg.n, cfg.d);
    ds.points.leftCols(fdim) = x;
    ds.points.col(fdim) = y;
    ds.labels = y;
    ds.label_fused = true;
  } else {
    for (Eigen::Index i = 0; i < cfg.n; ++i) y[i] = y[i] >= 0.0 ? 1.0 : -1.0;
    ds.points = x;
    ds.labels = y;
    ds.label_fused = false;
  }
  return ds;
}

DataSet parse_libsvm(std::istream& in, int n_features) {
  std::vector<double> labels;
  std::vector<std::vector<std::pair<int, double>>> rows;
  int max_index = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double label;
    if (!(ls >> label)) {
      throw std::runtime_error("parse_libsvm: line " + std::to_string(line_no) +
                               ": missing label");
    }
    std::vector<std::pair<int, double>> row;
    std::string tok;
    int prev_index = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        throw std::runtime_error("parse_libsvm: line " + std::to_string(line_no) +
                                 ": expected idx:val, got '" + tok + "'");
      }
      int idx = 0;
      double val = 0.0;
      try {
        std::size_t used = 0;
        idx = std::stoi(tok.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(tok);
        val = std::stod(tok.substr(colon + 1), &used);
        if (used != tok.size() - colon - 1) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw std::runtime_error("parse_libsvm: line " + std::to_string(line_no) +
                                 ": malformed pair '" + tok + "'");
      }
      if (idx < 1) {
        throw std::runtime_error("parse_libsvm: line " + std::to_string(line_no) +
                                 ": indices are 1-based");
      }
      if (idx <= prev_index) {
        throw std::runtime_error("parse_libsvm: line " + std::to_string(line_no) +
                                 ": non-increasing feature index");
      }
      prev_index = idx;
      max_index = std::max(max_index, idx);
      row.emplace_back(idx, val);
    }
    labels.push_back(label);
    rows.push_back(std::move(row));
  }

  const int width = n_features > 0 ? n_features : max_index;
  if (n_features > 0 && max_index > n_features) {
    throw std::runtime_error("parse_libsvm: feature index " + std::to_string(max_index) +
                             " exceeds declared width " + std::to_string(n_features));
  }
  DataSet ds;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  ds.points = Eigen::MatrixXd::Zero(n, width);
  ds.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ds.labels[i] = labels[i];
    for (const auto& [idx, val] : rows[i]) ds.points(i, idx - 1) = val;
  }
  ds.feature_dim = width;
  ds.label_fused = false;
  ds.name = "libsvm";
  return ds;
}

DataSet parse_libsvm_file(const std::string& path, int n_features) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_libsvm: cannot open " + path);
  DataSet ds = parse_libsvm(in, n_features);
  ds.name = path;
  return ds;
}

DataSet binarize_letter(const DataSet& ds) {
  if (!ds.has_labels()) throw std::invalid_argument("binarize_letter: dataset has no labels");
  DataSet out = ds;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const double lab = ds.labels[i];
    const int cls = static_cast<int>(std::lround(lab));
    if (cls < 1 || cls > 26 || std::abs(lab - cls) > 1e-9) {
      throw std::invalid_argument("binarize_letter: label " + std::to_string(lab) +
                                  " outside 1..26 at row " + std::to_string(i));
    }
    out.labels[i] = cls <= 13 ? 1.0 : -1.0;
  }
  return out;
}

DataSet scale_to_cube(const DataSet& ds, double margin, ScaleMap* map) {
  if (margin < 0.0 || margin >= 1.0) throw std::invalid_argument("scale_to_cube: bad margin");
  const int d = ds.dim();
  ScaleMap local;
  local.scale.resize(d);
  local.offset.resize(d);
  DataSet out = ds;
  const double half_width = 1.0 - margin;
  for (int j = 0; j < d; ++j) {
    const double lo = ds.points.col(j).minCoeff();
    const double hi = ds.points.col(j).maxCoeff();
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      throw std::invalid_argument("scale_to_cube: non-finite column " + std::to_string(j));
    }
    if (hi - lo <= 0.0) {
      local.scale[j] = 0.0;
      local.offset[j] = 0.0;
      local.constant_columns.push_back(j);
      out.points.col(j).setZero();
      continue;
    }
    local.scale[j] = 2.0 * half_width / (hi - lo);
    local.offset[j] = -half_width - local.scale[j] * lo;
    out.points.col(j) = local.scale[j] * ds.points.col(j).array() + local.offset[j];
  }
  out.constant_columns = local.constant_columns;
  if (ds.label_fused && ds.has_labels()) out.labels = out.points.col(d - 1);
  if (map) *map = std::move(local);
  return out;
}

std::pair<double, double> marginal_moments(const DataSet& ds, int j) {
  if (j < 0 || j >= ds.dim()) throw std::out_of_range("marginal_moments: bad column");
  const double mean = ds.points.col(j).mean();
  const double var = (ds.points.col(j).array() - mean).square().sum() /
                     static_cast<double>(ds.n());
  return {mean, var};
}

DataSet features_only(const DataSet& ds) {
  if (!ds.label_fused) return ds;
  DataSet out = ds;
  out.points = ds.points.leftCols(ds.dim() - 1).eval();
  out.label_fused = false;
  return out;
}

void write_dataset_csv(const DataSet& ds, std::ostream& out) {
  const int fdim = ds.feature_dim;
  for (int j = 0; j < fdim; ++j) out << "x" << j << ",";
  out << "y\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    for (int j = 0; j < fdim; ++j) out << ds.points(i, j) << ",";
    out << (ds.has_labels() ? ds.labels[i] : 0.0) << "\n";
  }
}

}  // namespace dppsgd
