#include "dppsgd/kde.hpp"

#include <cmath>
#include <stdexcept>

namespace dppsgd {

namespace {

// Product Epanechnikov weight at scaled offset u = (z - z_i)/h, or 0 outside
// the unit cube. Early-exits on the first out-of-support coordinate.
double product_epanechnikov(const double* z, const double* zi, double inv_h, int d) {
  double w = 1.0;
  for (int j = 0; j < d; ++j) {
    const double u = (z[j] - zi[j]) * inv_h;
    if (u <= -1.0 || u >= 1.0) return 0.0;
    w *= 0.75 * (1.0 - u * u);
  }
  return w;
}

void check_spec(const KdeSpec& spec) {
  if (spec.data == nullptr) throw std::invalid_argument("KdeSpec: no dataset");
  if (!(spec.bandwidth > 0.0)) throw std::invalid_argument("KdeSpec: bandwidth must be > 0");
}

}  // namespace

double kde_bandwidth_canonical(Eigen::Index n, int d) {
  return std::pow(static_cast<double>(n), -1.0 / d);
}

double kde_bandwidth_silverman(const DataSet& ds) {
  const int d = ds.dim();
  double sigma_bar = 0.0;
  for (int j = 0; j < d; ++j) {
    sigma_bar += std::sqrt(marginal_moments(ds, j).second);
  }
  sigma_bar /= d;
  return 2.0 * sigma_bar * std::pow(static_cast<double>(ds.n()), -1.0 / (d + 4));
}

double kde_density(const KdeSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& z) {
  check_spec(spec);
  const DataSet& ds = *spec.data;
  const int d = ds.dim();
  if (z.size() != d) throw std::invalid_argument("kde_density: dimension mismatch");
  const double inv_h = 1.0 / spec.bandwidth;
  const Eigen::VectorXd zc = z;  // contiguous copy for raw pointer access
  double sum = 0.0;
  Eigen::RowVectorXd row(d);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    row = ds.points.row(i);
    sum += product_epanechnikov(zc.data(), row.data(), inv_h, d);
  }
  return sum / (static_cast<double>(ds.n()) * std::pow(spec.bandwidth, d));
}

Eigen::VectorXd kde_density_at_data(const KdeSpec& spec) {
  check_spec(spec);
  const DataSet& ds = *spec.data;
  const int d = ds.dim();
  const Eigen::Index n = ds.n();
  const double inv_h = 1.0 / spec.bandwidth;
  const double norm = 1.0 / (static_cast<double>(n) * std::pow(spec.bandwidth, d));
  // Row-major copy so the pairwise pass walks contiguous memory.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pts = ds.points;
  Eigen::VectorXd out(n);
  const double k0 = std::pow(0.75, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = k0;  // self term
    const double* zi = pts.row(i).data();
    for (Eigen::Index l = 0; l < n; ++l) {
      if (l == i) continue;
      sum += product_epanechnikov(zi, pts.row(l).data(), inv_h, d);
    }
    out[i] = sum * norm;
  }
  return out;
}

Eigen::VectorXd kde_smoothed_gradient(const KdeSpec& spec, const LossFn& loss,
                                      const Eigen::Ref<const Eigen::VectorXd>& theta,
                                      const Eigen::Ref<const Eigen::VectorXd>& w) {
  check_spec(spec);
  const DataSet& ds = *spec.data;
  const int d = ds.dim();
  if (w.size() != d) throw std::invalid_argument("kde_smoothed_gradient: dimension mismatch");
  const double inv_h = 1.0 / spec.bandwidth;
  const Eigen::VectorXd wc = w;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(theta.size());
  Eigen::RowVectorXd row(d);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    row = ds.points.row(i);
    const double k = product_epanechnikov(wc.data(), row.data(), inv_h, d);
    if (k > 0.0) {
      acc += k * item_gradient(loss, ds.features(i), ds.labels[i], theta);
    }
  }
  return acc / (static_cast<double>(ds.n()) * std::pow(spec.bandwidth, d));
}

}  // namespace dppsgd
