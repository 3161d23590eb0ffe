#include "dppsgd/ope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dppsgd {

std::vector<MultiIndex> graded_lex_indices(int d, int p) {
  if (d < 1 || p < 1) throw std::invalid_argument("graded_lex_indices: need d >= 1, p >= 1");
  std::vector<MultiIndex> out;
  out.reserve(p);
  int total_degree = 0;
  while (static_cast<int>(out.size()) < p) {
    // All compositions of total_degree into d parts, ascending lexicographic
    // with coordinate 0 most significant.
    MultiIndex idx(d, 0);
    idx[d - 1] = total_degree;
    for (;;) {
      out.push_back(idx);
      if (static_cast<int>(out.size()) == p) return out;
      if (d == 1) break;  // single composition per degree
      // Next composition: rightmost k < d-1 with mass to its right gains one
      // unit; the remainder is flushed to the last coordinate.
      int k = d - 2;
      while (k >= 0) {
        int s = 0;
        for (int t = k + 1; t < d; ++t) s += idx[t];
        if (s > 0) break;
        --k;
      }
      if (k < 0) break;  // (deg, 0, ..., 0) was the last composition
      idx[k] += 1;
      int rest = 0;
      for (int t = k + 1; t < d; ++t) {
        rest += idx[t];
        idx[t] = 0;
      }
      idx[d - 1] = rest - 1;
    }
    ++total_degree;
  }
  return out;
}

OpeSpec::OpeSpec(std::vector<JacobiBasis> bases, int p)
    : bases_(std::move(bases)), p_(p) {
  if (bases_.empty()) throw std::invalid_argument("OpeSpec: no bases");
  if (p_ < 1) throw std::invalid_argument("OpeSpec: rank must be >= 1");
  const int d = static_cast<int>(bases_.size());
  indices_ = graded_lex_indices(d, p_);
  degrees_.assign(d, 0);
  for (const MultiIndex& idx : indices_) {
    for (int j = 0; j < d; ++j) degrees_[j] = std::max(degrees_[j], idx[j]);
  }
  table_offsets_.resize(d);
  table_size_ = 0;
  for (int j = 0; j < d; ++j) {
    if (bases_[j].max_degree() < degrees_[j]) {
      throw std::invalid_argument("OpeSpec: basis max_degree too small for index prefix");
    }
    table_offsets_[j] = table_size_;
    table_size_ += degrees_[j] + 1;
  }
}

void OpeSpec::check_in_cube(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim()) throw std::invalid_argument("OpeSpec: point dimension mismatch");
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!(std::abs(x[j]) <= 1.0)) {
      throw std::domain_error("OpeSpec: point outside [-1,1]^d");
    }
  }
}

void OpeSpec::axis_tables(const Eigen::Ref<const Eigen::VectorXd>& x,
                          Eigen::VectorXd& flat) const {
  flat.resize(table_size_);
  for (int j = 0; j < dim(); ++j) {
    bases_[j].eval_all(x[j], flat.segment(table_offsets_[j], degrees_[j] + 1));
  }
}

double OpeSpec::eval_phi(int k, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (k < 0 || k >= p_) throw std::out_of_range("OpeSpec::eval_phi: index out of range");
  check_in_cube(x);
  double v = 1.0;
  for (int j = 0; j < dim(); ++j) v *= bases_[j].eval(indices_[k][j], x[j]);
  return v;
}

double OpeSpec::kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y) const {
  check_in_cube(x);
  check_in_cube(y);
  Eigen::VectorXd tx, ty;
  axis_tables(x, tx);
  axis_tables(y, ty);
  double sum = 0.0;
  for (const MultiIndex& idx : indices_) {
    double term = 1.0;
    for (int j = 0; j < dim(); ++j) {
      const double* bx = tx.data() + table_offsets_[j];
      const double* by = ty.data() + table_offsets_[j];
      term *= bx[idx[j]] * by[idx[j]];
    }
    sum += term;
  }
  return sum;
}

double OpeSpec::kernel_diag(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_in_cube(x);
  Eigen::VectorXd tx;
  axis_tables(x, tx);
  double sum = 0.0;
  for (const MultiIndex& idx : indices_) {
    double term = 1.0;
    for (int j = 0; j < dim(); ++j) {
      const double v = tx[table_offsets_[j] + idx[j]];
      term *= v * v;
    }
    sum += term;
  }
  return sum;
}

double OpeSpec::density(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim()) throw std::invalid_argument("OpeSpec: point dimension mismatch");
  double q = 1.0;
  for (int j = 0; j < dim(); ++j) q *= bases_[j].pdf(x[j]);
  return q;
}

Eigen::MatrixXd OpeSpec::feature_matrix(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  if (points.cols() != dim()) throw std::invalid_argument("OpeSpec: points dimension mismatch");
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd phi(n, p_);
  Eigen::VectorXd flat;
  for (Eigen::Index i = 0; i < n; ++i) {
    check_in_cube(points.row(i).transpose());
    axis_tables(points.row(i).transpose(), flat);
    for (int k = 0; k < p_; ++k) {
      double term = 1.0;
      for (int j = 0; j < dim(); ++j) {
        term *= flat[table_offsets_[j] + indices_[k][j]];
      }
      phi(i, k) = term;
    }
  }
  return phi;
}

}  // namespace dppsgd
