#include "dppsgd/dpp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace dppsgd {

Eigen::VectorXd RestrictedKernel::operator_eigenvalues() const {
  const Eigen::MatrixXd gram =
      factor.transpose() * factor / static_cast<double>(factor.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  return es.eigenvalues().reverse();
}

RestrictedKernel assemble_kernel_matrix(const OpeSpec& spec, const KdeSpec& kde,
                                        const DataSet& ds) {
  if (spec.dim() != ds.dim()) {
    throw std::invalid_argument("assemble_kernel_matrix: OPE/data dimension mismatch");
  }
  Eigen::MatrixXd phi = spec.feature_matrix(ds.points);
  const Eigen::VectorXd gamma_tilde = kde_density_at_data(kde);
  RestrictedKernel rk;
  rk.factor.resize(ds.n(), spec.rank());
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const double q = spec.density(ds.points.row(i).transpose());
    const double w = std::sqrt(q / gamma_tilde[i]);
    if (!std::isfinite(w)) {
      throw std::runtime_error(
          "assemble_kernel_matrix: non-finite kernel entries at point " + std::to_string(i) +
          " (q = " + std::to_string(q) + ", kde = " + std::to_string(gamma_tilde[i]) + ")");
    }
    rk.factor.row(i) = w * phi.row(i);
  }
  return rk;
}

ProjectionKernel saturate(const RestrictedKernel& rk, int p) {
  const Eigen::Index n = rk.n();
  if (p < 1 || p > rk.rank_bound() || n < p) {
    throw std::invalid_argument("saturate: rank out of range");
  }
  // (1/N) K = (F/sqrt(N)) (F/sqrt(N))^T: the thin SVD of the scaled factor is
  // the spectral decomposition of the operator restricted to its range.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(rk.factor / std::sqrt(static_cast<double>(n)),
                                     Eigen::ComputeThinU);
  ProjectionKernel pk;
  pk.input_spectrum = svd.singularValues().array().square();
  pk.basis = svd.matrixU().leftCols(p);
  pk.marginals = pk.basis.rowwise().squaredNorm();
  // Everything beyond the factor rank is exactly zero, so the gap at rank p
  // collapses iff the p-th eigenvalue itself vanishes.
  const double lam_p = p <= pk.input_spectrum.size() ? pk.input_spectrum[p - 1] : 0.0;
  const double lam_next = p < pk.input_spectrum.size() ? pk.input_spectrum[p] : 0.0;
  pk.degenerate_tie = (lam_p - lam_next) < 1e-12;
  return pk;
}

Minibatch sample_projection_dpp(const ProjectionKernel& pk, Rng& rng) {
  const Eigen::Index n = pk.n();
  const int p = pk.rank();
  Eigen::MatrixXd w = pk.basis;                       // residual rows
  Eigen::VectorXd norms = pk.marginals;               // residual row norms^2
  Minibatch batch;
  batch.items.reserve(p);
  for (int step = 0; step < p; ++step) {
    norms = norms.cwiseMax(0.0);
    for (const Eigen::Index chosen : batch.items) norms[chosen] = 0.0;
    const double total = norms.sum();
    if (total < 1e-14) {
      throw std::runtime_error("sample_projection_dpp: residual mass vanished before p items");
    }
    double u = rng.uniform() * total;
    Eigen::Index pick = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      u -= norms[i];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    batch.items.push_back(pick);
    // Gram-Schmidt: remove the chosen direction from every row.
    const Eigen::RowVectorXd e = w.row(pick) / w.row(pick).norm();
    const Eigen::VectorXd proj = w * e.transpose();
    w.noalias() -= proj * e;
    norms -= proj.cwiseProduct(proj);
  }
  return batch;
}

GridOpeSampler make_grid_ope_sampler(const OpeSpec& spec, int nodes_per_axis) {
  const int d = spec.dim();
  const int p = spec.rank();
  if (nodes_per_axis < 2) throw std::invalid_argument("grid sampler: need >= 2 nodes per axis");
  double total_d = std::pow(static_cast<double>(nodes_per_axis), d);
  if (total_d > 1e6) throw std::invalid_argument("grid sampler: grid exceeds 1e6 nodes");
  if (total_d * p > 5e7) throw std::invalid_argument("grid sampler: feature table too large");
  const Eigen::Index total = static_cast<Eigen::Index>(total_d);

  std::vector<QuadratureRule> rules;
  rules.reserve(d);
  for (int j = 0; j < d; ++j) {
    rules.push_back(gauss_jacobi_rule(spec.basis(j).params(), nodes_per_axis));
  }

  GridOpeSampler out;
  out.nodes.resize(total, d);
  out.quad_weight.resize(total);
  Eigen::VectorXd x(d);
  std::vector<int> digit(d, 0);
  for (Eigen::Index g = 0; g < total; ++g) {
    double wq = 1.0;
    for (int j = 0; j < d; ++j) {
      x[j] = rules[j].nodes[digit[j]];
      wq *= rules[j].weights[digit[j]];
    }
    out.nodes.row(g) = x.transpose();
    out.quad_weight[g] = wq;
    for (int j = d - 1; j >= 0; --j) {
      if (++digit[j] < nodes_per_axis) break;
      digit[j] = 0;
    }
  }

  // sqrt(weight)-scaled feature matrix; QR makes the discretized kernel an
  // exact projection over the nodes.
  Eigen::MatrixXd f = spec.feature_matrix(out.nodes);
  f.array().colwise() *= out.quad_weight.array().sqrt();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(f);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(total, p);
  out.pk.basis = std::move(q);
  out.pk.marginals = out.pk.basis.rowwise().squaredNorm();
  out.pk.input_spectrum = Eigen::VectorXd::Ones(p);
  return out;
}

Eigen::MatrixXd sample_grid_ope(const GridOpeSampler& sampler, Rng& rng) {
  const Minibatch batch = sample_projection_dpp(sampler.pk, rng);
  Eigen::MatrixXd pts(batch.items.size(), sampler.nodes.cols());
  for (Eigen::Index r = 0; r < pts.rows(); ++r) {
    pts.row(r) = sampler.nodes.row(batch.items[r]);
  }
  return pts;
}

Eigen::MatrixXd grid_ope_sampler(const OpeSpec& spec, int nodes_per_axis, Rng& rng) {
  return sample_grid_ope(make_grid_ope_sampler(spec, nodes_per_axis), rng);
}

void save_projection_kernel(const ProjectionKernel& pk, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_projection_kernel: cannot open " + path);
  out << std::setprecision(17);
  out << pk.n() << " " << pk.rank() << "\n";
  for (Eigen::Index i = 0; i < pk.n(); ++i) {
    for (int k = 0; k < pk.rank(); ++k) {
      out << pk.basis(i, k) << (k + 1 == pk.rank() ? "\n" : " ");
    }
  }
  for (Eigen::Index i = 0; i < pk.n(); ++i) {
    out << pk.marginals[i] << (i + 1 == pk.n() ? "\n" : " ");
  }
  if (!out) throw std::runtime_error("save_projection_kernel: write failed for " + path);
}

ProjectionKernel load_projection_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_projection_kernel: cannot open " + path);
  Eigen::Index n = 0;
  int p = 0;
  if (!(in >> n >> p) || n < 1 || p < 1 || p > n) {
    throw std::runtime_error("load_projection_kernel: bad header in " + path);
  }
  ProjectionKernel pk;
  pk.basis.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < p; ++k) {
      if (!(in >> pk.basis(i, k))) {
        throw std::runtime_error("load_projection_kernel: truncated factor in " + path);
      }
    }
  }
  pk.marginals.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(in >> pk.marginals[i])) {
      throw std::runtime_error("load_projection_kernel: truncated marginals in " + path);
    }
  }
  pk.input_spectrum = Eigen::VectorXd::Ones(p);
  return pk;
}

OpeSpec ope_from_data(const DataSet& ds, int p) {
  if (!ds.in_cube()) {
    throw std::invalid_argument("ope_from_data: data outside [-1,1]^d; scale it first");
  }
  const int d = ds.dim();
  const std::vector<MultiIndex> indices = graded_lex_indices(d, p);
  std::vector<int> degrees(d, 0);
  for (const MultiIndex& idx : indices) {
    for (int j = 0; j < d; ++j) degrees[j] = std::max(degrees[j], idx[j]);
  }
  std::vector<JacobiBasis> bases;
  bases.reserve(d);
  for (int j = 0; j < d; ++j) {
    const auto [mean, var] = marginal_moments(ds, j);
    JacobiParams params{0.0, 0.0};
    if (std::abs(mean) < 1.0 && var > 0.0 && var < 1.0) {
      params = fit_jacobi_params(mean, var);
    }
    // cd_kernel at rank m needs degree m, one past the largest exponent.
    bases.emplace_back(params, degrees[j] + 1);
  }
  return OpeSpec(std::move(bases), p);
}

}  // namespace dppsgd
