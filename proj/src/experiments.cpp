#include "dppsgd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "dppsgd/estimators.hpp"
#include "dppsgd/version.hpp"

namespace dppsgd {

// ---------------------------------------------------------------------------
// configuration

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: line " + std::to_string(line_no) +
                               ": expected key=value");
    }
    cfg.entries_[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
  return entries_.count(key) > 0;
}

std::string KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw std::runtime_error("config: missing key '" + key + "'");
  read_[key] = true;
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  read_[key] = true;
  return it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return std::stod(get(key));
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  return std::stol(get(key));
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key) const {
  std::vector<int> out;
  std::istringstream in(get(key));
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw std::runtime_error("config: empty list for '" + key + "'");
  return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

std::vector<std::string> KeyValueConfig::unread_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (!read_.count(k)) out.push_back(k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// dataset and pipeline construction

namespace {

Eigen::VectorXd parse_theta_true(const std::string& text, int fdim) {
  std::vector<double> vals;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) vals.push_back(std::stod(tok));
  }
  if (vals.size() == 1) return Eigen::VectorXd::Constant(fdim, vals[0]);
  if (static_cast<int>(vals.size()) != fdim) {
    throw std::runtime_error("config: theta_true needs 1 or d-1 entries");
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), fdim);
}

}  // namespace

ExperimentData build_dataset(const ExperimentConfig& cfg) {
  const KeyValueConfig& c = cfg.raw;
  ExperimentData out;
  const std::string source = c.get_or("data", "synthetic");
  const std::string task_name = c.get_or("task", "linear");
  const LossKind kind = task_name == "logistic" ? LossKind::Logistic : LossKind::Linear;
  if (task_name != "linear" && task_name != "logistic") {
    throw std::runtime_error("config: task must be linear or logistic");
  }

  if (source == "synthetic") {
    SyntheticConfig sc;
    sc.n = static_cast<int>(c.get_long("n", 1000));
    sc.d = static_cast<int>(c.get_long("dim", 3));
    sc.noise_sd = c.get_double("noise_sd", 0.1);
    sc.task = kind == LossKind::Logistic ? Task::Logistic : Task::Linear;
    sc.seed = cfg.seed;
    const std::string law = c.get_or("feature_law", "uniform");
    if (law == "uniform") {
      sc.feature_law = FeatureLaw::Uniform;
    } else if (law == "gaussian-mixture-2") {
      sc.feature_law = FeatureLaw::GaussianMixture2;
    } else {
      throw std::runtime_error("config: feature_law must be uniform or gaussian-mixture-2");
    }
    if (c.has("theta_true")) sc.theta_true = parse_theta_true(c.get("theta_true"), sc.d - 1);
    out.train = generate_synthetic(sc);
  } else if (source == "libsvm") {
    const int n_features = static_cast<int>(c.get_long("n_features", -1));
    out.train = parse_libsvm_file(c.get("train_path"), n_features);
    if (c.has("test_path")) out.test = parse_libsvm_file(c.get("test_path"), out.train.dim());
    if (c.get_or("binarize", "none") == "letter") {
      out.train = binarize_letter(out.train);
      if (out.test) *out.test = binarize_letter(*out.test);
    }
    const double margin = c.get_double("scale_margin", 0.05);
    ScaleMap map;
    out.train = scale_to_cube(out.train, margin, &map);
    if (out.test) {
      // Test features go through the training map and are clamped to the cube.
      DataSet& t = *out.test;
      for (int j = 0; j < t.dim(); ++j) {
        t.points.col(j) = (map.scale[j] * t.points.col(j).array() + map.offset[j])
                              .cwiseMax(-1.0)
                              .cwiseMin(1.0);
      }
    }
  } else {
    throw std::runtime_error("config: data must be synthetic or libsvm");
  }

  const std::string dpp_on = c.get_or("dpp_on", "points");
  if (dpp_on == "features") {
    out.train = features_only(out.train);
  } else if (dpp_on != "points") {
    throw std::runtime_error("config: dpp_on must be points or features");
  }

  out.loss.kind = kind;
  out.loss.lambda0 = c.get_double("lambda0", 0.1);
  out.loss.param_dim = out.train.feature_dim;
  return out;
}

double resolve_bandwidth(const std::string& choice, const DataSet& ds) {
  if (choice == "silverman") return kde_bandwidth_silverman(ds);
  if (choice == "canonical") return kde_bandwidth_canonical(ds.n(), ds.dim());
  const double h = std::stod(choice);
  if (!(h > 0.0)) throw std::runtime_error("config: bandwidth must be positive");
  return h;
}

KernelPipeline build_kernel_pipeline(const DataSet& ds, int p, double bandwidth) {
  KernelPipeline pipe{ope_from_data(ds, p), bandwidth, {}};
  const KdeSpec kde{&ds, bandwidth};
  pipe.pk = saturate(assemble_kernel_matrix(pipe.spec, kde, ds), p);
  return pipe;
}

// ---------------------------------------------------------------------------
// slope fit

SlopeFit slope_fit(const std::vector<std::pair<double, double>>& points) {
  for (const auto& [x, y] : points) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw std::invalid_argument("slope_fit: non-finite input");
    }
  }
  const int n = static_cast<int>(points.size());
  if (n < 3) throw std::invalid_argument("slope_fit: need at least 3 points");
  double sx = 0, sy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("slope_fit: degenerate abscissae");
  SlopeFit fit;
  fit.n_points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (const auto& [x, y] : points) {
    const double r = y - fit.intercept - fit.slope * x;
    rss += r * r;
  }
  fit.stderr_slope = std::sqrt(rss / std::max(1, n - 2) / sxx);
  return fit;
}

int default_slope_pmin(int d) {
  return 1 << static_cast<int>(std::ceil(std::log2(static_cast<double>(d)) + 2.0));
}

// ---------------------------------------------------------------------------
// replicate pool

void parallel_for_index(int count, int threads, const std::function<void(int)>& fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// variance study

namespace {

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t salt) {
  std::uint64_t z = master ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::string> estimator_list(const KeyValueConfig& c) {
  std::vector<std::string> out;
  std::istringstream in(c.get_or("estimators", "poisson,dpp"));
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok != "poisson" && tok != "dpp") {
      throw std::runtime_error("config: estimators must list poisson and/or dpp");
    }
    out.push_back(tok);
  }
  if (out.empty()) throw std::runtime_error("config: no estimators selected");
  return out;
}

}  // namespace

VarianceReport variance_study(const ExperimentConfig& cfg) {
  const KeyValueConfig& c = cfg.raw;
  const ExperimentData data = build_dataset(cfg);
  const DataSet& ds = data.train;
  const LossFn& loss = data.loss;

  const std::vector<int> batch_sizes = c.get_int_list("batch_sizes");
  for (std::size_t i = 1; i < batch_sizes.size(); ++i) {
    if (batch_sizes[i] <= batch_sizes[i - 1]) {
      throw std::runtime_error("config: batch_sizes must be strictly increasing");
    }
  }
  const int replicates = static_cast<int>(c.get_long("replicates", 1000));
  if (replicates < 2) throw std::runtime_error("config: variance estimation needs R >= 2");
  const std::vector<std::string> estimators = estimator_list(c);
  const std::string bw_choice = c.get_or("bandwidth", "silverman");

  const Eigen::VectorXd theta_star = exact_minimizer(ds, loss);
  const Eigen::VectorXd grad_star = grad_full(ds, loss, theta_star);

  VarianceReport report;
  report.replicates = replicates;
  report.grad_norm_at_star = grad_star.norm();
  report.slope_pmin = static_cast<int>(
      c.get_long("slope_pmin", default_slope_pmin(ds.dim())));

  for (const std::string& est : estimators) {
    for (std::size_t pi = 0; pi < batch_sizes.size(); ++pi) {
      const int p = batch_sizes[pi];
      std::optional<KernelPipeline> pipe;
      if (est == "dpp") {
        pipe = build_kernel_pipeline(ds, p, resolve_bandwidth(bw_choice, ds));
      }
      const std::uint64_t salt =
          stream_seed(cfg.seed, (est == "dpp" ? 1000000ULL : 0ULL) + static_cast<std::uint64_t>(p));
      std::vector<double> sq_norm(replicates), centered(replicates);
      parallel_for_index(replicates, cfg.threads, [&](int r) {
        Rng rng = Rng::for_replicate(salt, static_cast<std::uint64_t>(r));
        GradientEstimate xi;
        if (est == "dpp") {
          Minibatch batch = sample_projection_dpp(pipe->pk, rng);
          xi = xi_dpp(ds, loss, theta_star, pipe->pk, batch);
        } else {
          xi = xi_poisson(ds, loss, theta_star, p, rng);
        }
        sq_norm[r] = xi.vector.squaredNorm();
        centered[r] = (xi.vector - grad_star).squaredNorm();
      });
      VariancePoint pt;
      pt.estimator = est;
      pt.p = p;
      for (int r = 0; r < replicates; ++r) {
        pt.second_moment += sq_norm[r];
        pt.trace_cov += centered[r];
      }
      pt.second_moment /= replicates;
      pt.trace_cov /= replicates;
      double var_of_centered = 0.0;
      for (int r = 0; r < replicates; ++r) {
        const double dlt = centered[r] - pt.trace_cov;
        var_of_centered += dlt * dlt;
      }
      var_of_centered /= std::max(1, replicates - 1);
      pt.trace_cov_stderr = std::sqrt(var_of_centered / replicates);
      if (pt.trace_cov < 0.0) {
        pt.trace_cov = 0.0;
        pt.clipped = true;
      }
      pt.in_fit_range = p >= report.slope_pmin && pt.trace_cov > 0.0;
      report.points.push_back(pt);
    }
  }

  for (const std::string& est : estimators) {
    std::vector<std::pair<double, double>> pts;
    for (const VariancePoint& pt : report.points) {
      if (pt.estimator == est && pt.in_fit_range) {
        pts.emplace_back(std::log(static_cast<double>(pt.p)), std::log(pt.trace_cov));
      }
    }
    if (pts.size() < 3) {
      throw std::runtime_error("variance_study: fewer than 3 batch sizes in the fit range");
    }
    report.slopes[est] = slope_fit(pts);
  }
  return report;
}

// ---------------------------------------------------------------------------
// convergence study

CurveReport convergence_study(const ExperimentConfig& cfg) {
  const KeyValueConfig& c = cfg.raw;
  const ExperimentData data = build_dataset(cfg);
  const DataSet& ds = data.train;
  const LossFn& loss = data.loss;

  const std::vector<int> batch_sizes = c.get_int_list("batch_sizes");
  const int replicates = static_cast<int>(c.get_long("replicates", 1000));
  const long budget = c.get_long("budget", 2000);
  const double alpha = c.get_double("alpha", 0.9);
  const double step_scale = c.get_double("step_scale", 1.0);
  const int record_every = static_cast<int>(c.get_long("record_every", 1));
  const std::vector<std::string> estimators = estimator_list(c);
  const std::string bw_choice = c.get_or("bandwidth", "silverman");

  const Eigen::VectorXd theta_star = exact_minimizer(ds, loss);

  CurveReport report;
  report.replicates = replicates;
  report.has_test_error = data.test.has_value();

  for (const std::string& est : estimators) {
    for (const int p : batch_sizes) {
      std::optional<KernelPipeline> pipe;
      if (est == "dpp") {
        pipe = build_kernel_pipeline(ds, p, resolve_bandwidth(bw_choice, ds));
      }
      SgdConfig run;
      run.alpha = alpha;
      run.step_scale = step_scale;
      run.iterations = static_cast<int>(budget / p);
      run.batch_size = p;
      run.kind = est == "dpp" ? EstimatorKind::Dpp : EstimatorKind::Poisson;
      run.record_every = record_every;
      SgdDiagnostics diag;
      diag.theta_star = &theta_star;
      diag.test_data = data.test ? &*data.test : nullptr;

      const std::uint64_t salt =
          stream_seed(cfg.seed, (est == "dpp" ? 2000000ULL : 3000000ULL) +
                                    static_cast<std::uint64_t>(p));
      std::vector<Trajectory> runs(replicates);
      parallel_for_index(replicates, cfg.threads, [&](int r) {
        SgdConfig mine = run;
        mine.seed = stream_seed(salt, static_cast<std::uint64_t>(r));
        runs[r] = run_sgd(ds, loss, mine, pipe ? &pipe->pk : nullptr, diag);
      });

      std::size_t n_records = 0;
      for (const Trajectory& tr : runs) {
        if (tr.diverged) {
          ++report.diverged;
          continue;
        }
        n_records = std::max(n_records, tr.records.size());
      }
      if (n_records == 0) continue;
      for (std::size_t k = 0; k < n_records; ++k) {
        CurvePoint pt;
        pt.estimator = est;
        pt.p = p;
        int used = 0;
        double g1 = 0, g2 = 0, d1 = 0, d2 = 0, o1 = 0, o2 = 0, e1 = 0, e2 = 0;
        for (const Trajectory& tr : runs) {
          if (tr.diverged || k >= tr.records.size()) continue;
          const TrajectoryRecord& rec = tr.records[k];
          pt.t = rec.t;
          pt.budget = rec.budget;
          g1 += rec.grad_norm;
          g2 += rec.grad_norm * rec.grad_norm;
          d1 += rec.dist_to_opt;
          d2 += rec.dist_to_opt * rec.dist_to_opt;
          o1 += rec.objective;
          o2 += rec.objective * rec.objective;
          if (report.has_test_error) {
            e1 += rec.test_error;
            e2 += rec.test_error * rec.test_error;
          }
          ++used;
        }
        if (used == 0) continue;
        auto finish = [used](double s1, double s2, double& mean, double& sem) {
          mean = s1 / used;
          const double var = used > 1 ? std::max(0.0, (s2 - used * mean * mean) / (used - 1)) : 0.0;
          sem = used > 1 ? std::sqrt(var / used) : 0.0;
        };
        finish(g1, g2, pt.grad_norm_mean, pt.grad_norm_sem);
        finish(d1, d2, pt.dist_mean, pt.dist_sem);
        finish(o1, o2, pt.obj_mean, pt.obj_sem);
        if (report.has_test_error) finish(e1, e2, pt.test_err_mean, pt.test_err_sem);
        report.points.push_back(pt);
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// report emission

namespace {

void write_meta_csv(const ExperimentConfig& cfg, std::ostream& out) {
  out << "# version=" << kVersion << "\n";
  out << "# seed=" << cfg.seed << "\n";
  for (const auto& [k, v] : cfg.raw.entries()) {
    out << "# " << k << "=" << v << "\n";
  }
}

nlohmann::json meta_json(const ExperimentConfig& cfg) {
  nlohmann::json meta;
  meta["version"] = kVersion;
  meta["seed"] = cfg.seed;
  nlohmann::json echo;
  for (const auto& [k, v] : cfg.raw.entries()) echo[k] = v;
  meta["config"] = echo;
  return meta;
}

}  // namespace

void write_variance_report(const VarianceReport& report, const ExperimentConfig& cfg,
                           std::ostream& out) {
  out << std::setprecision(17);
  if (cfg.format == "json") {
    nlohmann::json doc;
    doc["meta"] = meta_json(cfg);
    doc["meta"]["replicates"] = report.replicates;
    doc["meta"]["slope_pmin"] = report.slope_pmin;
    doc["meta"]["grad_norm_at_star"] = report.grad_norm_at_star;
    doc["points"] = nlohmann::json::array();
    for (const VariancePoint& pt : report.points) {
      doc["points"].push_back({{"estimator", pt.estimator},
                               {"p", pt.p},
                               {"second_moment", pt.second_moment},
                               {"trace_cov", pt.trace_cov},
                               {"trace_cov_stderr", pt.trace_cov_stderr},
                               {"clipped", pt.clipped},
                               {"in_fit_range", pt.in_fit_range}});
    }
    doc["slopes"] = nlohmann::json::object();
    for (const auto& [est, fit] : report.slopes) {
      doc["slopes"][est] = {{"slope", fit.slope},
                            {"stderr", fit.stderr_slope},
                            {"intercept", fit.intercept},
                            {"n_points", fit.n_points}};
    }
    out << doc.dump(2) << "\n";
    return;
  }
  write_meta_csv(cfg, out);
  out << "# replicates=" << report.replicates << "\n";
  out << "# slope_pmin=" << report.slope_pmin << "\n";
  out << "# grad_norm_at_star=" << report.grad_norm_at_star << "\n";
  for (const auto& [est, fit] : report.slopes) {
    out << "# slope_" << est << "=" << fit.slope << " stderr=" << fit.stderr_slope
        << " n_points=" << fit.n_points << "\n";
  }
  out << "estimator,p,second_moment,trace_cov,trace_cov_stderr,clipped,in_fit_range\n";
  for (const VariancePoint& pt : report.points) {
    out << pt.estimator << "," << pt.p << "," << pt.second_moment << "," << pt.trace_cov
        << "," << pt.trace_cov_stderr << "," << (pt.clipped ? 1 : 0) << ","
        << (pt.in_fit_range ? 1 : 0) << "\n";
  }
}

void write_curve_report(const CurveReport& report, const ExperimentConfig& cfg,
                        std::ostream& out) {
  out << std::setprecision(17);
  if (cfg.format == "json") {
    nlohmann::json doc;
    doc["meta"] = meta_json(cfg);
    doc["meta"]["replicates"] = report.replicates;
    doc["meta"]["diverged"] = report.diverged;
    doc["points"] = nlohmann::json::array();
    for (const CurvePoint& pt : report.points) {
      nlohmann::json row = {{"estimator", pt.estimator}, {"p", pt.p},
                            {"t", pt.t},                 {"budget", pt.budget},
                            {"grad_norm_mean", pt.grad_norm_mean},
                            {"grad_norm_sem", pt.grad_norm_sem},
                            {"dist_mean", pt.dist_mean}, {"dist_sem", pt.dist_sem},
                            {"obj_mean", pt.obj_mean},   {"obj_sem", pt.obj_sem}};
      if (report.has_test_error) {
        row["test_err_mean"] = pt.test_err_mean;
        row["test_err_sem"] = pt.test_err_sem;
      }
      doc["points"].push_back(row);
    }
    out << doc.dump(2) << "\n";
    return;
  }
  write_meta_csv(cfg, out);
  out << "# replicates=" << report.replicates << "\n";
  out << "# diverged=" << report.diverged << "\n";
  out << "estimator,p,t,budget,grad_norm_mean,grad_norm_sem,dist_mean,dist_sem,obj_mean,obj_sem";
  if (report.has_test_error) out << ",test_err_mean,test_err_sem";
  out << "\n";
  for (const CurvePoint& pt : report.points) {
    out << pt.estimator << "," << pt.p << "," << pt.t << "," << pt.budget << ","
        << pt.grad_norm_mean << "," << pt.grad_norm_sem << "," << pt.dist_mean << ","
        << pt.dist_sem << "," << pt.obj_mean << "," << pt.obj_sem;
    if (report.has_test_error) out << "," << pt.test_err_mean << "," << pt.test_err_sem;
    out << "\n";
  }
}

}  // namespace dppsgd
