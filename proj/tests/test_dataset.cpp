#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dppsgd/dataset.hpp"

using namespace dppsgd;

TEST_SUITE("dataset") {

TEST_CASE("synthetic linear: shape, cube bound, fused label column") {
  SyntheticConfig cfg;
  cfg.n = 1000;
  cfg.d = 3;
  cfg.seed = 1;
  const DataSet ds = generate_synthetic(cfg);
  CHECK(ds.n() == 1000);
  CHECK(ds.dim() == 3);
  CHECK(ds.feature_dim == 2);
  CHECK(ds.label_fused);
  CHECK(ds.in_cube());
  CHECK(ds.labels.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((ds.points.col(2) - ds.labels).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("synthetic: zero map gives zero labels") {
  SyntheticConfig cfg;
  cfg.n = 40;
  cfg.d = 3;
  cfg.noise_sd = 0.0;
  cfg.theta_true = Eigen::VectorXd::Zero(2);
  const DataSet ds = generate_synthetic(cfg);
  CHECK(ds.labels.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("synthetic: deterministic under a fixed seed") {
  SyntheticConfig cfg;
  cfg.n = 50;
  cfg.d = 2;
  cfg.seed = 7;
  const DataSet a = generate_synthetic(cfg);
  const DataSet b = generate_synthetic(cfg);
  CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.labels - b.labels).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("synthetic logistic: labels are signs, points carry features only") {
  SyntheticConfig cfg;
  cfg.n = 200;
  cfg.d = 4;
  cfg.task = Task::Logistic;
  cfg.seed = 3;
  const DataSet ds = generate_synthetic(cfg);
  CHECK(ds.dim() == 3);
  CHECK(!ds.label_fused);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    CHECK(std::abs(ds.labels[i]) == 1.0);
  }
}

TEST_CASE("synthetic mixture: stays inside the cube, both modes populated") {
  SyntheticConfig cfg;
  cfg.n = 500;
  cfg.d = 3;
  cfg.feature_law = FeatureLaw::GaussianMixture2;
  cfg.seed = 11;
  const DataSet ds = generate_synthetic(cfg);
  CHECK(ds.in_cube());
  int le = 0, gt = 0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    (ds.points(i, 0) < 0 ? le : gt) += 1;
  }
  CHECK(le > 50);
  CHECK(gt > 50);
  CHECK(generate_synthetic(cfg).points == ds.points);
}

TEST_CASE("synthetic: rejects d < 2") {
  SyntheticConfig cfg;
  cfg.d = 1;
  CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
}

TEST_CASE("libsvm: dense fill with zero gaps") {
  std::istringstream in("3 1:0.5 4:-1\n");
  const DataSet ds = parse_libsvm(in, 4);
  REQUIRE(ds.n() == 1);
  CHECK(ds.points(0, 0) == 0.5);
  CHECK(ds.points(0, 1) == 0.0);
  CHECK(ds.points(0, 2) == 0.0);
  CHECK(ds.points(0, 3) == -1.0);
  CHECK(ds.labels[0] == 3.0);
}

TEST_CASE("libsvm: empty feature list gives a zero row") {
  std::istringstream in("2\n1 1:0.25\n");
  const DataSet ds = parse_libsvm(in);
  REQUIRE(ds.n() == 2);
  CHECK(ds.points.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(ds.labels[0] == 2.0);
  CHECK(ds.points(1, 0) == 0.25);
}

TEST_CASE("libsvm: malformed line errors carry the line number") {
  std::istringstream bad("1 1:0.5\n-1 2=0.25\n");
  CHECK_THROWS_WITH_AS(parse_libsvm(bad), doctest::Contains("line 2"),
                       std::runtime_error);
  std::istringstream nonmono("1 3:0.5 2:0.25\n");
  CHECK_THROWS_WITH_AS(parse_libsvm(nonmono), doctest::Contains("non-increasing"),
                       std::runtime_error);
}

TEST_CASE("binarize_letter: rule and boundaries") {
  DataSet ds;
  ds.points = Eigen::MatrixXd::Zero(4, 2);
  ds.feature_dim = 2;
  ds.labels.resize(4);
  ds.labels << 1, 26, 13, 14;
  const DataSet out = binarize_letter(ds);
  CHECK(out.labels[0] == 1.0);
  CHECK(out.labels[1] == -1.0);
  CHECK(out.labels[2] == 1.0);
  CHECK(out.labels[3] == -1.0);
  ds.labels[0] = 27;
  CHECK_THROWS_AS(binarize_letter(ds), std::invalid_argument);
}

TEST_CASE("scale_to_cube: affine endpoints and identity case") {
  DataSet ds;
  ds.points.resize(2, 1);
  ds.points << 0.0, 10.0;
  ds.feature_dim = 1;
  const DataSet out = scale_to_cube(ds, 0.0);
  CHECK(out.points(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(out.points(1, 0) == doctest::Approx(1.0).epsilon(1e-15));

  DataSet in_range;
  in_range.points.resize(3, 1);
  in_range.points << -1.0, 0.25, 1.0;
  in_range.feature_dim = 1;
  const DataSet same = scale_to_cube(in_range, 0.0);
  CHECK((same.points - in_range.points).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("scale_to_cube: constant column flattens to zero with a flag") {
  DataSet ds;
  ds.points.resize(3, 2);
  ds.points << 5.0, 1.0, 5.0, 2.0, 5.0, 3.0;
  ds.feature_dim = 2;
  ScaleMap map;
  const DataSet out = scale_to_cube(ds, 0.0, &map);
  CHECK(out.points.col(0).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(out.constant_columns.size() == 1);
  CHECK(out.constant_columns[0] == 0);
  CHECK(map.scale[1] > 0.0);
}

TEST_CASE("scale_to_cube: idempotent at fixed margin") {
  DataSet ds;
  ds.points.resize(4, 2);
  ds.points << -3.0, 0.5, 7.0, 2.5, 1.0, -4.0, 2.0, 0.0;
  ds.feature_dim = 2;
  const DataSet once = scale_to_cube(ds, 0.05);
  const DataSet twice = scale_to_cube(once, 0.05);
  CHECK((twice.points - once.points).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("scale_to_cube: margin keeps data away from the border") {
  DataSet ds;
  ds.points.resize(5, 1);
  ds.points << 0.0, 1.0, 2.0, 3.0, 16.0;
  ds.feature_dim = 1;
  const DataSet out = scale_to_cube(ds, 0.05);
  CHECK(out.points.cwiseAbs().maxCoeff() == doctest::Approx(0.95).epsilon(1e-15));
}

TEST_CASE("marginal_moments: two-point, constant, and uniform sample") {
  DataSet ds;
  ds.points.resize(2, 2);
  ds.points << -1.0, 4.0, 1.0, 4.0;
  ds.feature_dim = 2;
  auto [m0, v0] = marginal_moments(ds, 0);
  CHECK(m0 == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(v0 == doctest::Approx(1.0).epsilon(1e-15));
  auto [m1, v1] = marginal_moments(ds, 1);
  CHECK(m1 == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(v1 == 0.0);

  SyntheticConfig cfg;
  cfg.n = 100000;
  cfg.d = 2;
  cfg.seed = 5;
  const DataSet big = generate_synthetic(cfg);
  auto [mu, vu] = marginal_moments(big, 0);
  CHECK(std::abs(mu) <= 0.01);
  CHECK(std::abs(vu - 1.0 / 3.0) <= 0.01);
}

TEST_CASE("features_only strips the fused label column") {
  SyntheticConfig cfg;
  cfg.n = 30;
  cfg.d = 3;
  cfg.seed = 9;
  const DataSet fused = generate_synthetic(cfg);
  const DataSet feats = features_only(fused);
  CHECK(feats.dim() == 2);
  CHECK(feats.feature_dim == 2);
  CHECK(!feats.label_fused);
  CHECK((feats.points - fused.points.leftCols(2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((feats.labels - fused.labels).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("csv export emits the documented header") {
  SyntheticConfig cfg;
  cfg.n = 3;
  cfg.d = 3;
  cfg.seed = 2;
  const DataSet ds = generate_synthetic(cfg);
  std::ostringstream out;
  write_dataset_csv(ds, out);
  const std::string text = out.str();
  CHECK(text.rfind("x0,x1,y\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

}  // TEST_SUITE
