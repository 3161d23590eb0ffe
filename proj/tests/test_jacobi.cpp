#include <doctest.h>

#include <cmath>

#include "dppsgd/jacobi.hpp"
#include "dppsgd/rng.hpp"
#include "oracles.hpp"

using namespace dppsgd;

namespace {

// Dense grid search at 1e-3 resolution over [-1/2,1/2]^2; the moment formulas
// it relies on are themselves validated against tanh-sinh integration below.
JacobiParams grid_fit(double mean, double var) {
  JacobiParams best{0, 0};
  double best_f = 1e300;
  for (int ia = -500; ia <= 500; ++ia) {
    for (int ib = -500; ib <= 500; ++ib) {
      const JacobiParams p{ia * 1e-3, ib * 1e-3};
      const double dm = jacobi_weight_mean(p) - mean;
      const double dv = jacobi_weight_variance(p) - var;
      const double f = dm * dm + dv * dv;
      if (f < best_f) {
        best_f = f;
        best = p;
      }
    }
  }
  return best;
}

double mismatch(const JacobiParams& p, double mean, double var) {
  const double dm = jacobi_weight_mean(p) - mean;
  const double dv = jacobi_weight_variance(p) - var;
  return dm * dm + dv * dv;
}

}  // namespace

TEST_SUITE("jacobi") {

TEST_CASE("closed-form moments agree with quadrature") {
  Rng rng(11);
  for (int trial = 0; trial < 12; ++trial) {
    const JacobiParams p{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const double mean_quad = static_cast<double>(oracles::integrate_jacobi(
        p.alpha, p.beta, [](long double x) { return x; }));
    const double m2_quad = static_cast<double>(oracles::integrate_jacobi(
        p.alpha, p.beta, [](long double x) { return x * x; }));
    CHECK(jacobi_weight_mean(p) == doctest::Approx(mean_quad).epsilon(1e-10));
    CHECK(jacobi_weight_variance(p) ==
          doctest::Approx(m2_quad - mean_quad * mean_quad).epsilon(1e-10));
  }
}

TEST_CASE("fit: uniform moments give the flat weight") {
  const JacobiParams p = fit_jacobi_params(0.0, 1.0 / 3.0);
  CHECK(std::abs(p.alpha) < 1e-12);
  CHECK(std::abs(p.beta) < 1e-12);
}

TEST_CASE("fit: interior target matches the dense grid oracle") {
  const JacobiParams fit = fit_jacobi_params(0.2, 0.3);
  const JacobiParams grid = grid_fit(0.2, 0.3);
  CHECK(std::abs(fit.alpha - grid.alpha) <= 2e-3);
  CHECK(std::abs(fit.beta - grid.beta) <= 2e-3);
  CHECK(mismatch(fit, 0.2, 0.3) <= mismatch(grid, 0.2, 0.3) + 1e-12);
}

TEST_CASE("fit: infeasible target lands on the boundary, best in grid terms") {
  const JacobiParams fit = fit_jacobi_params(0.9, 0.5);
  CHECK(std::max(std::abs(fit.alpha), std::abs(fit.beta)) ==
        doctest::Approx(0.5).epsilon(1e-12));
  const JacobiParams grid = grid_fit(0.9, 0.5);
  CHECK(mismatch(fit, 0.9, 0.5) <= mismatch(grid, 0.9, 0.5) + 1e-12);
  CHECK(std::abs(fit.alpha - grid.alpha) <= 2e-3);
  CHECK(std::abs(fit.beta - grid.beta) <= 2e-3);
}

TEST_CASE("fit: round trip reproduces interior-feasible moments to 1e-6") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const JacobiParams truth{rng.uniform(-0.45, 0.45), rng.uniform(-0.45, 0.45)};
    const double mean = jacobi_weight_mean(truth);
    const double var = jacobi_weight_variance(truth);
    const JacobiParams fit = fit_jacobi_params(mean, var);
    // Verify via quadrature, not via the same closed forms the fit used.
    const double mean_q = static_cast<double>(oracles::integrate_jacobi(
        fit.alpha, fit.beta, [](long double x) { return x; }));
    const double m2_q = static_cast<double>(oracles::integrate_jacobi(
        fit.alpha, fit.beta, [](long double x) { return x * x; }));
    CHECK(std::abs(mean_q - mean) <= 1e-6);
    CHECK(std::abs(m2_q - mean_q * mean_q - var) <= 1e-6);
  }
}

TEST_CASE("recurrence: symmetric weight has zero diagonal") {
  const JacobiRecurrence rec = jacobi_recurrence({0.0, 0.0}, 25);
  for (int k = 0; k <= 25; ++k) CHECK(rec.a[k] == 0.0);
}

TEST_CASE("recurrence: b_n decreases to the Nevai limit 1/2") {
  const JacobiRecurrence rec = jacobi_recurrence({0.0, 0.0}, 25);
  for (int k = 2; k <= 25; ++k) {
    CHECK(rec.b[k] < rec.b[k - 1]);
    CHECK(rec.b[k] > 0.5);
  }
  CHECK(std::abs(rec.b[20] - 0.5) < 0.01);
}

TEST_CASE("recurrence-built polynomials match the Gram-Schmidt oracle") {
  Rng rng(37);
  for (const JacobiParams p :
       {JacobiParams{0.0, 0.0}, JacobiParams{0.5, -0.5}, JacobiParams{-0.37, 0.21},
        JacobiParams{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)}}) {
    const JacobiBasis basis(p, 10);
    const oracles::GramSchmidtOracle gs(p.alpha, p.beta, 10);
    for (int n = 0; n <= 10; ++n) {
      for (double x : {-0.95, -0.5, 0.0, 0.3, 0.77}) {
        const double expected = static_cast<double>(gs.eval(n, x));
        // The oracle's sign convention may flip; orthonormal families are
        // unique up to sign per degree.
        const double got = basis.eval(n, x);
        CHECK(std::min(std::abs(got - expected), std::abs(got + expected)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("eval: degree zero is the constant 1") {
  const JacobiBasis basis({0.31, -0.12}, 6);
  for (double x : {-1.0, -0.3, 0.0, 0.9, 1.0}) {
    CHECK(basis.eval(0, x) == 1.0);
  }
}

TEST_CASE("eval: uniform weight, phi_1(x) = sqrt(3) x") {
  const JacobiBasis basis({0.0, 0.0}, 3);
  CHECK(basis.eval(1, 0.5) == doctest::Approx(std::sqrt(3.0) * 0.5).epsilon(1e-14));
}

TEST_CASE("eval: uniform weight, phi_2(0) against the oracle") {
  const JacobiBasis basis({0.0, 0.0}, 3);
  const oracles::GramSchmidtOracle gs(0.0, 0.0, 3);
  const double expected = static_cast<double>(gs.eval(2, 0.0));
  const double got = basis.eval(2, 0.0);
  CHECK(std::min(std::abs(got - expected), std::abs(got + expected)) <= 1e-10);
  // Known value for the orthonormal Legendre family: -sqrt(5)/2.
  CHECK(std::abs(std::abs(got) - std::sqrt(5.0) / 2.0) <= 1e-12);
}

TEST_CASE("eval: degree past max_degree throws") {
  const JacobiBasis basis({0.0, 0.0}, 4);
  CHECK_THROWS_AS(basis.eval(5, 0.1), std::out_of_range);
}

TEST_CASE("eval: stable at degree 100") {
  const JacobiBasis basis({-0.4, 0.4}, 100);
  for (double x : {-0.99, -0.2, 0.6, 0.98}) {
    const double v = basis.eval(100, x);
    CHECK(std::isfinite(v));
    CHECK(std::abs(v) < 1e4);
  }
}

TEST_CASE("orthonormality under quadrature for 100 random parameter pairs") {
  Rng rng(41);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const JacobiParams p{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const JacobiBasis basis(p, 10);
    for (int i = 0; i <= 10; ++i) {
      for (int j = i; j <= 10; ++j) {
        const long double ip = oracles::integrate_jacobi(
            p.alpha, p.beta, [&](long double x) {
              return static_cast<long double>(basis.eval(i, static_cast<double>(x))) *
                     static_cast<long double>(basis.eval(j, static_cast<double>(x)));
            });
        const double target = i == j ? 1.0 : 0.0;
        worst = std::max(worst, std::abs(static_cast<double>(ip) - target));
      }
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("cd kernel: rank one is identically 1") {
  const JacobiBasis basis({0.2, -0.3}, 4);
  CHECK(basis.cd_kernel(1, 0.4, -0.8) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(basis.cd_kernel(1, 0.1, 0.1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("cd kernel equals the direct sum") {
  const JacobiBasis basis({0.0, 0.0}, 6);
  Eigen::VectorXd px(5), py(5);
  basis.eval_all(0.3, px);
  basis.eval_all(-0.2, py);
  CHECK(std::abs(basis.cd_kernel(5, 0.3, -0.2) - px.dot(py)) <= 1e-10);
  basis.eval_all(0.3, py);
  CHECK(std::abs(basis.cd_kernel(5, 0.3, 0.3) - px.dot(py)) <= 1e-12);
}

TEST_CASE("cd identity on a grid, both branches, random weights") {
  Rng rng(53);
  for (int trial = 0; trial < 3; ++trial) {
    const JacobiParams p{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const JacobiBasis basis(p, 6);
    Eigen::VectorXd px(5), py(5);
    double worst = 0.0;
    for (int a = 0; a < 50; ++a) {
      for (int b = 0; b < 50; ++b) {
        const double x = -0.98 + 1.96 * a / 49.0;
        const double y = -0.98 + 1.96 * b / 49.0;
        if (std::abs(x - y) < 1e-6) continue;
        basis.eval_all(x, px);
        basis.eval_all(y, py);
        worst = std::max(worst, std::abs(basis.cd_kernel(5, x, y) - px.dot(py)));
      }
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("off-diagonal kernel mass trend is non-increasing in m") {
  // (1/m) * E_{x,y~q}[(x-y)^2 K^(m)(x,y)^2] for the uniform weight, fixed seed.
  const JacobiBasis basis({0.0, 0.0}, 33);
  Rng rng(67);
  const int samples = 100000;
  std::vector<double> xs(samples), ys(samples);
  for (int s = 0; s < samples; ++s) {
    xs[s] = rng.uniform(-1.0, 1.0);
    ys[s] = rng.uniform(-1.0, 1.0);
  }
  double prev = 1e300;
  for (const int m : {4, 8, 16, 32}) {
    double acc = 0.0;
    for (int s = 0; s < samples; ++s) {
      const double k = basis.cd_kernel(m, xs[s], ys[s]);
      const double dxy = xs[s] - ys[s];
      acc += dxy * dxy * k * k;
    }
    const double value = acc / samples / m;
    CHECK(value < prev);
    prev = value;
  }
}

TEST_CASE("gauss rule: weights sum to one, nodes inside, moments exact") {
  Rng rng(71);
  for (int trial = 0; trial < 5; ++trial) {
    const JacobiParams p{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const int n = 8;
    const QuadratureRule rule = gauss_jacobi_rule(p, n);
    CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rule.nodes.minCoeff() > -1.0);
    CHECK(rule.nodes.maxCoeff() < 1.0);
    for (int k = 1; k <= 2 * n - 1; k += 3) {
      const double quad = (rule.nodes.array().pow(k) * rule.weights.array()).sum();
      const double exact = static_cast<double>(oracles::integrate_jacobi(
          p.alpha, p.beta, [k](long double x) { return oracles::int_pow(x, k); }));
      CHECK(std::abs(quad - exact) <= 1e-10);
    }
  }
}

}  // TEST_SUITE
