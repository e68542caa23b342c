#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "nsfide/fbm.hpp"
#include "nsfide/rng.hpp"

using namespace nsfide;

namespace {

// Independent Beta oracle: singularity-removing substitutions on both
// endpoints, then composite Gauss-Legendre.
double beta_by_quadrature(double a, double b) {
  auto gl = [](auto&& fn, double lo, double hi) {
    static const double x[8] = {-0.9602898564975363, -0.7966664774136267,
                                -0.5255324099163290, -0.1834346424956498,
                                0.1834346424956498,  0.5255324099163290,
                                0.7966664774136267,  0.9602898564975363};
    static const double w[8] = {0.1012285362903763, 0.2223810344533745,
                                0.3137066458778873, 0.3626837833783620,
                                0.3626837833783620, 0.3137066458778873,
                                0.2223810344533745, 0.1012285362903763};
    double acc = 0.0;
    const int panels = 32;
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double c = lo + (p + 0.5) * h;
      for (int q = 0; q < 8; ++q) acc += w[q] * fn(c + 0.5 * h * x[q]);
      }
    return acc * 0.5 * h;
  };
  // int_0^{1/2} x^{a-1}(1-x)^{b-1} dx with x = u^{1/a}
  const double i1 = gl([&](double u) { return std::pow(1.0 - std::pow(u, 1.0 / a), b - 1.0) / a; },
                       0.0, std::pow(0.5, a));
  // int_{1/2}^1 with 1-x = v^{1/b}
  const double i2 = gl([&](double v) { return std::pow(1.0 - std::pow(v, 1.0 / b), a - 1.0) / b; },
                       0.0, std::pow(0.5, b));
  return i1 + i2;
}

}  // namespace

TEST_SUITE("fbm_core") {

TEST_CASE("covariance closed form and edge cases") {
  const HurstParameter h(0.75);
  CHECK(fbm::covariance(0.7, 0.7, h) == doctest::Approx(std::pow(0.7, 1.5)).epsilon(1e-14));
  CHECK(fbm::covariance(0.0, 0.9, h) == doctest::Approx(0.0));
  CHECK(fbm::covariance(1.0, 2.0, h) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));  // (1 + 2^1.5 - 1)/2
  CHECK(fbm::covariance(0.3, 0.8, h) == fbm::covariance(0.8, 0.3, h));
  CHECK_THROWS_AS(fbm::covariance(-0.1, 0.5, h), std::invalid_argument);
  CHECK_THROWS_AS(HurstParameter(0.5), std::invalid_argument);
  CHECK_THROWS_AS(HurstParameter(1.0), std::invalid_argument);
}

TEST_CASE("covariance collapses to Brownian at the boundary") {
  const HurstParameter h(0.5 + 1e-12);
  for (auto [s, t] : {std::pair{0.3, 0.9}, {0.5, 0.5}, {1.4, 0.2}})
    CHECK(fbm::covariance(s, t, h) == doctest::Approx(std::min(s, t)).epsilon(1e-9));
}

TEST_CASE("covariance Gram matrix is positive semidefinite") {
  const HurstParameter h(0.8);
  Eigen::MatrixXd gram(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      gram(i, j) = fbm::covariance(0.1 * (i + 1), 0.1 * (j + 1), h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("normalizing constant against two independent Beta routes") {
  for (double hh : {0.6, 0.75, 0.9}) {
    const HurstParameter h(hh);
    const double c = fbm::normalizing_constant(h);
    CHECK(c > 0.0);
    CHECK(std::isfinite(c));
    // direct Gamma-function route
    const double beta_gamma = std::tgamma(2.0 - 2.0 * hh) * std::tgamma(hh - 0.5) /
                              std::tgamma(1.5 - hh);
    CHECK(c == doctest::Approx(std::sqrt(hh * (2.0 * hh - 1.0) / beta_gamma)).epsilon(1e-12));
    // quadrature route
    const double beta_quad = beta_by_quadrature(2.0 - 2.0 * hh, hh - 0.5);
    CHECK(fbm::beta_function(2.0 - 2.0 * hh, hh - 0.5) ==
          doctest::Approx(beta_quad).epsilon(1e-10));
  }
}

TEST_CASE("kernel vanishes on the closed lower triangle and rejects s = 0") {
  const HurstParameter h(0.7);
  CHECK(fbm::kernel_K(0.4, 0.4, h) == 0.0);
  CHECK(fbm::kernel_K(0.3, 0.4, h) == 0.0);
  CHECK_THROWS_AS(fbm::kernel_K(0.5, 0.0, h), std::invalid_argument);
}

TEST_CASE("kernel quadrature is self-consistent under refinement") {
  for (double hh : {0.6, 0.75, 0.9}) {
    const HurstParameter h(hh);
    for (auto [t, s] : {std::pair{1.0, 0.3}, {0.9, 0.05}, {0.31, 0.3}}) {
      const double coarse = fbm::kernel_K(t, s, h, {8, 8});
      const double fine = fbm::kernel_K(t, s, h, {32, 12});
      CHECK(coarse == doctest::Approx(fine).epsilon(1e-6));
    }
  }
}

TEST_CASE("kernel squares integrate to the variance") {
  // int_0^t K(t,s)^2 ds = t^{2H}; both endpoint singularities of K^2
  // (s^{1-2H} at 0, (t-s)^{2H-1} derivative blowup at t) are removed by
  // power substitutions before composite Gauss-Legendre.
  for (double hh : {0.65, 0.8}) {
    const HurstParameter h(hh);
    const double t = 1.0;
    auto gl64 = [](auto&& fn, double lo, double hi) {
      static const double x[8] = {-0.9602898564975363, -0.7966664774136267,
                                  -0.5255324099163290, -0.1834346424956498,
                                  0.1834346424956498,  0.5255324099163290,
                                  0.7966664774136267,  0.9602898564975363};
      static const double w[8] = {0.1012285362903763, 0.2223810344533745,
                                  0.3137066458778873, 0.3626837833783620,
                                  0.3626837833783620, 0.3137066458778873,
                                  0.2223810344533745, 0.1012285362903763};
      double acc = 0.0;
      const int panels = 24;
      const double hh2 = (hi - lo) / panels;
      for (int p = 0; p < panels; ++p) {
        const double c = lo + (p + 0.5) * hh2;
        for (int q = 0; q < 8; ++q) acc += w[q] * fn(c + 0.5 * hh2 * x[q]);
      }
      return acc * 0.5 * hh2;
    };
    const fbm::KernelQuadrature fine{24, 10};
    const double p_lo = 1.0 / (2.0 - 2.0 * hh);  // s = w^p regularizes s -> 0
    const double half_lo = gl64(
        [&](double w) {
          const double s = std::pow(w, p_lo);
          const double k = fbm::kernel_K(t, s, h, fine);
          return k * k * p_lo * std::pow(w, p_lo - 1.0);
        },
        0.0, std::pow(0.5 * t, 1.0 / p_lo));
    const double q_hi = 1.0 / (2.0 * hh);  // t - s = u^q regularizes s -> t
    const double half_hi = gl64(
        [&](double u) {
          const double s = t - std::pow(u, q_hi);
          const double k = fbm::kernel_K(t, s, h, fine);
          return k * k * q_hi * std::pow(u, q_hi - 1.0);
        },
        0.0, std::pow(0.5 * t, 1.0 / q_hi));
    CHECK(half_lo + half_hi == doctest::Approx(std::pow(t, 2.0 * hh)).epsilon(1e-3));
  }
}

TEST_CASE("kernel transpose of the full indicator recovers the kernel") {
  const HurstParameter h(0.75);
  const TimeGrid g(1.0, 256);
  std::vector<double> ones(g.n_points(), 1.0);
  const auto ks = fbm::kernel_K_star_apply(ScalarFunctionOnGrid(g, ones), h);
  double worst = 0.0;
  for (std::size_t m = 8; m < g.n_steps(); m += 16) {
    const double s = g.midpoint(m);
    const double exact = fbm::kernel_K(1.0, s, h, {32, 12});
    worst = std::max(worst, std::abs(ks[m] - exact) / exact);
  }
  CHECK(worst <= 2e-3);
}

TEST_CASE("kernel transpose of zero is zero") {
  const HurstParameter h(0.6);
  const TimeGrid g(1.0, 64);
  const auto ks = fbm::kernel_K_star_apply(ScalarFunctionOnGrid::zero(g), h);
  for (double v : ks) CHECK(v == 0.0);
}

TEST_CASE("weighted inner product reproduces the covariance on indicators") {
  const HurstParameter h(0.7);
  const TimeGrid g(1.0, 128);
  GaussianSampler rng(99);
  for (int rep = 0; rep < 10; ++rep) {
    const auto k = 1 + static_cast<std::size_t>(rng.uniform() * 127);
    const auto l = 1 + static_cast<std::size_t>(rng.uniform() * 127);
    const double ip = fbm::inner_product_H(ScalarFunctionOnGrid::indicator(g, k),
                                           ScalarFunctionOnGrid::indicator(g, l), h);
    const double cov = fbm::covariance(g.point(k), g.point(l), h);
    CHECK(ip == doctest::Approx(cov).epsilon(1e-3));
  }
}

TEST_CASE("weighted inner product is symmetric and positive") {
  const HurstParameter h(0.85);
  const TimeGrid g(1.0, 64);
  std::vector<double> a(g.n_points()), b(g.n_points());
  for (std::size_t i = 0; i < g.n_points(); ++i) {
    a[i] = std::sin(3.0 * g.point(i));
    b[i] = std::exp(-g.point(i));
  }
  const ScalarFunctionOnGrid fa(g, a), fb(g, b);
  CHECK(fbm::inner_product_H(fa, fb, h) == fbm::inner_product_H(fb, fa, h));
  CHECK(fbm::inner_product_H(fa, fa, h) >= 0.0);
  CHECK(fbm::inner_product_H(fb, fb, h) >= 0.0);
  const TimeGrid g2(1.0, 32);
  CHECK_THROWS_AS(fbm::inner_product_H(fa, ScalarFunctionOnGrid::zero(g2), h),
                  std::invalid_argument);
}

TEST_CASE("kernel transpose is an isometry up to quadrature error") {
  const HurstParameter h(0.75);
  const TimeGrid g(1.0, 512);
  std::vector<double> v(g.n_points());
  for (std::size_t i = 0; i < g.n_points(); ++i) v[i] = g.point(i) < 0.5 ? 1.0 : 0.0;
  const ScalarFunctionOnGrid phi(g, v);
  const auto ks = fbm::kernel_K_star_apply(phi, h);
  double l2 = 0.0;
  for (double x : ks) l2 += x * x * g.dt();
  const double ip = fbm::inner_product_H(phi, phi, h);
  CHECK(std::abs(l2 - ip) / ip <= 2e-2);
}

TEST_CASE("exact sampler is deterministic and centered") {
  const HurstParameter h(0.7);
  const TimeGrid g(1.0, 8);
  const fbm::CholeskyFbmSampler sampler(g, h);
  const auto p1 = sampler.sample(42);
  const auto p2 = sampler.sample(42);
  CHECK(p1.values == p2.values);
  CHECK(p1.values[0] == 0.0);

  const std::size_t paths = 4000;
  std::vector<double> mean(8, 0.0), second(8, 0.0);
  for (std::size_t p = 0; p < paths; ++p) {
    const auto smp = sampler.sample(derive_seed(7, p));
    for (std::size_t i = 0; i < 8; ++i) {
      mean[i] += smp.values[i + 1];
      second[i] += smp.values[i + 1] * smp.values[i + 1];
    }
  }
  for (std::size_t i = 0; i < 8; ++i) {
    mean[i] /= paths;
    second[i] /= paths;
    const double var = fbm::covariance(g.point(i + 1), g.point(i + 1), h);
    CHECK(std::abs(mean[i]) <= 3.0 * std::sqrt(var / paths));
    CHECK(std::abs(second[i] - var) <= 3.0 * var * std::sqrt(2.0 / (paths - 1.0)));
  }
}

TEST_CASE("kernel sampler: zero increments give the zero path") {
  const HurstParameter h(0.8);
  const TimeGrid g(1.0, 16);
  const fbm::WienerFbmSampler sampler(g, h);
  const auto path = sampler.path_from_increments(std::vector<double>(16, 0.0));
  for (double v : path.values) CHECK(v == 0.0);
}

TEST_CASE("kernel sampler covariance approaches the closed form") {
  const HurstParameter h(0.75);
  const TimeGrid g(1.0, 256);
  const fbm::WienerFbmSampler sampler(g, h);
  // discrete second moments of the estimator vs R_H: quadrature bias only,
  // dominated by the midpoint deficit on the singular first cell
  for (std::size_t i : {64u, 128u, 256u}) {
    for (std::size_t j : {64u, 192u}) {
      const double rhat = sampler.discrete_covariance(i, j);
      const double r = fbm::covariance(g.point(i), g.point(j), h);
      CHECK(std::abs(rhat - r) / r <= 5e-2);
    }
  }
  CHECK(std::abs(sampler.discrete_covariance(256, 256) - 1.0) <= 2e-2);
}

}  // TEST_SUITE
