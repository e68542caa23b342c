#include <doctest.h>

#include <cmath>

#include "nsfide/integrals.hpp"
#include "nsfide/rng.hpp"

using namespace nsfide;
using namespace nsfide::integrals;

namespace {

IntegrandTrajectory scalar_trajectory(const TimeGrid& g, const std::vector<double>& v) {
  std::vector<spectral::SpectralField> fields(g.n_points(), spectral::SpectralField(1));
  for (std::size_t i = 0; i < fields.size(); ++i) fields[i].coeffs[0] = v[i];
  return IntegrandTrajectory(g, fields);
}

}  // namespace

TEST_SUITE("integrals") {

TEST_CASE("forward sum telescopes for constant integrands") {
  const HurstParameter h(0.75);
  const TimeGrid g(1.0, 64);
  const fbm::FbmSample path = fbm::sample_fbm_cholesky(g, h, 31);

  std::vector<double> c(g.n_points(), 2.5);
  const auto sum = young_riemann_sum(scalar_trajectory(g, c), path, 0, 64);
  CHECK(sum.coeffs[0] == doctest::Approx(2.5 * path.values[64]).epsilon(1e-14));

  std::vector<double> zero(g.n_points(), 0.0);
  CHECK(young_riemann_sum(scalar_trajectory(g, zero), path, 0, 64).coeffs[0] == 0.0);

  CHECK_THROWS_AS(young_riemann_sum(scalar_trajectory(g, c), path, 0, 65),
                  std::invalid_argument);
}

TEST_CASE("forward sum of the driver obeys the discrete square identity") {
  const HurstParameter h(0.75);
  const TimeGrid g(1.0, 256);
  const fbm::FbmSample path = fbm::sample_fbm_cholesky(g, h, 7);
  const auto sum = young_riemann_sum(scalar_trajectory(g, path.values), path, 0, 256);
  double sq = 0.0;
  for (std::size_t j = 0; j < 256; ++j) sq += path.increment(j) * path.increment(j);
  CHECK(sum.coeffs[0] ==
        doctest::Approx(0.5 * path.values[256] * path.values[256] - 0.5 * sq).epsilon(1e-12));
}

TEST_CASE("forward sums of the driver self-converge to the pathwise square") {
  const HurstParameter h(0.75);
  const std::size_t n_fine = 512;
  const TimeGrid fine(1.0, n_fine);
  const fbm::FbmSample path = fbm::sample_fbm_cholesky(fine, h, 12);
  const double target = 0.5 * path.values[n_fine] * path.values[n_fine];
  double prev_err = 1e300;
  for (std::size_t n : {128u, 256u, 512u}) {
    const std::size_t stride = n_fine / n;
    const TimeGrid g(1.0, n);
    fbm::FbmSample sub{g, std::vector<double>(n + 1), 12};
    for (std::size_t k = 0; k <= n; ++k) sub.values[k] = path.values[k * stride];
    const auto sum = young_riemann_sum(scalar_trajectory(g, sub.values), sub, 0, n);
    const double err = std::abs(sum.coeffs[0] - target);
    CHECK(err < prev_err);
    prev_err = err;
  }
}

TEST_CASE("trace of the unit surface integrates the singular weight exactly") {
  for (double hh : {0.6, 0.75, 0.9}) {
    const HurstParameter h(hh);
    const TimeGrid g(1.0, 128);
    DerivativeSurface ones(g, 1);
    for (std::size_t i = 0; i <= 128; ++i)
      for (std::size_t j = 0; j <= i; ++j) ones.entry(i, j).coeffs[0] = 1.0;
    const double trace = trace_correction(ones, h, 0, 128).coeffs[0];
    CHECK(trace == doctest::Approx(0.5).epsilon(1e-12));  // T^{2H}/2 at T = 1
  }
}

TEST_CASE("trace of the zero surface vanishes") {
  const HurstParameter h(0.8);
  const TimeGrid g(1.0, 32);
  const DerivativeSurface zero(g, 2);
  const auto tr = trace_correction(zero, h, 0, 32);
  CHECK(tr.coeffs[0] == 0.0);
  CHECK(tr.coeffs[1] == 0.0);
}

TEST_CASE("window additivity holds exactly") {
  const HurstParameter h(0.7);
  const TimeGrid g(1.0, 64);
  const fbm::FbmSample path = fbm::sample_fbm_cholesky(g, h, 3);
  GaussianSampler rng(77);
  DerivativeSurface surf(g, 1);
  std::vector<double> traj(g.n_points());
  for (std::size_t i = 0; i <= 64; ++i) {
    traj[i] = rng.normal();
    for (std::size_t j = 0; j <= i; ++j) surf.entry(i, j).coeffs[0] = rng.normal();
  }
  const auto u = scalar_trajectory(g, traj);
  const double ya = young_riemann_sum(u, path, 0, 20).coeffs[0];
  const double yb = young_riemann_sum(u, path, 20, 64).coeffs[0];
  const double yfull = young_riemann_sum(u, path, 0, 64).coeffs[0];
  CHECK(ya + yb == doctest::Approx(yfull).epsilon(1e-14));
  const double ta = trace_correction(surf, h, 0, 20).coeffs[0];
  const double tb = trace_correction(surf, h, 20, 64).coeffs[0];
  const double tfull = trace_correction(surf, h, 0, 64).coeffs[0];
  CHECK(ta + tb == doctest::Approx(tfull).epsilon(1e-13));
}

TEST_CASE("deterministic integrands need no correction") {
  const HurstParameter h(0.75);
  const TimeGrid g(1.0, 32);
  const fbm::FbmSample path = fbm::sample_fbm_cholesky(g, h, 5);
  std::vector<double> v(g.n_points());
  for (std::size_t i = 0; i <= 32; ++i) v[i] = std::cos(2.0 * g.point(i));
  const auto u = scalar_trajectory(g, v);
  const DerivativeSurface zero(g, 1);
  const auto sk = skorohod_integral(u, zero, path, h, 0, 32);
  const auto yo = young_riemann_sum(u, path, 0, 32);
  CHECK(sk.coeffs[0] == yo.coeffs[0]);
}

TEST_CASE("anticipating integral of the driver has mean zero") {
  const HurstParameter h(0.75);
  const std::size_t n = 256;
  const TimeGrid g(1.0, n);
  const fbm::CholeskyFbmSampler sampler(g, h);
  DerivativeSurface ones(g, 1);
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= i; ++j) ones.entry(i, j).coeffs[0] = 1.0;
  const double trace = trace_correction(ones, h, 0, n).coeffs[0];

  const std::size_t paths = 2000;
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    const auto path = sampler.sample(derive_seed(2000, p));
    double young = 0.0;
    for (std::size_t j = 0; j < n; ++j) young += path.values[j] * path.increment(j);
    const double delta = young - trace;
    s1 += delta;
    s2 += delta * delta;
  }
  const double mean = s1 / paths;
  const double sd = std::sqrt((s2 - paths * mean * mean) / (paths - 1.0));
  CHECK(std::abs(mean) <= 3.0 * sd / std::sqrt(static_cast<double>(paths)));
}

TEST_CASE("variance oracle on indicator trajectories") {
  const HurstParameter h(0.8);
  const TimeGrid g(1.0, 64);
  std::vector<double> v(g.n_points(), 0.0);
  for (std::size_t i = 0; i < 32; ++i) v[i] = 1.7;  // 1.7 on [0, 1/2)
  const auto var = wiener_variance_oracle(scalar_trajectory(g, v), h);
  CHECK(var[0] == doctest::Approx(1.7 * 1.7 * std::pow(0.5, 1.6)).epsilon(1e-12));

  std::vector<double> zero(g.n_points(), 0.0);
  CHECK(wiener_variance_oracle(scalar_trajectory(g, zero), h)[0] == 0.0);
}

TEST_CASE("disjoint supports still covary under long memory") {
  const HurstParameter h(0.75);
  const std::size_t n = 64;
  const TimeGrid g(1.0, n);
  std::vector<double> a(g.n_points(), 0.0), b(g.n_points(), 0.0);
  for (std::size_t i = 0; i < 32; ++i) a[i] = 1.0;
  for (std::size_t i = 32; i < 64; ++i) b[i] = 1.0;
  const auto ua = scalar_trajectory(g, a), ub = scalar_trajectory(g, b);
  const double cross = wiener_covariance_oracle(ua, ub, h)[0];
  CHECK(cross > 0.0);

  const fbm::CholeskyFbmSampler sampler(g, h);
  const std::size_t paths = 4000;
  double s_ab = 0.0, s_aa = 0.0, s_bb = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    const auto path = sampler.sample(derive_seed(55, p));
    const double da = young_riemann_sum(ua, path, 0, n).coeffs[0];
    const double db = young_riemann_sum(ub, path, 0, n).coeffs[0];
    s_ab += da * db;
    s_aa += da * da;
    s_bb += db * db;
  }
  const double mc_cross = s_ab / paths;
  // SE of the product-moment estimator for jointly Gaussian terms
  const double se = std::sqrt((s_aa / paths * s_bb / paths + mc_cross * mc_cross) /
                              static_cast<double>(paths));
  CHECK(std::abs(mc_cross - cross) <= 3.0 * se);
}

TEST_CASE("variance oracle matches the Monte Carlo spread") {
  const HurstParameter h(0.7);
  const std::size_t n = 64;
  const TimeGrid g(1.0, n);
  std::vector<double> v(g.n_points());
  for (std::size_t i = 0; i <= n; ++i) v[i] = std::exp(-g.point(i));
  const auto u = scalar_trajectory(g, v);
  const double oracle = wiener_variance_oracle(u, h)[0];

  const fbm::CholeskyFbmSampler sampler(g, h);
  const std::size_t paths = 4000;
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    const auto path = sampler.sample(derive_seed(66, p));
    const double d = young_riemann_sum(u, path, 0, n).coeffs[0];
    s1 += d;
    s2 += d * d;
  }
  const double mean = s1 / paths;
  const double var = (s2 - paths * mean * mean) / (paths - 1.0);
  CHECK(std::abs(var - oracle) <= 3.0 * oracle * std::sqrt(2.0 / (paths - 1.0)));
}

}  // TEST_SUITE
