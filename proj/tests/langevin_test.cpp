#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sgdf/errors.hpp"
#include "sgdf/langevin.hpp"

using namespace sgdf;

namespace {

Potential1D flat_potential(double lo, double hi) {
  Potential1D p;
  p.f = [](double) { return 0.0; };
  p.f_prime = [](double) { return 0.0; };
  p.lo = lo;
  p.hi = hi;
  p.name = "flat";
  return p;
}

double erf_bin_mass(double a, double b, double z_lo, double z_hi) {
  auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  return (cdf(b) - cdf(a)) / (cdf(z_hi) - cdf(z_lo));
}

}  // namespace

TEST_SUITE_BEGIN("langevin");

TEST_CASE("flat potential gives uniform bins") {
  const auto p = analytic_stationary(flat_potential(-2.0, 2.0), 1.0, 40);
  for (double m : p) CHECK(m == doctest::Approx(1.0 / 40).epsilon(1e-12));
}

TEST_CASE("gaussian bin masses match the error-function oracle") {
  const Potential1D pot = quadratic_well(-6.0, 6.0);
  const auto p = analytic_stationary(pot, 1.0, 120);
  const double width = 12.0 / 120.0;
  for (int b = 0; b < 120; ++b) {
    const double lo = -6.0 + width * b;
    const double want = erf_bin_mass(lo, lo + width, -6.0, 6.0);
    CHECK(std::abs(p[b] - want) <= 1e-6);
  }
}

TEST_CASE("an infinite plateau gets zero mass") {
  Potential1D p;
  p.f = [](double x) {
    return std::abs(x) > 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  p.f_prime = [](double) { return 0.0; };
  p.lo = -2.0;
  p.hi = 2.0;
  p.name = "plateau";
  const auto mass = analytic_stationary(p, 1.0, 40);
  for (int b = 0; b < 40; ++b) {
    const double mid = -2.0 + 4.0 * (b + 0.5) / 40.0;
    if (std::abs(mid) > 1.05) CHECK(mass[b] == 0.0);
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("adding a constant to the potential does not move the density") {
  const Potential1D base = double_well(-3.0, 3.0);
  Potential1D shifted = base;
  shifted.f = [&base](double x) { return base.f(x) + 5.0; };
  const auto a = analytic_stationary(base, 0.5, 60);
  const auto b = analytic_stationary(shifted, 0.5, 60);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i] - b[i]) <= 1e-12);
  }
}

TEST_CASE("tv distance worked examples") {
  CHECK(tv_distance({0.5, 0.5}, {0.5, 0.5}) == 0.0);
  CHECK(tv_distance({1.0, 0.0}, {0.0, 1.0}) == 1.0);
  CHECK(tv_distance({0.6, 0.4}, {0.5, 0.5}) == doctest::Approx(0.1));
  CHECK_THROWS_AS((void)tv_distance({0.5, 0.5}, {1.0}), BinningMismatch);
}

TEST_CASE("sampled stationary law approaches the quadrature density") {
  const Potential1D pot = quadratic_well(-6.0, 6.0);
  RngStream rng(1, 0);
  const auto samples =
      langevin_sample(pot, 1.0, 0.25, 1e-2, 100000, 5000, rng, 10);
  const auto analytic = analytic_stationary(pot, 1.0, 40);
  const StationaryCheck check =
      stationarity_report(samples, pot, analytic, 5000);
  CHECK(check.tv_distance <= 0.05);
  CHECK(check.samples == 100000);
  CHECK(std::accumulate(check.empirical_hist.begin(),
                        check.empirical_hist.end(), std::int64_t{0}) ==
        100000);
}

TEST_CASE("large diffusion flattens the stationary law") {
  const Potential1D pot = double_well(-3.0, 3.0);
  const std::vector<double> uniform(60, 1.0 / 60.0);
  double prev = 2.0;
  for (double d : {0.5, 2.0, 8.0, 32.0}) {
    const double tv = tv_distance(analytic_stationary(pot, d, 60), uniform);
    CHECK(tv < prev);
    prev = tv;
  }
}

TEST_CASE("tv distance shrinks as the chain grows") {
  const Potential1D pot = quadratic_well(-6.0, 6.0);
  const auto analytic = analytic_stationary(pot, 1.0, 30);
  std::vector<double> med_tv;
  for (std::int64_t n : {10000, 100000, 1000000}) {
    std::vector<double> tvs;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RngStream rng(seed, 0);
      const auto samples =
          langevin_sample(pot, 1.0, 0.25, 1e-2, n, 2000, rng, 1);
      tvs.push_back(
          stationarity_report(samples, pot, analytic, 2000).tv_distance);
    }
    std::sort(tvs.begin(), tvs.end());
    med_tv.push_back(tvs[2]);
  }
  CHECK(med_tv[1] < med_tv[0]);
  CHECK(med_tv[2] < med_tv[1]);
}

TEST_CASE("double well: both modes occupied, crossings rise with diffusion") {
  const Potential1D pot = double_well(-3.0, 3.0);

  // mode balance at D = 0.5 (symmetric wells: 1:1 analytically)
  RngStream rng(11, 0);
  const auto samples =
      langevin_sample(pot, 0.5, 0.25, 1e-3, 200000, 20000, rng, 10);
  std::int64_t left = 0, right = 0;
  for (double x : samples) {
    if (x < 0.0) ++left;
    else ++right;
  }
  const double ratio = static_cast<double>(left) / static_cast<double>(right);
  CHECK(ratio > 0.9);
  CHECK(ratio < 1.1);

  // median crossings over seeds decrease as the diffusion floor drops
  std::vector<double> medians;
  for (double d : {1.0, 0.5, 0.25}) {
    std::vector<double> crossings;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      RngStream crng(seed, 3);
      const auto chain =
          langevin_sample(pot, d, 0.25, 1e-3, 200000, 5000, crng, 1);
      crossings.push_back(
          static_cast<double>(count_mode_crossings(chain)));
    }
    std::sort(crossings.begin(), crossings.end());
    medians.push_back(crossings[10]);
  }
  CHECK(medians[0] > medians[1]);
  CHECK(medians[1] > medians[2]);
  CHECK(medians[2] > 0.0);  // the floor keeps exploration alive
}

TEST_CASE("step and argument validation") {
  Potential1D steep = quadratic_well(-1.0, 1.0);
  steep.f_prime = [](double) { return 1e6; };
  RngStream rng(2, 0);
  CHECK_THROWS_AS(
      (void)langevin_sample(steep, 1.0, 0.25, 0.1, 10, 0, rng),
      InvalidStep);
  const Potential1D pot = quadratic_well(-6.0, 6.0);
  CHECK_THROWS_AS(
      (void)langevin_sample(pot, 0.1, 0.25, 1e-3, 10, 0, rng),
      InvalidConfig);  // diffusion below the floor
  CHECK_THROWS_AS((void)langevin_sample(pot, 1.0, 0.25, -1.0, 10, 0, rng),
                  InvalidConfig);
  CHECK_THROWS_AS((void)analytic_stationary(pot, 1.0, 5), InvalidConfig);
}

TEST_CASE("2d separable chain matches the product density") {
  Potential2D pot;
  pot.x = quadratic_well(-5.0, 5.0);
  pot.y = quadratic_well(-5.0, 5.0);
  RngStream rng(3, 0);
  const auto samples = langevin_sample_2d(pot, {1.0, 0.5}, 0.25, 1e-2,
                                          200000, 5000, rng, 20);
  const auto analytic = analytic_stationary_2d(pot, {1.0, 0.5}, 15);
  const auto hist = histogram_2d(samples, pot, 15);
  std::vector<double> emp(hist.size());
  for (std::size_t i = 0; i < hist.size(); ++i) {
    emp[i] = static_cast<double>(hist[i]) / 200000.0;
  }
  CHECK(tv_distance(emp, analytic) <= 0.08);
}

TEST_SUITE_END();
