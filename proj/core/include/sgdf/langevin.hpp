#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sgdf/rng.hpp"

namespace sgdf {

/// Scalar potential on a bounded domain with its derivative. f may return
/// +infinity to forbid a region (the stationary density gets zero mass
/// there).
struct Potential1D {
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
  double lo = -1.0;
  double hi = 1.0;
  std::string name;
};

Potential1D quadratic_well(double lo = -6.0, double hi = 6.0);  // theta^2 / 2
Potential1D double_well(double lo = -3.0, double hi = 3.0);  // (theta^2-1)^2

/**
 * Overdamped Langevin sampling by Euler-Maruyama with reflecting
 * boundaries:
 *
 *     theta <- theta - f'(theta) dt + sqrt(2 D dt) xi,   xi ~ N(0, 1)
 *
 * diffusion must respect the variance floor: D >= floor_c > 0. burn_in
 * raw steps are discarded, then n_samples samples are retained, one every
 * `thin` raw steps. Throws InvalidStep if a drift increment ever exceeds
 * the domain width (dt too large for the potential).
 */
std::vector<double> langevin_sample(const Potential1D& pot, double diffusion,
                                    double floor_c, double dt,
                                    std::int64_t n_samples,
                                    std::int64_t burn_in, RngStream& rng,
                                    std::int64_t thin = 1);

/// Per-bin probabilities of the stationary density exp(-f/D)/Z over the
/// potential's domain, integrated by composite Simpson quadrature in the
/// log domain. Throws NonIntegrable when the normalizer degenerates and
/// InvalidConfig for n_bins < 10.
std::vector<double> analytic_stationary(const Potential1D& pot,
                                        double diffusion, int n_bins);

struct StationaryCheck {
  std::vector<std::int64_t> empirical_hist;
  std::vector<double> analytic_density;  // per-bin probabilities, sums to 1
  double tv_distance = 0.0;
  std::int64_t samples = 0;
  std::int64_t burn_in = 0;
};

/// Total variation distance (1/2) sum |p_i - q_i| between two binned
/// distributions. Throws BinningMismatch on length disagreement.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

std::vector<std::int64_t> histogram(const std::vector<double>& samples,
                                    double lo, double hi, int n_bins);

StationaryCheck stationarity_report(const std::vector<double>& samples,
                                    const Potential1D& pot,
                                    const std::vector<double>& analytic,
                                    std::int64_t burn_in);

/// Number of transitions between the basins theta < lo_thresh and
/// theta > hi_thresh (hysteresis suppresses barrier-top chatter).
std::int64_t count_mode_crossings(const std::vector<double>& samples,
                                  double lo_thresh = -0.5,
                                  double hi_thresh = 0.5);

// ------------------------------------------------------------------ 2D ----
// Separable extension: independent per-axis potentials and diffusions, so
// the stationary law is the product of the 1D densities.

struct Potential2D {
  Potential1D x;
  Potential1D y;
};

std::vector<std::array<double, 2>> langevin_sample_2d(
    const Potential2D& pot, std::array<double, 2> diffusion, double floor_c,
    double dt, std::int64_t n_samples, std::int64_t burn_in, RngStream& rng,
    std::int64_t thin = 1);

/// Product of the per-axis stationary densities on an n_bins x n_bins grid,
/// flattened row-major (x index major).
std::vector<double> analytic_stationary_2d(const Potential2D& pot,
                                           std::array<double, 2> diffusion,
                                           int n_bins);

std::vector<std::int64_t> histogram_2d(
    const std::vector<std::array<double, 2>>& samples, const Potential2D& pot,
    int n_bins);

}  // namespace sgdf
