#include "sgdf/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgdf/errors.hpp"

namespace sgdf {

Potential1D quadratic_well(double lo, double hi) {
  Potential1D p;
  p.f = [](double x) { return 0.5 * x * x; };
  p.f_prime = [](double x) { return x; };
  p.lo = lo;
  p.hi = hi;
  p.name = "quadratic_well";
  return p;
}

Potential1D double_well(double lo, double hi) {
  Potential1D p;
  p.f = [](double x) {
    const double a = x * x - 1.0;
    return a * a;
  };
  p.f_prime = [](double x) { return 4.0 * x * (x * x - 1.0); };
  p.lo = lo;
  p.hi = hi;
  p.name = "double_well";
  return p;
}

namespace {

void check_langevin_args(const Potential1D& pot, double diffusion,
                         double floor_c, double dt, std::int64_t n_samples,
                         std::int64_t burn_in, std::int64_t thin) {
  if (!(pot.hi > pot.lo)) throw InvalidConfig("langevin: empty domain");
  if (!(floor_c > 0.0)) throw InvalidConfig("langevin: floor_c must be > 0");
  if (!(diffusion >= floor_c)) {
    throw InvalidConfig("langevin: diffusion below the variance floor");
  }
  if (!(dt > 0.0)) throw InvalidConfig("langevin: dt must be > 0");
  if (n_samples < 0 || burn_in < 0 || thin < 1) {
    throw InvalidConfig("langevin: bad sample counts");
  }
}

double reflect_into(double x, double lo, double hi) {
  // fold back into [lo, hi]; the drift-size guard keeps the loop short
  while (x < lo || x > hi) {
    if (x < lo) x = 2.0 * lo - x;
    if (x > hi) x = 2.0 * hi - x;
  }
  return x;
}

double em_step(const Potential1D& pot, double theta, double diffusion,
               double dt, double noise_scale, RngStream& rng) {
  const double drift = pot.f_prime(theta) * dt;
  if (std::abs(drift) > pot.hi - pot.lo) {
    throw InvalidStep("langevin: |f'(theta)|*dt exceeds the domain width");
  }
  (void)diffusion;
  const double next = theta - drift + noise_scale * rng.normal();
  return reflect_into(next, pot.lo, pot.hi);
}

}  // namespace

std::vector<double> langevin_sample(const Potential1D& pot, double diffusion,
                                    double floor_c, double dt,
                                    std::int64_t n_samples,
                                    std::int64_t burn_in, RngStream& rng,
                                    std::int64_t thin) {
  check_langevin_args(pot, diffusion, floor_c, dt, n_samples, burn_in, thin);
  const double noise_scale = std::sqrt(2.0 * diffusion * dt);
  double theta = 0.5 * (pot.lo + pot.hi);
  for (std::int64_t i = 0; i < burn_in; ++i) {
    theta = em_step(pot, theta, diffusion, dt, noise_scale, rng);
  }
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(n_samples));
  for (std::int64_t i = 0; i < n_samples; ++i) {
    for (std::int64_t j = 0; j < thin; ++j) {
      theta = em_step(pot, theta, diffusion, dt, noise_scale, rng);
    }
    samples.push_back(theta);
  }
  return samples;
}

std::vector<double> analytic_stationary(const Potential1D& pot,
                                        double diffusion, int n_bins) {
  if (n_bins < 10) throw InvalidConfig("analytic_stationary: n_bins < 10");
  if (!(diffusion > 0.0)) {
    throw InvalidConfig("analytic_stationary: diffusion must be > 0");
  }
  if (!(pot.hi > pot.lo)) throw InvalidConfig("analytic_stationary: domain");

  // f/D sampled on a Simpson grid; shift by the minimum before
  // exponentiating so Z stays in range for steep potentials.
  constexpr int kPanels = 20;  // per bin, must be even
  const int n_nodes = n_bins * kPanels + 1;
  const double width = (pot.hi - pot.lo) / static_cast<double>(n_bins);
  const double h = width / static_cast<double>(kPanels);

  std::vector<double> phi(static_cast<std::size_t>(n_nodes));
  double phi_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_nodes; ++i) {
    const double x = pot.lo + h * static_cast<double>(i);
    const double v = pot.f(x) / diffusion;
    phi[static_cast<std::size_t>(i)] = v;
    if (std::isfinite(v)) phi_min = std::min(phi_min, v);
  }
  if (!std::isfinite(phi_min)) {
    throw NonIntegrable("analytic_stationary: potential infinite everywhere");
  }

  auto weight = [&](int i) {
    const double v = phi[static_cast<std::size_t>(i)] - phi_min;
    return std::isfinite(v) ? std::exp(-v) : 0.0;
  };

  std::vector<double> mass(static_cast<std::size_t>(n_bins), 0.0);
  double z = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    double acc = weight(b * kPanels) + weight((b + 1) * kPanels);
    for (int j = 1; j < kPanels; ++j) {
      acc += weight(b * kPanels + j) * (j % 2 == 1 ? 4.0 : 2.0);
    }
    const double m = acc * h / 3.0;
    mass[static_cast<std::size_t>(b)] = m;
    z += m;
  }
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw NonIntegrable("analytic_stationary: normalizer degenerate");
  }
  for (double& m : mass) m /= z;
  return mass;
}

double tv_distance(const std::vector<double>& p,
                   const std::vector<double>& q) {
  if (p.size() != q.size()) {
    throw BinningMismatch("tv_distance: bin counts differ");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

std::vector<std::int64_t> histogram(const std::vector<double>& samples,
                                    double lo, double hi, int n_bins) {
  if (n_bins < 1 || !(hi > lo)) throw InvalidConfig("histogram: bad binning");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_bins), 0);
  const double scale = static_cast<double>(n_bins) / (hi - lo);
  for (double x : samples) {
    auto b = static_cast<std::int64_t>((x - lo) * scale);
    b = std::clamp<std::int64_t>(b, 0, n_bins - 1);
    counts[static_cast<std::size_t>(b)] += 1;
  }
  return counts;
}

StationaryCheck stationarity_report(const std::vector<double>& samples,
                                    const Potential1D& pot,
                                    const std::vector<double>& analytic,
                                    std::int64_t burn_in) {
  if (analytic.empty()) throw BinningMismatch("stationarity_report: no bins");
  StationaryCheck check;
  check.empirical_hist =
      histogram(samples, pot.lo, pot.hi, static_cast<int>(analytic.size()));
  check.analytic_density = analytic;
  check.samples = static_cast<std::int64_t>(samples.size());
  check.burn_in = burn_in;
  std::vector<double> emp(analytic.size(), 0.0);
  if (!samples.empty()) {
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (std::size_t i = 0; i < emp.size(); ++i) {
      emp[i] = static_cast<double>(check.empirical_hist[i]) * inv;
    }
  }
  check.tv_distance = tv_distance(emp, analytic);
  return check;
}

std::int64_t count_mode_crossings(const std::vector<double>& samples,
                                  double lo_thresh, double hi_thresh) {
  std::int64_t crossings = 0;
  int basin = 0;  // -1 left, +1 right, 0 undecided
  for (double x : samples) {
    if (x < lo_thresh) {
      if (basin == 1) ++crossings;
      basin = -1;
    } else if (x > hi_thresh) {
      if (basin == -1) ++crossings;
      basin = 1;
    }
  }
  return crossings;
}

std::vector<std::array<double, 2>> langevin_sample_2d(
    const Potential2D& pot, std::array<double, 2> diffusion, double floor_c,
    double dt, std::int64_t n_samples, std::int64_t burn_in, RngStream& rng,
    std::int64_t thin) {
  check_langevin_args(pot.x, diffusion[0], floor_c, dt, n_samples, burn_in,
                      thin);
  check_langevin_args(pot.y, diffusion[1], floor_c, dt, n_samples, burn_in,
                      thin);
  const std::array<double, 2> scale = {std::sqrt(2.0 * diffusion[0] * dt),
                                       std::sqrt(2.0 * diffusion[1] * dt)};
  std::array<double, 2> theta = {0.5 * (pot.x.lo + pot.x.hi),
                                 0.5 * (pot.y.lo + pot.y.hi)};
  auto advance = [&] {
    theta[0] = em_step(pot.x, theta[0], diffusion[0], dt, scale[0], rng);
    theta[1] = em_step(pot.y, theta[1], diffusion[1], dt, scale[1], rng);
  };
  for (std::int64_t i = 0; i < burn_in; ++i) advance();
  std::vector<std::array<double, 2>> samples;
  samples.reserve(static_cast<std::size_t>(n_samples));
  for (std::int64_t i = 0; i < n_samples; ++i) {
    for (std::int64_t j = 0; j < thin; ++j) advance();
    samples.push_back(theta);
  }
  return samples;
}

std::vector<double> analytic_stationary_2d(const Potential2D& pot,
                                           std::array<double, 2> diffusion,
                                           int n_bins) {
  const std::vector<double> px = analytic_stationary(pot.x, diffusion[0], n_bins);
  const std::vector<double> py = analytic_stationary(pot.y, diffusion[1], n_bins);
  std::vector<double> out(px.size() * py.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    for (std::size_t j = 0; j < py.size(); ++j) {
      out[i * py.size() + j] = px[i] * py[j];
    }
  }
  return out;
}

std::vector<std::int64_t> histogram_2d(
    const std::vector<std::array<double, 2>>& samples, const Potential2D& pot,
    int n_bins) {
  if (n_bins < 1) throw InvalidConfig("histogram_2d: bad binning");
  std::vector<std::int64_t> counts(
      static_cast<std::size_t>(n_bins) * static_cast<std::size_t>(n_bins), 0);
  const double sx = static_cast<double>(n_bins) / (pot.x.hi - pot.x.lo);
  const double sy = static_cast<double>(n_bins) / (pot.y.hi - pot.y.lo);
  for (const auto& p : samples) {
    auto bx = static_cast<std::int64_t>((p[0] - pot.x.lo) * sx);
    auto by = static_cast<std::int64_t>((p[1] - pot.y.lo) * sy);
    bx = std::clamp<std::int64_t>(bx, 0, n_bins - 1);
    by = std::clamp<std::int64_t>(by, 0, n_bins - 1);
    counts[static_cast<std::size_t>(bx) * static_cast<std::size_t>(n_bins) +
           static_cast<std::size_t>(by)] += 1;
  }
  return counts;
}

}  // namespace sgdf
