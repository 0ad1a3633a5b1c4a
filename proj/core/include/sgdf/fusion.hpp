#pragma once

#include <cstdint>

namespace sgdf {

/// Scalar Gaussian belief. Per-dimension quantities only; vector problems
/// apply these functions index by index.
struct GaussianBelief {
  double mean = 0.0;
  double variance = 0.0;  // >= 0
};

/// Minimum-variance interpolation weight between a prior with variance
/// var_m and an observation with variance var_g:
///
///     K = var_m / (var_m + var_g),  K in [0, 1].
///
/// Throws DegenerateFusion when both variances are zero.
double optimal_gain(double var_m, double var_g);

/// Product-of-Gaussians fusion. The fused mean is computed through the
/// gain form prior.mean + K * (obs.mean - prior.mean) so that fuse and
/// optimal_gain agree bit-for-bit; the fused variance is
/// var_m * var_g / (var_m + var_g), which never exceeds either input.
/// Both variances zero with differing means is contradictory certainty
/// and throws DegenerateFusion.
GaussianBelief fuse(const GaussianBelief& prior, const GaussianBelief& obs);

/// Ratio Var(m_t) / sigma_g^2 for an exponential moving average
/// m_t = beta1 * m_{t-1} + (1 - beta1) * g_t over an i.i.d. stream:
///
///     (1 - beta1) * (1 - beta1^(2t)) / (1 + beta1)
///
/// Limit for t -> infinity is (1 - beta1) / (1 + beta1); beta1 = 0 gives 1.
/// Throws InvalidBeta for beta1 outside [0, 1) or t < 1.
double momentum_variance_factor(double beta1, std::int64_t t);

}  // namespace sgdf
