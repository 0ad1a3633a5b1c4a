#include "sgdf/fusion.hpp"

#include <cmath>

#include "sgdf/errors.hpp"

namespace sgdf {

double optimal_gain(double var_m, double var_g) {
  if (var_m < 0.0 || var_g < 0.0) {
    throw InvalidConfig("optimal_gain: negative variance");
  }
  if (var_m + var_g == 0.0) {
    throw DegenerateFusion("optimal_gain: both variances zero");
  }
  return var_m / (var_m + var_g);
}

GaussianBelief fuse(const GaussianBelief& prior, const GaussianBelief& obs) {
  if (prior.variance < 0.0 || obs.variance < 0.0) {
    throw InvalidConfig("fuse: negative variance");
  }
  if (prior.variance + obs.variance == 0.0) {
    if (prior.mean == obs.mean) return {prior.mean, 0.0};
    throw DegenerateFusion("fuse: zero variances with differing means");
  }
  const double k = optimal_gain(prior.variance, obs.variance);
  GaussianBelief out;
  out.mean = prior.mean + k * (obs.mean - prior.mean);
  out.variance =
      prior.variance * obs.variance / (prior.variance + obs.variance);
  return out;
}

double momentum_variance_factor(double beta1, std::int64_t t) {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) {
    throw InvalidBeta("momentum_variance_factor: beta1 outside [0,1)");
  }
  if (t < 1) throw InvalidBeta("momentum_variance_factor: t < 1");
  const double b2t = std::pow(beta1, 2.0 * static_cast<double>(t));
  return (1.0 - beta1) * (1.0 - b2t) / (1.0 + beta1);
}

}  // namespace sgdf
