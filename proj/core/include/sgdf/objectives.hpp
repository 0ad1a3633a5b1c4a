#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgdf/rng.hpp"
#include "sgdf/vec.hpp"

namespace sgdf {

/**
 * A stochastic objective oracle: full-information loss and gradient, a
 * noisy gradient whose expectation equals the true gradient, and an
 * optional Hessian-vector product for curvature diagnostics.
 *
 * Objectives are immutable after construction; noisy_grad draws all of its
 * randomness from the caller's stream, so concurrent evaluation with
 * distinct streams is race-free.
 */
class StochasticObjective {
 public:
  virtual ~StochasticObjective() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;

  virtual double loss(const ParamVector& theta) const = 0;
  virtual ParamVector true_grad(const ParamVector& theta) const = 0;
  virtual ParamVector noisy_grad(const ParamVector& theta,
                                 RngStream& rng) const = 0;

  virtual bool has_hvp() const { return false; }
  virtual ParamVector hvp(const ParamVector& theta, const ParamVector& v) const;

  virtual std::optional<ParamVector> optimum() const { return std::nullopt; }
  virtual std::optional<double> optimum_value() const { return std::nullopt; }

  /// Declared upper bound on the per-coordinate noise standard deviation of
  /// noisy_grad. Exact for additive-noise objectives; a conservative
  /// estimate for minibatch objectives.
  virtual double declared_noise_std() const = 0;

  /// Canonical starting point for experiment runs (deterministic).
  virtual ParamVector initial_point() const { return zeros(dim()); }
};

/// f(theta) = 1/2 sum_i lambda_i theta_i^2 with additive N(0, sigma^2 I)
/// gradient noise. Exact hvp, optimum at 0 with f* = 0. Throws
/// InvalidEigenvalue unless every eigenvalue is > 0.
std::unique_ptr<StochasticObjective> noisy_quadratic(
    std::vector<double> eigenvalues, double noise_std);

/// dim eigenvalues log-spaced from lo to hi inclusive.
std::vector<double> log_spaced_eigenvalues(std::size_t dim, double lo,
                                           double hi);

/// f(x, y) = (1-x)^2 + 100 (y - x^2)^2 with additive gradient noise.
/// Optimum (1, 1), f* = 0; analytic gradient and Hessian.
std::unique_ptr<StochasticObjective> noisy_rosenbrock(double noise_std);

struct LogisticConfig {
  std::size_t dim = 10;
  std::size_t n_samples = 200;
  double l2 = 0.05;          // > 0 so the optimum is unique
  std::size_t batch = 10;    // minibatch size for noisy_grad
  std::uint64_t data_seed = 1;
};

/// Mean logistic loss over a generated design matrix plus (l2/2)|theta|^2.
/// Labels are drawn from a planted weight vector; the unique optimum is
/// located by a full-batch Newton solve at construction and cached.
/// noisy_grad is a with-replacement minibatch gradient.
std::unique_ptr<StochasticObjective> synthetic_logistic(
    const LogisticConfig& cfg);

struct MlpConfig {
  std::vector<std::size_t> layer_sizes = {2, 12, 12, 1};  // first 2, last 1
  std::size_t n_samples = 200;
  std::size_t batch = 16;
  std::uint64_t data_seed = 1;
  double data_noise = 0.15;  // jitter of the two-moons points
};

/// Small tanh MLP with a sigmoid/cross-entropy head on a generated
/// two-moons dataset. Hand-written forward/backward; at most 3 hidden
/// layers and 10^4 parameters. hvp is a central finite difference of
/// true_grad. noisy_grad is a with-replacement minibatch gradient.
std::unique_ptr<StochasticObjective> tiny_mlp(const MlpConfig& cfg);

// ---------------------------------------------------------------------
// Online convex stream: per-round losses f_t(theta) = 1/2 |theta - c_t|^2
// with bounded centers and the best fixed comparator in hindsight.

enum class DriftKind { constant, alternating, random_walk };

class OnlineConvexStream {
 public:
  OnlineConvexStream(std::vector<ParamVector> centers);

  std::size_t dim() const { return comparator_.size(); }
  std::int64_t horizon() const {
    return static_cast<std::int64_t>(centers_.size());
  }

  const ParamVector& center(std::int64_t t) const;  // t in [1, horizon]
  double loss(std::int64_t t, const ParamVector& theta) const;
  ParamVector grad(std::int64_t t, const ParamVector& theta) const;

  /// argmin over theta of sum_t f_t = the mean center, computed exactly
  /// from the stored sequence.
  const ParamVector& comparator() const { return comparator_; }
  double comparator_loss(std::int64_t t) const;

  double max_center_norm() const { return max_center_norm_; }

 private:
  std::vector<ParamVector> centers_;
  ParamVector comparator_;
  double max_center_norm_ = 0.0;
};

/// constant: c_t = radius * e1. alternating: scalar centers +r, -r, ...
/// random_walk: per-round steps of size drift_step, reprojected onto the
/// radius ball so gradients stay bounded.
OnlineConvexStream convex_stream(DriftKind kind, std::size_t dim,
                                 std::int64_t horizon, double radius,
                                 double drift_step, std::uint64_t seed);

/// Projection of theta onto the centered L2 ball of the given radius.
ParamVector project_to_ball(const ParamVector& theta, double radius);

}  // namespace sgdf
