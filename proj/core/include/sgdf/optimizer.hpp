#pragma once

#include <cstdint>
#include <optional>

#include "sgdf/schedule.hpp"
#include "sgdf/vec.hpp"

namespace sgdf {

struct SgdfHyperparams {
  double alpha = 0.3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  ScheduleSpec schedule{};
  double weight_decay = 0.0;  // decoupled; applied before the filtered step
};

/// Throws InvalidBeta / InvalidConfig when a field is outside its range.
void validate(const SgdfHyperparams& hp);

/// Per-parameter filter memory. m and s are the gradient EMA and the EMA of
/// squared innovations; t counts completed steps. The *_pow members cache
/// beta1^t, beta1^(2t), beta2^t as running products so trajectories replay
/// bit-identically.
struct FilterState {
  ParamVector m;
  ParamVector s;
  std::int64_t t = 0;
  double beta1_pow = 1.0;
  double beta1_sq_pow = 1.0;
  double beta2_pow = 1.0;

  explicit FilterState(std::size_t dim) : m(dim, 0.0), s(dim, 0.0) {}
};

/// Telemetry of one filtered step.
struct StepOutput {
  ParamVector new_params;
  ParamVector filtered_grad;  // the descent estimate the step used
  ParamVector gain;           // per-dimension K, entries in [0, 1]
  ParamVector m_hat;
  ParamVector s_hat;
  double alpha_t = 0.0;
};

/// Result of the filter lines alone (no parameter update).
struct FilterOutput {
  ParamVector g_hat;
  ParamVector gain;
  ParamVector m_hat;
  ParamVector s_hat;
};

/**
 * Advances the filter one step and returns the fused gradient estimate.
 * With t the incremented step counter, per dimension and in order:
 *
 *     m  <- beta1 * m + (1 - beta1) * g
 *     s  <- beta2 * s + (1 - beta2) * (g - m)^2          (updated m)
 *     m^ <- m / (1 - beta1^t)
 *     s^ <- (1-beta1)(1-beta1^(2t)) s / ((1+beta1)(1 - beta2^t))
 *     K  <- s^ / (s^ + ((g - m^)^2 + eps))
 *     g^ <- m^ + K * (g - m^)
 *
 * The K denominator groups (g - m^)^2 + eps so that K equals
 * optimal_gain(s^, (g - m^)^2 + eps) bit-for-bit. A zero denominator
 * (possible only when eps == 0) resolves to K = 0, the eps -> 0 limit.
 * gain_override, when set, replaces every K entry; it exists for
 * reduction tests.
 *
 * Throws NonFiniteGradient for NaN/Inf gradient entries and
 * DimensionMismatch when grad and state disagree.
 */
FilterOutput filter_update(const ParamVector& grad, FilterState& state,
                           double beta1, double beta2, double epsilon,
                           std::optional<double> gain_override = std::nullopt);

/// One full optimizer step: filter_update, then
/// theta <- theta * (1 - alpha_t * weight_decay) - alpha_t * g^,
/// with alpha_t taken from the schedule at the incremented counter.
StepOutput sgdf_step(const ParamVector& params, const ParamVector& grad,
                     FilterState& state, const SgdfHyperparams& hp);

}  // namespace sgdf
