#pragma once

#include <cstdint>
#include <optional>

#include "sgdf/optimizer.hpp"
#include "sgdf/schedule.hpp"
#include "sgdf/vec.hpp"

namespace sgdf {

// ---------------------------------------------------------------- SGD ----

struct SgdHyperparams {
  double alpha = 0.1;
  double momentum = 0.0;  // 0 disables the velocity recursion
  ScheduleSpec schedule{};
  double weight_decay = 0.0;  // decoupled
};

void validate(const SgdHyperparams& hp);

struct SgdState {
  ParamVector velocity;
  std::int64_t t = 0;
  explicit SgdState(std::size_t dim) : velocity(dim, 0.0) {}
};

/// momentum == 0: theta <- theta - alpha_t * g.
/// momentum  > 0: v <- momentum * v + alpha_t * g; theta <- theta - v.
StepOutput sgd_step(const ParamVector& params, const ParamVector& grad,
                    SgdState& state, const SgdHyperparams& hp);

// --------------------------------------------------------------- Adam ----

struct AdamHyperparams {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  ScheduleSpec schedule{};
  double weight_decay = 0.0;  // decoupled (AdamW-style) when nonzero
};

void validate(const AdamHyperparams& hp);

struct AdamState {
  ParamVector m;
  ParamVector v;
  std::int64_t t = 0;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  explicit AdamState(std::size_t dim) : m(dim, 0.0), v(dim, 0.0) {}
};

/// Standard bias-corrected Adam:
///   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
///   theta <- theta - alpha_t * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
StepOutput adam_step(const ParamVector& params, const ParamVector& grad,
                     AdamState& state, const AdamHyperparams& hp);

// -------------------------------------------------------- Wiener-Adam ----

struct WienerAdamHyperparams {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  ScheduleSpec schedule{};
  double weight_decay = 0.0;
  // Test hook: forces every gain entry to the given value. With 0 the
  // trajectory reduces to adam_step bit-for-bit; with 1 the numerator is
  // the raw gradient.
  std::optional<double> gain_override;
};

void validate(const WienerAdamHyperparams& hp);

struct WienerAdamState {
  FilterState filter;
  ParamVector v;
  explicit WienerAdamState(std::size_t dim) : filter(dim), v(dim, 0.0) {}
};

/// Adam with the first-moment estimate replaced by the filtered gradient:
/// the filter lines produce g^, the second moment keeps the raw g^2, and
///   theta <- theta - alpha_t * g^ / (sqrt(v / (1-b2^t)) + eps).
/// The second-moment decay beta2 is shared with the filter's s-EMA.
StepOutput wiener_adam_step(const ParamVector& params, const ParamVector& grad,
                            WienerAdamState& state,
                            const WienerAdamHyperparams& hp);

}  // namespace sgdf
